"""LiDAR mocap toolkit: synthesis, preprocessing, networks, optimizers, metrics."""

__version__ = "0.1.0"
