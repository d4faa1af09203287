import numpy as np


def fd_informative(grads, floor=1e-5):
    """True when central differences at h=1e-6 can certify 1e-4 accuracy.

    The FD noise floor is ~1e-10 absolute, so coordinates with tiny-but-
    nonzero true gradients cannot be resolved to 1e-4 relative error no
    matter how correct the backward pass is. Exactly-zero coordinates are
    fine: dead paths reproduce bitwise in the perturbed evaluations.
    Seeded check configurations are drawn until they satisfy this.
    """
    for g in grads:
        mag = np.abs(np.asarray(g, dtype=np.float64))
        if np.any((mag > 0.0) & (mag < floor)):
            return False
    return True
