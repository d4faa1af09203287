from .core import Adam, ParamStore, adam_step, grad_check, load_checkpoint, save_checkpoint
from .layers import (
    GRU,
    MLP,
    Attention,
    Linear,
    PointEncoder,
    cross_attention_backward,
    cross_attention_forward,
    dense_backward,
    dense_forward,
    softmax,
    softmax_backward,
)
