"""Parameter storage, Adam, the finite-difference harness, checkpoints.

The network stack is deliberately small: parameters live in a flat named
store, every layer ships a hand-derived backward, and `grad_check` is the
single verification tool — central differences against the analytic gradient
at double precision.
"""

import struct

import numpy as np

from ..errors import MissingGradient, ParseError


class ParamStore:
    """Named parameters with matching gradient slots.

    Gradients are None until a backward pass populates them; `adam_step`
    refuses to run on unpopulated slots.
    """

    def __init__(self, seed=0, dtype=np.float64):
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.params = {}
        self.grads = {}
        self._rng = np.random.default_rng(seed)

    def add(self, name, shape, init="glorot"):
        if name in self.params:
            raise ValueError(f"duplicate parameter name: {name}")
        if init == "zeros":
            value = np.zeros(shape, dtype=self.dtype)
        elif init == "glorot":
            fan_in = shape[0] if len(shape) > 1 else shape[0]
            fan_out = shape[-1]
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            value = self._rng.uniform(-bound, bound, size=shape).astype(self.dtype)
        else:
            raise ValueError(f"unknown init: {init}")
        self.params[name] = value
        self.grads[name] = None
        return self.params[name]

    def accumulate(self, name, grad):
        if self.grads[name] is None:
            self.grads[name] = np.array(grad, dtype=self.dtype)
        else:
            self.grads[name] += grad

    def zero_grads(self):
        for name in self.grads:
            self.grads[name] = None

    def names(self):
        return list(self.params)


class Adam:
    """Standard Adam with bias correction; state lives on the instance."""

    def __init__(self, store, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in store.params.items()}
        self.v = {k: np.zeros_like(v) for k, v in store.params.items()}

    def step(self):
        missing = [k for k, g in self.store.grads.items() if g is None]
        if missing:
            raise MissingGradient(f"no gradient for: {', '.join(sorted(missing))}")
        self.step_count += 1
        t = self.step_count
        for name, param in self.store.params.items():
            g = self.store.grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * (g * g)
            m_hat = self.m[name] / (1 - self.beta1 ** t)
            v_hat = self.v[name] / (1 - self.beta2 ** t)
            param -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(store, state, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """Functional single step; `state` is an Adam bound to the store."""
    if state is None:
        state = Adam(store, lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    state.lr = lr
    state.beta1 = beta1
    state.beta2 = beta2
    state.eps = eps
    state.step()
    return state


def grad_check(fn, inputs, h=1e-6):
    """Max relative error between analytic gradients and central differences.

    fn(inputs) must return (scalar loss, [grad per input]) with the analytic
    gradients. Inputs are perturbed coordinate-wise in double precision.
    Relative error denominator is max(|analytic|, |numeric|, 1e-8).
    """
    inputs = [np.array(x, dtype=np.float64) for x in inputs]
    _, analytic = fn(inputs)
    analytic = [np.asarray(g, dtype=np.float64) for g in analytic]
    worst = 0.0
    for idx, x in enumerate(inputs):
        flat = x.reshape(-1)
        num = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up, _ = fn(inputs)
            flat[i] = orig - h
            down, _ = fn(inputs)
            flat[i] = orig
            num[i] = (up - down) / (2.0 * h)
        ana = analytic[idx].reshape(-1)
        denom = np.maximum(np.maximum(np.abs(ana), np.abs(num)), 1e-8)
        worst = max(worst, float(np.max(np.abs(ana - num) / denom)))
    return worst


# ---------------------------------------------------------------------------
# Checkpoints: magic NCK1, little-endian, float32 payloads.
# ---------------------------------------------------------------------------

_NCK_MAGIC = b"NCK1"


def save_checkpoint(store, path):
    with open(path, "wb") as fh:
        fh.write(_NCK_MAGIC)
        fh.write(struct.pack("<I", len(store.params)))
        for name, value in store.params.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", value.ndim))
            fh.write(np.asarray(value.shape, dtype="<u4").tobytes())
            fh.write(value.astype("<f4").tobytes())


def load_checkpoint(path):
    """Returns {name: float32 ndarray}; raises ParseError on bad files."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != _NCK_MAGIC:
        raise ParseError(f"{path}: missing NCK1 magic")
    (count,) = struct.unpack_from("<I", blob, 4)
    off = 8
    out = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", blob, off)
            off += 4
            name = blob[off:off + nlen].decode("utf-8")
            off += nlen
            (rank,) = struct.unpack_from("<I", blob, off)
            off += 4
            dims = np.frombuffer(blob, dtype="<u4", count=rank, offset=off)
            off += 4 * rank
            n = int(np.prod(dims)) if rank else 1
            data = np.frombuffer(blob, dtype="<f4", count=n, offset=off)
            off += 4 * n
            out[name] = data.reshape(dims.astype(np.int64))
    except (struct.error, ValueError) as exc:
        raise ParseError(f"{path}: truncated checkpoint") from exc
    if off != len(blob):
        raise ParseError(f"{path}: trailing bytes")
    return out


def restore_into(store, loaded):
    """Copy checkpoint values into an existing store (shapes must match)."""
    for name, value in loaded.items():
        if name not in store.params:
            raise ParseError(f"checkpoint has unknown parameter {name}")
        if tuple(value.shape) != store.params[name].shape:
            raise ParseError(f"shape mismatch for {name}")
        store.params[name][...] = value.astype(store.dtype)
