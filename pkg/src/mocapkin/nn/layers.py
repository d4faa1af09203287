"""Differentiable layers with hand-derived backward passes.

Everything here is a pure function of (parameters, inputs) plus an explicit
cache handed from forward to backward. No autodiff graph: backward order is
the caller's responsibility, which keeps the layer set auditable and lets
`grad_check` exercise each path directly.
"""

import numpy as np

from ..errors import ShapeMismatch

_ACTS = ("none", "relu", "tanh", "sigmoid")


def _apply_act(pre, activation):
    if activation == "none":
        return pre
    if activation == "relu":
        return np.maximum(pre, 0.0)
    if activation == "tanh":
        return np.tanh(pre)
    if activation == "sigmoid":
        return 1.0 / (1.0 + np.exp(-pre))
    raise ValueError(f"unknown activation {activation!r}")


def _act_grad(out, pre, activation):
    if activation == "none":
        return np.ones_like(pre)
    if activation == "relu":
        return (pre > 0.0).astype(pre.dtype)
    if activation == "tanh":
        return 1.0 - out * out
    if activation == "sigmoid":
        return out * (1.0 - out)
    raise ValueError(f"unknown activation {activation!r}")


def dense_forward(x, weight, bias, activation="none"):
    """y = act(x @ W + b); x (..., I) -> y (..., O). Returns (y, cache).

    bias may be None for bias-free projections.
    """
    x = np.asarray(x)
    if x.shape[-1] != weight.shape[0]:
        raise ShapeMismatch(f"dense: x {x.shape} vs W {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[1],):
        raise ShapeMismatch(f"dense: b {bias.shape} vs W {weight.shape}")
    pre = x @ weight if bias is None else x @ weight + bias
    out = _apply_act(pre, activation)
    return out, (x, weight, pre, out, activation)


def dense_backward(grad_out, cache):
    """Gradients (dx, dW, db) for dense_forward."""
    x, weight, pre, out, activation = cache
    d_pre = grad_out * _act_grad(out, pre, activation)
    x2 = x.reshape(-1, x.shape[-1])
    d2 = d_pre.reshape(-1, d_pre.shape[-1])
    d_w = x2.T @ d2
    d_b = d2.sum(axis=0)
    d_x = d_pre @ weight.T
    return d_x, d_w, d_b


class Linear:
    """Store-bound dense layer."""

    def __init__(self, store, name, n_in, n_out, activation="none", use_bias=True):
        assert activation in _ACTS
        self.wname = f"{name}.W"
        self.bname = f"{name}.b" if use_bias else None
        self.activation = activation
        store.add(self.wname, (n_in, n_out))
        if use_bias:
            store.add(self.bname, (n_out,), init="zeros")

    def forward(self, store, x):
        bias = store.params[self.bname] if self.bname else None
        return dense_forward(x, store.params[self.wname], bias, self.activation)

    def backward(self, store, cache, grad_out):
        d_x, d_w, d_b = dense_backward(grad_out, cache)
        store.accumulate(self.wname, d_w)
        if self.bname:
            store.accumulate(self.bname, d_b)
        return d_x


class MLP:
    """Chain of Linear layers; `activation` on all but optionally the last."""

    def __init__(self, store, name, widths, activation="relu", final_activation="none"):
        self.layers = []
        for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
            act = activation if i < len(widths) - 2 else final_activation
            self.layers.append(Linear(store, f"{name}.{i}", a, b, act))

    def forward(self, store, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(store, x)
            caches.append(cache)
        return x, caches

    def backward(self, store, caches, grad_out):
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad_out = layer.backward(store, cache, grad_out)
        return grad_out


class PointEncoder:
    """Shared per-point MLP followed by channel-wise max pooling over points.

    forward: points (B, N, C_in) -> (per_point (B, N, C), pooled (B, C)).
    Pooling gradient routes only through the argmax point per channel, ties
    broken to the lowest point index (np.argmax convention).
    """

    def __init__(self, store, name, widths, in_dim=3):
        self.mlp = MLP(store, name, [in_dim] + list(widths),
                       activation="relu", final_activation="relu")

    def forward(self, store, points):
        points = np.asarray(points)
        if points.ndim != 3:
            raise ShapeMismatch(f"point encoder expects (B, N, C), got {points.shape}")
        feats, caches = self.mlp.forward(store, points)
        arg = np.argmax(feats, axis=1)  # (B, C)
        pooled = np.take_along_axis(feats, arg[:, None, :], axis=1)[:, 0, :]
        return feats, pooled, (caches, arg, feats.shape)

    def backward(self, store, cache, grad_points_feats, grad_pooled):
        caches, arg, shape = cache
        dtype = grad_pooled.dtype if grad_pooled is not None else grad_points_feats.dtype
        grad = np.zeros(shape, dtype=dtype)
        if grad_points_feats is not None:
            grad = grad + grad_points_feats
        if grad_pooled is not None:
            b_idx = np.arange(shape[0])[:, None]
            c_idx = np.arange(shape[2])[None, :]
            np.add.at(grad, (b_idx, arg, c_idx), grad_pooled)
        return self.mlp.backward(store, caches, grad)


class GRU:
    """Multi-layer gated recurrent unit over (L, B, I) sequences."""

    def __init__(self, store, name, input_dim, hidden_dim, num_layers=1):
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.names = []
        for layer in range(num_layers):
            in_dim = input_dim if layer == 0 else hidden_dim
            prefix = f"{name}.l{layer}"
            store.add(f"{prefix}.Wx", (in_dim, 3 * hidden_dim))
            store.add(f"{prefix}.Wh", (hidden_dim, 3 * hidden_dim))
            store.add(f"{prefix}.b", (3 * hidden_dim,), init="zeros")
            self.names.append(prefix)

    def forward(self, store, x, h0=None):
        """x (L, B, I) -> outputs (L, B, H) of the last layer."""
        x = np.asarray(x)
        if x.ndim != 3:
            raise ShapeMismatch(f"gru expects (L, B, I), got {x.shape}")
        length, batch, _ = x.shape
        hid = self.hidden_dim
        if h0 is None:
            h0 = np.zeros((self.num_layers, batch, hid), dtype=x.dtype)
        layer_caches = []
        seq = x
        for layer, prefix in enumerate(self.names):
            w_x = store.params[f"{prefix}.Wx"]
            w_h = store.params[f"{prefix}.Wh"]
            bias = store.params[f"{prefix}.b"]
            h_prev = h0[layer]
            outs = np.empty((length, batch, hid), dtype=x.dtype)
            x_proj = seq @ w_x + bias  # (L, B, 3H), input part of all gates
            steps = []
            for t in range(length):
                gates_h = h_prev @ w_h[:, :2 * hid]
                z = 1.0 / (1.0 + np.exp(-(x_proj[t, :, :hid] + gates_h[:, :hid])))
                r = 1.0 / (1.0 + np.exp(-(x_proj[t, :, hid:2 * hid]
                                          + gates_h[:, hid:])))
                pre_n = x_proj[t, :, 2 * hid:] + (r * h_prev) @ w_h[:, 2 * hid:]
                n = np.tanh(pre_n)
                h_new = (1.0 - z) * n + z * h_prev
                steps.append((seq[t], h_prev, z, r, n))
                outs[t] = h_new
                h_prev = h_new
            layer_caches.append((prefix, steps))
            seq = outs
        return seq, (layer_caches, x.shape, h0.shape)

    def backward(self, store, cache, grad_out):
        """BPTT; grad_out (L, B, H) for the last layer. Returns (dx, dh0)."""
        layer_caches, x_shape, h0_shape = cache
        hid = self.hidden_dim
        grad_seq = np.asarray(grad_out)
        dtype = grad_seq.dtype
        d_h0 = np.zeros(h0_shape, dtype=dtype)
        for layer in range(self.num_layers - 1, -1, -1):
            prefix, steps = layer_caches[layer]
            w_x = store.params[f"{prefix}.Wx"]
            w_h = store.params[f"{prefix}.Wh"]
            in_dim = w_x.shape[0]
            length = len(steps)
            batch = grad_seq.shape[1]
            d_wx = np.zeros_like(w_x)
            d_wh = np.zeros_like(w_h)
            d_b = np.zeros(3 * hid, dtype=dtype)
            d_inputs = np.zeros((length, batch, in_dim), dtype=dtype)
            d_h = np.zeros((batch, hid), dtype=dtype)
            for t in range(length - 1, -1, -1):
                x_t, h_prev, z, r, n = steps[t]
                d_h = d_h + grad_seq[t]
                d_z = d_h * (h_prev - n)
                d_n = d_h * (1.0 - z)
                d_hprev = d_h * z
                d_pre_n = d_n * (1.0 - n * n)
                d_inputs[t] += d_pre_n @ w_x[:, 2 * hid:].T
                d_rh = d_pre_n @ w_h[:, 2 * hid:].T
                d_r = d_rh * h_prev
                d_hprev += d_rh * r
                d_wx[:, 2 * hid:] += x_t.T @ d_pre_n
                d_wh[:, 2 * hid:] += (r * h_prev).T @ d_pre_n
                d_b[2 * hid:] += d_pre_n.sum(axis=0)
                d_az = d_z * z * (1.0 - z)
                d_ar = d_r * r * (1.0 - r)
                d_inputs[t] += d_az @ w_x[:, :hid].T + d_ar @ w_x[:, hid:2 * hid].T
                d_hprev += d_az @ w_h[:, :hid].T + d_ar @ w_h[:, hid:2 * hid].T
                d_wx[:, :hid] += x_t.T @ d_az
                d_wx[:, hid:2 * hid] += x_t.T @ d_ar
                d_wh[:, :hid] += h_prev.T @ d_az
                d_wh[:, hid:2 * hid] += h_prev.T @ d_ar
                d_b[:hid] += d_az.sum(axis=0)
                d_b[hid:2 * hid] += d_ar.sum(axis=0)
                d_h = d_hprev
            d_h0[layer] = d_h
            store.accumulate(f"{prefix}.Wx", d_wx)
            store.accumulate(f"{prefix}.Wh", d_wh)
            store.accumulate(f"{prefix}.b", d_b)
            grad_seq = d_inputs
        assert grad_seq.shape == x_shape
        return grad_seq, d_h0


def softmax(x, axis=-1):
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(probs, grad_probs, axis=-1):
    """VJP of softmax given its output `probs`."""
    inner = np.sum(grad_probs * probs, axis=axis, keepdims=True)
    return probs * (grad_probs - inner)


def cross_attention_forward(query, key, value):
    """softmax(Q K^T / sqrt(D)) V with row-max stabilization.

    query (B, Tq, D), key/value (B, Tk, D) -> (B, Tq, D). Returns (out, cache).
    """
    query = np.asarray(query)
    key = np.asarray(key)
    value = np.asarray(value)
    if query.shape[-1] != key.shape[-1] or key.shape[:-1] != value.shape[:-1]:
        raise ShapeMismatch(
            f"attention shapes: Q {query.shape} K {key.shape} V {value.shape}")
    scale = 1.0 / np.sqrt(query.shape[-1])
    logits = np.einsum("bqd,bkd->bqk", query, key) * scale
    attn = softmax(logits, axis=-1)
    out = np.einsum("bqk,bkd->bqd", attn, value)
    return out, (query, key, value, attn, scale)


def cross_attention_backward(grad_out, cache):
    """Gradients (dQ, dK, dV) for cross_attention_forward."""
    query, key, value, attn, scale = cache
    d_value = np.einsum("bqk,bqd->bkd", attn, grad_out)
    d_attn = np.einsum("bqd,bkd->bqk", grad_out, value)
    d_logits = softmax_backward(attn, d_attn, axis=-1) * scale
    d_query = np.einsum("bqk,bkd->bqd", d_logits, key)
    d_key = np.einsum("bqk,bqd->bkd", d_logits, query)
    return d_query, d_key, d_value


class Attention:
    """Single-head cross-attention with learned Q/K/V/out projections.

    The key projection is bias-free: a shared key offset cancels in softmax,
    so a key bias would be an exactly-redundant parameter.
    """

    def __init__(self, store, name, query_dim, kv_dim, dim):
        self.q = Linear(store, f"{name}.q", query_dim, dim)
        self.k = Linear(store, f"{name}.k", kv_dim, dim, use_bias=False)
        self.v = Linear(store, f"{name}.v", kv_dim, dim)
        self.o = Linear(store, f"{name}.o", dim, dim)

    def forward(self, store, query_in, kv_in):
        q, cq = self.q.forward(store, query_in)
        k, ck = self.k.forward(store, kv_in)
        v, cv = self.v.forward(store, kv_in)
        attn_out, cattn = cross_attention_forward(q, k, v)
        out, co = self.o.forward(store, attn_out)
        return out, (cq, ck, cv, cattn, co)

    def backward(self, store, cache, grad_out):
        cq, ck, cv, cattn, co = cache
        d_attn_out = self.o.backward(store, co, grad_out)
        d_q, d_k, d_v = cross_attention_backward(d_attn_out, cattn)
        d_query_in = self.q.backward(store, cq, d_q)
        d_kv = self.k.backward(store, ck, d_k) + self.v.backward(store, cv, d_v)
        return d_query_in, d_kv
