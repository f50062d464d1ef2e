"""Minimal dense network with exact reverse-mode gradients, plus Adam.

Parameters live in one flat float64 vector so optimizers, checkpoints, and
finite-difference checks all see a single array. Hidden activations are
tanh; the output layer is affine.
"""

from __future__ import annotations

import numpy as np

from avlab.errors import UsageError


class Mlp:
    """Affine-tanh stack; `dims` lists layer widths input -> ... -> output."""

    def __init__(self, dims, params: np.ndarray | None = None):
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) < 2:
            raise UsageError("Mlp needs at least input and output dims")
        self.n_params = sum(
            (i + 1) * o for i, o in zip(self.dims[:-1], self.dims[1:])
        )
        if params is None:
            params = np.zeros(self.n_params)
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise UsageError(f"expected {self.n_params} parameters, got {params.shape}")
        if not np.all(np.isfinite(params)):
            raise UsageError("parameters must be finite")
        self.params = params

    @classmethod
    def create(cls, dims, rng: np.random.Generator, final_scale: float = 1.0) -> "Mlp":
        """Gaussian fan-in init; the output layer is scaled by final_scale."""
        net = cls(dims)
        chunks = []
        n_layers = len(net.dims) - 1
        for li, (fan_in, fan_out) in enumerate(zip(net.dims[:-1], net.dims[1:])):
            scale = 1.0 / np.sqrt(fan_in)
            if li == n_layers - 1:
                scale *= final_scale
            chunks.append(rng.standard_normal(fan_out * fan_in) * scale)
            chunks.append(np.zeros(fan_out))
        net.params = np.concatenate(chunks)
        return net

    def _layers(self, params: np.ndarray | None = None):
        p = self.params if params is None else params
        out = []
        idx = 0
        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            w = p[idx : idx + fan_out * fan_in].reshape(fan_out, fan_in)
            idx += fan_out * fan_in
            b = p[idx : idx + fan_out]
            idx += fan_out
            out.append((w, b))
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray):
        """Returns (output, cache); cache holds each layer's input for backward()."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.dims[0]:
            raise UsageError(f"input dim {h.shape[1]} != expected {self.dims[0]}")
        layers = self._layers()
        cache = []
        for li, (w, b) in enumerate(layers):
            cache.append(h)
            z = h @ w.T + b
            h = np.tanh(z) if li < len(layers) - 1 else z
        y = h[0] if squeeze else h
        return y, cache

    def backward(self, cache, upstream: np.ndarray):
        """Exact gradient of sum(upstream * output) w.r.t. (params, input).

        `upstream` has the batch output shape; returns (flat param grad,
        input grad with the batch shape).
        """
        g = np.atleast_2d(np.asarray(upstream, dtype=float))
        layers = self._layers()
        if g.shape != (cache[0].shape[0], self.dims[-1]):
            raise UsageError("upstream gradient shape mismatch")
        grads = [None] * len(layers)
        for li in range(len(layers) - 1, -1, -1):
            w, _ = layers[li]
            h_in = cache[li]
            grads[li] = (g.T @ h_in, g.sum(axis=0))
            g = g @ w
            if li > 0:
                # h_in is the tanh output of layer li-1.
                g = g * (1.0 - h_in * h_in)
        flat = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
        return flat, g


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def mlp_gradient(net: Mlp, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Flat parameter gradient of sum(upstream * net(x))."""
    _, cache = net.forward_cached(x)
    grad, _ = net.backward(cache, upstream)
    return grad


def clip_grad_norm(grad: np.ndarray, max_norm: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if max_norm > 0 and norm > max_norm:
        return grad * (max_norm / norm)
    return grad


class Adam:
    """Adaptive moment estimation over a flat parameter vector."""

    def __init__(self, n_params: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
