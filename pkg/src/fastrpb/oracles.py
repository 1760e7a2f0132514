"""Brute-force reference computations used by ``verify`` and ``bench --check``."""

import numpy as np

from .attention import EPS
from .kernels import feature_map
from .structured import CirculantSpec, ToeplitzSpec, circulant_matvec

__all__ = [
    "max_rel_error",
    "softmax_attention_direct",
    "kernel_attention_quadratic",
    "toeplitz_exact_embedding_matmat",
    "central_difference",
]


def max_rel_error(actual, expected):
    """``max |a - e| / max |e|`` (absolute when ``expected`` is all zero)."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.shape != expected.shape:
        return np.inf
    diff = float(np.max(np.abs(actual - expected), initial=0.0))
    scale = float(np.max(np.abs(expected), initial=0.0))
    return diff / scale if scale > 0 else diff


def softmax_attention_direct(inp):
    """Unstabilized ``softmax(Q K^T / sqrt(D)) V``; small inputs only."""
    e = np.exp(inp.Q @ inp.K.T / np.sqrt(inp.dim))
    return (e / e.sum(axis=1, keepdims=True)) @ inp.V


def kernel_attention_quadratic(spec, inp):
    """O(N^2) kernel attention: every ``sim(q_m, k_n)`` is formed explicitly."""
    Q, K = inp.Q, inp.K
    if spec.variant == "sikf":
        Q = Q - Q.max(axis=1, keepdims=True)
        K = K - K.max()
    phi_q = feature_map(spec, Q)
    phi_k = feature_map(spec, K)
    n = inp.seq_len
    out = np.zeros_like(inp.V)
    for m in range(n):
        sims = np.array([phi_q[m] @ phi_k[j] for j in range(n)])
        out[m] = sims @ inp.V / (sims.sum() + EPS)
    return out


def toeplitz_exact_embedding_matmat(spec, V):
    """Toeplitz product through the (2N-1)-sized circulant extension.

    The circulant's first column is ``(w_-N+1, w_N-1, w_N-2, ..., w_-N+2)``;
    V is padded above with N-1 zero rows and the first N output rows kept.
    """
    n = spec.side
    w = spec.weights
    size = 2 * n - 1
    first = np.empty(size)
    first[0] = w[0]
    # c_k = w_{N-k} lives at storage offset 2N-1-k
    first[1:] = w[size - np.arange(1, size)]
    circ = CirculantSpec(first)
    out = np.empty_like(V, dtype=np.float64)
    for j in range(V.shape[1]):
        col = np.concatenate([np.zeros(n - 1), V[:, j]])
        out[:, j] = circulant_matvec(circ, col)[:n]
    return out


def central_difference(fn, x, step=1e-6):
    """Gradient of scalar ``fn`` at array ``x`` by central differences."""
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = fn(x)
        flat[i] = orig - step
        lo = fn(x)
        flat[i] = orig
        g[i] = (hi - lo) / (2 * step)
    return grad
