"""Relative positional bias terms ``W @ V`` for sequences and square images.

The 1D bias is a Toeplitz matrix ``W[n][m] = w[m - n]``.  The 2D bias acts
on row-major flattened images (pixel ``(n, m)`` -> row ``n * N + m``) with

    W2d[(n, m)][(l, k)] = weights_v[l - n] + weights_h[k - m]

The vertical term only sees per-image-row sums of V and the horizontal term
only per-image-column sums, so each reduces to one N x N Toeplitz product.
"""

from dataclasses import dataclass

import numpy as np

from ._arrays import as_matrix, as_vector, frozen
from .errors import OracleSizeError
from .structured import ToeplitzSpec, toeplitz_dense, toeplitz_matmat, toeplitz_matmat_backward

__all__ = [
    "RelativeBias1D",
    "RelativeBias2D",
    "bias1d_apply",
    "bias1d_backward",
    "bias1d_dense",
    "bias2d_apply",
    "bias2d_backward",
    "bias2d_dense",
    "bias2d_tensors",
    "DENSE_2D_MAX_PIXELS",
]

# Largest pixel count for which the N^2 x N^2 dense 2D oracle is built.
DENSE_2D_MAX_PIXELS = 4096


@dataclass(frozen=True)
class RelativeBias1D:
    seq_len: int
    weights: np.ndarray

    def __post_init__(self):
        spec = ToeplitzSpec(self.seq_len, self.weights)
        object.__setattr__(self, "seq_len", spec.side)
        object.__setattr__(self, "weights", spec.weights)

    @classmethod
    def zeros(cls, seq_len):
        return cls(seq_len, np.zeros(2 * seq_len - 1))

    @classmethod
    def identity(cls, seq_len):
        w = np.zeros(2 * seq_len - 1)
        w[seq_len - 1] = 1.0
        return cls(seq_len, w)

    @property
    def toeplitz(self):
        return ToeplitzSpec(self.seq_len, self.weights)

    @property
    def num_parameters(self):
        return self.weights.shape[0]


@dataclass(frozen=True, init=False)
class RelativeBias2D:
    """Bias for an N x N image.

    With ``shared=True`` (the default) one weight vector serves both the
    vertical and the horizontal distance and ``weights_v is weights_h``.
    """

    side: int
    weights_h: np.ndarray
    weights_v: np.ndarray
    shared: bool

    def __init__(self, side, weights_h, weights_v=None, shared=None):
        if shared is None:
            shared = weights_v is None
        h = ToeplitzSpec(side, weights_h).weights
        if shared:
            if weights_v is not None and not np.array_equal(as_vector(weights_v), h):
                raise ValueError("shared bias given two different weight vectors")
            v = h
        else:
            if weights_v is None:
                raise ValueError("separate-weights bias needs weights_v")
            v = ToeplitzSpec(side, weights_v).weights
        object.__setattr__(self, "side", int(side))
        object.__setattr__(self, "weights_h", h)
        object.__setattr__(self, "weights_v", v)
        object.__setattr__(self, "shared", bool(shared))

    @property
    def num_pixels(self):
        return self.side * self.side

    @property
    def num_parameters(self):
        n = 2 * self.side - 1
        return n if self.shared else 2 * n

    @property
    def vertical(self):
        return ToeplitzSpec(self.side, self.weights_v)

    @property
    def horizontal(self):
        return ToeplitzSpec(self.side, self.weights_h)


def bias1d_apply(bias, V):
    V = as_matrix(V, "V")
    if V.shape[0] != bias.seq_len:
        raise ValueError(f"V has {V.shape[0]} rows, bias expects {bias.seq_len}")
    return toeplitz_matmat(bias.toeplitz, V)


def bias1d_backward(bias, V, G):
    return toeplitz_matmat_backward(bias.toeplitz, V, G)


def bias1d_dense(bias, V):
    """Materialize the N x N bias and multiply; quadratic reference path."""
    V = as_matrix(V, "V")
    if V.shape[0] != bias.seq_len:
        raise ValueError(f"V has {V.shape[0]} rows, bias expects {bias.seq_len}")
    return toeplitz_dense(bias.toeplitz) @ V


def bias2d_tensors(bias):
    """Vertical and horizontal 4-index tensors ``X[n,m,l,k]``, ``Y[n,m,l,k]``.

    Built by direct index enumeration; oracle use only.
    """
    n = bias.side
    if n * n > DENSE_2D_MAX_PIXELS:
        raise OracleSizeError(
            f"dense 2D bias for side {n} exceeds {DENSE_2D_MAX_PIXELS} pixels"
        )
    r = np.arange(n)
    off = n - 1
    # X depends on (n, l) only, Y on (m, k) only
    x2 = bias.weights_v[r[None, :] - r[:, None] + off]
    y2 = bias.weights_h[r[None, :] - r[:, None] + off]
    X = np.broadcast_to(x2[:, None, :, None], (n, n, n, n)).copy()
    Y = np.broadcast_to(y2[None, :, None, :], (n, n, n, n)).copy()
    return X, Y


def bias2d_dense(bias):
    """The N^2 x N^2 matrix ``X_flat + Y_flat``."""
    X, Y = bias2d_tensors(bias)
    p = bias.num_pixels
    return X.reshape(p, p) + Y.reshape(p, p)


def _as_image_values(bias, V):
    V = as_matrix(V, "V")
    p = bias.num_pixels
    if V.shape[0] != p:
        raise ValueError(
            f"V has {V.shape[0]} rows, expected {p} = {bias.side}^2 flattened pixels"
        )
    return V, V.reshape(bias.side, bias.side, V.shape[1])


def bias2d_apply(bias, V):
    V, Vm = _as_image_values(bias, V)
    n, d = bias.side, V.shape[1]
    row_sums = Vm.sum(axis=1)  # indexed by image row n
    col_sums = Vm.sum(axis=0)  # indexed by image column m
    vert = toeplitz_matmat(bias.vertical, row_sums)
    horiz = toeplitz_matmat(bias.horizontal, col_sums)
    out = vert[:, None, :] + horiz[None, :, :]
    return out.reshape(n * n, d)


def bias2d_backward(bias, V, G):
    """Gradients of ``Y = W2d @ V``.

    Returns ``(grad_weights_v, grad_weights_h, grad_V)``.  For a shared bias
    the two weight gradients are summed and the same vector is returned in
    both slots.
    """
    V, Vm = _as_image_values(bias, V)
    G = as_matrix(G, "G")
    if G.shape != V.shape:
        raise ValueError(f"G has shape {G.shape}, expected {V.shape}")
    n, d = bias.side, V.shape[1]
    Gm = G.reshape(n, n, d)
    # adjoint of the broadcast: sum the upstream gradient over the repeated axis
    gw_v, g_rows = toeplitz_matmat_backward(bias.vertical, Vm.sum(axis=1), Gm.sum(axis=1))
    gw_h, g_cols = toeplitz_matmat_backward(bias.horizontal, Vm.sum(axis=0), Gm.sum(axis=0))
    # adjoint of the reductions: broadcast back over the summed axis
    grad_V = (g_rows[:, None, :] + g_cols[None, :, :]).reshape(n * n, d)
    if bias.shared:
        total = gw_v + gw_h
        return total, total, grad_V
    return gw_v, gw_h, grad_V
