"""Circulant and Toeplitz products via FFT, plus their dense realizations.

Toeplitz weights are indexed by signed relative distance ``i`` in
``-N+1 .. N-1`` and stored at offset ``i + N - 1``.  The dense matrix is
``W[n][m] = w[m - n]`` (row = output position, column = input position).
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import spectral
from ._arrays import as_matrix, as_vector, frozen

__all__ = [
    "CirculantSpec",
    "ToeplitzSpec",
    "circulant_dense",
    "circulant_matvec",
    "toeplitz_dense",
    "toeplitz_matmat",
    "toeplitz_matmat_backward",
    "embedding_size",
    "toeplitz_workspace_bytes",
]


@dataclass(frozen=True)
class CirculantSpec:
    first_column: np.ndarray

    def __post_init__(self):
        c = as_vector(self.first_column, "first_column")
        if c.shape[0] < 1:
            raise ValueError("circulant first column must be non-empty")
        object.__setattr__(self, "first_column", frozen(c))

    @property
    def size(self):
        return self.first_column.shape[0]


@dataclass(frozen=True)
class ToeplitzSpec:
    side: int
    weights: np.ndarray

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 1:
            raise ValueError(f"side must be a positive integer, got {self.side}")
        w = as_vector(self.weights, "weights")
        if w.shape[0] != 2 * self.side - 1:
            raise ValueError(
                f"expected {2 * self.side - 1} weights for side {self.side}, "
                f"got {w.shape[0]}"
            )
        object.__setattr__(self, "side", int(self.side))
        object.__setattr__(self, "weights", frozen(w))

    @classmethod
    def from_weights(cls, weights):
        w = as_vector(weights, "weights")
        if w.shape[0] % 2 == 0:
            raise ValueError("Toeplitz weight vector must have odd length 2N-1")
        return cls((w.shape[0] + 1) // 2, w)

    def weight(self, distance):
        """Weight for signed relative distance ``distance`` (= m - n)."""
        n = self.side
        if not -n < distance < n:
            raise IndexError(f"distance {distance} outside (-{n}, {n})")
        return self.weights[distance + n - 1]

    def transpose(self):
        # W^T[n][m] = w[n - m]: reversing storage order negates every distance
        return ToeplitzSpec(self.side, self.weights[::-1])

    @property
    def num_parameters(self):
        return self.weights.shape[0]


def circulant_dense(spec):
    """``C[i][j] = c[(i - j) mod n]``."""
    c = spec.first_column
    n = c.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return c[idx]


def circulant_matvec(spec, x):
    x = as_vector(x, "x")
    if x.shape[0] != spec.size:
        raise ValueError(f"x has length {x.shape[0]}, circulant has size {spec.size}")
    return spectral.circular_convolve(spec.first_column, x)


def toeplitz_dense(spec):
    n = spec.side
    # window k is w[k : k + n]; row n of W starts at offset N-1-n
    return np.ascontiguousarray(sliding_window_view(spec.weights, n)[::-1])


def embedding_size(side):
    """Power-of-two circulant size used to embed a side x side Toeplitz."""
    return spectral.next_pow2(2 * side - 1)


def _embedded_first_column(spec, size):
    # (w_0, w_-1, ..., w_-N+1, 0, ..., 0, w_N-1, ..., w_1)
    n = spec.side
    w = spec.weights
    c = np.zeros(size)
    c[:n] = w[n - 1 :: -1]
    if n > 1:
        c[size - n + 1 :] = w[: n - 1 : -1]
    return c


def toeplitz_workspace_bytes(side):
    """Working-set bytes of one :func:`toeplitz_matmat` call (per column).

    Counts the stored weights, the cached kernel spectrum and the buffers of
    one column's forward/inverse FFT (padded column, two ping-pong stages and
    the half-length twiddle product).  Independent of the column count since
    columns are processed one at a time.
    """
    m = embedding_size(side)
    return 8 * (2 * side - 1) + 16 * m + 16 * m * 3 + 16 * (m // 2)


def _check_rows(spec, V, name="V"):
    if V.shape[0] != spec.side:
        raise ValueError(f"{name} has {V.shape[0]} rows, expected {spec.side}")


def toeplitz_matmat(spec, V):
    """``W @ V`` in O(D N log N) through a power-of-two circulant embedding.

    The kernel spectrum is computed once and reused for every column of V.
    """
    V = as_matrix(V, "V")
    _check_rows(spec, V)
    n, d = V.shape
    size = embedding_size(n)
    spectrum = spectral.fft_forward(_embedded_first_column(spec, size))
    out = np.empty((n, d))
    col = np.zeros(size)
    for j in range(d):
        col[:n] = V[:, j]
        out[:, j] = spectral.spectral_product(spectrum, col)[:n]
    return out


def toeplitz_matmat_backward(spec, V, G):
    """Gradients of ``Y = W @ V`` given ``G = dL/dY``.

    Returns ``(grad_weights, grad_V)`` where ``grad_weights`` is indexed like
    ``spec.weights`` and ``grad_V = W^T @ G``.
    """
    V = as_matrix(V, "V")
    G = as_matrix(G, "G")
    _check_rows(spec, V)
    if G.shape != V.shape:
        raise ValueError(f"G has shape {G.shape}, expected {V.shape}")
    n, d = V.shape
    grad_V = toeplitz_matmat(spec.transpose(), G)

    # grad_w[i] = sum_d sum_n G[n, d] V[n + i, d], a cross-correlation.
    # Spectra are summed over columns so only one inverse transform is needed.
    size = embedding_size(n)
    acc = np.zeros(size, dtype=np.complex128)
    g_col = np.zeros(size)
    v_col = np.zeros(size)
    for j in range(d):
        g_col[:n] = G[:, j]
        v_col[:n] = V[:, j]
        acc += np.conj(spectral.fft_forward(g_col)) * spectral.fft_forward(v_col)
    corr = spectral.take_real(spectral.fft_inverse(acc), "weight gradient")
    grad_w = np.empty(2 * n - 1)
    grad_w[n - 1 :] = corr[:n]
    if n > 1:
        # negative lags wrap to the top of the buffer
        grad_w[: n - 1] = corr[size - n + 1 :]
    return grad_w, grad_V
