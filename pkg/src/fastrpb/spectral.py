"""Radix-2 FFT engine and circular convolution.

All transforms work on the last axis of a complex128 array, so a stack of
vectors can be transformed in one call.  Lengths must be powers of two;
:func:`next_pow2` gives the padding target.
"""

from functools import lru_cache

import numpy as np

from .errors import SpectralResidueError

__all__ = [
    "next_pow2",
    "is_pow2",
    "dft_naive",
    "fft_forward",
    "fft_inverse",
    "circular_convolve",
    "spectral_product",
]

# Largest tolerated imaginary residue of a real circular product, relative
# to the magnitude of the real result (absolute when the result is below 1).
IMAG_RESIDUE_TOL = 1e-9


def is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n):
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise ValueError(f"length must be positive, got {n}")
    return 1 << (n - 1).bit_length()


@lru_cache(maxsize=None)
def _bit_reversal(n):
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.intp)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(n):
    # exp(-2 pi i k / n) for k < n/2; stage of size m reads every (n/m)-th.
    tw = np.exp(-2j * np.pi * np.arange(n // 2) / n)
    tw.setflags(write=False)
    return tw


def _as_complex(x):
    x = np.asarray(x)
    if x.ndim == 0:
        raise ValueError("expected at least a 1-D array")
    return x.astype(np.complex128, copy=False)


def _check_pow2(n):
    if not is_pow2(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")


def dft_naive(x):
    """Textbook O(n^2) DFT, ``X_k = sum_n x_n exp(-2 pi i k n / len)``."""
    x = _as_complex(x)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("DFT of an empty vector is undefined")
    # reduce kn mod n before scaling so the angle stays in [0, 2 pi)
    kn = np.outer(np.arange(n), np.arange(n)) % n
    mat = np.exp(-2j * np.pi * kn / n)
    return x @ mat.T


def fft_forward(x):
    """Iterative decimation-in-time FFT along the last axis."""
    x = _as_complex(x)
    n = x.shape[-1]
    _check_pow2(n)
    lead = x.shape[:-1]
    cur = x[..., _bit_reversal(n)]
    if n == 1:
        return cur
    tw = _twiddles(n)
    nxt = np.empty_like(cur)
    half = 1
    while half < n:
        m = 2 * half
        src = cur.reshape(lead + (n // m, 2, half))
        dst = nxt.reshape(lead + (n // m, 2, half))
        t = src[..., 1, :] * tw[:: n // m]
        np.add(src[..., 0, :], t, out=dst[..., 0, :])
        np.subtract(src[..., 0, :], t, out=dst[..., 1, :])
        cur, nxt = nxt, cur
        half = m
    return cur


def fft_inverse(X):
    """Inverse of :func:`fft_forward`, including the 1/n normalization."""
    X = _as_complex(X)
    n = X.shape[-1]
    _check_pow2(n)
    return np.conj(fft_forward(np.conj(X))) / n


def take_real(z, what="circular product"):
    re = z.real
    scale = max(1.0, float(np.max(np.abs(re), initial=0.0)))
    resid = float(np.max(np.abs(z.imag), initial=0.0))
    if resid >= IMAG_RESIDUE_TOL * scale:
        raise SpectralResidueError(
            f"{what}: imaginary residue {resid:.3e} exceeds tolerance"
        )
    return np.ascontiguousarray(re)


def spectral_product(spectrum, x):
    """Real circular product given the FFT of the kernel.

    ``x`` is real with last-axis length equal to ``len(spectrum)`` (a power
    of two).  Returns ``ifft(spectrum * fft(x))`` with the imaginary residue
    checked and dropped.
    """
    return take_real(fft_inverse(spectrum * fft_forward(x)))


def circular_convolve(a, b):
    """``c_k = sum_j a_j b_{(k - j) mod n}`` for real vectors of equal length.

    Power-of-two lengths are transformed directly.  Other lengths are
    zero-padded to a power of two >= 2n - 1, linearly convolved, and folded
    back modulo n.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("circular_convolve expects 1-D vectors")
    n = a.shape[0]
    if n != b.shape[0]:
        raise ValueError(f"length mismatch: {n} vs {b.shape[0]}")
    if n == 0:
        raise ValueError("cannot convolve empty vectors")
    if is_pow2(n):
        return spectral_product(fft_forward(a), b)
    size = next_pow2(2 * n - 1)
    pa = np.zeros(size)
    pb = np.zeros(size)
    pa[:n] = a
    pb[:n] = b
    lin = spectral_product(fft_forward(pa), pb)
    out = lin[:n].copy()
    out[: n - 1] += lin[n : 2 * n - 1]
    return out
