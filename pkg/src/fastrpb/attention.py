"""Softmax attention, kernelized linear attention, and the additive bias term.

Only self-attention is supported: Q, K and V share their row count N.
"""

from dataclasses import dataclass

import numpy as np

from ._arrays import as_matrix
from .bias import RelativeBias1D, RelativeBias2D, bias1d_apply, bias2d_apply
from .errors import NumericalDegeneracyError
from .kernels import FeatureMapSpec, feature_map

__all__ = [
    "AttentionInputs",
    "EPS",
    "INTROSPECTION_MAX_N",
    "softmax_attention",
    "softmax_attention_matrix",
    "linear_attention",
    "attention_with_bias",
]

# Added to every linear-attention denominator.
EPS = 1e-6

# Largest sequence length for which the N x N attention matrix may be built.
INTROSPECTION_MAX_N = 256


@dataclass(frozen=True)
class AttentionInputs:
    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, "Q")
        K = as_matrix(self.K, "K")
        V = as_matrix(self.V, "V")
        if not Q.shape[0] == K.shape[0] == V.shape[0]:
            raise ValueError(
                f"Q, K, V must share their row count, got {Q.shape[0]}, {K.shape[0]}, {V.shape[0]}"
            )
        if Q.shape[1] != K.shape[1]:
            raise ValueError(f"Q and K widths differ: {Q.shape[1]} vs {K.shape[1]}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "V", V)

    @property
    def seq_len(self):
        return self.Q.shape[0]

    @property
    def dim(self):
        return self.Q.shape[1]


def _softmax_rows(scores):
    scores = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def softmax_attention_matrix(inp):
    """The row-stochastic matrix ``softmax(Q K^T / sqrt(D))``.

    Introspection hook for small N only; the attention functions never need
    to return it.
    """
    if inp.seq_len > INTROSPECTION_MAX_N:
        raise ValueError(
            f"attention matrix introspection is limited to N <= {INTROSPECTION_MAX_N}"
        )
    return _softmax_rows(inp.Q @ inp.K.T / np.sqrt(inp.dim))


def softmax_attention(inp):
    """``softmax(Q K^T / sqrt(D)) V`` with row-max stabilization."""
    return _softmax_rows(inp.Q @ inp.K.T / np.sqrt(inp.dim)) @ inp.V


def _stabilize_sikf(Q, K):
    # exact for exp features: per-query shifts and one shared key shift
    # cancel between numerator and denominator
    return Q - Q.max(axis=1, keepdims=True), K - K.max()


def linear_attention(spec, inp):
    """Kernelized attention ``phi(q)^T S / (phi(q)^T z + EPS)``.

    ``S = sum_n phi(k_n) v_n^T`` and ``z = sum_n phi(k_n)`` are formed once,
    so the cost is O(N * output_dim * D) and no N x N matrix appears.
    """
    if spec.input_dim != inp.dim:
        raise ValueError(f"kernel input_dim {spec.input_dim} does not match D = {inp.dim}")
    Q, K = inp.Q, inp.K
    if spec.variant == "sikf":
        Q, K = _stabilize_sikf(Q, K)
    phi_q = feature_map(spec, Q)
    phi_k = feature_map(spec, K)
    S = phi_k.T @ inp.V
    z = phi_k.sum(axis=0)
    den = phi_q @ z + EPS
    bad = np.flatnonzero(~(den > 0) | ~np.isfinite(den))
    if bad.size:
        row = int(bad[0])
        raise NumericalDegeneracyError(
            f"linear attention denominator is {den[row]!r} at query row {row}", row=row
        )
    return (phi_q @ S) / den[:, None]


def attention_with_bias(mechanism, inp, bias):
    """``AttentionVariant(Q, K, V) + W V``.

    ``mechanism`` is ``"softmax"`` or a :class:`FeatureMapSpec`; ``bias`` is a
    :class:`RelativeBias1D` over N tokens or a :class:`RelativeBias2D` over
    an image with N pixels.
    """
    if isinstance(bias, RelativeBias1D):
        if bias.seq_len != inp.seq_len:
            raise ValueError(f"1D bias length {bias.seq_len} != sequence length {inp.seq_len}")
        positional = bias1d_apply(bias, inp.V)
    elif isinstance(bias, RelativeBias2D):
        if bias.num_pixels != inp.seq_len:
            raise ValueError(
                f"2D bias covers {bias.num_pixels} pixels, sequence length is {inp.seq_len}"
            )
        positional = bias2d_apply(bias, inp.V)
    else:
        raise TypeError(f"unsupported bias type {type(bias).__name__}")

    if isinstance(mechanism, FeatureMapSpec):
        out = linear_attention(mechanism, inp)
    elif mechanism == "softmax":
        out = softmax_attention(inp)
    else:
        raise ValueError(f"unknown attention mechanism {mechanism!r}")
    return out + positional
