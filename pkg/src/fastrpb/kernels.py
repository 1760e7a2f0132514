"""Feature maps phi for kernelized linear attention.

Variants:

* ``elu1``      -- ELU(x) + 1
* ``relu``      -- max(x, 0)
* ``sikf``      -- exp(x), the shift-invariant kernel
* ``dpfp``      -- deterministic parameter-free projection with capacity nu
* ``performer`` -- positive random features approximating exp(q . k)

None of the maps rescales its input by 1/sqrt(D); callers that want the
softmax temperature should scale queries and keys themselves.

The Performer prefactor is ``exp(-|x|^2 / 2) / sqrt(2)`` (squared norm).  The
unsquared norm sometimes printed for this map does not give an unbiased
estimate of exp(q . k).
"""

from dataclasses import dataclass, field

import numpy as np

from ._arrays import as_matrix

__all__ = ["FeatureMapSpec", "VARIANTS", "feature_map"]

VARIANTS = ("elu1", "relu", "sikf", "dpfp", "performer")


@dataclass(frozen=True)
class FeatureMapSpec:
    variant: str
    input_dim: int
    nu: int = 1
    num_features: int = 64
    seed: int = 0
    projection: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown kernel {self.variant!r}; expected one of {VARIANTS}")
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if self.variant == "dpfp" and not 1 <= self.nu <= 2 * self.input_dim - 1:
            raise ValueError(
                f"dpfp nu must lie in [1, {2 * self.input_dim - 1}], got {self.nu}"
            )
        if self.variant == "performer":
            if self.num_features < 1:
                raise ValueError(f"num_features must be positive, got {self.num_features}")
            if not 0 <= self.seed < 2**64:
                raise ValueError("seed must be a 64-bit unsigned integer")
            rng = np.random.default_rng(self.seed)
            proj = rng.standard_normal((self.num_features, self.input_dim))
            proj.setflags(write=False)
            object.__setattr__(self, "projection", proj)

    @property
    def output_dim(self):
        if self.variant == "dpfp":
            return 2 * self.input_dim * self.nu
        if self.variant == "performer":
            return 2 * self.num_features
        return self.input_dim


def _elu1(x):
    # exp only sees non-positive arguments, so large x cannot overflow
    return np.where(x > 0, x + 1.0, np.exp(np.minimum(x, 0.0)))


def _dpfp(x, nu):
    r = np.maximum(np.concatenate([x, -x], axis=1), 0.0)
    return np.concatenate([r * np.roll(r, -j, axis=1) for j in range(1, nu + 1)], axis=1)


def _performer(x, proj):
    m = proj.shape[0]
    wx = x @ proj.T
    half_sq = 0.5 * np.sum(x * x, axis=1, keepdims=True)
    # fold h(x) into the exponent: h(x) exp(+-Rx) = exp(+-Rx - |x|^2/2) / sqrt(2)
    scale = 1.0 / np.sqrt(2.0 * m)
    return scale * np.concatenate([np.exp(wx - half_sq), np.exp(-wx - half_sq)], axis=1)


def feature_map(spec, X):
    """Apply phi to every row of X (shape rows x input_dim)."""
    X = as_matrix(X, "X")
    if X.shape[1] != spec.input_dim:
        raise ValueError(f"X has {X.shape[1]} columns, kernel expects {spec.input_dim}")
    v = spec.variant
    if v == "elu1":
        return _elu1(X)
    if v == "relu":
        return np.maximum(X, 0.0)
    if v == "sikf":
        return np.exp(X)
    if v == "dpfp":
        return _dpfp(X, spec.nu)
    return _performer(X, spec.projection)
