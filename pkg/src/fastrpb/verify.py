"""Oracle-equivalence and invariant checks behind ``fastrpb verify``.

Each property runs over a grid of seeded random cases and reports the worst
error it saw against its tolerance.  A failing property also reports the
seed of the first failing case so it can be replayed with
``run_verify(..., seeds=[seed])``.
"""

from dataclasses import dataclass

import numpy as np

from . import spectral
from .attention import (
    AttentionInputs,
    attention_with_bias,
    linear_attention,
    softmax_attention,
    softmax_attention_matrix,
)
from .bias import (
    RelativeBias1D,
    RelativeBias2D,
    bias1d_apply,
    bias2d_apply,
    bias2d_backward,
    bias2d_dense,
    bias2d_tensors,
)
from .kernels import VARIANTS, FeatureMapSpec, feature_map
from .oracles import (
    central_difference,
    kernel_attention_quadratic,
    max_rel_error,
    softmax_attention_direct,
    toeplitz_exact_embedding_matmat,
)
from .structured import (
    CirculantSpec,
    ToeplitzSpec,
    circulant_dense,
    circulant_matvec,
    toeplitz_dense,
    toeplitz_matmat,
    toeplitz_matmat_backward,
)

__all__ = ["SCOPES", "PropertyResult", "run_verify", "format_verify_report", "PROPERTIES"]

SCOPES = ("spectral", "structured", "bias", "kernels", "attention")

DEFAULT_SEEDS = tuple(range(20))


@dataclass
class PropertyResult:
    scope: str
    name: str
    max_error: float
    tolerance: float
    failing_seed: object = None
    detail: str = ""

    @property
    def passed(self):
        return self.failing_seed is None and self.max_error <= self.tolerance


PROPERTIES = []


def _property(scope, name, tol):
    def register(fn):
        PROPERTIES.append((scope, name, tol, fn))
        return fn

    return register


def _fd_rel_error(actual, expected):
    # per-component relative error, floored at 1e-3 of the largest component
    floor = 1e-3 * max(float(np.max(np.abs(expected), initial=0.0)), 1e-12)
    return float(np.max(np.abs(actual - expected) / np.maximum(np.abs(expected), floor)))


# -- spectral --------------------------------------------------------------

@_property("spectral", "fft-matches-naive-dft", 1e-10)
def _fft_oracle(rng):
    errs = []
    for n in (1, 2, 4, 8, 16, 64, 256, 1024):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        errs.append(max_rel_error(spectral.fft_forward(x), spectral.dft_naive(x)))
    return max(errs)


@_property("spectral", "fft-round-trip", 1e-12)
def _fft_round_trip(rng):
    errs = []
    for n in (1, 2, 8, 256, 4096):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        errs.append(float(np.max(np.abs(spectral.fft_inverse(spectral.fft_forward(x)) - x))))
    return max(errs)


@_property("spectral", "fft-linearity", 1e-10)
def _fft_linearity(rng):
    n = 512
    x, y = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    a, b = rng.standard_normal(2)
    lhs = spectral.fft_forward(a * x + b * y)
    rhs = a * spectral.fft_forward(x) + b * spectral.fft_forward(y)
    return max_rel_error(lhs, rhs)


@_property("spectral", "fft-parseval", 1e-9)
def _fft_parseval(rng):
    n = 1024
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    X = spectral.fft_forward(x)
    e_time = np.sum(np.abs(x) ** 2)
    return abs(e_time - np.sum(np.abs(X) ** 2) / n) / e_time


@_property("spectral", "circular-convolution-matches-direct-sum", 1e-10)
def _conv_direct(rng):
    errs = []
    for n in (1, 2, 3, 7, 16, 17, 31):
        a, b = rng.standard_normal((2, n))
        direct = np.array([sum(a[j] * b[(k - j) % n] for j in range(n)) for k in range(n)])
        errs.append(max_rel_error(spectral.circular_convolve(a, b), direct))
    return max(errs)


# -- structured ------------------------------------------------------------

_TOEPLITZ_SIDES = (1, 2, 3, 5, 8, 16, 33, 64)


@_property("structured", "circulant-matvec-matches-dense", 1e-10)
def _circulant(rng):
    errs = []
    for n in (1, 2, 5, 13, 32):
        spec = CirculantSpec(rng.standard_normal(n))
        x = rng.standard_normal(n)
        errs.append(max_rel_error(circulant_matvec(spec, x), circulant_dense(spec) @ x))
    return max(errs)


@_property("structured", "toeplitz-matmat-matches-dense", 1e-10)
def _toeplitz_dense_eq(rng):
    errs = []
    for n in _TOEPLITZ_SIDES:
        for d in (1, 3, 8):
            spec = ToeplitzSpec(n, rng.standard_normal(2 * n - 1))
            V = rng.standard_normal((n, d))
            errs.append(max_rel_error(toeplitz_matmat(spec, V), toeplitz_dense(spec) @ V))
    return max(errs)


@_property("structured", "toeplitz-matches-exact-2n-1-embedding", 1e-10)
def _toeplitz_exact(rng):
    errs = []
    for n in _TOEPLITZ_SIDES:
        spec = ToeplitzSpec(n, rng.standard_normal(2 * n - 1))
        V = rng.standard_normal((n, 3))
        errs.append(max_rel_error(toeplitz_matmat(spec, V), toeplitz_exact_embedding_matmat(spec, V)))
    return max(errs)


@_property("structured", "toeplitz-linearity", 1e-10)
def _toeplitz_linear(rng):
    n, d = 40, 3
    spec = ToeplitzSpec(n, rng.standard_normal(2 * n - 1))
    V1, V2 = rng.standard_normal((2, n, d))
    a, b = rng.standard_normal(2)
    lhs = toeplitz_matmat(spec, a * V1 + b * V2)
    rhs = a * toeplitz_matmat(spec, V1) + b * toeplitz_matmat(spec, V2)
    return max_rel_error(lhs, rhs)


@_property("structured", "toeplitz-backward-matches-finite-differences", 1e-5)
def _toeplitz_grad(rng):
    errs = []
    for n, d in ((1, 2), (7, 3), (32, 2)):
        w = rng.standard_normal(2 * n - 1)
        V = rng.standard_normal((n, d))
        G = rng.standard_normal((n, d))
        gw, gV = toeplitz_matmat_backward(ToeplitzSpec(n, w), V, G)
        fd_w = central_difference(lambda w_: np.sum(G * toeplitz_matmat(ToeplitzSpec(n, w_), V)), w)
        fd_V = central_difference(lambda V_: np.sum(G * toeplitz_matmat(ToeplitzSpec(n, w), V_)), V)
        errs += [_fd_rel_error(gw, fd_w), _fd_rel_error(gV, fd_V)]
    return max(errs)


# -- bias ------------------------------------------------------------------

def _random_bias2d(rng, n, shared):
    if shared:
        return RelativeBias2D(n, rng.standard_normal(2 * n - 1))
    return RelativeBias2D(n, rng.standard_normal(2 * n - 1), rng.standard_normal(2 * n - 1), shared=False)


@_property("bias", "bias1d-matches-dense", 1e-10)
def _bias1d(rng):
    errs = []
    for n in _TOEPLITZ_SIDES:
        bias = RelativeBias1D(n, rng.standard_normal(2 * n - 1))
        V = rng.standard_normal((n, 4))
        errs.append(max_rel_error(bias1d_apply(bias, V), toeplitz_dense(bias.toeplitz) @ V))
    return max(errs)


@_property("bias", "bias2d-matches-dense", 1e-10)
def _bias2d(rng):
    errs = []
    for n in (1, 2, 3, 5, 8, 11, 16):
        for d in (1, 4):
            for shared in (True, False):
                bias = _random_bias2d(rng, n, shared)
                V = rng.standard_normal((n * n, d))
                errs.append(max_rel_error(bias2d_apply(bias, V), bias2d_dense(bias) @ V))
    return max(errs)


@_property("bias", "bias2d-slice-symmetry", 0.0)
def _symmetry(rng):
    n = int(rng.integers(1, 7))
    X, Y = bias2d_tensors(_random_bias2d(rng, n, shared=False))
    worst = 0.0
    for a in range(n):
        for i in range(n):
            for j in range(n):
                worst = max(worst, float(np.max(np.abs(X[a, i] - X[a, j]))))
                worst = max(worst, float(np.max(np.abs(Y[i, a] - Y[j, a]))))
    return worst


@_property("bias", "bias2d-term-structure", 0.0)
def _structure(rng):
    n, d = 6, 2
    w = rng.standard_normal(2 * n - 1)
    zero = np.zeros(2 * n - 1)
    V = rng.standard_normal((n * n, d))
    horiz = bias2d_apply(RelativeBias2D(n, w, zero, shared=False), V).reshape(n, n, d)
    vert = bias2d_apply(RelativeBias2D(n, zero, w, shared=False), V).reshape(n, n, d)
    # horizontal term constant over image rows, vertical term over columns
    return max(float(np.max(np.abs(horiz - horiz[:1]))), float(np.max(np.abs(vert - vert[:, :1]))))


@_property("bias", "bias2d-backward-matches-finite-differences", 1e-5)
def _bias2d_grad(rng):
    errs = []
    for n, d, shared in ((1, 2, True), (3, 2, False), (6, 3, True), (8, 2, False)):
        bias = _random_bias2d(rng, n, shared)
        V = rng.standard_normal((n * n, d))
        G = rng.standard_normal((n * n, d))
        gv, gh, gV = bias2d_backward(bias, V, G)

        def loss_v(wv):
            b = RelativeBias2D(n, wv) if shared else RelativeBias2D(n, bias.weights_h, wv, shared=False)
            return np.sum(G * bias2d_apply(b, V))

        def loss_h(wh):
            b = RelativeBias2D(n, wh) if shared else RelativeBias2D(n, wh, bias.weights_v, shared=False)
            return np.sum(G * bias2d_apply(b, V))

        errs.append(_fd_rel_error(gv, central_difference(loss_v, bias.weights_v)))
        errs.append(_fd_rel_error(gh, central_difference(loss_h, bias.weights_h)))
        errs.append(_fd_rel_error(gV, central_difference(lambda V_: np.sum(G * bias2d_apply(bias, V_)), V)))
    return max(errs)


@_property("bias", "parameter-counts", 0.0)
def _param_counts(rng):
    n = int(rng.integers(1, 50))
    counts = (
        RelativeBias1D.zeros(n).num_parameters == 2 * n - 1,
        _random_bias2d(rng, n, True).num_parameters == 2 * n - 1,
        _random_bias2d(rng, n, False).num_parameters == 2 * (2 * n - 1),
    )
    return 0.0 if all(counts) else 1.0


# -- kernels ---------------------------------------------------------------

def _all_kernel_specs(d, seed=0):
    return [
        FeatureMapSpec(v, d, nu=min(2, 2 * d - 1), num_features=16, seed=seed) for v in VARIANTS
    ]


@_property("kernels", "feature-maps-nonnegative", 0.0)
def _nonneg(rng):
    X = 3.0 * rng.standard_normal((20, 5))
    worst = 0.0
    for spec in _all_kernel_specs(5):
        phi = feature_map(spec, X)
        worst = max(worst, float(-np.min(phi, initial=0.0)))
        if spec.variant == "elu1" and not np.all(phi > 0):
            worst = max(worst, 1.0)
    return worst


@_property("kernels", "feature-map-output-shapes", 0.0)
def _shapes(rng):
    d = int(rng.integers(1, 9))
    X = rng.standard_normal((3, d))
    bad = [s for s in _all_kernel_specs(d) if feature_map(s, X).shape != (3, s.output_dim)]
    expected = {"dpfp": 2 * d * min(2, 2 * d - 1), "performer": 32}
    bad += [s for s in _all_kernel_specs(d) if s.output_dim != expected.get(s.variant, d)]
    return float(len(bad))


@_property("kernels", "sikf-multiplicative-under-shift", 1e-12)
def _sikf_mult(rng):
    spec = FeatureMapSpec("sikf", 6)
    X = rng.standard_normal((10, 6))
    c = float(rng.uniform(-5, 5))
    return max_rel_error(feature_map(spec, X + c), np.exp(c) * feature_map(spec, X))


@_property("kernels", "performer-deterministic-per-seed", 0.0)
def _performer_det(rng):
    seed = int(rng.integers(0, 2**63))
    X = rng.standard_normal((4, 3))
    a = feature_map(FeatureMapSpec("performer", 3, num_features=8, seed=seed), X)
    b = feature_map(FeatureMapSpec("performer", 3, num_features=8, seed=seed), X)
    c = feature_map(FeatureMapSpec("performer", 3, num_features=8, seed=seed + 1), X)
    return float(np.max(np.abs(a - b))) + (1.0 if np.array_equal(a, c) else 0.0)


# -- attention -------------------------------------------------------------

def _random_inputs(rng, n, d, scale=0.5):
    return AttentionInputs(
        scale * rng.standard_normal((n, d)),
        scale * rng.standard_normal((n, d)),
        rng.standard_normal((n, d)),
    )


@_property("attention", "softmax-rows-sum-to-one", 1e-12)
def _rows(rng):
    inp = _random_inputs(rng, 48, 8, scale=2.0)
    return float(np.max(np.abs(softmax_attention_matrix(inp).sum(axis=1) - 1.0)))


@_property("attention", "softmax-matches-unstabilized-formula", 1e-10)
def _softmax_direct(rng):
    inp = _random_inputs(rng, 16, 8)
    return max_rel_error(softmax_attention(inp), softmax_attention_direct(inp))


@_property("attention", "linear-attention-matches-quadratic", 1e-10)
def _linear_quadratic(rng):
    errs = []
    for n in (1, 5, 32, 64):
        inp = _random_inputs(rng, n, 8)
        for spec in _all_kernel_specs(8, seed=int(rng.integers(0, 2**32))):
            errs.append(max_rel_error(linear_attention(spec, inp), kernel_attention_quadratic(spec, inp)))
    return max(errs)


@_property("attention", "sikf-shift-invariance", 1e-9)
def _shift(rng):
    n, d = int(rng.integers(1, 65)), int(rng.integers(1, 33))
    inp = _random_inputs(rng, n, d, scale=1.0)
    spec = FeatureMapSpec("sikf", d)
    c, dd = rng.uniform(-20, 20, size=2)
    shifted = AttentionInputs(inp.Q + c, inp.K + dd, inp.V)
    return max_rel_error(linear_attention(spec, shifted), linear_attention(spec, inp))


@_property("attention", "permutation-invariance-without-bias", 1e-10)
def _perm(rng):
    n, d = 24, 4
    inp = _random_inputs(rng, n, d)
    p = rng.permutation(n)
    perm = AttentionInputs(inp.Q, inp.K[p], inp.V[p])
    errs = [max_rel_error(softmax_attention(perm), softmax_attention(inp))]
    for v in ("elu1", "sikf"):
        spec = FeatureMapSpec(v, d)
        errs.append(max_rel_error(linear_attention(spec, perm), linear_attention(spec, inp)))
    return max(errs)


@_property("attention", "bias-breaks-permutation-invariance", 0.0)
def _perm_bias(rng):
    n, d = 24, 4
    inp = _random_inputs(rng, n, d)
    bias = RelativeBias1D(n, rng.standard_normal(2 * n - 1))
    p = np.roll(np.arange(n), 1)
    perm = AttentionInputs(inp.Q, inp.K[p], inp.V[p])
    changed = not np.allclose(attention_with_bias("softmax", perm, bias), attention_with_bias("softmax", inp, bias))
    return 0.0 if changed else 1.0


@_property("attention", "attention-with-bias-matches-dense", 1e-10)
def _with_bias(rng):
    n, d = 20, 4
    inp = _random_inputs(rng, n, d)
    bias = RelativeBias1D(n, rng.standard_normal(2 * n - 1))
    dense = toeplitz_dense(bias.toeplitz) @ inp.V
    errs = [max_rel_error(attention_with_bias("softmax", inp, bias), softmax_attention_direct(inp) + dense)]
    spec = FeatureMapSpec("sikf", d)
    errs.append(
        max_rel_error(attention_with_bias(spec, inp, bias), kernel_attention_quadratic(spec, inp) + dense)
    )
    side = 4
    inp2 = _random_inputs(rng, side * side, d)
    b2 = RelativeBias2D(side, rng.standard_normal(2 * side - 1))
    errs.append(
        max_rel_error(
            attention_with_bias("softmax", inp2, b2), softmax_attention_direct(inp2) + bias2d_dense(b2) @ inp2.V
        )
    )
    return max(errs)


# -- driver ----------------------------------------------------------------

def run_verify(scopes=SCOPES, seeds=DEFAULT_SEEDS):
    """Run every property in ``scopes`` over ``seeds``; return the results."""
    unknown = set(scopes) - set(SCOPES)
    if unknown:
        raise ValueError(f"unknown scope(s): {', '.join(sorted(unknown))}")
    results = []
    for scope, name, tol, fn in PROPERTIES:
        if scope not in scopes:
            continue
        res = PropertyResult(scope, name, 0.0, tol)
        for seed in seeds:
            try:
                err = float(fn(np.random.default_rng(seed)))
            except Exception as exc:  # a crash counts as a failing case
                err = np.inf
                res.detail = res.detail or f"{type(exc).__name__}: {exc}"
            if np.isnan(err):
                err = np.inf
            res.max_error = max(res.max_error, err)
            if err > tol and res.failing_seed is None:
                res.failing_seed = seed
        results.append(res)
    return results


def format_verify_report(results):
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status} {r.scope}/{r.name}: max_error={r.max_error:.3e} tolerance={r.tolerance:.1e}"
        if not r.passed:
            line += f" (reproduce with seed={r.failing_seed})"
            if r.detail:
                line += f" [{r.detail}]"
        lines.append(line)
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} properties passed")
    return "\n".join(lines)
