"""Micro-benchmarks, analytic memory accounting and scaling-exponent fits.

Every op declares a working-set formula (``analytic_bytes``) alongside the
code it times.  These are the buffers the algorithm itself allocates; the
inputs and the N x D output, common to fast and dense paths, are excluded.
"""

import csv
import io
import math
import statistics
import time
from collections import defaultdict
from dataclasses import astuple, dataclass

import numpy as np

from . import spectral
from .attention import AttentionInputs, attention_with_bias, linear_attention, softmax_attention
from .bias import RelativeBias1D, RelativeBias2D, bias1d_apply, bias1d_dense, bias2d_apply, bias2d_dense
from .errors import InsufficientDataError, OracleMismatchError
from .kernels import VARIANTS, FeatureMapSpec
from .oracles import kernel_attention_quadratic, max_rel_error, softmax_attention_direct
from .structured import ToeplitzSpec, toeplitz_dense, toeplitz_matmat, toeplitz_workspace_bytes

__all__ = [
    "CSV_HEADER",
    "OPS",
    "BenchRecord",
    "ScalingFit",
    "run_bench",
    "records_to_csv",
    "write_csv",
    "read_csv",
    "fit_scaling",
    "scaling_report",
    "format_report",
    "classify_slope",
    "analytic_bytes",
]

CSV_HEADER = "op,n,d,kernel,repeat,wall_time_ns,analytic_bytes"

CHECK_TOL = 1e-10

# Oracle guard for the quadratic attention references.
ATTENTION_ORACLE_MAX_N = 512
DENSE_MAX_N = 4096


@dataclass(frozen=True)
class BenchRecord:
    op_name: str
    n: int
    d: int
    kernel: str
    repeat_index: int
    wall_time_ns: int
    analytic_bytes: int


@dataclass(frozen=True)
class ScalingFit:
    op_name: str
    d: int
    kernel: str
    sizes: tuple
    slope: float
    classification: str


def _isqrt_exact(n):
    side = math.isqrt(n)
    if side * side != n:
        raise ValueError(f"2D ops take a perfect-square pixel count, got {n}")
    return side


def _kernel_spec(kernel, d, seed):
    variant = "sikf" if kernel in ("-", "", None) else kernel
    if variant not in VARIANTS:
        raise ValueError(f"unknown kernel {kernel!r}")
    return FeatureMapSpec(variant, d, nu=1, num_features=max(1, d), seed=seed)


def _attn_mechanism(kernel, d, seed):
    if kernel in ("-", "", None, "softmax"):
        return "softmax"
    return _kernel_spec(kernel, d, seed)


# -- per-op setup, timing body, working set and reference ------------------

def _inputs(op, n, d, kernel, seed):
    rng = np.random.default_rng([seed, n, d])
    if op == "fft":
        if not spectral.is_pow2(n):
            raise ValueError(f"fft sizes must be powers of two, got {n}")
        return {"x": rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))}
    if op in ("toeplitz-matmat", "bias1d", "bias1d-dense"):
        return {
            "bias": RelativeBias1D(n, rng.standard_normal(2 * n - 1)),
            "V": rng.standard_normal((n, d)),
        }
    if op in ("bias2d", "bias2d-dense"):
        side = _isqrt_exact(n)
        return {
            "bias": RelativeBias2D(side, rng.standard_normal(2 * side - 1)),
            "V": rng.standard_normal((n, d)),
        }
    if op in ("softmax-attn", "linear-attn", "attn-with-bias"):
        # modest magnitudes keep unstabilized references representable
        inp = AttentionInputs(
            0.5 * rng.standard_normal((n, d)),
            0.5 * rng.standard_normal((n, d)),
            rng.standard_normal((n, d)),
        )
        args = {"inp": inp}
        if op == "linear-attn":
            args["spec"] = _kernel_spec(kernel, d, seed)
        if op == "attn-with-bias":
            args["mechanism"] = _attn_mechanism(kernel, d, seed)
            args["bias"] = RelativeBias1D(n, rng.standard_normal(2 * n - 1))
        return args
    raise ValueError(f"unknown op {op!r}")


def _run(op, a):
    if op == "fft":
        return spectral.fft_forward(a["x"])
    if op == "toeplitz-matmat":
        return toeplitz_matmat(a["bias"].toeplitz, a["V"])
    if op == "bias1d":
        return bias1d_apply(a["bias"], a["V"])
    if op == "bias1d-dense":
        return bias1d_dense(a["bias"], a["V"])
    if op == "bias2d":
        return bias2d_apply(a["bias"], a["V"])
    if op == "bias2d-dense":
        return bias2d_dense(a["bias"]) @ a["V"]
    if op == "softmax-attn":
        return softmax_attention(a["inp"])
    if op == "linear-attn":
        return linear_attention(a["spec"], a["inp"])
    if op == "attn-with-bias":
        return attention_with_bias(a["mechanism"], a["inp"], a["bias"])
    raise ValueError(f"unknown op {op!r}")


def _reference(op, a):
    if op == "fft":
        return spectral.dft_naive(a["x"])
    if op in ("toeplitz-matmat", "bias1d"):
        return toeplitz_dense(a["bias"].toeplitz) @ a["V"]
    if op == "bias1d-dense":
        return bias1d_apply(a["bias"], a["V"])
    if op == "bias2d":
        return bias2d_dense(a["bias"]) @ a["V"]
    if op == "bias2d-dense":
        return bias2d_apply(a["bias"], a["V"])
    if op == "softmax-attn":
        return softmax_attention_direct(a["inp"])
    if op == "linear-attn":
        return kernel_attention_quadratic(a["spec"], a["inp"])
    if op == "attn-with-bias":
        inp, mech = a["inp"], a["mechanism"]
        base = softmax_attention_direct(inp) if mech == "softmax" else kernel_attention_quadratic(mech, inp)
        return base + toeplitz_dense(a["bias"].toeplitz) @ inp.V
    raise ValueError(f"unknown op {op!r}")


_ORACLE_LIMITS = {
    "fft": 1024,
    "toeplitz-matmat": DENSE_MAX_N,
    "bias1d": DENSE_MAX_N,
    "bias1d-dense": DENSE_MAX_N,
    "bias2d": 4096,
    "bias2d-dense": 4096,
    "softmax-attn": ATTENTION_ORACLE_MAX_N,
    "linear-attn": ATTENTION_ORACLE_MAX_N,
    "attn-with-bias": ATTENTION_ORACLE_MAX_N,
}

OPS = tuple(_ORACLE_LIMITS)


def _feature_dim(kernel, d):
    spec = _kernel_spec(kernel, d, 0)
    return spec.output_dim


def analytic_bytes(op, n, d, kernel="-"):
    """Working-set size in bytes that ``op`` allocates at size ``n``."""
    if op == "fft":
        # bit-reversed copy, ping-pong stage buffer, twiddle product, tables
        return 16 * n * d * 2 + 16 * (n // 2) * d + 16 * (n // 2) + 8 * n
    if op in ("toeplitz-matmat", "bias1d"):
        return toeplitz_workspace_bytes(n)
    if op == "bias1d-dense":
        return 8 * n * n
    if op == "bias2d":
        side = _isqrt_exact(n)
        # row and column sums, two Toeplitz products, broadcast sum
        return 2 * 8 * side * d + 2 * toeplitz_workspace_bytes(side)
    if op == "bias2d-dense":
        # X and Y tensors plus their N^2 x N^2 sum
        return 3 * 8 * n * n
    if op == "softmax-attn":
        return 2 * 8 * n * n + 2 * 8 * n
    if op == "linear-attn":
        f = _feature_dim(kernel, d)
        return 8 * (2 * n * f + f * d + f + n)
    if op == "attn-with-bias":
        if kernel in ("-", "", None, "softmax"):
            attn = analytic_bytes("softmax-attn", n, d)
        else:
            attn = analytic_bytes("linear-attn", n, d, kernel)
        return attn + toeplitz_workspace_bytes(n) + 8 * n * d
    raise ValueError(f"unknown op {op!r}")


def _check_size(op, sizes):
    limit = _ORACLE_LIMITS[op]
    fitting = [s for s in sizes if s <= limit]
    if fitting:
        return fitting[-1]
    return limit


def check_oracle(op, n, d, kernel, seed):
    """Compare ``op`` against its reference at size ``n``; return the error."""
    a = _inputs(op, n, d, kernel, seed)
    err = max_rel_error(_run(op, a), _reference(op, a))
    if not err <= CHECK_TOL:
        raise OracleMismatchError(
            f"{op}: oracle mismatch at n={n}, d={d}, seed={seed}: "
            f"relative error {err:.3e} > {CHECK_TOL:g}"
        )
    return err


def run_bench(op, sizes, d, kernel="-", repeats=3, seed=0, check=False):
    """Time ``op`` over ``sizes``; one discarded warm-up per size."""
    if op not in _ORACLE_LIMITS:
        raise ValueError(f"unknown op {op!r}; expected one of {', '.join(OPS)}")
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be sorted ascending")
    if d < 1 or repeats < 0:
        raise ValueError("dim must be positive and repeats non-negative")
    kernel = kernel or "-"
    if check:
        check_oracle(op, _check_size(op, sizes), d, kernel, seed)

    records = []
    if repeats == 0:
        return records
    for n in sizes:
        a = _inputs(op, n, d, kernel, seed)
        nbytes = analytic_bytes(op, n, d, kernel)
        _run(op, a)
        for r in range(repeats):
            t0 = time.perf_counter_ns()
            _run(op, a)
            elapsed = max(1, time.perf_counter_ns() - t0)
            records.append(BenchRecord(op, n, d, kernel, r, elapsed, nbytes))
    return records


def records_to_csv(records):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for rec in records:
        w.writerow(astuple(rec))
    return buf.getvalue()


def write_csv(records, path):
    with open(path, "w", newline="") as f:
        f.write(records_to_csv(records))


def read_csv(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"{path}: expected header {CSV_HEADER!r}")
        out = []
        for row in reader:
            if not row:
                continue
            op, n, d, kernel, rep, t, b = row
            out.append(BenchRecord(op, int(n), int(d), kernel, int(rep), int(t), int(b)))
    return out


def classify_slope(slope):
    if slope <= 1.3:
        return "quasi-linear"
    if slope >= 1.7:
        return "quadratic"
    return "indeterminate"


def fit_scaling(records):
    """Least-squares slope of log(median time) against log(n), per op."""
    groups = defaultdict(lambda: defaultdict(list))
    for rec in records:
        groups[(rec.op_name, rec.d, rec.kernel)][rec.n].append(rec.wall_time_ns)
    if not groups:
        raise InsufficientDataError("no benchmark records to fit")
    fits = []
    for (op, d, kernel), by_n in groups.items():
        sizes = sorted(by_n)
        if len(sizes) < 4:
            raise InsufficientDataError(
                f"{op}: need at least 4 distinct sizes to fit a slope, got {len(sizes)}"
            )
        x = np.log(np.array(sizes, dtype=np.float64))
        y = np.log(np.array([statistics.median(by_n[s]) for s in sizes], dtype=np.float64))
        slope = float(np.polyfit(x, y, 1)[0])
        fits.append(ScalingFit(op, d, kernel, tuple(sizes), slope, classify_slope(slope)))
    return fits


def scaling_report(csv_path):
    return fit_scaling(read_csv(csv_path))


def format_report(fits):
    lines = []
    for f in fits:
        label = f.op_name if f.kernel == "-" else f"{f.op_name}[{f.kernel}]"
        lines.append(
            f"{label} d={f.d} n={f.sizes[0]}..{f.sizes[-1]} "
            f"slope={f.slope:.3f} {f.classification}"
        )
    return "\n".join(lines)
