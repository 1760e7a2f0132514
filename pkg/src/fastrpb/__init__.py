"""FFT-based relative positional bias and kernelized linear attention."""

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
    bias1d_backward,
    bias1d_dense,
    bias2d_apply,
    bias2d_backward,
    bias2d_dense,
)
from .errors import (
    GoldenFormatError,
    InsufficientDataError,
    NumericalDegeneracyError,
    OracleMismatchError,
    OracleSizeError,
    SpectralResidueError,
)
from .kernels import FeatureMapSpec, feature_map
from .spectral import circular_convolve, dft_naive, fft_forward, fft_inverse
from .structured import (
    CirculantSpec,
    ToeplitzSpec,
    circulant_dense,
    circulant_matvec,
    toeplitz_dense,
    toeplitz_matmat,
    toeplitz_matmat_backward,
)

__version__ = "0.1.0"
