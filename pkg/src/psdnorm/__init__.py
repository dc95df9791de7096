"""Spectral alignment of multichannel time series.

Welch PSD estimation, Bures-Wasserstein geometry over diagonal-PSD Gaussian
models, Monge mapping filters, stateful PSD-normalization layers, synthetic
domain-shift benchmarks, and a command-line front end.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ChannelMismatchError,
    EmptyInputError,
    EvalWithoutBarycenterError,
    EvalWithoutStatsError,
    FilterLongerThanSignalError,
    ImagLeakageError,
    LengthTooShortError,
    NonFiniteInputError,
    NonPositivePsdError,
    ParameterOutOfRangeError,
    PsdNormError,
    ShapeMismatchError,
    TooLargeForDenseError,
)
from .spectral import (  # noqa: F401
    WelchConfig,
    center,
    channel_mean,
    circular_convolve,
    fourier_matrix,
    make_window,
    segment,
    welch_psd,
)
from .geometry import (  # noqa: F401
    BarycenterState,
    bures_distance,
    geodesic_interpolate,
    running_update,
    wasserstein_barycenter,
)
from .monge import (  # noqa: F401
    MongeFilter,
    apply_mapping,
    dense_monge_oracle,
    monge_filter,
)
from .layers import (  # noqa: F401
    BatchNormLayer,
    PsdNormLayer,
    TmaAligner,
    batchnorm_forward,
    instancenorm_forward,
    layernorm_forward,
    psdnorm_forward,
    psdnorm_stack_forward,
    tma_fit,
    tma_transform,
)
from .synth import (  # noqa: F401
    AlignmentReport,
    DomainSpec,
    evaluate_alignment,
    make_shifted_domains,
    sample_gaussian_with_psd,
)
