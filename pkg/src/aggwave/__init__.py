"""Wavelet-shrinkage estimation of component curves from aggregated functional data."""

from .dwt import (
    WaveletDecomposition,
    WaveletFilter,
    dwt_periodic,
    idwt_periodic,
    make_daubechies_filter,
)
from .shrinkage import (
    QuadratureSpec,
    ShrinkageParams,
    elicit_p,
    estimate_sigma,
    logistic_density,
    shrink,
    shrink_vector,
)
from .unmix import (
    AggregatedData,
    ComponentEstimate,
    EstimatorConfig,
    MixingMatrix,
    estimate_components,
    solve_gamma,
    transform_samples,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedData",
    "ComponentEstimate",
    "EstimatorConfig",
    "MixingMatrix",
    "QuadratureSpec",
    "ShrinkageParams",
    "WaveletDecomposition",
    "WaveletFilter",
    "dwt_periodic",
    "elicit_p",
    "estimate_components",
    "estimate_sigma",
    "idwt_periodic",
    "logistic_density",
    "make_daubechies_filter",
    "shrink",
    "shrink_vector",
    "solve_gamma",
    "transform_samples",
]
