"""Component-curve estimation from aggregated samples.

Pipeline: DWT of every sample, robust sigma from the pooled finest-level
details, coefficient-wise Bayesian shrinkage, least-squares unmixing
``Gamma = delta(D) y^T (y y^T)^{-1}`` and a column-wise inverse DWT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dwt import (
    DEFAULT_J0,
    WaveletDecomposition,
    dwt_periodic,
    dyadic_exponent,
    idwt_periodic,
    make_daubechies_filter,
)
from .errors import ParameterError, RankError, ShapeError
from .shrinkage import (
    DEFAULT_QUADRATURE,
    DEFAULT_TAU,
    QuadratureSpec,
    ShrinkageParams,
    estimate_sigma,
    level_params,
    shrink_vector,
)

RCOND_LIMIT = 1e-12


@dataclass(frozen=True)
class AggregatedData:
    """``M x I`` matrix of aggregated curves sampled on a shared grid."""

    values: np.ndarray
    grid: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ShapeError(f"aggregated data must be M x I, got shape {values.shape}")
        dyadic_exponent(values.shape[0])
        if np.isnan(values).any():
            raise ShapeError("aggregated data contains NaN")
        grid = self.grid
        if grid is None:
            m = values.shape[0]
            grid = np.arange(1, m + 1) / m
        grid = np.asarray(grid, dtype=float)
        if grid.shape != (values.shape[0],):
            raise ShapeError(f"grid length {grid.size} != {values.shape[0]} rows")
        if np.any(np.diff(grid) <= 0):
            raise ShapeError("grid must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", grid)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def I(self) -> int:  # noqa: E743
        return self.values.shape[1]


@dataclass(frozen=True)
class MixingMatrix:
    """Known ``L x I`` weights; column ``i`` mixes the components of sample ``i``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=float))
        if w.ndim != 2:
            raise ShapeError(f"weights must be L x I, got shape {w.shape}")
        if w.shape[0] > w.shape[1]:
            raise ShapeError(f"need L <= I, got L={w.shape[0]}, I={w.shape[1]}")
        if not np.isfinite(w).all():
            raise ShapeError("weights contain non-finite entries")
        object.__setattr__(self, "weights", w)

    @property
    def L(self) -> int:
        return self.weights.shape[0]

    @property
    def I(self) -> int:  # noqa: E743
        return self.weights.shape[1]

    def gram_rcond(self) -> float:
        """Reciprocal 2-norm condition number of ``y y^T``."""
        return _rcond(self.weights @ self.weights.T)


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings for :func:`estimate_components`.

    ``p=None`` selects the level-dependent point-mass weight; ``shrink=False``
    replaces the rule by the identity.
    """

    filter_n: int = 10
    J0: int = DEFAULT_J0
    tau: float = DEFAULT_TAU
    p: float | None = None
    shrink: bool = True
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self):
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")


@dataclass
class ComponentEstimate:
    curves: np.ndarray  # M x L, alpha-hat
    gamma: np.ndarray  # M x L, Gamma-hat
    sigma_hat: float
    params: dict[int, ShrinkageParams] = field(default_factory=dict)
    J0: int = DEFAULT_J0
    filter_n: int = 10
    shrunk: np.ndarray | None = None  # M x I, delta(D)


def _rcond(a: np.ndarray) -> float:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0.0
    return float(s[-1] / s[0])


def transform_samples(data: AggregatedData, filt, J0: int = DEFAULT_J0) -> WaveletDecomposition:
    """Column-wise DWT of the aggregated samples (``D = W A``)."""
    return dwt_periodic(data.values, filt, J0)


def solve_gamma(shrunk, y: MixingMatrix) -> np.ndarray:
    """Least-squares component coefficients ``delta(D) y^T (y y^T)^{-1}``.

    Raises
    ------
    RankError
        If the reciprocal condition number of ``y y^T`` is below 1e-12.
    """
    shrunk = np.asarray(shrunk, dtype=float)
    if shrunk.ndim != 2 or shrunk.shape[1] != y.I:
        raise ShapeError(
            f"coefficient matrix {shrunk.shape} does not match I={y.I} samples"
        )
    gram = y.weights @ y.weights.T
    rc = _rcond(gram)
    if rc < RCOND_LIMIT:
        cond = np.inf if rc == 0 else 1.0 / rc
        raise RankError(
            f"y y^T is singular or ill-conditioned: condition number {cond:.3e} "
            f"(reciprocal {rc:.3e} < {RCOND_LIMIT:g})"
        )
    # (y y^T) Gamma^T = y delta(D)^T
    return np.linalg.solve(gram, y.weights @ shrunk.T).T


def estimate_components(
    data: AggregatedData, y: MixingMatrix, config: EstimatorConfig | None = None
) -> ComponentEstimate:
    """Estimate the ``L`` component curves behind ``data``."""
    config = config or EstimatorConfig()
    if data.I != y.I:
        raise ShapeError(f"data has {data.I} samples but weights have {y.I}")
    filt = make_daubechies_filter(config.filter_n)
    decomp = transform_samples(data, filt, config.J0)
    J = decomp.J

    sigma_hat = estimate_sigma(decomp.detail(J - 1))
    params: dict[int, ShrinkageParams] = {}
    if config.shrink and sigma_hat > 0:
        params = level_params(config.J0, J, config.tau, sigma_hat, config.p)
        shrunk = shrink_vector(decomp.coefficients, params, config.quad, decomp.levels())
    else:
        shrunk = decomp.coefficients.copy()

    gamma = solve_gamma(shrunk, y)
    curves = idwt_periodic(WaveletDecomposition(gamma, J, config.J0), filt)
    return ComponentEstimate(
        curves=curves,
        gamma=gamma,
        sigma_hat=sigma_hat,
        params=params,
        J0=config.J0,
        filter_n=config.filter_n,
        shrunk=shrunk,
    )
