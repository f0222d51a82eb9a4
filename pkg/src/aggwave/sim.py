"""Monte Carlo harness comparing wavelet shrinkage with the B-spline baseline.

Each replicate draws fresh mixing weights and Gaussian noise from its own
random stream, seeded by ``(study seed, replicate index)``, so replicates can
run in any order or in parallel and still give identical results.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import testfuncs
from .bspline import DEFAULT_INTERIOR_KNOTS, DEFAULT_ORDER, fit_components_bspline
from .dwt import dyadic_exponent
from .errors import AggwaveError, ParameterError, ShapeError
from .unmix import AggregatedData, EstimatorConfig, MixingMatrix, estimate_components

WEIGHT_RCOND_MIN = 1e-6
METHODS = ("wavelets", "splines")

# Signal scaling policies for the true components.  "dj" scales the four
# Donoho-Johnstone signals to a standard deviation of 7 on the study grid (their
# customary normalization) and leaves Logit and SpaHet at their natural scale.
DJ_TAGS = ("bumps", "blocks", "doppler", "heavisine")
DJ_SD = 7.0
SCALINGS = ("dj", "none", "unit")

STUDIES = {
    1: ("bumps", "blocks"),
    2: ("bumps", "blocks", "doppler", "heavisine"),
    3: ("logit", "spahet"),
}


class ReplicateError(AggwaveError, RuntimeError):
    """A single Monte Carlo replicate failed."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"replicate {index} failed: {cause}")
        self.index = index
        self.cause = cause

    def __reduce__(self):  # keep the error picklable across worker processes
        return (type(self), (self.index, self.cause))


@dataclass(frozen=True)
class StudyConfig:
    components: tuple[str, ...] = STUDIES[1]
    M: int = 512
    I: int = 50  # noqa: E741
    snr: float = 3.0
    replicates: int = 100
    seed: int = 0
    # wavelet estimator
    filter_n: int = 10
    J0: int = 3
    tau: float = 5.0
    p: float | None = 0.9
    # spline baseline
    spline_order: int = DEFAULT_ORDER
    spline_knots: int = DEFAULT_INTERIOR_KNOTS
    weights: str = "uniform"
    scaling: str = "dj"

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple(testfuncs.normalize_tag(c) for c in self.components)
        )
        if not self.components:
            raise ParameterError("at least one component is required")
        dyadic_exponent(self.M)
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        if not self.snr > 0:
            raise ParameterError(f"SNR must be positive, got {self.snr}")
        if self.I < len(self.components):
            raise ParameterError(f"need I >= L, got I={self.I}, L={len(self.components)}")
        if self.weights != "uniform":
            raise ParameterError(f"unknown weight policy {self.weights!r}")
        if self.scaling not in SCALINGS:
            raise ParameterError(
                f"unknown scaling {self.scaling!r}; choose from {', '.join(SCALINGS)}"
            )

    @property
    def L(self) -> int:
        return len(self.components)

    def estimator(self) -> EstimatorConfig:
        return EstimatorConfig(filter_n=self.filter_n, J0=self.J0, tau=self.tau, p=self.p)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["components"] = list(self.components)
        return d


def study_config(study: int, **overrides) -> StudyConfig:
    """Preset for simulation study 1, 2 or 3 with optional field overrides."""
    if study not in STUDIES:
        raise ParameterError(f"unknown study {study}; choose from {sorted(STUDIES)}")
    return StudyConfig(components=STUDIES[study], **overrides)


@dataclass
class MethodSummary:
    amse: float
    sd: float
    mse: list[float]


@dataclass
class StudyResult:
    config: StudyConfig
    summaries: dict[tuple[str, str], MethodSummary]  # (component, method)
    sigma: list[float] = field(default_factory=list)
    runtime_s: float = 0.0

    def amse(self, component: str, method: str) -> float:
        return self.summaries[(component, method)].amse

    def rows(self) -> list[dict]:
        out = []
        for (comp, method), s in self.summaries.items():
            out.append(
                {
                    "n": self.config.M,
                    "snr": self.config.snr,
                    "function": testfuncs.DISPLAY_NAMES[comp],
                    "method": method.capitalize(),
                    "amse": s.amse,
                    "sd": s.sd,
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "results": [
                {"function": c, "method": m, "amse": s.amse, "sd": s.sd, "mse": s.mse}
                for (c, m), s in self.summaries.items()
            ],
            "sigma": self.sigma,
            "runtime_s": self.runtime_s,
        }


def replicate_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


def gen_weights(I: int, L: int, seed) -> MixingMatrix:  # noqa: E741
    """Uniform(0, 1) weights, redrawn until ``y y^T`` is well conditioned.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    if I < L:
        raise ParameterError(f"need I >= L, got I={I}, L={L}")
    rng = np.random.default_rng(seed)
    while True:
        y = MixingMatrix(rng.uniform(0.0, 1.0, size=(L, I)))
        if y.gram_rcond() > WEIGHT_RCOND_MIN:
            return y


def noise_sigma_for_snr(noiseless, snr: float) -> float:
    """Noise scale ``sd(noiseless) / snr`` using the ``n - 1`` denominator."""
    if not snr > 0:
        raise ParameterError(f"SNR must be positive, got {snr}")
    x = np.asarray(noiseless, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if sd == 0.0:
        raise ParameterError("noiseless signal is constant; SNR is undefined")
    return sd / snr if math.isfinite(snr) else 0.0


def true_components(config: StudyConfig) -> np.ndarray:
    """``M x L`` matrix of the component functions on the study grid.

    Columns are scaled according to ``config.scaling``: ``"dj"`` brings the
    Donoho-Johnstone signals to sample sd :data:`DJ_SD`, ``"unit"`` brings every
    column to sample sd 1 and ``"none"`` keeps the raw formulas.
    """
    t = testfuncs.grid(config.M)
    columns = []
    for comp in config.components:
        f = testfuncs.evaluate(comp, t)
        if config.scaling == "unit":
            f = f / f.std(ddof=1)
        elif config.scaling == "dj" and comp in DJ_TAGS:
            f = f * (DJ_SD / f.std(ddof=1))
        columns.append(f)
    return np.column_stack(columns)


def gen_dataset(config: StudyConfig, replicate_index: int):
    """Return ``(AggregatedData, MixingMatrix, alpha, sigma)`` for one replicate.

    ``config.snr = inf`` yields noiseless data.
    """
    weight_seq, noise_seq = replicate_seed(config.seed, replicate_index).spawn(2)
    alpha = true_components(config)
    y = gen_weights(config.I, config.L, weight_seq)
    clean = alpha @ y.weights
    sigma = noise_sigma_for_snr(clean, config.snr)
    noise = np.random.default_rng(noise_seq).normal(0.0, 1.0, size=clean.shape)
    values = clean + sigma * noise
    return AggregatedData(values, testfuncs.grid(config.M)), y, alpha, sigma


def mse(estimate, truth) -> float:
    """Mean squared error over the grid."""
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def run_replicate(config: StudyConfig, index: int):
    """MSE per component for both methods: ``({(comp, method): mse}, sigma)``."""
    try:
        data, y, alpha, sigma = gen_dataset(config, index)
        wav = estimate_components(data, y, config.estimator()).curves
        spl = fit_components_bspline(data, y, config.spline_order, config.spline_knots)
    except Exception as exc:
        raise ReplicateError(index, exc) from exc
    out = {}
    for l, comp in enumerate(config.components):
        out[(comp, "wavelets")] = mse(wav[:, l], alpha[:, l])
        out[(comp, "splines")] = mse(spl[:, l], alpha[:, l])
    return out, sigma


def _summarise(values: list[float]) -> MethodSummary:
    arr = np.array(values)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return MethodSummary(float(arr.mean()), sd, [float(v) for v in values])


def run_study(config: StudyConfig, n_jobs: int = 1, order=None) -> StudyResult:
    """Run all replicates and aggregate AMSE and the MSE standard deviation.

    ``order`` optionally permutes the replicate indices visited; results are
    always stored by replicate index, so the outcome does not depend on it.
    """
    start = time.perf_counter()
    indices = list(range(config.replicates)) if order is None else list(order)
    if sorted(indices) != list(range(config.replicates)):
        raise ParameterError("order must be a permutation of the replicate indices")
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outputs = list(pool.map(run_replicate, [config] * len(indices), indices))
    else:
        outputs = [run_replicate(config, i) for i in indices]
    by_index = dict(zip(indices, outputs))

    summaries = {}
    for comp in config.components:
        for method in METHODS:
            vals = [by_index[i][0][(comp, method)] for i in range(config.replicates)]
            summaries[(comp, method)] = _summarise(vals)
    sigmas = [by_index[i][1] for i in range(config.replicates)]
    return StudyResult(config, summaries, sigmas, time.perf_counter() - start)


def run_table(config: StudyConfig, Ms=(512, 1024), snrs=(3.0, 9.0), n_jobs: int = 1):
    """Run every ``(M, SNR)`` scenario of a study; returns a list of results."""
    return [
        run_study(replace(config, M=m, snr=s), n_jobs=n_jobs) for m in Ms for s in snrs
    ]


def table_rows(results: list[StudyResult]) -> tuple[list[str], list[list]]:
    """Lay scenario results out like the published tables.

    Rows are ``n x function x method``; each SNR contributes an AMSE and an
    SD column.
    """
    snrs = sorted({r.config.snr for r in results})
    header = ["n", "function", "method"]
    for s in snrs:
        tag = f"{s:g}"
        header += [f"amse_snr{tag}", f"sd_snr{tag}"]
    cells: dict[tuple, dict] = {}
    for r in results:
        for comp in r.config.components:
            for method in METHODS:
                key = (r.config.M, testfuncs.DISPLAY_NAMES[comp], method.capitalize())
                cells.setdefault(key, {})[r.config.snr] = r.summaries[(comp, method)]
    rows = []
    for key, by_snr in cells.items():
        row = list(key)
        for s in snrs:
            summ = by_snr.get(s)
            row += [summ.amse, summ.sd] if summ else ["", ""]
        rows.append(row)
    return header, rows
