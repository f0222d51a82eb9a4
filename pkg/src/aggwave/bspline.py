"""B-spline basis via the Cox-de Boor recursion, and the spline baseline estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RankError, ShapeError

DEFAULT_ORDER = 4
DEFAULT_INTERIOR_KNOTS = 35


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped B-spline basis of order ``order`` (degree ``order - 1``).

    ``knots`` holds the boundary knots repeated ``order`` times around the
    interior knots, so there are ``K + order`` basis functions.
    """

    order: int
    knots: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ParameterError(f"order must be >= 1, got {self.order}")
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 1 or knots.size < self.order + 1:
            raise ShapeError("knot vector too short for the requested order")
        if np.any(np.diff(knots) < 0):
            raise ShapeError("knots must be nondecreasing")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def uniform(cls, a: float, b: float, n_interior: int, order: int = DEFAULT_ORDER):
        """Clamped basis with ``n_interior`` equally spaced interior knots on [a, b]."""
        if not b > a:
            raise ParameterError(f"need a < b, got [{a}, {b}]")
        if n_interior < 0:
            raise ParameterError("number of interior knots must be >= 0")
        inner = np.linspace(a, b, n_interior + 2)[1:-1]
        knots = np.concatenate([np.full(order, a), inner, np.full(order, b)])
        return cls(order, knots)

    @property
    def K(self) -> int:
        return self.knots.size - 2 * self.order

    @property
    def size(self) -> int:
        return self.knots.size - self.order

    @property
    def domain(self) -> tuple[float, float]:
        return self.knots[self.order - 1], self.knots[-self.order]

    def _last_interval(self, i: int) -> bool:
        # the right end b belongs to the last nonempty interval
        t = self.knots
        return t[i] < t[i + 1] == t[-1]

    def eval(self, i: int, x: float) -> float:
        """``B_{i,order}(x)`` by direct recursion (scalar, reference path)."""
        if not 0 <= i < self.size:
            raise ShapeError(f"basis index {i} outside [0, {self.size})")
        return self._recurse(i, self.order, float(x))

    def _recurse(self, i: int, m: int, x: float) -> float:
        t = self.knots
        if m == 1:
            if t[i] <= x < t[i + 1]:
                return 1.0
            return 1.0 if x == t[-1] and self._last_interval(i) else 0.0
        left = right = 0.0
        if t[i + m - 1] > t[i]:
            left = (x - t[i]) / (t[i + m - 1] - t[i]) * self._recurse(i, m - 1, x)
        if t[i + m] > t[i + 1]:
            right = (t[i + m] - x) / (t[i + m] - t[i + 1]) * self._recurse(i + 1, m - 1, x)
        return left + right

    def design_matrix(self, x) -> np.ndarray:
        """``len(x) x size`` matrix of basis values, same recursion run level by level."""
        x = np.asarray(x, dtype=float)
        t = self.knots
        n_int = t.size - 1
        # order 1: indicators of [t_i, t_{i+1}), closing the last nonempty one at b
        B = ((t[:-1] <= x[:, None]) & (x[:, None] < t[1:])).astype(float)
        last = np.flatnonzero(t[:-1] < t[1:])
        if last.size:
            k = last[-1]
            B[x == t[k + 1], k] = 1.0
        for m in range(2, self.order + 1):
            n = n_int - m + 1
            lo, hi = t[:n], t[m - 1 : m - 1 + n]
            lo2, hi2 = t[1 : 1 + n], t[m : m + n]
            with np.errstate(divide="ignore", invalid="ignore"):
                wl = np.where(hi > lo, (x[:, None] - lo) / (hi - lo), 0.0)
                wr = np.where(hi2 > lo2, (hi2 - x[:, None]) / (hi2 - lo2), 0.0)
            B = wl * B[:, :n] + wr * B[:, 1 : n + 1]
        return B


def basis_eval(basis: BSplineBasis, i: int, x: float) -> float:
    return basis.eval(i, x)


def fit_components_bspline(
    data, y, order: int = DEFAULT_ORDER, K: int = DEFAULT_INTERIOR_KNOTS
) -> np.ndarray:
    """Joint least-squares B-spline fit of the component curves.

    Each component is ``alpha_l = B c_l`` with ``B`` the ``M x (K + order)``
    basis matrix on the data grid, so ``A = B C y + e``. The stacked model
    ``vec(A) = (y^T kron B) vec(C)`` has normal matrix ``(y y^T) kron (B^T B)``
    and its least-squares solution factorises as
    ``C = (B^T B)^{-1} B^T A y^T (y y^T)^{-1}``.

    Returns
    -------
    ndarray, shape (M, L)
        Fitted curves on the grid.
    """
    if data.I != y.I:
        raise ShapeError(f"data has {data.I} samples but weights have {y.I}")
    basis = BSplineBasis.uniform(data.grid[0], data.grid[-1], K, order)
    B = design_for(basis, data.grid)
    C = _stacked_solve(B, data.values, y.weights)
    return B @ C


def design_for(basis: BSplineBasis, grid) -> np.ndarray:
    B = basis.design_matrix(grid)
    if np.linalg.matrix_rank(B) < B.shape[1]:
        raise RankError(
            f"spline design is rank deficient: {B.shape[1]} basis functions "
            f"on {B.shape[0]} grid points"
        )
    return B


def _stacked_solve(B: np.ndarray, A: np.ndarray, w: np.ndarray) -> np.ndarray:
    gram = w @ w.T
    s = np.linalg.svd(gram, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise RankError("mixing weights make the stacked spline design rank deficient")
    proj, *_ = np.linalg.lstsq(B, A, rcond=None)  # (B^T B)^{-1} B^T A
    return np.linalg.solve(gram, w @ proj.T).T
