"""Orthonormal Daubechies DWT with periodic boundary handling.

Coefficients are stored coarsest-first::

    [ scaling J0 | detail J0 | detail J0+1 | ... | detail J-1 ]

with block sizes ``2**J0, 2**J0, 2**(J0+1), ..., 2**(J-1)``. Two-dimensional
inputs are transformed column by column (axis 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._filters import LOWPASS
from .errors import LevelError, ShapeError, UnsupportedFilterError

DEFAULT_J0 = 3

#: level tag used for the scaling block in :meth:`WaveletDecomposition.levels`
SCALING_LEVEL = -1


@dataclass(frozen=True)
class WaveletFilter:
    """Quadrature-mirror pair of a Daubechies wavelet with N vanishing moments."""

    vanishing_moments: int
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return self.lowpass.size


def make_daubechies_filter(n: int) -> WaveletFilter:
    """Daubechies extremal-phase filter with ``n`` vanishing moments (1..10).

    ``n=1`` is the Haar filter. The highpass taps are
    ``g[k] = (-1)**k * h[2n-1-k]``.
    """
    if isinstance(n, bool) or int(n) != n or n not in LOWPASS:
        raise UnsupportedFilterError(
            f"Daubechies filter needs 1 <= N <= 10 vanishing moments, got {n!r}"
        )
    n = int(n)
    h = np.array(LOWPASS[n], dtype=float)
    g = h[::-1].copy()
    g[1::2] *= -1.0
    h.setflags(write=False)
    g.setflags(write=False)
    return WaveletFilter(n, h, g)


def dyadic_exponent(length: int) -> int:
    """Return J with ``length == 2**J``; raise :class:`ShapeError` otherwise."""
    if length < 1 or length & (length - 1):
        raise ShapeError(f"signal length {length} is not a power of two")
    return length.bit_length() - 1


@dataclass(frozen=True)
class WaveletDecomposition:
    """Wavelet coefficients in coarsest-first block order.

    ``coefficients`` has shape ``(M,)`` or ``(M, I)``, ``M = 2**J``.
    """

    coefficients: np.ndarray
    J: int
    J0: int

    def __post_init__(self):
        if not 0 <= self.J0 < self.J:
            raise LevelError(f"need 0 <= J0 < J, got J0={self.J0}, J={self.J}")
        if self.coefficients.ndim not in (1, 2):
            raise ShapeError("coefficients must be a vector or a matrix")
        if self.coefficients.shape[0] != 2**self.J:
            raise ShapeError(
                f"{self.coefficients.shape[0]} coefficients do not match J={self.J}"
            )

    @property
    def size(self) -> int:
        return 2**self.J

    def block_sizes(self) -> list[int]:
        return [2**self.J0] + [2**j for j in range(self.J0, self.J)]

    def scaling(self) -> np.ndarray:
        return self.coefficients[: 2**self.J0]

    def detail(self, j: int) -> np.ndarray:
        """Detail block at level ``j`` (``J0 <= j < J``); a view."""
        if not self.J0 <= j < self.J:
            raise LevelError(f"detail level {j} outside [{self.J0}, {self.J})")
        return self.coefficients[2**j : 2 ** (j + 1)]

    def levels(self) -> np.ndarray:
        """Level of every position; the scaling block is tagged ``SCALING_LEVEL``."""
        out = np.empty(self.size, dtype=int)
        out[: 2**self.J0] = SCALING_LEVEL
        for j in range(self.J0, self.J):
            out[2**j : 2 ** (j + 1)] = j
        return out

    def level_index(self, position: int) -> tuple[int, int]:
        """Map a flat position to ``(level, shift)``.

        Scaling positions map to ``(J0, k)`` just like the first detail block;
        :meth:`levels` tells the two apart.
        """
        if not 0 <= position < self.size:
            raise ShapeError(f"position {position} outside [0, {self.size})")
        if position < 2**self.J0:
            return self.J0, position
        j = position.bit_length() - 1
        return j, position - 2**j


def _analysis_step(approx: np.ndarray, filt: WaveletFilter):
    n = approx.shape[0]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(filt.length)[None, :]) % n
    windows = approx[idx]  # (n/2, L, ...)
    lo = np.tensordot(filt.lowpass, windows, axes=([0], [1]))
    hi = np.tensordot(filt.highpass, windows, axes=([0], [1]))
    return lo, hi


def _synthesis_step(lo: np.ndarray, hi: np.ndarray, filt: WaveletFilter) -> np.ndarray:
    half = lo.shape[0]
    n = 2 * half
    idx = (2 * np.arange(half)[:, None] + np.arange(filt.length)[None, :]) % n
    extra = (1,) * (lo.ndim - 1)
    h = filt.lowpass.reshape((1, -1) + extra)
    g = filt.highpass.reshape((1, -1) + extra)
    contrib = h * lo[:, None] + g * hi[:, None]  # (n/2, L, ...)
    out = np.zeros((n,) + lo.shape[1:])
    np.add.at(out, idx.ravel(), contrib.reshape((-1,) + lo.shape[1:]))
    return out


def dwt_periodic(
    signal, filt: WaveletFilter, J0: int = DEFAULT_J0
) -> WaveletDecomposition:
    """Periodized pyramid transform of a dyadic-length signal.

    Parameters
    ----------
    signal : array_like, shape (M,) or (M, I)
        Samples; matrices are transformed column-wise.
    filt : WaveletFilter
    J0 : int
        Coarsest retained level; ``2**J0`` scaling coefficients are kept.

    Returns
    -------
    WaveletDecomposition
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim not in (1, 2):
        raise ShapeError("signal must be a vector or a matrix")
    J = dyadic_exponent(x.shape[0])
    if not 0 <= J0 < J:
        raise LevelError(f"need 0 <= J0 < J for length 2**{J}, got J0={J0}")
    out = np.empty_like(x)
    approx = x
    for j in range(J - 1, J0 - 1, -1):
        approx, detail = _analysis_step(approx, filt)
        out[2**j : 2 ** (j + 1)] = detail
    out[: 2**J0] = approx
    return WaveletDecomposition(out, J, J0)


def idwt_periodic(decomp: WaveletDecomposition, filt: WaveletFilter) -> np.ndarray:
    """Inverse of :func:`dwt_periodic` (the transpose of the orthonormal map)."""
    c = np.asarray(decomp.coefficients, dtype=float)
    if c.shape[0] != 2**decomp.J or not 0 <= decomp.J0 < decomp.J:
        raise ShapeError("decomposition block structure is inconsistent")
    approx = c[: 2**decomp.J0]
    for j in range(decomp.J0, decomp.J):
        approx = _synthesis_step(approx, c[2**j : 2 ** (j + 1)], filt)
    return approx
