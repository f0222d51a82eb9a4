"""Component test functions on [0, 1]: Bumps, Blocks, Doppler, Heavisine, Logit, SpaHet."""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ParameterError

LOCATIONS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
BUMPS_HEIGHTS = np.array([4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
BUMPS_WIDTHS = np.array(
    [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005]
)
BLOCKS_HEIGHTS = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])

_SPAHET_SHIFT = 2.0**-0.6


def bumps(x):
    z = np.abs((x[..., None] - LOCATIONS) / BUMPS_WIDTHS)
    return (BUMPS_HEIGHTS * (1.0 + z) ** -4).sum(axis=-1)


def blocks(x):
    # np.sign(0) == 0, so a sample sitting on a jump takes the midpoint
    step = (1.0 + np.sign(x[..., None] - LOCATIONS)) / 2.0
    return (BLOCKS_HEIGHTS * step).sum(axis=-1)


def doppler(x):
    return np.sqrt(x * (1 - x)) * np.sin(2.1 * np.pi / (x + 0.05))


def heavisine(x):
    return 4 * np.sin(4 * np.pi * x) - np.sign(x - 0.3) - np.sign(0.72 - x)


def logit(x):
    return 1.0 / (1.0 + np.exp(-20 * (x - 0.5)))


def spahet(x):
    return np.sqrt(x * (1 - x)) * np.sin(
        2 * np.pi * (1 + _SPAHET_SHIFT) / (x + _SPAHET_SHIFT)
    )


FUNCTIONS = {
    "bumps": bumps,
    "blocks": blocks,
    "doppler": doppler,
    "heavisine": heavisine,
    "logit": logit,
    "spahet": spahet,
}
TAGS = tuple(FUNCTIONS)
DISPLAY_NAMES = {
    "bumps": "Bumps",
    "blocks": "Blocks",
    "doppler": "Doppler",
    "heavisine": "Heavisine",
    "logit": "Logit",
    "spahet": "SpaHet",
}


def normalize_tag(tag: str) -> str:
    key = tag.strip().lower()
    if key not in FUNCTIONS:
        raise ParameterError(f"unknown test function {tag!r}; choose from {', '.join(TAGS)}")
    return key


def evaluate(tag: str, x):
    """Evaluate test function ``tag`` at ``x`` (scalar or array) in [0, 1]."""
    f = FUNCTIONS[normalize_tag(tag)]
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.isnan(arr).any():
        raise DomainError(f"{tag} is defined on [0, 1] only")
    out = f(arr)
    return float(out) if out.ndim == 0 else out


def grid(M: int) -> np.ndarray:
    """Equally spaced right-closed grid ``t_m = m/M``, ``m = 1..M``."""
    if M < 2:
        raise ParameterError(f"grid needs at least 2 points, got {M}")
    return np.arange(1, M + 1) / M


def sample_grid(tag: str, M: int) -> np.ndarray:
    return evaluate(tag, grid(M))
