"""Discrete momentum basis and the elementary distributions placed on it.

Momenta are dimensionless, in units of the single-photon recoil hbar*k.
The grid spacing is 1/m hbar*k for an integer m, so any kick of an integer
number of recoils is an exact index offset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import constants


class GridError(ValueError):
    """Invalid grid construction parameters."""


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform symmetric momentum axis ``P_i = (i - n)/m`` for i = 0..2n."""

    resolution: int
    half_index: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resolution < 1:
            raise GridError(f"resolution must be a positive integer, got {self.resolution}")
        if self.half_index < 0:
            raise GridError(f"half_index must be >= 0, got {self.half_index}")
        # dividing integers keeps the grid exactly symmetric in floating point
        pts = np.arange(-self.half_index, self.half_index + 1, dtype=float) / self.resolution
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def spacing(self) -> float:
        return 1.0 / self.resolution

    @property
    def half_span(self) -> float:
        return self.half_index / self.resolution

    @property
    def size(self) -> int:
        return 2 * self.half_index + 1

    def __len__(self):
        return self.size

    def index_of(self, p: float) -> int:
        """Index of the grid point closest to momentum ``p``."""
        i = int(round(p * self.resolution)) + self.half_index
        if not 0 <= i < self.size:
            raise GridError(f"momentum {p} lies outside the grid (+/-{self.half_span})")
        return i

    def mirror(self, i: int) -> int:
        return self.size - 1 - i


def build_grid(half_span: float, resolution: int) -> MomentumGrid:
    """Symmetric grid with spacing ``1/resolution`` covering ``[-half_span, half_span]``."""
    if not isinstance(resolution, (int, np.integer)) or resolution < 1:
        raise GridError(f"resolution must be an integer >= 1, got {resolution!r}")
    if not half_span > 0:
        raise GridError(f"half_span must be positive, got {half_span!r}")
    n = half_span * resolution
    n_int = int(round(n))
    if abs(n - n_int) > 1e-9 * max(1.0, abs(n)):
        raise GridError(
            f"half_span * resolution must be an integer (half_span={half_span}, "
            f"resolution={resolution} gives {n:g})"
        )
    return MomentumGrid(resolution=int(resolution), half_index=n_int)


@dataclass(frozen=True)
class Distribution:
    """Probability mass per grid cell."""

    grid: MomentumGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"values shape {v.shape} does not match grid size {self.grid.size}")
        if np.any(v < 0):
            i = int(np.argmin(v))
            raise ValueError(f"negative mass {v[i]:g} at index {i}")
        if not np.all(np.isfinite(v)):
            raise ValueError("distribution contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def mass(self) -> float:
        return float(self.values.sum())

    def mean(self) -> float:
        return float(np.dot(self.grid.points, self.values) / self.mass)

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot((self.grid.points - mu) ** 2, self.values) / self.mass)

    def fwhm(self) -> float:
        """Full width at half maximum of the main peak, linearly interpolated."""
        v, p = self.values, self.grid.points
        i0 = int(np.argmax(v))
        half = 0.5 * v[i0]
        if half <= 0:
            return 0.0
        lo = i0
        while lo > 0 and v[lo - 1] >= half:
            lo -= 1
        hi = i0
        while hi < len(v) - 1 and v[hi + 1] >= half:
            hi += 1
        left = p[0] if lo == 0 else p[lo - 1] + (half - v[lo - 1]) / (v[lo] - v[lo - 1]) * (p[lo] - p[lo - 1])
        right = p[-1] if hi == len(v) - 1 else p[hi] + (v[hi] - half) / (v[hi] - v[hi + 1]) * (p[hi + 1] - p[hi])
        return float(right - left)


@dataclass(frozen=True)
class ThermalSpec:
    mass: float         # kg
    temperature: float  # K

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


class ThermalWidth(NamedTuple):
    si: float        # kg m/s
    hbar_k: float    # units of hbar*k (nan if no wavelength given)


def thermal_width(spec: ThermalSpec, wavelength: float | None = None) -> ThermalWidth:
    """Gibbs momentum width ``sqrt(2 M k_B T)``, in SI and in recoil units."""
    sigma = math.sqrt(2.0 * spec.mass * constants.K_B * spec.temperature)
    if wavelength is None:
        return ThermalWidth(sigma, math.nan)
    return ThermalWidth(sigma, constants.to_recoil_units(sigma, wavelength))


def gibbs_weights(grid: MomentumGrid, sigma: float) -> Distribution:
    """Thermal weights ``exp(-P^2/sigma^2)/Z``, normalized on the discrete grid."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if grid.half_span < 5.0 * sigma:
        warnings.warn(
            f"grid half_span {grid.half_span} < 5*sigma ({5 * sigma}); Gibbs tails are truncated",
            stacklevel=2,
        )
    w = np.exp(-(grid.points / sigma) ** 2)
    return Distribution(grid, w / w.sum())


def gaussian_slice(grid: MomentumGrid, center: float, width: float, amplitude: float) -> Distribution:
    """Unnormalized slice ``amplitude * exp(-(P - center)^2 / width^2)``."""
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    return Distribution(grid, amplitude * np.exp(-((grid.points - center) / width) ** 2))
