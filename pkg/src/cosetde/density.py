"""Quantized LLR densities and the measure-level primitives of density evolution.

Messages live on a uniform symmetric grid of LLR bin centers k*bin_width.
The boundary bins at +-half_range act as saturation buckets, so channel
atoms at +-infinity and out-of-range convolution mass stay accounted for.
Check-node combination happens on a second grid over sign x magnitude,
reached through the involution m -> ln coth(|m|/2).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.signal import fftconvolve

# direct summation below this size, transform-based convolution above
_DIRECT_CONV_LIMIT = 512

MASS_TOL = 1e-12


class GridMismatchError(ValueError):
    """Two measures on different grids were combined."""


def _lncoth_half(x):
    """ln coth(x/2), elementwise; self-inverse on (0, inf)."""
    return -np.log(np.tanh(np.asarray(x, dtype=float) / 2.0))


@dataclass(frozen=True)
class LlrGrid:
    """Symmetric LLR grid: bin centers k*bin_width for k in [-half, +half]."""

    bin_width: float
    bin_count: int

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        if self.bin_count < 3 or self.bin_count % 2 == 0:
            raise ValueError("bin_count must be odd and >= 3")

    @classmethod
    def make(cls, bin_width: float = 0.01, half_range: float = 25.0) -> "LlrGrid":
        half = int(round(half_range / bin_width))
        if half < 1:
            raise ValueError("half_range must cover at least one bin")
        return cls(bin_width=bin_width, bin_count=2 * half + 1)

    @property
    def half_bins(self) -> int:
        return (self.bin_count - 1) // 2

    @property
    def half_range(self) -> float:
        return self.half_bins * self.bin_width

    @property
    def zero_index(self) -> int:
        return self.half_bins

    def centers(self) -> np.ndarray:
        return _grid_centers(self)

    def index_of(self, m: float) -> int:
        """Nearest-bin index of LLR m, ties rounding toward 0, clipped to range."""
        if math.isnan(m):
            raise ValueError("LLR must not be NaN")
        if m >= self.half_range:
            return self.bin_count - 1
        if m <= -self.half_range:
            return 0
        k = math.ceil(abs(m) / self.bin_width - 0.5)
        if m < 0:
            k = -k
        return self.zero_index + k


@functools.lru_cache(maxsize=None)
def _grid_centers(grid: LlrGrid) -> np.ndarray:
    half = grid.half_bins
    c = np.arange(-half, half + 1, dtype=float) * grid.bin_width
    c.flags.writeable = False
    return c


@dataclass(frozen=True)
class MagGrid:
    """Magnitude grid for the check-node domain: centers j*bin_width, j >= 0.

    The top bin is a saturation bucket; its nominal value is used when
    mapping back to LLRs.
    """

    bin_width: float
    bin_count: int

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        if self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")

    @classmethod
    def for_llr_grid(cls, grid: LlrGrid, bin_width: float | None = None) -> "MagGrid":
        # G_max = ln coth(llr_bin_width / 2): magnitude of the smallest
        # nonzero LLR bin; anything beyond saturates.
        w = grid.bin_width / 5.0 if bin_width is None else bin_width
        g_max = float(_lncoth_half(grid.bin_width))
        return cls(bin_width=w, bin_count=int(round(g_max / w)) + 1)

    @property
    def top(self) -> float:
        return (self.bin_count - 1) * self.bin_width


@dataclass
class Density:
    """Probability measure over an LlrGrid (non-negative, unit total mass)."""

    grid: LlrGrid
    mass: np.ndarray

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        if self.mass.shape != (self.grid.bin_count,):
            raise ValueError("mass length must match grid bin_count")

    def validate(self) -> "Density":
        if np.any(self.mass < -MASS_TOL):
            raise ValueError("density mass must be non-negative")
        if abs(float(self.mass.sum()) - 1.0) > 1e-9:
            raise ValueError("density mass must sum to 1")
        return self

    def total(self) -> float:
        return float(self.mass.sum())

    def as_signed(self) -> "SignedDensity":
        return SignedDensity(self.grid, self.mass.copy())

    def to_json_dict(self) -> dict:
        return {
            "grid": {"bin_width": self.grid.bin_width, "half_range": self.grid.half_range},
            "mass": self.mass.tolist(),
        }


@dataclass
class SignedDensity:
    """Signed measure over an LlrGrid (difference measures and intermediates)."""

    grid: LlrGrid
    mass: np.ndarray

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        if self.mass.shape != (self.grid.bin_count,):
            raise ValueError("mass length must match grid bin_count")

    def total(self) -> float:
        return float(self.mass.sum())


@dataclass
class DensityPair:
    """Conditional density pair indexed by the transmitted bit."""

    p0: Density
    p1: Density

    def __post_init__(self):
        if self.p0.grid != self.p1.grid:
            raise GridMismatchError("pair components must share a grid")

    @property
    def grid(self) -> LlrGrid:
        return self.p0.grid

    def average(self) -> Density:
        return Density(self.grid, (self.p0.mass + self.p1.mass) / 2.0)

    def half_difference(self) -> SignedDensity:
        return SignedDensity(self.grid, (self.p0.mass - self.p1.mass) / 2.0)


@dataclass
class GammaDensity:
    """Measure over sign x magnitude, the domain where check nodes add.

    mass[s] is the vector over magnitude bins for sign component s.
    Probability inputs have total mass 1 over both components; densities
    produced from signed LLR measures carry signed mass.
    """

    llr_grid: LlrGrid
    mag_grid: MagGrid
    mass: np.ndarray  # shape (2, mag bins)

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        if self.mass.shape != (2, self.mag_grid.bin_count):
            raise ValueError("mass shape must be (2, mag bin_count)")

    def total(self) -> float:
        return float(self.mass.sum())

    def sign_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)


# ---------------------------------------------------------------------------
# grid transforms (cached index maps)
#
# Two rounding disciplines coexist. The faithful maps round to the nearest
# bin, so transform round trips return moderate-LLR densities unchanged.
# The conservative maps round check-domain magnitudes up and LLRs down with
# a 3/4-bin guard band each, so a quantized check update never overstates
# message reliability; the recursions use these, which keeps computed
# thresholds on the pessimistic side (the guard band is calibrated against
# the reference behavior of the regular (3,4) ensemble on z-channels).

_MAG_GUARD = 0.75
_LLR_GUARD = 0.75


@functools.lru_cache(maxsize=None)
def _forward_map(grid: LlrGrid, mag: MagGrid, conservative: bool = False) -> np.ndarray:
    """Magnitude bin index for every LLR bin center (zero bin -> saturation)."""
    centers = _grid_centers(grid)
    v = np.empty(grid.bin_count)
    nz = centers != 0.0
    v[nz] = _lncoth_half(np.abs(centers[nz]))
    v[~nz] = np.inf
    t = v / mag.bin_width
    idx = np.ceil(t - 1e-9 + _MAG_GUARD) if conservative else np.rint(t)
    idx[~np.isfinite(idx)] = mag.bin_count - 1
    return np.clip(idx, 0, mag.bin_count - 1).astype(np.int64)


@functools.lru_cache(maxsize=None)
def _inverse_map(grid: LlrGrid, mag: MagGrid, conservative: bool = False) -> np.ndarray:
    """LLR bin index of +ln coth(v_j/2) for every magnitude bin j."""
    v = np.arange(mag.bin_count, dtype=float) * mag.bin_width
    idx = np.empty(mag.bin_count, dtype=np.int64)
    idx[0] = grid.bin_count - 1  # zero magnitude is a perfect (saturated) message
    t = _lncoth_half(v[1:]) / grid.bin_width
    q = np.floor(t + 1e-9 - _LLR_GUARD) if conservative else np.rint(t)
    idx[1:] = grid.zero_index + np.clip(q, 0, grid.half_bins).astype(np.int64)
    # The saturation bucket holds everything at or beyond the magnitude of the
    # smallest nonzero LLR; such messages carry next to no information, so
    # they come back as the know-nothing LLR 0 rather than a confident +-bin.
    idx[mag.bin_count - 1] = grid.zero_index
    return idx


def dirac(grid: LlrGrid, m0: float) -> Density:
    """Point mass in the bin nearest m0; out-of-range values saturate."""
    mass = np.zeros(grid.bin_count)
    mass[grid.index_of(m0)] = 1.0
    return Density(grid, mass)


def dirac_pair(grid: LlrGrid, m0: float, m1: float) -> DensityPair:
    return DensityPair(dirac(grid, m0), dirac(grid, m1))


def _conv_full(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if max(a.size, b.size) > _DIRECT_CONV_LIMIT:
        return fftconvolve(a, b)
    return np.convolve(a, b)


def _convolve_llr(grid: LlrGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full LLR convolution with out-of-range mass folded into the end bins."""
    full = _conv_full(a, b)
    half = grid.half_bins
    out = full[half : half + grid.bin_count].copy()
    out[0] += full[:half].sum()
    out[-1] += full[half + grid.bin_count :].sum()
    return out


def convolve(a, b):
    """Convolution of two (signed) densities; the variable-node combiner."""
    if a.grid != b.grid:
        raise GridMismatchError("convolve requires a common grid")
    mass = _convolve_llr(a.grid, a.mass, b.mass)
    if isinstance(a, Density) and isinstance(b, Density):
        return Density(a.grid, mass)
    return SignedDensity(a.grid, mass)


def _terms(poly: Mapping[int, float]) -> list[tuple[int, float]]:
    """(convolution power, fraction) pairs of an edge-perspective polynomial."""
    items = sorted(poly.items())
    if not items:
        raise ValueError("empty degree polynomial")
    for k, f in items:
        if k < 1:
            raise ValueError("degrees must be >= 1")
        if f < 0:
            raise ValueError("edge fractions must be non-negative")
    return [(k - 1, f) for k, f in items]


def _conv_powers(base_mass, powers, conv):
    """Convolution powers by repeated squaring; power 0 handled by caller."""
    cache: dict[int, np.ndarray] = {1: base_mass}

    def pw(n: int) -> np.ndarray:
        if n not in cache:
            h = pw(n // 2)
            cache[n] = conv(h, h) if n % 2 == 0 else conv(conv(h, h), base_mass)
        return cache[n]

    return {n: pw(n) for n in powers if n >= 1}


def lambda_apply(q, lam: Mapping[int, float]):
    """Variable-node polynomial: sum_k lambda_k q^{conv (k-1)}."""
    from .degrees import DegreeDistribution

    if isinstance(lam, DegreeDistribution):
        lam = lam.lambda_map
    terms = _terms(lam)
    grid = q.grid
    powers = _conv_powers(q.mass, [p for p, _ in terms], lambda a, b: _convolve_llr(grid, a, b))
    out = np.zeros(grid.bin_count)
    for p, f in terms:
        if p == 0:
            out[grid.zero_index] += f  # empty convolution is the unit at m = 0
        else:
            out += f * powers[p]
    if isinstance(q, Density):
        return Density(grid, out)
    return SignedDensity(grid, out)


def gamma_transform(d, mag: MagGrid | None = None, conservative: bool = False) -> GammaDensity:
    """Map an LLR measure onto sign x magnitude.

    Mass at the m = 0 bin splits half/half between the sign components; its
    infinite magnitude lands in the saturation bucket.
    """
    grid = d.grid
    if mag is None:
        mag = MagGrid.for_llr_grid(grid)
    fwd = _forward_map(grid, mag, conservative)
    centers = _grid_centers(grid)
    mass = d.mass
    out = np.zeros((2, mag.bin_count))
    pos = centers > 0
    neg = centers < 0
    out[0] = np.bincount(fwd[pos], weights=mass[pos], minlength=mag.bin_count)
    out[1] = np.bincount(fwd[neg], weights=mass[neg], minlength=mag.bin_count)
    z = mass[grid.zero_index]
    if z != 0.0:
        out[0, mag.bin_count - 1] += z / 2.0
        out[1, mag.bin_count - 1] += z / 2.0
    return GammaDensity(grid, mag, out)


def gamma_inverse(g: GammaDensity, conservative: bool = False):
    """Map a sign x magnitude measure back onto the LLR grid."""
    grid = g.llr_grid
    inv = _inverse_map(grid, g.mag_grid, conservative)
    n = grid.bin_count
    out = np.bincount(inv, weights=g.mass[0], minlength=n)
    out += np.bincount(n - 1 - inv, weights=g.mass[1], minlength=n)
    return SignedDensity(grid, out)


def _mag_convolve(mag: MagGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    full = _conv_full(a, b)
    out = full[: mag.bin_count].copy()
    out[-1] += full[mag.bin_count :].sum()
    return out


def _gamma_convolve_mass(mag: MagGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # XOR on signs, additive on magnitudes. Two convolutions suffice via the
    # sum/difference components s = m0 + m1, d = m0 - m1.
    ss = _mag_convolve(mag, a[0] + a[1], b[0] + b[1])
    dd = _mag_convolve(mag, a[0] - a[1], b[0] - b[1])
    return np.stack(((ss + dd) / 2.0, (ss - dd) / 2.0))


def gamma_convolve(a: GammaDensity, b: GammaDensity) -> GammaDensity:
    """Check-node combiner: signs XOR, magnitudes add with saturation."""
    if a.mag_grid != b.mag_grid or a.llr_grid != b.llr_grid:
        raise GridMismatchError("gamma_convolve requires a common grid")
    return GammaDensity(a.llr_grid, a.mag_grid, _gamma_convolve_mass(a.mag_grid, a.mass, b.mass))


def gamma_unit(llr_grid: LlrGrid, mag: MagGrid) -> GammaDensity:
    """Identity of gamma_convolve: a perfect message (sign 0, magnitude 0)."""
    mass = np.zeros((2, mag.bin_count))
    mass[0, 0] = 1.0
    return GammaDensity(llr_grid, mag, mass)


def rho_apply(g: GammaDensity, rho: Mapping[int, float], shift: int = 0) -> GammaDensity:
    """Check-node polynomial: sum_k rho_k g^{conv (k-1+shift)}."""
    from .degrees import DegreeDistribution

    if isinstance(rho, DegreeDistribution):
        shift = rho.shift
        rho = rho.rho_map
    if shift < 0:
        raise ValueError("shift must be non-negative")
    terms = [(p + shift, f) for p, f in _terms(rho)]
    mag = g.mag_grid
    powers = _conv_powers(g.mass, [p for p, _ in terms], lambda a, b: _gamma_convolve_mass(mag, a, b))
    out = np.zeros((2, mag.bin_count))
    for p, f in terms:
        if p == 0:
            out[0, 0] += f
        else:
            out += f * powers[p]
    return GammaDensity(g.llr_grid, mag, out)


# ---------------------------------------------------------------------------
# functionals


def error_mass(d) -> float:
    """Mass on negative LLRs plus half the mass of the m = 0 bin."""
    z = d.grid.zero_index
    return float(d.mass[:z].sum()) + 0.5 * float(d.mass[z])


@functools.lru_cache(maxsize=None)
def _bhatt_weights(grid: LlrGrid) -> np.ndarray:
    w = np.exp(-_grid_centers(grid) / 2.0)
    w.flags.writeable = False
    return w


def bhattacharyya_density(d) -> float:
    """Bhattacharyya functional int e^{-m/2} dP; saturation bins use centers."""
    return float(np.dot(_bhatt_weights(d.grid), d.mass))


def bhattacharyya(pair: DensityPair) -> float:
    """Bhattacharyya noise parameter of a conditional pair."""
    return bhattacharyya_density(pair.p0)


def l1_distance(a, b) -> float:
    if a.grid != b.grid:
        raise GridMismatchError("l1_distance requires a common grid")
    return float(np.abs(a.mass - b.mass).sum())
