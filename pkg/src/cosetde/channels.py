"""Binary-input channel models and their initial LLR density pairs.

Every channel produces the conditional pair (P(0), P(1)): P(x) is the law of
the bit-oriented LLR ln p(y|x)/p(y|xbar) given that bit x was sent. The
symmetrized (coset) starting density is the average of the two.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .density import Density, DensityPair, LlrGrid


@dataclass(frozen=True)
class ZChannel:
    """Only bit 1 is corrupted, with one-way crossover probability p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError("z-channel crossover must be in [0, 1)")


@dataclass(frozen=True)
class Bsc:
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps < 0.5:
            raise ValueError("BSC crossover must be in [0, 0.5)")


@dataclass(frozen=True)
class Basc:
    """Binary asymmetric channel with crossovers eps0 (on 0) and eps1 (on 1)."""

    eps0: float
    eps1: float

    def __post_init__(self):
        if not (0.0 <= self.eps0 <= 1.0 and 0.0 <= self.eps1 <= 1.0):
            raise ValueError("BASC crossovers must be in [0, 1]")
        if self.eps0 + self.eps1 >= 1.0:
            raise ValueError("BASC requires eps0 + eps1 < 1")


@dataclass(frozen=True)
class BiAwgn:
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class TableChannel:
    """Finite-output channel given by its likelihood rows p(y|0), p(y|1)."""

    p_y_given_0: tuple[float, ...]
    p_y_given_1: tuple[float, ...]

    def __post_init__(self):
        p0 = tuple(float(v) for v in self.p_y_given_0)
        p1 = tuple(float(v) for v in self.p_y_given_1)
        object.__setattr__(self, "p_y_given_0", p0)
        object.__setattr__(self, "p_y_given_1", p1)
        if len(p0) != len(p1) or not p0:
            raise ValueError("likelihood rows must be non-empty and equal length")
        for row, name in ((p0, "p_y_given_0"), (p1, "p_y_given_1")):
            if any(v < 0 for v in row):
                raise ValueError(f"{name} has negative entries")
            if abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1")
            if max(row) == 0.0:
                raise ValueError(f"{name} is all-zero (degenerate channel)")


Channel = ZChannel | Bsc | Basc | BiAwgn | TableChannel


def likelihood_table(ch: Channel) -> tuple[np.ndarray, np.ndarray]:
    """Likelihood rows (p(y|0), p(y|1)) for channels with finite output."""
    if isinstance(ch, ZChannel):
        return np.array([1.0, 0.0]), np.array([ch.p, 1.0 - ch.p])
    if isinstance(ch, Bsc):
        return np.array([1.0 - ch.eps, ch.eps]), np.array([ch.eps, 1.0 - ch.eps])
    if isinstance(ch, Basc):
        return np.array([1.0 - ch.eps0, ch.eps0]), np.array([ch.eps1, 1.0 - ch.eps1])
    if isinstance(ch, TableChannel):
        return np.array(ch.p_y_given_0), np.array(ch.p_y_given_1)
    raise TypeError(f"{type(ch).__name__} has no finite likelihood table")


def basc_params(ch: Channel) -> tuple[float, float]:
    """Crossover pair (eps0, eps1); BSC and z-channel are special cases."""
    if isinstance(ch, Basc):
        return ch.eps0, ch.eps1
    if isinstance(ch, Bsc):
        return ch.eps, ch.eps
    if isinstance(ch, ZChannel):
        return 0.0, ch.p
    raise TypeError(f"{type(ch).__name__} has no crossover pair")


def is_symmetric(ch: Channel) -> bool:
    if isinstance(ch, (Bsc, BiAwgn)):
        return True
    if isinstance(ch, ZChannel):
        return ch.p == 0.0
    if isinstance(ch, Basc):
        return ch.eps0 == ch.eps1
    # good enough for tables: the conditional LLR laws must coincide
    pair = initial_pair(ch, LlrGrid.make(0.05, 10.0))
    return bool(np.allclose(pair.p0.mass, pair.p1.mass, atol=1e-12))


def _place_atom(mass: np.ndarray, grid: LlrGrid, m: float, prob: float) -> None:
    """Mean-preserving projection of a point mass onto at most two bins."""
    if prob == 0.0:
        return
    if m >= grid.half_range:
        mass[-1] += prob
        return
    if m <= -grid.half_range:
        mass[0] += prob
        return
    t = m / grid.bin_width
    k = math.floor(t)
    frac = t - k
    mass[grid.zero_index + k] += prob * (1.0 - frac)
    if frac != 0.0:
        mass[grid.zero_index + k + 1] += prob * frac


def _discrete_pair(p0: np.ndarray, p1: np.ndarray, grid: LlrGrid) -> DensityPair:
    m0 = np.zeros(grid.bin_count)
    m1 = np.zeros(grid.bin_count)
    for y in range(p0.size):
        a, b = p0[y], p1[y]
        if a > 0.0:
            llr = math.inf if b == 0.0 else math.log(a / b)
            _place_atom(m0, grid, llr, a)
        if b > 0.0:
            llr = math.inf if a == 0.0 else math.log(b / a)
            _place_atom(m1, grid, llr, b)
    return DensityPair(Density(grid, m0), Density(grid, m1))


def _awgn_density(sigma: float, grid: LlrGrid) -> Density:
    # LLR = 2y/sigma^2 with y ~ N(+-1, sigma^2): Gaussian, mean 2/sigma^2,
    # variance 4/sigma^2; bin masses are exact CDF differences.
    mu = 2.0 / sigma**2
    sd = 2.0 / sigma
    edges = np.concatenate(
        (
            [-np.inf],
            (np.arange(grid.bin_count - 1) - grid.half_bins + 0.5) * grid.bin_width,
            [np.inf],
        )
    )
    z = (edges - mu) / (sd * math.sqrt(2.0))
    cdf = 0.5 * (1.0 + erf(z))
    return Density(grid, np.diff(cdf))


def initial_pair(ch: Channel, grid: LlrGrid) -> DensityPair:
    """Conditional LLR density pair of a channel, projected onto the grid."""
    if isinstance(ch, BiAwgn):
        d = _awgn_density(ch.sigma, grid)
        return DensityPair(d, Density(grid, d.mass.copy()))
    p0, p1 = likelihood_table(ch)
    return _discrete_pair(p0, p1, grid)


def coset_initial(ch: Channel, grid: LlrGrid) -> Density:
    """Symmetrized starting density (P(0) + P(1)) / 2."""
    return initial_pair(ch, grid).average()


def bhattacharyya_exact(ch: Channel) -> float:
    """sum_y sqrt(p(y|0) p(y|1)), straight from the channel law."""
    if isinstance(ch, BiAwgn):
        return math.exp(-1.0 / (2.0 * ch.sigma**2))
    p0, p1 = likelihood_table(ch)
    return float(np.sqrt(p0 * p1).sum())


def llr_clamped(p0: np.ndarray, p1: np.ndarray, clamp: float) -> np.ndarray:
    """Decoder LLR ln p(y|0)/p(y|1) per output symbol, clamped to +-clamp."""
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(p0) - np.log(p1)
    llr = np.where(np.isnan(llr), 0.0, llr)
    return np.clip(llr, -clamp, clamp)


def sample_llrs(ch: Channel, bits: np.ndarray, rng: np.random.Generator, clamp: float) -> np.ndarray:
    """Channel outputs for the given bits, reported as decoder LLRs."""
    if isinstance(ch, BiAwgn):
        y = (1.0 - 2.0 * bits) + ch.sigma * rng.standard_normal(bits.size)
        return np.clip(2.0 * y / ch.sigma**2, -clamp, clamp)
    p0, p1 = likelihood_table(ch)
    llr = llr_clamped(p0, p1, clamp)
    cdf = np.cumsum(np.stack((p0, p1)), axis=1)
    u = rng.random(bits.size)
    y = np.empty(bits.size, dtype=np.int64)
    for b in (0, 1):
        sel = bits == b
        y[sel] = np.searchsorted(cdf[b], u[sel], side="right")
    return llr[np.minimum(y, p0.size - 1)]


@dataclass(frozen=True)
class ChannelFamily:
    """A channel template with one scalar parameter swept over [lo, hi].

    The channel is assumed to degrade monotonically in the parameter.
    """

    template: Channel
    param: str
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("family range requires lo < hi")
        if self.param not in {f.name for f in dataclasses.fields(self.template)}:
            raise ValueError(f"channel has no parameter {self.param!r}")

    def make(self, value: float) -> Channel:
        return dataclasses.replace(self.template, **{self.param: value})
