"""Closed-form check-output asymptotics for binary asymmetric channels.

The check-node domain carries a Fourier transform indexed by a sign
frequency k and a magnitude frequency r. For a BASC the transform of the
incoming message density has a two-atom closed form, which makes the
difference and average of the conditioned check outputs computable for any
check degree without touching the quantized machinery. The difference term
dies geometrically in the degree shift; the average term approaches its
limit only harmonically, which is what keeps large-degree checks from
erasing everything before the two conditioned outputs merge.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .density import DensityPair, dirac, gamma_transform, gamma_inverse, l1_distance, rho_apply
from .density import GammaDensity


@dataclass(frozen=True)
class BascParams:
    eps0: float
    eps1: float

    def __post_init__(self):
        if self.eps0 < 0 or self.eps1 < 0:
            raise ValueError("crossovers must be non-negative")
        if self.eps0 + self.eps1 >= 1.0:
            raise ValueError("requires eps0 + eps1 < 1")


def _log_ratios(p: BascParams) -> tuple[float, float]:
    """Magnitudes of the two LLR atoms in the check-node domain."""
    den = 1.0 - p.eps0 - p.eps1
    a = math.log((1.0 - p.eps0 + p.eps1) / den)
    b = math.log((1.0 + p.eps0 - p.eps1) / den)
    return a, b


def phi_basc(x: int, k: int, r: float, p: BascParams) -> complex:
    """Transform value E[(-1)^(k*sign) e^(i r magnitude)] of the message
    density conditioned on transmitted bit x."""
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    a, b = _log_ratios(p)
    sign = 1.0 if k == 0 else -1.0
    if x == 0:
        return (1.0 - p.eps0) * cmath.exp(1j * r * a) + sign * p.eps0 * cmath.exp(1j * r * b)
    return (1.0 - p.eps1) * cmath.exp(1j * r * b) + sign * p.eps1 * cmath.exp(1j * r * a)


def f_minus(p: BascParams) -> float:
    """Difference of the coefficient-weighted atom magnitudes."""
    a, b = _log_ratios(p)
    return (1.0 - p.eps0 + p.eps1) * a - (1.0 + p.eps0 - p.eps1) * b


def f_plus(p: BascParams) -> float:
    """Sum of the coefficient-weighted atom magnitudes."""
    a, b = _log_ratios(p)
    return (1.0 - p.eps0 + p.eps1) * a + (1.0 + p.eps0 - p.eps1) * b


def _cpower(z: complex, n: int) -> complex:
    """z**n through polar form, stable for |z| < 1 at large n."""
    m = abs(z)
    if m == 0.0:
        return 0j
    return cmath.rect(math.exp(n * math.log(m)), n * cmath.phase(z))


def diff_term(delta: int, k: int, r: float, p: BascParams) -> complex:
    """Gap between the check outputs conditioned on parity 0 and parity 1,
    for a degree-(delta+1) check: 2 * ((phi0 - phi1)/2)^delta at frequency
    r/delta."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    q = r / delta
    half = (phi_basc(0, k, q, p) - phi_basc(1, k, q, p)) / 2.0
    return 2.0 * _cpower(half, delta)


def avg_term(delta: int, k: int, r: float, p: BascParams) -> complex:
    """Parity-averaged check output for a degree-(delta+1) check:
    ((phi0 + phi1)/2)^delta at frequency r/delta."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    q = r / delta
    half = (phi_basc(0, k, q, p) + phi_basc(1, k, q, p)) / 2.0
    return _cpower(half, delta)


def avg_limit(k: int, r: float, p: BascParams) -> complex:
    """Large-degree limit of avg_term: e^{i (r/2) f_plus} for k = 0, and 0
    for k = 1 (the sign marginal washes out)."""
    if k == 0:
        return cmath.exp(0.5j * r * f_plus(p))
    return 0j


def gamma_char_fn(g: GammaDensity, k: int, r: float) -> complex:
    """Transform of a quantized sign x magnitude density at (k, r)."""
    v = np.arange(g.mag_grid.bin_count) * g.mag_grid.bin_width
    phase = np.exp(1j * r * v)
    total = np.dot(g.mass[0], phase)
    if k % 2 == 1:
        total -= np.dot(g.mass[1], phase)
    else:
        total += np.dot(g.mass[1], phase)
    return complex(total)


@dataclass
class QGapRow:
    delta: int
    d01: float
    d_avg: float


def empirical_q_gap(pair: DensityPair, deltas: list[int]) -> list[QGapRow]:
    """Quantized check-output gaps for single-term check polynomials x^delta.

    d01 is the total-variation gap between the outputs conditioned on the
    two parities; d_avg is the distance of the parity-averaged output from
    the know-nothing point mass at LLR 0.
    """
    grid = pair.grid
    g_avg = gamma_transform(pair.average(), conservative=True)
    g_diff = gamma_transform(pair.half_difference(), conservative=True)
    delta0 = dirac(grid, 0.0)
    out = []
    for delta in sorted(deltas):
        if delta < 1:
            raise ValueError("delta must be >= 1")
        ra = rho_apply(g_avg, {1: 1.0}, shift=delta)
        rd = rho_apply(g_diff, {1: 1.0}, shift=delta)
        q_plus = gamma_inverse(
            GammaDensity(grid, ra.mag_grid, ra.mass + rd.mass), conservative=True
        )
        q_minus = gamma_inverse(
            GammaDensity(grid, ra.mag_grid, ra.mass - rd.mass), conservative=True
        )
        q_avg = gamma_inverse(ra, conservative=True)
        d01 = float(np.abs(q_plus.mass - q_minus.mass).sum())
        d_avg = l1_distance(q_avg, delta0)
        out.append(QGapRow(delta, d01, d_avg))
    return out


@dataclass
class RateFit:
    """Least-squares decay fit over a positive magnitude sequence."""

    deltas: list[int]
    magnitudes: list[float]
    model: str  # "exponential" (const^delta) or "power" (delta^exponent)
    parameter: float  # const for exponential, exponent for power
    residual: float  # rms residual of log-magnitude under the chosen model


def fit_rate(deltas: list[int], magnitudes: list[float]) -> RateFit:
    """Fit log m against delta (exponential) and log delta (power law),
    keeping whichever leaves the smaller rms residual."""
    if len(deltas) != len(magnitudes):
        raise ValueError("deltas and magnitudes must have equal length")
    if len(deltas) < 4:
        raise ValueError("need at least 4 points")
    d = np.asarray(deltas, dtype=float)
    m = np.asarray(magnitudes, dtype=float)
    if np.any(m <= 0):
        raise ValueError("magnitudes must be positive")
    if np.any(np.diff(d) <= 0):
        raise ValueError("deltas must be strictly increasing")
    logm = np.log(m)
    if float(np.ptp(logm)) < 1e-12:
        raise ValueError("magnitudes are constant: no decay to fit")

    def rms_fit(x):
        coef = np.polyfit(x, logm, 1)
        resid = logm - np.polyval(coef, x)
        return coef[0], math.sqrt(float(np.mean(resid**2)))

    slope_e, rms_e = rms_fit(d)
    slope_p, rms_p = rms_fit(np.log(d))
    if rms_e <= rms_p:
        return RateFit(list(deltas), list(magnitudes), "exponential", math.exp(slope_e), rms_e)
    return RateFit(list(deltas), list(magnitudes), "power", slope_p, rms_p)
