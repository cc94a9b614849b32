"""Density-evolution recursions, iteration control, and threshold bisection.

Three recursions share the check/variable machinery:

* classical: single density, all-zero codeword, symmetric channels only;
* linear (generalized): a conditional pair driven through the averaged and
  difference check terms, for linear codes on non-symmetric channels;
* coset: single density seeded with the symmetrized channel density.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channels import Channel, ChannelFamily, coset_initial, initial_pair, is_symmetric
from .degrees import DegreeDistribution
from .density import (
    Density,
    DensityPair,
    GammaDensity,
    GridMismatchError,
    LlrGrid,
    MagGrid,
    SignedDensity,
    bhattacharyya_density,
    convolve,
    error_mass,
    gamma_inverse,
    gamma_transform,
    l1_distance,
    lambda_apply,
    rho_apply,
)

# quantization noise floor for signed-measure intermediates
_NEGATIVE_MASS_TOL = -1e-9

DEFAULT_GRID = LlrGrid.make(0.01, 25.0)


class DeMode(enum.Enum):
    CLASSICAL = "classical"
    LINEAR_GENERALIZED = "linear"
    COSET = "coset"


class DeStatus(enum.Enum):
    CONVERGED = "converged"
    STABILITY_REACHED = "stability_reached"
    ITERATION_CAP = "iteration_cap"


@dataclass
class DeIteration:
    l: int
    p_e: float
    bhattacharyya: float
    q_gap: float | None = None


@dataclass
class DeTrace:
    mode: DeMode
    records: list[DeIteration]
    status: DeStatus

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final_p_e(self) -> float:
        return self.records[-1].p_e

    def decodable(self) -> bool:
        return self.status is not DeStatus.ITERATION_CAP


@dataclass
class ThresholdResult:
    p_star: float
    lo: float
    hi: float
    evaluations: int
    mode: DeMode

    def to_json_dict(self) -> dict:
        return {
            "p_star": self.p_star,
            "lo": self.lo,
            "hi": self.hi,
            "evaluations": self.evaluations,
            "mode": self.mode.value,
        }


def _clip_signed_to_density(q: SignedDensity) -> Density:
    """Zero the tiny negatives signed-measure quantization leaves behind."""
    lo = float(q.mass.min())
    if lo < _NEGATIVE_MASS_TOL:
        raise ValueError(
            f"negative check-output mass {lo:.3e}: quantization breakdown"
        )
    return Density(q.grid, np.maximum(q.mass, 0.0))


def _check_update_pair(
    state: DensityPair, deg: DegreeDistribution, mag: MagGrid | None = None
) -> tuple[Density, Density]:
    """Check-node step of the generalized recursion: averaged term plus the
    signed difference term, recombined per conditioning bit."""
    g_avg = rho_apply(gamma_transform(state.average(), mag, conservative=True), deg)
    g_diff = rho_apply(
        gamma_transform(state.half_difference(), mag, conservative=True), deg
    )
    plus = gamma_inverse(
        GammaDensity(g_avg.llr_grid, g_avg.mag_grid, g_avg.mass + g_diff.mass),
        conservative=True,
    )
    minus = gamma_inverse(
        GammaDensity(g_avg.llr_grid, g_avg.mag_grid, g_avg.mass - g_diff.mass),
        conservative=True,
    )
    return _clip_signed_to_density(plus), _clip_signed_to_density(minus)


def _check_update_single(d: Density, deg: DegreeDistribution) -> Density:
    g = rho_apply(gamma_transform(d, conservative=True), deg)
    return _clip_signed_to_density(gamma_inverse(g, conservative=True))


def _variable_update(init: Density, q: Density, deg: DegreeDistribution) -> Density:
    out = convolve(init, lambda_apply(q, deg))
    # Mass is conserved analytically, but float rounding leaves ~1e-15 per
    # step and each iteration multiplies the excess by the convolution degree
    # product, so it must be pinned back to 1 here.
    out.mass /= out.mass.sum()
    return out


def de_step_linear(
    state: DensityPair, init: DensityPair, deg: DegreeDistribution
) -> DensityPair:
    """One iteration of the generalized recursion for linear codes."""
    if state.grid != init.grid:
        raise GridMismatchError("state and init must share a grid")
    q0, q1 = _check_update_pair(state, deg)
    return DensityPair(
        _variable_update(init.p0, q0, deg),
        _variable_update(init.p1, q1, deg),
    )


def de_step_coset(state: Density, init: Density, deg: DegreeDistribution) -> Density:
    """One iteration of the symmetrized (coset) recursion."""
    if state.grid != init.grid:
        raise GridMismatchError("state and init must share a grid")
    return _variable_update(init, _check_update_single(state, deg), deg)


def bhattacharyya_contracts(b0: float, b: float, deg: DegreeDistribution) -> bool:
    """Entry test for the basin of the zero-error fixed point.

    One variable+check round maps the Bhattacharyya value B no higher than
    B0 * lambda(rho'(1) * B); once that bound drops below B it keeps
    contracting (the bound is convex in B and vanishes at 0), so the
    recursion is committed to the zero-error fixed point.
    """
    if b <= 0.0:
        return True
    return b0 * deg.lambda_eval(deg.rho_prime_at_one() * b) < b


def stability_check(state, deg: DegreeDistribution) -> bool:
    """Local stability of the zero-error fixed point at the current density:
    lambda'(0) * rho'(1) * B < 1 with B the codeword-averaged Bhattacharyya
    value. Ensembles without degree-2 variable nodes are always stable."""
    if isinstance(state, DensityPair):
        b = bhattacharyya_density(state.average())
    else:
        b = bhattacharyya_density(state)
    return deg.lambda2 * deg.rho_prime_at_one() * b < 1.0


def run_de(
    ch: Channel,
    deg: DegreeDistribution,
    mode: DeMode,
    max_iter: int,
    p_e_target: float = 1e-6,
    stability_stop: bool = False,
    grid: LlrGrid = DEFAULT_GRID,
) -> DeTrace:
    """Iterate the recursion for `mode`, recording one row per iteration.

    Terminates CONVERGED once p_e drops below p_e_target, STABILITY_REACHED
    once the evolved density enters the zero-error basin (only with
    stability_stop set), and ITERATION_CAP otherwise.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if mode is DeMode.CLASSICAL and not is_symmetric(ch):
        raise ValueError("classical mode requires a symmetric channel")

    pair_mode = mode is DeMode.LINEAR_GENERALIZED
    init_pair = initial_pair(ch, grid)
    if pair_mode:
        state_pair = init_pair
        avg = state_pair.average()
    elif mode is DeMode.COSET:
        init = coset_initial(ch, grid)
        state = init
        avg = state
    else:
        init = init_pair.p0
        state = init
        avg = state

    b0 = bhattacharyya_density(avg)
    records: list[DeIteration] = []
    status = DeStatus.ITERATION_CAP
    for l in range(1, max_iter + 1):
        if pair_mode:
            q0, q1 = _check_update_pair(state_pair, deg)
            q_gap = l1_distance(q0, q1)
            state_pair = DensityPair(
                _variable_update(init_pair.p0, q0, deg),
                _variable_update(init_pair.p1, q1, deg),
            )
            avg = state_pair.average()
        else:
            q = _check_update_single(state, deg)
            q_gap = None
            state = _variable_update(init, q, deg)
            avg = state
        p_e = error_mass(avg)
        b = bhattacharyya_density(avg)
        records.append(DeIteration(l, p_e, b, q_gap))
        if p_e < p_e_target:
            status = DeStatus.CONVERGED
            break
        if stability_stop and bhattacharyya_contracts(b0, b, deg):
            status = DeStatus.STABILITY_REACHED
            break
    return DeTrace(mode, records, status)


def threshold_search(
    fam: ChannelFamily,
    deg: DegreeDistribution,
    mode: DeMode,
    iter_cap: int = 100,
    tol: float = 1e-4,
    p_e_target: float = 1e-8,
    grid: LlrGrid = DEFAULT_GRID,
    max_bisections: int = 30,
) -> ThresholdResult:
    """Bisect the channel parameter for the largest decodable value.

    Decodable means the recursion either reaches p_e < p_e_target or enters
    the zero-error basin within iter_cap iterations.
    """
    evaluations = 0

    def decodable(value: float) -> bool:
        nonlocal evaluations
        evaluations += 1
        trace = run_de(
            fam.make(value),
            deg,
            mode,
            max_iter=iter_cap,
            p_e_target=p_e_target,
            stability_stop=True,
            grid=grid,
        )
        return trace.decodable()

    lo, hi = fam.lo, fam.hi
    if not decodable(lo):
        raise ValueError(f"bracket violated: {fam.param}={lo} is not decodable")
    if decodable(hi):
        raise ValueError(f"bracket violated: {fam.param}={hi} is decodable")
    for _ in range(max_bisections):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if decodable(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), lo, hi, evaluations, mode)
