"""Edge-perspective degree distributions for irregular LDPC ensembles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

_FRACTION_TOL = 1e-12


def _normalize(poly: Mapping[int, float], name: str) -> tuple[tuple[int, float], ...]:
    if not poly:
        raise ValueError(f"{name} polynomial is empty")
    items = []
    for k, f in sorted(poly.items()):
        k = int(k)
        if k < 1:
            raise ValueError(f"{name} degree {k} is below 1")
        if f < 0:
            raise ValueError(f"{name} fraction for degree {k} is negative")
        if f > 0:
            items.append((k, float(f)))
    if not items:
        raise ValueError(f"{name} polynomial has no positive fractions")
    total = sum(f for _, f in items)
    if abs(total - 1.0) > _FRACTION_TOL:
        raise ValueError(f"{name} fractions sum to {total!r}, expected 1")
    return tuple(items)


@dataclass(frozen=True)
class DegreeDistribution:
    """Variable/check edge degree polynomials with an optional check shift.

    The shift raises every check degree by the same amount, i.e. multiplies
    the check polynomial by x^shift.
    """

    lam: tuple[tuple[int, float], ...]
    rho: tuple[tuple[int, float], ...]
    shift: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lam", _normalize(dict(self.lam), "lambda"))
        object.__setattr__(self, "rho", _normalize(dict(self.rho), "rho"))
        if self.shift < 0:
            raise ValueError("shift must be non-negative")
        if self.lam[0][0] < 2:
            raise ValueError("minimum variable degree must be >= 2")
        if self.rho[0][0] + self.shift < 2:
            raise ValueError("minimum check degree (after shift) must be >= 2")

    @classmethod
    def from_maps(
        cls, lam: Mapping[int, float], rho: Mapping[int, float], shift: int = 0
    ) -> "DegreeDistribution":
        return cls(tuple(sorted(lam.items())), tuple(sorted(rho.items())), shift)

    @classmethod
    def regular(cls, d_v: int, d_c: int, shift: int = 0) -> "DegreeDistribution":
        return cls.from_maps({d_v: 1.0}, {d_c: 1.0}, shift)

    @property
    def lambda_map(self) -> dict[int, float]:
        return dict(self.lam)

    @property
    def rho_map(self) -> dict[int, float]:
        return dict(self.rho)

    @property
    def lambda2(self) -> float:
        """Fraction of edges attached to degree-2 variable nodes."""
        return dict(self.lam).get(2, 0.0)

    def rho_prime_at_one(self) -> float:
        """rho'(1) = sum_k rho_k (k - 1), with the shift included."""
        return sum(f * (k - 1 + self.shift) for k, f in self.rho)

    def lambda_eval(self, x: float) -> float:
        """lambda(x) = sum_k lambda_k x^(k-1)."""
        return sum(f * x ** (k - 1) for k, f in self.lam)

    def shifted(self, shift: int) -> "DegreeDistribution":
        return DegreeDistribution(self.lam, self.rho, shift)

    def describe(self) -> str:
        def poly(terms, shift=0):
            return " + ".join(
                f"{f:g}x^{k - 1 + shift}" if f != 1.0 else f"x^{k - 1 + shift}"
                for k, f in terms
            )

        return f"lambda = {poly(self.lam)}, rho = {poly(self.rho, self.shift)}"
