"""Closed-form references for the round sphere and the flat square torus.

Nothing here touches the numerical stack; these formulas arbitrate the
discrete results.
"""
import math
from dataclasses import dataclass

ROUND_SPHERE = "round_sphere"
FLAT_TORUS = "flat_torus"

QUANTITIES = ("phi", "R", "vol", "lambda0", "T")


@dataclass(frozen=True)
class ModelSolution:
    """``size`` is the initial radius r0 (sphere) or the side length (torus)."""

    family: str
    size: float

    @classmethod
    def round_sphere(cls, r0=1.0):
        return cls(ROUND_SPHERE, float(r0))

    @classmethod
    def flat_torus(cls, side=2.0 * math.pi):
        return cls(FLAT_TORUS, float(side))

    @property
    def extinction_time(self):
        if self.family == ROUND_SPHERE:
            return self.size ** 2 / 2.0
        return math.inf


def oracle_eval(m, quantity, t=0.0):
    """Value of ``quantity`` on the model Ricci flow at time ``t``.

    For the sphere ``phi`` is the conformal factor relative to the unit
    round metric, so ``e^{2 phi} = r0^2 - 2t``; for the torus it is relative
    to the [0, 2pi)^2 square.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if quantity == "T":
        return m.extinction_time
    if m.family == ROUND_SPHERE:
        if t >= m.extinction_time:
            raise ValueError("t is at or past the extinction time")
        rho2 = m.size ** 2 - 2.0 * t
        return {
            "phi": 0.5 * math.log(rho2),
            "R": 2.0 / rho2,
            "vol": 4.0 * math.pi * rho2,
            "lambda0": 1.0 / (2.0 * rho2),
        }[quantity]
    if m.family == FLAT_TORUS:
        return {
            "phi": math.log(m.size / (2.0 * math.pi)),
            "R": 0.0,
            "vol": m.size ** 2,
            "lambda0": 0.0,
        }[quantity]
    raise ValueError(f"unknown family {m.family!r}")


def analytic_cni(family):
    """Neumann isoperimetric constant of the model surfaces (scale invariant)."""
    if isinstance(family, ModelSolution):
        family = family.family
    if family == ROUND_SPHERE:
        return 1.0 / math.sqrt(2.0 * math.pi)
    if family == FLAT_TORUS:
        return math.sqrt(2.0) / 4.0
    raise ValueError(f"unknown family {family!r}")


def cap_sweep_cni(radius=1.0, samples=20000):
    """Best ratio min(area)^{1/2} / length over spherical caps, by sweep."""
    best = 0.0
    for k in range(1, samples):
        theta = math.pi * k / samples
        cap = 2.0 * math.pi * radius ** 2 * (1.0 - math.cos(theta))
        rest = 4.0 * math.pi * radius ** 2 - cap
        length = 2.0 * math.pi * radius * math.sin(theta)
        best = max(best, math.sqrt(min(cap, rest)) / length)
    return best


def straight_cut_cni(side=2.0 * math.pi, samples=2000):
    """Best ratio over cuts of the square torus by two parallel closed lines.

    Closed straight geodesics of slope (p, q) have length side * sqrt(p^2+q^2);
    a pair of them bounds a band whose area can be anything in (0, side^2).
    """
    area = side ** 2
    best = 0.0
    for p in range(0, 4):
        for q in range(0, 4):
            if (p, q) == (0, 0) or math.gcd(p, q) != 1:
                continue
            length = 2.0 * side * math.hypot(p, q)
            for k in range(1, samples):
                band = area * k / samples
                best = max(best, math.sqrt(min(band, area - band)) / length)
    return best


def cap_area(r, radius=1.0):
    """Area of the geodesic ball of radius r on a round sphere."""
    r = min(r, math.pi * radius)
    return 2.0 * math.pi * radius ** 2 * (1.0 - math.cos(r / radius))


def sphere_kappa_at_gate(t, r0=1.0):
    """vol(B(x, r)) / r^2 at the largest radius passing R <= 1/r^2."""
    rho = math.sqrt(r0 ** 2 - 2.0 * t)
    r = rho / math.sqrt(2.0)
    return cap_area(r, rho) / r ** 2
