"""Equilibrium density from the force potential and the total mass.

The steady momentum balance grad(rho_s^gamma) = rho_s grad(f) integrates to
a closed form

    rho_s = ((gamma-1)/gamma * (f + C0))^(1/(gamma-1))

with the constant C0 fixed by the prescribed total mass.  The mass as a
function of C0 is continuous, strictly increasing and grows without bound,
so C0 is found by bisection with a Newton polish.  Solvability requires the
mass to exceed the integral of ((gamma-1)/gamma*(f - inf f))^(1/(gamma-1));
the strict inequality is enforced because equality would put the infimum of
rho_s at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, grad, integral

__all__ = ["SteadyState", "AdmissibilityError", "admissible", "solve_steady", "steady_residual"]

_NEWTON_CAP = 50


class AdmissibilityError(ValueError):
    """Total mass too small for the given potential and gamma."""


@dataclass(frozen=True)
class SteadyState:
    rho_s: ScalarField
    C0: float
    total_mass: float


def _mass_threshold(f: ScalarField, gamma: float) -> float:
    c = (gamma - 1.0) / gamma
    w = c * (f.values - np.min(f.values))
    return integral(ScalarField(f.grid, w ** (1.0 / (gamma - 1.0))))


def admissible(f: ScalarField, total_mass: float, gamma: float) -> bool:
    """Whether a positive equilibrium with the given mass exists."""
    if gamma <= 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    return total_mass > _mass_threshold(f, gamma)


def _rho_of(f: ScalarField, gamma: float, c0: float) -> np.ndarray:
    c = (gamma - 1.0) / gamma
    base = c * (f.values + c0)
    return base ** (1.0 / (gamma - 1.0))


def _mass_of(f: ScalarField, gamma: float, c0: float) -> float:
    return integral(ScalarField(f.grid, _rho_of(f, gamma, c0)))


def solve_steady(
    f: ScalarField, total_mass: float, gamma: float, tol: float = 1e-12
) -> SteadyState:
    """Find C0 such that the equilibrium density carries ``total_mass``.

    ``tol`` is relative on the mass constraint.  Bisection brackets the
    root, then Newton iterations (capped, with bisection fallback) polish
    it.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if total_mass <= 0:
        raise ValueError("total_mass must be positive")
    if not admissible(f, total_mass, gamma):
        raise AdmissibilityError(
            f"mass {total_mass} does not exceed the solvability threshold "
            f"{_mass_threshold(f, gamma):.6g}"
        )

    # At C0 = -inf(f) the mass equals the (strictly smaller) threshold, so
    # it is a valid lower bracket even though the density touches zero there.
    lo = -float(np.min(f.values))
    hi = lo + max(1.0, abs(lo))
    while _mass_of(f, gamma, hi) <= total_mass:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e12:
            raise RuntimeError("bracket growth failed; mass map not increasing?")

    target = total_mass
    c0 = 0.5 * (lo + hi)
    for _ in range(200):
        m = _mass_of(f, gamma, c0)
        if m > target:
            hi = c0
        else:
            lo = c0
        if hi - lo <= 1e-6 * max(1.0, abs(hi)):
            break
        c0 = 0.5 * (lo + hi)

    # Newton polish on the bracketed root; d(mass)/dC0 = integral of
    # rho_s / ((gamma-1)(f+C0)).  Iterate well past the mass contract so
    # that C0 itself carries the full tolerance.
    c0 = 0.5 * (lo + hi)
    best = None
    for _ in range(_NEWTON_CAP):
        rho = _rho_of(f, gamma, c0)
        m = integral(ScalarField(f.grid, rho))
        err = m - target
        if best is None or abs(err) < best[0]:
            best = (abs(err), c0)
        if abs(err) <= 0.05 * tol * target:
            break
        dm = integral(
            ScalarField(f.grid, rho / ((gamma - 1.0) * (f.values + c0)))
        )
        step = err / dm
        nxt = c0 - step
        if not (lo < nxt < hi):  # fall back to bisection when Newton leaves the bracket
            nxt = 0.5 * (lo + hi)
        if m > target:
            hi = c0
        else:
            lo = c0
        c0 = nxt
    else:
        c0 = best[1]

    rho = _rho_of(f, gamma, c0)
    if abs(integral(ScalarField(f.grid, rho)) - target) > tol * target:
        raise RuntimeError("root polish failed to meet the mass tolerance")
    if np.min(rho) <= 0:
        raise AdmissibilityError("equilibrium density is not positive")
    return SteadyState(ScalarField(f.grid, rho), float(c0), float(total_mass))


def steady_residual(ss: SteadyState, f: ScalarField, gamma: float) -> float:
    """Max norm of grad(rho_s^gamma) - rho_s grad(f)."""
    lhs = grad(ScalarField(f.grid, ss.rho_s.values**gamma))
    gf = grad(f)
    r1 = lhs.c1 - ss.rho_s.values * gf.c1
    r2 = lhs.c2 - ss.rho_s.values * gf.c2
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
