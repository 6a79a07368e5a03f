"""Constitutive laws and semi-discrete right-hand sides for both domains.

The model is barotropic with a constant shear viscosity and a bulk
viscosity proportional to a power of the density:

    P(rho)      = rho^gamma          (gamma > 1)
    lambda(rho) = rho^beta           (beta > 0)
    theta(rho)  = 2*mu*log(rho) + rho^beta / beta

Tendencies are written for the conservative variables (rho, m = rho*u).
On the torus every term except the external force is a central difference
of a flux, so mass and force-free momentum are conserved to roundoff.  On
the disc the boundary conditions (u.n = 0, rot u = -K u.n_perp) enter
through ghost rings at r = 1 + dr/2, and the continuity/advection terms
use face fluxes that vanish identically on the wall.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .fields import (
    GridDisc,
    GridTorus,
    ScalarField,
    VectorField,
    _derivs,
    _dr_disc,
    _dth_disc,
    _extrapolated_ghost,
    _lap_disc,
    grad,
)

__all__ = [
    "DENSITY_FLOOR",
    "DensityFloorError",
    "FluidParams",
    "State",
    "pressure",
    "bulk_viscosity",
    "theta_of",
    "rhs_torus",
    "rhs_disc",
    "material_accel",
    "flux_F",
    "flux_G",
    "boundary_slip_trace",
]

# Below this density the integrator aborts rather than clamps: theta(rho)
# contains log(rho) and the analysis targets require rho > 0.
DENSITY_FLOOR = 1e-8


class DensityFloorError(RuntimeError):
    """Density dropped below the positive floor; the run must abort."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class FluidParams:
    """Physical constants and external data of the model.

    ``f`` is the force potential sampled on the run grid (``None`` means no
    force); ``K`` is the non-negative boundary friction, a scalar or an
    array over the boundary angles (disc only).
    """

    mu: float
    beta: float
    gamma: float
    f: ScalarField | None = None
    K: float | np.ndarray = 0.0

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.gamma <= 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if np.any(np.asarray(self.K) < 0):
            raise ValueError("boundary friction K must be non-negative")

    def friction(self, grid: GridDisc) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.K, dtype=float), (grid.n_th,))

    def force_gradient(self, grid) -> tuple[np.ndarray, np.ndarray] | None:
        if self.f is None:
            return None
        if self.f.grid != grid:
            raise ValueError("force potential lives on a different grid")
        g = grad(self.f)
        return g.c1, g.c2


@dataclass(frozen=True)
class State:
    rho: ScalarField
    u: VectorField
    t: float = 0.0

    def __post_init__(self):
        if self.rho.grid != self.u.grid:
            raise ValueError("rho and u live on different grids")
        if self.t < 0:
            raise ValueError("time must be non-negative")
        if np.min(self.rho.values) <= 0:
            raise ValueError("density must be positive everywhere")

    @property
    def grid(self):
        return self.rho.grid


def _check_positive(rho: ScalarField):
    if np.min(rho.values) <= 0:
        raise ValueError("density must be positive pointwise")


def pressure(rho: ScalarField, params: FluidParams) -> ScalarField:
    _check_positive(rho)
    return ScalarField(rho.grid, rho.values**params.gamma)


def bulk_viscosity(rho: ScalarField, params: FluidParams) -> ScalarField:
    _check_positive(rho)
    return ScalarField(rho.grid, rho.values**params.beta)


def theta_of(rho: ScalarField, params: FluidParams) -> ScalarField:
    """2*mu*log(rho) + rho^beta/beta, the quantity transported along flow lines."""
    _check_positive(rho)
    vals = 2.0 * params.mu * np.log(rho.values) + rho.values**params.beta / params.beta
    return ScalarField(rho.grid, vals)


# ---------------------------------------------------------------------------
# right-hand sides


def _rhs_torus_arrays(grid, rho, m1, m2, params, gf, ws=None):
    gf1, gf2 = gf if gf is not None else (rho, rho)  # dummies, skipped in-kernel
    return _kernels.torus_rhs(
        rho, m1, m2, params.mu, params.beta, params.gamma, gf1, gf2, gf is not None, ws
    )


def rhs_torus(state: State, params: FluidParams) -> tuple[ScalarField, VectorField]:
    """Tendencies (d rho/dt, d m/dt) on the periodic grid."""
    grid = state.grid
    if not isinstance(grid, GridTorus):
        raise TypeError("rhs_torus requires a state on GridTorus")
    _check_positive(state.rho)
    rho = state.rho.values
    m1 = rho * state.u.c1
    m2 = rho * state.u.c2
    drho, dm1, dm2 = _rhs_torus_arrays(grid, rho, m1, m2, params, params.force_gradient(grid))
    return ScalarField(grid, drho), VectorField(grid, dm1, dm2)


@lru_cache(maxsize=8)
def _disc_trig(grid: GridDisc) -> tuple[np.ndarray, np.ndarray]:
    th = grid.theta
    return np.cos(th), np.sin(th)


def _cartesian_grad_disc(v: np.ndarray, grid: GridDisc, ghost: np.ndarray):
    """Both Cartesian derivative components with one radial/angular sweep."""
    cos, sin = _disc_trig(grid)
    dv_r = _dr_disc(v, grid, ghost)
    dv_t = _dth_disc(v, grid) / grid.r
    return cos * dv_r - sin * dv_t, sin * dv_r + cos * dv_t


def _friction_ghost_tangential(ut_last: np.ndarray, K: np.ndarray, dr: float) -> np.ndarray:
    # Ghost tangential velocity making the one-sided wall vorticity equal the
    # friction value rot u = K * u_theta at r = 1 (u_r vanishes there, so the
    # angular part of rot drops out).
    r_last = 1.0 - 0.5 * dr
    r_ghost = 1.0 + 0.5 * dr
    return ut_last * (r_last - 0.5 * dr * K) / (r_ghost + 0.5 * dr * K)


def _polar_components(grid: GridDisc, c1, c2):
    cos, sin = _disc_trig(grid)
    return c1 * cos + c2 * sin, -c1 * sin + c2 * cos


def _radial_face_div(grid: GridDisc, flux_r: np.ndarray) -> np.ndarray:
    """(1/r) d_r(r F) with arithmetic-mean faces; wall and pole faces carry
    no flux (u.n = 0 at r = 1, zero measure at r = 0)."""
    n_r, n_th = grid.shape
    r_faces = (np.arange(1, n_r) * grid.dr)[:, None]
    rf = np.zeros((n_r + 1, n_th))
    rf[1:n_r] = r_faces * 0.5 * (flux_r[:-1] + flux_r[1:])
    return (rf[1:] - rf[:-1]) / (grid.r * grid.dr)


def _angular_face_div(grid: GridDisc, flux_th: np.ndarray) -> np.ndarray:
    face = 0.5 * (flux_th + np.roll(flux_th, -1, axis=1))
    return (face - np.roll(face, 1, axis=1)) / (grid.r * grid.dth)


def _div_face_form(grid: GridDisc, ur, ut):
    return _radial_face_div(grid, ur) + _angular_face_div(grid, ut)


def rhs_disc(state: State, params: FluidParams) -> tuple[ScalarField, VectorField]:
    """Tendencies on the disc with Navier-slip boundary conditions."""
    grid = state.grid
    if not isinstance(grid, GridDisc):
        raise TypeError("rhs_disc requires a state on GridDisc")
    _check_positive(state.rho)
    rho = state.rho.values
    drho, dm1, dm2 = _rhs_disc_arrays(
        grid, rho, rho * state.u.c1, rho * state.u.c2, params, params.force_gradient(grid)
    )
    return ScalarField(grid, drho), VectorField(grid, dm1, dm2)


def _rhs_disc_arrays(grid: GridDisc, rho, m1, m2, params: FluidParams, gf):
    u1 = m1 / rho
    u2 = m2 / rho
    cos, sin = _disc_trig(grid)
    ur, ut = _polar_components(grid, u1, u2)

    K = params.friction(grid)
    ur_g = -ur[-1]
    ut_g = _friction_ghost_tangential(ut[-1], K, grid.dr)
    u1_g = cos[0] * ur_g - sin[0] * ut_g
    u2_g = sin[0] * ur_g + cos[0] * ut_g

    # continuity: face-flux divergence, exactly mass conserving
    drho = -_div_face_form(grid, rho * ur, rho * ut)

    # momentum advection of each Cartesian component
    adv1 = _radial_face_div(grid, rho * ur * u1) + _angular_face_div(grid, rho * ut * u1)
    adv2 = _radial_face_div(grid, rho * ur * u2) + _angular_face_div(grid, rho * ut * u2)

    # viscous terms
    lap1 = _lap_disc(u1, grid, ghost=u1_g)
    lap2 = _lap_disc(u2, grid, ghost=u2_g)
    divu = _div_face_form(grid, ur, ut)
    q = (params.mu + rho**params.beta) * divu
    dq1, dq2 = _cartesian_grad_disc(q, grid, _extrapolated_ghost(q))

    press = rho**params.gamma
    dp1, dp2 = _cartesian_grad_disc(press, grid, _extrapolated_ghost(press))

    dm1 = -adv1 + params.mu * lap1 + dq1 - dp1
    dm2 = -adv2 + params.mu * lap2 + dq2 - dp2
    if gf is not None:
        dm1 = dm1 + rho * gf[0]
        dm2 = dm2 + rho * gf[1]

    return drho, dm1, dm2


def rhs(state: State, params: FluidParams) -> tuple[ScalarField, VectorField]:
    if isinstance(state.grid, GridTorus):
        return rhs_torus(state, params)
    return rhs_disc(state, params)


def material_accel(
    state: State, rhs_result: tuple[ScalarField, VectorField]
) -> VectorField:
    """u_t + (u.grad)u reconstructed from the stored tendencies."""
    drho, dm = rhs_result
    rho = state.rho.values
    u1, u2 = state.u.c1, state.u.c2
    grid = state.grid
    du1_1, du1_2 = _derivs(u1, grid)
    du2_1, du2_2 = _derivs(u2, grid)
    a1 = (dm.c1 - drho.values * u1) / rho + u1 * du1_1 + u2 * du1_2
    a2 = (dm.c2 - drho.values * u2) / rho + u1 * du2_1 + u2 * du2_2
    return VectorField(grid, a1, a2)


# ---------------------------------------------------------------------------
# effective viscous flux


def flux_F(state: State, params: FluidParams) -> ScalarField:
    """(2*mu + lambda) div u - P."""
    from .fields import div

    lam = state.rho.values**params.beta
    s = div(state.u).values
    press = state.rho.values**params.gamma
    return ScalarField(state.grid, (2.0 * params.mu + lam) * s - press)


def flux_G(state: State, params: FluidParams, rho_s: ScalarField) -> ScalarField:
    """(2*mu + lambda) div u - (P - P_s); equals flux_F + P_s pointwise."""
    ps = rho_s.values**params.gamma
    return ScalarField(state.grid, flux_F(state, params).values + ps)


def boundary_slip_trace(state: State, params: FluidParams) -> np.ndarray:
    """Ghost-consistent trace of the tangential speed u.n_perp at r = 1.

    Returned per boundary angle; the sign convention (u.n_perp = -u_theta)
    does not matter to the quadratic dissipation integral.
    """
    grid = state.grid
    if not isinstance(grid, GridDisc):
        raise TypeError("boundary trace is defined on the disc")
    _, ut = _polar_components(grid, state.u.c1, state.u.c2)
    ut_g = _friction_ghost_tangential(ut[-1], params.friction(grid), grid.dr)
    return -0.5 * (ut[-1] + ut_g)
