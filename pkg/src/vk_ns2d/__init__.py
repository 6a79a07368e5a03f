"""2D compressible Navier-Stokes solver with a density-power bulk viscosity.

The package simulates the barotropic system

    rho_t + div(rho u) = 0
    (rho u)_t + div(rho u x u) - mu*Lap(u) - grad((mu+lambda) div u) + grad(P)
        = rho grad(f)

with P = rho^gamma and lambda = rho^beta, on the periodic unit torus and on
the unit disc with Navier-slip boundary conditions (u.n = 0 and a friction
law on the vorticity).  Besides time integration it provides the equilibrium
density solver, elliptic/Green-function machinery for the effective viscous
flux, conservation/energy diagnostics, and numerical exercisers for the
inequality toolkit the analysis rests on.
"""

from .fields import (
    GridDisc,
    GridTorus,
    OutOfDomainError,
    ScalarField,
    VectorField,
    div,
    grad,
    integral,
    interp,
    laplacian,
    lp_norm,
    perp_grad,
    rot,
)
from .physics import (
    DensityFloorError,
    FluidParams,
    State,
    bulk_viscosity,
    flux_F,
    flux_G,
    material_accel,
    pressure,
    rhs_disc,
    rhs_torus,
    theta_of,
)
from .steady import AdmissibilityError, SteadyState, admissible, solve_steady, steady_residual

__all__ = [
    "GridTorus",
    "GridDisc",
    "ScalarField",
    "VectorField",
    "OutOfDomainError",
    "grad",
    "div",
    "rot",
    "perp_grad",
    "laplacian",
    "lp_norm",
    "integral",
    "interp",
    "FluidParams",
    "State",
    "DensityFloorError",
    "pressure",
    "bulk_viscosity",
    "theta_of",
    "rhs_torus",
    "rhs_disc",
    "material_accel",
    "flux_F",
    "flux_G",
    "SteadyState",
    "AdmissibilityError",
    "admissible",
    "solve_steady",
    "steady_residual",
]

__version__ = "0.1.0"
