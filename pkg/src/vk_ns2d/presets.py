"""Compiled-in scenario presets and initial conditions.

Four named scenarios cover the verification suite:

* ``acoustic``      - torus, damped standing density wave, no force
* ``vk-periodic``   - torus, generic smooth data, no force
* ``spin-down``     - disc, rigid rotation decaying against wall friction
* ``forced-disc``   - disc, tilted potential, relaxation to the equilibrium

plus a manufactured disc state with an exactly tangential velocity and a
boundary friction profile matched to its wall vorticity, used to exercise
the Green-function representation machinery.
"""

from __future__ import annotations

import numpy as np

from .fields import GridDisc, GridTorus, ScalarField, VectorField
from .physics import FluidParams, State
from .steady import solve_steady

__all__ = ["initial_state", "force_field", "scenario", "manufactured_green_state", "SCENARIOS"]


def force_field(name: str, amplitude: float, grid) -> ScalarField | None:
    """Named force potentials sampled on the grid."""
    if name in ("none", ""):
        return None
    if name == "tilt-x":
        return ScalarField.sample(grid, lambda x, y: amplitude * x)
    if name == "coscos":
        return ScalarField.sample(
            grid, lambda x, y: amplitude * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
        )
    raise ValueError(f"unknown force preset {name!r}")


def initial_state(config) -> State:
    """Build the initial state named by the config (or load its snapshot)."""
    if config.ic_snapshot is not None:
        from .snapshots import load_state

        return load_state(config.ic_snapshot)
    grid = config.grid()
    a = config.ic_amplitude
    name = config.ic_preset

    if name == "acoustic":
        rho = ScalarField.sample(grid, lambda x, y: 1.0 + a * np.cos(2 * np.pi * x) + 0.0 * y)
        return State(rho, VectorField.zero(grid))
    if name == "vk-periodic":
        rho = ScalarField.sample(
            grid, lambda x, y: 1.0 + a * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
        )
        u = VectorField.sample(
            grid,
            lambda x, y: 0.5 * a * np.sin(2 * np.pi * y) + 0.0 * x,
            lambda x, y: 0.5 * a * np.sin(2 * np.pi * x) + 0.0 * y,
        )
        return State(rho, u)
    if name == "rigid-rotation":
        rho = ScalarField.full(grid, 1.0)
        u = VectorField.sample(grid, lambda x, y: -a * y, lambda x, y: a * x)
        return State(rho, u)
    if name == "forced-disc":
        rho = ScalarField.sample(
            grid,
            lambda x, y: 1.0 + a * np.sqrt(x**2 + y**2) * (1 - x**2 - y**2) * np.cos(np.arctan2(y, x)),
        )
        u = VectorField.sample(
            grid,
            lambda x, y: -a * y * (1 - x**2 - y**2),
            lambda x, y: a * x * (1 - x**2 - y**2),
        )
        return State(rho, u)
    raise ValueError(f"unknown initial-condition preset {name!r}")


def scenario(name: str):
    """Named (RunConfig, FluidParams) pairs; grids and forces included."""
    from .integrate import RunConfig

    if name == "acoustic":
        config = RunConfig(
            t_end=10.0, cfl=0.45, snapshot_every=1.0, diag_every=0.05,
            domain="torus", n=64, ic_preset="acoustic", ic_amplitude=0.1,
        )
        params = FluidParams(mu=1.0, beta=2.0, gamma=2.0)
        return config, params
    if name == "vk-periodic":
        config = RunConfig(
            t_end=8.0, cfl=0.45, snapshot_every=1.0, diag_every=0.05,
            domain="torus", n=64, ic_preset="vk-periodic", ic_amplitude=0.1,
        )
        params = FluidParams(mu=1.0, beta=2.0, gamma=1.6)
        return config, params
    if name == "spin-down":
        config = RunConfig(
            t_end=1.0, cfl=0.45, snapshot_every=0.25, diag_every=0.02,
            domain="disc", n_r=48, n_th=96, ic_preset="rigid-rotation", ic_amplitude=0.5,
        )
        params = FluidParams(mu=0.5, beta=2.0, gamma=2.0, K=1.0)
        return config, params
    if name == "forced-disc":
        config = RunConfig(
            t_end=6.0, cfl=0.45, snapshot_every=1.0, diag_every=0.05,
            domain="disc", n_r=32, n_th=64, ic_preset="forced-disc", ic_amplitude=0.1,
        )
        grid = config.grid()
        params = FluidParams(
            mu=0.5, beta=1.5, gamma=2.0, f=force_field("tilt-x", 0.15, grid), K=1.0
        )
        return config, params
    raise ValueError(f"unknown scenario {name!r}")


SCENARIOS = ("acoustic", "vk-periodic", "spin-down", "forced-disc")


def manufactured_green_state(n_r: int, n_th: int, amp: float = 0.3):
    """Smooth disc state for the flux-representation checks.

    The velocity is the rotated gradient of psi = amp*(1-r^2)*g with
    g = exp(-2 r^2)(1 + x/5), hence exactly tangential; the friction profile
    K(theta) = 6 - 0.4 cos(theta)/(1 + 0.2 cos(theta)) makes the wall
    vorticity satisfy the slip law for this field, so the ghost closure is
    consistent with the state to discretization order.

    Returns (state, params, rho_s).
    """
    grid = GridDisc(n_r, n_th)
    x, y = grid.xy()
    r2 = x**2 + y**2
    g = np.exp(-2.0 * r2) * (1.0 + 0.2 * x)
    dg1 = -4.0 * x * g + 0.2 * np.exp(-2.0 * r2)
    dg2 = -4.0 * y * g
    u1 = amp * (-2.0 * y * g + (1.0 - r2) * dg2)
    u2 = -amp * (-2.0 * x * g + (1.0 - r2) * dg1)
    th = grid.theta[0]
    K = 6.0 - 0.4 * np.cos(th) / (1.0 + 0.2 * np.cos(th))

    f = force_field("tilt-x", 0.2, grid)
    params = FluidParams(mu=0.7, beta=1.5, gamma=2.0, f=f, K=K)
    ss = solve_steady(f, np.pi, params.gamma)
    rho = ss.rho_s.values + 0.1 * np.sqrt(r2) * (1.0 - r2) * np.cos(np.arctan2(y, x))
    state = State(ScalarField(grid, rho), VectorField(grid, u1, u2))
    return state, params, ss.rho_s
