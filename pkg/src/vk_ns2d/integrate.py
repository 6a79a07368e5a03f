"""Time integration, particle tracing and the transport-identity check.

The semi-discrete system is advanced in the conserved variables (rho, m)
with the three-stage strong-stability-preserving Runge-Kutta scheme; each
stage is a convex combination of conservative updates, so the torus
conservation identities survive time stepping to roundoff.

On the disc the polar cells shrink azimuthally towards the pole, which
would force dt ~ (dr*dth)^2 on an explicit scheme.  After every stage a
spectral pole filter zeroes azimuthal modes above m = 2i+1 on ring i; for
smooth fields the removed content is O(r^m/m!) and the effective resolution
becomes uniform, so the time step is set by dr alone.  The filter leaves
the ring means untouched and therefore conserves mass exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import _kernels, presets
from .diagnostics import DiagRecord, record
from .fields import GridDisc, GridTorus, ScalarField, VectorField, integral, interp
from .physics import (
    DENSITY_FLOOR,
    DensityFloorError,
    FluidParams,
    State,
    _rhs_disc_arrays,
    _rhs_torus_arrays,
    flux_G,
    theta_of,
)
from .steady import solve_steady

__all__ = [
    "RunConfig",
    "RunResult",
    "RunAborted",
    "ParticlePath",
    "stable_dt",
    "step",
    "run",
    "trace_particle",
    "theta_transport_residual",
]


@dataclass(frozen=True)
class RunConfig:
    """Scenario description: domain, grid, initial condition and cadence.

    ``ic_preset``/``ic_amplitude`` select a built-in initial condition;
    ``ic_snapshot`` (a path prefix written by :mod:`vk_ns2d.snapshots`)
    overrides them.  ``t_end = 0`` is allowed and yields the initial state
    with a single diagnostic row.
    """

    t_end: float
    cfl: float = 0.45
    snapshot_every: float = 1.0
    diag_every: float = 0.05
    domain: str = "torus"
    n: int = 64
    n_r: int = 48
    n_th: int = 96
    ic_preset: str = "acoustic"
    ic_amplitude: float = 0.1
    ic_snapshot: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.snapshot_every <= 0 or self.diag_every <= 0:
            raise ValueError("emission cadences must be positive")
        if self.domain not in ("torus", "disc"):
            raise ValueError(f"unknown domain {self.domain!r}")

    def grid(self):
        return GridTorus(self.n) if self.domain == "torus" else GridDisc(self.n_r, self.n_th)


@dataclass
class RunResult:
    final_state: State
    records: list[DiagRecord]
    snapshots: list[State]
    rho_s: ScalarField


class RunAborted(RuntimeError):
    """Integration stopped on a density-floor or non-finite value.

    Carries the last good state and the partial diagnostic series.
    """

    def __init__(self, message: str, state: State, records, snapshots):
        super().__init__(message)
        self.state = state
        self.records = records
        self.snapshots = snapshots


# ---------------------------------------------------------------------------
# time step control


def stable_dt(state: State, params: FluidParams, cfl: float = 1.0) -> float:
    """cfl * min(h/(max|u| + c_max), h^2/(2 nu_max)).

    c_max is the largest sound speed sqrt(gamma rho^(gamma-1)) and nu_max =
    (2 mu + max lambda)/min rho.  On the disc the advective length is dr/2
    and the viscous length dr: with the pole filter active those are the
    effective resolutions of the scheme.
    """
    grid = state.grid
    rho = state.rho.values
    vmax = float(np.max(np.hypot(state.u.c1, state.u.c2)))
    rho_max = float(np.max(rho))
    rho_min = float(np.min(rho))
    c_max = np.sqrt(params.gamma * rho_max ** (params.gamma - 1.0))
    nu_max = (2.0 * params.mu + rho_max**params.beta) / rho_min
    if isinstance(grid, GridTorus):
        h_adv = h_vis = grid.h
    else:
        h_adv = 0.5 * grid.dr
        h_vis = grid.dr
    return cfl * min(h_adv / (vmax + c_max), h_vis * h_vis / (2.0 * nu_max))


# ---------------------------------------------------------------------------
# stepping


@lru_cache(maxsize=8)
def _pole_filter_mask(grid: GridDisc) -> np.ndarray:
    m = np.arange(grid.n_th // 2 + 1)[None, :]
    cap = (2 * np.arange(grid.n_r) + 1)[:, None]
    return m > cap


def _apply_pole_filter(grid: GridDisc, stack: np.ndarray) -> np.ndarray:
    sp = np.fft.rfft(stack, axis=-1)
    sp[..., _pole_filter_mask(grid)] = 0.0
    return np.fft.irfft(sp, n=grid.n_th, axis=-1)


class _Stepper:
    """Array-level SSP-RK3 integrator bound to one grid and parameter set.

    Works on a (3, n0, n1) stack of the conserved variables and reuses a
    kernel workspace across steps.
    """

    def __init__(self, grid, params: FluidParams):
        self.grid = grid
        self.params = params
        self.gf = params.force_gradient(grid)
        self.is_disc = isinstance(grid, GridDisc)
        self.ws = None if self.is_disc else _kernels.make_workspace(grid.n)

    def tend(self, s):
        if self.is_disc:
            return _rhs_disc_arrays(self.grid, s[0], s[1], s[2], self.params, self.gf)
        return _rhs_torus_arrays(self.grid, s[0], s[1], s[2], self.params, self.gf, self.ws)

    def _stage(self, w0, s0, w1, s1, k, dt):
        out, rho_min = _kernels.ssp_stage(w0, s0, w1, s1, k[0], k[1], k[2], dt)
        if self.is_disc:
            out = _apply_pole_filter(self.grid, out)
            rho_min = np.min(out[0])
        if not np.isfinite(rho_min) or rho_min < DENSITY_FLOOR:
            raise DensityFloorError(
                f"density reached {rho_min:.3e}, below the {DENSITY_FLOOR:.0e} floor"
            )
        return out

    def advance(self, s, dt):
        s1 = self._stage(0.0, s, 1.0, s, self.tend(s), dt)
        s2 = self._stage(0.75, s, 0.25, s1, self.tend(s1), dt)
        return self._stage(1.0 / 3.0, s, 2.0 / 3.0, s2, self.tend(s2), dt)


def step(state: State, params: FluidParams, dt: float) -> State:
    """One SSP-RK3 step of size dt; dt should not exceed :func:`stable_dt`."""
    rho = state.rho.values
    s = np.stack([rho, rho * state.u.c1, rho * state.u.c2])
    stepper = _Stepper(state.grid, params)
    try:
        s = stepper.advance(s, dt)
    except DensityFloorError as err:
        raise DensityFloorError(str(err), state=state) from None
    grid = state.grid
    return State(
        ScalarField(grid, s[0]), VectorField(grid, s[1] / s[0], s[2] / s[0]), state.t + dt
    )


# ---------------------------------------------------------------------------
# full runs


def _steady_density(grid, params: FluidParams, total_mass: float) -> ScalarField:
    if params.f is None:
        area = 1.0 if isinstance(grid, GridTorus) else np.pi
        return ScalarField.full(grid, total_mass / area)
    return solve_steady(params.f, total_mass, params.gamma).rho_s


def run(config: RunConfig, params: FluidParams, state0: State | None = None) -> RunResult:
    """Integrate to t_end, emitting diagnostics and snapshots on schedule.

    Deterministic for a fixed config, parameters and initial state.  On a
    density-floor violation or non-finite value raises :class:`RunAborted`
    carrying the last good state and partial series.
    """
    if state0 is None:
        state0 = presets.initial_state(config)
    grid = state0.grid
    rho_s = _steady_density(grid, params, integral(state0.rho))
    stepper = _Stepper(grid, params)

    def make_record(st: State) -> DiagRecord:
        dr_, dm_ = _wrap_rhs(stepper, st)
        return record(st, params, rho_s, (dr_, dm_))

    records = [make_record(state0)]
    snapshots = [state0]
    state = state0
    rho0 = state.rho.values
    s = np.stack([rho0, rho0 * state.u.c1, rho0 * state.u.c2])
    t = 0.0
    eps = 1e-12
    next_diag = config.diag_every
    next_snap = config.snapshot_every

    if isinstance(grid, GridTorus):
        h_adv = h_vis = grid.h
    else:
        h_adv = 0.5 * grid.dr
        h_vis = grid.dr

    while t < config.t_end - eps:
        rho_min, rho_max, vmax = _kernels.conserved_extrema(s[0], s[1], s[2])
        c_max = np.sqrt(params.gamma * rho_max ** (params.gamma - 1.0))
        nu_max = (2.0 * params.mu + rho_max**params.beta) / rho_min
        dt_max = config.cfl * min(h_adv / (vmax + c_max), h_vis * h_vis / (2.0 * nu_max))
        t_event = min(next_diag, next_snap, config.t_end)
        dt = min(dt_max, t_event - t)
        try:
            s = stepper.advance(s, dt)
        except DensityFloorError as err:
            raise RunAborted(str(err), state, records, snapshots) from None
        t += dt
        hit_diag = t >= next_diag - eps
        hit_snap = t >= next_snap - eps
        if hit_diag or hit_snap or t >= config.t_end - eps:
            state = _as_state(grid, s, t)
        if hit_diag:
            records.append(make_record(state))
            next_diag += config.diag_every
        if hit_snap:
            snapshots.append(state)
            next_snap += config.snapshot_every

    if config.t_end == 0.0:
        state = state0
    return RunResult(state, records, snapshots, rho_s)


def _as_state(grid, s, t) -> State:
    return State(ScalarField(grid, s[0]), VectorField(grid, s[1] / s[0], s[2] / s[0]), t)


def _wrap_rhs(stepper: _Stepper, st: State):
    rho = st.rho.values
    d = stepper.tend(np.stack([rho, rho * st.u.c1, rho * st.u.c2]))
    return ScalarField(st.grid, d[0]), VectorField(st.grid, d[1], d[2])


# ---------------------------------------------------------------------------
# particle tracing along flow lines


@dataclass(frozen=True)
class ParticlePath:
    """Samples of (t, x(t)) along a flow line together with the transported
    quantities theta(rho), G and P - P_s evaluated at the particle."""

    t: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    p_dev: np.ndarray
    g: np.ndarray
    clipped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")


def trace_particle(
    x0,
    snapshots: list[State],
    params: FluidParams,
    rho_s: ScalarField,
) -> ParticlePath:
    """Integrate x' = u(x, t) through the snapshot sequence (midpoint rule).

    Velocities between snapshots are interpolated linearly in time.  On the
    disc the radius is clamped to 1 - 1e-9 if roundoff pushes the particle
    out; the clamp is flagged on the returned path.
    """
    if len(snapshots) < 2:
        raise ValueError("need at least two velocity snapshots")
    grid = snapshots[0].grid
    is_disc = isinstance(grid, GridDisc)
    ps_vals = rho_s.values**params.gamma

    x = np.asarray(x0, dtype=float).copy()
    clipped = False

    def clamp(p):
        nonlocal clipped
        if is_disc:
            rr = float(np.hypot(p[0], p[1]))
            if rr > 1.0 - 1e-9:
                p = p * (1.0 - 1e-9) / rr
                clipped = True
        return p

    ts, xs, thetas, pdevs, gs = [], [], [], [], []

    def sample(st: State, p):
        ts.append(st.t)
        xs.append(p.copy())
        thetas.append(float(interp(theta_of(st.rho, params), p)))
        pdevs.append(float(interp(ScalarField(grid, st.rho.values**params.gamma - ps_vals), p)))
        gs.append(float(interp(flux_G(st, params, ScalarField(grid, rho_s.values)), p)))

    sample(snapshots[0], x)
    for a, b in zip(snapshots[:-1], snapshots[1:]):
        dt = b.t - a.t
        mid = VectorField(
            grid, 0.5 * (a.u.c1 + b.u.c1), 0.5 * (a.u.c2 + b.u.c2)
        )
        k1 = interp(a.u, x)
        xm = clamp(x + 0.5 * dt * k1)
        x = clamp(x + dt * interp(mid, xm))
        sample(b, x)

    return ParticlePath(
        np.asarray(ts), np.asarray(xs), np.asarray(thetas), np.asarray(pdevs),
        np.asarray(gs), clipped,
    )


def theta_transport_residual(path: ParticlePath) -> float:
    """Max interior defect of d(theta)/dt + (P - P_s) + G along the path.

    The time derivative is a centered difference over the path samples.
    """
    if path.t.size < 3:
        raise ValueError("need at least three path samples")
    dth = (path.theta[2:] - path.theta[:-2]) / (path.t[2:] - path.t[:-2])
    res = dth + path.p_dev[1:-1] + path.g[1:-1]
    return float(np.max(np.abs(res)))
