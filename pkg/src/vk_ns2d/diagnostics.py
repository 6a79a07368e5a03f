"""Time-series observables, energy functionals and decay-rate fitting.

Each :class:`DiagRecord` is one sample of the conserved quantities, the
energy

    E = int( 1/2 rho |u|^2 + rho^gamma/(gamma-1) - rho f )

whose dissipation identity makes it non-increasing, the quadratic
functionals

    a1_sq = int( (mu+lambda)(div u)^2 + |grad u|^2 )
    a2_sq = int( (rho+1)^(gamma-1) (rho - rho_s)^2 )
    b_sq  = int( rho |u_dot|^2 )

norm tracking against the steady state, and sup/flux statistics.  The
gradient norms use the Frobenius norm of the full velocity gradient
pointwise.  On the torus the momentum potential F1 and the Riesz
commutator norms are recorded as well; they are structurally periodic
quantities and are written as zero on the disc.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields as dc_fields

import numpy as np

from . import elliptic
from .fields import GridDisc, GridTorus, ScalarField, VectorField, _derivs, integral, lp_norm
from .physics import FluidParams, State, boundary_slip_trace, flux_G, material_accel

__all__ = ["DiagRecord", "DecayFit", "FitError", "record", "decay_fit", "write_csv", "read_csv"]


class FitError(ValueError):
    """Decay fit rejected: nonpositive values or too few points."""


@dataclass(frozen=True)
class DiagRecord:
    t: float
    mass: float
    momentum_x: float
    momentum_y: float
    energy: float
    boundary_dissipation: float
    a1_sq: float
    a2_sq: float
    b_sq: float
    sup_rho: float
    rho_dev_l1: float
    rho_dev_l2: float
    rho_dev_l4: float
    rho_dev_linf: float
    gradu_l2: float
    gradu_l4: float
    sup_g: float
    f1_norm: float
    commutator_norm: float


def record(
    state: State,
    params: FluidParams,
    rho_s: ScalarField,
    rhs_result: tuple[ScalarField, VectorField],
) -> DiagRecord:
    grid = state.grid
    rho = state.rho.values
    u1, u2 = state.u.c1, state.u.c2

    def integ(a: np.ndarray) -> float:
        return integral(ScalarField(grid, a))

    mass = integ(rho)
    mom_x = integ(rho * u1)
    mom_y = integ(rho * u2)

    gamma = params.gamma
    e_dens = 0.5 * rho * (u1**2 + u2**2) + rho**gamma / (gamma - 1.0)
    if params.f is not None:
        e_dens = e_dens - rho * params.f.values
    energy = integ(e_dens)

    if isinstance(grid, GridDisc):
        trace = boundary_slip_trace(state, params)
        bdiss = float(np.sum(params.friction(grid) * trace**2) * grid.dth)
    else:
        bdiss = 0.0

    d11, d12 = _derivs(u1, grid)
    d21, d22 = _derivs(u2, grid)
    gradu_sq = d11**2 + d12**2 + d21**2 + d22**2
    divu = d11 + d22
    lam = rho**params.beta
    a1_sq = integ((params.mu + lam) * divu**2 + gradu_sq)

    dev = rho - rho_s.values
    a2_sq = integ((rho + 1.0) ** (gamma - 1.0) * dev**2)

    acc = material_accel(state, rhs_result)
    b_sq = integ(rho * (acc.c1**2 + acc.c2**2))

    dev_f = ScalarField(grid, dev)
    gradu_f = ScalarField(grid, np.sqrt(gradu_sq))
    g_field = flux_G(state, params, rho_s)

    if isinstance(grid, GridTorus):
        f1_norm = lp_norm(elliptic.f1_field(state), 2)
        comm_norm = lp_norm(elliptic.commutator_field(state), 2)
    else:
        f1_norm = 0.0
        comm_norm = 0.0

    return DiagRecord(
        t=state.t,
        mass=mass,
        momentum_x=mom_x,
        momentum_y=mom_y,
        energy=energy,
        boundary_dissipation=bdiss,
        a1_sq=a1_sq,
        a2_sq=a2_sq,
        b_sq=b_sq,
        sup_rho=float(np.max(rho)),
        rho_dev_l1=lp_norm(dev_f, 1),
        rho_dev_l2=lp_norm(dev_f, 2),
        rho_dev_l4=lp_norm(dev_f, 4),
        rho_dev_linf=lp_norm(dev_f, np.inf),
        gradu_l2=lp_norm(gradu_f, 2),
        gradu_l4=lp_norm(gradu_f, 4),
        sup_g=float(np.max(np.abs(g_field.values))),
        f1_norm=f1_norm,
        commutator_norm=comm_norm,
    )


# ---------------------------------------------------------------------------
# decay-rate fitting


@dataclass(frozen=True)
class DecayFit:
    xi: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def decay_fit(ts, values, window: tuple[float, float]) -> DecayFit:
    """Least-squares fit of log(value) against t inside the window.

    ``xi`` is minus the slope, clamped at zero.  For a zero-variance signal
    the convention r_squared = 0 applies.  Raises :class:`FitError` on
    nonpositive values or fewer than 5 points in the window.
    """
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise FitError(f"empty fit window [{t_lo}, {t_hi}]")
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = (ts >= t_lo) & (ts <= t_hi)
    t = ts[sel]
    v = values[sel]
    if t.size < 5:
        raise FitError(f"need at least 5 points in the window, got {t.size}")
    if np.any(v <= 0):
        raise FitError("decay fit requires positive values")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        xi=max(0.0, -float(slope)),
        intercept=float(intercept),
        r_squared=r2,
        window=(float(t_lo), float(t_hi)),
        n_points=int(t.size),
    )


# ---------------------------------------------------------------------------
# CSV emission (full precision, LF line endings)


def write_csv(path, records: list[DiagRecord]) -> None:
    names = [f.name for f in dc_fields(DiagRecord)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for rec in records:
            writer.writerow([repr(getattr(rec, n)) for n in names])


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        return {name: np.empty(0) for name in header}
    return {name: data[:, i] for i, name in enumerate(header)}
