"""Inverse Laplacians, the disc Neumann Green function, and the pointwise
representation of the effective viscous flux.

Torus: spectral zero-mean inverse Laplacian, the momentum potential
F1 = inv_lap(div(rho u)) and the Riesz-commutator field
u.grad(F1) - inv_lap(div div(rho u x u)).

Disc: the Neumann Green function

    N(x, y) = -(1/2pi) (log|x-y| + 1/2 log(|x|^2 |y|^2 - 2 x.y + 1))

(the second factor is | |x| y - x/|x| | written in its symmetric form, which
is also the correct x -> 0 limit), its pull-back N(phi(x), phi(y)) under
disc automorphisms, a direct Neumann solver (Fourier in theta, tridiagonal
in r), and the representation of G = (2mu+lambda) div u - (P - P_s) as a
volume integral of grad_y(N~).H plus boundary integrals.  N satisfies
Lap_y N(x, .) = -delta_x, so Green's identity gives, for any G solving
Lap G = div H with d G/dn = n.H + mu (n_perp.grad) omega,

    G(x) = int grad_y(N~).H dy + mu int_bnd N~ (n_perp.grad) omega dS
           - int_bnd G dN~/dn_y dS.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import GridDisc, GridTorus, ScalarField, VectorField, _derivs, rot
from .physics import FluidParams, State, flux_G, material_accel, rhs_disc

__all__ = [
    "CompatibilityError",
    "poisson_periodic",
    "laplacian_spectral",
    "f1_field",
    "commutator_field",
    "ConformalMap",
    "green_disc",
    "green_grad_y",
    "pullback_green",
    "pullback_grad_y",
    "NeumannProblem",
    "neumann_solve_disc",
    "build_neumann_problem",
    "effective_flux_source",
    "g_representation",
]


class CompatibilityError(ValueError):
    """Source and boundary data violate the Gauss solvability constraint."""


# ---------------------------------------------------------------------------
# periodic spectral solves


def _wavenumbers(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.fft.fftfreq(n) * n
    return 2.0 * np.pi * k[:, None], 2.0 * np.pi * k[None, :]


def poisson_periodic(s: ScalarField) -> ScalarField:
    """Zero-mean solution of Lap(w) = s on the torus (spectral).

    The input must have zero mean up to 1e-12 * max|s|; the zero Fourier
    mode of the output is set to zero.
    """
    grid = s.grid
    if not isinstance(grid, GridTorus):
        raise TypeError("poisson_periodic requires a torus field")
    sup = np.max(np.abs(s.values))
    mean = np.mean(s.values)
    if sup > 0 and abs(mean) > 1e-12 * sup:
        raise CompatibilityError(
            f"source mean {mean:.3e} exceeds 1e-12 of its sup norm {sup:.3e}"
        )
    k1, k2 = _wavenumbers(grid.n)
    denom = -(k1**2 + k2**2)
    denom[0, 0] = 1.0
    sp = np.fft.fft2(s.values) / denom
    sp[0, 0] = 0.0
    return ScalarField(grid, np.fft.ifft2(sp).real)


def laplacian_spectral(s: ScalarField) -> ScalarField:
    """Spectral Laplacian on the torus, the exact inverse of poisson_periodic."""
    grid = s.grid
    k1, k2 = _wavenumbers(grid.n)
    sp = np.fft.fft2(s.values) * (-(k1**2 + k2**2))
    return ScalarField(grid, np.fft.ifft2(sp).real)


def _div_arrays(grid, a1, a2):
    d1, _ = _derivs(a1, grid)
    _, d2 = _derivs(a2, grid)
    return d1 + d2


def f1_field(state: State) -> ScalarField:
    """Momentum potential inv_lap(div(rho u)) on the torus."""
    grid = state.grid
    if not isinstance(grid, GridTorus):
        raise TypeError("f1_field requires a torus state")
    rho = state.rho.values
    src = _div_arrays(grid, rho * state.u.c1, rho * state.u.c2)
    return poisson_periodic(ScalarField(grid, src))


def commutator_field(state: State) -> ScalarField:
    """Riesz commutator u.grad inv_lap div(rho u) - inv_lap div div(rho u x u).

    Evaluated in Fourier form through the spectral inverse Laplacian and the
    central-difference operators; the equivalent singular-integral form is
    kept as a test oracle only.
    """
    grid = state.grid
    if not isinstance(grid, GridTorus):
        raise TypeError("commutator_field requires a torus state")
    u1, u2 = state.u.c1, state.u.c2
    rho = state.rho.values
    w = f1_field(state)
    dw1, dw2 = _derivs(w.values, grid)
    term1 = u1 * dw1 + u2 * dw2

    a1 = _div_arrays(grid, rho * u1 * u1, rho * u2 * u1)
    a2 = _div_arrays(grid, rho * u1 * u2, rho * u2 * u2)
    divdiv = _div_arrays(grid, a1, a2)
    term2 = poisson_periodic(ScalarField(grid, divdiv))
    return ScalarField(grid, term1 - term2.values)


# ---------------------------------------------------------------------------
# disc Green function and conformal pull-back


@dataclass(frozen=True)
class ConformalMap:
    """Analytic automorphism of the unit disc, z -> e^{i phase}(z-a)/(1-conj(a)z)."""

    a: complex = 0j
    phase: float = 0.0

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise ValueError("Moebius parameter must satisfy |a| < 1")

    @property
    def kind(self) -> str:
        return "identity" if self.a == 0 and self.phase == 0.0 else "moebius"

    @staticmethod
    def _to_complex(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return p[..., 0] + 1j * p[..., 1]

    @staticmethod
    def _to_points(z: np.ndarray) -> np.ndarray:
        return np.stack([z.real, z.imag], axis=-1)

    def forward(self, p: np.ndarray) -> np.ndarray:
        z = self._to_complex(p)
        w = np.exp(1j * self.phase) * (z - self.a) / (1.0 - np.conj(self.a) * z)
        return self._to_points(w)

    def inverse(self, p: np.ndarray) -> np.ndarray:
        w = self._to_complex(p) * np.exp(-1j * self.phase)
        z = (self.a + w) / (1.0 + np.conj(self.a) * w)
        return self._to_points(z)

    def deriv(self, p: np.ndarray) -> np.ndarray:
        """Complex derivative phi'(z) at the given points."""
        z = self._to_complex(p)
        return np.exp(1j * self.phase) * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * z) ** 2


def _check_disc_points(p: np.ndarray, name: str):
    r2 = p[..., 0] ** 2 + p[..., 1] ** 2
    if np.any(r2 > 1.0 + 1e-10):
        raise ValueError(f"{name} outside the closed unit disc")


def green_disc(x, y) -> np.ndarray:
    """Neumann Green function of the unit disc (broadcasting over points).

    Symmetric in its arguments; harmonic in each away from the diagonal;
    its y-Laplacian is -delta_x, with the constant flux -1/(2pi) through
    the boundary.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_disc_points(x, "x")
    _check_disc_points(y, "y")
    dx = y - x
    d2 = dx[..., 0] ** 2 + dx[..., 1] ** 2
    if np.any(d2 == 0.0):
        raise ValueError("Green function is singular at coincident points")
    x2 = x[..., 0] ** 2 + x[..., 1] ** 2
    y2 = y[..., 0] ** 2 + y[..., 1] ** 2
    dot = x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1]
    img = x2 * y2 - 2.0 * dot + 1.0
    return -(np.log(d2) + np.log(img)) / (4.0 * np.pi)


def green_grad_y(x, y) -> np.ndarray:
    """Gradient of :func:`green_disc` in its second argument, shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = y - x
    d2 = dx[..., 0] ** 2 + dx[..., 1] ** 2
    if np.any(d2 == 0.0):
        raise ValueError("Green function is singular at coincident points")
    x2 = (x[..., 0] ** 2 + x[..., 1] ** 2)[..., None]
    dot = (x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1])[..., None]
    y2 = (y[..., 0] ** 2 + y[..., 1] ** 2)[..., None]
    img = x2 * y2 - 2.0 * dot + 1.0
    return -(dx / d2[..., None] + (x2 * y - x) / img) / (2.0 * np.pi)


def pullback_green(cmap: ConformalMap, x, y) -> np.ndarray:
    """Green function pulled back through the conformal map, N(phi(x), phi(y))."""
    return green_disc(cmap.forward(x), cmap.forward(y))


def pullback_grad_y(cmap: ConformalMap, x, y) -> np.ndarray:
    """y-gradient of the pulled-back Green function.

    For a holomorphic map the gradient transforms as conj(phi'(y)) acting on
    the mapped gradient viewed as a complex number.
    """
    y = np.asarray(y, dtype=float)
    g = green_grad_y(cmap.forward(x), cmap.forward(y))
    gz = g[..., 0] + 1j * g[..., 1]
    gz = np.conj(cmap.deriv(y)) * gz
    return np.stack([gz.real, gz.imag], axis=-1)


# ---------------------------------------------------------------------------
# Neumann solver on the disc


def _wall_trace(v: np.ndarray) -> np.ndarray:
    """Quadratic extrapolation of ring values to r = 1."""
    return (15.0 * v[-1] - 10.0 * v[-2] + 3.0 * v[-3]) / 8.0


def _dth_spectral_1d(v: np.ndarray) -> np.ndarray:
    sp = np.fft.rfft(v)
    m = np.arange(sp.size)
    sp *= 1j * m
    sp[-1] = 0.0
    return np.fft.irfft(sp, n=v.size)


@dataclass(frozen=True)
class NeumannProblem:
    """div-form Neumann problem on the disc: Lap(G) = div H, dG/dn = g.

    ``gap`` stores the measured violation of the Gauss constraint
    int(div H) = int_bnd(g) as evaluated by grid quadrature.
    """

    H: VectorField
    g: np.ndarray = dc_field(repr=False)
    gap: float = dc_field(init=False, default=0.0)

    def __post_init__(self):
        grid = self.H.grid
        if not isinstance(grid, GridDisc):
            raise TypeError("NeumannProblem lives on the disc")
        g = np.asarray(self.g, dtype=float)
        if g.shape != (grid.n_th,):
            raise ValueError(f"boundary data must have shape ({grid.n_th},)")
        object.__setattr__(self, "g", g)
        vol = float(np.sum(_solver_rhs(self.H) * grid.cell_weights))
        bnd = float(np.sum(g) * grid.dth)
        object.__setattr__(self, "gap", vol - bnd)


def _solver_rhs(H: VectorField) -> np.ndarray:
    """div H in the flux form matched to the tridiagonal operator.

    Radial part: face-averaged flux divergence whose wall face is the
    quadratically extrapolated trace of H_r, so that the discrete volume sum
    telescopes exactly to the discrete boundary flux.  Angular part:
    spectral, with exactly zero ring sums.
    """
    grid = H.grid
    n_r, n_th = grid.shape
    th = grid.theta
    hr = H.c1 * np.cos(th) + H.c2 * np.sin(th)
    ht = -H.c1 * np.sin(th) + H.c2 * np.cos(th)

    r_faces = (np.arange(1, n_r) * grid.dr)[:, None]
    rf = np.zeros((n_r + 1, n_th))
    rf[1:n_r] = r_faces * 0.5 * (hr[:-1] + hr[1:])
    rf[n_r] = _wall_trace(hr)  # r = 1
    radial = (rf[1:] - rf[:-1]) / (grid.r * grid.dr)

    sp = np.fft.rfft(ht, axis=1)
    m = np.arange(sp.shape[1])
    sp *= 1j * m
    sp[:, -1] = 0.0
    angular = np.fft.irfft(sp, n=n_th, axis=1) / grid.r
    return radial + angular


def build_neumann_problem(state: State, params: FluidParams, rho_s: ScalarField) -> NeumannProblem:
    """Assemble the problem the effective viscous flux solves.

    H = rho*u_dot - (rho - rho_s)*grad(f); the boundary data is the wall
    trace of n.H plus mu times the tangential derivative of the vorticity
    trace.  Assembled this way the discrete Gauss gap is at roundoff level.
    """
    grid = state.grid
    H = effective_flux_source(state, params, rho_s)
    th = grid.theta
    hr = H.c1 * np.cos(th) + H.c2 * np.sin(th)
    omega_b = _wall_trace(rot(state.u).values)
    # (n_perp . grad) omega = -d omega/d theta at r = 1
    g = _wall_trace(hr) - params.mu * _dth_spectral_1d(omega_b)
    return NeumannProblem(H, g)


def effective_flux_source(state: State, params: FluidParams, rho_s: ScalarField) -> VectorField:
    """H = rho*u_dot - (rho - rho_s)*grad(f), with u_dot from the tendencies."""
    grid = state.grid
    acc = material_accel(state, rhs_disc(state, params))
    h1 = state.rho.values * acc.c1
    h2 = state.rho.values * acc.c2
    gf = params.force_gradient(grid)
    if gf is not None:
        drho = state.rho.values - rho_s.values
        h1 = h1 - drho * gf[0]
        h2 = h2 - drho * gf[1]
    return VectorField(grid, h1, h2)


def neumann_solve_disc(problem: NeumannProblem, rel_tol: float = 1e-6) -> ScalarField:
    """Direct Neumann solve: Fourier transform in theta, tridiagonal in r.

    The mean Fourier mode is singular; its data is made exactly consistent
    by shifting the boundary values by a constant, provided the discrete
    Gauss gap does not exceed ``rel_tol`` relative to the data scale.  The
    result is normalized to zero mean over the disc.
    """
    from scipy.linalg import solve_banded

    grid = problem.H.grid
    n_r, n_th = grid.shape
    dr = grid.dr
    r = grid.r[:, 0]
    r_lo = np.arange(n_r) * dr        # inner face radii, r_{-1/2} = 0
    r_hi = np.arange(1, n_r + 1) * dr  # outer face radii

    rhs = _solver_rhs(problem.H)
    spec_rhs = np.fft.rfft(rhs, axis=1)
    spec_g = np.fft.rfft(problem.g)

    # discrete Gauss constraint of the mean mode (row sum with weights r_i dr)
    gap = dr * float(np.sum(r * spec_rhs[:, 0].real)) - float(spec_g[0].real)
    scale = max(np.max(np.abs(problem.g)), dr * np.max(np.abs(r * rhs.T)), 1e-300)
    if abs(gap) > rel_tol * scale * n_th:
        raise CompatibilityError(
            f"Neumann data gap {gap / n_th:.3e} exceeds {rel_tol:.1e} x scale {scale:.3e}"
        )
    spec_g = spec_g.copy()
    spec_g[0] += gap

    n_modes = spec_rhs.shape[1]
    spec_sol = np.empty((n_r, n_modes), dtype=complex)
    lower = r_lo / (r * dr * dr)
    upper = r_hi / (r * dr * dr)
    for m in range(n_modes):
        diag = -(r_lo + r_hi) / (r * dr * dr) - (m * m) / (r * r)
        b = spec_rhs[:, m].copy()
        # Neumann face at r = 1 moves the data to the right-hand side
        diag[-1] = -r_lo[-1] / (r[-1] * dr * dr) - (m * m) / (r[-1] * r[-1])
        b[-1] -= spec_g[m] / (r[-1] * dr)
        ab = np.zeros((3, n_r), dtype=complex)
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        if m == 0:
            # singular mode: pin the innermost value, consistency is exact
            ab[0, 1] = 0.0
            ab[1, 0] = 1.0
            b[0] = 0.0
        spec_sol[:, m] = solve_banded((1, 1), ab, b)

    sol = np.fft.irfft(spec_sol, n=n_th, axis=1)
    sol -= np.sum(sol * grid.cell_weights) / np.pi
    return ScalarField(grid, sol)


# ---------------------------------------------------------------------------
# pointwise representation of the effective viscous flux


def g_representation(
    state: State,
    params: FluidParams,
    rho_s: ScalarField,
    x,
    cmap: ConformalMap = ConformalMap(),
) -> np.ndarray:
    """Evaluate the Green-function representation of the effective viscous
    flux at interior point(s) ``x``.

    The volume integral is singularity-subtracted: the integrand pairs
    grad_y(N~) with H(y) - H(x), and the removed H(x) term is restored
    through the boundary integral of N~ n dS (exact divergence identity).
    The cell containing the singular point contributes nothing at this
    order.  Boundary integrals use the trapezoid rule in theta with wall
    traces of G and the vorticity extrapolated from the state.
    """
    grid = state.grid
    if not isinstance(grid, GridDisc):
        raise TypeError("g_representation requires a disc state")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    rad = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(rad > 1.0 - 2.0 * grid.dr):
        raise ValueError("representation points must be at least 2 dr from the boundary")

    H = effective_flux_source(state, params, rho_s)
    omega = rot(state.u).values
    G = flux_G(state, params, rho_s).values

    xg, yg = grid.xy()
    nodes = np.stack([xg, yg], axis=-1)          # (n_r, n_th, 2)
    Hvals = np.stack([H.c1, H.c2], axis=-1)      # (n_r, n_th, 2)
    w = np.broadcast_to(grid.cell_weights, grid.shape)

    th_b = grid.theta[0]
    bpts = np.stack([np.cos(th_b), np.sin(th_b)], axis=-1)  # (n_th, 2)
    normals = bpts
    G_b = _wall_trace(G)
    omega_b = _wall_trace(omega)
    tang_omega = -_dth_spectral_1d(omega_b)  # (n_perp.grad) omega at r = 1
    ds = grid.dth

    out = np.empty(pts.shape[0])
    for k, xp in enumerate(pts):
        gy = pullback_grad_y(cmap, xp, nodes)    # (n_r, n_th, 2)
        diff = Hvals - interpolate_vec(H, xp)
        integrand = gy[..., 0] * diff[..., 0] + gy[..., 1] * diff[..., 1]
        # zero out the cell containing the singular point
        i_c, j_c = _containing_cell(grid, xp)
        integrand[i_c, j_c] = 0.0
        vol = np.sum(integrand * w)

        n_green = pullback_green(cmap, xp, bpts)
        hx = interpolate_vec(H, xp)
        vol += np.sum(n_green * (normals[:, 0] * hx[0] + normals[:, 1] * hx[1])) * ds

        gb_y = pullback_grad_y(cmap, xp, bpts)
        dndn = gb_y[:, 0] * normals[:, 0] + gb_y[:, 1] * normals[:, 1]
        bnd = params.mu * np.sum(n_green * tang_omega) * ds - np.sum(G_b * dndn) * ds
        out[k] = vol + bnd
    return out if np.asarray(x).ndim > 1 else out[0]


def interpolate_vec(v: VectorField, xp: np.ndarray) -> np.ndarray:
    from .fields import interp

    return interp(v, xp)


def _containing_cell(grid: GridDisc, xp: np.ndarray) -> tuple[int, int]:
    r = float(np.hypot(xp[0], xp[1]))
    th = float(np.mod(np.arctan2(xp[1], xp[0]), 2.0 * np.pi))
    i = min(int(r / grid.dr), grid.n_r - 1)
    j = int(np.floor(th / grid.dth + 0.5)) % grid.n_th
    return i, j
