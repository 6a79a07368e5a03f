"""Grids, fields, discrete differential operators, quadrature and norms.

Two structured grids are supported:

* ``GridTorus``: the periodic unit square, n x n nodes, spacing h = 1/n.
  Arrays are indexed ``[i, j]`` with x = i*h along axis 0 and y = j*h along
  axis 1 (y varies fastest in memory).
* ``GridDisc``: the unit disc in cell-centered polar coordinates,
  r_i = (i+1/2)*dr and theta_j = j*dth.  Arrays are indexed ``[i, j]`` with
  radius along axis 0 and angle along axis 1 (theta varies fastest).  There
  is no node at r = 0; stencils reaching below the innermost ring use the
  antipodal cell (theta + pi).

All derivative operators are second-order central stencils; the disc uses
one-sided second-order closures at the outer ring.  Vector fields store
Cartesian components on both grids, which keeps them smooth across the
polar axis.  The sign conventions are

    rot(u)       = d2 u1 - d1 u2
    perp_grad(s) = (d2 s, -d1 s)

so that laplacian(u) = grad(div u) + perp_grad(rot u) for smooth fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

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
]


class OutOfDomainError(ValueError):
    """A query point lies outside the closed domain."""


@dataclass(frozen=True)
class GridTorus:
    """Periodic unit square with n cells per axis."""

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"torus grid needs n >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian node coordinates as broadcastable (n,1) and (1,n) arrays."""
        c = np.arange(self.n) * self.h
        return c[:, None], c[None, :]

    @property
    def cell_weight(self) -> float:
        return self.h * self.h


@dataclass(frozen=True)
class GridDisc:
    """Unit disc, cell-centered in r, periodic in theta.

    ``n_th`` must be even so the antipodal cell across the pole is a grid
    node.
    """

    n_r: int
    n_th: int

    def __post_init__(self):
        if self.n_r < 4:
            raise ValueError(f"disc grid needs n_r >= 4, got {self.n_r}")
        if self.n_th < 8 or self.n_th % 2:
            raise ValueError(f"disc grid needs even n_th >= 8, got {self.n_th}")

    @property
    def dr(self) -> float:
        return 1.0 / self.n_r

    @property
    def dth(self) -> float:
        return 2.0 * np.pi / self.n_th

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_th)

    @property
    def r(self) -> np.ndarray:
        """Cell-center radii, shape (n_r, 1)."""
        return ((np.arange(self.n_r) + 0.5) * self.dr)[:, None]

    @property
    def theta(self) -> np.ndarray:
        """Cell-center angles, shape (1, n_th)."""
        return (np.arange(self.n_th) * self.dth)[None, :]

    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian node coordinates, both shaped (n_r, n_th)."""
        r, th = self.r, self.theta
        return r * np.cos(th), r * np.sin(th)

    @property
    def cell_weights(self) -> np.ndarray:
        """Quadrature weights r_i*dr*dth, shape (n_r, 1)."""
        return self.r * self.dr * self.dth


Grid = GridTorus | GridDisc


def _check_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, self.grid))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def sample(cls, grid: Grid, fn) -> "ScalarField":
        """Sample ``fn(x, y)`` (Cartesian coordinates) at the grid nodes."""
        x, y = grid.xy()
        return cls(grid, np.broadcast_to(fn(x, y), grid.shape).copy())


@dataclass(frozen=True)
class VectorField:
    """Two Cartesian components on a common grid."""

    grid: Grid
    c1: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "c1", _check_values(self.c1, self.grid))
        object.__setattr__(self, "c2", _check_values(self.c2, self.grid))

    @classmethod
    def zero(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    @classmethod
    def sample(cls, grid: Grid, fn1, fn2) -> "VectorField":
        x, y = grid.xy()
        return cls(
            grid,
            np.broadcast_to(fn1(x, y), grid.shape).copy(),
            np.broadcast_to(fn2(x, y), grid.shape).copy(),
        )

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.c1, self.c2)


# ---------------------------------------------------------------------------
# torus stencils


def _d1_torus(v: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * h)


def _d2_torus(v: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * h)


def _lap_torus(v: np.ndarray, h: float) -> np.ndarray:
    return (
        np.roll(v, -1, axis=0)
        + np.roll(v, 1, axis=0)
        + np.roll(v, -1, axis=1)
        + np.roll(v, 1, axis=1)
        - 4.0 * v
    ) / (h * h)


# ---------------------------------------------------------------------------
# disc stencils
#
# Radial stencils act on an array padded to (n_r + 2, n_th): the inner pad
# row is the antipodal cell of ring 0 and the outer pad row is a ghost ring.
# The default ghost is quadratic extrapolation, which makes the centered
# radial difference at the outer ring identical to the second-order
# one-sided stencil.  Angular derivatives are spectral: theta is periodic,
# and trigonometric factors (rigid rotation, low harmonics) must
# differentiate exactly.


def _extrapolated_ghost(v: np.ndarray) -> np.ndarray:
    return 3.0 * v[-1] - 3.0 * v[-2] + v[-3]


def _pad_radial(v: np.ndarray, grid: GridDisc, ghost: np.ndarray | None = None) -> np.ndarray:
    if ghost is None:
        ghost = _extrapolated_ghost(v)
    inner = np.roll(v[0], grid.n_th // 2)
    return np.concatenate([inner[None, :], v, ghost[None, :]], axis=0)


def _dr_disc(v: np.ndarray, grid: GridDisc, ghost: np.ndarray | None = None) -> np.ndarray:
    p = _pad_radial(v, grid, ghost)
    return (p[2:] - p[:-2]) / (2.0 * grid.dr)


def _dth_disc(v: np.ndarray, grid: GridDisc) -> np.ndarray:
    sp = np.fft.rfft(v, axis=1)
    m = np.arange(sp.shape[1])
    sp *= 1j * m
    sp[:, -1] = 0.0  # odd derivative of the unpaired Nyquist mode
    return np.fft.irfft(sp, n=grid.n_th, axis=1)


def _d1_disc(v, grid: GridDisc, ghost=None):
    r, th = grid.r, grid.theta
    return np.cos(th) * _dr_disc(v, grid, ghost) - np.sin(th) / r * _dth_disc(v, grid)


def _d2_disc(v, grid: GridDisc, ghost=None):
    r, th = grid.r, grid.theta
    return np.sin(th) * _dr_disc(v, grid, ghost) + np.cos(th) / r * _dth_disc(v, grid)


def _lap_disc(v: np.ndarray, grid: GridDisc, ghost: np.ndarray | None = None) -> np.ndarray:
    """Conservative polar Laplacian; the r=0 face carries no flux."""
    p = _pad_radial(v, grid, ghost)
    r = grid.r
    dr = grid.dr
    r_out = r + 0.5 * dr
    r_in = np.maximum(r - 0.5 * dr, 0.0)  # exactly 0 at the pole ring
    radial = (r_out * (p[2:] - p[1:-1]) - r_in * (p[1:-1] - p[:-2])) / (r * dr * dr)
    sp = np.fft.rfft(v, axis=1)
    sp *= -np.arange(sp.shape[1]) ** 2
    angular = np.fft.irfft(sp, n=grid.n_th, axis=1) / (r * r)
    return radial + angular


def _derivs(field_values: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(grid, GridTorus):
        return _d1_torus(field_values, grid.h), _d2_torus(field_values, grid.h)
    return _d1_disc(field_values, grid), _d2_disc(field_values, grid)


# ---------------------------------------------------------------------------
# public operators


def grad(s: ScalarField) -> VectorField:
    """Gradient (d1 s, d2 s)."""
    d1, d2 = _derivs(s.values, s.grid)
    return VectorField(s.grid, d1, d2)


def div(v: VectorField) -> ScalarField:
    d1, _ = _derivs(v.c1, v.grid)
    _, d2 = _derivs(v.c2, v.grid)
    return ScalarField(v.grid, d1 + d2)


def rot(v: VectorField) -> ScalarField:
    """Scalar rotation d2 v1 - d1 v2 (negative of the conventional curl)."""
    _, d2 = _derivs(v.c1, v.grid)
    d1, _ = _derivs(v.c2, v.grid)
    return ScalarField(v.grid, d2 - d1)


def perp_grad(s: ScalarField) -> VectorField:
    """Rotated gradient (d2 s, -d1 s)."""
    d1, d2 = _derivs(s.values, s.grid)
    return VectorField(s.grid, d2, -d1)


def laplacian(v: ScalarField | VectorField) -> ScalarField | VectorField:
    grid = v.grid
    if isinstance(grid, GridTorus):
        lap = lambda a: _lap_torus(a, grid.h)  # noqa: E731
    else:
        lap = lambda a: _lap_disc(a, grid)  # noqa: E731
    if isinstance(v, ScalarField):
        return ScalarField(grid, lap(v.values))
    return VectorField(grid, lap(v.c1), lap(v.c2))


def integral(s: ScalarField) -> float:
    """Grid quadrature of the field over its domain.

    Uniform weights h^2 on the torus (the trapezoid rule, which is exact for
    trigonometric polynomials below the Nyquist mode); midpoint weights
    r*dr*dth on the disc (exact for functions constant in r ... r^1 moments,
    in particular the disc area).  numpy's pairwise summation keeps the
    reduction deterministic run to run.
    """
    grid = s.grid
    if isinstance(grid, GridTorus):
        return float(np.sum(s.values) * grid.cell_weight)
    return float(np.sum(s.values * grid.cell_weights))


def lp_norm(s: ScalarField, p: float) -> float:
    """L^p norm with the same quadrature as :func:`integral`; p >= 1 or inf."""
    if p != np.inf and p < 1:
        raise ValueError(f"lp_norm needs p >= 1 or p = inf, got {p}")
    if p == np.inf:
        return float(np.max(np.abs(s.values)))
    a = np.abs(s.values) ** p
    return float(integral(ScalarField(s.grid, a)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# interpolation


def _interp_torus(values: np.ndarray, grid: GridTorus, pts: np.ndarray) -> np.ndarray:
    n, h = grid.n, grid.h
    gx = pts[..., 0] / h
    gy = pts[..., 1] / h
    i0 = np.floor(gx).astype(int)
    j0 = np.floor(gy).astype(int)
    fx = gx - i0
    fy = gy - j0
    i0 %= n
    j0 %= n
    i1 = (i0 + 1) % n
    j1 = (j0 + 1) % n
    return (
        values[i0, j0] * (1 - fx) * (1 - fy)
        + values[i1, j0] * fx * (1 - fy)
        + values[i0, j1] * (1 - fx) * fy
        + values[i1, j1] * fx * fy
    )


def _interp_disc(values: np.ndarray, grid: GridDisc, pts: np.ndarray) -> np.ndarray:
    n_r, n_th = grid.n_r, grid.n_th
    x, y = pts[..., 0], pts[..., 1]
    r = np.hypot(x, y)
    if np.any(r > 1.0 + 1e-12):
        raise OutOfDomainError("interpolation point outside the closed unit disc")
    th = np.mod(np.arctan2(y, x), 2.0 * np.pi)

    gt = th / grid.dth
    j0 = np.floor(gt).astype(int) % n_th
    ft = gt - np.floor(gt)
    j1 = (j0 + 1) % n_th

    # Signed radial index; ring i sits at gr = i.  gr in [-1, 0) falls in the
    # pole region and is resolved along the diameter through the antipode.
    gr = r / grid.dr - 0.5
    i0 = np.floor(gr).astype(int)
    i0 = np.clip(i0, -1, n_r - 2)  # allow linear extrapolation in the outer half-cell
    fr = gr - i0

    ja0 = (j0 + n_th // 2) % n_th
    ja1 = (j1 + n_th // 2) % n_th
    inner_is_antipode = i0 < 0
    il = np.where(inner_is_antipode, 0, i0)
    jl0 = np.where(inner_is_antipode, ja0, j0)
    jl1 = np.where(inner_is_antipode, ja1, j1)
    iu = il + np.where(inner_is_antipode, 0, 1)

    lo = values[il, jl0] * (1 - ft) + values[il, jl1] * ft
    hi = values[iu, j0] * (1 - ft) + values[iu, j1] * ft
    return lo * (1 - fr) + hi * fr


def interp(v: ScalarField | VectorField, x) -> np.ndarray:
    """Bilinear interpolation at Cartesian point(s) ``x`` of shape (..., 2).

    Wraps periodically on the torus; on the disc interpolates in (r, theta)
    and raises :class:`OutOfDomainError` outside the closed disc.  Vector
    fields return shape (..., 2).
    """
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError("points must have shape (..., 2)")
    grid = v.grid
    fn = _interp_torus if isinstance(grid, GridTorus) else _interp_disc
    if isinstance(v, ScalarField):
        return fn(v.values, grid, pts)
    return np.stack([fn(v.c1, grid, pts), fn(v.c2, grid, pts)], axis=-1)
