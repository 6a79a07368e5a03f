"""Field snapshot files: raw little-endian float64 plus a JSON sidecar.

A field named ``rho`` under prefix ``out/run_t2.5`` becomes

    out/run_t2.5.rho.dat    flat 64-bit little-endian floats, row-major
                            (torus: y varies fastest; disc: theta varies
                            fastest within each radius)
    out/run_t2.5.rho.json   {"grid": ..., "dims": ..., "time": ..., "name": ...}

A full state is the triple rho, u1, u2 under one prefix.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import GridDisc, GridTorus, ScalarField, VectorField
from .physics import State

__all__ = ["save_field", "load_field", "save_state", "load_state"]


def _grid_header(grid) -> dict:
    if isinstance(grid, GridTorus):
        return {"grid": "torus", "dims": [grid.n, grid.n]}
    return {"grid": "disc", "dims": [grid.n_r, grid.n_th]}


def _grid_from_header(header: dict):
    dims = header["dims"]
    if header["grid"] == "torus":
        if dims[0] != dims[1]:
            raise ValueError("torus snapshot must be square")
        return GridTorus(dims[0])
    if header["grid"] == "disc":
        return GridDisc(dims[0], dims[1])
    raise ValueError(f"unknown grid kind {header['grid']!r}")


def save_field(prefix, values: np.ndarray, grid, name: str, time: float) -> None:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(values, dtype="<f8").tofile(f"{prefix}.{name}.dat")
    header = _grid_header(grid) | {"time": float(time), "name": name}
    Path(f"{prefix}.{name}.json").write_text(json.dumps(header) + "\n")


def load_field(prefix, name: str):
    """Returns (values, grid, time)."""
    header = json.loads(Path(f"{prefix}.{name}.json").read_text())
    grid = _grid_from_header(header)
    values = np.fromfile(f"{prefix}.{name}.dat", dtype="<f8").reshape(grid.shape)
    return values.astype(float), grid, float(header["time"])


def save_state(prefix, state: State) -> None:
    grid = state.grid
    save_field(prefix, state.rho.values, grid, "rho", state.t)
    save_field(prefix, state.u.c1, grid, "u1", state.t)
    save_field(prefix, state.u.c2, grid, "u2", state.t)


def load_state(prefix) -> State:
    rho, grid, t = load_field(prefix, "rho")
    u1, _, _ = load_field(prefix, "u1")
    u2, _, _ = load_field(prefix, "u2")
    return State(ScalarField(grid, rho), VectorField(grid, u1, u2), t)
