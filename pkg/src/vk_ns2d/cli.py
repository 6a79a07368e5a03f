"""Command-line entry points: run, steady, green-check, oracle, fit.

Configuration is one JSON document validated against a strict schema
(unknown keys rejected, physical constraints checked) before any
computation.  Every run writes diag.csv, optional snapshots/plots, and a
manifest echoing the exact configuration, code version and seed, from
which the run is reproducible.

Exit codes: 0 success, 2 validation failure, 3 numerical abort (the last
good state is written next to the outputs).
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import click

from . import __version__

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["params", "grid", "run"],
    "properties": {
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mu", "beta", "gamma"],
            "properties": {
                "mu": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "gamma": {"type": "number", "exclusiveMinimum": 1},
                "force": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {
                        "preset": {"type": "string"},
                        "amplitude": {"type": "number"},
                    },
                },
                "K": {
                    "oneOf": [
                        {"type": "number", "minimum": 0},
                        {"type": "array", "items": {"type": "number", "minimum": 0}},
                    ]
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["torus", "disc"]},
                "n": {"type": "integer", "minimum": 8},
                "n_r": {"type": "integer", "minimum": 4},
                "n_th": {"type": "integer", "minimum": 8},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_end"],
            "properties": {
                "t_end": {"type": "number", "minimum": 0},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "snapshot_every": {"type": "number", "exclusiveMinimum": 0},
                "diag_every": {"type": "number", "exclusiveMinimum": 0},
                "ic_preset": {"type": "string"},
                "ic_amplitude": {"type": "number"},
                "ic_snapshot": {"type": ["string", "null"]},
                "seed": {"type": "integer"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "csv": {"type": "string"},
                "snapshots": {"type": "boolean"},
                "plots": {"type": "boolean"},
            },
        },
        "allow_outside_theory": {"type": "boolean"},
    },
}

# The decay theory covers beta > 4/3 (gamma > 1 is structural); smaller
# exponents run only with an explicit opt-out flag.
BETA_THEORY_MIN = 4.0 / 3.0


class ConfigError(ValueError):
    pass


def _apply_thread_cap() -> None:
    cap = os.environ.get("VK_NS2D_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)
    try:
        import numba

        numba.set_num_threads(max(1, int(cap)))
    except (ImportError, ValueError):
        pass


def validate_config(doc: dict) -> dict:
    import jsonschema

    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {path}: {err.message}") from None
    kind = doc["grid"]["kind"]
    if kind == "torus" and "n" not in doc["grid"]:
        raise ConfigError("config field grid.n: required for torus grids")
    if kind == "disc" and not {"n_r", "n_th"} <= doc["grid"].keys():
        raise ConfigError("config field grid.n_r/n_th: required for disc grids")
    beta = doc["params"]["beta"]
    if beta <= BETA_THEORY_MIN and not doc.get("allow_outside_theory", False):
        raise ConfigError(
            f"config field params.beta: {beta} is outside the supported range "
            f"(> {BETA_THEORY_MIN:.4g}); set allow_outside_theory to override"
        )
    return doc


def build_scenario(doc: dict):
    """Turn a validated config document into (RunConfig, FluidParams)."""
    from .integrate import RunConfig
    from .physics import FluidParams
    from .presets import force_field

    grid_doc = doc["grid"]
    run_doc = dict(doc["run"])
    kw = {
        "t_end": run_doc.pop("t_end"),
        "domain": grid_doc["kind"],
    }
    if grid_doc["kind"] == "torus":
        kw["n"] = grid_doc["n"]
    else:
        kw["n_r"] = grid_doc["n_r"]
        kw["n_th"] = grid_doc["n_th"]
    kw.update(run_doc)
    config = RunConfig(**kw)

    p = doc["params"]
    force = p.get("force")
    f = None
    if force is not None:
        f = force_field(force["preset"], force.get("amplitude", 0.1), config.grid())
    import numpy as np

    K = p.get("K", 0.0)
    params = FluidParams(
        mu=p["mu"], beta=p["beta"], gamma=p["gamma"], f=f,
        K=np.asarray(K, dtype=float) if isinstance(K, list) else float(K),
    )
    return config, params


def _load_scenario(config_path, preset, seed):
    from . import presets as presets_mod

    if (config_path is None) == (preset is None):
        raise ConfigError("exactly one of --config or --preset is required")
    if preset is not None:
        if preset not in presets_mod.SCENARIOS:
            raise ConfigError(
                f"unknown preset {preset!r}; choose from {', '.join(presets_mod.SCENARIOS)}"
            )
        config, params = presets_mod.scenario(preset)
        doc = {"preset": preset}
    else:
        doc = json.loads(Path(config_path).read_text())
        validate_config(doc)
        config, params = build_scenario(doc)
    if seed is not None:
        config = replace(config, seed=seed)
    return config, params, doc


def _write_manifest(out: Path, config, params, doc) -> None:
    manifest = {
        "config": doc,
        "resolved_run": asdict(config),
        "params": {
            "mu": params.mu,
            "beta": params.beta,
            "gamma": params.gamma,
            "has_force": params.f is not None,
        },
        "version": __version__,
        "seed": config.seed,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _emit_plots(out: Path, csv_path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .diagnostics import read_csv

    data = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in ("rho_dev_l2", "gradu_l2"):
        vals = data[col]
        pos = vals > 0
        ax.semilogy(data["t"][pos], vals[pos], label=col)
    ax.set_xlabel("t")
    ax.legend()
    ax.set_title("decay of the deviation norms")
    fig.tight_layout()
    fig.savefig(out / "decay.png", dpi=120)
    plt.close(fig)


@click.group()
def main():
    """2D compressible flow solver with density-power bulk viscosity."""
    _apply_thread_cap()


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--preset", type=str, default=None, help="named scenario")
@click.option("--out", "out_dir", type=click.Path(), default="out")
@click.option("--seed", type=int, default=None)
def cmd_run(config_path, preset, out_dir, seed):
    """Integrate a scenario; write diag.csv, snapshots and a manifest."""
    from .diagnostics import write_csv
    from .integrate import RunAborted, run
    from .snapshots import save_state

    try:
        config, params, doc = _load_scenario(config_path, preset, seed)
    except (ConfigError, json.JSONDecodeError, ValueError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(out, config, params, doc)
    wants_snapshots = doc.get("output", {}).get("snapshots", True) if isinstance(doc, dict) else True
    wants_plots = doc.get("output", {}).get("plots", False) if isinstance(doc, dict) else False
    csv_name = doc.get("output", {}).get("csv", "diag.csv") if isinstance(doc, dict) else "diag.csv"

    try:
        result = run(config, params)
    except RunAborted as err:
        save_state(out / "abort_last_good", err.state)
        write_csv(out / csv_name, err.records)
        click.echo(f"aborted: {err}; last good state in {out / 'abort_last_good'}", err=True)
        sys.exit(3)

    write_csv(out / csv_name, result.records)
    if wants_snapshots:
        for st in result.snapshots:
            save_state(out / f"snap_t{st.t:.6f}", st)
    if wants_plots:
        _emit_plots(out, out / csv_name)
    click.echo(f"done: t={result.final_state.t:g}, {len(result.records)} diagnostic rows -> {out}")


@main.command("steady")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--preset", type=str, default=None)
@click.option("--mass", type=float, default=None, help="total mass (default: area)")
def cmd_steady(config_path, preset, mass):
    """Solve the equilibrium density; print C0, the mass and the residual."""
    import numpy as np

    from .fields import GridTorus, ScalarField, integral
    from .steady import AdmissibilityError, solve_steady, steady_residual

    try:
        config, params, _ = _load_scenario(config_path, preset, None)
    except (ConfigError, json.JSONDecodeError, ValueError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    grid = config.grid()
    area = 1.0 if isinstance(grid, GridTorus) else float(np.pi)
    total_mass = mass if mass is not None else area
    f = params.f if params.f is not None else ScalarField.full(grid, 0.0)
    try:
        ss = solve_steady(f, total_mass, params.gamma)
    except AdmissibilityError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    res = steady_residual(ss, f, params.gamma)
    click.echo(json.dumps({
        "C0": ss.C0,
        "total_mass": total_mass,
        "mass_error": integral(ss.rho_s) - total_mass,
        "residual_sup": res,
    }, indent=2))


@main.command("green-check")
@click.option("--levels", default="32,64", help="comma-separated n_r refinement levels")
@click.option("--points", default=12, type=int, help="random interior sample points")
@click.option("--seed", default=0, type=int)
@click.option("--mobius", is_flag=True, help="use a Moebius pull-back instead of the identity")
def cmd_green_check(levels, points, seed, mobius):
    """Compare the Green representation of the viscous flux with its direct value."""
    import numpy as np

    from .elliptic import ConformalMap, g_representation
    from .fields import interp
    from .physics import flux_G
    from .presets import manufactured_green_state

    cmap = ConformalMap(a=0.3 + 0.2j, phase=0.5) if mobius else ConformalMap()
    rows = []
    for n_r in [int(s) for s in levels.split(",")]:
        state, params, rho_s = manufactured_green_state(n_r, 2 * n_r)
        rng = np.random.default_rng(seed)
        angles = rng.uniform(0, 2 * np.pi, points)
        radii = rng.uniform(0.1, 0.7, points)
        pts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)
        direct = interp(flux_G(state, params, rho_s), pts)
        rep = g_representation(state, params, rho_s, pts, cmap)
        sup_g = float(np.max(np.abs(flux_G(state, params, rho_s).values)))
        err = float(np.max(np.abs(rep - direct))) / sup_g
        rows.append((n_r, err))
        click.echo(f"n_r={n_r:4d}  max relative error {err:.3e}")
    for (n0, e0), (n1, e1) in zip(rows, rows[1:]):
        order = np.log2(e0 / e1) / np.log2(n1 / n0)
        click.echo(f"observed order {n0}->{n1}: {order:.2f}")


@main.command("oracle")
@click.argument("name", type=click.Choice(["poincare", "divcurl", "divcurl-weighted", "zlotnik"]))
@click.option("--samples", default=100, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--p", "p_value", default=4.0, type=float, help="norm index (poincare/divcurl)")
@click.option("--nu", default=0.1, type=float, help="weight exponent (divcurl-weighted)")
@click.option("--out", "out_path", type=click.Path(), default=None, help="write the JSON report here")
def cmd_oracle(name, samples, seed, p_value, nu, out_path):
    """Run one inequality oracle and print its JSON report."""
    from . import oracles

    try:
        if name == "poincare":
            report = oracles.check_poincare_sobolev(samples, p_value, seed)
        elif name == "divcurl":
            report = oracles.check_divcurl(samples, p_value, seed)
        elif name == "divcurl-weighted":
            report = oracles.check_divcurl_weighted(samples, nu, seed)
        else:
            cases = [
                oracles.zlotnik_check(lambda y: -y, 0.0, 0.0, 2.0, 10.0),
                oracles.zlotnik_check(lambda y: 1.0 - y, 0.0, 0.0, 0.5, 10.0),
                oracles.zlotnik_check(
                    lambda y: -y**3 + y, 0.1, 0.2, 1.0, 30.0,
                    dh_dt=lambda t: 0.1 * __import__("numpy").cos(t),
                ),
            ]
            doc = {"name": "zlotnik", "cases_passed": cases, "passed": all(cases)}
            text = json.dumps(doc, indent=2)
            click.echo(text)
            if out_path:
                Path(out_path).write_text(text + "\n")
            sys.exit(0 if all(cases) else 1)
    except oracles.CalibrationError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    text = json.dumps(report.to_json(), indent=2)
    click.echo(text)
    if out_path:
        Path(out_path).write_text(text + "\n")
    sys.exit(0 if report.passed else 1)


@main.command("fit")
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--column", default="rho_dev_l2")
@click.option("--window", nargs=2, type=float, default=(1.0, -1.0),
              help="t_lo t_hi; a negative t_hi means the end of the series")
def cmd_fit(csv_path, column, window):
    """Fit an exponential decay rate to one diagnostic column."""
    from .diagnostics import FitError, decay_fit, read_csv

    data = read_csv(csv_path)
    if column not in data:
        click.echo(f"error: column {column!r} not in {csv_path}", err=True)
        sys.exit(2)
    t_lo, t_hi = window
    if t_hi < 0:
        t_hi = float(data["t"][-1])
    try:
        fit = decay_fit(data["t"], data[column], (t_lo, t_hi))
    except FitError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    click.echo(json.dumps({
        "column": column,
        "xi": fit.xi,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "n_points": fit.n_points,
    }, indent=2))


if __name__ == "__main__":
    main()
