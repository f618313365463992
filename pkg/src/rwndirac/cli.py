"""Command-line interface: config ingestion, sweep orchestration, and
CSV/JSON emission.

Every command reads one JSON config, echoes it (with defaults resolved)
into a provenance envelope, runs its sweep, and writes

    <out>/<command>.csv            deterministic rows, 17 significant digits
    <out>/<command>.envelope.json  config echo, constants, summary, provenance

Exit codes: 0 success, 2 invalid config, 3 numerical failure (partial rows
are flushed with a failure marker in the status column).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .coordinates import CoordinateMap, Rescale, inner_gap_of_x, r_of_x, verify_exponents, x_of_r
from .errors import ConfigError, Error
from .numerics import ToleranceSpec, fit_power_law
from .operator import RadialMode, coefficients
from .spacetime import ConstantsLedger, Nucleus, Sector, build_spacetime, extremal_mass_number, hyper_heavy
from . import spectral

COMMANDS = (
    "classify",
    "coords",
    "coeffs",
    "endpoints",
    "threshold",
    "eigenscan",
    "weyldemo",
    "mfunc",
    "candidate",
)

_SCHEMA = {
    "type": "object",
    "required": ["Z", "A"],
    "additionalProperties": False,
    "properties": {
        "Z": {"type": "integer", "minimum": 1},
        "A": {
            "anyOf": [
                {"type": "number", "minimum": 1.0},
                {"const": "extremal"},
            ]
        },
        "k": {"type": "integer", "not": {"const": 0}},
        "fa": {"type": "number", "minimum": 0.0},
        "theta": {"type": "number", "minimum": 0.0, "exclusiveMaximum": math.pi},
        "rescale": {"enum": ["by_inner_radius", "none"]},
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha_s": {"type": "number", "exclusiveMinimum": 0.0},
                "eps_g": {"type": "number", "exclusiveMinimum": 0.0},
                "mass_ratio": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": {"type": "number", "exclusiveMinimum": 0.0},
                "abs_tol": {"type": "number", "minimum": 0.0},
                "max_iterations": {"type": "integer", "minimum": 1},
            },
        },
        "grids": {"type": "object"},
    },
}

_DEFAULTS = {
    "k": 1,
    "fa": 0.0,
    "theta": 0.0,
    "rescale": "by_inner_radius",
    "constants": {},
    "tolerances": {},
    "grids": {},
}

_GRID_DEFAULTS = {
    "coords": {"x_min": 1e-12, "x_max": 0.97, "points": 200},
    "coeffs": {"x_min": 1e-6, "x_max": 10.0, "points": 100},
    "eigenscan": {"lambda_half_width_alphas": 5.0, "points": 101},
    "weyldemo": {"n_values": [4, 16, 64, 256]},
    "mfunc": {"lambda_half_width_alphas": 5.0, "points": 21, "im_alphas": 1e-3},
}


def load_config(path: str | Path) -> dict:
    """Read, schema-validate, and default-resolve a run configuration."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    errors = sorted(Draft202012Validator(_SCHEMA).iter_errors(raw), key=str)
    if errors:
        raise ConfigError("; ".join(e.message for e in errors))
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    merged_grids = {k: dict(v) for k, v in _GRID_DEFAULTS.items()}
    for name, spec in cfg.get("grids", {}).items():
        merged_grids.setdefault(name, {}).update(spec)
    cfg["grids"] = merged_grids
    return cfg


def _ledger(cfg: dict) -> ConstantsLedger:
    return ConstantsLedger(**cfg["constants"])


def _spacetime(cfg: dict):
    ledger = _ledger(cfg)
    a_val = cfg["A"]
    if a_val == "extremal":
        a_val = extremal_mass_number(cfg["Z"], ledger)
    return build_spacetime(Nucleus(Z=cfg["Z"], A=a_val), ledger), ledger


def _tolerances(cfg: dict) -> ToleranceSpec:
    return ToleranceSpec(**cfg["tolerances"]) if cfg["tolerances"] else ToleranceSpec()


def _mode(cfg: dict, st) -> RadialMode:
    return RadialMode(st, k=cfg["k"], fa=cfg["fa"], theta=cfg["theta"])


def _fmt(value) -> str:
    """17 significant digits, lowercase exponent: binary64 round trips."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return f"{float(value):.16e}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _envelope(cfg: dict, command: str, ledger: ConstantsLedger, summary: dict,
              rows_header: list[str], rows: list[list], jobs: int) -> dict:
    return {
        "command": command,
        "config": cfg,
        "constants": {
            "alpha_s": ledger.alpha_s,
            "eps_g": ledger.eps_g,
            "mass_ratio": ledger.mass_ratio,
            "eps_pe": ledger.eps_pe,
            "eps_pp": ledger.eps_pp,
        },
        "summary": summary,
        "rows": {"header": rows_header, "values": [[_fmt(v) for v in row] for row in rows]},
        "provenance": {
            "package_version": __version__,
            "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "tolerances": cfg["tolerances"] or {"rel_tol": 1e-10, "abs_tol": 1e-14, "max_iterations": 200},
            "jobs": jobs,
        },
    }


# -- per-command sweeps -----------------------------------------------------------

# Worker entry points receive the resolved config dict plus one grid value and
# return one row; they must stay module level for process pools.


def _sector_payload(cfg: dict) -> dict:
    st, _ = _spacetime(cfg)
    out = {
        "sector": st.sector.value,
        "mu": st.mu,
        "hyper_heavy": hyper_heavy(st.nucleus, st.constants),
    }
    if st.sector is not Sector.NAKED:
        out.update(
            r_minus=st.r_minus,
            r_plus=st.r_plus,
            q=st.q,
            r_star=st.r_star,
            kappa=st.kappa,
            horizon_ratio=st.horizon_ratio,
            r0=st.r0,
        )
    return out


def _coords_row(cfg: dict, x: float) -> list:
    st, _ = _spacetime(cfg)
    cmap = CoordinateMap(st, Rescale(cfg["rescale"]))
    tol = _tolerances(cfg)
    r = r_of_x(cmap, x, tol)
    gap = inner_gap_of_x(cmap, x, tol)
    xt = x_of_r(cmap, r)
    return ["ok", x, r, gap, abs(xt - x)]


def _coeffs_row(cfg: dict, x: float) -> list:
    st, _ = _spacetime(cfg)
    mode = _mode(cfg, st)
    smp = coefficients(mode, x, rescaled=cfg["rescale"] == "by_inner_radius")
    return ["ok", x, smp.a, smp.b, smp.c, smp.d]


def _eigenscan_row(cfg: dict, lam: float) -> list:
    st, _ = _spacetime(cfg)
    mode = _mode(cfg, st)
    rep = spectral.eigen_scan(mode, [lam], _tolerances(cfg))
    return ["ok", lam, rep.mismatch[0], len(rep.roots)]


def _weyl_row(cfg: dict, n: int) -> list:
    st, _ = _spacetime(cfg)
    mode = _mode(cfg, st)
    lam = spectral.candidate_eigenvalue(st)
    d = spectral.weyl_residual_details(mode, lam, int(n), _tolerances(cfg))
    return ["ok", int(n), d.member_norm, d.residual_closed_form, d.residual_quadrature]


def _mfunc_row(cfg: dict, lam: float) -> list:
    st, _ = _spacetime(cfg)
    mode = _mode(cfg, st)
    gspec = cfg["grids"]["mfunc"]
    im = gspec["im_alphas"] * st.constants.alpha_s * st.nucleus.Z
    z = complex(lam, im)
    m = spectral.m_function(mode, z, tol=_tolerances(cfg))
    return ["ok", lam, im, m.real, m.imag, m.imag > 0.0]


_ROW_WORKERS = {
    "coords": _coords_row,
    "coeffs": _coeffs_row,
    "eigenscan": _eigenscan_row,
    "weyldemo": _weyl_row,
    "mfunc": _mfunc_row,
}


def _grid_values(cfg: dict, command: str, st) -> list:
    g = cfg["grids"][command]
    alpha = st.constants.alpha_s * st.nucleus.Z
    if command in ("coords", "coeffs"):
        return [float(v) for v in np.geomspace(g["x_min"], g["x_max"], int(g["points"]))]
    if command in ("eigenscan", "mfunc"):
        w = g["lambda_half_width_alphas"]
        return [float(v) for v in alpha * np.linspace(-w, w, int(g["points"]))]
    if command == "weyldemo":
        return [int(n) for n in g["n_values"]]
    raise ConfigError(f"no grid for command {command}")


def _run_grid(cfg: dict, command: str, values: list, jobs: int) -> tuple[list[list], bool]:
    """Map the command worker over the grid, in order; serial when jobs=1.

    Numerical failures mark the row and flip the failure flag; remaining
    rows still run (partial results are flushed).
    """
    worker = _ROW_WORKERS[command]
    pad = {"coords": 3, "coeffs": 4, "eigenscan": 2, "weyldemo": 3, "mfunc": 4}[command]
    rows: list[list] = []
    failed = False

    def fill(value, result, exc):
        nonlocal failed
        if exc is not None:
            failed = True
            rows.append(["failed:" + type(exc).__name__, value] + [float("nan")] * pad)
        else:
            rows.append(result)
    if jobs <= 1:
        for v in values:
            try:
                fill(v, worker(cfg, v), None)
            except Error as exc:
                fill(v, None, exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(worker, cfg, v) for v in values]
            for v, fut in zip(values, futures):
                try:
                    fill(v, fut.result(), None)
                except Error as exc:
                    fill(v, None, exc)
    return rows, failed


def run_command(command: str, cfg: dict, out_dir: Path, fmt: str, jobs: int) -> int:
    """Execute one command; returns the process exit code."""
    st, ledger = _spacetime(cfg)
    tol = _tolerances(cfg)
    summary: dict = {}
    failed = False

    if command == "classify":
        header = ["status", "sector", "mu", "r_minus", "r_plus", "q", "kappa", "r_star", "hyper_heavy"]
        p = _sector_payload(cfg)
        rows = [[
            "ok",
            p["sector"],
            p["mu"],
            p.get("r_minus"),
            p.get("r_plus"),
            p.get("q"),
            p.get("kappa"),
            p.get("r_star"),
            p["hyper_heavy"],
        ]]
        summary = p
    elif command == "endpoints":
        mode = _mode(cfg, st)
        zero = spectral.classify_zero_endpoint(mode)
        inf = spectral.classify_infinity_endpoint(mode, tol)
        defic = spectral.deficiency_indices(mode, tol)
        header = ["status", "endpoint", "classification", "exponent_p", "l2_recessive", "l2_dominant"]
        rows = [
            ["ok", "zero", zero.classification.value, zero.exponent_p, *zero.l2_verdicts],
            ["ok", "infinity", inf.classification.value, inf.exponent_p, *inf.l2_verdicts],
        ]
        summary = {"deficiency": [defic.n_plus, defic.n_minus]}
    elif command == "threshold":
        rep = spectral.esa_threshold(st)
        header = ["status", "fa_crit", "exponent_slope"]
        rows = [["ok", rep.fa_crit, rep.slope]]
        summary = {"fa_crit": rep.fa_crit, "p_at_fa_crit": rep.p_of_fa(rep.fa_crit)}
    elif command == "candidate":
        mode = _mode(cfg, st)
        lam = spectral.candidate_eigenvalue(st)
        lam_raw = spectral.candidate_eigenvalue(st, rescaled=False)
        ev = spectral.variation_limits(mode, tol=tol)
        header = ["status", "lambda_star_rescaled", "lambda_star_raw", "verdict",
                  "ratio_w1", "ratio_w2", "ratio_w3", "u_limit", "v_limit"]
        uv = ev.uv_limits or (None, None)
        rows = [["ok", lam, lam_raw, ev.verdict.value, *ev.window_ratios, uv[0], uv[1]]]
        summary = {"verdict": ev.verdict.value, "lambda_star_rescaled": lam}
    else:
        values = _grid_values(cfg, command, st)
        rows, failed = _run_grid(cfg, command, values, jobs)
        header = {
            "coords": ["status", "x", "r", "inner_gap", "round_trip_residual"],
            "coeffs": ["status", "x", "a", "b", "c", "d"],
            "eigenscan": ["status", "lambda", "mismatch", "roots_found"],
            "weyldemo": ["status", "n", "member_norm", "residual_closed_form", "residual_quadrature"],
            "mfunc": ["status", "lambda", "im_z", "re_m", "im_m", "herglotz_ok"],
        }[command]
        if command == "eigenscan":
            summary = {"roots_found": int(sum(r[3] for r in rows if r[0] == "ok"))}
        elif command == "weyldemo":
            ok = [r for r in rows if r[0] == "ok"]
            if len(ok) >= 3:
                fit = fit_power_law([(r[1], r[4]) for r in ok])
                summary = {"residual_slope": fit.slope}
        elif command == "mfunc":
            summary = {"herglotz_all_positive": all(bool(r[5]) for r in rows if r[0] == "ok")}
        elif command == "coords":
            checks = verify_exponents(CoordinateMap(st, Rescale(cfg["rescale"])))
            summary = {
                "small_x_slope": checks.small_x.slope,
                "tail_slope": checks.tail.slope,
            }

    out_dir.mkdir(parents=True, exist_ok=True)
    envelope = _envelope(cfg, command, ledger, summary, header, rows, jobs)
    (out_dir / f"{command}.envelope.json").write_text(json.dumps(envelope, indent=2) + "\n")
    if fmt == "csv":
        _write_csv(out_dir / f"{command}.csv", header, rows)
    return 3 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rwndirac",
        description="Radial Dirac spectral probes on charged black-hole interiors",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="csv writes rows + envelope, json the envelope only")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel workers for grid sweeps")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run_command(args.command, cfg, Path(args.out), args.format, max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Error as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
