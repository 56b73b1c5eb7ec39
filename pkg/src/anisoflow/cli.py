"""Command line interface: run, verify, sweep, emit-plot.

Experiments are described by INI files::

    [params]
    n = 2
    k = 1
    alpha = 3
    beta = 1

    [grid]
    m = 256

    [initial]
    shape = ellipsoid      ; sphere | ellipsoid | offset-sphere | file
    aspect = 1.5

    [stepper]
    t_end = 10

    [run]
    mode = normalized

    [output]
    directory = out

A sweep file adds a ``[sweep]`` section whose keys (alpha, beta, k,
aspect) hold comma-separated lists.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import itertools
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .diagnostics import COLUMNS, fit_decay
from .errors import DomainError
from .flow import MODES, RunResult, StepperConfig, run
from .grid import Grid, RadialField
from .params import FlowParams
from .reference import elongated_initial, offset_sphere_initial, sphere_initial

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SHAPES = ("sphere", "ellipsoid", "offset-sphere", "file")

# section -> key -> converter
_INT, _FLOAT, _STR, _BOOL = "int", "float", "str", "bool"
SCHEMA: Dict[str, Dict[str, str]] = {
    "params": {"n": _INT, "k": _INT, "alpha": _FLOAT, "beta": _FLOAT},
    "grid": {"kind": _STR, "m": _INT},
    "initial": {"shape": _STR, "a0": _FLOAT, "aspect": _FLOAT, "offset": _FLOAT,
                "radius": _FLOAT, "path": _STR},
    "stepper": {"cfl": _FLOAT, "t_end": _FLOAT, "max_steps": _INT, "scheme": _STR,
                "snapshot_every": _INT, "record_every": _INT, "cone_tol": _FLOAT,
                "converge_tol": _FLOAT, "converge_steps": _INT,
                "stop_on_converged": _BOOL, "r_floor": _FLOAT, "r_cap": _FLOAT},
    "run": {"mode": _STR},
    "output": {"directory": _STR, "formats": _STR},
    "sweep": {"alpha": "list", "beta": "list", "k": "list", "aspect": "list",
              "jobs": _INT},
}
REQUIRED = {"params": ("n", "k", "alpha", "beta"), "grid": ("m",)}
FORMATS = ("csv", "json")


class ConfigError(Exception):
    """Invalid configuration; ``str`` is a line-anchored message."""


@dataclass
class ExperimentConfig:
    params: FlowParams
    grid: Grid
    initial: dict
    stepper: StepperConfig
    mode: str = "normalized"
    directory: Path = Path("anisoflow-out")
    formats: Tuple[str, ...] = FORMATS
    sweep: dict = field(default_factory=dict)
    source: str = "<config>"


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    index = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        head = re.match(r"\[([^\]]+)\]", line)
        if head:
            section = head.group(1).strip()
            index.setdefault((section, None), no)
            continue
        key = re.match(r"([^=:]+)[=:]", line)
        if key and section is not None:
            index.setdefault((section, key.group(1).strip().lower()), no)
    return index


class _Reader:
    def __init__(self, path: Path):
        self.path = path
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
        self.lines = _line_index(text)
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            self.cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            line = getattr(exc, "lineno", None)
            where = f"{path}:{line}" if line else str(path)
            raise ConfigError(f"{where}: {exc.message.splitlines()[0]}") from None

    def fail(self, section, key, msg):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"{self.path}:{line}" if line else str(self.path)
        label = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{where}: {label}: {msg}")

    def validate_names(self):
        for section in self.cp.sections():
            if section not in SCHEMA:
                self.fail(section, None, f"unknown section; expected one of {sorted(SCHEMA)}")
            for key in self.cp[section]:
                if key not in SCHEMA[section]:
                    self.fail(section, key, f"unknown key; expected one of {sorted(SCHEMA[section])}")
        for section, keys in REQUIRED.items():
            for key in keys:
                if not self.cp.has_option(section, key):
                    self.fail(section, key, "missing required key")

    def get(self, section, key, default=None):
        if not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key).strip()
        kind = SCHEMA[section][key]
        try:
            if kind == _INT:
                return int(raw)
            if kind == _FLOAT:
                value = float(raw)
                if not math.isfinite(value):
                    raise ValueError
                return value
            if kind == _BOOL:
                return self.cp.getboolean(section, key)
            if kind == "list":
                items = [s.strip() for s in raw.split(",") if s.strip()]
                if not items:
                    self.fail(section, key, "empty list")
                conv = int if key == "k" else float
                return [conv(s) for s in items]
            return raw
        except ValueError:
            self.fail(section, key, f"cannot parse {raw!r} as {kind if kind != 'list' else 'a list'}")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    rd = _Reader(path)
    rd.validate_names()

    vals = {key: rd.get("params", key) for key in ("n", "k", "alpha", "beta")}
    try:
        params = FlowParams(**vals)
    except (DomainError, ValueError, TypeError) as exc:
        key = _blame(str(exc), ("n", "k", "alpha", "beta"))
        rd.fail("params", key, str(exc))

    m = rd.get("grid", "m")
    kind = rd.get("grid", "kind", params.grid_kind)
    if kind != params.grid_kind:
        rd.fail("grid", "kind", f"n={params.n} needs kind {params.grid_kind!r}, got {kind!r}")
    try:
        grid = Grid(kind, m)
    except DomainError as exc:
        rd.fail("grid", "m", str(exc))

    shape = rd.get("initial", "shape", "sphere")
    if shape not in SHAPES:
        rd.fail("initial", "shape", f"must be one of {SHAPES}, got {shape!r}")
    initial = {"shape": shape}
    for key in ("a0", "aspect", "offset", "radius", "path"):
        value = rd.get("initial", key)
        if value is not None:
            initial[key] = value
    if shape == "file":
        if "path" not in initial:
            rd.fail("initial", "path", "shape = file needs a path")
        initial["path"] = str((path.parent / initial["path"]).resolve())
    try:
        make_initial(grid, initial)
    except (DomainError, ValueError, KeyError, OSError) as exc:
        rd.fail("initial", _blame(str(exc), ("aspect", "a0", "offset", "radius", "path")) or "shape",
                str(exc))

    kw = {}
    for key in SCHEMA["stepper"]:
        value = rd.get("stepper", key)
        if value is not None:
            kw[key] = value
    try:
        stepper = StepperConfig(**kw)
    except DomainError as exc:
        rd.fail("stepper", _blame(str(exc), tuple(kw)), str(exc))

    mode = rd.get("run", "mode", "normalized")
    if mode not in MODES:
        rd.fail("run", "mode", f"must be one of {MODES}, got {mode!r}")

    directory = Path(rd.get("output", "directory", "anisoflow-out"))
    if not directory.is_absolute():
        directory = path.parent / directory
    formats = rd.get("output", "formats", ",".join(FORMATS))
    formats = tuple(s.strip() for s in formats.split(",") if s.strip())
    bad = [f for f in formats if f not in FORMATS]
    if bad or not formats:
        rd.fail("output", "formats", f"choose from {FORMATS}, got {formats}")

    sweep = {}
    if rd.cp.has_section("sweep"):
        for key in ("alpha", "beta", "k", "aspect"):
            value = rd.get("sweep", key)
            if value is not None:
                sweep[key] = value
        sweep["jobs"] = rd.get("sweep", "jobs", 1)
        if sweep["jobs"] < 1:
            rd.fail("sweep", "jobs", "must be >= 1")

    return ExperimentConfig(params, grid, initial, stepper, mode, directory, formats,
                            sweep, str(path))


def _blame(message: str, keys) -> Optional[str]:
    """Key named earliest in ``message``."""
    hits = []
    for key in keys:
        found = re.search(rf"\b{re.escape(key)}\b", message)
        if found:
            hits.append((found.start(), key))
    return min(hits)[1] if hits else None


def make_initial(grid: Grid, desc: dict) -> RadialField:
    shape = desc.get("shape", "sphere")
    if shape == "sphere":
        return sphere_initial(grid, desc.get("a0", 1.0))
    if shape == "ellipsoid":
        if "aspect" not in desc:
            raise DomainError("shape = ellipsoid needs aspect")
        field = elongated_initial(grid, desc["aspect"])
        return _scaled(field, desc.get("a0", 1.0))
    if shape == "offset-sphere":
        return offset_sphere_initial(grid, desc.get("offset", 0.0), desc.get("radius", 1.0))
    if shape == "file":
        return load_snapshot(desc["path"], grid)
    raise DomainError(f"unknown shape {shape!r}")


def _scaled(field: RadialField, a0: float) -> RadialField:
    if not a0 > 0:
        raise DomainError("a0 must be positive")
    return RadialField(field.grid, field.phi + math.log(a0))


# -- persistence -------------------------------------------------------------

def snapshot_json(t: float, grid: Grid, phi) -> dict:
    return {"t": float(t), "grid": {"kind": grid.kind, "m": grid.m},
            "phi": [float(v) for v in phi]}


def load_snapshot(path, grid: Optional[Grid] = None) -> RadialField:
    data = json.loads(Path(path).read_text())
    g = Grid(data["grid"]["kind"], data["grid"]["m"])
    if grid is not None and g != grid:
        raise DomainError(f"path: snapshot grid {g} does not match configured grid {grid}")
    return RadialField(g, np.asarray(data["phi"], dtype=float))


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_series(path: Path, records):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(_fmt(v) for v in rec.as_row()) + "\n")


def read_series(path) -> Dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def decay_summary(result: RunResult) -> dict:
    series = list(zip(result.times(), result.column("grad_norm")))
    try:
        fit = fit_decay(series)
    except ValueError as exc:
        return {"rate": None, "amplitude": None, "residual": None,
                "flag": "insufficient-data", "detail": str(exc)}
    return {"rate": fit.rate, "amplitude": fit.amplitude, "residual": fit.residual,
            "flag": fit.flag}


def summarize(cfg: ExperimentConfig, result: RunResult) -> dict:
    recs = result.records
    col = result.column
    p = cfg.params
    return _clean({
        "status": result.status,
        "reason": result.reason,
        "version": __version__,
        "params": {"n": p.n, "k": p.k, "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma},
        "regime": p.regime,
        "mode": result.mode,
        "grid": {"kind": cfg.grid.kind, "m": cfg.grid.m},
        "initial": cfg.initial,
        "steps": result.steps,
        "t": result.t,
        "R_initial": recs[0].R,
        "R_final": recs[-1].R,
        "initial_record": recs[0].as_dict(),
        "final": recs[-1].as_dict(),
        "decay_fit": decay_summary(result),
        "extrema": {
            "r_min": float(np.min(col("r_min"))), "r_max": float(np.max(col("r_max"))),
            "R_max": float(np.max(col("R"))), "u_min": float(np.min(col("u_min"))),
            "F_min": float(np.min(col("F_min"))), "F_max": float(np.max(col("F_max"))),
            "Phi_min": float(np.min(col("Phi_min"))), "Phi_max": float(np.max(col("Phi_max"))),
            "kappa_min": float(np.min(col("kappa_min"))),
            "kappa_max": float(np.max(col("kappa_max"))),
            "cone_margin_min": float(np.min(col("cone_margin"))),
        },
    })


def execute(cfg: ExperimentConfig, outdir: Optional[Path] = None) -> dict:
    """Run one experiment and write its artifacts; returns the summary."""
    outdir = Path(outdir or cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    initial = make_initial(cfg.grid, cfg.initial)
    result = run(initial, cfg.params, cfg.stepper, cfg.mode)
    if "csv" in cfg.formats:
        write_series(outdir / "series.csv", result.records)
    if "json" in cfg.formats:
        snapdir = outdir / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for old in snapdir.glob("*.json"):
            old.unlink()
        for snap in result.snapshots:
            (snapdir / f"{snap.step:010d}.json").write_text(
                json.dumps(snapshot_json(snap.t, cfg.grid, snap.phi)))
    summary = summarize(cfg, result)
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


# -- sweep -------------------------------------------------------------------

SWEEP_COLUMNS = ("cell", "n", "k", "alpha", "beta", "aspect", "regime", "status", "reason",
                 "steps", "t", "R_initial", "R_final", "sphere_dev", "decay_rate", "error")


def sweep_cells(cfg: ExperimentConfig) -> List[dict]:
    """Deduplicated Cartesian product in listed order."""
    p = cfg.params
    axes = {
        "alpha": cfg.sweep.get("alpha", [p.alpha]),
        "beta": cfg.sweep.get("beta", [p.beta]),
        "k": cfg.sweep.get("k", [p.k]),
        "aspect": cfg.sweep.get("aspect", [cfg.initial.get("aspect")]),
    }
    for key, values in axes.items():
        if not values:
            raise ConfigError(f"{cfg.source}: [sweep] {key}: empty list")
    seen = set()
    cells = []
    for alpha, beta, k, aspect in itertools.product(*axes.values()):
        key = (float(alpha), float(beta), int(k), aspect)
        if key in seen:
            continue
        seen.add(key)
        cells.append({"alpha": key[0], "beta": key[1], "k": key[2], "aspect": aspect})
    return cells


def _run_cell(args) -> dict:
    index, cell, cfg = args
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(cell=index, n=cfg.params.n, **cell)
    try:
        params = FlowParams(cfg.params.n, cell["k"], cell["alpha"], cell["beta"])
        row["regime"] = params.regime
        initial = dict(cfg.initial)
        if cell["aspect"] is not None:
            initial.update(shape="ellipsoid", aspect=cell["aspect"])
        cell_cfg = replace(cfg, params=params, grid=Grid.for_params(params, cfg.grid.m),
                           initial=initial)
        summary = execute(cell_cfg, cfg.directory / "cells" / f"cell_{index:04d}")
        row.update(status=summary["status"], reason=summary["reason"], steps=summary["steps"],
                   t=summary["t"], R_initial=summary["R_initial"], R_final=summary["R_final"],
                   sphere_dev=summary["final"]["sphere_dev"],
                   decay_rate=summary["decay_fit"]["rate"])
    except Exception as exc:  # per-cell failures are recorded, the sweep goes on
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row


def execute_sweep(cfg: ExperimentConfig) -> List[dict]:
    cells = sweep_cells(cfg)
    cfg.directory.mkdir(parents=True, exist_ok=True)
    jobs = [(i, cell, cfg) for i, cell in enumerate(cells)]
    workers = cfg.sweep.get("jobs", 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = [_run_cell(j) for j in jobs]
    with open(cfg.directory / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in row.items()})
    return rows


# -- emit-plot ---------------------------------------------------------------

def emit_plot(series_path, outdir=None) -> List[Path]:
    """Write one two-column (t, value) file per observable."""
    series_path = Path(series_path)
    data = read_series(series_path)
    outdir = Path(outdir) if outdir else series_path.parent / "plot"
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, values in data.items():
        if name == "t":
            continue
        target = outdir / f"{name}.dat"
        with open(target, "w") as fh:
            fh.write(f"# t {name}\n")
            for t, v in zip(data["t"], values):
                fh.write(f"{_fmt(t)} {_fmt(v)}\n")
        written.append(target)
    return written


# -- entry point -------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.directory = Path(args.output)
    summary = execute(cfg)
    print(f"status={summary['status']} reason={summary['reason'] or '-'} "
          f"steps={summary['steps']} t={summary['t']:.6g} R={summary['R_final']:.10g}")
    print(f"wrote {cfg.directory}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_checks

    results = run_checks(seed=args.seed, samples=args.samples, quick=not args.full)
    for res in results:
        print(res.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.directory = Path(args.output)
    rows = execute_sweep(cfg)
    for row in rows:
        print(f"cell {row['cell']}: alpha={row['alpha']} beta={row['beta']} k={row['k']} "
              f"aspect={row['aspect']} regime={row['regime'] or '-'} status={row['status']}"
              + (f" ({row['error']})" if row["error"] else ""))
    print(f"wrote {cfg.directory / 'sweep.csv'}")
    return EXIT_OK


def cmd_emit_plot(args) -> int:
    for path in emit_plot(args.series, args.output):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisoflow",
                                 description="Anisotropic curvature flow simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from an INI config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override [output] directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the property and oracle checks")
    p.add_argument("--seed", type=int, default=None, help="sampling seed (default: ANISOFLOW_SEED)")
    p.add_argument("--samples", type=int, default=300, help="random samples per inequality")
    p.add_argument("--full", action="store_true", help="use m = 256 for the flow checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter sweep from an INI config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override [output] directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("emit-plot", help="split series.csv into per-observable data files")
    p.add_argument("series")
    p.add_argument("-o", "--output", help="target directory (default: <series dir>/plot)")
    p.set_defaults(func=cmd_emit_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
