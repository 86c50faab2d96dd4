"""Command-line front end.

    burgers-ilt solve    --config run.json [--output-dir DIR]
    burgers-ilt validate --config run.json
    burgers-ilt bench    --config run.json [--output-dir DIR]

Exit codes: 0 success, 1 fatal error, 2 success with degraded cells.
"""

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import reference
from .engine import SolutionTable, SpaceTimeGrid, error_norms, solve, table_from_function
from .ilt import IltConfig, Status
from .problem import BurgersProblem, InitialProfile

log = logging.getLogger("burgers_ilt")

SOLVERS = ("ilt", "fd", "exact1", "cole")
STATUS_LABELS = {int(s): s.label for s in Status}
LABEL_STATUS = {v: k for k, v in STATUS_LABELS.items()}

_positive = {"type": "number", "exclusiveMinimum": 0}
_pair = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem", "solvers"],
    "additionalProperties": False,
    "properties": {
        "problem": {
            "type": "object",
            "required": ["preset", "a_sq"],
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": ["example1", "example2", "table"]},
                "a_sq": _positive,
                "sigma": {"type": "number"},
                "interval": _pair,
                "alpha": _pair,
                "T": _positive,
                "table": {"type": "string"},
                "u00": {"type": "number", "not": {"const": 0}},
            },
            "allOf": [
                {"if": {"properties": {"preset": {"const": "example1"}}},
                 "then": {"required": ["sigma"]}},
                {"if": {"properties": {"preset": {"const": "table"}}},
                 "then": {"required": ["table"]}},
            ],
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dx": _positive, "dt": _positive,
                           "xs": _vector, "ts": _vector},
        },
        "solvers": {"type": "array", "items": {"enum": list(SOLVERS)},
                    "minItems": 1, "uniqueItems": True},
        "ilt": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"tol": _positive,
                           "M": {"type": "integer", "minimum": 5},
                           "scale_factor": {"type": "number", "exclusiveMinimum": 1},
                           "gamma_shift": {"type": "number"}},
        },
        "fd": {"type": "object", "additionalProperties": False,
               "properties": {"dx": _positive, "dt": _positive}},
        "cole": {"type": "object", "additionalProperties": False,
                 "properties": {"n_terms": {"type": "integer", "minimum": 1}}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"path": {"type": "string"},
                                  "format": {"enum": ["csv", "json"]}}},
    },
}


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = problems  # list of (json pointer, message)
        super().__init__("; ".join(f"{ptr or '/'}: {msg}" for ptr, msg in problems))


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def check_config(config):
    """Validate ``config`` against the schema plus cross-field rules.

    Raises :class:`ConfigError` listing ``(json_pointer, message)`` pairs.
    """
    problems = []
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    for err in sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path)):
        path = list(err.absolute_path)
        if err.validator == "required" and isinstance(err.instance, dict):
            for key in err.validator_value:
                if key not in err.instance:
                    problems.append((_pointer(path + [key]), f"'{key}' is required"))
        elif err.validator == "minItems" and path == ["solvers"]:
            problems.append(("/solvers", "no solver selected"))
        else:
            problems.append((_pointer(path), err.message))
    if not problems:
        preset = config["problem"]["preset"]
        solvers = config["solvers"]
        if "exact1" in solvers and preset != "example1":
            problems.append(("/solvers", "'exact1' requires the example1 preset"))
        if "cole" in solvers and preset != "example2":
            problems.append(("/solvers", "'cole' requires the example2 preset"))
        if preset == "example1" and not abs(config["problem"]["sigma"]) > 1:
            problems.append(("/problem/sigma", "|sigma| must exceed 1"))
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path):
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([("", f"invalid JSON: {exc}")]) from exc
    return check_config(config)


def read_profile_table(path):
    """Sampled ``w0`` from a CSV file with columns ``x,w0``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xs = np.array([float(r["x"]) for r in rows])
    ws = np.array([float(r["w0"]) for r in rows])
    return InitialProfile.from_table(xs, ws, name=str(path))


def build_problem(cfg, base_dir=Path(".")):
    pcfg = cfg["problem"]
    preset = pcfg["preset"]
    T = pcfg.get("T", 1.0)
    if preset == "example1":
        return reference.example1_problem(pcfg["a_sq"], pcfg["sigma"], T)
    if preset == "example2":
        return reference.example2_problem(pcfg["a_sq"], T)
    l1, l2 = pcfg.get("interval", [0.0, 1.0])
    a1, a2 = pcfg.get("alpha", [0.0, 0.0])
    profile = read_profile_table(base_dir / pcfg["table"])
    return BurgersProblem(pcfg["a_sq"], l1, l2, a1, a2, profile, T)


def build_grid(cfg, problem):
    g = cfg.get("grid", {})
    if "xs" in g:
        xs = np.asarray(g["xs"], dtype=float)
    else:
        dx = g.get("dx", 0.01)
        xs = np.linspace(problem.l1, problem.l2, int(round(problem.length / dx)) + 1)
    if "ts" in g:
        ts = np.asarray(g["ts"], dtype=float)
    else:
        dt = g.get("dt", 0.001)
        n = int(round(problem.T / dt))
        ts = dt * np.arange(1, n + 1)
    return SpaceTimeGrid(xs, ts)


def format_float(v):
    """Shortest decimal string that round-trips to the same double."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def emit_table(table, fmt, path):
    """Write ``table`` as CSV (``x,t,w,status``, t-major) or JSON."""
    path = Path(path)
    labels = np.vectorize(STATUS_LABELS.get, otypes=[object])(table.status)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                out = csv.writer(fh, lineterminator="\n")
                out.writerow(["x", "t", "w", "status"])
                for k, t in enumerate(table.grid.ts):
                    for j, x in enumerate(table.grid.xs):
                        out.writerow([format_float(x), format_float(t),
                                      format_float(table.w[k, j]), labels[k, j]])
        elif fmt == "json":
            payload = {
                "x": table.grid.xs.tolist(),
                "t": table.grid.ts.tolist(),
                "w": [[None if not math.isfinite(v) else v for v in row]
                      for row in table.w.tolist()],
                "status": labels.tolist(),
                "meta": table.meta,
            }
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=1, default=_jsonable)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_table(path):
    """Parse a CSV written by :func:`emit_table` back into a table."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xs = np.array(sorted({float(r["x"]) for r in rows}))
    ts = np.array(sorted({float(r["t"]) for r in rows}))
    w = np.empty((ts.size, xs.size))
    status = np.empty(w.shape, dtype=np.int8)
    for i, r in enumerate(rows):
        k, j = divmod(i, xs.size)
        w[k, j] = float(r["w"])
        status[k, j] = LABEL_STATUS[r["status"]]
    return SolutionTable(SpaceTimeGrid(xs, ts), w, status, {})


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def run_solver(name, cfg, problem, grid):
    """Run one solver and return its table (timings in ``meta['timings']``)."""
    t0 = time.perf_counter()
    if name == "ilt":
        icfg = IltConfig(**cfg.get("ilt", {}))
        table = solve(problem, grid, icfg, u00=cfg["problem"].get("u00", 1.0))
    elif name == "fd":
        scheme = reference.FdScheme(**cfg.get("fd", {}))
        table = reference.fd_solve(problem, scheme, times=grid.ts, xs=grid.xs)
        table.meta["timings"] = {"total": time.perf_counter() - t0}
    elif name == "exact1":
        params = reference.Example1Params(problem.a_sq, cfg["problem"]["sigma"])
        table = table_from_function(
            lambda x, t: reference.example1_exact(x, t, params), grid, "exact1")
        table.meta["timings"] = {"total": time.perf_counter() - t0}
    elif name == "cole":
        params = reference.ColeSeriesParams(problem.a_sq, **cfg.get("cole", {}))
        reference.cole_coefficients.cache_clear()
        reference.cole_coefficients(params)
        tc = time.perf_counter() - t0
        table = table_from_function(
            lambda x, t: reference.cole_series(x, t, params), grid, "cole",
            {"config": {"n_terms": params.n_terms}})
        table.meta["timings"] = {"coefficients": tc, "total": time.perf_counter() - t0}
    else:
        raise ValueError(f"unknown solver {name!r}")
    table.meta["config_echo"] = cfg
    return table


def norm_table(tables):
    """Symmetric pairwise error norms between solver outputs."""
    norms = {name: {} for name in tables}
    for a, b in itertools.combinations(tables, 2):
        res = error_norms(tables[a], tables[b])
        entry = {"l2": res["l2"], "linf": res["linf"], "excluded": res["excluded"]}
        norms[a][b] = entry
        norms[b][a] = entry
    return norms


def cmd_solve(cfg, out_dir):
    problem = build_problem(cfg, Path(cfg.get("_base_dir", ".")))
    grid = build_grid(cfg, problem)
    fmt = cfg.get("output", {}).get("format", "csv")
    tables = {}
    for name in cfg["solvers"]:
        tables[name] = run_solver(name, cfg, problem, grid)
        emit_table(tables[name], fmt, out_dir / f"{name}.{fmt}")
    report = {
        "config": _public(cfg),
        "solvers": {name: {"timings": t.meta.get("timings", {}),
                           "degraded": t.degraded_count} for name, t in tables.items()},
        "norms": norm_table(tables),
    }
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, indent=1, default=_jsonable)
    for name, entry in report["solvers"].items():
        log.info("%s: total %.4fs, %d degraded cells", name,
                 entry["timings"].get("total", float("nan")), entry["degraded"])
    return 2 if any(e["degraded"] for e in report["solvers"].values()) else 0


def cmd_bench(cfg, out_dir, repeats=3):
    problem = build_problem(cfg, Path(cfg.get("_base_dir", ".")))
    grid = build_grid(cfg, problem)
    best = {}
    tables = {}
    for name in cfg["solvers"]:
        for _ in range(repeats):
            table = run_solver(name, cfg, problem, grid)
            stages = best.setdefault(name, {})
            for stage, secs in table.meta["timings"].items():
                stages[stage] = min(stages.get(stage, math.inf), secs)
        tables[name] = table
    report = {
        "config": _public(cfg),
        "repeats": repeats,
        "min_wall_time": best,
        "degraded": {name: t.degraded_count for name, t in tables.items()},
        "norms": norm_table(tables),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bench.json", "w") as fh:
        json.dump(report, fh, indent=1, default=_jsonable)
    for name, stages in best.items():
        print(f"{name:>7s}  " + "  ".join(f"{k}={v:.4f}s" for k, v in stages.items()))
    return report


def _public(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="burgers-ilt",
        description="Burgers' equation on a bounded interval via inverse Laplace transforms")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "validate", "bench"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        if name != "validate":
            p.add_argument("--output-dir")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for ptr, msg in exc.problems:
            print(f"config error at {ptr or '/'}: {msg}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    if args.command == "validate":
        print("config ok")
        return 0

    cfg["_base_dir"] = str(Path(args.config).resolve().parent)
    out = args.output_dir or cfg.get("output", {}).get("path", "out")
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            return cmd_solve(cfg, out_dir)
        report = cmd_bench(cfg, out_dir)
        return 2 if any(report["degraded"].values()) else 0
    except Exception as exc:  # noqa: BLE001 - fatal errors become exit code 1
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
