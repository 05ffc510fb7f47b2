"""Batch scenario runner.

``qfi-forge run config.json`` parses a declarative scenario, dispatches
to the requested optimizer or bound, and writes machine-readable
records (CSV or JSON).  ``qfi-forge compare a.csv b.csv ...`` aligns
result files on their n-grid and tabulates value/n per method with a
gap-to-bound column.

Scenario config schema::

    {
      "channel": {<channel spec>},           # see channel_from_spec
      "method": "mop_channel" | "iss_channel" | "mop_parallel"
              | "iss_parallel" | "iss_tnet_parallel" | "mop_adaptive"
              | "iss_adaptive" | "iss_tnet_adaptive" | "iss_custom"
              | "par_bounds" | "ad_bounds" | "asym"
              | "ad_bounds_correlated",
      "sweep": 3 | [1, 2, 3],                # channel uses ("n" also accepted)
      "options": {"ancilla_dim": 2, "seed": 0, "rel_tol": 1e-6,
                  "stall_sweeps": 3, "max_sweeps": 1000,
                  "mps_bond_dim": 2, "sld_bond_dim": 4,
                  "block_size": 1, "strategy_file": "..."},
      "output": {"path": "results.csv", "format": "csv" | "json"}
    }

Exit codes: 0 all points converged, 1 config error, 2 any numerical
failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds as _bounds
from . import iss as _iss
from . import mop as _mop
from . import tnet as _tnet
from .channel import channel_from_spec

METHODS = (
    "mop_channel", "iss_channel", "mop_parallel", "iss_parallel",
    "iss_tnet_parallel", "mop_adaptive", "iss_adaptive",
    "iss_tnet_adaptive", "iss_custom", "par_bounds", "ad_bounds",
    "asym", "ad_bounds_correlated",
)

BOUND_METHODS = ("par_bounds", "ad_bounds", "ad_bounds_correlated")

FIELDS = ["scenario", "method", "n", "value", "status", "seed", "wall_time"]


class ConfigError(ValueError):
    pass


def _iss_options(opts: dict) -> _iss.IssOptions:
    keys = ("ancilla_dim", "seed", "rel_tol", "stall_sweeps", "max_sweeps")
    return _iss.IssOptions(**{k: opts[k] for k in keys if k in opts})


def _require(opts, key, method):
    if key not in opts:
        raise ConfigError(
            f"method {method!r} requires options.{key} (missing field)"
        )
    return opts[key]


def _scenario_hash(config: dict) -> str:
    probe = {k: v for k, v in config.items() if k != "output"}
    return hashlib.sha256(
        json.dumps(probe, sort_keys=True).encode()
    ).hexdigest()[:12]


def run_point(config: dict, n: int) -> dict:
    """One sweep point; returns a result record."""
    method = config["method"]
    opts = dict(config.get("options", {}))
    seed = int(opts.get("seed", 0))
    channel = None
    if "channel" in config:
        channel = channel_from_spec(config["channel"])
    t0 = time.perf_counter()
    status = "optimal"
    trace = None
    if method == "mop_channel":
        value = _mop.mop_channel_qfi(channel)
    elif method == "mop_parallel":
        value = _mop.mop_parallel_qfi(channel, n)
    elif method == "mop_adaptive":
        value = _mop.mop_adaptive_qfi(channel, n)
    elif method == "iss_channel":
        res = _iss.iss_channel_qfi(channel, options=_iss_options(opts))
        value, status, trace = res.qfi, res.status, res.trace
    elif method == "iss_parallel":
        res = _iss.iss_parallel_qfi(channel, n, options=_iss_options(opts))
        value, status, trace = res.qfi, res.status, res.trace
    elif method == "iss_adaptive":
        res = _iss.iss_adaptive_qfi(channel, n, options=_iss_options(opts))
        value, status, trace = res.qfi, res.status, res.trace
    elif method == "iss_tnet_parallel":
        res = _tnet.iss_tnet_parallel_qfi(
            channel, n,
            ancilla_dim=int(opts.get("ancilla_dim", 1)),
            mps_bond_dim=int(_require(opts, "mps_bond_dim", method)),
            sld_bond_dim=opts.get("sld_bond_dim"),
            options=_iss_options(opts),
        )
        value, status, trace = res.qfi, res.status, res.trace
    elif method == "iss_tnet_adaptive":
        res = _tnet.iss_tnet_adaptive_qfi(
            channel, n,
            ancilla_dim=int(opts.get("ancilla_dim", 1)),
            options=_iss_options(opts),
        )
        value, status, trace = res.qfi, res.status, res.trace
    elif method == "iss_custom":
        path = _require(opts, "strategy_file", method)
        net = _tnet.load_strategy(path)
        value, trace, _, status = _tnet.iss_opt(net, _iss_options(opts))
    elif method == "asym":
        scaling = _bounds.asym_scaling_qfi(channel)
        wall = time.perf_counter() - t0
        # one record: n carries the scaling exponent, value the coefficient
        series = _bounds.BoundSeries([scaling.exponent],
                                     [scaling.coefficient], "asym")
        return {"series": series, "seed": seed, "wall_time": wall,
                "status": "optimal"}
    elif method in BOUND_METHODS:
        if method == "par_bounds":
            series = _bounds.par_bounds(channel, n)
        elif method == "ad_bounds":
            series = _bounds.ad_bounds(channel, n)
        else:
            series = _bounds.ad_bounds_correlated(
                channel, n, int(opts.get("block_size", 1))
            )
        wall = time.perf_counter() - t0
        return {"series": series, "seed": seed, "wall_time": wall,
                "status": "optimal"}
    else:
        raise ConfigError(f"unknown method {method!r}")
    wall = time.perf_counter() - t0
    out = {"value": float(value), "status": status, "seed": seed,
           "wall_time": wall}
    if trace is not None:
        out["trace"] = [float(x) for x in trace]
    return out


def _validate_config(config: dict):
    method = config.get("method")
    if method not in METHODS:
        raise ConfigError(
            f"method must be one of {METHODS}, got {method!r} (field: method)"
        )
    if method != "iss_custom" and "channel" not in config:
        raise ConfigError(f"method {method!r} requires a channel (field: channel)")
    opts = config.get("options", {})
    if method == "iss_tnet_parallel" and "mps_bond_dim" not in opts:
        raise ConfigError(
            "method 'iss_tnet_parallel' requires options.mps_bond_dim "
            "(field: options.mps_bond_dim)"
        )
    if method == "iss_custom" and "strategy_file" not in opts:
        raise ConfigError(
            "method 'iss_custom' requires options.strategy_file "
            "(field: options.strategy_file)"
        )


def _sweep_points(config: dict) -> list:
    n = config.get("sweep", config.get("n", 1))
    if isinstance(n, list):
        return [int(x) for x in n]
    return [int(n)]


def _apply_override(config: dict, assignment: str):
    if "=" not in assignment:
        raise ConfigError(f"override must be key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    target = config
    parts = key.split(".")
    for p in parts[:-1]:
        target = target.setdefault(p, {})
    target[parts[-1]] = value


def cmd_run(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
        for ov in args.override or []:
            _apply_override(config, ov)
        _validate_config(config)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config.setdefault("options", {})["seed"] = args.seed
    scenario = _scenario_hash(config)
    method = config["method"]
    points = _sweep_points(config)
    records = []
    failed = False

    def record_rows(n, out):
        nonlocal failed
        rows = []
        if "series" in out:
            series = out["series"]
            for nn, vv in zip(series.ns, series.values):
                rows.append({
                    "scenario": scenario, "method": method, "n": nn,
                    "value": f"{vv:.17g}", "status": out["status"],
                    "seed": out["seed"], "wall_time": f"{out['wall_time']:.3f}",
                })
        else:
            if out["status"] == "numerical_failure":
                failed = True
            row = {
                "scenario": scenario, "method": method, "n": n,
                "value": f"{out['value']:.17g}", "status": out["status"],
                "seed": out["seed"], "wall_time": f"{out['wall_time']:.3f}",
            }
            if "trace" in out:
                row["trace"] = out["trace"]
            rows.append(row)
        return rows

    out_spec = config.get("output", {})
    path = out_spec.get("path")
    fmt = out_spec.get("format", "csv")

    def flush():
        # atomic per-point flush: partial results survive interruption
        text = _format_records(records, fmt)
        if path:
            tmp = Path(path).with_suffix(".tmp")
            tmp.write_text(text)
            tmp.replace(path)
        return text

    try:
        if args.jobs > 1 and len(points) > 1 and method not in BOUND_METHODS:
            with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
                for n, out in zip(points, pool.map(run_point,
                                                   [config] * len(points),
                                                   points)):
                    records.extend(record_rows(n, out))
                    flush()
        else:
            for n in points:
                out = run_point(config, max(points) if method in BOUND_METHODS
                                else n)
                records.extend(record_rows(n, out))
                flush()
                if method in BOUND_METHODS:
                    break
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    text = flush()
    if not path:
        sys.stdout.write(text)
    return 2 if failed else 0


def _format_records(records, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIELDS, extrasaction="ignore")
    writer.writeheader()
    for r in records:
        writer.writerow(r)
    return buf.getvalue()


def _read_records(path) -> list:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


def cmd_compare(args) -> int:
    tables = {}
    for path in args.files:
        for r in _read_records(path):
            try:
                n = int(r["n"])
            except (KeyError, ValueError):
                continue
            tables.setdefault(r["method"], {})[n] = float(r["value"])
    if not tables:
        print("usage error: no tabular records found", file=sys.stderr)
        return 1
    grids = [set(t) for t in tables.values()]
    common = set.intersection(*grids)
    if not common:
        print("grid mismatch: result files share no common n values",
              file=sys.stderr)
        return 1
    bound_methods = [m for m in tables if m.endswith("bounds")
                     or m == "ad_bounds_correlated"]
    bound = tables[bound_methods[0]] if bound_methods else None
    methods = sorted(tables)
    header = ["n"] + [f"{m}/n" for m in methods]
    if bound:
        header += [f"gap_to_bound({m})" for m in methods if m not in
                   bound_methods]
    print("\t".join(header))
    for n in sorted(common):
        row = [str(n)] + [f"{tables[m][n] / n:.8g}" for m in methods]
        if bound:
            row += [f"{bound[n] - tables[m][n]:.3g}" for m in methods
                    if m not in bound_methods]
        print("\t".join(row))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qfi-forge",
        description="Optimize quantum-metrology protocols and compute "
                    "fundamental QFI bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a scenario config")
    runp.add_argument("config")
    runp.add_argument("--override", action="append", metavar="KEY=VALUE",
                      help="override a config field (dotted path)")
    runp.add_argument("--jobs", type=int, default=1)
    runp.add_argument("--seed", type=int, default=None)
    runp.set_defaults(func=cmd_run)
    cmpp = sub.add_parser("compare", help="tabulate result files")
    cmpp.add_argument("files", nargs="+")
    cmpp.set_defaults(func=cmd_compare)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
