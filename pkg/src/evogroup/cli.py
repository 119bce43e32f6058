"""Command line entry point: ``evogroup run|evaluate|synth|oracle``.

Exit codes: 0 success, 1 input or parameter error, 2 pipeline abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

from .model import DEFAULT_PARAMS, ParamError, Params, validate_params

EXIT_OK, EXIT_INPUT, EXIT_ABORT = 0, 1, 2

# flag name -> Params field
PARAM_FLAGS = {
    "w": "w", "kc": "k_c", "mc": "m_c", "d": "d", "kp": "k_p", "mp": "m_p",
    "mg": "m_g", "kg": "k_g", "eps": "eps", "minpts": "min_pts",
}
_INT_FIELDS = {"w", "k_c", "m_c", "k_p", "m_p", "k_g", "min_pts"}
_OPTIONS = {"mode", "workers", "tick_seconds", "strict_paper_zones", "backend", "project"}


class ConfigError(ValueError):
    pass


def read_config(path: str) -> Dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        key = PARAM_FLAGS.get(key, key)
        if key not in DEFAULT_PARAMS.as_dict() and key not in _OPTIONS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _truthy(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def resolve(args) -> tuple:
    """Merge defaults, config file and flags into (Params, options)."""
    values = DEFAULT_PARAMS.as_dict()
    options = {"mode": "serial", "workers": 1, "tick_seconds": 1.0,
               "strict_paper_zones": False, "backend": "process", "project": False}
    if getattr(args, "config", None):
        for key, value in read_config(args.config).items():
            if key in values:
                values[key] = value
            else:
                options[key] = value
    for flag, name in PARAM_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    for key in _OPTIONS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            options[key] = v
    try:
        params = Params(**{k: (int(v) if k in _INT_FIELDS else float(v)) for k, v in values.items()})
        options["workers"] = int(options["workers"])
        options["tick_seconds"] = float(options["tick_seconds"])
    except ValueError as exc:
        raise ConfigError(f"bad value: {exc}") from exc
    options["strict_paper_zones"] = _truthy(options["strict_paper_zones"])
    options["project"] = _truthy(options["project"])
    if options["mode"] not in ("serial", "mtod"):
        raise ConfigError(f"mode must be serial or mtod, not {options['mode']!r}")
    if options["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    return validate_params(params), options


def _add_param_flags(sp) -> None:
    sp.add_argument("--config", help="key=value file; flags override it")
    for flag, name in PARAM_FLAGS.items():
        kind = int if name in _INT_FIELDS else float
        sp.add_argument(f"--{flag}", type=kind, default=None, help=f"{name}")
    sp.add_argument("--tick-seconds", dest="tick_seconds", type=float, default=None)
    sp.add_argument("--project", action="store_true", help="project lon/lat columns to meters")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="evogroup", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="mine a trajectory CSV, write NDJSON")
    run.add_argument("input")
    run.add_argument("-o", "--output", help="NDJSON destination (default stdout)")
    run.add_argument("--mode", choices=("serial", "mtod"), default=None)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--backend", choices=("process", "thread"), default=None)
    run.add_argument("--strict-paper-zones", dest="strict_paper_zones", action="store_true")
    run.add_argument("--dot", help="write the evolving groups as a DOT graph")
    _add_param_flags(run)

    ev = sub.add_parser("evaluate", help="precision/recall against a group file")
    ev.add_argument("detected", help="NDJSON from run, or a group file")
    ev.add_argument("truth", help="group file")
    ev.add_argument("--threshold", type=float, default=0.5)

    sy = sub.add_parser("synth", help="generate a CSV from a JSON script")
    sy.add_argument("script")
    sy.add_argument("-o", "--output", help="CSV destination (default stdout)")
    sy.add_argument("--objects", type=int, default=None)
    sy.add_argument("--ticks", type=int, default=None)
    sy.add_argument("--seed", type=int, default=None)

    orc = sub.add_parser("oracle", help="brute-force closed crowds and aggregations of one window")
    orc.add_argument("input")
    orc.add_argument("--end", type=int, required=True, help="last tick of the window")
    _add_param_flags(orc)
    return ap


def cmd_run(args, out) -> int:
    from .ingest import IngestError, IngestStats, ingest
    from .mtod import MtodError
    from .pipeline import Pipeline, dumps, run_records
    from .evolution import chains_to_dot

    try:
        params, opts = resolve(args)
        stats = IngestStats()
        ticks = ingest(args.input, tick_seconds=opts["tick_seconds"], project=opts["project"],
                       stats=stats)
        first = next(ticks, None)
    except (ConfigError, ParamError, IngestError) as exc:
        print(f"evogroup: {exc}", file=sys.stderr)
        return EXIT_INPUT

    def all_ticks():
        if first is not None:
            yield first
            yield from ticks

    sink = open(args.output, "w", encoding="utf-8") if args.output else out
    try:
        with Pipeline(params, opts["mode"], opts["workers"], opts["backend"],
                      opts["strict_paper_zones"]) as pipe:
            for rec in run_records(pipe, all_ticks()):
                sink.write(dumps(rec) + "\n")
    except MtodError as exc:
        print(f"evogroup: pipeline aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except IngestError as exc:
        print(f"evogroup: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if sink is not out:
            sink.close()
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(chains_to_dot(pipe.all_chains))
    print(f"evogroup: {stats.rows} rows, {stats.malformed} malformed, "
          f"{stats.duplicates} duplicates, {stats.ticks} ticks", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args, out) -> int:
    from .evaluate import AnnotationError, evaluate, groups_from_records, read_group_file

    try:
        truth = read_group_file(args.truth)
        with open(args.detected, encoding="utf-8") as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            detected = groups_from_records(text.splitlines())
            truth = [g for groups in truth.values() for g in groups]
        else:
            detected = read_group_file(args.detected)
        res = evaluate(detected, truth, args.threshold)
    except (AnnotationError, OSError) as exc:
        print(f"evogroup: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(json.dumps(res.as_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_synth(args, out) -> int:
    from .synth import synth

    try:
        with open(args.script, encoding="utf-8") as fh:
            script = json.load(fh)
        points = synth(script, args.objects, args.ticks, args.seed)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"evogroup: bad script: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sink = open(args.output, "w", encoding="utf-8") if args.output else out
    try:
        sink.write("object_id,time,x,y\n")
        for q in points:
            sink.write(f"{q.object_id},{q.t},{q.x!r},{q.y!r}\n")
    finally:
        if sink is not out:
            sink.close()
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    from .clustering import cluster_snapshot
    from .ingest import IngestError, ingest
    from .model import Window, format_key
    from .oracle import OracleSizeError, brute_force_aggregation, brute_force_closed_crowds

    try:
        params, opts = resolve(args)
        window = Window(max(0, args.end - params.w + 1), args.end)
        by_tick = {}
        for t, points in ingest(args.input, tick_seconds=opts["tick_seconds"],
                                project=opts["project"]):
            if t in window:
                by_tick[t] = cluster_snapshot(points, params)
        if not by_tick:
            raise ConfigError("window holds no ticks")
        crowds = brute_force_closed_crowds(by_tick, params, window)
        for cr in sorted(crowds, key=lambda c: c.keys):
            agg = brute_force_aggregation(cr, params)
            out.write(json.dumps({
                "crowd": [format_key(k) for k in cr.keys],
                "aggregation": None if agg is None else {
                    "clusters": [format_key(k) for k in agg.keys],
                    "group": sorted(map(str, agg.group)),
                },
            }, sort_keys=True) + "\n")
    except (ConfigError, ParamError, IngestError, OracleSizeError) as exc:
        print(f"evogroup: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "evaluate": cmd_evaluate, "synth": cmd_synth,
               "oracle": cmd_oracle}[args.command]
    try:
        return handler(args, out)
    except Exception as exc:  # last resort: unexpected failure inside the pipeline
        print(f"evogroup: aborted: {exc!r}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
