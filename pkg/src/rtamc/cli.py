"""Command-line front-end: batch verification and the results tables.

Two subcommands::

    rtamc verify MODEL.rta -q QUERIES.rtq [--robust] [...]
    rtamc reproduce-tables [--check] [--json] [...]

Exit codes: 0 verification completed (whatever the verdicts), 1 parse error,
2 engine error (resource caps), 3 usage error, 4 table check mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from .casestudies import (
    EXPECTED_VERDICTS,
    LipSyncConfig,
    PuriConfig,
    QUERY_LABELS,
    STREAMS,
    all_configs,
    build_lipsync,
    build_puri,
    builtin_queries,
)
from .dsl import ParseError, parse_model, parse_queries, render_model, render_query
from .engine import EngineError, SearchOptions, Verdict, check_query
from .model import ModelError, Network, compile_network
from .queries import Query, QueryError

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_ENGINE = 2
EXIT_USAGE = 3
EXIT_MISMATCH = 4


class _Usage(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we reserve 2
        raise _Usage(message)


def _build_parser() -> _ArgumentParser:
    p = _ArgumentParser(prog="rtamc", description=__doc__)
    sub = p.add_subparsers(dest="command")

    v = sub.add_parser("verify", help="run queries against a model")
    v.add_argument("model", nargs="?", help="model file (.rta)")
    v.add_argument("-q", "--queries", help="query file (.rtq)")
    v.add_argument("--builtin", help="puri:<2|3> or lipsync:<ideal|anchored|nonanchored>:<free|zero>")
    v.add_argument("--robust", action="store_true", help="robust (clock-drift) semantics")
    v.add_argument("--trace", action="store_true", help="print a witness trace for SAT results")
    v.add_argument("--stats", action="store_true", help="print search statistics")
    v.add_argument("--json", action="store_true", help="emit a JSON report")
    v.add_argument("--max-cycle-len", type=int, default=512)
    v.add_argument("--max-fixpoint-iters", type=int, default=4096)
    v.add_argument("--no-subsumption", action="store_true")
    v.add_argument("--jobs", type=int, default=1, help="parallel queries (default 1)")

    t = sub.add_parser("reproduce-tables", help="run the 60 bundled verdicts")
    t.add_argument("--check", action="store_true", help="compare against the expected cells")
    t.add_argument("--json", action="store_true", help="emit the cells as JSON")
    t.add_argument("--jobs", type=int, default=1)
    t.add_argument("--max-cycle-len", type=int, default=512)
    t.add_argument("--max-fixpoint-iters", type=int, default=4096)
    return p


def _load_builtin(token: str):
    parts = token.split(":")
    if parts[0] == "puri" and len(parts) == 2 and parts[1].isdigit():
        cfg = PuriConfig(int(parts[1]))
        return build_puri(cfg), builtin_queries(cfg)
    if parts[0] == "lipsync" and len(parts) == 3:
        stream, start = parts[1], parts[2]
        if stream in STREAMS and start in ("free", "zero"):
            cfg = LipSyncConfig(stream, start == "free")
            return build_lipsync(cfg), builtin_queries(cfg)
    raise _Usage(f"unknown builtin '{token}'")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _run_one(net: Network, q: Query, mode: str, opts: SearchOptions) -> Verdict:
    return check_query(net, q, mode, opts)


def _verify_worker(task):
    net, q, mode, opts = task
    try:
        verdict = _run_one(net, q, mode, opts)
    except (QueryError, ModelError, EngineError) as exc:
        return ("error", str(exc))
    return ("ok", verdict)


def _tables_worker(task):
    cfg, mode, opts = task
    from .casestudies import lipsync_queries
    from .engine import reach_standard_multi
    from .robust import reach_robust_multi

    runner = reach_standard_multi if mode == "standard" else reach_robust_multi
    net = build_lipsync(cfg)
    goals = [q.body for q in lipsync_queries()]
    found, stats = runner(compile_network(net), goals, opts)
    return found, stats


def _parallel_map(fn, items, jobs: int):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    import multiprocessing as mp

    with mp.Pool(min(jobs, len(items))) as pool:
        return pool.map(fn, items)


def _cmd_verify(args) -> int:
    if args.builtin and args.model:
        raise _Usage("give either a model file or --builtin, not both")
    if not args.builtin and not args.model:
        raise _Usage("a model file or --builtin is required")

    if args.builtin:
        net, queries = _load_builtin(args.builtin)
        model_text = render_model(net)
        model_name = f"builtin:{args.builtin}"
    else:
        try:
            with open(args.model, "r", encoding="utf-8", errors="replace") as fh:
                model_text = fh.read()
        except OSError as exc:
            raise _Usage(f"cannot read model file: {exc}")
        model_name = args.model
        try:
            net = parse_model(model_text)
        except ParseError as exc:
            print(f"{args.model}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
            return EXIT_PARSE
        queries = None

    if args.queries:
        try:
            with open(args.queries, "r", encoding="utf-8", errors="replace") as fh:
                qtext = fh.read()
        except OSError as exc:
            raise _Usage(f"cannot read query file: {exc}")
        try:
            queries = parse_queries(qtext, net)
        except ParseError as exc:
            print(f"{args.queries}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
            return EXIT_PARSE
    if queries is None:
        raise _Usage("a query file is required (-q) unless --builtin provides one")

    opts = SearchOptions(
        trace=args.trace,
        subsumption=not args.no_subsumption,
        max_cycle_len=args.max_cycle_len,
        max_fixpoint_iters=args.max_fixpoint_iters,
    )
    mode = "robust" if args.robust else "standard"

    outcomes = _parallel_map(
        _verify_worker, [(net, q, mode, opts) for q in queries], args.jobs
    )
    records = []
    code = EXIT_OK
    for k, (q, outcome) in enumerate(zip(queries, outcomes), start=1):
        rec = {"index": k, "query": render_query(q), "status": None,
               "elapsed_ms": None, "states_stored": None, "states_explored": None,
               "stable_zones_added": None}
        if outcome[0] == "error":
            if not args.json:
                print(f"Q{k}: ERROR ({outcome[1]})")
            rec["status"] = "ERROR"
            rec["error"] = outcome[1]
            code = EXIT_ENGINE
            records.append(rec)
            continue
        verdict = outcome[1]
        st = verdict.stats
        rec.update(
            status=verdict.status,
            elapsed_ms=round(st.elapsed * 1000.0, 3),
            states_stored=st.states_stored,
            states_explored=st.states_explored,
            stable_zones_added=st.stable_zones_added,
        )
        records.append(rec)
        if not args.json:
            print(f"Q{k}: {verdict.status} ({rec['elapsed_ms']} ms, {st.states_stored} states)")
            if args.stats:
                print(
                    f"    explored={st.states_explored} stable_zones={st.stable_zones_added}"
                    f" cycles={st.cycles_found} long_cycles_skipped={st.cycles_skipped_long}"
                    f" fixpoint_cache_hits={st.stable_zone_cache_hits}"
                    f" range_disabled={st.range_disabled}"
                )
            if args.trace and verdict.trace is not None:
                for label, state in verdict.trace:
                    print(f"    -> {label}")
                    print(f"       {state.pretty(net)}")

    if args.json:
        report = {
            "tool": "rtamc",
            "version": __version__,
            "mode": mode,
            "model": model_name,
            "model_digest": _digest(model_text),
            "queries": records,
        }
        print(json.dumps(report, indent=2))
    return code


# ---------------------------------------------------------------------------
# reproduce-tables
# ---------------------------------------------------------------------------

ROW_TITLES = {
    "s07": "Init Sound Synch(s07)",
    "v06": "Init Video Synch(v06)",
    "v07": "Video Synch (v07)",
    "vw5": "Video Late (vw5)",
    "sw5": "Sound Late (sw5)",
}


def _table_cells(opts: SearchOptions, jobs: int = 1):
    """Run the 6 configurations under both semantics; 5 goals share one search."""
    tasks = [
        (cfg, mode, opts)
        for cfg in all_configs()
        for mode in ("standard", "robust")
    ]
    results = _parallel_map(_tables_worker, tasks, jobs)
    cells = []
    for (cfg, mode, _), (found, stats) in zip(tasks, results):
        for label, sat in zip(QUERY_LABELS, found):
            cells.append(
                {
                    "stream": cfg.stream,
                    "start": "free" if cfg.free_start else "zero",
                    "query": label,
                    "mode": mode,
                    "status": "SAT" if sat else "UNSAT",
                    "cell": "T" if sat else "F",
                    "expected": "T"
                    if EXPECTED_VERDICTS[(cfg.stream, cfg.free_start, label, mode)]
                    else "F",
                    "elapsed_ms": round(stats.elapsed * 1000.0, 3),
                    "states_stored": stats.states_stored,
                    "states_explored": stats.states_explored,
                    "stable_zones_added": stats.stable_zones_added,
                }
            )
    return cells


def _print_tables(cells) -> None:
    by_key = {
        (c["stream"], c["start"], c["query"], c["mode"]): c for c in cells
    }
    for start, title in (("free", "streams with possible initial delay"),
                         ("zero", "streams without initial delay")):
        print(f"\n{title}  (cell: T = error location reachable/SAT, F = not/UNSAT)")
        header = f"{'Error location':24s}" + "".join(f"{s:>14s}" for s in STREAMS)
        print(header)
        for mode, star in (("standard", ""), ("robust", "*")):
            for label in QUERY_LABELS:
                row = f"{ROW_TITLES[label] + star:24s}"
                for stream in STREAMS:
                    c = by_key[(stream, start, label, mode)]
                    row += f"{c['cell']:>4s} {c['elapsed_ms'] / 1000.0:8.1f}s"
                print(row)


def _cmd_tables(args) -> int:
    opts = SearchOptions(
        max_cycle_len=args.max_cycle_len, max_fixpoint_iters=args.max_fixpoint_iters
    )
    try:
        cells = _table_cells(opts, args.jobs)
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    if args.json:
        print(json.dumps({"tool": "rtamc", "version": __version__, "cells": cells}, indent=2))
    else:
        _print_tables(cells)
    if args.check:
        bad = [c for c in cells if c["cell"] != c["expected"]]
        if bad:
            print(f"\n{len(bad)} cell(s) differ from the expected verdicts:")
            for c in bad:
                print(
                    f"  {c['stream']}/{c['start']} {c['query']} [{c['mode']}]: "
                    f"got {c['cell']}, expected {c['expected']}"
                )
            return EXIT_MISMATCH
        print(f"\nall {len(cells)} cells match the expected verdicts")
    return EXIT_OK


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "reproduce-tables":
            return _cmd_tables(args)
        raise _Usage("a subcommand is required (verify, reproduce-tables)")
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
