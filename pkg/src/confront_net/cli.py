"""Command-line interface.

Subcommands: extract, stats, sweep, communities, dump-normalization.
Exit codes: 0 success, 1 usage error, 2 data error. Every file-writing
run drops a manifest (inputs, hashes, parameters) and stamps its hash
into the produced files; re-running with identical inputs reproduces
every output byte-for-byte (the manifest's timestamp aside).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .community import (CommunityNetwork, CommunityPartition, community_network,
                        community_stats, louvain, size_gini)
from .data_model import Database, load_database, validate_database
from .errors import ConfrontNetError, EmptyResult, MalformedRecord
from .extract import (METHOD_CODES, ExtractionMethod, Scope, build_full_graph,
                      extract)
from .graph import ConfrontGraph
from .metrics import GraphSummary, distance_profile, summarize
from .normalize import TABLE_VERSION, merge_equal_objects, normalization_rows
from .serialize import (atomic_write_bytes, cache_bytes, community_gexf_bytes,
                        gexf_bytes, graphml_bytes, read_cache)
from .sweep import default_k_range, select_best, sweep_k

CACHE_SUFFIX = ".graph.json.gz"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _thread_count() -> int:
    raw = os.environ.get("CONFRONT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        print(f"warning: ignoring non-integer CONFRONT_THREADS={raw!r}",
              file=sys.stderr)
        return 1


def _add_db_arguments(parser: argparse.ArgumentParser,
                      required: bool = True) -> None:
    parser.add_argument("--objects", type=Path, required=required,
                        help="objects file (CSV or JSON)")
    parser.add_argument("--relations", type=Path, required=required,
                        help="relations file (CSV or JSON)")
    parser.add_argument("--segments", type=Path, default=None,
                        help="optional segments CSV")


def _load_merged(args: argparse.Namespace) -> Database:
    db = load_database(args.objects, args.relations, args.segments)
    warnings = validate_database(db)
    if warnings:
        if getattr(args, "warnings", False):
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
        else:
            print(f"note: {len(warnings)} data warnings "
                  f"(re-run with --warnings for details)", file=sys.stderr)
    return merge_equal_objects(db)


def _method_from_args(code: str, args: argparse.Namespace,
                      parser: argparse.ArgumentParser) -> ExtractionMethod:
    method = ExtractionMethod.from_code(
        code, k=args.k if args.k is not None else 0,
        component_threshold=args.threshold)
    if method.scope is Scope.TOP_K and args.k is None:
        parser.error(f"--k is required for method {code}")
    return method


def _input_manifest(args: argparse.Namespace) -> dict[str, str]:
    inputs = {}
    for name in ("objects", "relations", "segments", "graph", "graphs"):
        value = getattr(args, name, None)
        if value is not None:
            inputs[name] = str(value)
    return inputs


def _hash_inputs(inputs: dict[str, str]) -> dict[str, str]:
    hashes = {}
    for name, value in sorted(inputs.items()):
        path = Path(value)
        if path.is_file():
            hashes[name] = hashlib.sha256(path.read_bytes()).hexdigest()
        elif path.is_dir():
            digest = hashlib.sha256()
            for child in sorted(path.glob(f"*{CACHE_SUFFIX}")):
                digest.update(child.name.encode())
                digest.update(child.read_bytes())
            hashes[name] = digest.hexdigest()
    return hashes


def build_manifest(command: str, args: argparse.Namespace,
                   methods: list[str], parameters: dict) -> dict:
    inputs = _input_manifest(args)
    manifest = {
        "tool": "confront-net",
        "version": __version__,
        "table_version": TABLE_VERSION,
        "command": command,
        "inputs": inputs,
        "input_hashes": _hash_inputs(inputs),
        "methods": methods,
        "parameters": parameters,
    }
    canonical = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    manifest["manifest_hash"] = hashlib.sha256(canonical.encode()).hexdigest()
    return manifest


def _write_manifest(manifest: dict, path: Path) -> None:
    # `created` sits outside the hash: it is the one non-reproducible field.
    payload = dict(manifest)
    payload["created"] = datetime.now(timezone.utc).isoformat(
        timespec="seconds")
    atomic_write_bytes(path, json.dumps(payload, indent=2,
                                        sort_keys=True).encode() + b"\n")


# --- CSV rendering --------------------------------------------------------

STATS_COLUMNS = ("method", "n", "m", "delta", "properties", "coverage",
                 "components", "d_max", "d_harm", "rho_d")


def _fmt_float(value: float, digits: int) -> str:
    if math.isnan(value):
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}f}"


def _stats_row(label: str, s: GraphSummary) -> list[str]:
    return [label, str(s.n), str(s.m), _fmt_float(s.delta, 4),
            str(s.property_count),
            _fmt_float(100.0 * s.property_coverage, 2),
            str(s.components), str(s.d_max), _fmt_float(s.d_harm, 2),
            _fmt_float(s.rho_d, 2)]


def _render_csv(header: tuple[str, ...], rows: list[list[str]],
                manifest_hash: str | None) -> bytes:
    buf = io.StringIO()
    if manifest_hash is not None:
        buf.write(f"# manifest: {manifest_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _emit(data: bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        atomic_write_bytes(out, data)


# --- subcommands ----------------------------------------------------------

def cmd_extract(args: argparse.Namespace,
                parser: argparse.ArgumentParser) -> int:
    codes = list(METHOD_CODES) if args.all else [args.method]
    methods = [_method_from_args(code, args, parser) for code in codes]
    db = _load_merged(args)
    manifest = build_manifest(
        "extract", args, codes,
        {"k": args.k, "threshold": args.threshold, "format": args.format})
    mhash = manifest["manifest_hash"]
    args.out.mkdir(parents=True, exist_ok=True)

    def run(method: ExtractionMethod) -> ConfrontGraph:
        return extract(db, method)

    threads = _thread_count()
    if threads > 1 and len(methods) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            graphs = list(pool.map(run, methods))
    else:
        graphs = [run(method) for method in methods]

    render = graphml_bytes if args.format == "graphml" else gexf_bytes
    rows = []
    if args.all:
        rows.append(_stats_row("full", summarize(build_full_graph(db),
                                                 db.property_baseline)))
    for method, g in zip(methods, graphs):
        atomic_write_bytes(args.out / f"{method.code}.{args.format}",
                           render(g, mhash))
        atomic_write_bytes(args.out / f"{method.code}{CACHE_SUFFIX}",
                           cache_bytes(g, mhash))
        summary = summarize(g, db.property_baseline)
        rows.append(_stats_row(method.code, summary))
        print(f"{method.code}: n={summary.n} m={summary.m} "
              f"components={summary.components}")
    if args.all:
        atomic_write_bytes(args.out / "stats.csv",
                           _render_csv(STATS_COLUMNS, rows, mhash))
    _write_manifest(manifest, args.out / "manifest.json")
    return 0


def cmd_stats(args: argparse.Namespace,
              parser: argparse.ArgumentParser) -> int:
    profiles: list[tuple[str, ConfrontGraph]] = []
    rows: list[list[str]] = []
    if args.graphs is not None:
        caches = sorted(args.graphs.glob(f"*{CACHE_SUFFIX}"))
        if not caches:
            raise MalformedRecord(
                f"no {CACHE_SUFFIX} files in {args.graphs}")
        baseline = args.baseline
        for path in caches:
            g = read_cache(path)
            label = path.name[:-len(CACHE_SUFFIX)]
            rows.append(_stats_row(label, summarize(g, baseline)))
            profiles.append((label, g))
        methods = [label for label, _ in profiles]
        parameters: dict = {"baseline": args.baseline}
    else:
        if args.objects is None or args.relations is None:
            parser.error("either --graphs or --objects/--relations "
                         "is required")
        codes = list(METHOD_CODES) if args.all else [args.method]
        if codes == [None]:
            parser.error("either --method or --all is required with "
                         "--objects/--relations")
        methods_ = [_method_from_args(code, args, parser) for code in codes]
        db = _load_merged(args)
        full = build_full_graph(db)
        rows.append(_stats_row("full", summarize(full, db.property_baseline)))
        profiles.append(("full", full))
        for method in methods_:
            g = extract(db, method)
            rows.append(_stats_row(method.code,
                                   summarize(g, db.property_baseline)))
            profiles.append((method.code, g))
        methods = ["full"] + codes
        parameters = {"k": args.k, "threshold": args.threshold}
    manifest = build_manifest("stats", args, methods, parameters)
    mhash = manifest["manifest_hash"]
    empty = [label for label, g in profiles if g.n == 0]
    for label in empty:
        print(f"warning: graph {label!r} is empty; reporting zeros",
              file=sys.stderr)
    _emit(_render_csv(STATS_COLUMNS, rows,
                      mhash if args.out is not None else None), args.out)
    if args.out is not None:
        _write_manifest(manifest,
                        args.out.with_name(args.out.name + ".manifest.json"))
    if args.profile:
        if args.out is None:
            parser.error("--profile requires --out")
        for label, g in profiles:
            profile_rows = []
            try:
                profile = distance_profile(g)
            except ConfrontNetError:
                continue
            for b in profile.buckets:
                h = "inf" if math.isinf(b.graph_distance) else (
                    str(int(b.graph_distance)))
                profile_rows.append([h, str(b.count),
                                     _fmt_float(b.mean_spatial, 3),
                                     _fmt_float(b.std_spatial, 3)])
            atomic_write_bytes(
                args.out.parent / f"profile_{label}.csv",
                _render_csv(("graph_distance", "pairs", "mean_spatial_m",
                             "std_spatial_m"), profile_rows, mhash))
    return 0


def cmd_sweep(args: argparse.Namespace,
              parser: argparse.ArgumentParser) -> int:
    base = ExtractionMethod.from_code(f"{args.base}_k",
                                      component_threshold=args.threshold)
    db = _load_merged(args)
    if args.k_range is None:
        k_values = list(default_k_range(db))
    else:
        k_values = _parse_range(args.k_range, parser)
    points = sweep_k(db, base, k_values)
    manifest = build_manifest(
        "sweep", args, [f"{args.base}_k"],
        {"k_range": f"{k_values[0]}..{k_values[-1]}",
         "threshold": args.threshold})
    rows = [[str(p.k), str(p.coverage), _fmt_float(p.rho, 4),
             str(p.summary.n), str(p.summary.m), str(p.summary.components),
             _fmt_float(p.summary.d_harm, 2)] for p in points]
    _emit(_render_csv(("k", "coverage", "rho", "n", "m", "components",
                       "d_harm"), rows,
                      manifest["manifest_hash"] if args.out else None),
          args.out)
    if args.out is not None:
        _write_manifest(manifest,
                        args.out.with_name(args.out.name + ".manifest.json"))
    best = select_best(points)
    print(f"selected k={best.k} coverage={best.coverage} "
          f"rho={_fmt_float(best.rho, 4) or 'nan'}")
    return 0


def _parse_range(text: str, parser: argparse.ArgumentParser) -> list[int]:
    try:
        low_s, high_s = text.split("..", 1)
        low, high = int(low_s), int(high_s)
    except ValueError:
        parser.error(f"invalid --k-range {text!r} (expected A..B)")
    if low < 0 or high < low:
        parser.error(f"invalid --k-range {text!r} (need 0 <= A <= B)")
    return list(range(low, high + 1))


def cmd_communities(args: argparse.Namespace,
                    parser: argparse.ArgumentParser) -> int:
    if args.graph is not None:
        g = read_cache(args.graph)
        methods = [g.method.code if g.method else "unknown"]
    else:
        if args.objects is None or args.relations is None:
            parser.error("either --graph or --objects/--relations "
                         "is required")
        if args.method is None:
            parser.error("--method is required with --objects/--relations")
        method = _method_from_args(args.method, args, parser)
        db = _load_merged(args)
        g = extract(db, method)
        methods = [method.code]
    if g.n == 0:
        raise EmptyResult("cannot partition an empty graph")
    manifest = build_manifest(
        "communities", args, methods,
        {"seed": args.seed, "k": getattr(args, "k", None),
         "threshold": getattr(args, "threshold", None)})
    mhash = manifest["manifest_hash"]
    args.out.mkdir(parents=True, exist_ok=True)

    partition = louvain(g, seed=args.seed)
    stats = community_stats(g, partition)
    network = community_network(g, partition)

    atomic_write_bytes(args.out / "partition.csv", _render_csv(
        ("vertex_id", "community"),
        [[vid, str(c)] for vid, c in partition.assignment.items()], mhash))
    atomic_write_bytes(args.out / "community_stats.csv", _render_csv(
        ("community", "n", "m", "delta", "properties", "share", "d_max",
         "d_harm", "rho_d"),
        [[str(r.community), str(r.n), str(r.m), _fmt_float(r.delta, 4),
          str(r.property_count), _fmt_float(100.0 * r.property_share, 2),
          str(r.d_max), _fmt_float(r.d_harm, 2), _fmt_float(r.rho_d, 2)]
         for r in stats.rows], mhash))
    atomic_write_bytes(args.out / "community_network.gexf",
                       community_gexf_bytes(network, mhash))
    atomic_write_bytes(args.out / "composition_kinds.csv", _render_csv(
        ("community", "kind", "count"),
        [[str(node.community), kind, str(count)] for node in network.nodes
         for kind, count in node.kind_counts.items()], mhash))
    atomic_write_bytes(args.out / "composition_parishes.csv", _render_csv(
        ("community", "parish", "count"),
        [[str(node.community), parish, str(count)]
         for node in network.nodes
         for parish, count in node.parish_counts.items()], mhash))
    atomic_write_bytes(args.out / "composition_walls.csv", _render_csv(
        ("community", "inside", "outside", "unknown"),
        [[str(node.community), str(node.walls_inside),
          str(node.walls_outside), str(node.walls_unknown)]
         for node in network.nodes], mhash))
    _write_manifest(manifest, args.out / "manifest.json")

    levels = " -> ".join(f"{q:.4f}" for q in partition.level_modularities)
    print(f"communities={partition.community_count()} "
          f"Q={partition.modularity:.4f} "
          f"size_gini={size_gini(partition):.4f}")
    if levels:
        print(f"level modularity: {levels}")
    return 0


def cmd_dump_normalization(args: argparse.Namespace,
                           parser: argparse.ArgumentParser) -> int:
    rows = [[r["raw_type"], r["translation"], r["default"], r["surface"],
             r["street"]] for r in normalization_rows()]
    buf = io.StringIO()
    buf.write(f"# normalization table v{TABLE_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("raw_type", "translation", "default", "surface",
                     "street"))
    writer.writerows(rows)
    _emit(buf.getvalue().encode(), args.out)
    return 0


# --- parser wiring --------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="confront-net",
                     description="Extract and analyse spatial confrontation "
                                 "networks from land-register databases.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_extract = sub.add_parser(
        "extract", help="extract graphs for one or all method codes")
    _add_db_arguments(p_extract)
    group = p_extract.add_mutually_exclusive_group(required=True)
    group.add_argument("--method", choices=METHOD_CODES,
                       help="method code to extract")
    group.add_argument("--all", action="store_true",
                       help="extract all 16 methods")
    p_extract.add_argument("--k", type=int, default=None,
                           help="number of longest streets for _k methods")
    p_extract.add_argument("--threshold", type=int, default=25,
                           help="minimum component size (default 25)")
    p_extract.add_argument("--out", type=Path, required=True,
                           help="output directory")
    p_extract.add_argument("--format", choices=("graphml", "gexf"),
                           default="graphml", help="graph file format")
    p_extract.add_argument("--warnings", action="store_true",
                           help="print every data warning")
    p_extract.set_defaults(func=cmd_extract)

    p_stats = sub.add_parser("stats",
                             help="Table-style statistics CSV per method")
    _add_db_arguments(p_stats, required=False)
    p_stats.add_argument("--graphs", type=Path, default=None,
                         help=f"directory of *{CACHE_SUFFIX} files")
    p_stats.add_argument("--baseline", type=int, default=None,
                         help="coverage denominator for --graphs mode")
    p_stats.add_argument("--method", choices=METHOD_CODES, default=None)
    p_stats.add_argument("--all", action="store_true",
                         help="compute all 16 methods inline")
    p_stats.add_argument("--k", type=int, default=None)
    p_stats.add_argument("--threshold", type=int, default=25)
    p_stats.add_argument("--out", type=Path, default=None,
                         help="output CSV (default stdout)")
    p_stats.add_argument("--profile", action="store_true",
                         help="also write per-method distance profiles")
    p_stats.add_argument("--warnings", action="store_true")
    p_stats.set_defaults(func=cmd_stats)

    p_sweep = sub.add_parser("sweep",
                             help="sweep k for a TopK method family")
    _add_db_arguments(p_sweep)
    p_sweep.add_argument("--base", choices=("RFW", "EFW", "RFS", "EFS"),
                         required=True, help="method family to sweep")
    p_sweep.add_argument("--k-range", default=None, metavar="A..B",
                         help="inclusive k range (default 0..10%% of streets)")
    p_sweep.add_argument("--threshold", type=int, default=25)
    p_sweep.add_argument("--out", type=Path, default=None,
                         help="output CSV (default stdout)")
    p_sweep.add_argument("--warnings", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_comm = sub.add_parser("communities",
                            help="Louvain partition and community reports")
    _add_db_arguments(p_comm, required=False)
    p_comm.add_argument("--graph", type=Path, default=None,
                        help=f"graph cache file (*{CACHE_SUFFIX})")
    p_comm.add_argument("--method", choices=METHOD_CODES, default=None)
    p_comm.add_argument("--k", type=int, default=None)
    p_comm.add_argument("--threshold", type=int, default=25)
    p_comm.add_argument("--seed", type=int, default=0,
                        help="Louvain shuffle seed (default 0)")
    p_comm.add_argument("--out", type=Path, required=True,
                        help="output directory")
    p_comm.add_argument("--warnings", action="store_true")
    p_comm.set_defaults(func=cmd_communities)

    p_dump = sub.add_parser("dump-normalization",
                            help="print the 42-entry normalization table")
    p_dump.add_argument("--out", type=Path, default=None,
                        help="output CSV (default stdout)")
    p_dump.set_defaults(func=cmd_dump_normalization)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_help()
        return 1
    sub = _subparser_for(parser, args.command)
    try:
        return args.func(args, sub)
    except SystemExit as exc:  # parser.error inside a subcommand
        return int(exc.code or 0)
    except ConfrontNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _subparser_for(parser: _Parser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise AssertionError("subparsers are always configured")


if __name__ == "__main__":
    sys.exit(main())
