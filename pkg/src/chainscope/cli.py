"""Command-line front end.

    chainscope fixture    --seed N --out DIR [--cities N --firms N --links N]
    chainscope ingest     --cities F --firms F --links F --regions F
                          --sectors F [--percent]
    chainscope chains     --in DIR --out chains.csv
    chainscope graph      --in DIR --orientation cee|eu|pc|oe|all
                          --format graphml|dot|edgelist --out FILE
    chainscope metrics    --graph FILE --out centrality.csv
    chainscope morphology --in chains.csv --out census.json
                          [--table size --cities cities.csv]
    chainscope ca         --table FILE --axes K --out ca.json
    chainscope run        --config FILE --out DIR

Exit codes: 0 success, 1 validation failure, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ca import ContingencyTable, ca_result_json, fit_ca
from .chains import build_chains, read_chains_csv, write_chains_csv
from .citygraph import build_graph, export_graph, import_graph
from .errors import ChainscopeError, DatasetValidationError, StageFailure
from .ingest import generate_fixture, load_dataset, load_dataset_dir
from .metrics import centrality_report, write_centrality_csv
from .model import FORCE_MODE_RATIO, FORCE_MODES
from .morphology import census, structure_by_size
from .report import ORIENTATION_LABELS, parse_config_file, run_pipeline
from .tables import load_table_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainscope",
        description="capital-control chain analysis over city networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="emit a seeded synthetic dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cities", type=int, default=20)
    p.add_argument("--firms", type=int, default=60)
    p.add_argument("--links", type=int, default=120)

    p = sub.add_parser("ingest", help="load and validate a dataset")
    p.add_argument("--cities", required=True)
    p.add_argument("--firms", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--sectors", required=True)
    p.add_argument("--percent", action="store_true",
                   help="participation column is percentages in [0, 100]")
    p.add_argument("--force-mode", choices=FORCE_MODES,
                   default=FORCE_MODE_RATIO)

    p = sub.add_parser("chains", help="decompose a dataset into chains")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="dataset directory with the canonical file names")
    p.add_argument("--out", required=True)
    p.add_argument("--percent", action="store_true")
    p.add_argument("--force-mode", choices=FORCE_MODES,
                   default=FORCE_MODE_RATIO)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("graph", help="build and export one city graph")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--orientation",
                   choices=[*ORIENTATION_LABELS, "all"], default="all")
    p.add_argument("--format", choices=["graphml", "dot", "edgelist"],
                   default="graphml")
    p.add_argument("--out", required=True)
    p.add_argument("--percent", action="store_true")
    p.add_argument("--force-mode", choices=FORCE_MODES,
                   default=FORCE_MODE_RATIO)

    p = sub.add_parser("metrics", help="centrality report for a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("morphology", help="classify chain graph structures")
    p.add_argument("--in", dest="chains_csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--table", choices=["size"],
                   help="emit the structure-by-size cross-tab instead")
    p.add_argument("--cities", help="cities.csv, required with --table size")
    p.add_argument("--regions", help="country_regions.csv for city loading")

    p = sub.add_parser("ca", help="correspondence analysis of a table")
    p.add_argument("--table", required=True)
    p.add_argument("--axes", type=int, default=2)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="full pipeline into a report bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_fixture(args) -> int:
    dataset, _ = generate_fixture(args.seed, args.cities, args.firms,
                                  args.links, out_dir=args.out)
    print("fixture written to %s: %d cities, %d firms, %d links"
          % (args.out, *dataset.counts))
    return 0


def _cmd_ingest(args) -> int:
    dataset = load_dataset(args.cities, args.firms, args.links,
                           args.regions, args.sectors,
                           percent=args.percent, force_mode=args.force_mode)
    print("dataset valid: %d cities, %d firms, %d links" % dataset.counts)
    return 0


def _cmd_chains(args) -> int:
    dataset = load_dataset_dir(args.in_dir, percent=args.percent,
                               force_mode=args.force_mode)
    decomposition = build_chains(dataset, workers=args.workers)
    write_chains_csv(decomposition.chains, args.out)
    print(f"{len(decomposition.chains)} chains written to {args.out}")
    for cycle in decomposition.cycles:
        print("warning: ownership cycle excluded: " + " <-> ".join(cycle),
              file=sys.stderr)
    return 0


def _cmd_graph(args) -> int:
    dataset = load_dataset_dir(args.in_dir, percent=args.percent,
                               force_mode=args.force_mode)
    decomposition = build_chains(dataset)
    orientation = (None if args.orientation == "all"
                   else ORIENTATION_LABELS[args.orientation])
    graph = build_graph(decomposition.chains, dataset,
                        orientation=orientation)
    export_graph(graph, args.format, args.out)
    note = " (empty)" if graph.is_empty else ""
    print(f"graph {args.orientation}: {len(graph.nodes)} nodes, "
          f"{graph.total_multiplicity} links{note} -> {args.out}")
    return 0


def _cmd_metrics(args) -> int:
    graph = import_graph(args.graph)
    report = centrality_report(graph, workers=args.workers,
                               normalized=args.normalized)
    write_centrality_csv(report, args.out)
    print(f"centrality for {len(report.entries)} cities -> {args.out}")
    return 0


def _cmd_morphology(args) -> int:
    chains = read_chains_csv(args.chains_csv)
    if args.table == "size":
        if not args.cities or not args.regions:
            print("--table size needs --cities and --regions",
                  file=sys.stderr)
            return 1
        from .ingest import load_taxonomy, _read_rows, CITIES_SCHEMA
        from .model import City

        violations: list = []
        rows = _read_rows(args.cities, CITIES_SCHEMA, violations)
        if violations or rows is None:
            raise DatasetValidationError(violations)
        cities = {r[0]: City(r[0], r[1], r[2], int(r[3]))
                  for _, r in rows}
        table = structure_by_size(chains, cities).row_percent()
        table.to_csv(args.out)
        print(f"structure-by-size table -> {args.out}")
        return 0
    tally = census(chains)
    payload = {"counts": tally.as_dict(), "total": tally.total}
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True)
                              + "\n", encoding="utf-8")
    print(f"census of {tally.total} components -> {args.out}")
    return 0


def _cmd_ca(args) -> int:
    table = ContingencyTable.from_table(load_table_csv(args.table))
    result = fit_ca(table)
    payload = ca_result_json(result, axes=args.axes)
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True)
                              + "\n", encoding="utf-8")
    print(f"CA: {result.n_axes} axes, total inertia "
          f"{result.total_inertia:.6g} -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = parse_config_file(args.config)
    result = run_pipeline(config, args.out)
    print(f"bundle of {len(result.files)} files in {result.out_dir} "
          f"({result.chain_count} chains, manifest "
          f"{result.manifest_digest[:12]})")
    return 0


_COMMANDS = {
    "fixture": _cmd_fixture,
    "ingest": _cmd_ingest,
    "chains": _cmd_chains,
    "graph": _cmd_graph,
    "metrics": _cmd_metrics,
    "morphology": _cmd_morphology,
    "ca": _cmd_ca,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DatasetValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    except StageFailure as exc:
        if isinstance(exc.cause, DatasetValidationError):
            print(f"[{exc.stage}] validation failed: {exc.cause}",
                  file=sys.stderr)
            return 1
        print(f"[{exc.stage}] failed: {exc.cause}", file=sys.stderr)
        return 2
    except (ChainscopeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
