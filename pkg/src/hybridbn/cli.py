"""Command-line interface: learn, sample, impute, bench."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .data import (
    DataError,
    Dataset,
    VariableKind,
    equal_frequency_discretize,
    load_csv,
    load_schema,
    read_partial_rows,
)
from .benchmark import (
    EvoConfig,
    GeneratorSpec,
    compare_distributions,
    format_reduction_table,
    generate_clg_network,
    matrix_summary,
    run_matrix,
    write_matrix_csv,
    write_summary_json,
)
from .graph import to_dot
from .models import fit_parameters
from .sampling import forward_sample, impute_rows
from .scoring import NumericalError, ScoreKind
from .search import evolve, hill_climb
from .serialize import DocumentError, atomic_write_text, load_network, save_network

SCORE_FLAGS = {
    "mi-mixed": ScoreKind.MI,
    "mi-disc": ScoreKind.MI,
    "ll": ScoreKind.LL,
    "bic": ScoreKind.BIC,
    "aic": ScoreKind.AIC,
}


class UsageError(ValueError):
    pass


def _add_evo_flags(parser):
    parser.add_argument("--population", type=int, default=20)
    parser.add_argument("--generations", type=int, default=100)
    parser.add_argument("--mutation-rate", type=float, default=0.8)
    parser.add_argument("--crossover-rate", type=float, default=0.8)
    parser.add_argument("--tournament", type=int, default=3)
    parser.add_argument("--stagnation", type=int, default=15)


def _evo_config(args, seed):
    return EvoConfig(
        population_size=args.population,
        generations=args.generations,
        mutation_rate=args.mutation_rate,
        crossover_rate=args.crossover_rate,
        tournament_size=args.tournament,
        stagnation_limit=args.stagnation,
        seed=seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridbn",
        description="Learn, sample, and benchmark Bayesian networks on mixed data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="learn a network from a CSV")
    learn.add_argument("--data", required=True)
    learn.add_argument("--schema")
    learn.add_argument("--score", choices=sorted(SCORE_FLAGS), default="mi-mixed")
    learn.add_argument("--search", choices=["hc", "evo"], default="hc")
    learn.add_argument("--params", choices=["mixed", "disc"], default="mixed")
    learn.add_argument("--bins", type=int, default=5)
    learn.add_argument("--max-parents", type=int)
    learn.add_argument("--min-group-size", type=int, default=2)
    learn.add_argument("--seed", type=int, default=0)
    learn.add_argument("--na", default="")
    learn.add_argument("--out", required=True)
    learn.add_argument("--dot", help="also export the learned graph as DOT")
    _add_evo_flags(learn)

    sample = sub.add_parser("sample", help="forward-sample a saved network")
    sample.add_argument("--model", required=True)
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", required=True)

    impute = sub.add_parser("impute", help="fill missing cells in a CSV")
    impute.add_argument("--model", required=True)
    impute.add_argument("--data", required=True)
    impute.add_argument("--strategy", choices=["sample", "mode"], default="sample")
    impute.add_argument("--seed", type=int, default=0)
    impute.add_argument("--na", default="")
    impute.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="run the discretized-vs-mixed learning matrix")
    source = bench.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", help="JSON generator spec file")
    source.add_argument("--data", help="CSV of real observations")
    bench.add_argument("--schema")
    bench.add_argument("--search", action="append", choices=["hc", "evo"])
    bench.add_argument("--seeds", type=int, default=3, help="number of benchmark seeds")
    bench.add_argument("--bins", type=int, default=5)
    bench.add_argument("--strategy", choices=["sample", "mode"], default="sample")
    bench.add_argument("--max-parents", type=int)
    bench.add_argument("--na", default="")
    bench.add_argument("--out-dir", required=True)
    bench.add_argument("--timings", action="store_true",
                       help="also write wall-clock timings (non-deterministic)")
    _add_evo_flags(bench)
    return parser


def _load_typed(path, schema_path, na):
    schema = load_schema(schema_path) if schema_path else None
    return load_csv(path, schema, na_token=na)


def cmd_learn(args) -> int:
    data = _load_typed(args.data, args.schema, args.na)
    kind = SCORE_FLAGS[args.score]
    structure_data = data
    maps = []
    constraint_kinds = None
    if args.score == "mi-disc":
        structure_data, maps = equal_frequency_discretize(data, args.bins)
        constraint_kinds = data.kinds
    if args.search == "hc":
        result = hill_climb(
            structure_data,
            kind,
            max_parents=args.max_parents,
            min_group_size=args.min_group_size,
            constraint_kinds=constraint_kinds,
        )
    else:
        result = evolve(
            structure_data,
            kind,
            _evo_config(args, args.seed),
            max_parents=args.max_parents,
            min_group_size=args.min_group_size,
            constraint_kinds=constraint_kinds,
        )
    dag = result.dag
    if args.params == "disc":
        fit_data, maps = equal_frequency_discretize(data, args.bins)
    else:
        fit_data = data
    bn = fit_parameters(fit_data, dag)
    bn.discretization = list(maps)
    labels = {n: fit_data.labels[n] for n in fit_data.names if n in fit_data.labels}
    provenance = {
        "score": args.score,
        "search": args.search,
        "params": args.params,
        "seed": args.seed,
        "bins": args.bins if (args.params == "disc" or args.score == "mi-disc") else None,
        "version": __version__,
    }
    save_network(bn, labels, args.out, provenance)
    if args.dot:
        atomic_write_text(args.dot, to_dot(dag))
    print(f"score: {result.score:.6f}")
    print(f"edges: {len(dag.edges)}")
    return 0


def _dataset_to_csv_text(data: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.names)
    decoded = {}
    for name in data.names:
        if data.is_discrete(name):
            decoded[name] = data.decode(name)
        else:
            decoded[name] = [f"{v:.17g}" for v in data.column(name)]
    for i in range(data.n_rows):
        writer.writerow([decoded[n][i] for n in data.names])
    return buf.getvalue()


def cmd_sample(args) -> int:
    bn, labels, _ = load_network(args.model)
    data = forward_sample(bn, args.n, args.seed)
    # restore original label strings where the document carries them
    relabeled = {}
    for name in data.names:
        if data.is_discrete(name) and name in labels:
            relabeled[name] = labels[name]
        elif data.is_discrete(name):
            relabeled[name] = data.labels[name]
    data = Dataset(data.names, data.kinds, dict(data.columns), relabeled)
    atomic_write_text(args.out, _dataset_to_csv_text(data))
    print(f"wrote {data.n_rows} rows")
    return 0


def cmd_impute(args) -> int:
    bn, labels, _ = load_network(args.model)
    kinds = dict(zip(bn.dag.names, bn.dag.kinds))
    by_bin = {m.column: m for m in bn.discretization}
    parse_kinds = []
    parse_labels = {}
    for name in bn.dag.names:
        if name in by_bin:
            parse_kinds.append(VariableKind.CONTINUOUS)
        else:
            parse_kinds.append(kinds[name])
            if name in labels:
                parse_labels[name] = labels[name]
    rows = read_partial_rows(args.data, bn.dag.names, parse_kinds, parse_labels, args.na)
    with open(args.data, newline="", encoding="utf-8") as fh:
        raw_reader = csv.reader(fh)
        raw_header = [h.strip() for h in next(raw_reader)]
        raw_rows = [dict(zip(raw_header, (c.strip() for c in row))) for row in raw_reader]

    encoded = []
    for row in rows:
        enc = dict(row)
        for name, dmap in by_bin.items():
            if enc.get(name) is not None:
                enc[name] = int(dmap.assign([enc[name]])[0])
        encoded.append(enc)
    completed, fallbacks = impute_rows(bn, encoded, args.seed, args.strategy)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(bn.dag.names)
    for raw, text_row, filled in zip(rows, raw_rows, completed):
        out_row = []
        for name, kind in zip(bn.dag.names, parse_kinds):
            if raw[name] is not None:
                # observed cells pass through with their original text
                out_row.append(text_row[name])
                continue
            value = filled[name]
            if name in by_bin:
                value = by_bin[name].bin_means[int(value)]
                out_row.append(f"{value:.17g}")
            elif kind is VariableKind.CONTINUOUS:
                out_row.append(f"{value:.17g}")
            else:
                out_row.append(parse_labels.get(name, ())[int(value)])
        writer.writerow(out_row)
    atomic_write_text(args.out, buf.getvalue())
    print(f"fallback events: {fallbacks}")
    return 0


def _generator_spec_from_file(path) -> GeneratorSpec:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return GeneratorSpec(**raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid generator spec: {exc}") from exc


def cmd_bench(args) -> int:
    searches = args.search or ["hc"]
    if args.spec:
        spec = _generator_spec_from_file(args.spec)
        truth, data = generate_clg_network(spec)
    else:
        truth = None
        data = _load_typed(args.data, args.schema, args.na)

    import os

    os.makedirs(args.out_dir, exist_ok=True)
    all_results = []
    timings = []
    for search in searches:
        for seed in range(args.seeds):
            result = run_matrix(
                data,
                ground_truth=truth,
                search=search,
                seed=seed,
                bins=args.bins,
                strategy=args.strategy,
                evo=_evo_config(args, seed),
                max_parents=args.max_parents,
            )
            all_results.append(result)
            for cell_name, cell in result.cells.items():
                timings.append((search, seed, cell_name, cell.seconds))

    write_matrix_csv(all_results, os.path.join(args.out_dir, "results.csv"))
    summary = matrix_summary(all_results)
    if len(searches) == 2:
        summary["search_difference"] = _search_difference(all_results)
    write_summary_json(summary, os.path.join(args.out_dir, "summary.json"))
    if args.timings:
        with open(os.path.join(args.out_dir, "timings.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["search", "seed", "cell", "seconds"])
            writer.writerows(timings)
    print(format_reduction_table(summary))
    for search, seed, cell, secs in timings:
        print(f"structure time [{search} seed={seed} {cell}]: {secs:.3f}s", file=sys.stderr)
    return 0


def _search_difference(results) -> dict:
    """Per-node RMSE difference between the two search algorithms (hc minus evo)."""
    by_search: dict[str, dict[str, list[float]]] = {}
    for result in results:
        per = by_search.setdefault(result.search, {})
        for node, (metric, value) in result.cells["M+M"].metrics.items():
            if metric == "rmse":
                per.setdefault(node, []).append(value)
    if set(by_search) != {"hc", "evo"}:
        return {}
    out = {}
    for node in sorted(by_search["hc"]):
        out[node] = float(
            np.mean(by_search["hc"][node]) - np.mean(by_search["evo"][node])
        )
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "learn":
            return cmd_learn(args)
        if args.command == "sample":
            return cmd_sample(args)
        if args.command == "impute":
            return cmd_impute(args)
        if args.command == "bench":
            return cmd_bench(args)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, DataError, DocumentError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
