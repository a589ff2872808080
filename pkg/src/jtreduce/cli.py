"""Command-line workflow: compile, reduce, query, sample, check and report."""
from __future__ import annotations

import argparse
import itertools
import os
import sys
import tempfile
from collections import Counter
from dataclasses import dataclass

from . import __version__
from .errors import (
    CompileInfeasibleError,
    ComponentTooLargeError,
    JTReduceError,
    NetworkParseError,
    UnsupportedQueryError,
)
from .graph import chain_components, connected_components, moralize
from .indgraph import derive_recursive_model
from .jtree import compile_model, compile_structure, query, subtree_marginal, total_size
from .model import parameter_count
from .netfile import read_network, serialize_network
from .reduce import greedy_reduce
from .sampling import estimate_clique_potentials, forward_sample, write_samples
from .tables import normalize, reorder

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE = 0, 1, 2, 3

#: Default cap on compiled cliques plus separators in exact mode.
DEFAULT_MAX_CELLS = 5_000_000

REPORT_COLUMNS = (
    "network", "size_before", "size_after", "links_removed", "reduction_pct",
    "total_divergence", "error_bound", "mode", "params_before", "params_after",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(path, data):
    """Write via a temporary file in the target directory, then rename."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ReduceResult:
    model: object
    tree: object
    graph: object
    report: object
    recovered: object
    params_before: int
    params_after: int

    def row(self) -> dict:
        r = self.report
        return {
            "network": self.model.name,
            "size_before": r.size_before,
            "size_after": r.size_after,
            "links_removed": r.links_removed,
            "reduction_pct": f"{100.0 * r.reduction:.4f}",
            "total_divergence": f"{r.total_divergence:.6e}",
            "error_bound": f"{r.error_bound:.6f}",
            "mode": r.mode,
            "params_before": self.params_before,
            "params_after": self.params_after,
        }


def format_report(rows) -> str:
    lines = ["\t".join(REPORT_COLUMNS)]
    for row in rows:
        lines.append("\t".join(str(row[c]) for c in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> list:
    lines = [x for x in text.splitlines() if x]
    header = lines[0].split("\t")
    return [dict(zip(header, x.split("\t"))) for x in lines[1:]]


def _tree_for(model, mode, samples, seed, max_cells):
    if mode == "exact":
        return compile_model(model, max_cells=max_cells)
    structure, _ = compile_structure(model)
    return estimate_clique_potentials(forward_sample(model, samples, seed), structure)


def run_reduce(model, budget: float, mode: str = "exact", samples: int = 10_000,
               seed: int = 0, max_cells: int | None = DEFAULT_MAX_CELLS) -> ReduceResult:
    """Compile, reduce within ``budget`` and recover a DAG model of the result."""
    if budget < 0:
        raise UsageError("budget must be non-negative")
    if mode not in ("exact", "sampled"):
        raise UsageError(f"unknown mode {mode!r}")
    if samples < 1:
        raise UsageError("samples must be positive")
    tree = _tree_for(model, mode, samples, seed, max_cells)
    reduced, graph, report = greedy_reduce(tree, model.graph, budget, mode=mode)
    recovered = derive_recursive_model(graph, reduced, variables=model.variables,
                                       name=f"{model.name}-reduced", strict=mode == "exact")
    recovered.description = (f"reduced from {model.name}; budget {budget:g}; "
                             f"total divergence {report.total_divergence:.6e}")
    cards = model.cards
    return ReduceResult(model, reduced, graph, report, recovered,
                        parameter_count(model.graph, cards), parameter_count(graph, cards))


def check_lines(model) -> list:
    """Diagnostics: chain-graph validity, fill-ins, clique-size histogram, compiled size."""
    g = model.graph
    out = [f"network\t{model.name}", f"variables\t{len(g.nodes)}",
           f"chain_graph\t{'valid' if g.is_chain_graph() else 'invalid'}",
           f"kind\t{'dag' if g.is_dag() else 'chain'}",
           f"chain_components\t{len(chain_components(g))}"]
    tree, fills = compile_structure(model)
    out.append(f"fill_ins\t{len(fills)}")
    for u, v in fills:
        out.append(f"fill_in\t{u}\t{v}")
    hist = Counter(len(c) for c in tree.cliques)
    for k in sorted(hist):
        out.append(f"cliques_of_size_{k}\t{hist[k]}")
    cl, sep = total_size(tree)
    out.append(f"clique_mass\t{cl}")
    out.append(f"separator_mass\t{sep}")
    out.append(f"total_size\t{cl + sep}")
    out.append(f"parameters\t{parameter_count(g, model.cards)}")
    parts = connected_components(moralize(g))
    if len(parts) > 1:
        out.append(f"warning\tmodel is disconnected ({len(parts)} parts); "
                   "parts are joined by empty separators")
    return out


# subcommand handlers ------------------------------------------------------------------


def _cmd_compile(args):
    model = read_network(args.model)
    tree = compile_model(model, max_cells=args.max_cells)
    lines = []
    for i, (c, p) in enumerate(zip(tree.cliques, tree.potentials)):
        lines.append(f"clique\t{i}\t{' '.join(sorted(c))}\t{p.size}")
    for s in tree.separators:
        lines.append(f"separator\t{s.ends[0]}\t{s.ends[1]}\t{' '.join(sorted(s.members))}\t{s.potential.size}")
    cl, sep = total_size(tree)
    lines.append(f"total_size\t{cl + sep}")
    _emit(args.out, "\n".join(lines) + "\n")


def _cmd_reduce(args):
    model = read_network(args.model)
    res = run_reduce(model, args.budget, args.mode, args.samples, args.seed, args.max_cells)
    text = format_report([res.row()])
    if args.out_model:
        write_atomic(args.out_model, serialize_network(res.recovered))
    if args.graph_out:
        write_atomic(args.graph_out, _graph_text(res.graph))
    _emit(args.report, text)


def _graph_text(g) -> str:
    lines = ["[directed]"] + [f"{u} -> {v}" for u, v in sorted(g.directed)]
    lines += ["[undirected]"] + [f"{a} -- {b}" for a, b in sorted(tuple(sorted(e)) for e in g.undirected)]
    return "\n".join(lines) + "\n"


def _cmd_query(args):
    model = read_network(args.model)
    tree = compile_model(model, max_cells=args.max_cells)
    unknown = [v for v in args.vars if v not in model.cards]
    if unknown:
        raise UsageError(f"unknown variable {unknown[0]!r}")
    try:
        p = query(tree, args.vars)
    except UnsupportedQueryError:
        if not args.allow_cross_clique:
            raise
        p = normalize(subtree_marginal(tree, args.vars))
    p = reorder(p, list(args.vars))
    states = [model.variable(v).states for v in args.vars]
    lines = ["\t".join(list(args.vars) + ["probability"])]
    for combo, x in zip(itertools.product(*states), p.values):
        lines.append("\t".join(list(combo) + [format(float(x), ".10g")]))
    _emit(args.out, "\n".join(lines) + "\n")


def _cmd_sample(args):
    model = read_network(args.model)
    if args.n < 1:
        raise UsageError("--n must be positive")
    _emit(args.out, write_samples(forward_sample(model, args.n, args.seed)))


def _cmd_check(args):
    model = read_network(args.model)
    _emit(args.out, "\n".join(check_lines(model)) + "\n")


def _cmd_report(args):
    rows = []
    for path in args.models:
        model = read_network(path)
        rows.append(run_reduce(model, args.budget, args.mode, args.samples, args.seed,
                               args.max_cells).row())
    _emit(args.out, format_report(rows))


def _emit(path, text):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jtreduce", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("model", help="network file")
        sp.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS,
                        help="refuse exact compilation above this many cells")
        if out:
            sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("compile", help="compile a network and list its junction tree")
    common(sp)
    sp.set_defaults(func=_cmd_compile)

    def reduce_opts(sp):
        sp.add_argument("--budget", type=float, required=True, help="total divergence allowed")
        sp.add_argument("--mode", choices=("exact", "sampled"), default="exact")
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("reduce", help="remove weak links within a divergence budget")
    common(sp, out=False)
    reduce_opts(sp)
    sp.add_argument("--out-model", help="write the reduced network here")
    sp.add_argument("--graph-out", help="write the reduced independence graph here")
    sp.add_argument("--report", help="report path (default: stdout)")
    sp.set_defaults(func=_cmd_reduce)

    sp = sub.add_parser("query", help="marginal distribution of some variables")
    common(sp)
    sp.add_argument("--vars", nargs="+", required=True)
    sp.add_argument("--allow-cross-clique", action="store_true",
                    help="answer queries spanning several cliques")
    sp.set_defaults(func=_cmd_query)

    sp = sub.add_parser("sample", help="forward-sample the network")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("check", help="validate a network and summarize its compiled form")
    common(sp)
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("report", help="reduction table over several networks")
    sp.add_argument("models", nargs="+")
    sp.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    sp.add_argument("--out")
    reduce_opts(sp)
    sp.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"jtreduce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetworkParseError as exc:
        print(f"{getattr(args, 'model', '')}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CompileInfeasibleError, ComponentTooLargeError) as exc:
        hint = " (try --mode sampled)" if getattr(args, "mode", "exact") == "exact" else ""
        print(f"jtreduce: compilation infeasible: {exc}{hint}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnsupportedQueryError as exc:
        print(f"jtreduce: error: {exc} (use --allow-cross-clique)", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"jtreduce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JTReduceError as exc:
        print(f"jtreduce: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
