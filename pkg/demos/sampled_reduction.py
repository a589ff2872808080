"""Reduce from forward samples instead of exact clique marginals.

Runs the reduction on the medium synthetic network in both modes and shows
how the chosen links compare as the sample count grows.

    python3 demos/sampled_reduction.py
"""
import pathlib

from jtreduce import read_network
from jtreduce.cli import run_reduce

ROOT = pathlib.Path(__file__).resolve().parent.parent
BUDGET = 1e-3


def main():
    model = read_network(ROOT / "fixtures" / "synthetic-medium.net")
    exact = run_reduce(model, BUDGET)
    chosen = {r.link for r in exact.report.removals}
    print(f"exact: {len(chosen)} removals, size {exact.report.size_before} -> {exact.report.size_after}")
    for n in (1_000, 10_000, 100_000):
        res = run_reduce(model, BUDGET, mode="sampled", samples=n, seed=7)
        links = {r.link for r in res.report.removals}
        print(f"{n:>7} samples: {len(links)} removals, {len(links & chosen)} shared with exact, "
              f"size {res.report.size_before} -> {res.report.size_after}")


if __name__ == "__main__":
    main()
