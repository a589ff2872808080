"""Compare link removal with zeroing small probabilities.

Annihilation sets each clique's smallest cells to zero while their mass
stays below a threshold, then stores the tables run-length compressed.

    python3 demos/annihilation_baseline.py
"""
import pathlib

from jtreduce import annihilate, compile_model, greedy_reduce, read_network, total_size

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    print("network            dense  removal  annihilation(1e-4)  annihilation(1e-2)")
    for name in ("dyspnoea", "sixnode", "synthetic-small", "synthetic-medium", "synthetic-large"):
        model = read_network(ROOT / "fixtures" / f"{name}.net")
        tree = compile_model(model)
        _, _, report = greedy_reduce(tree, model.graph, budget=1e-3)
        cells = []
        for threshold in (1e-4, 1e-2):
            _, stats = annihilate(tree, threshold)
            cells.append(stats.total_compressed + total_size(tree)[1])
        print(f"{name:<18} {sum(total_size(tree)):>6} {report.size_after:>8} {cells[0]:>19} {cells[1]:>19}")


if __name__ == "__main__":
    main()
