"""Regenerate the network files under fixtures/ from the seeded generators.

Run from the repository root:

    python3 demos/make_fixtures.py
"""
import pathlib

from jtreduce.fixtures import BENCHMARKS, benchmark_model, dyspnoea_model, sixnode_model
from jtreduce.netfile import serialize_network

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def main():
    OUT.mkdir(exist_ok=True)
    models = [dyspnoea_model(), sixnode_model()] + [benchmark_model(k) for k in BENCHMARKS]
    for m in models:
        path = OUT / f"{m.name}.net"
        path.write_bytes(serialize_network(m))
        print(f"wrote {path.relative_to(OUT.parent)}")


if __name__ == "__main__":
    main()
