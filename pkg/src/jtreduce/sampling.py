"""Forward sampling and simulated clique potentials."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import tables as tb
from .errors import NetworkParseError, PreconditionError
from .graph import relations, topological_components
from .jtree import JunctionTree, Separator
from .model import COMPONENT_CELL_LIMIT, NetworkModel, component_conditional
from .tables import Potential

ALGORITHM = "numpy.random.PCG64"


@dataclass
class SampleSet:
    """``count`` joint draws stored as an ``(count, len(variables))`` state-index array."""

    seed: int
    count: int
    variables: tuple
    cards: tuple
    records: np.ndarray
    algorithm: str = ALGORITHM

    def __post_init__(self):
        self.records = np.asarray(self.records, dtype=np.int64).reshape(-1, len(self.variables))
        if self.count < 1 or self.records.shape[0] != self.count:
            raise PreconditionError(f"sample set needs count >= 1 matching its records (count={self.count})")
        if self.records.size and (
            self.records.min() < 0 or np.any(self.records.max(axis=0) >= np.asarray(self.cards))
        ):
            raise PreconditionError("record state index outside variable cardinality")

    def column(self, vid) -> np.ndarray:
        return self.records[:, self.variables.index(vid)]

    def counts(self, domain) -> np.ndarray:
        """Contingency table over ``domain`` (C order, last variable fastest)."""
        cards = [self.cards[self.variables.index(v)] for v in domain]
        if not domain:
            return np.array(float(self.count))
        idx = np.ravel_multi_index(tuple(self.column(v) for v in domain), cards)
        return np.bincount(idx, minlength=int(np.prod(cards))).reshape(cards).astype(float)

    def merge(self, other: "SampleSet") -> "SampleSet":
        if other.variables != self.variables:
            raise PreconditionError("cannot merge sample sets over different variables")
        return SampleSet(self.seed, self.count + other.count, self.variables, self.cards,
                         np.vstack([self.records, other.records]), self.algorithm)


def _draw_rows(cdf: np.ndarray, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # index of the first cumulative probability exceeding u, per record
    picked = cdf[rows]
    out = (picked <= u[:, None]).sum(axis=1)
    return np.minimum(out, cdf.shape[1] - 1)


def forward_sample(model: NetworkModel, n: int, seed: int,
                   limit: int = COMPONENT_CELL_LIMIT) -> SampleSet:
    """``n`` independent draws from the model's joint, component by component."""
    if n < 1:
        raise PreconditionError("sample count must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    ids = tuple(v.id for v in model.variables)
    cards = model.cards
    pos = {v: i for i, v in enumerate(ids)}
    records = np.zeros((n, len(ids)), dtype=np.int64)
    groups = model.potentials_by_component()
    for comp in topological_components(model.graph):
        cond = component_conditional(model, comp, groups[comp], limit=limit)
        pa, _, _ = relations(model.graph, comp)
        pa_ids, k_ids = sorted(pa), sorted(comp)
        pa_cards = [cards[v] for v in pa_ids]
        k_cards = [cards[v] for v in k_ids]
        table = cond.table.reshape(int(np.prod(pa_cards, dtype=np.int64)), -1)
        sums = table.sum(axis=1, keepdims=True)
        # unreachable parent configurations get a uniform row
        table = np.where(sums > 0, table / np.where(sums > 0, sums, 1.0), 1.0 / table.shape[1])
        cdf = np.cumsum(table, axis=1)
        if pa_ids:
            rows = np.ravel_multi_index(tuple(records[:, pos[v]] for v in pa_ids), pa_cards)
        else:
            rows = np.zeros(n, dtype=np.int64)
        flat = _draw_rows(cdf, rows, rng.random(n))
        for v, col in zip(k_ids, np.unravel_index(flat, k_cards)):
            records[:, pos[v]] = col
    return SampleSet(seed, n, ids, tuple(cards[v] for v in ids), records)


def forward_sample_sharded(model: NetworkModel, n: int, seed: int, shards: int) -> SampleSet:
    """Split ``n`` draws over ``shards`` streams seeded by ``(seed, shard)``; merge by concatenation."""
    if shards < 1:
        raise PreconditionError("shards must be positive")
    sizes = [n // shards + (1 if i < n % shards else 0) for i in range(shards)]
    parts = []
    for i, size in enumerate(sizes):
        if size:
            child = int(np.random.SeedSequence([seed, i]).generate_state(1, dtype=np.uint64)[0])
            parts.append(forward_sample(model, size, child))
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    return SampleSet(seed, out.count, out.variables, out.cards, out.records, out.algorithm)


def estimate_clique_potentials(samples: SampleSet, t: JunctionTree) -> JunctionTree:
    """Tree whose potentials are empirical frequencies from ``samples``."""
    if samples.count < 1:
        raise PreconditionError("empty sample set")
    pots = []
    for c in t.cliques:
        dom = sorted(c)
        freq = samples.counts(dom) / samples.count
        pots.append(Potential(dom, [t.cards[v] for v in dom], freq))
    seps = []
    for s in t.separators:
        lo = min(s.ends)
        seps.append(Separator(s.members, tb.marginalize(pots[lo], s.members), s.ends))
    return JunctionTree(t.cliques, pots, seps, t.cards)


def write_samples(samples: SampleSet) -> str:
    """Columnar text: comment lines with metadata, a header of ids, one record per line."""
    buf = io.StringIO()
    buf.write(f"# algorithm {samples.algorithm}\n")
    buf.write(f"# seed {samples.seed}\n")
    buf.write("# cards " + " ".join(str(c) for c in samples.cards) + "\n")
    buf.write("\t".join(samples.variables) + "\n")
    for row in samples.records:
        buf.write("\t".join(str(int(x)) for x in row) + "\n")
    return buf.getvalue()


def read_samples(text: str) -> SampleSet:
    meta, rows, header = {}, [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            meta[key] = value
        elif header is None:
            header = tuple(line.split("\t"))
        else:
            cells = line.split("\t")
            if len(cells) != len(header):
                raise NetworkParseError(f"expected {len(header)} columns, found {len(cells)}", lineno, 1)
            try:
                rows.append([int(x) for x in cells])
            except ValueError as exc:
                raise NetworkParseError(f"bad state index: {exc}", lineno, 1) from None
    if header is None:
        raise NetworkParseError("missing header line", 1, 1)
    if "cards" in meta:
        cards = tuple(int(c) for c in meta["cards"].split())
    else:
        cards = tuple(int(max(r[i] for r in rows)) + 1 for i in range(len(header)))
    return SampleSet(int(meta.get("seed", 0)), len(rows), header, cards,
                     np.array(rows, dtype=np.int64), meta.get("algorithm", ALGORITHM))
