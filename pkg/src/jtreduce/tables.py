"""Dense potential tables over discrete variables.

A :class:`Potential` is a non-negative array whose axes are labelled by
variable ids.  The flat layout is row-major with the last domain variable
varying fastest, which is exactly numpy's C order, so ``p.values`` and the
file format agree without any index arithmetic.

All functions here are pure: they never modify their arguments, and the
arrays held by a potential are marked read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegeneratePotentialError,
    DomainConflictError,
    DomainError,
    InfiniteDivergenceError,
    PotentialDivisionError,
)


@dataclass(frozen=True)
class Variable:
    """A discrete variable.

    Attributes:
        id: unique identifier used as axis label.
        label: display name.
        cardinality: number of states, at least 1.
        states: optional state names; defaults to ``s0 .. s{n-1}``.
    """

    id: str
    label: str
    cardinality: int
    states: tuple = field(default=())

    def __post_init__(self):
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise DomainError(f"variable {self.id!r}: cardinality must be an integer >= 1")
        if not self.states:
            object.__setattr__(self, "states", tuple(f"s{i}" for i in range(self.cardinality)))
        elif len(self.states) != self.cardinality:
            raise DomainError(
                f"variable {self.id!r}: {len(self.states)} state names for cardinality {self.cardinality}"
            )
        else:
            object.__setattr__(self, "states", tuple(self.states))


class Potential:
    """Non-negative table over an ordered tuple of variables.

    Args:
        domain: variable ids, no duplicates.
        cards: cardinality of each domain variable.
        values: flat sequence of length ``prod(cards)`` or an array of shape
            ``cards``.  Defaults to all ones.
    """

    __slots__ = ("domain", "cards", "table")

    def __init__(self, domain: Sequence[str], cards: Sequence[int], values=None):
        domain = tuple(domain)
        cards = tuple(int(c) for c in cards)
        if len(set(domain)) != len(domain):
            raise DomainError(f"duplicate variables in domain {domain}")
        if len(cards) != len(domain):
            raise DomainError("domain and cardinalities differ in length")
        if any(c < 1 for c in cards):
            raise DomainError("cardinalities must be >= 1")
        if values is None:
            table = np.ones(cards, dtype=float)
        else:
            table = np.array(values, dtype=float)
            size = int(np.prod(cards, dtype=np.int64))
            if table.size != size:
                raise DomainError(
                    f"potential over {domain} needs {size} cells, got {table.size}"
                )
            table = table.reshape(cards)
        if np.any(table < 0) or np.any(np.isnan(table)):
            raise DomainError(f"potential over {domain} has negative or NaN cells")
        table.setflags(write=False)
        self.domain = domain
        self.cards = cards
        self.table = table

    @classmethod
    def scalar(cls, value: float = 1.0) -> "Potential":
        return cls((), (), [value])

    @classmethod
    def _wrap(cls, domain, cards, table) -> "Potential":
        # internal fast path: trusts the caller on shape and sign
        obj = cls.__new__(cls)
        table = np.asarray(table, dtype=float, order="C")
        table.setflags(write=False)
        obj.domain = tuple(domain)
        obj.cards = tuple(cards)
        obj.table = table
        return obj

    @property
    def values(self) -> np.ndarray:
        """Flat row-major view of the cells (last variable fastest)."""
        return self.table.reshape(-1)

    @property
    def size(self) -> int:
        return int(self.table.size)

    def total(self) -> float:
        return float(self.table.sum())

    def card_map(self) -> dict:
        return dict(zip(self.domain, self.cards))

    def __mul__(self, other):
        if isinstance(other, Potential):
            return multiply(self, other)
        return Potential._wrap(self.domain, self.cards, self.table * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return divide(self, other)

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.cards == other.cards
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None

    def __repr__(self):
        return f"Potential({list(self.domain)}, {self.values.tolist()})"


def unity(domain: Sequence[str], cards: Sequence[int]) -> Potential:
    """All-ones potential."""
    return Potential(domain, cards)


def _merged_cards(lhs: Potential, rhs: Potential):
    cards = lhs.card_map()
    for var, card in zip(rhs.domain, rhs.cards):
        if var in cards and cards[var] != card:
            raise DomainConflictError(
                f"variable {var!r} has cardinality {cards[var]} and {card}"
            )
        cards.setdefault(var, card)
    return cards


def expand(p: Potential, domain: Sequence[str]) -> np.ndarray:
    """Broadcastable view of ``p.table`` aligned to ``domain`` (a superset).

    Missing axes get length 1, so the result broadcasts against any table
    over ``domain``.
    """
    domain = tuple(domain)
    missing = [v for v in p.domain if v not in domain]
    if missing:
        raise DomainError(f"variables {missing} not in target domain {domain}")
    present = [v for v in domain if v in p.domain]
    perm = [p.domain.index(v) for v in present]
    arr = np.transpose(p.table, perm) if perm != list(range(len(perm))) else p.table
    shape = [arr.shape[present.index(v)] if v in p.domain else 1 for v in domain]
    return arr.reshape(shape)


def reorder(p: Potential, domain: Sequence[str]) -> Potential:
    """Same potential with axes permuted into ``domain`` order."""
    domain = tuple(domain)
    if set(domain) != set(p.domain) or len(domain) != len(p.domain):
        raise DomainError(f"{domain} is not a permutation of {p.domain}")
    if domain == p.domain:
        return p
    cards = p.card_map()
    return Potential._wrap(domain, [cards[v] for v in domain], expand(p, domain))


def multiply(lhs: Potential, rhs: Potential) -> Potential:
    """Pointwise product over the ordered union of both domains."""
    cards = _merged_cards(lhs, rhs)
    domain = lhs.domain + tuple(v for v in rhs.domain if v not in lhs.domain)
    table = expand(lhs, domain) * expand(rhs, domain)
    return Potential._wrap(domain, [cards[v] for v in domain], table)


def divide(num: Potential, den: Potential) -> Potential:
    """Cellwise quotient ``num / den`` with ``0/0 = 0``.

    ``den``'s domain must be contained in ``num``'s.  A positive numerator
    over a zero denominator raises :class:`PotentialDivisionError`.
    """
    _merged_cards(num, den)
    if not set(den.domain) <= set(num.domain):
        raise DomainError(f"denominator domain {den.domain} not within {num.domain}")
    d = np.broadcast_to(expand(den, num.domain), num.table.shape)
    zero = d == 0
    if np.any(num.table[zero] > 0):
        raise PotentialDivisionError(
            f"positive mass over zero denominator on {den.domain}"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(zero, 0.0, num.table / np.where(zero, 1.0, d))
    return Potential._wrap(num.domain, num.cards, out)


def marginalize(p: Potential, keep: Iterable[str]) -> Potential:
    """Sum out every variable not in ``keep``; kept axes stay in p's order."""
    keep = set(keep)
    unknown = keep - set(p.domain)
    if unknown:
        raise DomainError(f"cannot keep {sorted(unknown)}: not in domain {p.domain}")
    axes = tuple(i for i, v in enumerate(p.domain) if v not in keep)
    if not axes:
        return p
    domain = [v for v in p.domain if v in keep]
    cards = [c for v, c in zip(p.domain, p.cards) if v in keep]
    return Potential._wrap(domain, cards, p.table.sum(axis=axes))


def sum_out(p: Potential, drop: Iterable[str]) -> Potential:
    drop = set(drop)
    return marginalize(p, [v for v in p.domain if v not in drop])


def normalize(p: Potential) -> Potential:
    """Scale to unit total mass."""
    total = p.table.sum()
    if not total > 0:
        raise DegeneratePotentialError(f"potential over {p.domain} has zero mass")
    return Potential._wrap(p.domain, p.cards, p.table / total)


def _aligned_pair(phi: Potential, psi: Potential):
    if set(phi.domain) != set(psi.domain):
        raise DomainError(f"domains differ: {phi.domain} vs {psi.domain}")
    _merged_cards(phi, psi)
    return phi.table, reorder(psi, phi.domain).table


def kl_divergence(phi: Potential, psi: Potential) -> float:
    """Kullback-Leibler divergence ``sum phi * ln(phi / psi)`` (nats).

    Cells with ``phi == 0`` contribute nothing.  Positive ``phi`` against
    zero ``psi`` raises :class:`InfiniteDivergenceError`.
    """
    a, b = _aligned_pair(phi, psi)
    pos = a > 0
    if np.any(b[pos] == 0):
        raise InfiniteDivergenceError("phi has mass where psi is zero")
    terms = a[pos] * np.log(a[pos] / b[pos])
    # clamp rounding noise around exact independence
    return max(float(terms.sum()), 0.0)


def max_abs_diff(phi: Potential, psi: Potential, sub: Iterable[str]) -> float:
    """Largest absolute cell difference after marginalizing both onto ``sub``."""
    sub = set(sub)
    if set(phi.domain) != set(psi.domain):
        raise DomainError(f"domains differ: {phi.domain} vs {psi.domain}")
    if not sub <= set(phi.domain):
        raise DomainError(f"{sorted(sub - set(phi.domain))} not in domain")
    a = marginalize(phi, sub)
    b = reorder(marginalize(psi, sub), a.domain)
    return float(np.max(np.abs(a.table - b.table)))


def allclose(p: Potential, q: Potential, atol: float = 1e-12) -> bool:
    """Equality up to axis order and an absolute tolerance."""
    if set(p.domain) != set(q.domain):
        return False
    return bool(np.allclose(p.table, reorder(q, p.domain).table, rtol=0.0, atol=atol))
