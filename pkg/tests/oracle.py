"""Brute-force reference computations for tests.

Everything here works on dense numpy arrays indexed by explicit full
assignments and never calls the table algebra under test.
"""
import itertools
import math

import numpy as np


def assignments(variables, cards):
    return itertools.product(*[range(cards[v]) for v in variables])


def cell(potential, assignment):
    """Value of ``potential`` at a full assignment given as a dict."""
    return np.asarray(potential.table[tuple(assignment[v] for v in potential.domain)]).item()


def model_joint(model):
    """Joint array over sorted ids: product over chain components of normalized component factors."""
    from jtreduce.graph import relations

    cards = model.cards
    ids = sorted(cards)
    groups = model.potentials_by_component()
    joint = np.zeros([cards[v] for v in ids])
    for x in assignments(ids, cards):
        a = dict(zip(ids, x))
        value = 1.0
        for comp, pots in groups.items():
            pa, _, _ = relations(model.graph, comp)
            comp_ids = sorted(comp)
            num = math.prod(cell(p, a) for p in pots)
            z = 0.0
            for y in assignments(comp_ids, cards):
                b = dict(a)
                b.update(zip(comp_ids, y))
                z += math.prod(cell(p, b) for p in pots)
            value *= num / z if z else 0.0
        joint[x] = value
    return ids, joint / joint.sum()


def tree_joint(tree):
    """Joint array over sorted ids from ``prod(cliques) / prod(separators)`` (0/0 = 0)."""
    cards = tree.cards
    ids = sorted(cards)
    joint = np.zeros([cards[v] for v in ids])
    for x in assignments(ids, cards):
        a = dict(zip(ids, x))
        num = math.prod(cell(p, a) for p in tree.potentials)
        den = math.prod(cell(s.potential, a) for s in tree.separators)
        joint[x] = num / den if den else 0.0
    return ids, joint / joint.sum()


def marginal(ids, joint, keep):
    """Marginal array with axes in the order of ``keep``."""
    keep = list(keep)
    drop = tuple(i for i, v in enumerate(ids) if v not in keep)
    m = joint.sum(axis=drop) if drop else joint
    remaining = [v for v in ids if v in keep]
    return np.transpose(m, [remaining.index(v) for v in keep]) if keep else m


def kl(p, q):
    p = np.asarray(p).ravel()
    q = np.asarray(q).ravel()
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def cmi(ids, joint, a, b, c):
    """Conditional mutual information of sets ``a`` and ``b`` given ``c``."""
    a, b, c = list(a), list(b), list(c)
    pabc = marginal(ids, joint, a + b + c)
    pac = marginal(ids, joint, a + c)
    pbc = marginal(ids, joint, b + c)
    pc = marginal(ids, joint, c)
    na, nb = len(a), len(b)
    # broadcast to the (a, b, c) layout
    pac_b = np.expand_dims(pac, tuple(range(na, na + nb)))
    pbc_b = np.expand_dims(pbc, tuple(range(na)))
    pc_b = np.expand_dims(pc, tuple(range(na + nb))) if c else pc
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(pc_b > 0, pac_b * pbc_b / np.where(pc_b > 0, pc_b, 1.0), 0.0)
    return kl(pabc, np.broadcast_to(q, pabc.shape))


def state_count(variables, cards):
    """Number of joint configurations, by explicit enumeration."""
    return sum(1 for _ in assignments(sorted(variables), cards))
