"""Exhaustive reference solvers, exact by construction and capped by size.

These are the ground truth the fast algorithms are tested against, and
the only solvers offered for the NP-hard variants with ties.  Caps raise
InstanceTooLarge instead of running for hours.
"""

from __future__ import annotations

import os
from itertools import product
from typing import Optional, Union

from .core import (
    AdaptQuery,
    Infeasible,
    Instance,
    Matching,
    StabilityNotion,
    UNACCEPTABLE,
    is_stable,
)
from .errors import InstanceTooLarge
from .rotations import RotationPoset

DEFAULT_ORACLE_CAP = 12
DEFAULT_SUBSET_CAP = 24

_UNDECIDED = -2
_UNMATCHED = -1


def oracle_cap_default() -> int:
    return int(os.environ.get("MATCHADAPT_ORACLE_CAP", DEFAULT_ORACLE_CAP))


def enumerate_stable_matchings(
    instance: Instance,
    notion: StabilityNotion = StabilityNotion.STRICT,
    cap: Optional[int] = None,
) -> tuple[Matching, ...]:
    """Every stable matching of the instance, in canonical order.

    Backtracks over agents in id order, pruning partial matchings that
    already contain a pair both of whose decided endpoints strictly
    prefer each other (which blocks under every notion); the full
    notion-specific check runs at the leaves.
    """
    cap = cap if cap is not None else oracle_cap_default()
    if instance.n > cap:
        raise InstanceTooLarge(
            f"oracle enumeration capped at {cap} agents, instance has {instance.n}"
        )
    notion = StabilityNotion(notion)
    if notion is StabilityNotion.STRICT:
        instance.require_strict()
    n = instance.n
    rk = instance.rank_matrix
    acceptable = instance.acceptable
    partner = [_UNDECIDED] * n
    results: list[Matching] = []

    def creates_block(a: int) -> bool:
        # Does a (now decided) strictly-strictly block with any decided agent?
        pa = partner[a]
        for x in acceptable[a]:
            px = partner[x]
            if px == _UNDECIDED or px == a:
                continue
            if (pa == _UNMATCHED or rk[a][x] < rk[a][pa]) and (
                px == _UNMATCHED or rk[x][a] < rk[x][px]
            ):
                return True
        return False

    def rec(a: int) -> None:
        while a < n and partner[a] != _UNDECIDED:
            a += 1
        if a == n:
            m = Matching(
                (x, partner[x]) for x in range(n) if 0 <= partner[x] and x < partner[x]
            )
            # Every pair was strict-strict-checked when its later endpoint
            # was decided, which is the full blocking condition for the
            # strict and weak notions; only strong needs a leaf re-check.
            if notion is not StabilityNotion.STRONG or is_stable(instance, m, notion):
                results.append(m)
            return
        for b in acceptable[a]:
            if b < a or partner[b] != _UNDECIDED:
                continue
            partner[a] = b
            partner[b] = a
            if not creates_block(a) and not creates_block(b):
                rec(a + 1)
            partner[a] = _UNDECIDED
            partner[b] = _UNDECIDED
        partner[a] = _UNMATCHED
        if not creates_block(a):
            rec(a + 1)
        partner[a] = _UNDECIDED

    rec(0)
    return tuple(sorted(results, key=lambda m: m.sorted_pairs()))


def oracle_adapt(
    instance: Instance,
    query: AdaptQuery,
    notion: StabilityNotion = StabilityNotion.STRICT,
    cap: Optional[int] = None,
) -> Union[Matching, Infeasible]:
    """Adaptation by brute force: filter all stable matchings, keep the closest.

    Returns the stable matching containing every forced pair and no
    forbidden pair that minimizes the symmetric difference to m1, provided
    that minimum is within k; ties break lexicographically.
    """
    best: Optional[tuple[int, list, Matching]] = None
    for m in enumerate_stable_matchings(instance, notion, cap):
        if not query.forced <= m.pairs:
            continue
        if query.forbidden & m.pairs:
            continue
        delta = len(m.pairs ^ query.m1.pairs)
        key = (delta, m.sorted_pairs())
        if best is None or key < (best[0], best[1]):
            best = (delta, m.sorted_pairs(), m)
    if best is None:
        return Infeasible("no stable matching satisfies the forced/forbidden constraints")
    if best[0] > query.k:
        return Infeasible(
            f"closest satisfying matching has symmetric difference {best[0]} > k={query.k}"
        )
    return best[2]


def enumerate_closed_complete_subsets(
    poset: RotationPoset, cap: int = DEFAULT_SUBSET_CAP
) -> tuple[frozenset[int], ...]:
    """All closed complete rotation subsets, by brute force over dual pairs.

    Every complete set contains all singular rotations and exactly one
    member of each dual pair; closedness is then checked directly.
    """
    pairs = poset.dual_pairs
    if len(pairs) > cap:
        raise InstanceTooLarge(
            f"subset enumeration capped at {cap} dual pairs, poset has {len(pairs)}"
        )
    base = poset.singular_ids
    out = []
    for bits in product((0, 1), repeat=len(pairs)):
        z = set(base)
        for bit, (rid, dual_rid) in zip(bits, pairs):
            z.add(dual_rid if bit else rid)
        zf = frozenset(z)
        if all(poset.preds[r] <= zf for r in zf):
            out.append(zf)
    return tuple(sorted(out, key=sorted))
