"""Adapting a stable marriage via weights and a minimum-weight stable matching.

Each acceptable pair gets an integer weight so that for every stable
matching M (all of which match the same agents),

    w(M) = 3n * (|P ∩ M| - |M ∩ Q|) + |M △ M1|,

with n the number of agents per side.  A minimum-weight stable matching
then answers the adaptation query: it satisfies the constraints and
minimizes |M △ M1| exactly when its weight is below the acceptance
threshold.  The minimum-weight matching itself is found by translating
the rotation poset into a minimum-cut (maximum-weight closure) problem.
"""

from __future__ import annotations

from typing import Mapping, Optional, Union

import networkx as nx

from .core import (
    AdaptQuery,
    Infeasible,
    Instance,
    Matching,
    Pair,
    complete_with_dummies,
    pair_of,
    require_stable,
)
from .errors import ForcedForbiddenOverlap
from .rotations import (
    RotationPoset,
    build_rotation_poset,
    first_stable_matching,
)

PairWeights = dict[Pair, int]


def _per_side(instance: Instance) -> int:
    if instance.kind != "sm":
        raise ValueError("operation requires a bipartite (marriage) instance")
    return max(len(instance.left), len(instance.right))


def adaptation_weights(
    instance: Instance,
    m1: Matching,
    forced: frozenset[Pair],
    forbidden: frozenset[Pair],
) -> PairWeights:
    """Integer pair weights encoding the adaptation objective.

    With n agents per side: forbidden pairs weigh 3n (in m1) or 3n+2
    (outside m1), forced pairs -3n (in m1) or 2-3n (outside m1), other
    m1 pairs 0, and everything else 2.  The +2 offsets track membership
    in the symmetric difference with m1, making the weight identity in
    the module docstring exact for every stable matching.
    """
    if forced & forbidden:
        raise ForcedForbiddenOverlap("a pair is both forced and forbidden")
    n = _per_side(instance)
    weights: PairWeights = {}
    for e in instance.acceptable_pairs:
        in_m1 = e in m1.pairs
        if e in forbidden:
            weights[e] = 3 * n if in_m1 else 3 * n + 2
        elif e in forced:
            weights[e] = -3 * n if in_m1 else 2 - 3 * n
        elif in_m1:
            weights[e] = 0
        else:
            weights[e] = 2
    return weights


def _left_closure_structure(poset: RotationPoset):
    """Left-side rotation ids if the poset splits cleanly across sides, else None.

    Requires every rotation nonsingular, every rotation's moving agents
    on one side with its dual on the other, and precedence edges only
    between same-side rotations.  Bipartite instances satisfy this; the
    check guards the minimum-cut path, with exhaustive enumeration as
    fallback.
    """
    instance = poset.instance
    if poset.singular_ids:
        return None
    left_ids = []
    for rot in poset.rotations:
        sides = {instance.side_of(i) for i, _ in rot.cycle}
        if len(sides) != 1:
            return None
        side = sides.pop()
        dual = poset.rotations[rot.dual_id]
        dual_sides = {instance.side_of(i) for i, _ in dual.cycle}
        if dual_sides == sides or len(dual_sides) != 1:
            return None
        if any(
            {instance.side_of(i) for i, _ in poset.rotations[p].cycle} != {side}
            for p in poset.preds[rot.rid]
        ):
            return None
        if side == "left":
            left_ids.append(rot.rid)
    return left_ids


def _weight_of(weights: Mapping[Pair, int], a: int, b: int) -> int:
    return weights.get(pair_of(a, b), 0)


def _matching_weight(weights: Mapping[Pair, int], m: Matching) -> int:
    return sum(weights.get(e, 0) for e in m.pairs)


def _min_weight_by_cut(
    poset: RotationPoset, weights: Mapping[Pair, int], left_ids: list[int]
) -> Matching:
    """Minimum-weight stable matching via maximum-weight closure / minimum cut.

    A stable matching corresponds to a predecessor-closed subset S of the
    left-side rotations; its weight is the base matching's weight plus the
    weight deltas of the rotations in S.  Minimizing that sum is the
    classical project-selection problem.
    """
    delta = {}
    for rid in left_ids:
        cyc = poset.rotations[rid].cycle
        r = len(cyc)
        delta[rid] = sum(
            _weight_of(weights, cyc[s][0], cyc[(s + 1) % r][1])
            - _weight_of(weights, cyc[s][0], cyc[s][1])
            for s in range(r)
        )

    g = nx.DiGraph()
    g.add_node("s")
    g.add_node("t")
    for rid in left_ids:
        profit = -delta[rid]
        if profit > 0:
            g.add_edge("s", rid, capacity=profit)
        elif profit < 0:
            g.add_edge(rid, "t", capacity=-profit)
        else:
            g.add_node(rid)
        for p in poset.preds[rid]:
            g.add_edge(rid, p)  # no capacity: uncuttable, selection forces predecessors
    _, (source_side, _) = nx.minimum_cut(g, "s", "t")
    selected = set(source_side) - {"s"}
    assert all(poset.preds[r] <= selected for r in selected), "cut selected a non-closed set"

    z = frozenset(selected | {
        poset.rotations[r].dual_id for r in left_ids if r not in selected
    })
    m = poset.matching_by_z.get(z)
    assert m is not None, "left-closure selection is not a stable matching"
    base_z = frozenset(poset.rotations[r].dual_id for r in left_ids)
    base = poset.matching_by_z.get(base_z)
    assert base is not None, "left-optimal rotation set is not a stable matching"
    assert _matching_weight(weights, m) == _matching_weight(weights, base) + sum(
        delta[r] for r in selected
    ), "rotation weight deltas do not telescope"
    return m


def min_weight_stable_marriage(
    instance: Instance,
    weights: Mapping[Pair, int],
    table_cap: Optional[int] = None,
) -> tuple[Matching, int]:
    """A stable matching minimizing the sum of pair weights, and that sum.

    Pairs absent from ``weights`` count as 0.  Raises NoStableMatching
    when the instance has no stable matching.
    """
    instance.require_strict()
    _per_side(instance)
    m0 = first_stable_matching(instance)
    aug, _ = complete_with_dummies(instance, m0)
    poset = build_rotation_poset(aug, table_cap)

    left_ids = _left_closure_structure(poset)
    if left_ids is not None:
        best = _min_weight_by_cut(poset, weights, left_ids)
    else:
        best = min(
            poset.stable_matchings,
            key=lambda m: (_matching_weight(weights, m), m.sorted_pairs()),
        )
    result = best.restrict(range(instance.n))
    return result, _matching_weight(weights, result)


def adapt_sm(
    instance: Instance, query: AdaptQuery, table_cap: Optional[int] = None
) -> Union[Matching, Infeasible]:
    """Closest stable marriage to query.m1 containing all forced, no forbidden pairs.

    Computes the adaptation weights, finds a minimum-weight stable
    matching M*, and accepts iff w(M*) <= -3n|Q| + min(k, 2n); the budget
    is clamped to 2n, the largest possible symmetric difference, so that
    oversized budgets cannot leak a constraint-violating matching through
    the threshold.
    """
    aug, m1 = _prepare(instance, query.m1)
    n = _per_side(aug)
    weights = adaptation_weights(aug, m1, query.forced, query.forbidden)
    m_star, total = min_weight_stable_marriage(aug, weights, table_cap)
    threshold = -3 * n * len(query.forced) + min(query.k, 2 * n)
    if total > threshold:
        return Infeasible(
            f"minimum adaptation weight {total} exceeds threshold {threshold}"
        )
    assert query.forced <= m_star.pairs, "accepted matching misses a forced pair"
    assert not (query.forbidden & m_star.pairs), "accepted matching has a forbidden pair"
    assert len(m_star.pairs ^ m1.pairs) <= query.k, "accepted matching exceeds the budget"
    return m_star.restrict(range(instance.n))


def _prepare(instance: Instance, m1: Matching):
    _per_side(instance)
    instance.require_strict()
    require_stable(instance, m1)
    return complete_with_dummies(instance, m1)
