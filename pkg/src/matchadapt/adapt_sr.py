"""Adapting a stable roommates matching to forced and forbidden pairs.

Given a stable matching m1, forced pairs Q, forbidden pairs P, and a
budget k, find a stable matching containing Q and avoiding P that
minimizes the symmetric difference to m1, exploring one candidate per
assignment of "which endpoint improves" over the pairs of P ∩ m1
(2^{|P ∩ m1|} candidates total).  Candidates are produced by integrating
rotations into m1's closed complete rotation set and validated a
posteriori; the rank-window variant constrains each agent's partner to
an interval of its preference list instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Union

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
from .errors import SingularRotation, WindowUnsatisfiable
from .rotations import Rotation, RotationPoset, build_rotation_poset, rho_of


@dataclass(frozen=True)
class GuessVector:
    """For each forbidden pair in P ∩ m1, the endpoint that must strictly improve.

    Exactly one endpoint per pair is designated.
    """

    designated: tuple[tuple[Pair, int], ...]

    def __post_init__(self):
        for pair, agent in self.designated:
            if agent not in pair:
                raise ValueError(f"designated agent {agent} not in pair {pair}")

    def items(self) -> tuple[tuple[Pair, int], ...]:
        return self.designated


@dataclass(frozen=True)
class RankWindow:
    """Bounds on an agent's partner: strictly worse than upper, strictly better than lower."""

    agent: int
    upper: Optional[int] = None
    lower: Optional[int] = None


def integrate(
    poset: RotationPoset, z: Iterable[int], phi: Union[Rotation, int]
) -> frozenset[int]:
    """Force a nonsingular rotation into a closed complete set.

    Adds phi with all its predecessors and removes phi's dual with all
    the dual's successors; the result is again closed and complete.
    """
    rid = phi if isinstance(phi, int) else (
        phi.rid if phi.rid >= 0 else poset.rid_by_cycle[phi.cycle]
    )
    rot = poset.rotations[rid]
    if rot.dual_id is None:
        raise SingularRotation(f"rotation {rid} has no dual and cannot be integrated")
    out = (frozenset(z) | {rid} | poset.preds[rid]) - (
        {rot.dual_id} | poset.succs[rot.dual_id]
    )
    assert poset.is_closed_complete(out), "integration broke closedness/completeness"
    return out


class _Run:
    """One candidate construction: a rotation set plus clash bookkeeping.

    A clash — integrating a rotation whose dual was integrated earlier in
    the same run — proves the run's constraints are jointly unsatisfiable,
    so the caller abandons the candidate.
    """

    __slots__ = ("poset", "z", "committed")

    def __init__(self, poset: RotationPoset, z: frozenset[int],
                 committed: frozenset[int] = frozenset()):
        self.poset = poset
        self.z = z
        self.committed = set(committed)

    def fork(self) -> "_Run":
        return _Run(self.poset, self.z, frozenset(self.committed))

    def integrate(self, rid: int) -> bool:
        """Integrate rotation rid; False signals a clash."""
        rot = self.poset.rotations[rid]
        if rot.dual_id in self.committed:
            return False
        self.committed.add(rid)
        self.z = integrate(self.poset, self.z, rid)
        return True


def _strictly_better_partners(poset: RotationPoset, a: int, b: int) -> list[int]:
    """Stable partners of a strictly preferred (by a) to b, best first."""
    rk = poset.instance.rank_matrix[a]
    return [p for p in poset.stable_partners(a) if rk[p] < rk[b]]


def _force_at_least(run: _Run, a: int, b_star: int) -> bool:
    """Constrain agent a to be matched to b_star or better.  False on clash/impossibility."""
    rho = rho_of(run.poset, a, b_star)
    if rho is None:
        # No integrable rotation can pin a at b_star or better; the
        # candidate will fail validation, so give up on this run.
        return False
    return run.integrate(rho.rid)


def _force_below(run: _Run, a: int, b: int) -> bool:
    """Constrain agent a to be matched strictly worse than b.  False on clash."""
    rid = run.poset.pair_index.get((a, b))
    if rid is None:
        # (a, b) is in no rotation: either b is not a stable partner of a,
        # or a is never matched below b; only the former is consistent
        # with calling this, and then nothing needs forcing.
        return True
    if run.poset.rotations[rid].dual_id is None:
        # Singular rotations belong to every closed complete set, so the
        # constraint already holds everywhere.
        return True
    return run.integrate(rid)


def _force_forced_pair(run: _Run, a: int, b: int) -> bool:
    """Constrain the stable, non-fixed pair {a, b} into the matching.

    a must have a stable partner strictly worse than b; a is then pinned
    at b-or-better and pushed off every partner strictly better than b.
    """
    if not _force_at_least(run, a, b):
        return False
    for b_star in _strictly_better_partners(run.poset, a, b):
        if not _force_below(run, a, b_star):
            return False
    return True


def _candidate(run: _Run) -> Optional[Matching]:
    return run.poset.matching_by_z.get(run.z)


def _drive_out_forbidden(
    run: _Run, forbidden: frozenset[Pair], m1: Matching
) -> Optional[Matching]:
    """Repeatedly push forbidden non-m1 pairs out of the run's matching.

    For a forbidden pair {a, b} currently matched, the endpoint a that
    prefers its current partner to its m1-partner is lifted above the
    least-preferred stable partner it prefers to b; pairs with no such
    partner are skipped permanently.  Returns the final candidate, or
    None when the run clashed.
    """
    poset = run.poset
    rk = poset.instance.rank_matrix
    skip: set[Pair] = set()
    budget = len(poset.rotations) + len(forbidden) + 1
    while True:
        m = _candidate(run)
        assert m is not None, "run's rotation set lost its matching"
        offending = sorted(e for e in (forbidden & m.pairs) - m1.pairs if e not in skip)
        if not offending:
            return m
        if budget <= 0:
            return None
        budget -= 1
        e = offending[0]
        x, y = e
        # The endpoint preferring its current partner over its m1-partner.
        def improves(a: int, b: int) -> bool:
            p1 = m1.partner(a)
            return p1 is None or rk[a][b] < rk[a][p1]
        a, b = (x, y) if improves(x, y) else (y, x)
        better = _strictly_better_partners(poset, a, b)
        if not better:
            skip.add(e)
            continue
        b_star = better[-1]  # least-preferred strictly better stable partner
        if not _force_at_least(run, a, b_star):
            return None


def _validate(
    poset: RotationPoset,
    m: Matching,
    m1: Matching,
    forced: frozenset[Pair],
    forbidden: frozenset[Pair],
    guess: GuessVector,
) -> bool:
    if not forced <= m.pairs:
        return False
    if forbidden & m.pairs:
        return False
    rk = poset.instance.rank_matrix
    for pair, designated in guess.items():
        a, b = pair
        other = b if designated == a else a
        pd, po = m.partner(designated), m.partner(other)
        d_improves = pd is not None and rk[designated][pd] < rk[designated][other]
        o_improves = po is not None and rk[other][po] < rk[other][designated]
        if not d_improves or o_improves:
            return False
    return True


def _strip_dummies(instance: Instance, m: Matching) -> Matching:
    return m.restrict(range(instance.n))


def _prepare(instance, m1):
    instance.require_strict()
    require_stable(instance, m1)
    return complete_with_dummies(instance, m1)


def adapt(
    instance: Instance, query: AdaptQuery, table_cap: Optional[int] = None
) -> Union[Matching, Infeasible]:
    """Closest stable matching to query.m1 containing all forced, no forbidden pairs.

    Returns Infeasible when no stable matching satisfies the constraints
    within budget query.k.  Incomplete m1 is handled internally by the
    dummy-agent completion; the result is reported on the original agents.
    """
    if query.forced & query.forbidden:
        return Infeasible("a pair is both forced and forbidden")
    agents = [x for p in query.forced for x in p]
    if len(set(agents)) != len(agents):
        return Infeasible("two forced pairs share an agent")

    aug, m1 = _prepare(instance, query.m1)
    poset = build_rotation_poset(aug, table_cap)
    stable = poset.stable_pair_set
    if not query.forced <= stable:
        return Infeasible("a forced pair is not a stable pair")
    if query.forbidden & poset.fixed_pair_set:
        return Infeasible("a forbidden pair is contained in every stable matching")
    forbidden = query.forbidden & stable  # non-stable forbidden pairs never occur

    base = _Run(poset, poset.z_by_matching[m1])
    rk = aug.rank_matrix

    # Forced pairs: common to every guess.
    for p, q in sorted(query.forced - poset.fixed_pair_set):
        def has_worse(x: int, y: int) -> bool:
            return any(rk[x][z] > rk[x][y] for z in poset.stable_partners(x))
        endpoints = [x for x, y in ((p, q), (q, p)) if has_worse(x, y)]
        if not endpoints:
            return Infeasible(f"forced pair ({p},{q}) cannot be established")
        a = endpoints[0]
        b = q if a == p else p
        if not _force_forced_pair(base, a, b):
            return Infeasible("forced-pair constraints are jointly unsatisfiable")

    in_m1 = sorted(forbidden & m1.pairs)
    best: Optional[tuple[int, list, Matching]] = None
    for choice in product((0, 1), repeat=len(in_m1)):
        guess = GuessVector(tuple((e, e[c]) for e, c in zip(in_m1, choice)))
        run = base.fork()
        ok = True
        for e, designated in guess.items():
            other = e[1] if designated == e[0] else e[0]
            better = _strictly_better_partners(poset, designated, other)
            if not better or not _force_at_least(run, designated, better[-1]):
                ok = False
                break
        if not ok:
            continue
        m = _drive_out_forbidden(run, forbidden, m1)
        if m is None:
            continue
        if not _validate(poset, m, m1, query.forced, query.forbidden, guess):
            continue
        delta = len(m.pairs ^ m1.pairs)
        key = (delta, m.sorted_pairs())
        if best is None or key < (best[0], best[1]):
            best = (delta, m.sorted_pairs(), m)

    if best is None:
        return Infeasible("no guess yields a stable matching meeting the constraints")
    if best[0] > query.k:
        return Infeasible(
            f"closest satisfying matching has symmetric difference {best[0]} > k={query.k}"
        )
    return _strip_dummies(instance, best[2])


def adapt_with_rank_windows(
    instance: Instance,
    m1: Matching,
    windows: Iterable[RankWindow],
    k: int,
    table_cap: Optional[int] = None,
) -> Union[Matching, Infeasible]:
    """Closest stable matching to m1 whose partners respect per-agent rank windows.

    A window requires the agent's partner to be strictly worse than
    ``upper`` and strictly better than ``lower`` (one-sided windows leave
    the other bound open).  Raises WindowUnsatisfiable when a window
    excludes every stable partner of its agent.
    """
    aug, m1c = _prepare(instance, m1)
    poset = build_rotation_poset(aug, table_cap)
    rk = aug.rank_matrix

    windows = list(windows)
    for w in windows:
        if w.upper is not None and w.lower is not None:
            if rk[w.agent][w.upper] >= rk[w.agent][w.lower]:
                raise ValueError("window's upper bound must be preferred to its lower bound")

    run = _Run(poset, poset.z_by_matching[m1c])
    for w in windows:
        a = w.agent
        partners = poset.stable_partners(a)
        admissible = [
            p
            for p in partners
            if (w.upper is None or rk[a][p] > rk[a][w.upper])
            and (w.lower is None or rk[a][p] < rk[a][w.lower])
        ]
        if not admissible:
            raise WindowUnsatisfiable(
                f"no stable partner of {aug.names[a]} lies inside its rank window"
            )
        if w.lower is not None and any(rk[a][p] >= rk[a][w.lower] for p in partners):
            # Lift a above the window's lower bound, as weakly as possible.
            target = admissible[-1]
            if not _force_at_least(run, a, target):
                return Infeasible("rank-window constraints are jointly unsatisfiable")
        if w.upper is not None:
            for b in partners:
                if rk[a][b] <= rk[a][w.upper] and not _force_below(run, a, b):
                    return Infeasible("rank-window constraints are jointly unsatisfiable")

    m = _candidate(run)
    assert m is not None
    for w in windows:
        p = m.partner(w.agent)
        if p is None:
            return Infeasible("windowed agent ends up unmatched")
        if w.upper is not None and rk[w.agent][p] <= rk[w.agent][w.upper]:
            return Infeasible("rank-window constraints are jointly unsatisfiable")
        if w.lower is not None and rk[w.agent][p] >= rk[w.agent][w.lower]:
            return Infeasible("rank-window constraints are jointly unsatisfiable")
    delta = len(m.pairs ^ m1c.pairs)
    if delta > k:
        return Infeasible(
            f"closest window-respecting matching has symmetric difference {delta} > k={k}"
        )
    return _strip_dummies(instance, m)
