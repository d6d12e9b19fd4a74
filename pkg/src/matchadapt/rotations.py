"""Irving's algorithm, stable tables, rotations, and the rotation poset.

The poset is discovered by exhaustive exploration of all stable tables
reachable from the Phase-1 table P0, memoized on the set of eliminated
rotations.  Precedence is computed literally: a rotation precedes another
iff it has been eliminated in every explored table exposing the other.
Exploration is exponential in the worst case but exact; a configurable
cap turns adversarial blow-ups into a structured failure.

Preconditions: strict preferences, and an instance all of whose stable
matchings are complete (preprocess with ``complete_with_dummies``).
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .core import Instance, Matching, pair_of
from .errors import (
    NoStableMatching,
    NotClosedComplete,
    NotStable,
    ResourceExhausted,
    RotationNotExposed,
    SingularRotation,
)

Cycle = tuple[tuple[int, int], ...]
Lists = tuple[tuple[int, ...], ...]

DEFAULT_TABLE_CAP = 1_000_000


def table_cap_default() -> int:
    return int(os.environ.get("MATCHADAPT_TABLE_CAP", DEFAULT_TABLE_CAP))


def canonical_cycle(pairs: Sequence[tuple[int, int]]) -> Cycle:
    """Rotate the cyclic pair sequence so its smallest ordered pair leads.

    A rotation has no fixed start point; shifted variants must compare equal.
    """
    pairs = tuple(pairs)
    k = pairs.index(min(pairs))
    return pairs[k:] + pairs[:k]


def dual_cycle(cycle: Cycle) -> Cycle:
    """The dual companion cycle: pair s is (j_s, i_{s-1})."""
    r = len(cycle)
    return canonical_cycle([(cycle[s][1], cycle[s - 1][0]) for s in range(r)])


class Rotation:
    """A rotation: a canonical cyclic sequence of ordered agent pairs.

    Equality and hashing use the canonical cycle only, so rotations
    discovered in different contexts compare equal.  ``dual_id`` is None
    for singular rotations (and for rotations not yet tied to a poset,
    distinguished by ``rid < 0``).
    """

    __slots__ = ("rid", "cycle", "dual_id")

    def __init__(self, cycle: Sequence[tuple[int, int]], rid: int = -1,
                 dual_id: Optional[int] = None):
        self.cycle: Cycle = canonical_cycle(cycle)
        self.rid = rid
        self.dual_id = dual_id

    @property
    def singular(self) -> bool:
        return self.dual_id is None

    def __eq__(self, other) -> bool:
        return isinstance(other, Rotation) and self.cycle == other.cycle

    def __hash__(self) -> int:
        return hash(self.cycle)

    def __repr__(self) -> str:
        return f"Rotation(rid={self.rid}, cycle={self.cycle})"


@dataclass(frozen=True)
class StableTable:
    """Reduced preference lists derived from P0 by eliminating exposed rotations.

    ``provenance`` records the canonical cycles eliminated to reach this
    table from P0, in order.
    """

    lists: Lists
    provenance: tuple[Cycle, ...] = ()

    def first(self, a: int) -> int:
        return self.lists[a][0]

    def second(self, a: int) -> int:
        return self.lists[a][1]

    def last(self, a: int) -> int:
        return self.lists[a][-1]

    def is_terminal(self) -> bool:
        return all(len(l) <= 1 for l in self.lists)


def phase1(instance: Instance, allow_empty: bool = False) -> StableTable:
    """Phase 1 of Irving's algorithm: proposals, rejections, and deletions.

    Returns the reduced table P0.  Unless ``allow_empty`` is set, raises
    NoStableMatching if the list of an agent with a nonempty original
    list is exhausted, which under the complete-stable-matchings
    precondition certifies unsolvability.  With ``allow_empty`` the agent
    is simply left with an empty list (it is unmatched in every stable
    matching when one exists).
    """
    instance.require_strict()
    n = instance.n
    lists = [list(instance.acceptable[a]) for a in range(n)]
    inset = [set(l) for l in lists]
    rk = instance.rank_matrix
    held: list[Optional[int]] = [None] * n

    def delete(x: int, y: int) -> None:
        if y in inset[x]:
            inset[x].discard(y)
            lists[x].remove(y)
            inset[y].discard(x)
            lists[y].remove(x)

    free = deque(a for a in range(n) if lists[a])
    while free:
        a = free.popleft()
        if not lists[a]:
            if allow_empty:
                continue
            raise NoStableMatching(
                f"agent {instance.names[a]} was rejected by every acceptable agent"
            )
        b = lists[a][0]
        cur = held[b]
        if cur is None:
            held[b] = a
        elif rk[b][a] < rk[b][cur]:
            held[b] = a
            delete(b, cur)
            free.append(cur)
        else:
            delete(a, b)
            free.append(a)

    # Final reduction: each proposal holder discards everyone below its proposer.
    removals: list[tuple[int, int]] = []
    for b in range(n):
        x = held[b]
        if x is None:
            continue
        pos = lists[b].index(x)
        removals.extend((b, y) for y in lists[b][pos + 1:])
    for b, y in removals:
        delete(b, y)
    if not allow_empty:
        for a in range(n):
            if not lists[a] and instance.acceptable[a]:
                raise NoStableMatching(
                    f"agent {instance.names[a]}'s list emptied during Phase 1"
                )
    return StableTable(lists=tuple(tuple(l) for l in lists))


def _exposed_cycles(lists: Lists) -> list[Cycle]:
    """All rotations exposed in the table, via the second-choice/last-choice walk."""
    n = len(lists)
    done = [False] * n
    out = []
    for start in range(n):
        if done[start] or len(lists[start]) < 2:
            continue
        seen_at: dict[int, int] = {}
        path: list[int] = []
        x = start
        while not done[x] and len(lists[x]) >= 2:
            if x in seen_at:
                cyc = path[seen_at[x]:]
                out.append(canonical_cycle([(i, lists[i][0]) for i in cyc]))
                break
            seen_at[x] = len(path)
            path.append(x)
            x = lists[lists[x][1]][-1]
        for y in path:
            done[y] = True
    return sorted(out)


def exposed_rotations(table: StableTable) -> tuple[Rotation, ...]:
    """All rotations exposed in the table (empty when the table is terminal)."""
    cycles = _exposed_cycles(table.lists)
    for cyc in cycles:
        for i, j in cyc:
            # Exposure invariant: i is the last entry of j's reduced list.
            assert table.lists[j][-1] == i, "exposed walk produced a non-rotation"
    return tuple(Rotation(c) for c in cycles)


def _eliminate_lists(lists: Lists, cycle: Cycle) -> Lists:
    removals: set[tuple[int, int]] = set()
    r = len(cycle)
    for s in range(r):
        y = cycle[s][1]
        prev_i = cycle[s - 1][0]
        ly = lists[y]
        pos = ly.index(prev_i)
        for z in ly[pos + 1:]:
            removals.add((y, z))
            removals.add((z, y))
    new_lists = []
    for a, l in enumerate(lists):
        nl = tuple(x for x in l if (a, x) not in removals)
        if not nl and l:
            raise NoStableMatching(
                f"list of agent {a} emptied by a rotation elimination"
            )
        new_lists.append(nl)
    return tuple(new_lists)


def eliminate(table: StableTable, rotation: Union[Rotation, Cycle]) -> StableTable:
    """Eliminate an exposed rotation, deleting symmetrically to keep the table symmetric."""
    cycle = rotation.cycle if isinstance(rotation, Rotation) else canonical_cycle(rotation)
    r = len(cycle)
    for s in range(r):
        i, j = cycle[s]
        nxt_j = cycle[(s + 1) % r][1]
        li = table.lists[i]
        if len(li) < 2 or li[0] != j or li[1] != nxt_j:
            raise RotationNotExposed(f"rotation {cycle} is not exposed in this table")
    return StableTable(
        lists=_eliminate_lists(table.lists, cycle),
        provenance=table.provenance + (cycle,),
    )


def _terminal_matching(lists: Lists) -> Matching:
    pairs = []
    for a, l in enumerate(lists):
        assert len(l) <= 1, "non-terminal table treated as terminal"
        if l:
            b = l[0]
            assert lists[b] == (a,), "asymmetric terminal table"
            if a < b:
                pairs.append((a, b))
    return Matching(pairs)


@dataclass(frozen=True)
class RotationPoset:
    """All rotations of an instance with precedence, duals, and the Lemma-2 bijection data.

    Immutable once built; safe for concurrent reads.
    """

    instance: Instance
    p0: StableTable
    rotations: tuple[Rotation, ...]
    preds: tuple[frozenset[int], ...]  # full precedence relation, not reduced
    succs: tuple[frozenset[int], ...]
    pair_index: dict[tuple[int, int], int]
    singular_ids: frozenset[int]
    stable_matchings: tuple[Matching, ...]
    z_by_matching: dict[Matching, frozenset[int]]
    matching_by_z: dict[frozenset[int], Matching]
    stable_pair_set: frozenset[tuple[int, int]]
    fixed_pair_set: frozenset[tuple[int, int]]
    rid_by_cycle: dict[Cycle, int] = field(repr=False, default_factory=dict)

    @property
    def dual_pairs(self) -> list[tuple[int, int]]:
        out = []
        for rot in self.rotations:
            if rot.dual_id is not None and rot.rid < rot.dual_id:
                out.append((rot.rid, rot.dual_id))
        return out

    def dual(self, rid: int) -> Optional[int]:
        return self.rotations[rid].dual_id

    def stable_partners(self, a: int) -> tuple[int, ...]:
        """Stable partners of agent a, best first."""
        partners = [q if p == a else p for p, q in self.stable_pair_set if a in (p, q)]
        return tuple(sorted(partners, key=lambda b: self.instance.rank_matrix[a][b]))

    def is_closed_complete(self, z: Iterable[int]) -> bool:
        z = frozenset(z)
        if not self.singular_ids <= z:
            return False
        for rot in self.rotations:
            if rot.dual_id is not None and rot.rid < rot.dual_id:
                if (rot.rid in z) == (rot.dual_id in z):
                    return False
        return all(self.preds[r] <= z for r in z)


def build_rotation_poset(
    instance: Instance, table_cap: Optional[int] = None
) -> RotationPoset:
    """Discover every rotation, the precedence relation, duals, and all stable matchings.

    Explores every stable table reachable from P0 (one per closed rotation
    subset); terminal tables yield the instance's stable matchings.
    """
    cap = table_cap if table_cap is not None else table_cap_default()
    p0 = phase1(instance)

    rid_by_cycle: dict[Cycle, int] = {}
    cycles: list[Cycle] = []
    pre: list[set[int]] = []  # running intersection of pre-exposure elimination sets
    terminals: dict[frozenset[int], Matching] = {}
    visited: set[frozenset[int]] = {frozenset()}
    stack: list[tuple[frozenset[int], Lists]] = [(frozenset(), p0.lists)]

    while stack:
        elims, lists = stack.pop()
        exposed = _exposed_cycles(lists)
        if not exposed:
            terminals[elims] = _terminal_matching(lists)
            continue
        for cyc in exposed:
            rid = rid_by_cycle.get(cyc)
            if rid is None:
                rid = len(cycles)
                rid_by_cycle[cyc] = rid
                cycles.append(cyc)
                pre.append(set(elims))
            else:
                pre[rid] &= elims
            nxt = elims | {rid}
            if nxt not in visited:
                if len(visited) >= cap:
                    raise ResourceExhausted(
                        f"rotation exploration exceeded {cap} distinct stable tables"
                    )
                visited.add(nxt)
                stack.append((nxt, _eliminate_lists(lists, cyc)))

    rotations = []
    for rid, cyc in enumerate(cycles):
        dual_rid = rid_by_cycle.get(dual_cycle(cyc))
        rotations.append(Rotation(cyc, rid=rid, dual_id=dual_rid))
    for rot in rotations:
        if rot.dual_id is not None:
            assert rotations[rot.dual_id].dual_id == rot.rid, "dual is not an involution"

    preds = tuple(frozenset(s) for s in pre)
    succ_sets: list[set[int]] = [set() for _ in cycles]
    for rid, ps in enumerate(preds):
        assert rid not in ps, "rotation precedes itself"
        for p in ps:
            succ_sets[p].add(rid)
    succs = tuple(frozenset(s) for s in succ_sets)

    pair_index: dict[tuple[int, int], int] = {}
    for rid, cyc in enumerate(cycles):
        for ordered in cyc:
            assert ordered not in pair_index, "ordered pair in two rotations"
            pair_index[ordered] = rid

    singular_ids = frozenset(r.rid for r in rotations if r.dual_id is None)
    z_by_matching: dict[Matching, frozenset[int]] = {}
    for z, matching in terminals.items():
        assert matching not in z_by_matching, "two closed complete sets, one matching"
        z_by_matching[matching] = z
    stable_matchings = tuple(sorted(terminals.values(), key=lambda m: m.sorted_pairs()))
    all_pairs = [m.pairs for m in stable_matchings]
    stable_pair_set = frozenset().union(*all_pairs) if all_pairs else frozenset()
    fixed_pair_set = (
        frozenset.intersection(*all_pairs) if all_pairs else frozenset()
    )

    return RotationPoset(
        instance=instance,
        p0=p0,
        rotations=tuple(rotations),
        preds=preds,
        succs=succs,
        pair_index=pair_index,
        singular_ids=singular_ids,
        stable_matchings=stable_matchings,
        z_by_matching=z_by_matching,
        matching_by_z=dict(terminals),
        stable_pair_set=stable_pair_set,
        fixed_pair_set=fixed_pair_set,
        rid_by_cycle=rid_by_cycle,
    )


def _require_closed_complete(poset: RotationPoset, z: frozenset[int]) -> None:
    if not all(0 <= r < len(poset.rotations) for r in z):
        raise NotClosedComplete("rotation set contains unknown rotation ids")
    if not poset.singular_ids <= z:
        raise NotClosedComplete("rotation set is missing a singular rotation")
    for rid, dual_rid in poset.dual_pairs:
        if (rid in z) == (dual_rid in z):
            raise NotClosedComplete(
                f"rotation set must contain exactly one of the dual pair ({rid},{dual_rid})"
            )
    for r in z:
        if not poset.preds[r] <= z:
            raise NotClosedComplete(f"rotation set is not closed under predecessors of {r}")


def closed_set_to_matching(
    poset: RotationPoset, instance: Instance, z: Iterable[int]
) -> Matching:
    """The stable matching of a closed complete rotation set, by replayed elimination.

    Rotations of z are eliminated from P0 in a precedence-respecting
    exposure order until every list is a singleton; the result is
    independent of the order chosen.
    """
    zs = frozenset(z)
    _require_closed_complete(poset, zs)
    lists = poset.p0.lists
    remaining = set(zs)
    while remaining:
        exposed = _exposed_cycles(lists)
        choices = sorted(
            poset.rid_by_cycle[c] for c in exposed if poset.rid_by_cycle[c] in remaining
        )
        if not choices:
            raise NotClosedComplete("no rotation of the set is exposed; set is not closed")
        rid = choices[0]
        lists = _eliminate_lists(lists, poset.rotations[rid].cycle)
        remaining.discard(rid)
    matching = _terminal_matching(lists)
    return matching


def matching_to_closed_set(
    poset: RotationPoset, instance: Instance, m: Matching
) -> frozenset[int]:
    """The unique closed complete rotation set whose elimination yields m."""
    try:
        return poset.z_by_matching[m]
    except KeyError:
        raise NotStable("matching is not a stable matching of this instance") from None


def stable_pairs(poset: RotationPoset, instance: Instance) -> frozenset[tuple[int, int]]:
    """Pairs contained in at least one stable matching."""
    return poset.stable_pair_set


def fixed_pairs(poset: RotationPoset, instance: Instance) -> frozenset[tuple[int, int]]:
    """Pairs contained in every stable matching."""
    return poset.fixed_pair_set


def first_stable_matching(instance: Instance) -> Matching:
    """Some stable matching of the instance, or NoStableMatching if there is none.

    Runs Phase 1 tolerantly (agents may end unmatched), then eliminates
    exposed rotations greedily until the table is terminal, and finally
    verifies stability of the extracted matching — so the answer is
    correct even for instances whose stable matchings are incomplete.
    """
    from .core import is_stable  # local import to avoid a cycle at module load

    table = phase1(instance, allow_empty=True)
    lists = table.lists
    while True:
        exposed = _exposed_cycles(lists)
        if not exposed:
            break
        lists = _eliminate_lists(lists, exposed[0])
    pairs = []
    for a, l in enumerate(lists):
        if len(l) == 1 and a < l[0]:
            if lists[l[0]] == (a,):
                pairs.append((a, l[0]))
            else:
                raise NoStableMatching("Phase 2 terminated on an asymmetric table")
    m = Matching(pairs)
    if not is_stable(instance, m):
        raise NoStableMatching("reduced table's matching is not stable")
    return m


def rho_of(poset: RotationPoset, a: int, b: int) -> Optional[Rotation]:
    """The dual of the rotation containing the ordered pair (a, b), if any.

    Eliminating the returned rotation makes b the last choice of a.
    Returns None when no rotation contains (a, b) or the containing
    rotation is singular.
    """
    rid = poset.pair_index.get((a, b))
    if rid is None:
        return None
    dual_rid = poset.rotations[rid].dual_id
    if dual_rid is None:
        return None
    return poset.rotations[dual_rid]
