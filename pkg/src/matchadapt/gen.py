"""Instance generators: seeded random instances and hardness-reduction gadgets.

The gadgets turn an Independent Set instance (roommates, forbidden pairs)
or a local-search stable-marriage-with-ties instance (marriage, one
forced or one forbidden pair) into adaptation queries whose yes/no answer
mirrors the source problem.  All generators are deterministic functions
of their inputs and an explicit seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .core import (
    AdaptQuery,
    Instance,
    Matching,
    StabilityNotion,
    pair_of,
    require_stable,
    validate_instance,
)


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u},{v}) not canonical within {self.n} vertices")

    @classmethod
    def make(cls, n: int, edges) -> "Graph":
        return cls(n, frozenset(pair_of(u, v) for u, v in edges))

    def neighbors(self, v: int) -> list[int]:
        return sorted(u ^ v ^ w for u, w in self.edges if v in (u, w))

    def has_independent_set(self, ell: int) -> bool:
        """Brute-force check for an independent set of size ell."""
        from itertools import combinations

        if ell <= 0:
            return True
        for combo in combinations(range(self.n), ell):
            cs = set(combo)
            if not any(u in cs and v in cs for u, v in self.edges):
                return True
        return False


def random_instance(
    n: int,
    kind: str = "sr",
    tie_probability: float = 0.0,
    acceptability_density: float = 1.0,
    seed: int = 0,
) -> Instance:
    """A random instance with symmetric acceptability, deterministic per seed.

    Each potential pair is acceptable with probability
    ``acceptability_density``; within each shuffled preference list, each
    agent joins the preceding tie-group with probability
    ``tie_probability`` (0 gives strict lists, 1 full indifference).
    Marriage instances split the agents into two sides of n//2 and
    n - n//2.
    """
    if n < 2:
        raise ValueError("need at least 2 agents")
    if kind not in ("sr", "sm"):
        raise ValueError(f"unknown kind {kind!r}")
    if not 0.0 <= tie_probability <= 1.0:
        raise ValueError("tie_probability must be in [0, 1]")
    if not 0.0 < acceptability_density <= 1.0:
        raise ValueError("acceptability_density must be in (0, 1]")
    rng = random.Random(seed)
    names = [f"a{i}" for i in range(n)]
    half = n // 2
    if kind == "sm":
        left, right = list(range(half)), list(range(half, n))
        candidates = [(i, j) for i in left for j in right]
    else:
        left = right = None
        candidates = [(i, j) for i in range(n) for j in range(i + 1, n)]
    accepted = {
        p for p in candidates
        if acceptability_density >= 1.0 or rng.random() < acceptability_density
    }
    prefs: dict[str, list] = {}
    for i in range(n):
        mine = sorted(j for j in range(n) if pair_of(i, j) in accepted and j != i)
        rng.shuffle(mine)
        groups: list[list[str]] = []
        for j in mine:
            if groups and rng.random() < tie_probability:
                groups[-1].append(names[j])
            else:
                groups.append([names[j]])
        prefs[names[i]] = groups
    if kind == "sm":
        return validate_instance(
            "sm", prefs, left=[names[i] for i in left], right=[names[i] for i in right]
        )
    return validate_instance("sr", prefs)


def independent_set_gadget(g: Graph, ell: int) -> tuple[Instance, AdaptQuery]:
    """Roommates instance whose adaptation query is feasible iff g has an
    independent set of size ell.

    Ten agents per vertex; the initial matching pairs them up within
    their vertex block, every vertex's second pair is forbidden, and the
    budget is 8|V| - 4*ell.
    """
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    if not 0 <= ell <= g.n:
        raise ValueError("ell must be between 0 and the number of vertices")

    def a(i: int, v: int) -> str:
        return f"a{i}_v{v}"

    def b(i: int, v: int) -> str:
        return f"b{i}_v{v}"

    prefs: dict[str, list[str]] = {}
    for v in range(g.n):
        prefs[a(1, v)] = [b(1, v), b(2, v)]
        prefs[a(2, v)] = [b(3, v), b(2, v)] + [a(2, w) for w in g.neighbors(v)] + [b(1, v)]
        prefs[a(3, v)] = [b(2, v), b(3, v)]
        prefs[a(4, v)] = [b(5, v), b(3, v), b(4, v)]
        prefs[a(5, v)] = [b(4, v), b(5, v)]
        prefs[b(1, v)] = [a(2, v), a(1, v)]
        prefs[b(2, v)] = [a(1, v), a(2, v), a(3, v)]
        prefs[b(3, v)] = [a(3, v), a(4, v), a(2, v)]
        prefs[b(4, v)] = [a(4, v), a(5, v)]
        prefs[b(5, v)] = [a(5, v), a(4, v)]
    instance = validate_instance("sr", prefs)
    ix = instance.index_of
    m1 = Matching(
        (ix(a(i, v)), ix(b(i, v))) for v in range(g.n) for i in range(1, 6)
    )
    require_stable(instance, m1)
    forbidden = [(ix(a(2, v)), ix(b(2, v))) for v in range(g.n)]
    query = AdaptQuery.make(m1, forbidden=forbidden, k=8 * g.n - 4 * ell)
    return instance, query


def _one_sided_ties(instance: Instance) -> bool:
    def strict(agents) -> bool:
        return all(len(gr) == 1 for x in agents for gr in instance.prefs[x])

    return strict(instance.left) or strict(instance.right)


def _prepare_local_search_base(base: Instance, n_matching: Matching):
    if base.kind != "sm":
        raise ValueError("base must be a marriage instance")
    if len(base.left) != len(base.right):
        raise ValueError("base must have equally sized sides")
    if not _one_sided_ties(base):
        raise ValueError("base may have ties on one side only")
    require_stable(base, n_matching, StabilityNotion.WEAK)
    unmatched = [x for x in range(base.n) if not n_matching.matched(x)]
    if len(unmatched) != 2:
        raise ValueError("n_matching must leave exactly two agents unmatched")
    u_single = [x for x in unmatched if x in base.left]
    w_single = [x for x in unmatched if x in base.right]
    if len(u_single) != 1 or len(w_single) != 1:
        raise ValueError("n_matching must leave one agent per side unmatched")
    return u_single[0], w_single[0]


def _fresh_name(taken: set[str], stem: str) -> str:
    name = stem
    while name in taken:
        name += "x"
    taken.add(name)
    return name


def _groups_as_names(instance: Instance, agent: int) -> list[list[str]]:
    return [[instance.names[b] for b in gr] for gr in instance.prefs[agent]]


def local_search_forced_gadget(
    base: Instance, n_matching: Matching, ell: int
) -> tuple[Instance, AdaptQuery]:
    """Marriage gadget with one forced pair, encoding local search for a
    complete stable matching at distance ell from n_matching.

    Two agents u*, w* are appended: each ranks the entire opposite side
    of the base (ascending id) and then the other new agent, and sits
    last in every base agent's list.  The query forces {u*, w*} with
    budget ell + 3.
    """
    u_single, w_single = _prepare_local_search_base(base, n_matching)
    taken = set(base.names)
    u_star = _fresh_name(taken, "u_star")
    w_star = _fresh_name(taken, "w_star")
    prefs: dict[str, list] = {}
    for x in range(base.n):
        extra = w_star if x in base.left else u_star
        prefs[base.names[x]] = _groups_as_names(base, x) + [[extra]]
    prefs[u_star] = [[base.names[x]] for x in sorted(base.right)] + [[w_star]]
    prefs[w_star] = [[base.names[x]] for x in sorted(base.left)] + [[u_star]]
    instance = validate_instance(
        "sm",
        prefs,
        left=[base.names[x] for x in sorted(base.left)] + [u_star],
        right=[base.names[x] for x in sorted(base.right)] + [w_star],
    )
    ix = instance.index_of
    m1 = Matching(
        list(n_matching.pairs)
        + [(ix(u_star), w_single), (u_single, ix(w_star))]
    )
    require_stable(instance, m1, StabilityNotion.WEAK)
    query = AdaptQuery.make(m1, forced=[(ix(u_star), ix(w_star))], k=ell + 3)
    return instance, query


def local_search_forbidden_gadget(
    base: Instance, n_matching: Matching, ell: int
) -> tuple[Instance, AdaptQuery]:
    """Marriage gadget with one forbidden pair, encoding the same
    local-search question as local_search_forced_gadget.

    Appends w* (ranking all base left agents then u'), u' (w* over w'),
    and w' (accepting only u'); w* sits last in every left agent's list.
    The query forbids {u', w'} with budget ell + 3.
    """
    u_single, w_single = _prepare_local_search_base(base, n_matching)
    taken = set(base.names)
    w_star = _fresh_name(taken, "w_star")
    u_prime = _fresh_name(taken, "u_prime")
    w_prime = _fresh_name(taken, "w_prime")
    prefs: dict[str, list] = {}
    for x in range(base.n):
        groups = _groups_as_names(base, x)
        if x in base.left:
            groups = groups + [[w_star]]
        prefs[base.names[x]] = groups
    prefs[w_star] = [[base.names[x]] for x in sorted(base.left)] + [[u_prime]]
    prefs[u_prime] = [[w_star], [w_prime]]
    prefs[w_prime] = [[u_prime]]
    instance = validate_instance(
        "sm",
        prefs,
        left=[base.names[x] for x in sorted(base.left)] + [u_prime],
        right=[base.names[x] for x in sorted(base.right)] + [w_star, w_prime],
    )
    ix = instance.index_of
    m1 = Matching(
        list(n_matching.pairs)
        + [(u_single, ix(w_star)), (ix(u_prime), ix(w_prime))]
    )
    require_stable(instance, m1, StabilityNotion.WEAK)
    query = AdaptQuery.make(m1, forbidden=[(ix(u_prime), ix(w_prime))], k=ell + 3)
    return instance, query
