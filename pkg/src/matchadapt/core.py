"""Instance and matching data model, stability checking, and shared preprocessing.

Agents are dense integer ids into a name table.  Preference lists are
sequences of tie-groups; strict instances have singleton groups only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import NotAcceptable, NotStable, ValidationError

AgentId = int
Pair = tuple[int, int]

NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")

#: Sentinel rank for unacceptable agents.
UNACCEPTABLE = -1


class StabilityNotion(str, Enum):
    STRICT = "strict"
    WEAK = "weak"
    STRONG = "strong"


def pair_of(a: int, b: int) -> Pair:
    """Canonical (sorted) form of an unordered agent pair."""
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Instance:
    """A validated stable roommates or stable marriage instance.

    Immutable after construction; safe to share across threads.
    """

    names: tuple[str, ...]
    #: Per agent: ordered tuple of tie-groups, each a tuple of agent ids.
    prefs: tuple[tuple[tuple[int, ...], ...], ...]
    kind: str = "sr"  # "sr" | "sm"
    left: Optional[frozenset[int]] = None
    right: Optional[frozenset[int]] = None

    @property
    def n(self) -> int:
        return len(self.names)

    @cached_property
    def m(self) -> int:
        return len(self.acceptable_pairs)

    @cached_property
    def rank_matrix(self) -> tuple[tuple[int, ...], ...]:
        """rank_matrix[a][b] = tie-group index of b in a's list, UNACCEPTABLE otherwise."""
        mat = []
        for groups in self.prefs:
            row = [UNACCEPTABLE] * self.n
            for g, group in enumerate(groups):
                for b in group:
                    row[b] = g
            mat.append(tuple(row))
        return tuple(mat)

    @cached_property
    def acceptable_pairs(self) -> tuple[Pair, ...]:
        out = []
        for a in range(self.n):
            for group in self.prefs[a]:
                for b in group:
                    if a < b:
                        out.append((a, b))
        return tuple(sorted(out))

    @cached_property
    def acceptable(self) -> tuple[tuple[int, ...], ...]:
        """Per agent: all acceptable partners in preference order (ties flattened)."""
        return tuple(
            tuple(b for group in groups for b in group) for groups in self.prefs
        )

    @cached_property
    def is_strict(self) -> bool:
        return all(len(g) == 1 for groups in self.prefs for g in groups)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown agent name {name!r}") from None

    def rank(self, a: int, b: int) -> int:
        """0-based tie-group index of b in a's list; equal ranks mean indifference."""
        r = self.rank_matrix[a][b]
        if r == UNACCEPTABLE:
            raise NotAcceptable(f"{self.names[b]} is not acceptable to {self.names[a]}")
        return r

    def accepts(self, a: int, b: int) -> bool:
        return self.rank_matrix[a][b] != UNACCEPTABLE

    def require_strict(self) -> None:
        if not self.is_strict:
            raise ValueError("operation requires strict (tie-free) preferences")

    def side_of(self, a: int) -> Optional[str]:
        if self.kind != "sm":
            return None
        return "left" if a in self.left else "right"


def rank(instance: Instance, a: int, b: int) -> int:
    """Rank of b in a's preference list (0-based tie-group index)."""
    return instance.rank(a, b)


class Matching:
    """A set of disjoint unordered pairs with O(1) partner lookup."""

    __slots__ = ("pairs", "_partner")

    def __init__(self, pairs: Iterable[Sequence[int]]):
        canon = frozenset(pair_of(a, b) for a, b in pairs)
        partner: dict[int, int] = {}
        for a, b in canon:
            if a == b:
                raise ValueError(f"self-pair ({a},{b})")
            if a in partner or b in partner:
                raise ValueError(f"agent occurs in more than one pair: ({a},{b})")
            partner[a] = b
            partner[b] = a
        self.pairs: frozenset[Pair] = canon
        self._partner = partner

    @classmethod
    def from_pairs(cls, instance: Instance, pairs: Iterable[Sequence[int]]) -> "Matching":
        """Build a matching, checking mutual acceptability against the instance."""
        m = cls(pairs)
        for a, b in m.pairs:
            if not (instance.accepts(a, b) and instance.accepts(b, a)):
                raise ValueError(
                    f"pair ({instance.names[a]},{instance.names[b]}) is not mutually acceptable"
                )
        return m

    def partner(self, a: int) -> Optional[int]:
        return self._partner.get(a)

    def matched(self, a: int) -> bool:
        return a in self._partner

    def restrict(self, agents: Iterable[int]) -> "Matching":
        keep = set(agents)
        return Matching(p for p in self.pairs if p[0] in keep and p[1] in keep)

    def sorted_pairs(self) -> list[Pair]:
        return sorted(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matching) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Matching({sorted(self.pairs)})"


@dataclass(frozen=True)
class Infeasible:
    """Negative answer of an adaptation query; falsy, with a human-readable reason."""

    reason: str = ""

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class AdaptQuery:
    """Input of the adaptation problem: (M1, forced Q, forbidden P, budget k)."""

    m1: Matching
    forced: frozenset[Pair]
    forbidden: frozenset[Pair]
    k: int

    @classmethod
    def make(cls, m1, forced=(), forbidden=(), k=0) -> "AdaptQuery":
        return cls(
            m1=m1 if isinstance(m1, Matching) else Matching(m1),
            forced=frozenset(pair_of(a, b) for a, b in forced),
            forbidden=frozenset(pair_of(a, b) for a, b in forbidden),
            k=int(k),
        )


RawPrefs = Mapping[str, Sequence[Union[str, Sequence[str]]]]


def validate_instance(
    kind: str,
    prefs: RawPrefs,
    left: Optional[Sequence[str]] = None,
    right: Optional[Sequence[str]] = None,
) -> Instance:
    """Validate a parsed instance description and build an Instance.

    ``prefs`` maps each agent name to its preference list in descending
    order; an entry is either a name (singleton group) or a sequence of
    names (tie-group).  Malformed descriptions are rejected with a
    ValidationError listing every violation, never silently repaired.
    """
    violations: list[str] = []
    names = list(prefs.keys())
    if kind not in ("sr", "sm"):
        raise ValidationError([f"unknown kind {kind!r}"])
    for name in names:
        if not NAME_RE.match(name):
            violations.append(f"invalid agent name {name!r}")
    if len(set(names)) != len(names):
        violations.append("duplicate agent names")
    index = {name: i for i, name in enumerate(names)}

    left_set = right_set = None
    if kind == "sm":
        if left is None or right is None:
            violations.append("marriage instance requires left and right agent sets")
        else:
            left_set = frozenset(index[x] for x in left if x in index)
            right_set = frozenset(index[x] for x in right if x in index)
            for x in list(left) + list(right):
                if x not in index:
                    violations.append(f"side member {x!r} has no preference list")
            if left_set & right_set:
                violations.append("left and right sides overlap")
            if left_set is not None and right_set is not None:
                missing = set(range(len(names))) - (left_set | right_set)
                for i in sorted(missing):
                    violations.append(f"agent {names[i]} belongs to neither side")
    elif left is not None or right is not None:
        violations.append("roommates instance must not declare sides")

    groups_by_agent: list[tuple[tuple[int, ...], ...]] = []
    for name in names:
        a = index[name]
        seen: set[int] = set()
        groups: list[tuple[int, ...]] = []
        for entry in prefs[name]:
            raw_group = [entry] if isinstance(entry, str) else list(entry)
            group: list[int] = []
            for other in raw_group:
                if other not in index:
                    violations.append(f"{name} lists unknown agent {other!r}")
                    continue
                b = index[other]
                if b == a:
                    violations.append(f"{name} lists itself")
                    continue
                if b in seen:
                    violations.append(f"{name} lists {other} more than once")
                    continue
                seen.add(b)
                group.append(b)
            if group:
                groups.append(tuple(group))
        groups_by_agent.append(tuple(groups))

    # Symmetry of acceptability.
    listed = [set(b for g in groups for b in g) for groups in groups_by_agent]
    for a in range(len(names)):
        for b in sorted(listed[a]):
            if a not in listed[b]:
                violations.append(
                    f"asymmetric acceptability: {names[a]} lists {names[b]} "
                    f"but {names[b]} does not list {names[a]}"
                )
    if kind == "sm" and left_set is not None and right_set is not None:
        for a in range(len(names)):
            own = left_set if a in left_set else right_set
            for b in sorted(listed[a]):
                if b in own:
                    violations.append(
                        f"{names[a]} lists {names[b]} from its own side"
                    )

    if violations:
        raise ValidationError(violations)
    return Instance(
        names=tuple(names),
        prefs=tuple(groups_by_agent),
        kind=kind,
        left=left_set,
        right=right_set,
    )


def blocking_pairs(
    instance: Instance, matching: Matching, notion: StabilityNotion = StabilityNotion.STRICT
) -> frozenset[Pair]:
    """All pairs blocking the matching under the given stability notion.

    Empty result is equivalent to stability.  With ties, a pair blocks
    weakly if both agents strictly improve, and strongly if one strictly
    improves while the other at least weakly improves.
    """
    notion = StabilityNotion(notion)
    if notion is StabilityNotion.STRICT and not instance.is_strict:
        raise ValueError("strict notion is only defined on tie-free instances")
    rk = instance.rank_matrix
    out = []
    for a, b in instance.acceptable_pairs:
        pa = matching.partner(a)
        pb = matching.partner(b)
        a_strict = pa is None or rk[a][b] < rk[a][pa]
        b_strict = pb is None or rk[b][a] < rk[b][pb]
        if notion in (StabilityNotion.STRICT, StabilityNotion.WEAK):
            blocks = a_strict and b_strict
        else:
            a_weak = pa is None or rk[a][b] <= rk[a][pa]
            b_weak = pb is None or rk[b][a] <= rk[b][pb]
            blocks = (a_strict and b_weak) or (a_weak and b_strict)
        if blocks:
            out.append((a, b))
    return frozenset(out)


def is_stable(
    instance: Instance, matching: Matching, notion: StabilityNotion = StabilityNotion.STRICT
) -> bool:
    return not blocking_pairs(instance, matching, notion)


def require_stable(instance, matching, notion=StabilityNotion.STRICT) -> None:
    bp = blocking_pairs(instance, matching, notion)
    if bp:
        names = [(instance.names[a], instance.names[b]) for a, b in sorted(bp)]
        raise NotStable(f"matching is blocked by {names}")


def symmetric_difference(m: Matching, m2: Matching) -> tuple[frozenset[Pair], int]:
    """Pairs appearing in exactly one of the two matchings, and their count."""
    diff = m.pairs ^ m2.pairs
    return diff, len(diff)


def complete_with_dummies(instance: Instance, m1: Matching) -> tuple[Instance, Matching]:
    """Append one dummy partner for each m1-unmatched agent.

    The dummy accepts only its agent and sits last in that agent's list, so
    every stable matching of the augmented instance contains every dummy
    pair and the augmented m1 is complete.  A complete m1 is returned
    unchanged together with the original instance.
    """
    unmatched = [a for a in range(instance.n) if not m1.matched(a)]
    if not unmatched:
        return instance, m1

    names = list(instance.names)
    prefs = [list(groups) for groups in instance.prefs]
    left = set(instance.left) if instance.left is not None else None
    right = set(instance.right) if instance.right is not None else None
    new_pairs = list(m1.pairs)
    taken = set(names)
    for b in unmatched:
        dummy_name = instance.names[b] + "_d"
        while dummy_name in taken:
            dummy_name += "x"
        taken.add(dummy_name)
        d = len(names)
        names.append(dummy_name)
        prefs[b] = prefs[b] + [(d,)]
        prefs.append([(b,)])
        if instance.kind == "sm":
            (right if b in instance.left else left).add(d)
        new_pairs.append((b, d))

    augmented = Instance(
        names=tuple(names),
        prefs=tuple(tuple(p) for p in prefs),
        kind=instance.kind,
        left=frozenset(left) if left is not None else None,
        right=frozenset(right) if right is not None else None,
    )
    return augmented, Matching(new_pairs)
