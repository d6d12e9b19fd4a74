"""Acceptance suite: nine end-to-end checks, each printing one pass/fail line."""

import itertools
import random
import subprocess
import sys
import time

import pytest

from matchadapt.adapt_sm import adapt_sm, adaptation_weights
from matchadapt.adapt_sr import adapt
from matchadapt.core import (
    AdaptQuery,
    Infeasible,
    StabilityNotion,
    complete_with_dummies,
    validate_instance,
)
from matchadapt.errors import NoStableMatching, ResourceExhausted
from matchadapt.gen import (
    Graph,
    independent_set_gadget,
    local_search_forbidden_gadget,
    local_search_forced_gadget,
    random_instance,
)
from matchadapt.oracle import (
    enumerate_closed_complete_subsets,
    enumerate_stable_matchings,
    oracle_adapt,
)
from matchadapt.rotations import (
    _eliminate_lists,
    _exposed_cycles,
    build_rotation_poset,
    closed_set_to_matching,
    first_stable_matching,
    matching_to_closed_set,
    rho_of,
)
from matchadapt.fileio import emit_instance, emit_matching

from conftest import named_pairs, sample_query


def report(num: int, label: str, ok: bool, detail: str = ""):
    tail = f" ({detail})" if detail else ""
    print(f"acceptance {num} [{label}]: {'PASS' if ok else 'FAIL'}{tail}")
    assert ok, f"acceptance {num} [{label}] failed {tail}"


def test_acceptance_1_golden_example(ex1, ex1_m1):
    t0 = time.perf_counter()
    poset = build_rotation_poset(ex1)

    def cyc(*pairs):
        from matchadapt.rotations import canonical_cycle

        return canonical_cycle([(ex1.index_of(a), ex1.index_of(b)) for a, b in pairs])

    phi1 = cyc(("m1", "w1"), ("m2", "w2"), ("m3", "w3"))
    phi2 = cyc(("w1", "m2"), ("w2", "m3"), ("w3", "m1"))
    phi3 = cyc(("m1", "w2"), ("m2", "w3"), ("m3", "w1"))
    phi4 = cyc(("w1", "m3"), ("w2", "m1"), ("w3", "m2"))
    rid = poset.rid_by_cycle

    ok = len(poset.rotations) == 4 and set(rid) == {phi1, phi2, phi3, phi4}
    ok = ok and poset.dual(rid[phi1]) == rid[phi4] and poset.dual(rid[phi2]) == rid[phi3]
    ok = ok and poset.preds[rid[phi3]] == {rid[phi1]}
    ok = ok and poset.preds[rid[phi4]] == {rid[phi2]}
    ok = ok and poset.preds[rid[phi1]] == poset.preds[rid[phi2]] == frozenset()

    subsets = set(enumerate_closed_complete_subsets(poset))
    ok = ok and subsets == {
        frozenset({rid[phi2], rid[phi4]}),
        frozenset({rid[phi1], rid[phi2]}),
        frozenset({rid[phi1], rid[phi3]}),
    }
    expected = {
        frozenset({rid[phi2], rid[phi4]}): [("m1", "w1"), ("m2", "w2"), ("m3", "w3")],
        frozenset({rid[phi1], rid[phi2]}): [("m1", "w2"), ("m2", "w3"), ("m3", "w1")],
        frozenset({rid[phi1], rid[phi3]}): [("m1", "w3"), ("m2", "w1"), ("m3", "w2")],
    }
    for z, pairs in expected.items():
        ok = ok and named_pairs(ex1, closed_set_to_matching(poset, ex1, z)) == pairs
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1.0
    report(1, "golden example poset", ok, f"{elapsed:.3f}s")


def test_acceptance_2_bijection_corpus(sr_corpus):
    t0 = time.perf_counter()
    checked = failures = 0
    for inst in sr_corpus:
        matchings = enumerate_stable_matchings(inst)
        if not matchings:
            continue
        aug, _ = complete_with_dummies(inst, matchings[0])
        poset = build_rotation_poset(aug)
        subsets = enumerate_closed_complete_subsets(poset)
        image = {closed_set_to_matching(poset, aug, z).restrict(range(inst.n)) for z in subsets}
        if len(subsets) != len(matchings) or image != set(matchings):
            failures += 1
        for m in poset.stable_matchings:
            if closed_set_to_matching(poset, aug, matching_to_closed_set(poset, aug, m)) != m:
                failures += 1
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and checked >= 300 and elapsed < 60.0
    report(2, "closed-complete bijection, 500-instance corpus", ok,
           f"{checked} solvable instances, {elapsed:.1f}s")


def test_acceptance_3_adaptation_optimality(sr_corpus_analyzed):
    t0 = time.perf_counter()
    checked = failures = 0
    for idx, (inst, matchings, _, _) in enumerate(sr_corpus_analyzed):
        if not matchings:
            continue
        m1 = matchings[idx % len(matchings)]
        query = sample_query(inst, m1, seed=idx)
        got = adapt(inst, query)
        want = oracle_adapt(inst, query)
        if isinstance(got, Infeasible) != isinstance(want, Infeasible):
            failures += 1
        elif not isinstance(got, Infeasible):
            if len(got.pairs ^ m1.pairs) != len(want.pairs ^ m1.pairs):
                failures += 1
            if not query.forced <= got.pairs or (query.forbidden & got.pairs):
                failures += 1
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and checked >= 300 and elapsed < 120.0
    report(3, "forced/forbidden adaptation matches exhaustive optimum", ok,
           f"{checked} queries, {elapsed:.1f}s")


def test_acceptance_4_weight_identity():
    checked = failures = 0
    for seed in range(200):
        n_total = 4 + 2 * (seed % 7)  # 2..8 agents per side
        density = 1.0 if seed % 2 else 0.85
        inst = random_instance(n_total, "sm", 0.0, density, seed=seed)
        matchings = enumerate_stable_matchings(inst, cap=16)
        if not matchings:
            continue
        m1 = matchings[seed % len(matchings)]
        query = sample_query(inst, m1, seed=10_000 + seed)
        n = max(len(inst.left), len(inst.right))
        w = adaptation_weights(inst, m1, query.forced, query.forbidden)
        for m in matchings:
            expect = 3 * n * (
                len(query.forbidden & m.pairs) - len(m.pairs & query.forced)
            ) + len(m.pairs ^ m1.pairs)
            if sum(w.get(e, 0) for e in m.pairs) != expect:
                failures += 1
        got = adapt_sm(inst, query)
        want = oracle_adapt(inst, query, cap=16)
        if isinstance(got, Infeasible) != isinstance(want, Infeasible):
            failures += 1
        elif not isinstance(got, Infeasible) and (
            len(got.pairs ^ m1.pairs) != len(want.pairs ^ m1.pairs)
        ):
            failures += 1
        checked += 1
    ok = failures == 0 and checked >= 200
    report(4, "marriage weight identity and decision equivalence", ok,
           f"{checked} instances")


def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        yield Graph.make(n, [p for p, b in zip(pairs, bits) if b])


def _check_is_gadget(g):
    """Check the vertex-gadget reduction on one graph; returns failure count."""
    failures = 0
    inst, query = independent_set_gadget(g, 0)
    matchings = enumerate_stable_matchings(inst, cap=60)
    deltas = [
        len(m.pairs ^ query.m1.pairs)
        for m in matchings
        if not (query.forbidden & m.pairs)
    ]
    if not deltas:
        return 1
    min_delta = min(deltas)
    max_is = max(ell for ell in range(g.n + 1) if g.has_independent_set(ell))
    if min_delta != 4 * max_is + 8 * (g.n - max_is):
        failures += 1
    for ell in range(g.n + 1):
        feasible = min_delta <= 8 * g.n - 4 * ell
        if feasible != g.has_independent_set(ell):
            failures += 1
    return failures


def test_acceptance_5_independent_set_reduction():
    t0 = time.perf_counter()
    failures = graphs = 0
    for n in range(1, 6):
        for g in _all_graphs(n):
            failures += _check_is_gadget(g)
            graphs += 1
    rng = random.Random(5)
    pairs6 = list(itertools.combinations(range(6), 2))
    for _ in range(3):
        edges = [p for p in pairs6 if rng.random() < 0.4]
        failures += _check_is_gadget(Graph.make(6, edges))
        graphs += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0
    report(5, "independent-set gadget equivalence", ok,
           f"{graphs} graphs, {elapsed:.1f}s")


def _ties_base(seed):
    """Small marriage instance, incomplete lists, ties on the right side only."""
    rng = random.Random(seed)
    n_total = rng.choice([4, 6, 8])
    inst = random_instance(n_total, "sm", 0.0, 0.8, seed=seed)
    prefs = {}
    for a in range(inst.n):
        groups = [[inst.names[b] for b in g] for g in inst.prefs[a]]
        if a in inst.right:
            merged = []
            for g in groups:
                if merged and rng.random() < 0.5:
                    merged[-1].extend(g)
                else:
                    merged.append(list(g))
            groups = merged
        prefs[inst.names[a]] = groups
    return validate_instance(
        "sm",
        prefs,
        left=[inst.names[x] for x in sorted(inst.left)],
        right=[inst.names[x] for x in sorted(inst.right)],
    )


def test_acceptance_6_local_search_gadgets():
    t0 = time.perf_counter()
    bases = failures = 0
    seed = 0
    while bases < 50 and seed < 2000:
        seed += 1
        base = _ties_base(seed)
        weak = enumerate_stable_matchings(base, StabilityNotion.WEAK)
        half = len(base.left)
        candidates = [
            m for m in weak
            if len(m) == half - 1
            and sum(1 for x in base.left if not m.matched(x)) == 1
        ]
        if not candidates:
            continue
        n_matching = candidates[0]
        complete_dists = [
            len(m.pairs ^ n_matching.pairs) for m in weak if len(m) == half
        ]
        for ell in range(0, 2 * half + 1):
            expected = any(d <= ell for d in complete_dists)
            for gadget in (local_search_forced_gadget, local_search_forbidden_gadget):
                inst, query = gadget(base, n_matching, ell)
                res = oracle_adapt(inst, query, StabilityNotion.WEAK, cap=20)
                if isinstance(res, Infeasible) == expected:
                    failures += 1
        bases += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and bases >= 50
    report(6, "local-search gadget equivalence", ok, f"{bases} bases, {elapsed:.1f}s")


def _check_invariants(aug, poset):
    """Replay-based and matching-based structural checks; returns failure count."""
    failures = 0
    rk = aug.rank_matrix
    subsets = enumerate_closed_complete_subsets(poset)

    # Replay every closed complete set, checking the exposure invariant at
    # each step and, right after eliminating a rotation, that it pinned the
    # expected agents at their last choice.
    for z in subsets:
        lists = poset.p0.lists
        remaining = set(z)
        while remaining:
            exposed = _exposed_cycles(lists)
            for cyc in exposed:
                for i, j in cyc:
                    if lists[j][-1] != i:
                        failures += 1
            rids = sorted(
                poset.rid_by_cycle[c] for c in exposed if poset.rid_by_cycle[c] in remaining
            )
            if not rids:
                failures += 1
                break
            rid = rids[0]
            lists = _eliminate_lists(lists, poset.rotations[rid].cycle)
            remaining.discard(rid)
            dual_rid = poset.rotations[rid].dual_id
            if dual_rid is not None:
                # rid = rho of every ordered pair its dual contains.
                for a, b in poset.rotations[dual_rid].cycle:
                    if not lists[a] or lists[a][-1] != b:
                        failures += 1

    # Matching-level checks over all ordered stable pairs.
    for (a, b), rid in poset.pair_index.items():
        rho = rho_of(poset, a, b)
        if rho is None:
            continue
        for z in subsets:
            m = poset.matching_by_z[frozenset(z)]
            if rho.rid in z:
                p = m.partner(a)
                if p is None or (p != b and rk[a][p] >= rk[a][b]):
                    failures += 1

    # Pair-membership characterization for stable pairs with a worse partner.
    for a, b in poset.stable_pair_set:
        for x, y in ((a, b), (b, a)):
            partners = poset.stable_partners(x)
            if not any(rk[x][p] > rk[x][y] for p in partners):
                continue
            rho = rho_of(poset, x, y)
            if rho is None:
                continue
            betters = [p for p in partners if rk[x][p] < rk[x][y]]
            rho_betters = [rho_of(poset, x, p) for p in betters]
            if any(r is None for r in rho_betters):
                continue
            for z in subsets:
                m = poset.matching_by_z[frozenset(z)]
                in_m = m.partner(x) == y
                derived = rho.rid in z and not any(r.rid in z for r in rho_betters)
                if in_m != derived:
                    failures += 1

    # Opposite-direction preference split for stable pairs absent from a
    # stable matching.
    for a, b in poset.stable_pair_set:
        for m in poset.stable_matchings:
            if m.partner(a) == b:
                continue
            pa, pb = m.partner(a), m.partner(b)
            first = rk[a][pa] < rk[a][b] and rk[b][a] < rk[b][pb]
            second = rk[a][b] < rk[a][pa] and rk[b][pb] < rk[b][a]
            if first == second:
                failures += 1
    return failures


def test_acceptance_7_structural_invariants(sr_corpus_analyzed):
    t0 = time.perf_counter()
    checked = failures = 0
    for inst, matchings, aug, poset in sr_corpus_analyzed:
        if poset is None:
            continue
        failures += _check_invariants(aug, poset)
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and checked >= 300
    report(7, "rotation structure invariants on corpus", ok,
           f"{checked} instances, {elapsed:.1f}s")


def test_acceptance_8_large_instance_speed():
    # Soft target: n=40 complete-list instances with 8 forbidden pairs
    # inside m1, each solved in under 10 s without tripping the
    # exploration guard.
    ok = True
    details = []
    for seed in (29, 31, 50, 51, 60):
        inst = random_instance(40, "sr", 0.0, 1.0, seed=seed)
        m1 = first_stable_matching(inst)
        poset = build_rotation_poset(inst)
        loose = [e for e in m1.sorted_pairs() if e not in poset.fixed_pair_set]
        assert len(loose) >= 8, f"seed {seed} has too few non-fixed pairs"
        query = AdaptQuery.make(m1, forbidden=loose[:8], k=80)
        t0 = time.perf_counter()
        try:
            adapt(inst, query)
        except ResourceExhausted:
            ok = False
            details.append(f"seed {seed}: guard tripped")
            continue
        elapsed = time.perf_counter() - t0
        details.append(f"seed {seed}: {elapsed:.2f}s")
        if elapsed >= 10.0:
            ok = False
    report(8, "40-agent adaptation speed", ok, "; ".join(details))


def _run_cli(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "matchadapt.cli", *args],
        capture_output=True,
        cwd=cwd,
    )
    return proc.returncode, proc.stdout


def test_acceptance_9_cli_determinism(tmp_path, ex1, ex1_m1):
    (tmp_path / "ex1.pref").write_text(emit_instance(ex1), encoding="utf-8")
    (tmp_path / "m1.match").write_text(emit_matching(ex1, ex1_m1), encoding="utf-8")
    (tmp_path / "k3.edges").write_text("0 1\n0 2\n1 2\n", encoding="utf-8")
    commands = [
        ["check", "ex1.pref", "m1.match"],
        ["rotations", "ex1.pref", "--dot", "poset.dot"],
        ["adapt", "ex1.pref", "m1.match", "--forced", "m1,w2", "--k", "6"],
        ["adapt", "ex1.pref", "m1.match", "--forbidden", "m1,w1", "--k", "6", "--oracle"],
        ["gen", "random", "--n", "8", "--kind", "sr", "--seed", "7"],
        ["gen", "random", "--n", "9", "--kind", "sm", "--ties", "0.4",
         "--density", "0.8", "--seed", "3"],
        ["gen", "is-gadget", "--graph", "k3.edges", "--ell", "1",
         "--out", "g.pref", "--query-out", "g.query"],
    ]
    files = ["poset.dot", "g.pref", "g.query"]
    ok = True
    for cmd in commands:
        code1, out1 = _run_cli(cmd, tmp_path)
        snap1 = {f: (tmp_path / f).read_bytes() for f in files if (tmp_path / f).exists()}
        code2, out2 = _run_cli(cmd, tmp_path)
        snap2 = {f: (tmp_path / f).read_bytes() for f in files if (tmp_path / f).exists()}
        if code1 != code2 or out1 != out2 or snap1 != snap2:
            ok = False
    report(9, "byte-identical repeated runs", ok, f"{len(commands)} commands")
