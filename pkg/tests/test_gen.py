import pytest

from matchadapt.core import (
    Infeasible,
    Matching,
    StabilityNotion,
    is_stable,
    validate_instance,
)
from matchadapt.gen import (
    Graph,
    independent_set_gadget,
    local_search_forbidden_gadget,
    local_search_forced_gadget,
    random_instance,
)
from matchadapt.oracle import enumerate_stable_matchings, oracle_adapt

from conftest import matching_of


class TestGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph.make(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph.make(2, [(0, 5)])

    def test_neighbors_sorted(self):
        g = Graph.make(4, [(2, 0), (0, 3), (0, 1)])
        assert g.neighbors(0) == [1, 2, 3]
        assert g.neighbors(1) == [0]

    def test_independent_set_brute_force(self):
        triangle = Graph.make(3, [(0, 1), (0, 2), (1, 2)])
        assert triangle.has_independent_set(1)
        assert not triangle.has_independent_set(2)
        path = Graph.make(3, [(0, 1), (1, 2)])
        assert path.has_independent_set(2)
        assert not path.has_independent_set(3)
        empty = Graph.make(4, [])
        assert empty.has_independent_set(4)
        assert empty.has_independent_set(0)


class TestRandomInstance:
    def test_deterministic(self):
        a = random_instance(8, "sr", 0.2, 0.8, seed=7)
        b = random_instance(8, "sr", 0.2, 0.8, seed=7)
        assert a == b
        c = random_instance(8, "sr", 0.2, 0.8, seed=8)
        assert a != c

    def test_sm_sides(self):
        inst = random_instance(6, "sm", 0.0, 1.0, seed=1)
        assert inst.kind == "sm"
        assert len(inst.left) == 3 and len(inst.right) == 3

    def test_strict_when_no_ties(self):
        assert random_instance(6, "sr", 0.0, 1.0, seed=1).is_strict

    def test_full_indifference(self):
        inst = random_instance(6, "sr", 1.0, 1.0, seed=1)
        assert all(len(inst.prefs[a]) == 1 for a in range(6))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            random_instance(1, "sr")
        with pytest.raises(ValueError):
            random_instance(4, "xx")
        with pytest.raises(ValueError):
            random_instance(4, "sr", tie_probability=1.5)
        with pytest.raises(ValueError):
            random_instance(4, "sr", acceptability_density=0.0)


class TestIndependentSetGadget:
    def test_k3_shape(self):
        g = Graph.make(3, [(0, 1), (0, 2), (1, 2)])
        inst, query = independent_set_gadget(g, 1)
        assert inst.n == 30
        assert len(query.forbidden) == 3
        assert query.forced == frozenset()
        assert query.k == 8 * 3 - 4 * 1 == 20
        assert len(query.m1) == 15
        assert is_stable(inst, query.m1)

    def test_single_vertex_delta(self):
        g = Graph.make(1, [])
        inst, query = independent_set_gadget(g, 1)
        assert inst.n == 10 and query.k == 4
        m2 = oracle_adapt(inst, query)
        assert not isinstance(m2, Infeasible)
        assert len(m2.pairs ^ query.m1.pairs) == 4

    def test_edge_graph_answers(self):
        # Two adjacent vertices: independent set of size 2 does not exist.
        g = Graph.make(2, [(0, 1)])
        inst, query = independent_set_gadget(g, 2)
        res = oracle_adapt(inst, query, cap=20)
        assert isinstance(res, Infeasible)
        inst, query = independent_set_gadget(g, 1)
        assert not isinstance(oracle_adapt(inst, query, cap=20), Infeasible)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            independent_set_gadget(Graph.make(0, []), 0)
        with pytest.raises(ValueError):
            independent_set_gadget(Graph.make(2, []), 3)


def ls_base():
    """A 2+2 marriage base with ties on one side and an almost-complete
    weakly stable matching leaving one agent per side unmatched."""
    inst = validate_instance(
        "sm",
        {
            "u1": ["w1", "w2"],
            "u2": ["w1"],
            "w1": [["u1", "u2"]],
            "w2": ["u1"],
        },
        left=["u1", "u2"],
        right=["w1", "w2"],
    )
    n = matching_of(inst, ("u1", "w1"))
    assert is_stable(inst, n, StabilityNotion.WEAK)
    return inst, n


class TestLocalSearchGadgets:
    # The unique complete weakly stable matching of ls_base is
    # {u1w2, u2w1}, at distance 3 from N = {u1w1}; both gadgets must
    # answer yes exactly when ell >= 3.

    @pytest.mark.parametrize("gadget", [local_search_forced_gadget, local_search_forbidden_gadget])
    def test_yes_no_threshold(self, gadget):
        base, n = ls_base()
        for ell, feasible in [(2, False), (3, True), (4, True)]:
            inst, query = gadget(base, n, ell)
            assert query.k == ell + 3
            res = oracle_adapt(inst, query, StabilityNotion.WEAK, cap=20)
            assert isinstance(res, Infeasible) != feasible

    def test_forced_gadget_shape(self):
        base, n = ls_base()
        inst, query = local_search_forced_gadget(base, n, 1)
        assert inst.n == base.n + 2
        assert len(query.forced) == 1 and not query.forbidden
        assert is_stable(inst, query.m1, StabilityNotion.WEAK)
        # New agents sit last in every base agent's list.
        u_star, w_star = inst.index_of("u_star"), inst.index_of("w_star")
        for x in range(base.n):
            extra = w_star if x in inst.left else u_star
            assert inst.prefs[x][-1] == (extra,)

    def test_forbidden_gadget_shape(self):
        base, n = ls_base()
        inst, query = local_search_forbidden_gadget(base, n, 1)
        assert inst.n == base.n + 3
        assert len(query.forbidden) == 1 and not query.forced
        assert is_stable(inst, query.m1, StabilityNotion.WEAK)
        w_star = inst.index_of("w_star")
        for x in sorted(inst.left):
            if inst.names[x] in base.names:
                assert inst.prefs[x][-1] == (w_star,)

    def test_rejects_bad_bases(self):
        base, n = ls_base()
        complete = matching_of(base, ("u1", "w2"), ("u2", "w1"))
        with pytest.raises(ValueError):
            local_search_forced_gadget(base, complete, 1)  # nobody unmatched
        sr = validate_instance("sr", {"a": ["b"], "b": ["a"]})
        with pytest.raises(ValueError):
            local_search_forced_gadget(sr, Matching([]), 1)
