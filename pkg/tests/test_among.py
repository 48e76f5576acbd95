"""Counting function: closed form, dedicated minimizer, DAG, network use."""

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from cfnkit.core import Cfn
from cfnkit.dag import build_min_plus, dag_minimum, min_given, validate_dag
from cfnkit.ept import project
from cfnkit.globalfns import (
    AmongFunction,
    AmongSpec,
    among_build_dag,
    among_cost,
    among_min,
    among_to_automaton,
    regular_cost,
)
from oracles import brute_min, dag_brute_min

# the worked four-variable instance: count of {a, b} values must fall in [1, 2]
EX = AmongSpec((0, 1, 2, 3), {"a", "b"}, 1, 2)


class TestSpecValidation:
    def test_ub_clamped_to_arity(self):
        sp = AmongSpec((0, 1, 2), {0}, 0, 9)
        assert sp.ub == 3

    def test_lb_above_clamped_ub_rejected(self):
        with pytest.raises(ValueError, match="empty count interval"):
            AmongSpec((0, 1, 2), {0}, 4, 9)

    def test_negative_lb_rejected(self):
        with pytest.raises(ValueError):
            AmongSpec((0, 1), {0}, -1, 1)

    def test_scope_must_increase(self):
        with pytest.raises(ValueError):
            AmongSpec((1, 0), {0}, 0, 1)

    def test_tuple_length_checked(self):
        with pytest.raises(ValueError):
            among_cost(EX, ("a", "b"))


class TestClosedForm:
    def test_worked_example_values(self):
        assert among_cost(EX, ("a", "b", "c", "d")) == 0
        assert among_cost(EX, ("c", "d", "c", "d")) == 1
        assert among_cost(EX, ("a", "b", "a", "b")) == 2

    def test_all_positions_forced_when_lb_is_arity(self):
        sp = AmongSpec((0, 1, 2), {5}, 3, 3)
        assert among_cost(sp, (1, 2, 3)) == 3

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=6).flatmap(
        lambda ell: st.tuples(
            st.just(ell),
            st.sets(st.integers(0, 3)),
            st.integers(0, len(ell)),
            st.integers(0, len(ell)))))
    def test_cost_is_distance_to_interval(self, case):
        ell, counted, a, b = case
        lb, ub = min(a, b), max(a, b)
        sp = AmongSpec(tuple(range(len(ell))), counted, lb, ub)
        t = sum(1 for v in ell if v in counted)
        want = max(lb - t, 0) if t < lb else max(t - ub, 0)
        assert among_cost(sp, ell) == want


def random_instance(rng):
    n = rng.randint(1, 6)
    d = rng.randint(1, 4)
    values = list(range(d))
    counted = {v for v in values if rng.random() < 0.5}
    lb = rng.randint(0, n)
    ub = rng.randint(lb, n + 2)
    sp = AmongSpec(tuple(range(n)), counted, lb, ub)
    domains = [sorted(rng.sample(values, rng.randint(1, d))) for _ in range(n)]
    return sp, domains


@pytest.mark.parametrize("seed", range(30))
def test_minimizer_and_dag_match_brute_force(seed):
    rng = random.Random(seed)
    sp, domains = random_instance(rng)
    top = sp.arity + sp.lb + 2
    want = brute_min(lambda t: among_cost(sp, t), domains, top)
    assert among_min(sp, domains, top=top) == want
    dag = among_build_dag(sp, top=top)
    validate_dag(dag)
    dmap = dict(zip(sp.scope, domains))
    assert dag_minimum(dag, dmap) == want
    build_min_plus(dag, dmap)
    for pos, x in enumerate(sp.scope):
        for v in domains[pos]:
            assert min_given(dag, x, v) == \
                brute_min(lambda t: among_cost(sp, t), domains, top, fix=(pos, v))


@pytest.mark.parametrize("seed", range(8))
def test_dag_pointwise_on_singletons(seed):
    rng = random.Random(100 + seed)
    sp, domains = random_instance(rng)
    dag = among_build_dag(sp)
    for combo in itertools.product(*domains):
        got = dag_eval_tuple(dag, sp.scope, combo)
        assert got == min(among_cost(sp, combo), dag.top)


def dag_eval_tuple(dag, scope, combo):
    return dag_brute_min(dag, {x: [v] for x, v in zip(scope, combo)})


def test_zero_interval_builds_plain_sum_chain():
    sp = AmongSpec((0, 1, 2), {1}, 0, 0)
    dag = among_build_dag(sp)
    validate_dag(dag)
    kinds = [n.kind for n in dag.nodes]
    assert kinds.count("min") == 0
    assert kinds.count("leaf") == 3
    assert dag_minimum(dag, {0: [0, 1], 1: [1], 2: [0]}) == 1


def test_node_count_stays_linear_in_arity_times_ub():
    sp = AmongSpec(tuple(range(12)), {0}, 2, 5)
    dag = among_build_dag(sp)
    validate_dag(dag)
    assert len(dag.nodes) <= 6 * 12 * 6


@pytest.mark.parametrize("seed", range(12))
def test_counting_automaton_subsumption(seed):
    # the Hamming distance to the counting automaton's language agrees with
    # the closed form, provided the alphabet offers a symbol on each side
    rng = random.Random(200 + seed)
    n = rng.randint(1, 5)
    alphabet = list(range(rng.randint(2, 4)))
    counted = set(rng.sample(alphabet, rng.randint(1, len(alphabet) - 1)))
    lb = rng.randint(0, n)
    ub = rng.randint(lb, n)
    sp = AmongSpec(tuple(range(n)), counted, lb, ub)
    aut = among_to_automaton(sp, alphabet)
    for ell in itertools.product(alphabet, repeat=n):
        assert regular_cost(aut, ell) == among_cost(sp, ell), (sp, ell)


class TestNetworkUse:
    def build(self):
        cfn = Cfn(top=30)
        for _ in range(3):
            cfn.add_variable(3)
        cfn.add_unary(0, [2, 1, 0])
        fn = cfn.add_function(AmongFunction(AmongSpec((0, 1, 2), {0, 1}, 1, 2),
                                            cfn.top))
        return cfn, fn

    def all_totals(self, cfn):
        return {t: cfn.eval_total(t)
                for t in itertools.product(range(3), repeat=3)}

    def test_bind_happens_on_add(self):
        cfn, fn = self.build()
        assert fn.cfn is cfn
        assert fn.min_current() == 0
        assert fn.cond_min(1, 2) == 0

    def test_shifts_preserve_total_and_are_reversible(self):
        cfn, fn = self.build()
        before = self.all_totals(cfn)
        trail = []
        project(cfn, fn, (0,), (0,), -2, trail=trail)
        assert fn.cond_min(0, 0) == 2
        project(cfn, fn, (0,), (0,), 1, trail=trail)
        assert self.all_totals(cfn) == before
        for undo in reversed(trail):
            undo()
        assert self.all_totals(cfn) == before
        assert fn.deltas.is_zero()

    def test_cond_min_tracks_pruning(self):
        cfn, fn = self.build()
        # forcing two uncounted values leaves one countable position
        cfn.remove_value(1, 0)
        cfn.remove_value(1, 1)
        cfn.remove_value(2, 0)
        cfn.remove_value(2, 1)
        assert fn.cond_min(0, 2) == 1  # count would be 0, lb is 1
        assert fn.cond_min(0, 0) == 0

    def test_dual_route_agreement_after_random_walk(self):
        cfn, fn = self.build()
        rng = random.Random(5)
        trail = []
        for _ in range(40):
            x = rng.choice(fn.scope)
            v = rng.choice(cfn.vars[x].domain)
            if rng.random() < 0.5:
                hi = fn.cond_min(x, v)
                lo = -cfn.unary[x][v]
                if lo > hi:
                    continue
                alpha = rng.randint(lo, hi)
            else:
                alpha = -rng.randint(0, cfn.unary[x][v])
            if alpha:
                project(cfn, fn, (x,), (v,), alpha, trail=trail)
        doms = [cfn.vars[x].domain for x in fn.scope]
        for pos, x in enumerate(fn.scope):
            for v in doms[pos]:
                want = brute_min(fn.cost, doms, cfn.top, fix=(pos, v))
                assert fn.cond_min(x, v) == want

    def test_clone_is_independent(self):
        cfn, fn = self.build()
        project(cfn, fn, (0,), (0,), -2)
        dup = cfn.clone()
        fn2 = dup.plus_fns[0]
        assert fn2 is not fn and fn2.cfn is dup
        assert fn2.cond_min(0, 0) == 2
        project(dup, fn2, (0,), (0,), 2)
        assert fn.cond_min(0, 0) == 2
        assert fn2.cond_min(0, 0) == 0
