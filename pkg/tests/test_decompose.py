"""Network decompositions: builders, identities, T-DAC order, DAG compiler."""

import itertools
import random

import pytest

from cfnkit.consistency import enforce_tdac
from cfnkit.core import Cfn, TableFunction, brute_force_solve
from cfnkit.dag import (
    build_min_plus,
    dag_minimum,
    min_given,
    project_on_dag,
    validate_dag,
)
from cfnkit.decompose import (
    Decomposition,
    berge_acyclic_check,
    decompose_grammar,
    decompose_linear_sum,
    decompose_regular,
    decomposition_to_filter_dag,
    embed_decomposition,
    min_projection,
    relax_network,
    tdac_order,
    to_cfn,
    validate_decomposition,
)
from cfnkit.globalfns import (
    Automaton,
    CnfGrammar,
    RegularFunction,
    grammar_cost,
    hamming_weighted,
    regular_cost,
    weighted_regular_cost,
)
from oracles import dag_eval

TOP = 1000

A_STAR = Automaton(("q",), ("a", "b"), {("q", "a", "q")}, "q", {"q"})

PAIRS = CnfGrammar("SAB", "bc", "S", [("S", "A", "B"), ("A", "b"), ("B", "c")])

EX = CnfGrammar(
    "SABC", "abc", "S",
    [("S", "A", "A"), ("A", "a"), ("A", "A", "A"), ("A", "B", "C"),
     ("B", "b"), ("B", "B", "B"), ("C", "c"), ("C", "C", "C")])


def original_tuples(dec):
    return itertools.product(*(dec.domains[x] for x in dec.original_scope))


def projection_table(dec):
    return {ell: min_projection(dec, ell) for ell in original_tuples(dec)}


def chain_dec():
    # x0 and x1 coupled through one shared state variable: the cheapest
    # extension always picks q=0, so the projection is a + 2b.
    f1 = TableFunction((0, 2), TOP,
                       {(a, q): a + q for a in (0, 1) for q in (0, 1)},
                       default=TOP)
    f2 = TableFunction((1, 2), TOP,
                       {(b, q): 2 * b + q for b in (0, 1) for q in (0, 1)},
                       default=TOP)
    doms = {0: (0, 1), 1: (0, 1), 2: (0, 1)}
    return Decomposition((0, 1), (2,), doms, [f1, f2], TOP)


def random_plain_automaton(rng, nq, d):
    states = tuple(range(nq))
    alpha = tuple(range(d))
    trans = set()
    for q in states:
        for s in alpha:
            for q2 in states:
                if rng.random() < 0.4:
                    trans.add((q, s, q2))
    if not trans:
        trans.add((0, 0, 0))
    finals = frozenset(q for q in states if rng.random() < 0.6) or frozenset({0})
    return Automaton(states, alpha, frozenset(trans), 0, finals)


def random_weighted_automaton(rng):
    aut = random_plain_automaton(rng, rng.randint(2, 3), rng.randint(2, 3))
    return Automaton(aut.states, aut.alphabet, aut.transitions, aut.q0,
                     aut.finals,
                     lam={aut.q0: rng.randint(0, 2)},
                     sigma={t: rng.randint(0, 3) for t in aut.transitions},
                     rho={q: rng.randint(0, 2) for q in aut.finals})


def random_tree_dec(rng):
    """Grow a random tree-shaped decomposition; riders keep extras honest."""
    n_orig = rng.randint(1, 4)
    originals = list(range(n_orig))
    domains = {x: tuple(range(rng.randint(2, 3))) for x in originals}
    next_id = n_orig
    extras = []
    frontier = [rng.choice(originals)]
    unused = [x for x in originals if x not in frontier]
    fns = []
    for _ in range(rng.randint(1, 5)):
        parent = rng.choice(frontier)
        newvars = []
        for _ in range(rng.randint(1, 2)):
            if unused and rng.random() < 0.5:
                v = unused.pop(rng.randrange(len(unused)))
            else:
                v = next_id
                next_id += 1
                extras.append(v)
                domains[v] = tuple(range(rng.randint(2, 3)))
            newvars.append(v)
        scope = tuple(sorted([parent] + newvars))
        entries = {tup: (TOP if rng.random() < 0.18 else rng.randint(0, 4))
                   for tup in itertools.product(*(domains[z] for z in scope))}
        fns.append(TableFunction(scope, TOP, entries, default=TOP))
        frontier.extend(newvars)
    while unused:
        v = unused.pop()
        parent = rng.choice(frontier)
        scope = tuple(sorted([parent, v]))
        entries = {tup: (TOP if rng.random() < 0.15 else rng.randint(0, 3))
                   for tup in itertools.product(*(domains[z] for z in scope))}
        fns.append(TableFunction(scope, TOP, entries, default=TOP))
        frontier.append(v)
    count = {}
    for f in fns:
        for x in f.scope:
            count[x] = count.get(x, 0) + 1
    for e in extras:
        if count.get(e, 0) < 2:
            fns.append(TableFunction(
                (e,), TOP,
                {(v,): rng.choice((0, 1, 2, TOP)) for v in domains[e]},
                default=TOP))
    dec = Decomposition(tuple(originals), tuple(extras), domains, fns, TOP)
    validate_decomposition(dec)
    assert berge_acyclic_check(dec.fns)
    return dec


class TestValidation:
    def test_valid_chain_passes(self):
        validate_decomposition(chain_dec())

    def test_empty_scope(self):
        with pytest.raises(ValueError, match="empty"):
            validate_decomposition(Decomposition((), (), {}, [], TOP))

    def test_unsorted_scope(self):
        f = TableFunction((0, 1), TOP, {}, default=0)
        with pytest.raises(ValueError, match="increasing"):
            validate_decomposition(Decomposition(
                (1, 0), (), {0: (0, 1), 1: (0, 1)}, [f, f], TOP))

    def test_extras_overlap_scope(self):
        f = TableFunction((0, 1), TOP, {}, default=0)
        with pytest.raises(ValueError):
            validate_decomposition(Decomposition(
                (0, 1), (1,), {0: (0, 1), 1: (0, 1)}, [f, f], TOP))

    def test_missing_domain(self):
        dec = chain_dec()
        del dec.domains[2]
        with pytest.raises(ValueError, match="domain"):
            validate_decomposition(dec)

    def test_arity_bound(self):
        f = TableFunction((0, 1, 2, 3), TOP, {}, default=0)
        doms = {x: (0, 1) for x in range(4)}
        with pytest.raises(ValueError, match="arity"):
            validate_decomposition(Decomposition(
                (0, 1, 2, 3), (), doms, [f], TOP))

    def test_uncovered_original(self):
        dec = chain_dec()
        dec.fns.pop()  # x1 no longer appears anywhere
        with pytest.raises(ValueError):
            validate_decomposition(dec)

    def test_lonely_extra(self):
        dec = chain_dec()
        kept = dec.fns[0]
        bare = TableFunction((1,), TOP, {(0,): 0, (1,): 0}, default=0)
        with pytest.raises(ValueError):
            validate_decomposition(Decomposition(
                dec.original_scope, dec.extra_vars, dec.domains,
                [kept, bare], TOP))


class TestMinProjection:
    def test_chain_hand_value(self):
        dec = chain_dec()
        assert projection_table(dec) == {
            (a, b): a + 2 * b for a in (0, 1) for b in (0, 1)}

    def test_no_extras_is_plain_sum(self):
        f = TableFunction((0, 1), TOP, {(a, b): a * b for a in (0, 1)
                                        for b in (0, 1)}, default=TOP)
        dec = Decomposition((0, 1), (), {0: (0, 1), 1: (0, 1)}, [f], TOP)
        assert min_projection(dec, (1, 1)) == 1
        assert min_projection(dec, (0, 1)) == 0

    def test_saturates_at_top(self):
        f1 = TableFunction((0, 1), TOP, {}, default=TOP)
        dec = Decomposition((0, 1), (), {0: (0,), 1: (0,)}, [f1], TOP)
        assert min_projection(dec, (0, 0)) == TOP


class TestBergeAcyclicity:
    def test_single_ternary(self):
        assert berge_acyclic_check(
            [TableFunction((0, 1, 2), TOP, {}, default=0)])

    def test_two_binaries_sharing_two_vars(self):
        f = TableFunction((0, 1), TOP, {}, default=0)
        g = TableFunction((0, 1), TOP, {}, default=1)
        assert not berge_acyclic_check([f, g])

    def test_chain_is_tree(self):
        assert berge_acyclic_check(chain_dec().fns)

    def test_forest_ok(self):
        f = TableFunction((0, 1), TOP, {}, default=0)
        g = TableFunction((2, 3), TOP, {}, default=0)
        assert berge_acyclic_check([f, g])


class TestTdacOrder:
    def test_root_comes_first(self):
        dec = chain_dec()
        order = tdac_order(dec, root=0)
        assert order == [0, 2, 1]
        assert sorted(order) == sorted(dec.all_vars)

    def test_default_root_is_last_original(self):
        order = tdac_order(chain_dec())
        assert order[0] == 1

    def test_every_function_hangs_from_its_earliest_var(self):
        dec = random_tree_dec(random.Random(3))
        order = tdac_order(dec, root=dec.original_scope[0])
        rank = {x: i for i, x in enumerate(order)}
        for f in dec.fns:
            ranks = sorted(rank[x] for x in f.scope)
            # a unique earliest variable; the rest sit strictly deeper
            assert len(f.scope) == 1 or ranks[0] < ranks[1]

    def test_root_must_be_original(self):
        with pytest.raises(ValueError):
            tdac_order(chain_dec(), root=2)

    def test_cycle_rejected(self):
        f = TableFunction((0, 2), TOP, {}, default=0)
        g = TableFunction((0, 2), TOP, {}, default=1)
        h = TableFunction((1, 2), TOP, {}, default=0)
        dec = Decomposition((0, 1), (2,),
                            {0: (0, 1), 1: (0, 1), 2: (0, 1)}, [f, g, h], TOP)
        with pytest.raises(ValueError, match="tree"):
            tdac_order(dec, root=0)

    def test_disconnected_rejected(self):
        f = TableFunction((0, 2), TOP, {}, default=0)
        u2 = TableFunction((2,), TOP, {}, default=0)
        g = TableFunction((1, 3), TOP, {}, default=0)
        u3 = TableFunction((3,), TOP, {}, default=0)
        dec = Decomposition((0, 1), (2, 3),
                            {x: (0, 1) for x in range(4)}, [f, u2, g, u3], TOP)
        with pytest.raises(ValueError):
            tdac_order(dec, root=0)


class TestRegularDecomposition:
    def test_structure(self):
        aut = hamming_weighted(A_STAR)
        dec = decompose_regular(aut, range(3), TOP)
        assert len(dec.extra_vars) == 4  # one state variable per seam
        assert sum(1 for f in dec.fns if f.arity == 3) == 3
        assert berge_acyclic_check(dec.fns)
        validate_decomposition(dec)

    def test_hamming_chain_matches_edit_distance(self):
        dec = decompose_regular(hamming_weighted(A_STAR), range(3), TOP)
        for ell in itertools.product("ab", repeat=3):
            assert min_projection(dec, ell) == regular_cost(A_STAR, ell, top=TOP)

    def test_membership_chain_is_hard(self):
        # with only the plain 0-weight transitions, the projection is a
        # pure accept/reject test
        rng = random.Random(11)
        for _ in range(15):
            n = rng.randint(2, 4)
            aut = random_plain_automaton(rng, rng.randint(2, 3), rng.randint(2, 3))
            dec = decompose_regular(aut, range(n), TOP)
            for ell in itertools.product(aut.alphabet, repeat=n):
                want = weighted_regular_cost(aut, ell, top=TOP)
                assert min_projection(dec, ell) == want

    @pytest.mark.parametrize("seed", range(25))
    def test_weighted_identity(self, seed):
        rng = random.Random(400 + seed)
        aut = random_weighted_automaton(rng)
        n = rng.randint(2, 4)
        dec = decompose_regular(aut, range(n), TOP)
        validate_decomposition(dec)
        for ell in itertools.product(aut.alphabet, repeat=n):
            assert min_projection(dec, ell) == weighted_regular_cost(
                aut, ell, top=TOP)

    @pytest.mark.parametrize("seed", range(25))
    def test_unit_substitution_overlay_gives_hamming(self, seed):
        rng = random.Random(500 + seed)
        aut = random_plain_automaton(rng, rng.randint(2, 3), rng.randint(2, 3))
        n = rng.randint(2, 4)
        dec = decompose_regular(hamming_weighted(aut), range(n), TOP)
        for ell in itertools.product(aut.alphabet, repeat=n):
            assert min_projection(dec, ell) == regular_cost(aut, ell, top=TOP)


class TestGrammarDecomposition:
    def test_two_letter_language(self):
        dec = decompose_grammar(PAIRS, range(2), TOP)
        table = projection_table(dec)
        assert table[("b", "c")] == 0
        assert all(c == TOP for ell, c in table.items() if ell != ("b", "c"))

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_membership_identity(self, m):
        dec = decompose_grammar(EX, range(m), TOP)
        validate_decomposition(dec)
        for ell in itertools.product(EX.terminals, repeat=m):
            want = 0 if grammar_cost(EX, ell, top=TOP) == 0 else TOP
            assert min_projection(dec, ell) == want

    def test_span_variable_count(self):
        for m in (1, 2, 3, 4):
            dec = decompose_grammar(EX, range(m), TOP)
            assert len(dec.extra_vars) == m * (m + 1) // 2

    def test_not_a_tree_beyond_two(self):
        assert berge_acyclic_check(decompose_grammar(EX, range(2), TOP).fns)
        assert not berge_acyclic_check(decompose_grammar(EX, range(3), TOP).fns)
        assert not berge_acyclic_check(decompose_grammar(EX, range(4), TOP).fns)


class TestLinearSumDecomposition:
    def test_pair_equality(self):
        dec = decompose_linear_sum((1, 1), 2, "=", range(2), TOP)
        table = projection_table(dec)
        assert table == {(0, 0): TOP, (0, 1): TOP, (1, 0): TOP, (1, 1): 0}

    def test_zero_target(self):
        dec = decompose_linear_sum((1, 1, 1), 0, "=", range(3), TOP)
        table = projection_table(dec)
        assert table[(0, 0, 0)] == 0
        assert sum(1 for c in table.values() if c == 0) == 1

    @pytest.mark.parametrize("relation", ["=", "<=", ">="])
    def test_relation_semantics(self, relation):
        coeffs, rhs = (1, 2, 1), 2
        dec = decompose_linear_sum(coeffs, rhs, relation, range(3), TOP)
        validate_decomposition(dec)
        assert berge_acyclic_check(dec.fns)
        ok = {"=": lambda s: s == rhs,
              "<=": lambda s: s <= rhs,
              ">=": lambda s: s >= rhs}[relation]
        for ell in itertools.product((0, 1), repeat=3):
            s = sum(a * v for a, v in zip(coeffs, ell))
            assert min_projection(dec, ell) == (0 if ok(s) else TOP)

    def test_wider_domains(self):
        dec = decompose_linear_sum((1, 1), 3, "=", range(2), TOP,
                                   var_domains=((0, 1, 2), (0, 1, 2)))
        table = projection_table(dec)
        assert {ell for ell, c in table.items() if c == 0} == {(1, 2), (2, 1)}

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            decompose_linear_sum((1, -1), 2, "=", range(2), TOP)
        with pytest.raises(ValueError):
            decompose_linear_sum((1, 1), -1, "=", range(2), TOP)
        with pytest.raises(ValueError):
            decompose_linear_sum((1, 1), 2, "<", range(2), TOP)
        with pytest.raises(ValueError):
            decompose_linear_sum((1, 1, 1), 2, "=", range(2), TOP)
        with pytest.raises(ValueError, match="cap"):
            decompose_linear_sum((1, 1), 5000, "=", range(2), TOP)


class TestRelaxation:
    def test_identity_changes_nothing(self):
        dec = decompose_regular(hamming_weighted(A_STAR), range(3), TOP)
        relaxed = relax_network(dec, lambda c: c)
        assert projection_table(relaxed) == projection_table(dec)

    def test_softened_membership(self):
        dec = decompose_linear_sum((1, 1, 1), 2, "=", range(3), TOP)
        relaxed = relax_network(dec, lambda c: min(c, 1))
        old, new = projection_table(dec), projection_table(relaxed)
        for ell in old:
            assert new[ell] <= old[ell]
            if old[ell] == 0:
                assert new[ell] == 0

    def test_raising_rejected(self):
        dec = chain_dec()
        with pytest.raises(ValueError, match="raises"):
            relax_network(dec, lambda c: c + 1)

    def test_per_function_maps(self):
        dec = chain_dec()
        maps = [lambda c: c] * len(dec.fns)
        assert projection_table(relax_network(dec, maps)) == projection_table(dec)
        with pytest.raises(ValueError, match="maps"):
            relax_network(dec, maps[:-1])


class TestNetworkInstantiation:
    def test_standalone_network_optimum(self):
        rng = random.Random(21)
        aut = random_weighted_automaton(rng)
        dec = decompose_regular(aut, range(3), TOP)
        cfn, vmaps = to_cfn(dec)
        best = min(min_projection(dec, ell) for ell in original_tuples(dec))
        cost, _assign = brute_force_solve(cfn)
        assert cost == best
        assert all(vmaps[x][v] == v for x in dec.original_scope
                   for v in dec.domains[x])  # int alphabet maps onto itself

    def test_standalone_requires_dense_ids(self):
        f = TableFunction((0, 5), TOP, {}, default=0)
        u = TableFunction((5,), TOP, {}, default=0)
        dec = Decomposition((0,), (5,), {0: (0, 1), 5: (0, 1)}, [f, u], TOP)
        with pytest.raises(ValueError, match="dense"):
            to_cfn(dec)

    def test_embed_adds_extras_and_costs(self):
        rng = random.Random(22)
        aut = random_plain_automaton(rng, 2, 2)
        n = 3
        dec = decompose_regular(hamming_weighted(aut), range(n), TOP)
        cfn = Cfn(TOP)
        unaries = [[rng.randint(0, 3) for _ in range(2)] for _ in range(n)]
        for i in range(n):
            cfn.add_variable(2)
            cfn.add_unary(i, unaries[i])
        trans = embed_decomposition(cfn, dec)
        assert all(trans[x] == x for x in dec.original_scope)
        assert len(cfn.vars) == n + len(dec.extra_vars)
        want = min(min_projection(dec, ell)
                   + sum(unaries[i][ell[i]] for i in range(n))
                   for ell in original_tuples(dec))
        cost, _assign = brute_force_solve(cfn)
        assert cost == want

    def test_embed_rejects_mismatches(self):
        dec = chain_dec()
        other = Cfn(TOP + 1)
        other.add_variable(2)
        other.add_variable(2)
        with pytest.raises(ValueError):
            embed_decomposition(other, dec)
        small = Cfn(TOP)
        small.add_variable(2)
        small.add_variable(3)  # wrong domain size for x1
        with pytest.raises(ValueError):
            embed_decomposition(small, dec)


class TestDagCompiler:
    def test_chain_hand_case(self):
        dec = chain_dec()
        dag = decomposition_to_filter_dag(dec)
        validate_dag(dag)
        for a in (0, 1):
            for b in (0, 1):
                assert dag_eval(dag, {0: a, 1: b}) == a + 2 * b

    def test_ternary_with_state_rider(self):
        rng = random.Random(31)
        entries = {tup: rng.randint(0, 5)
                   for tup in itertools.product((0, 1), repeat=3)}
        t = TableFunction((0, 1, 2), TOP, entries, default=TOP)
        u = TableFunction((2,), TOP, {(0,): 1, (1,): 0}, default=TOP)
        dec = Decomposition((0, 1), (2,),
                            {x: (0, 1) for x in range(3)}, [t, u], TOP)
        dag = decomposition_to_filter_dag(dec)
        validate_dag(dag)
        for a in (0, 1):
            for b in (0, 1):
                want = min(entries[(a, b, e)] + u.cost((e,)) for e in (0, 1))
                assert dag_eval(dag, {0: a, 1: b}) == want

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_projection_everywhere(self, seed):
        rng = random.Random(9000 + seed)
        dec = random_tree_dec(rng)
        root = rng.choice(dec.original_scope)
        dag = decomposition_to_filter_dag(dec, root=root)
        validate_dag(dag)
        doms = {x: list(dec.domains[x]) for x in dec.original_scope}
        table = projection_table(dec)
        for ell, want in table.items():
            assert dag_eval(dag, dict(zip(dec.original_scope, ell))) == want
        assert dag_minimum(dag, doms) == min(table.values())
        build_min_plus(dag, doms)
        for i, x in enumerate(dec.original_scope):
            for v in dec.domains[x]:
                want = min(c for ell, c in table.items() if ell[i] == v)
                assert min_given(dag, x, v) == want

    def test_root_choice_does_not_change_the_function(self):
        dec = random_tree_dec(random.Random(77))
        tables = []
        for root in dec.original_scope:
            dag = decomposition_to_filter_dag(dec, root=root)
            tables.append({ell: dag_eval(dag, dict(zip(dec.original_scope, ell)))
                           for ell in original_tuples(dec)})
        assert all(t == tables[0] for t in tables)

    def test_disconnected_components_sum(self):
        rng = random.Random(41)
        f = TableFunction((0, 2), TOP, {(a, e): rng.randint(0, 4)
                                        for a in (0, 1) for e in (0, 1)},
                          default=TOP)
        u2 = TableFunction((2,), TOP, {(0,): 0, (1,): 2}, default=TOP)
        g = TableFunction((1, 3), TOP, {(b, e): rng.randint(0, 4)
                                        for b in (0, 1) for e in (0, 1)},
                          default=TOP)
        u3 = TableFunction((3,), TOP, {(0,): 1, (1,): 0}, default=TOP)
        dec = Decomposition((0, 1), (2, 3),
                            {x: (0, 1) for x in range(4)}, [f, u2, g, u3], TOP)
        dag = decomposition_to_filter_dag(dec)
        validate_dag(dag)
        for ell, want in projection_table(dec).items():
            assert dag_eval(dag, dict(zip((0, 1), ell))) == want

    def test_state_only_component_folds_to_constant(self):
        f = TableFunction((0, 2), TOP, {(a, e): a + e for a in (0, 1)
                                        for e in (0, 1)}, default=TOP)
        u2 = TableFunction((2,), TOP, {(0,): 0, (1,): 0}, default=TOP)
        g = TableFunction((3, 4), TOP, {(0, 0): 7, (0, 1): 3, (1, 0): 9,
                                        (1, 1): 6}, default=TOP)
        u3 = TableFunction((3,), TOP, {(0,): 0, (1,): 1}, default=TOP)
        u4 = TableFunction((4,), TOP, {(0,): 2, (1,): 0}, default=TOP)
        dec = Decomposition((0,), (2, 3, 4),
                            {x: (0, 1) for x in range(5) if x != 1},
                            [f, u2, g, u3, u4], TOP)
        dag = decomposition_to_filter_dag(dec)
        validate_dag(dag)
        # the x-free component contributes min(7+0+2, 3+0+0, 9+1+2, 6+1+0) = 3
        assert dag_eval(dag, {0: 0}) == 0 + 3
        assert dag_eval(dag, {0: 1}) == 1 + 3
        assert projection_table(dec) == {(0,): 3, (1,): 4}

    def test_infeasible_everywhere(self):
        f = TableFunction((0, 2), TOP, {}, default=TOP)
        u = TableFunction((2,), TOP, {(0,): 0, (1,): 0}, default=TOP)
        dec = Decomposition((0,), (2,), {0: (0, 1), 2: (0, 1)}, [f, u], TOP)
        dag = decomposition_to_filter_dag(dec)
        validate_dag(dag)
        assert dag_eval(dag, {0: 0}) == TOP
        assert dag_eval(dag, {0: 1}) == TOP
        assert dag_minimum(dag, {0: [0, 1]}) == TOP

    def test_requires_tree(self):
        f = TableFunction((0, 2), TOP, {}, default=0)
        g = TableFunction((0, 2), TOP, {}, default=1)
        h = TableFunction((1, 2), TOP, {}, default=0)
        dec = Decomposition((0, 1), (2,),
                            {x: (0, 1) for x in range(3)}, [f, g, h], TOP)
        with pytest.raises(ValueError, match="tree"):
            decomposition_to_filter_dag(dec)

    def test_root_must_be_original(self):
        with pytest.raises(ValueError):
            decomposition_to_filter_dag(chain_dec(), root=2)

    def test_compiled_dag_accepts_shifts(self):
        dec = chain_dec()
        dag = decomposition_to_filter_dag(dec)
        doms = {0: [0, 1], 1: [0, 1]}
        build_min_plus(dag, doms)
        alpha = min_given(dag, 1, 1)
        assert alpha == 2
        project_on_dag(dag, 1, 1, alpha)
        validate_dag(dag)
        for (a, b), want in projection_table(dec).items():
            shifted = want - (alpha if b == 1 else 0)
            assert dag_eval(dag, {0: a, 1: b}) == shifted
        project_on_dag(dag, 1, 1, -alpha)  # extend it back in
        for (a, b), want in projection_table(dec).items():
            assert dag_eval(dag, {0: a, 1: b}) == want


class TestDirectionalChainAgreement:
    """A chain of ternary steps propagated leaf-to-root carries exactly the
    cost the monolithic automaton function would: same root unary table,
    same slack, same pruning, all equal to the conditioned optima."""

    @pytest.mark.parametrize("seed", range(50))
    def test_root_tables_agree(self, seed):
        rng = random.Random(8800 + seed)
        n = rng.randint(2, 4)
        aut = random_plain_automaton(rng, rng.randint(2, 3), rng.randint(2, 3))
        d = len(aut.alphabet)
        unaries = [[rng.randint(0, 3) for _ in range(d)] for _ in range(n)]

        mono = Cfn(TOP)
        for i in range(n):
            mono.add_variable(d)
            mono.add_unary(i, unaries[i])
        mono.add_function(RegularFunction(aut, tuple(range(n)), TOP))
        root = n - 1
        enforce_tdac(mono, [root] + [i for i in range(n) if i != root])

        dec = decompose_regular(hamming_weighted(aut), range(n), TOP)
        net, _ = to_cfn(dec)
        for i in range(n):
            net.add_unary(i, unaries[i])
        enforce_tdac(net, tdac_order(dec, root))

        assert mono.unary[root] == net.unary[root]
        assert mono.w_zero == net.w_zero
        assert mono.vars[root].domain == net.vars[root].domain

        # both match the conditioned optima computed the slow way
        for v in range(d):
            want = min((regular_cost(aut, ell, top=TOP)
                        + sum(unaries[i][ell[i]] for i in range(n))
                        for ell in itertools.product(range(d), repeat=n)
                        if ell[root] == v), default=TOP)
            want = min(want, TOP)
            if v in mono.vars[root].domain:
                got = min(mono.unary[root][v] + mono.w_zero, TOP)
            else:
                got = TOP
            assert got == want
