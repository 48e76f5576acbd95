"""Decomposing big-arity cost functions into networks of small ones.

A decomposition trades one cost function over scope S for a set of bounded
arity functions over S plus fresh "state" variables E, such that minimizing
the small functions over E reproduces the original costs exactly
(:func:`min_projection` is the reference reading). When the incidence graph
of the small functions is a tree (:func:`berge_acyclic_check`), enforcing
directional arc consistency along a root-first order of that tree
(:func:`tdac_order`) computes exact conditioned minima, and the whole
network compiles into a single filtering DAG
(:func:`decomposition_to_filter_dag`) usable wherever the monolithic
function would be.

Builders are provided for weighted-automaton functions (one state variable
per position), grammar membership (one parse variable per substring, not
tree shaped) and linear (in)equalities over integer variables (partial-sum
chain). :func:`relax_network` rewrites every cost pointwise, checking the
result never exceeds the original, which is how hard networks turn into
lower-bounding soft ones.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .core import CostFunction, TableFunction
from .dag import FilterDag, validate_dag
from .globalfns.grammar import CnfGrammar
from .globalfns.regular import Automaton, _overlay


@dataclass
class Decomposition:
    """A bounded-arity network standing in for one big cost function.

    ``domains`` maps every variable id (original and extra) to its tuple of
    raw values; tables in ``fns`` are keyed by those raw values. ``names``
    optionally labels extra variables for display.
    """

    original_scope: tuple[int, ...]
    extra_vars: tuple[int, ...]
    domains: dict[int, tuple]
    fns: list[CostFunction]
    top: int
    max_arity: int = 3
    names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.original_scope = tuple(self.original_scope)
        self.extra_vars = tuple(sorted(self.extra_vars))
        self.domains = {x: tuple(vals) for x, vals in dict(self.domains).items()}

    @property
    def all_vars(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.original_scope) | set(self.extra_vars)))


def validate_decomposition(dec: Decomposition) -> None:
    """Structural hygiene; raises ValueError on the first violation."""
    if not dec.original_scope:
        raise ValueError("empty original scope")
    if list(dec.original_scope) != sorted(set(dec.original_scope)):
        raise ValueError("original scope must be strictly increasing")
    if set(dec.original_scope) & set(dec.extra_vars):
        raise ValueError("extra variables overlap the original scope")
    known = set(dec.original_scope) | set(dec.extra_vars)
    for x in known:
        if not dec.domains.get(x):
            raise ValueError(f"variable {x} has no domain")
    seen = {x: 0 for x in known}
    for f in dec.fns:
        if f.arity > dec.max_arity:
            raise ValueError(
                f"function arity {f.arity} exceeds the bound {dec.max_arity}")
        for x in f.scope:
            if x not in known:
                raise ValueError(f"function scope references unknown variable {x}")
            seen[x] += 1
    for x in dec.original_scope:
        if seen[x] == 0:
            raise ValueError(f"original variable {x} occurs in no function")
    for e in dec.extra_vars:
        # a state variable nothing cross-checks could take any value freely
        if seen[e] < 2:
            raise ValueError(f"extra variable {e} occurs in fewer than two functions")


def min_projection(dec: Decomposition, ell) -> int:
    """Cost the decomposition assigns to ``ell``: minimize out the extras.

    ``ell`` lists raw values in original-scope order. This is the
    reference every builder and the DAG compiler are tested against: an
    exhaustive depth-first sweep over the extra variables, charging each
    function as soon as its scope is fully assigned. Costs never decrease
    along a branch, so branches at or above the best total are cut without
    affecting exactness.
    """
    if len(ell) != len(dec.original_scope):
        raise ValueError("assignment length does not match the original scope")
    top = dec.top
    assign = dict(zip(dec.original_scope, ell))
    extras = list(dec.extra_vars)
    depth_of = {e: i for i, e in enumerate(extras)}
    due = [[] for _ in extras]
    start = 0
    for f in dec.fns:
        when = max((depth_of[x] for x in f.scope if x in depth_of), default=-1)
        if when < 0:
            start += min(f.cost(tuple(assign[x] for x in f.scope)), top)
            start = min(start, top)
        else:
            due[when].append(f)
    best = top

    def sweep(i, acc):
        nonlocal best
        if acc >= best:
            return
        if i == len(extras):
            best = acc
            return
        x = extras[i]
        for v in dec.domains[x]:
            assign[x] = v
            c = acc
            for f in due[i]:
                c += f.cost(tuple(assign[z] for z in f.scope))
                if c >= best:
                    break
            else:
                sweep(i + 1, c)
        del assign[x]

    sweep(0, start)
    return best


def berge_acyclic_check(fns) -> bool:
    """True when the variable/function incidence graph is a forest."""
    parent: dict = {}

    def find(a):
        root = a
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(a, a) != a:
            parent[a], a = root, parent[a]
        return root

    for i, f in enumerate(fns):
        for x in f.scope:
            ra, rb = find(("f", i)), find(("v", x))
            if ra == rb:
                return False
            parent[ra] = rb
    return True


def _incidence(fns):
    var_fns: dict[int, list[int]] = {}
    for i, f in enumerate(fns):
        for x in f.scope:
            var_fns.setdefault(x, []).append(i)
    return var_fns


def _tree_from(dec: Decomposition, root: int):
    """BFS the incidence forest from a root variable.

    Returns (children_fns, fn_parent, visited_vars) where children_fns maps
    each reached variable to the functions hanging below it and fn_parent
    maps each reached function to the variable it hangs from.
    """
    var_fns = _incidence(dec.fns)
    children_fns: dict[int, list[int]] = {root: []}
    fn_parent: dict[int, int] = {}
    order = [root]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for fi in sorted(var_fns.get(x, ())):
            if fi in fn_parent:
                continue
            fn_parent[fi] = x
            children_fns[x].append(fi)
            for y in dec.fns[fi].scope:
                if y == x or y in children_fns:
                    continue
                children_fns[y] = []
                order.append(y)
                queue.append(y)
    return children_fns, fn_parent, order


def tdac_order(dec: Decomposition, root: int | None = None) -> list[int]:
    """Root-first traversal of the incidence tree, for directional AC.

    Every function's smallest variable under the returned order is the
    variable it hangs from, so processing functions by decreasing rank of
    that variable sweeps costs from the leaves into the root's unary table.
    """
    if not berge_acyclic_check(dec.fns):
        raise ValueError("the incidence graph is not a tree")
    if root is None:
        root = max(dec.original_scope)
    if root not in dec.original_scope:
        raise ValueError(f"root {root} is not an original variable")
    _, _, order = _tree_from(dec, root)
    if len(order) != len(dec.all_vars):
        raise ValueError("the incidence graph is disconnected")
    return order


# -- builders -----------------------------------------------------------------

def decompose_regular(aut: Automaton, scope, top: int) -> Decomposition:
    """Chain a weighted automaton: one state variable around each position.

    State variable Q_i holds the automaton state after reading position i;
    a ternary table per position charges the transition weight, a unary on
    Q_0 the start weights and one on Q_n the acceptance weights. The
    incidence graph is a path, hence tree shaped.
    """
    scope = tuple(scope)
    if not scope:
        raise ValueError("empty scope")
    n = len(scope)
    lam, sigma, rho = _overlay(aut)
    base = max(scope) + 1
    q_ids = tuple(base + i for i in range(n + 1))
    domains = {x: tuple(aut.alphabet) for x in scope}
    for qid in q_ids:
        domains[qid] = tuple(aut.states)
    fns: list[CostFunction] = [
        TableFunction((q_ids[0],), top,
                      {(q,): c for q, c in lam.items() if c < top},
                      default=top, name="start")
    ]
    for i in range(n):
        entries = {}
        for (q, s, q2), w in sigma.items():
            if w < top:
                entries[(s, q, q2)] = w  # scope order: position, Q_i, Q_i+1
        fns.append(TableFunction((scope[i], q_ids[i], q_ids[i + 1]), top,
                                 entries, default=top, name=f"step{i + 1}"))
    fns.append(TableFunction((q_ids[n],), top,
                             {(q,): c for q, c in rho.items() if c < top},
                             default=top, name="accept"))
    dec = Decomposition(scope, q_ids, domains, fns, top,
                        names={qid: f"Q{i}" for i, qid in enumerate(q_ids)})
    validate_decomposition(dec)
    return dec


def decompose_grammar(g: CnfGrammar, scope, top: int) -> Decomposition:
    """Parse-chart network for grammar membership (hard costs only).

    One variable P(i,j) per substring of length j starting at position i.
    Length-1 variables hold a nonterminal; longer ones hold (nonterminal,
    split) pairs plus None for spans the chosen parse never visits, so an
    unused cell constrains nothing. Ternary tables tie a claimed span to
    its two halves through the binary rules, binary tables tie single
    positions to terminal rules, and a unary pins the full span to the
    start symbol. Spans share their halves, so the incidence graph has
    cycles once three positions exist: this builder trades tree shape for
    polynomially many state variables.
    """
    scope = tuple(scope)
    m = len(scope)
    if m == 0:
        raise ValueError("empty scope")
    nts = g.nonterminals
    base = max(scope) + 1
    pid = {}
    names = {}
    nxt = base
    for j in range(1, m + 1):
        for i in range(1, m - j + 2):
            pid[(i, j)] = nxt
            names[nxt] = f"P{i},{j}"
            nxt += 1
    domains: dict[int, tuple] = {x: tuple(g.terminals) for x in scope}
    for (i, j), v in pid.items():
        if j == 1:
            domains[v] = tuple(nts)
        else:
            domains[v] = tuple((a, k) for a in nts for k in range(1, j)) + (None,)
    fns: list[CostFunction] = []
    for i in range(1, m + 1):
        entries = {(a, A): 0 for A in nts for a in g.term_rules[A]}
        fns.append(TableFunction((scope[i - 1], pid[(i, 1)]), top, entries,
                                 default=top, name=f"word{i}"))

    def symbol_of(j, val):
        return val if j == 1 else val[0]

    for j in range(2, m + 1):
        for i in range(1, m - j + 2):
            for k in range(1, j):
                trio = (pid[(i, j)], pid[(i, k)], pid[(i + k, j - k)])
                spots = sorted(range(3), key=lambda t: trio[t])
                entries = {}
                # only tuples claiming this very split are constrained; a
                # span split elsewhere, or left unused, is someone else's
                # business (default 0)
                for A in nts:
                    pairs = set(g.bin_rules[A])
                    for lv in domains[trio[1]]:
                        for rv in domains[trio[2]]:
                            if (lv is None or rv is None
                                    or (symbol_of(k, lv),
                                        symbol_of(j - k, rv)) not in pairs):
                                vals = ((A, k), lv, rv)
                                entries[tuple(vals[t] for t in spots)] = top
                fns.append(TableFunction(tuple(sorted(trio)), top, entries,
                                         default=0, name=f"split{i},{j},{k}"))
    if m == 1:
        start_entries = {(g.start,): 0}
    else:
        start_entries = {((g.start, k),): 0 for k in range(1, m)}
    fns.append(TableFunction((pid[(1, m)],), top, start_entries, default=top,
                             name="axiom"))
    dec = Decomposition(scope, tuple(pid.values()), domains, fns, top,
                        names=names)
    validate_decomposition(dec)
    return dec


def decompose_linear_sum(coeffs, rhs: int, relation: str, scope, top: int,
                         var_domains=None, cap: int = 4096) -> Decomposition:
    """Partial-sum chain for  sum(a_i * x_i)  (=|<=|>=)  rhs.

    Running totals live in extra variables with domain 0..rhs, so the table
    sizes are pseudo-polynomial in rhs; ``cap`` guards against accidental
    huge right-hand sides. For ">=" the running total saturates at rhs,
    which keeps the chain honest without widening the domains.
    """
    scope = tuple(scope)
    coeffs = tuple(coeffs)
    if not scope:
        raise ValueError("empty scope")
    if len(coeffs) != len(scope):
        raise ValueError("one coefficient per variable, please")
    if any(a < 0 for a in coeffs):
        raise ValueError("negative coefficients are not supported")
    if relation not in ("=", "<=", ">="):
        raise ValueError(f"unknown relation {relation!r}")
    if rhs < 0:
        raise ValueError("negative right-hand side")
    if rhs > cap:
        raise ValueError(f"right-hand side {rhs} exceeds the domain cap {cap}")
    n = len(scope)
    if var_domains is None:
        var_domains = [(0, 1)] * n
    var_domains = [tuple(d) for d in var_domains]
    if len(var_domains) != n:
        raise ValueError("one domain per variable, please")
    for dom in var_domains:
        if any(not isinstance(v, int) or v < 0 for v in dom):
            raise ValueError("variable values must be non-negative integers")
    base = max(scope) + 1
    q_ids = tuple(base + i for i in range(n))
    totals = tuple(range(rhs + 1))
    domains = {x: var_domains[i] for i, x in enumerate(scope)}
    for qid in q_ids:
        domains[qid] = totals
    clamp = relation == ">="

    def step(prev, a, v):
        t = prev + a * v
        if clamp:
            return min(t, rhs)
        return t if t <= rhs else None

    fns: list[CostFunction] = []
    first = {(v, step(0, coeffs[0], v)): 0 for v in var_domains[0]
             if step(0, coeffs[0], v) is not None}
    fns.append(TableFunction((scope[0], q_ids[0]), top, first, default=top,
                             name="sum1"))
    for i in range(1, n):
        entries = {}
        for prev in totals:
            for v in var_domains[i]:
                cur = step(prev, coeffs[i], v)
                if cur is not None:
                    entries[(v, prev, cur)] = 0
        fns.append(TableFunction((scope[i], q_ids[i - 1], q_ids[i]), top,
                                 entries, default=top, name=f"sum{i + 1}"))
    if relation == "<=":
        goal = {(t,): 0 for t in totals}
    else:
        goal = {(rhs,): 0}
    fns.append(TableFunction((q_ids[-1],), top, goal, default=top, name="goal"))
    dec = Decomposition(scope, q_ids, domains, fns, top,
                        names={qid: f"t{i + 1}" for i, qid in enumerate(q_ids)})
    validate_decomposition(dec)
    return dec


def relax_network(dec: Decomposition, theta) -> Decomposition:
    """Rewrite every cost through ``theta``, refusing any increase.

    ``theta`` maps an old cost to a new one (e.g. ``lambda c: min(c, 1)``
    to soften a hard network); pass a sequence of callables to relax each
    function through its own map. Each function is materialized over its
    full domain product; a rewritten cost above the original raises
    ValueError, since the point of the exercise is a network that never
    overestimates.
    """
    if callable(theta):
        maps = [theta] * len(dec.fns)
    else:
        maps = list(theta)
        if len(maps) != len(dec.fns):
            raise ValueError(
                f"expected {len(dec.fns)} relaxation maps, got {len(maps)}")
    relaxed: list[CostFunction] = []
    for f, fmap in zip(dec.fns, maps):
        pools = [dec.domains[x] for x in f.scope]
        entries = {}
        for tup in itertools.product(*pools):
            old = min(f.cost(tup), dec.top)
            new = min(fmap(old), dec.top)
            if new > old:
                raise ValueError(
                    f"relaxation raises the cost of {tup} from {old} to {new}")
            entries[tup] = new
        relaxed.append(TableFunction(f.scope, dec.top, entries, default=dec.top,
                                     name=getattr(f, "name", None)))
    return Decomposition(dec.original_scope, dec.extra_vars, dec.domains,
                         relaxed, dec.top, dec.max_arity, dict(dec.names))


# -- instantiation into networks -----------------------------------------------

def _value_maps(dec: Decomposition):
    return {x: {v: i for i, v in enumerate(dec.domains[x])}
            for x in dec.all_vars}


def _install_fns(cfn, dec: Decomposition, trans, vmaps) -> None:
    for f in dec.fns:
        scope2 = tuple(trans[x] for x in f.scope)
        if f.arity == 1:
            x = f.scope[0]
            table = [min(f.cost((v,)), cfn.top) for v in dec.domains[x]]
            cfn.add_unary(trans[x], table)
            continue
        entries = {}
        for tup in itertools.product(*(dec.domains[x] for x in f.scope)):
            c = f.cost(tup)
            if c != f.default:
                entries[tuple(vmaps[x][v] for x, v in zip(f.scope, tup))] = \
                    min(c, cfn.top)
        cfn.add_function(TableFunction(scope2, cfn.top, entries,
                                       default=min(f.default, cfn.top),
                                       name=getattr(f, "name", None)))


def to_cfn(dec: Decomposition, name: str = "decomposed"):
    """Stand-alone network for a decomposition; ids must already be dense.

    Raw values become dense indices by their position in each domain tuple.
    Returns (network, value_maps) with value_maps[x][raw] = dense.
    """
    from .core import Cfn

    ids = dec.all_vars
    if ids != tuple(range(len(ids))):
        raise ValueError("variable ids must form a dense range to instantiate")
    cfn = Cfn(dec.top, name=name)
    for x in ids:
        vals = dec.domains[x]
        cfn.add_variable(len(vals), name=dec.names.get(x),
                         value_names=[str(v) for v in vals])
    vmaps = _value_maps(dec)
    _install_fns(cfn, dec, {x: x for x in ids}, vmaps)
    return cfn, vmaps


def embed_decomposition(cfn, dec: Decomposition):
    """Graft a decomposition onto an existing network.

    The original-scope variables must already exist in ``cfn`` and their
    raw values in the decomposition must be the dense values 0..d-1; extra
    variables are appended. Returns the id translation
    {decomposition id: network id}.
    """
    if dec.top != cfn.top:
        raise ValueError("decomposition and network disagree on top")
    trans = {x: x for x in dec.original_scope}
    for x in dec.original_scope:
        if not 0 <= x < len(cfn.vars):
            raise ValueError(f"original variable {x} does not exist in the network")
        if dec.domains[x] != tuple(cfn.vars[x].initial_domain):
            raise ValueError(
                f"variable {x} must use dense values to embed, got"
                f" {dec.domains[x]}")
    for e in dec.extra_vars:
        vals = dec.domains[e]
        var = cfn.add_variable(len(vals), name=dec.names.get(e),
                               value_names=[str(v) for v in vals])
        trans[e] = var.id
    _install_fns(cfn, dec, trans, _value_maps(dec))
    return trans


# -- compiling a tree-shaped decomposition into one filtering DAG ---------------

def _compact(dag: FilterDag, root: int) -> FilterDag:
    """Copy the part of ``dag`` reachable from ``root`` into a fresh DAG.

    Construction can abandon speculative nodes (branches that turned out
    forbidden); the validated result must not carry them.
    """
    order = []
    seen = {root}
    stack = [(root, iter(dag.nodes[root].children))]
    while stack:
        nid, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            order.append(nid)
            continue
        if child not in seen:
            seen.add(child)
            stack.append((child, iter(dag.nodes[child].children)))
    fresh = FilterDag(dag.top)
    remap = {}
    for nid in order:  # children before parents
        node = dag.nodes[nid]
        if node.kind == "leaf":
            remap[nid] = fresh.add_leaf(node.scope[0], node.table, node.default)
        elif node.kind == "sum":
            remap[nid] = fresh.add_sum([remap[c] for c in node.children],
                                       bias=node.bias)
        else:
            remap[nid] = fresh.add_min([remap[c] for c in node.children])
    fresh.set_root(remap[root])
    return fresh


def decomposition_to_filter_dag(dec: Decomposition,
                                root: int | None = None) -> FilterDag:
    """Fold a tree-shaped decomposition into a filtering DAG over S.

    For each (variable, value) of the tree a node captures the best cost of
    the subtree hanging below it; function nodes minimize over the joint
    values of the non-parent variables, summing the children subtrees plus
    the pinned table cost (riding as a sum bias). Original variables guard
    themselves with a single-entry leaf, so the DAG charges top whenever
    the assignment disagrees with the branch, and all leaves stay unary.
    State variables are minimized out on the spot and contribute constants
    or shared subtree nodes. The result answers minima and conditioned
    minima for the decomposed function without the extra variables.
    """
    if not berge_acyclic_check(dec.fns):
        raise ValueError("only tree-shaped decompositions compile to a DAG")
    if root is None:
        root = max(dec.original_scope)
    if root not in dec.original_scope:
        raise ValueError(f"root {root} is not an original variable")
    top = dec.top
    originals = set(dec.original_scope)
    dag = FilterDag(top)

    var_fns = _incidence(dec.fns)
    comp_nodes: list[int] = []
    const_total = 0
    seen_vars: set[int] = set()

    def component_of(start):
        vs, fs = {start}, set()
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for fi in var_fns.get(x, ()):
                if fi in fs:
                    continue
                fs.add(fi)
                for y in dec.fns[fi].scope:
                    if y not in vs:
                        vs.add(y)
                        queue.append(y)
        return vs, fs

    def compile_component(local_root):
        children_fns, _, _ = _tree_from(dec, local_root)
        memo: dict[tuple[int, object], tuple[int, int | None]] = {}

        def omega_var(x, a):
            key = (x, a)
            if key in memo:
                return memo[key]
            const = 0
            parts = []
            for fi in children_fns[x]:
                c, nid = omega_fn(fi, x, a)
                const = min(const + c, top)
                if nid is not None:
                    parts.append(nid)
            if const >= top:
                res = (top, None)
            elif x in originals:
                # the variable gates itself exactly once, carrying the
                # constant part of everything below
                parts.append(dag.add_leaf(x, {a: const}))
                res = (0, parts[0] if len(parts) == 1 else dag.add_sum(parts))
            elif not parts:
                res = (const, None)
            elif const == 0 and len(parts) == 1:
                res = (0, parts[0])
            else:
                res = (0, dag.add_sum(parts, bias=const))
            memo[key] = res
            return res

        def omega_fn(fi, x, a):
            f = dec.fns[fi]
            others = [y for y in f.scope if y != x]
            node_branches = []
            const_branches = []
            for combo in itertools.product(*(dec.domains[y] for y in others)):
                assign = dict(zip(others, combo))
                assign[x] = a
                cost = min(f.cost(tuple(assign[z] for z in f.scope)), top)
                parts = []
                for y, b in zip(others, combo):
                    c, nid = omega_var(y, b)
                    cost = min(cost + c, top)
                    if nid is not None:
                        parts.append(nid)
                if cost >= top:
                    continue
                if not parts:
                    const_branches.append(cost)
                elif cost == 0 and len(parts) == 1:
                    node_branches.append(parts[0])
                else:
                    node_branches.append(dag.add_sum(parts, bias=cost))
            # a live branch reaches an original variable iff any does, so
            # constants and nodes never compete inside one minimum
            assert not (node_branches and const_branches)
            if const_branches:
                return (min(const_branches), None)
            if not node_branches:
                return (top, None)
            if len(node_branches) == 1:
                return (0, node_branches[0])
            return (0, dag.add_min(node_branches))

        alts = []
        for a in dec.domains[local_root]:
            _, nid = omega_var(local_root, a)
            if nid is not None:
                alts.append(nid)
        if not alts:
            # nothing satisfiable below top: an always-top function
            comp_scope = sorted(originals & set(children_fns))
            return dag.add_sum([dag.add_leaf(x, {v: top for v in dec.domains[x]})
                                for x in comp_scope])
        return alts[0] if len(alts) == 1 else dag.add_min(alts)

    for start in sorted(set(var_fns) | originals):
        if start in seen_vars:
            continue
        vs, fs = component_of(start)
        seen_vars |= vs
        here = sorted(originals & vs)
        if not here:
            # a fragment touching no original variable is a plain constant
            best = top
            order = sorted(vs)
            for combo in itertools.product(*(dec.domains[y] for y in order)):
                assign = dict(zip(order, combo))
                total = 0
                for fi in fs:
                    sc = dec.fns[fi].scope
                    total = min(total + dec.fns[fi].cost(
                        tuple(assign[z] for z in sc)), top)
                best = min(best, total)
            const_total = min(const_total + best, top)
            continue
        comp_nodes.append(compile_component(root if root in vs else here[-1]))

    if len(comp_nodes) == 1 and const_total == 0:
        root_nid = comp_nodes[0]
    else:
        root_nid = dag.add_sum(comp_nodes, bias=const_total)
    out = _compact(dag, root_nid)
    validate_dag(out)
    return out
