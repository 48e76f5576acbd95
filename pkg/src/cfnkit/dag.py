"""Filtering DAGs: dynamic programming over structured views of cost functions.

A filtering DAG encodes a cost function of large arity as a rooted DAG whose
leaves are unary cost tables. Internal nodes combine children with either a
saturating sum (children cover pairwise disjoint sets of variables) or a
minimum (children are alternative views over exactly the node's variables).
Under those two structural rules the minimum cost of the encoded function,
and minima conditioned on a single variable taking a single value, are
computed bottom-up and memoized (``min_table`` and ``min_plus``). Moving
cost in or out of the function at one (variable, value) pair touches only
the leaf tables over that variable; memoized minima are repaired by walking
the ancestors of the edited leaves, so repeated queries stay cheap.

Leaf entries are plain signed ints. Any entry >= the dag's ``top`` means
"forbidden" and absorbs shifts and sums. Entries may dip below zero while a
shift history is in flight; the network-level bookkeeping guarantees the
total cost of any tuple stays non-negative. A leaf can carry a ``default``
cost for values missing from its table (no default means top), so tables
like "0 on a few values, 1 everywhere else" stay small; shifting such a
leaf materializes the edited entry. A sum node may carry a constant
``bias`` added on top of its children; being value-independent it never
takes part in a shift, so compiled constants ride on sums instead of
polluting some leaf's table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ept import PreconditionError

LEAF = "leaf"
SUM = "sum"
MIN = "min"


class DagError(Exception):
    """Structural problem with a filtering DAG, or a misuse of its API."""


class StaleTableError(DagError):
    """Conditioned-minimum tables are out of date with the domains."""


@dataclass
class DagNode:
    id: int
    kind: str
    scope: tuple[int, ...]
    children: tuple[int, ...] = ()
    table: dict[int, int] | None = None  # leaf only: value -> signed cost
    default: int | None = None  # leaf only: cost of untabulated values (None = top)
    bias: int = 0  # sum only: constant added on top of the children


class FilterDag:
    """A rooted DAG of cost nodes with memoized minima.

    Build nodes through :meth:`add_leaf`, :meth:`add_sum` and
    :meth:`add_min` (children must exist before their parent), then call
    :meth:`set_root`. :func:`validate_dag` checks the structural rules and
    caches the topological order; the query functions run it on demand.
    """

    def __init__(self, top: int):
        self.top = top
        self.nodes: list[DagNode] = []
        self.root: int | None = None
        self.topo: list[int] | None = None  # parents before children
        self.parents: list[list[int]] | None = None
        self.min_table: list[int] | None = None
        self.min_plus: dict[tuple[int, int, int], int] | None = None
        self.built_domains: dict[int, tuple[int, ...]] | None = None
        self.built_stamp = None

    def add_leaf(self, var: int, table: dict[int, int], default: int | None = None) -> int:
        nid = len(self.nodes)
        self.nodes.append(DagNode(nid, LEAF, (var,), (), dict(table), default))
        self._drop_caches()
        return nid

    def add_sum(self, children, bias: int = 0) -> int:
        return self._add_internal(SUM, children, bias)

    def add_min(self, children) -> int:
        return self._add_internal(MIN, children)

    def _add_internal(self, kind: str, children, bias: int = 0) -> int:
        children = tuple(children)
        scope: set[int] = set()
        for c in children:
            scope.update(self.nodes[c].scope)
        nid = len(self.nodes)
        self.nodes.append(DagNode(nid, kind, tuple(sorted(scope)), children, bias=bias))
        self._drop_caches()
        return nid

    def set_root(self, nid: int) -> None:
        self.root = nid
        self._drop_caches()

    def _drop_caches(self) -> None:
        self.topo = None
        self.parents = None
        self.min_table = None
        self.min_plus = None
        self.built_domains = None
        self.built_stamp = None

    @property
    def scope(self) -> tuple[int, ...]:
        if self.root is None:
            raise DagError("no root set")
        return self.nodes[self.root].scope

    def copy(self) -> "FilterDag":
        dup = FilterDag(self.top)
        dup.nodes = [
            DagNode(n.id, n.kind, n.scope, n.children,
                    dict(n.table) if n.table is not None else None, n.default,
                    n.bias)
            for n in self.nodes
        ]
        dup.root = self.root
        dup.topo = list(self.topo) if self.topo is not None else None
        dup.parents = ([list(p) for p in self.parents]
                       if self.parents is not None else None)
        dup.min_table = list(self.min_table) if self.min_table is not None else None
        dup.min_plus = dict(self.min_plus) if self.min_plus is not None else None
        dup.built_domains = (dict(self.built_domains)
                             if self.built_domains is not None else None)
        dup.built_stamp = self.built_stamp
        return dup


def _combine(kind: str, values, top: int, bias: int = 0) -> int:
    """Aggregate child costs: saturating sum or plain minimum.

    An empty sum is its bias, an empty minimum is top. A sum absorbs any
    child at top; a finite sum that reaches top saturates there.
    """
    if kind == SUM:
        acc = bias
        if acc >= top:
            return top
        for c in values:
            if c >= top:
                return top
            acc += c
        return top if acc >= top else acc
    best = top
    for c in values:
        if c < best:
            best = c
    return best


def validate_dag(dag: FilterDag) -> None:
    """Check every structural rule; raise DagError on the first violation.

    Also caches the topological order and the parent index used by the
    query and projection functions.
    """
    if dag.root is None or not 0 <= dag.root < len(dag.nodes):
        raise DagError("no root set")
    for i, node in enumerate(dag.nodes):
        if node.id != i:
            raise DagError(f"node id {node.id} stored at index {i}")
        if node.kind == LEAF:
            if len(node.scope) != 1:
                raise DagError(f"non-unary leaf {node.id}: scope {node.scope}")
            if node.children:
                raise DagError(f"leaf {node.id} has children")
            if not node.table and node.default is None:
                raise DagError(f"leaf {node.id} has an empty table")
            if node.bias:
                raise DagError(f"leaf {node.id} carries a bias")
        elif node.kind in (SUM, MIN):
            union: set[int] = set()
            width = 0
            for c in node.children:
                if not 0 <= c < len(dag.nodes):
                    raise DagError(f"node {node.id} references unknown child {c}")
                cs = dag.nodes[c].scope
                union.update(cs)
                width += len(cs)
            if tuple(sorted(union)) != node.scope:
                raise DagError(f"scope composition violated at node {node.id}")
            if node.kind == SUM and width != len(union):
                raise DagError(
                    f"sum node {node.id} has children with overlapping scopes")
            if node.kind == MIN:
                for c in node.children:
                    if dag.nodes[c].scope != node.scope:
                        raise DagError(
                            f"min node {node.id} has a child whose scope differs")
                if node.bias:
                    raise DagError(f"min node {node.id} carries a bias")
            if node.bias < 0:
                raise DagError(f"node {node.id} has a negative bias")
        else:
            raise DagError(f"unknown node kind {node.kind!r}")
    order, parents = _topo_from_root(dag)
    if len(order) != len(dag.nodes):
        raise DagError("disconnected: some nodes are unreachable from the root")
    dag.topo = order
    dag.parents = parents


def _topo_from_root(dag: FilterDag):
    """Iterative DFS from the root: cycle check, parent index, topo order."""
    color = [0] * len(dag.nodes)  # 0 unseen, 1 on stack, 2 done
    parents: list[list[int]] = [[] for _ in dag.nodes]
    post: list[int] = []
    stack = [(dag.root, iter(dag.nodes[dag.root].children))]
    color[dag.root] = 1
    while stack:
        nid, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            color[nid] = 2
            post.append(nid)
            continue
        parents[child].append(nid)
        if color[child] == 1:
            raise DagError("cycle detected: not a DAG")
        if color[child] == 0:
            color[child] = 1
            stack.append((child, iter(dag.nodes[child].children)))
    post.reverse()
    return post, parents


def _ensure_topo(dag: FilterDag) -> None:
    if dag.topo is None or dag.parents is None:
        validate_dag(dag)


def dag_minimum(dag: FilterDag, domains) -> int:
    """Minimum of the encoded function over the given domains.

    ``domains`` maps every variable in the root scope to its current value
    list. Fills ``min_table`` bottom-up: leaves take the minimum of their
    table over the variable's domain, internal nodes aggregate children.
    """
    _ensure_topo(dag)
    top = dag.top
    memo = [0] * len(dag.nodes)
    for nid in reversed(dag.topo):
        node = dag.nodes[nid]
        if node.kind == LEAF:
            table = node.table
            base = top if node.default is None else node.default
            best = top
            for v in domains[node.scope[0]]:
                c = table.get(v, base)
                if c < best:
                    best = c
            memo[nid] = best
        else:
            memo[nid] = _combine(node.kind, (memo[c] for c in node.children), top,
                                 node.bias)
    dag.min_table = memo
    return memo[dag.root]


def build_min_plus(dag: FilterDag, domains, stamp=None) -> None:
    """Precompute minima conditioned on x=v for every variable and value.

    After this, :func:`min_given` answers in constant time. ``stamp`` is an
    opaque revision token; :func:`min_given` refuses to answer if queried
    with a different one, which catches domains changing under the table.
    """
    dag_minimum(dag, domains)
    _build_min_plus_tables(dag, domains)
    dag.built_stamp = stamp


def _build_min_plus_tables(dag: FilterDag, domains) -> None:
    top = dag.top
    memo = dag.min_table
    scope = dag.nodes[dag.root].scope
    dag.built_domains = {x: tuple(domains[x]) for x in scope}
    mp: dict[tuple[int, int, int], int] = {}
    nodes = dag.nodes
    order = list(reversed(dag.topo))
    for x in scope:
        has_x = [x in n.scope for n in nodes]
        for v in dag.built_domains[x]:
            for nid in order:
                if not has_x[nid]:
                    continue
                node = nodes[nid]
                if node.kind == LEAF:
                    base = top if node.default is None else node.default
                    c = node.table.get(v, base)
                    mp[(nid, x, v)] = top if c >= top else c
                else:
                    vals = (mp[(ch, x, v)] if has_x[ch] else memo[ch]
                            for ch in node.children)
                    mp[(nid, x, v)] = _combine(node.kind, vals, top, node.bias)
    dag.min_plus = mp


def min_given(dag: FilterDag, x: int, v: int, stamp=None) -> int:
    """Constant-time minimum of the encoded function restricted to x=v.

    A value absent from the domains used at build time (pruned) yields top.
    """
    if dag.min_plus is None:
        raise StaleTableError("build_min_plus has not been run")
    if stamp is not None and stamp != dag.built_stamp:
        raise StaleTableError("domains changed since the last build")
    if x not in dag.nodes[dag.root].scope:
        raise DagError(f"variable {x} is not in the root scope")
    return dag.min_plus.get((dag.root, x, v), dag.top)


def project_on_dag(dag: FilterDag, x: int, v: int, alpha: int) -> None:
    """Shift cost out of (alpha > 0) or into (alpha < 0) the function at x=v.

    Every leaf over x takes the full shift at entry v, so the cost of any
    tuple through x=v changes by exactly -alpha while the DAG shape stays
    fixed. Requires built tables; min_table and min_plus are repaired
    incrementally along the ancestors of the edited leaves.
    """
    if dag.min_table is None or dag.min_plus is None:
        raise DagError("project_on_dag requires build_min_plus first")
    if alpha == 0:
        return
    if alpha > 0 and alpha > dag.min_plus.get((dag.root, x, v), dag.top):
        raise PreconditionError(
            f"cannot project {alpha} at ({x},{v}): exceeds conditioned minimum")
    top = dag.top
    edited = []
    for node in dag.nodes:
        if node.kind == LEAF and node.scope[0] == x:
            base = top if node.default is None else node.default
            old = node.table.get(v, base)
            if old < top:
                new = old - alpha
                node.table[v] = top if new >= top else new
                edited.append(node.id)
    if not edited:
        return
    _repair_tables(dag, edited)


def _repair_tables(dag: FilterDag, edited: list[int]) -> None:
    affected = set(edited)
    stack = list(edited)
    while stack:
        for p in dag.parents[stack.pop()]:
            if p not in affected:
                affected.add(p)
                stack.append(p)
    top = dag.top
    doms = dag.built_domains
    memo = dag.min_table
    mp = dag.min_plus
    nodes = dag.nodes
    for nid in reversed(dag.topo):
        if nid not in affected:
            continue
        node = nodes[nid]
        if node.kind == LEAF:
            var = node.scope[0]
            table = node.table
            base = top if node.default is None else node.default
            best = top
            for w in doms[var]:
                c = table.get(w, base)
                if c < best:
                    best = c
            memo[nid] = best
            for w in doms[var]:
                c = table.get(w, base)
                mp[(nid, var, w)] = top if c >= top else c
        else:
            memo[nid] = _combine(node.kind, (memo[ch] for ch in node.children), top,
                                 node.bias)
            for y in node.scope:
                for w in doms[y]:
                    vals = (mp[(ch, y, w)] if y in nodes[ch].scope else memo[ch]
                            for ch in node.children)
                    mp[(nid, y, w)] = _combine(node.kind, vals, top, node.bias)


def dump_dag(dag: FilterDag) -> str:
    """Deterministic one-line-per-node text form, for golden tests."""
    lines = []
    for node in dag.nodes:
        scope = ",".join(str(s) for s in node.scope)
        kids = ",".join(str(c) for c in node.children)
        line = f"{node.id} {node.kind} scope=({scope}) children=[{kids}]"
        if node.default is not None:
            line += f" default={node.default}"
        if node.bias:
            line += f" bias={node.bias}"
        lines.append(line)
    lines.append(f"root={dag.root}")
    return "\n".join(lines)
