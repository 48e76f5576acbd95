"""Soft context-free function: substitution distance to a language.

The grammar must be in the strict normal form (every rule rewrites to one
terminal or to two non-start nonterminals), so a weighted parsing pass over
spans gives the least number of positions to change for the tuple to parse
from the start symbol.

Filtering state is a set of dynamic-programming tables rather than an
explicit DAG: per-position leaf costs (shiftable, signed), inside costs per
(span, nonterminal), and a top-down pass marking which span slots a
tolerable parse can reach together with the best cost completing each. A
conditioned minimum then reads off one marked base slot plus one leaf.
An explicit DAG over the same recursion is also provided for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dag import FilterDag
from ..ept import PreconditionError
from .base import GlobalCostFunction
from .regular import _all_top_dag


class CnfGrammar:
    """Context-free grammar in strict normal form.

    ``rules`` is an iterable of (A, a) terminal rules and (A, B, C) binary
    rules; B and C may not be the start symbol. Terminals and nonterminals
    must be disjoint.
    """

    def __init__(self, nonterminals, terminals, start, rules):
        self.nonterminals = tuple(nonterminals)
        self.terminals = tuple(terminals)
        self.start = start
        nts = set(self.nonterminals)
        ts = set(self.terminals)
        if len(nts) != len(self.nonterminals) or len(ts) != len(self.terminals):
            raise ValueError("duplicate symbols")
        if nts & ts:
            raise ValueError("nonterminals and terminals overlap")
        if start not in nts:
            raise ValueError(f"unknown start symbol {start!r}")
        self.term_rules = {A: [] for A in self.nonterminals}
        self.bin_rules = {A: [] for A in self.nonterminals}
        for rule in rules:
            rule = tuple(rule)
            if len(rule) == 2 and rule[0] in nts and rule[1] in ts:
                A, a = rule
                if a not in self.term_rules[A]:
                    self.term_rules[A].append(a)
            elif len(rule) == 3 and all(s in nts for s in rule):
                A, B, C = rule
                if start in (B, C):
                    raise ValueError(
                        "start symbol may not appear on a right-hand side")
                if (B, C) not in self.bin_rules[A]:
                    self.bin_rules[A].append((B, C))
            else:
                raise ValueError(f"rule {rule!r} is not in the normal form")

    @property
    def rules(self) -> list:
        out = []
        for A in self.nonterminals:
            out.extend((A, a) for a in self.term_rules[A])
            out.extend((A, B, C) for B, C in self.bin_rules[A])
        return out

    def __repr__(self):
        return (f"CnfGrammar(|N|={len(self.nonterminals)}, "
                f"|T|={len(self.terminals)}, |P|={len(self.rules)})")


def _default_top(n: int, sub_cost: int = 1) -> int:
    return n * sub_cost + 2


def _sadd(a: int, b: int, top: int) -> int:
    """Signed saturating add: top absorbs, finite sums clamp at top."""
    if a >= top or b >= top:
        return top
    c = a + b
    return top if c >= top else c


def _base_row(g: CnfGrammar, u_i: dict, f: dict, i: int, top: int) -> None:
    """Fill the length-1 inside costs at position i from its leaf row."""
    for A in g.nonterminals:
        best = top
        for a in g.term_rules[A]:
            c = u_i.get(a, top)
            if c < best:
                best = c
        f[(i, i, A)] = best


def _span_row(g: CnfGrammar, f: dict, i: int, j: int, top: int) -> None:
    """Fill the inside costs of span [i, j] from shorter spans."""
    for A in g.nonterminals:
        best = top
        for B, C in g.bin_rules[A]:
            for k in range(i, j):
                fb = f[(i, k, B)]
                if fb >= top:
                    continue
                fc = f[(k + 1, j, C)]
                if fc >= top:
                    continue
                c = _sadd(fb, fc, top)
                if c < best:
                    best = c
        f[(i, j, A)] = best


def _inside(g: CnfGrammar, u: list, top: int) -> dict:
    n = len(u)
    f: dict = {}
    for i in range(n):
        _base_row(g, u[i], f, i, top)
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            _span_row(g, f, i, i + span - 1, top)
    return f


def _outside(g: CnfGrammar, f: dict, n: int, top: int):
    """Top-down pass over the marked slots of tolerable parses.

    F[(i, j, A)] holds the total minus the best cost of everything outside
    the slot, maximized over the contexts reaching it; a slot is marked
    only from parents whose sibling span is derivable, so every marked
    base slot really completes to a full parse.
    """
    F: dict = {}
    marked: set = set()
    total = f.get((0, n - 1, g.start), top)
    if total >= top:
        return F, marked
    root = (0, n - 1, g.start)
    F[root] = total
    marked.add(root)
    for span in range(n, 1, -1):
        for i in range(n - span + 1):
            j = i + span - 1
            for A in g.nonterminals:
                key = (i, j, A)
                if key not in marked:
                    continue
                Fa = F[key]
                for B, C in g.bin_rules[A]:
                    for k in range(i, j):
                        fb = f[(i, k, B)]
                        fc = f[(k + 1, j, C)]
                        if fc < top:
                            kb = (i, k, B)
                            cand = Fa - fc
                            if kb not in marked or cand > F[kb]:
                                F[kb] = cand
                            marked.add(kb)
                        if fb < top:
                            kc = (k + 1, j, C)
                            cand = Fa - fb
                            if kc not in marked or cand > F[kc]:
                                F[kc] = cand
                            marked.add(kc)
    return F, marked


@dataclass
class GrammarTables:
    """Filtering tables over current domains: leaf minima u, inside costs
    f, and the top-down completion tables F/marked."""

    g: CnfGrammar
    top: int
    n: int
    u: list
    f: dict
    F: dict
    marked: set

    @property
    def total(self) -> int:
        return self.f.get((0, self.n - 1, self.g.start), self.top)

    def cond_min(self, pos: int, v, leaf_cost=None) -> int:
        """Minimum cost of tuples with position ``pos`` at value ``v``.

        ``leaf_cost(a)`` gives the shifted leaf cost of reading terminal a
        at (pos, v); the default is the pristine mismatch indicator.
        """
        total = self.total
        if total >= self.top:
            return self.top
        best = self.top
        for A in self.g.nonterminals:
            key = (pos, pos, A)
            if key not in self.marked:
                continue
            out = total - self.F[key]
            for a in self.g.term_rules[A]:
                c = leaf_cost(a) if leaf_cost is not None else (0 if v == a else 1)
                if c >= self.top:
                    continue
                cand = out + c
                if cand < best:
                    best = cand
        return min(best, self.top)


def grammar_cost(g: CnfGrammar, ell, top: int | None = None,
                 sub_cost: int = 1) -> int:
    """Substitution distance from a tuple to the grammar's language.

    ``sub_cost`` prices one substitution; passing the network's top turns
    the function into a hard membership constraint (any edit saturates).
    """
    ell = tuple(ell)
    n = len(ell)
    if top is None:
        top = _default_top(n, sub_cost)
    u = [{c: (0 if ell[i] == c else sub_cost) for c in g.terminals}
         for i in range(n)]
    f = _inside(g, u, top)
    return f.get((0, n - 1, g.start), top)


def _leaf_rows(g: CnfGrammar, domains, top: int, sub_cost: int = 1) -> list:
    rows = []
    for dom in domains:
        dom = list(dom)
        if dom:
            rows.append({c: (0 if c in dom else sub_cost)
                         for c in g.terminals})
        else:
            rows.append({c: top for c in g.terminals})
    return rows


def grammar_min(g: CnfGrammar, domains, top: int | None = None,
                sub_cost: int = 1) -> int:
    """Minimum substitution distance over per-position domains."""
    n = len(domains)
    if top is None:
        top = _default_top(n, sub_cost)
    f = _inside(g, _leaf_rows(g, domains, top, sub_cost), top)
    return min(f.get((0, n - 1, g.start), top), top)


def grammar_precompute(g: CnfGrammar, domains, top: int | None = None,
                       sub_cost: int = 1) -> GrammarTables:
    """Full filtering tables (inside + top-down) over the given domains."""
    n = len(domains)
    if top is None:
        top = _default_top(n, sub_cost)
    u = _leaf_rows(g, domains, top, sub_cost)
    f = _inside(g, u, top)
    F, marked = _outside(g, f, n, top)
    return GrammarTables(g, top, n, u, f, F, marked)


class GrammarFunction(GlobalCostFunction):
    kind = "grammar"

    def __init__(self, g: CnfGrammar, scope, top: int, name: str | None = None,
                 sub_cost: int = 1):
        super().__init__(scope, top, name)
        self.g = g
        self.sub_cost = sub_cost
        # (pos, terminal) -> {value: signed leaf cost}, materialized at bind
        self.U: dict | None = None
        self.tables: GrammarTables | None = None
        self._stamp = None

    # -- backend plumbing (tables instead of a DAG) ---------------------

    def _init_backend(self) -> None:
        if self.U is None:
            self.U = {}
            for pos, x in enumerate(self.scope):
                vals = list(self.cfn.vars[x].domain)
                for c in self.g.terminals:
                    self.U[(pos, c)] = {v: (0 if v == c else self.sub_cost)
                                        for v in vals}

    def base_cost(self, values) -> int:
        return grammar_cost(self.g, values, top=self.top,
                            sub_cost=self.sub_cost)

    def _fresh(self) -> None:
        if self.cfn is None:
            raise RuntimeError(f"{type(self).__name__} used before add_function")
        if self.tables is None or self._stamp != self.cfn.domain_rev:
            self._recompute()
            self._stamp = self.cfn.domain_rev

    def _domains(self) -> list:
        return [self.cfn.vars[x].domain for x in self.scope]

    def _u_row(self, pos: int, dom) -> dict:
        row = {}
        for c in self.g.terminals:
            tbl = self.U[(pos, c)]
            row[c] = min((tbl[v] for v in dom), default=self.top)
        return row

    def _recompute(self) -> None:
        doms = self._domains()
        n = len(doms)
        u = [self._u_row(pos, dom) for pos, dom in enumerate(doms)]
        f = _inside(self.g, u, self.top)
        F, marked = _outside(self.g, f, n, self.top)
        self.tables = GrammarTables(self.g, self.top, n, u, f, F, marked)

    def _refresh_position(self, pos: int) -> None:
        """Recompute every span through ``pos`` plus the top-down tables."""
        t = self.tables
        t.u[pos] = self._u_row(pos, self._domains()[pos])
        _base_row(self.g, t.u[pos], t.f, pos, self.top)
        for span in range(2, t.n + 1):
            lo = max(0, pos - span + 1)
            hi = min(pos, t.n - span)
            for i in range(lo, hi + 1):
                _span_row(self.g, t.f, i, i + span - 1, self.top)
        t.F, t.marked = _outside(self.g, t.f, t.n, self.top)

    def min_current(self) -> int:
        self._fresh()
        return min(self.tables.total, self.top)

    def cond_min(self, x: int, v) -> int:
        self._fresh()
        pos = self.scope_pos(x)
        tables = {c: self.U[(pos, c)] for c in self.g.terminals}
        return self.tables.cond_min(
            pos, v, leaf_cost=lambda a: tables[a].get(v, self.top))

    def apply_ept(self, x: int, v, alpha: int, trail=None) -> None:
        grammar_project(self, x, v, alpha, trail=trail)
        self.deltas.shift(self.scope_pos(x), v, alpha, trail)

    def _copy_extra(self, other) -> None:
        if self.U is not None:
            other.U = {k: dict(tbl) for k, tbl in self.U.items()}
        other.tables = None
        other._stamp = None


def grammar_project(gfn: GrammarFunction, x: int, v, alpha: int,
                    trail=None) -> None:
    """Shift cost out of (alpha > 0) or into the function at x = v.

    Every terminal's leaf entry at (x, v) takes the full shift, so the
    cost of any tuple through x = v changes by exactly -alpha. Tables are
    repaired by recomputing the spans through the position.
    """
    gfn._fresh()
    pos = gfn.scope_pos(x)
    if alpha > 0 and alpha > gfn.cond_min(x, v):
        raise PreconditionError(
            f"cannot project {alpha} at ({x},{v}): exceeds conditioned minimum")
    if alpha == 0:
        return
    top = gfn.top
    if trail is not None:
        snap = {c: gfn.U[(pos, c)].get(v) for c in gfn.g.terminals}

        def undo(gfn=gfn, pos=pos, v=v, snap=snap):
            for c, old in snap.items():
                if old is None:
                    gfn.U[(pos, c)].pop(v, None)
                else:
                    gfn.U[(pos, c)][v] = old
            gfn.tables = None  # recomputed from U on next query
            gfn._stamp = None

        trail.append(undo)
    for c in gfn.g.terminals:
        tbl = gfn.U[(pos, c)]
        old = tbl.get(v)
        if old is None:
            old = 0 if v == c else 1
        if old >= top:
            continue  # intolerable entries absorb shifts
        new = old - alpha
        tbl[v] = top if new >= top else new
    gfn._refresh_position(pos)


def grammar_build_dag(g: CnfGrammar, scope, top: int | None = None,
                      sub_cost: int = 1) -> FilterDag:
    """Explicit filtering DAG over the parsing recursion, for cross-checks.

    One node per derivable (span, nonterminal): length-1 spans minimize
    over the position's terminal-rule leaves (shared between nonterminals),
    longer spans minimize sums of child spans over rules and split points.
    Underivable slots are pruned; an unproducible language degenerates to
    a constant-top fallback.
    """
    scope = tuple(scope)
    n = len(scope)
    if top is None:
        top = _default_top(n, sub_cost)

    # which (span, nonterminal) slots have a derivation at all
    derivable: set = set()
    for i in range(n):
        for A in g.nonterminals:
            if g.term_rules[A]:
                derivable.add((i, i, A))
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span - 1
            for A in g.nonterminals:
                if any((i, k, B) in derivable and (k + 1, j, C) in derivable
                       for B, C in g.bin_rules[A] for k in range(i, j)):
                    derivable.add((i, j, A))
    root_key = (0, n - 1, g.start)
    if root_key not in derivable:
        return _all_top_dag(scope, top)

    # which of those the root's recursion actually touches
    reachable = {root_key}
    stack = [root_key]
    while stack:
        i, j, A = stack.pop()
        for B, C in g.bin_rules[A]:
            for k in range(i, j):
                kb, kc = (i, k, B), (k + 1, j, C)
                if kb in derivable and kc in derivable:
                    for key in (kb, kc):
                        if key not in reachable:
                            reachable.add(key)
                            stack.append(key)

    dag = FilterDag(top)
    leaf: dict = {}
    node: dict = {}
    for i in range(n):
        for A in g.nonterminals:
            if (i, i, A) not in reachable:
                continue
            kids = []
            for a in g.term_rules[A]:
                if (i, a) not in leaf:
                    leaf[(i, a)] = dag.add_leaf(scope[i], {a: 0},
                                                default=sub_cost)
                kids.append(leaf[(i, a)])
            node[(i, i, A)] = kids[0] if len(kids) == 1 else dag.add_min(kids)
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span - 1
            for A in g.nonterminals:
                if (i, j, A) not in reachable:
                    continue
                kids = []
                for B, C in g.bin_rules[A]:
                    for k in range(i, j):
                        left = node.get((i, k, B))
                        right = node.get((k + 1, j, C))
                        if left is None or right is None:
                            continue
                        kids.append(dag.add_sum([left, right]))
                node[(i, j, A)] = (kids[0] if len(kids) == 1
                                   else dag.add_min(kids))
    dag.set_root(node[root_key])
    return dag
