"""Soft extremum functions: the cost of a tuple is the largest (or
smallest) weight among its variable-value picks.

Filtering works through a case split on which pick attains the extremum:
one branch per (variable, value) pair, charging that pair's weight plus
0/top indicators forcing every other variable at or below it (at or above,
for the min flavor). Indicator leaves are shared between branches with the
same threshold, and minimizing over the current domains only needs one
sweep over the pairs in weight order.
"""

from __future__ import annotations

from ..dag import FilterDag
from .base import GlobalCostFunction


class WeightMap:
    """A weight for every (variable, candidate value) pair.

    Must be total: every value a scope variable can take needs an entry.
    """

    def __init__(self, entries):
        self.w: dict = {}
        for (x, v), c in dict(entries).items():
            self.w[(x, v)] = c

    def value(self, x, v) -> int:
        return self.w[(x, v)]

    def vars(self) -> tuple:
        return tuple(sorted({x for x, _ in self.w}))

    def values_for(self, x) -> list:
        return sorted(v for y, v in self.w if y == x)

    def max_weight(self) -> int:
        return max(self.w.values(), default=0)

    def copy(self) -> "WeightMap":
        return WeightMap(self.w)


def wmax_cost(w: WeightMap, ell) -> int:
    """Largest weight picked by a tuple aligned with sorted(w.vars())."""
    xs = w.vars()
    if len(ell) != len(xs):
        raise ValueError("tuple length does not match the weight map")
    return max(w.value(x, v) for x, v in zip(xs, ell))


def wmin_cost(w: WeightMap, ell) -> int:
    """Smallest weight picked by a tuple aligned with sorted(w.vars())."""
    xs = w.vars()
    if len(ell) != len(xs):
        raise ValueError("tuple length does not match the weight map")
    return min(w.value(x, v) for x, v in zip(xs, ell))


def _sweep(w: WeightMap, domains, top, biggest: bool):
    """One pass over (weight, var, value) pairs in threshold order.

    Yields (x, v, alpha, cur, g) per step: the branch cost ``cur`` of
    designating (x, v) as the extremum pick, and the indicator state ``g``
    after absorbing the pair. The running minimum of ``cur`` is the
    function's minimum over the domains.
    """
    xs = sorted(domains)
    pairs = sorted(((w.value(x, v), x, v) for x in xs for v in domains[x]),
                   key=lambda p: (p[0] if biggest else -p[0], p[1], p[2]))
    g = {x: top for x in xs}
    for alpha, x, v in pairs:
        cur = alpha
        for y in xs:
            if y == x:
                continue
            if g[y] >= top:
                cur = top
                break
        g[x] = 0  # this pair satisfies its own threshold test
        yield x, v, alpha, min(cur, top), dict(g)


def wmax_min(w: WeightMap, domains, top: int | None = None) -> int:
    """Minimum of the soft max over per-variable domains (dict var -> values)."""
    if top is None:
        top = w.max_weight() + 1
    if any(not list(vs) for vs in domains.values()):
        return top
    return min((cur for _, _, _, cur, _ in _sweep(w, domains, top, True)),
               default=top)


def wmin_min(w: WeightMap, domains, top: int | None = None) -> int:
    """Minimum of the soft min over per-variable domains."""
    if top is None:
        top = w.max_weight() + 1
    if any(not list(vs) for vs in domains.values()):
        return top
    return min((cur for _, _, _, cur, _ in _sweep(w, domains, top, False)),
               default=top)


def wmax_sweep_table(w: WeightMap, domains, ell, top: int | None = None):
    """Trace of the minimizing sweep against a reference tuple.

    One row per (variable, value) pair in weight order:
    (x, v, alpha, designated-pick cost of ell, indicator state after the
    row). The pick cost is alpha when ell picks exactly (x, v), else top.
    """
    if top is None:
        top = w.max_weight() + 1
    xs = sorted(domains)
    ell = dict(zip(xs, ell))
    rows = []
    for x, v, alpha, _, g in _sweep(w, domains, top, True):
        h = alpha if ell[x] == v else top
        rows.append((x, v, alpha, h, g))
    return rows


def _build_extremum_dag(w: WeightMap, scope, top, biggest: bool) -> FilterDag:
    scope = tuple(scope)
    if set(scope) != set(w.vars()):
        raise ValueError("scope must match the weight map's variables")
    for x in scope:
        if not w.values_for(x):
            raise ValueError(f"variable {x} has no weighted values")
    dag = FilterDag(top)
    pairs = sorted(((w.value(x, v), x, v) for x in scope
                    for v in w.values_for(x)),
                   key=lambda p: (p[0] if biggest else -p[0], p[1], p[2]))
    passed = {x: [] for x in scope}  # values meeting the threshold so far
    gate = {}  # (var, alpha) -> shared indicator leaf
    branches = []
    i = 0
    while i < len(pairs):
        alpha = pairs[i][0]
        group = []
        while i < len(pairs) and pairs[i][0] == alpha:
            group.append(pairs[i])
            i += 1
        for _, x, v in group:  # thresholds are inclusive: admit ties first
            passed[x].append(v)
        for _, x, v in group:
            if any(not passed[y] for y in scope if y != x):
                continue  # some indicator is all-top: branch can't win
            parts = [dag.add_leaf(x, {v: alpha})]
            for y in scope:
                if y == x:
                    continue
                key = (y, alpha)
                if key not in gate:
                    gate[key] = dag.add_leaf(y, {u: 0 for u in passed[y]})
                parts.append(gate[key])
            branches.append(parts[0] if len(parts) == 1 else dag.add_sum(parts))
    dag.set_root(branches[0] if len(branches) == 1 else dag.add_min(branches))
    return dag


def wmax_build_dag(w: WeightMap, scope, top: int | None = None) -> FilterDag:
    """Case-split filtering DAG for the soft max (see module docstring)."""
    if top is None:
        top = w.max_weight() + 1
    return _build_extremum_dag(w, scope, top, True)


def wmin_build_dag(w: WeightMap, scope, top: int | None = None) -> FilterDag:
    """Mirror construction for the soft min: indicators force weights up."""
    if top is None:
        top = w.max_weight() + 1
    return _build_extremum_dag(w, scope, top, False)


class WMaxFunction(GlobalCostFunction):
    kind = "wmax"

    def __init__(self, w: WeightMap, scope, top: int, name: str | None = None):
        super().__init__(scope, top, name)
        if tuple(scope) != w.vars():
            raise ValueError("scope must match the weight map's variables")
        self.w = w

    def base_cost(self, values) -> int:
        return wmax_cost(self.w, values)

    def build_dag(self) -> FilterDag:
        return wmax_build_dag(self.w, self.scope, top=self.top)


class WMinFunction(WMaxFunction):
    kind = "wmin"

    def base_cost(self, values) -> int:
        return wmin_cost(self.w, values)

    def build_dag(self) -> FilterDag:
        return wmin_build_dag(self.w, self.scope, top=self.top)
