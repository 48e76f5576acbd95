"""Soft counting function: distance from a value count to an interval.

The cost of a tuple is how far the number of positions taking a counted
value falls outside [lb, ub]: max(0, lb - t, t - ub) for count t. That
distance equals the number of single-position substitutions needed to pull
the count back into the interval, which is what the ladder-shaped filtering
DAG and the dedicated minimizer below both compute.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core import check_scope
from ..dag import FilterDag
from .base import GlobalCostFunction


@dataclass
class AmongSpec:
    """Scope, the counted value set, and inclusive count bounds.

    ``ub`` is clamped to the arity on construction; an empty interval
    (lb > ub after clamping) is rejected.
    """

    scope: tuple
    values: frozenset
    lb: int
    ub: int

    def __post_init__(self):
        self.scope = check_scope(self.scope)
        self.values = frozenset(self.values)
        n = len(self.scope)
        if self.ub > n:
            self.ub = n
        if self.lb < 0:
            raise ValueError("lb must be >= 0")
        if self.lb > self.ub:
            raise ValueError(f"empty count interval: lb={self.lb} > ub={self.ub}")

    @property
    def arity(self) -> int:
        return len(self.scope)


def among_cost(spec: AmongSpec, ell) -> int:
    """Cost of a scope-aligned tuple."""
    if len(ell) != spec.arity:
        raise ValueError("tuple length does not match the scope")
    t = sum(1 for v in ell if v in spec.values)
    return max(0, spec.lb - t, t - spec.ub)


def among_min(spec: AmongSpec, domains, top: int | None = None) -> int:
    """Minimum cost over per-position domains, by dynamic programming.

    ``domains`` is a sequence of value collections aligned with the scope.
    f[i][j] is the cheapest way for the first i positions to settle on a
    counted-position total of j, paying one per position that would need a
    substitution; missing count is prepaid in the base row.
    """
    n = spec.arity
    if len(domains) != n:
        raise ValueError("need one domain per scope position")
    if top is None:
        top = n + max(spec.lb, 1) + 1
    counted = spec.values
    prev = list(range(spec.ub + 1))  # f[0][j] = j
    for dom in domains:
        dom = list(dom)
        if not dom:
            return top
        u = 0 if any(v in counted for v in dom) else 1
        ubar = 0 if any(v not in counted for v in dom) else 1
        cur = [min(prev[0] + ubar, top)]
        for j in range(1, spec.ub + 1):
            cur.append(min(prev[j - 1] + u, prev[j] + ubar, top))
        prev = cur
    return min(min(prev[spec.lb:]), top)


def among_build_dag(spec: AmongSpec, top: int | None = None) -> FilterDag:
    """Ladder-shaped filtering DAG for the counting function.

    One rail per count target j in 0..ub. Position 1 folds the prepaid
    base row into its leaves; later positions reuse one pair of leaves
    (cost to count / not to count) shared across rails. Node count is
    O(arity * ub).
    """
    n = spec.arity
    if top is None:
        top = n + max(spec.lb, 1) + 1
    counted = spec.values
    dag = FilterDag(top)

    def lo(i):  # lowest rail that can still climb to lb with n - i positions left
        return max(0, spec.lb - (n - i))

    # position 1 folds the prepaid base row into its leaves:
    # leaf_j(v) = min over (count it / don't) of base[j'] + substitution cost
    rail = {}
    x0 = spec.scope[0]
    for j in range(lo(1), spec.ub + 1):
        if j == 0:
            rail[0] = dag.add_leaf(x0, {v: 1 for v in counted}, default=0)
        else:
            rail[j] = dag.add_leaf(x0, {v: j - 1 for v in counted}, default=j)
    for i in range(2, n + 1):
        x = spec.scope[i - 1]
        ubar = dag.add_leaf(x, {v: 1 for v in counted}, default=0)
        u = (dag.add_leaf(x, {v: 0 for v in counted}, default=1)
             if spec.ub >= 1 else None)
        nxt = {}
        for j in range(lo(i), spec.ub + 1):
            if j == 0:
                nxt[0] = dag.add_sum([rail[0], ubar])
            else:
                nxt[j] = dag.add_min([dag.add_sum([rail[j - 1], u]),
                                      dag.add_sum([rail[j], ubar])])
        rail = nxt
    if spec.lb == spec.ub:
        dag.set_root(rail[spec.lb])
    else:
        dag.set_root(dag.add_min([rail[j] for j in range(spec.lb, spec.ub + 1)]))
    return dag


class AmongFunction(GlobalCostFunction):
    kind = "among"

    def __init__(self, spec: AmongSpec, top: int, name: str | None = None):
        super().__init__(spec.scope, top, name)
        self.spec = spec

    def base_cost(self, values) -> int:
        return among_cost(self.spec, values)

    def build_dag(self) -> FilterDag:
        return among_build_dag(self.spec, top=self.top)


def among_to_automaton(spec: AmongSpec, alphabet):
    """Counting automaton whose soft form coincides with the counting cost.

    States are counts 0..n; counted symbols step the count up, others keep
    it; counts lb..ub accept. The match holds only when the alphabet has a
    symbol outside the counted set: with nothing to substitute toward, an
    overshoot past ub cannot be repaired inside the language.
    """
    from .regular import Automaton

    n = spec.arity
    alphabet = tuple(alphabet)
    transitions = set()
    for q in range(n):
        for s in alphabet:
            transitions.add((q, s, q + 1) if s in spec.values else (q, s, q))
    # the final layer still needs self-loops for uncounted symbols
    for s in alphabet:
        if s not in spec.values:
            transitions.add((n, s, n))
    return Automaton(tuple(range(n + 1)), alphabet, frozenset(transitions),
                     0, frozenset(range(spec.lb, spec.ub + 1)))
