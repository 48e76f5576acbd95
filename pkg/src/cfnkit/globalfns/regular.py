"""Soft regular function: Hamming distance from a tuple to a language.

The cost of a tuple is the least number of positions that must change for
the automaton to accept it (top if the language has no word of that
length). Nondeterministic automata are fine. An optional weighted overlay
(start, transition and final costs) supports network decompositions and
generalizes the 0/top reading of the plain structure.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dag import FilterDag
from .base import GlobalCostFunction


@dataclass
class Automaton:
    """Finite automaton over hashable symbols, transitions as (q, s, q').

    ``lam``/``sigma``/``rho`` optionally attach start/transition/final
    costs; absent entries mean top. When all three are None the automaton
    is the plain 0/top structure (start q0, accept in finals).
    """

    states: tuple
    alphabet: tuple
    transitions: frozenset
    q0: object
    finals: frozenset
    lam: dict | None = None
    sigma: dict | None = None
    rho: dict | None = None

    def __post_init__(self):
        self.states = tuple(self.states)
        self.alphabet = tuple(self.alphabet)
        self.transitions = frozenset(tuple(t) for t in self.transitions)
        self.finals = frozenset(self.finals)
        states = set(self.states)
        symbols = set(self.alphabet)
        if self.q0 not in states:
            raise ValueError(f"unknown start state {self.q0!r}")
        if not self.finals <= states:
            raise ValueError("final states must be states")
        for q, s, q2 in self.transitions:
            if q not in states or q2 not in states:
                raise ValueError(f"transition {(q, s, q2)} references unknown state")
            if s not in symbols:
                raise ValueError(f"transition {(q, s, q2)} references unknown symbol")
        if self.sigma is not None:
            for q, s, q2 in self.sigma:
                if q not in states or q2 not in states or s not in symbols:
                    raise ValueError(f"weighted transition {(q, s, q2)} is malformed")


def _default_top(n: int) -> int:
    return n + 2


def regular_cost(aut: Automaton, ell, top: int | None = None) -> int:
    """Hamming distance from the tuple to the closest accepted word."""
    ell = tuple(ell)
    if top is None:
        top = _default_top(len(ell))
    cur = {aut.q0: 0}
    for x in ell:
        nxt: dict = {}
        for q, s, q2 in aut.transitions:
            c = cur.get(q)
            if c is None:
                continue
            step = c + (0 if s == x else 1)
            if step < nxt.get(q2, top):
                nxt[q2] = step
        cur = nxt
    best = min((c for q, c in cur.items() if q in aut.finals), default=top)
    return min(best, top)


def regular_min(aut: Automaton, domains, top: int | None = None) -> int:
    """Minimum Hamming distance over per-position domains."""
    domains = [set(d) for d in domains]
    if top is None:
        top = _default_top(len(domains))
    cur = {aut.q0: 0}
    for dom in domains:
        if not dom:
            return top
        nxt: dict = {}
        for q, s, q2 in aut.transitions:
            c = cur.get(q)
            if c is None:
                continue
            step = c + (0 if s in dom else 1)
            if step < nxt.get(q2, top):
                nxt[q2] = step
        cur = nxt
    best = min((c for q, c in cur.items() if q in aut.finals), default=top)
    return min(best, top)


def weighted_regular_cost(aut: Automaton, ell, top: int | None = None) -> int:
    """Best accepting path cost under the weighted overlay.

    Uses lam/sigma/rho when present, else their 0/top readings. Only
    transitions carrying the tuple's exact symbols apply; mismatch costs
    must be encoded as explicit weighted transitions (see
    :func:`hamming_weighted`).
    """
    ell = tuple(ell)
    lam, sigma, rho = _overlay(aut)
    if top is None:
        top = (max(lam.values(), default=0) + max(rho.values(), default=0)
               + len(ell) * max(sigma.values(), default=0) + 1)
    cur = {q: c for q, c in lam.items() if c < top}
    for x in ell:
        nxt: dict = {}
        for (q, s, q2), w in sigma.items():
            if s != x or w >= top:
                continue
            c = cur.get(q)
            if c is None:
                continue
            step = c + w
            if step < nxt.get(q2, top):
                nxt[q2] = min(step, top)
        cur = nxt
    best = min((c + rho[q] for q, c in cur.items() if rho.get(q, top) < top),
               default=top)
    return min(best, top)


def _overlay(aut: Automaton):
    lam = aut.lam if aut.lam is not None else {aut.q0: 0}
    sigma = aut.sigma if aut.sigma is not None else {t: 0 for t in aut.transitions}
    rho = aut.rho if aut.rho is not None else {q: 0 for q in aut.finals}
    return lam, sigma, rho


def hamming_weighted(aut: Automaton) -> Automaton:
    """Weighted overlay equivalent to the Hamming reading of ``aut``.

    Every structural transition keeps cost 0 and gains cost-1 siblings for
    each other alphabet symbol (a substitution). Evaluating the result with
    :func:`weighted_regular_cost` matches :func:`regular_cost` on tuples
    over the alphabet.
    """
    sigma: dict = {}
    for q, s, q2 in aut.transitions:
        sigma[(q, s, q2)] = 0
    for q, s, q2 in aut.transitions:
        for s2 in aut.alphabet:
            if s2 != s:
                sigma.setdefault((q, s2, q2), 1)
    return Automaton(aut.states, aut.alphabet, frozenset(sigma), aut.q0,
                     aut.finals, lam={aut.q0: 0}, sigma=sigma,
                     rho={q: 0 for q in aut.finals})


def _layers(aut: Automaton, n: int):
    """Forward-reachable / co-reachable state sets per position."""
    fwd = [set() for _ in range(n + 1)]
    fwd[0].add(aut.q0)
    step: dict = {}
    back_step: dict = {}
    for q, s, q2 in aut.transitions:
        step.setdefault(q, set()).add(q2)
        back_step.setdefault(q2, set()).add(q)
    for i in range(n):
        for q in fwd[i]:
            fwd[i + 1] |= step.get(q, set())
    bwd = [set() for _ in range(n + 1)]
    bwd[n] = set(aut.finals)
    for i in range(n, 0, -1):
        for q2 in bwd[i]:
            bwd[i - 1] |= back_step.get(q2, set())
    return [fwd[i] & bwd[i] for i in range(n + 1)]


def _all_top_dag(scope, top: int) -> FilterDag:
    """Fallback for functions with no tolerable tuple: constant top.

    A sum of per-variable all-top leaves; top absorbs any later shift, so
    the fallback stays valid for the function's whole life.
    """
    dag = FilterDag(top)
    dag.set_root(dag.add_sum([dag.add_leaf(x, {}, default=top) for x in scope]))
    return dag


def regular_build_dag(aut: Automaton, scope, top: int | None = None) -> FilterDag:
    """Layered filtering DAG for the Hamming distance to the language.

    One node per useful (position, state) pair; the leaf under an edge
    group charges 0 on symbols some transition into that state reads and 1
    elsewhere (a substitution). Transitions from the same predecessor into
    the same state share one leaf. If no word of the right length exists
    the DAG degenerates to a constant-top fallback.
    """
    scope = tuple(scope)
    n = len(scope)
    if top is None:
        top = _default_top(n)
    keep = _layers(aut, n)
    if any(not layer for layer in keep):
        return _all_top_dag(scope, top)
    dag = FilterDag(top)
    edges = sorted(aut.transitions, key=repr)  # deterministic layout
    # incoming[q2][q] = set of symbols read from q into q2
    node: dict = {}
    for i in range(1, n + 1):
        x = scope[i - 1]
        incoming: dict = {}
        for q, s, q2 in edges:
            if q in keep[i - 1] and q2 in keep[i]:
                incoming.setdefault(q2, {}).setdefault(q, set()).add(s)
        for q2 in sorted(keep[i], key=repr):
            branches = []
            for q, syms in incoming.get(q2, {}).items():
                leaf = dag.add_leaf(x, {s: 0 for s in syms}, default=1)
                if i == 1:
                    branches.append(leaf)
                else:
                    branches.append(dag.add_sum([node[(i - 1, q)], leaf]))
            if not branches:
                continue
            node[(i, q2)] = (branches[0] if len(branches) == 1
                             else dag.add_min(branches))
    finals = [node[(n, q)] for q in sorted(aut.finals, key=repr) if (n, q) in node]
    if not finals:
        return _all_top_dag(scope, top)
    dag.set_root(finals[0] if len(finals) == 1 else dag.add_min(finals))
    return dag


class RegularFunction(GlobalCostFunction):
    kind = "regular"

    def __init__(self, aut: Automaton, scope, top: int, name: str | None = None):
        super().__init__(scope, top, name)
        self.aut = aut

    def base_cost(self, values) -> int:
        return regular_cost(self.aut, values, top=self.top)

    def build_dag(self) -> FilterDag:
        return regular_build_dag(self.aut, self.scope, top=self.top)
