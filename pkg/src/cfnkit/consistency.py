"""Soft local consistencies over a cost function network.

Three levels are implemented as cost-moving enforcement passes: star node
consistency (every unary table touches zero and no live value is already
intolerable together with W_0), star generalized arc consistency (every
live value additionally has a zero-cost tuple in every attached function),
and tree directional arc consistency (along a variable order, the earliest
variable of every scope holds a full support after all other unary costs
were pushed into the function).

All passes move cost only through equivalence preserving shifts, so the
total cost of every surviving assignment is untouched. Each returns a
ConsistencyReport; a wipeout stops the pass early and is flagged rather
than raised, with the shifts applied so far left in place.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from cfnkit.core import (
    DEFAULT_ENUM_CAP,
    Cfn,
    CostError,
    CostFunction,
    EnumerationCapExceeded,
    brute_force_cond_min,
    cost_add,
)
from cfnkit.ept import project


class WipeoutError(CostError):
    """A variable lost its last value during enforcement."""

    def __init__(self, x: int):
        super().__init__(f"domain of x{x} wiped out")
        self.var = x


@dataclass
class ConsistencyReport:
    """What an enforcement pass did to the network."""

    pruned: list = field(default_factory=list)  # (var, value) in removal order
    w_zero_gain: int = 0
    iterations: int = 0
    wipeout: bool = False


def _cond_min(cfn: Cfn, f: CostFunction, x: int, v) -> int:
    if f.is_global:
        return f.cond_min(x, v)
    return brute_force_cond_min(f, cfn.domains_for(f.scope), f.scope_pos(x),
                                v, cfn.top)


def _cond_mins(cfn: Cfn, f: CostFunction, x: int) -> dict:
    """Conditioned minima of f for every live value of x, value -> cost.

    Tables whose default already forbids everything are swept once over
    their stored entries instead of once per value over the whole domain
    product; the chain functions decompositions emit live in that regime.
    """
    dom = list(cfn.vars[x].domain)
    if f.is_global:
        return {v: f.cond_min(x, v) for v in dom}
    top = cfn.top
    pos = f.scope_pos(x)
    if f.default >= top:
        live = [set(d) for d in cfn.domains_for(f.scope)]
        best = {v: top for v in dom}
        for tup, c in f.entries.items():
            v = tup[pos]
            cur = best.get(v)
            if cur is None or c >= cur:
                continue
            if all(tup[i] in live[i] for i in range(len(tup)) if i != pos):
                best[v] = c
        return best
    return {v: _cond_min(cfn, f, x, v) for v in dom}


def unary_project(cfn: Cfn, x: int, trail=None) -> int:
    """Move the smallest unary cost of x into W_0; returns the amount."""
    dom = cfn.vars[x].domain
    if not dom:
        raise WipeoutError(x)
    alpha = min(cfn.unary[x][v] for v in dom)
    if alpha > 0:
        project(cfn, (x,), (), (), alpha, trail=trail)
    return alpha


def prune_var(cfn: Cfn, x: int, trail=None) -> list:
    """Remove the values of x that W_0 already makes intolerable."""
    top = cfn.top
    removed = [v for v in cfn.vars[x].domain
               if cost_add(cfn.unary[x][v], cfn.w_zero, top) >= top]
    for v in removed:
        cfn.remove_value(x, v)
        if trail is not None:
            trail.append(lambda cfn=cfn, x=x, v=v: cfn.restore_value(x, v))
    if not cfn.vars[x].domain:
        raise WipeoutError(x)
    return removed


def enforce_nc_star(cfn: Cfn, trail=None) -> ConsistencyReport:
    """Project every unary minimum into W_0, then prune intolerable values."""
    rep = ConsistencyReport()
    w0 = cfn.w_zero
    try:
        for x in range(len(cfn.vars)):
            unary_project(cfn, x, trail=trail)
        for x in range(len(cfn.vars)):
            rep.pruned += [(x, v) for v in prune_var(cfn, x, trail=trail)]
        rep.iterations = 1
    except WipeoutError:
        rep.wipeout = True
    rep.w_zero_gain = cfn.w_zero - w0
    return rep


def enforce_gac_star_var(cfn: Cfn, f: CostFunction, x: int, trail=None) -> list:
    """Give every value of x a zero-cost tuple in f, then re-normalize x.

    Projects each value's conditioned minimum out of f onto the unary
    table of x, pushes the new unary minimum to W_0 and prunes. Returns
    the values pruned from x.
    """
    if x not in f.scope:
        raise ValueError(f"variable {x} not in scope {f.scope}")
    for v, alpha in _cond_mins(cfn, f, x).items():
        if alpha > 0:
            project(cfn, f, (x,), (v,), alpha, trail=trail)
    unary_project(cfn, x, trail=trail)
    return prune_var(cfn, x, trail=trail)


def propagate_gac_star(cfn: Cfn, trail=None) -> ConsistencyReport:
    """Run the zero-support enforcement to a network-wide fixpoint.

    FIFO over variables (no duplicates). Popping x revisits every function
    attached to x and re-supports the other variables of its scope; a
    variable goes back on the queue whenever its domain or unary table
    just changed. Terminates because every change moves cost strictly
    toward W_0 or shrinks a domain.
    """
    rep = ConsistencyReport()
    w0 = cfn.w_zero
    queue = deque(range(len(cfn.vars)))
    queued = set(queue)

    def push(x):
        if x not in queued:
            queue.append(x)
            queued.add(x)

    try:
        # project everywhere before pruning: gains accumulate in W_0
        for x in range(len(cfn.vars)):
            unary_project(cfn, x, trail=trail)
        for x in range(len(cfn.vars)):
            rep.pruned += [(x, v) for v in prune_var(cfn, x, trail=trail)]
        while queue:
            rep.iterations += 1
            x = queue.popleft()
            queued.discard(x)
            for f in cfn.plus_fns:
                if x not in f.scope:
                    continue
                for y in f.scope:
                    if y == x:
                        continue
                    unary_before = list(cfn.unary[y])
                    w0_before = cfn.w_zero
                    pruned = enforce_gac_star_var(cfn, f, y, trail=trail)
                    rep.pruned += [(y, v) for v in pruned]
                    if pruned or cfn.unary[y] != unary_before \
                            or cfn.w_zero != w0_before:
                        push(y)
                    if cfn.w_zero != w0_before:
                        # a higher bound can kill values anywhere
                        for z in range(len(cfn.vars)):
                            late = prune_var(cfn, z, trail=trail)
                            if late:
                                rep.pruned += [(z, v) for v in late]
                                push(z)
    except WipeoutError:
        rep.wipeout = True
    rep.w_zero_gain = cfn.w_zero - w0
    return rep


def tdac_min_var(f: CostFunction, rank: dict) -> int:
    """The scope variable the directional pass projects onto."""
    return min(f.scope, key=lambda y: rank[y])


def enforce_tdac(cfn: Cfn, order, trail=None) -> ConsistencyReport:
    """One directional sweep giving full supports along a variable order.

    Functions are processed by decreasing order-rank of their earliest
    scope variable; for each, the unary costs of all later variables are
    extended into the function, and the conditioned minima are projected
    back out onto the earliest one. A final node-consistency pass
    normalizes the unary tables.
    """
    order = list(order)
    if sorted(order) != list(range(len(cfn.vars))):
        raise ValueError("order must be a permutation of all variables")
    rank = {x: i for i, x in enumerate(order)}
    rep = ConsistencyReport()
    w0 = cfn.w_zero
    try:
        # clear already-intolerable values so every extension stays finite
        for x in range(len(cfn.vars)):
            rep.pruned += [(x, v) for v in prune_var(cfn, x, trail=trail)]
        for f in sorted(cfn.plus_fns,
                        key=lambda f: -rank[tdac_min_var(f, rank)]):
            rep.iterations += 1
            x = tdac_min_var(f, rank)
            for y in f.scope:
                if y == x:
                    continue
                for v in list(cfn.vars[y].domain):
                    a = cfn.unary[y][v]
                    if a > 0:
                        project(cfn, f, (y,), (v,), -a, trail=trail)
            for v, a in _cond_mins(cfn, f, x).items():
                if a > 0:
                    project(cfn, f, (x,), (v,), a, trail=trail)
        for x in range(len(cfn.vars)):
            unary_project(cfn, x, trail=trail)
        for x in range(len(cfn.vars)):
            rep.pruned += [(x, v) for v in prune_var(cfn, x, trail=trail)]
    except WipeoutError:
        rep.wipeout = True
    rep.w_zero_gain = cfn.w_zero - w0
    return rep


def is_nc_star(cfn: Cfn) -> bool:
    """Every unary table touches zero and no live value is intolerable."""
    for x, var in enumerate(cfn.vars):
        if not var.domain:
            return False
        costs = [cfn.unary[x][v] for v in var.domain]
        if min(costs) != 0:
            return False
        if any(cost_add(c, cfn.w_zero, cfn.top) >= cfn.top for c in costs):
            return False
    return True


def _scope_tuples(cfn: Cfn, scope, cap: int):
    domains = cfn.domains_for(scope)
    count = 1
    for d in domains:
        count *= max(len(d), 1)
    if count > cap:
        raise EnumerationCapExceeded(f"checker needs > {cap} tuples")
    return itertools.product(*domains)


def is_gac_star(cfn: Cfn, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Literal check: node consistency plus a zero-cost tuple per value."""
    if not is_nc_star(cfn):
        return False
    for f in cfn.plus_fns:
        for pos, x in enumerate(f.scope):
            for v in cfn.vars[x].domain:
                if brute_force_cond_min(f, cfn.domains_for(f.scope), pos, v,
                                        cfn.top, cap) != 0:
                    return False
    return True


def is_tdac(cfn: Cfn, order, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Literal check: every value of each scope's earliest variable has a
    tuple whose function cost plus later unary costs is zero."""
    if not is_nc_star(cfn):
        return False
    rank = {x: i for i, x in enumerate(order)}
    for f in cfn.plus_fns:
        x = tdac_min_var(f, rank)
        xpos = f.scope_pos(x)
        for v in cfn.vars[x].domain:
            best = None
            for tup in _scope_tuples(cfn, f.scope, cap):
                if tup[xpos] != v:
                    continue
                c = f.cost(tup)
                for pos, y in enumerate(f.scope):
                    if y != x:
                        c = cost_add(c, cfn.unary[y][tup[pos]], cfn.top)
                best = c if best is None else min(best, c)
                if best == 0:
                    break
            if best != 0:
                return False
    return True


def vac_check(cfn: Cfn, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Arc consistency probe on the crisp skeleton of the network.

    Keeps only zero-cost values and tuples, closes under generalized arc
    consistency, and reports whether every domain survived. True is a
    certificate that W_0 cannot be improved by soft arc consistency alone.
    """
    domains = {x: {v for v in var.domain if cfn.unary[x][v] == 0}
               for x, var in enumerate(cfn.vars)}
    allowed = []
    for f in cfn.plus_fns:
        keep = {tup for tup in _scope_tuples(cfn, f.scope, cap)
                if f.cost(tup) == 0}
        allowed.append((f.scope, keep))
    changed = True
    while changed:
        changed = False
        if any(not d for d in domains.values()):
            return False
        for scope, keep in allowed:
            live = [t for t in keep
                    if all(t[i] in domains[y] for i, y in enumerate(scope))]
            for i, y in enumerate(scope):
                seen = {t[i] for t in live}
                dead = domains[y] - seen
                if dead:
                    domains[y] -= dead
                    changed = True
    return all(domains.values())
