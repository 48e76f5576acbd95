"""Depth-first branch and bound with a maintained local consistency.

The search works on a private clone of the network and uses its slack
(W_0 after enforcement) as the lower bound. Every improvement lowers the
clone's ceiling to the new best cost, so from then on each consistency
pass prunes against the live bound. All cost movement and pruning rides a
trail of undo closures; backtracking pops the trail and leaves the clone
exactly as it stood before the assignment.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .consistency import enforce_nc_star, enforce_tdac, propagate_gac_star
from .core import Cfn

CONSISTENCIES = ("nc", "gac", "gac+tdac")
VAR_ORDERS = ("static", "min-domain")
VALUE_ORDERS = ("unary-cost-ascending", "index")


@dataclass
class SearchConfig:
    """Knobs for one solve() run.

    ``initial_ub`` is exclusive: the search looks for assignments strictly
    cheaper, and reports none when the bound already matches the optimum.
    ``seed`` permutes the variable order used for static selection and for
    tie-breaking; None keeps the index order.
    """

    consistency: str = "gac+tdac"
    var_order: str = "min-domain"
    value_order: str = "unary-cost-ascending"
    initial_ub: int | None = None
    node_limit: int = 10 ** 7
    seed: int | None = None

    def validate(self) -> None:
        if self.consistency not in CONSISTENCIES:
            raise ValueError(f"unknown consistency {self.consistency!r}")
        if self.var_order not in VAR_ORDERS:
            raise ValueError(f"unknown var_order {self.var_order!r}")
        if self.value_order not in VALUE_ORDERS:
            raise ValueError(f"unknown value_order {self.value_order!r}")
        if self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.initial_ub is not None and self.initial_ub <= 0:
            raise ValueError("initial_ub must be positive")


@dataclass
class SearchStats:
    """Outcome of a solve() run.

    best_assignment is None when no assignment beat the ceiling; with
    proved_optimal that is a proof of infeasibility below the bound.
    """

    nodes: int = 0
    backtracks: int = 0
    best_cost: int = 0
    best_assignment: list | None = None
    proved_optimal: bool = False


class SearchContext:
    """Mutable search state over a private clone of the network."""

    def __init__(self, cfn: Cfn, config: SearchConfig | None = None):
        config = config if config is not None else SearchConfig()
        config.validate()
        self.config = config
        self.work = cfn.clone()
        if config.initial_ub is not None and config.initial_ub < self.work.top:
            self.work.top = config.initial_ub
        self.trail: list = []
        self.stats = SearchStats(best_cost=self.work.top)
        self.exhausted = True
        n = len(self.work.vars)
        order = list(range(n))
        if config.seed is not None:
            random.Random(config.seed).shuffle(order)
        self._rank = {x: i for i, x in enumerate(order)}
        # directional sweeps run against the static order reversed
        self._tdac_order = list(reversed(range(n)))

    # -- trail -----------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.trail.pop()()

    # -- propagation -------------------------------------------------------

    def propagate(self) -> bool:
        """Re-establish the configured consistency; False kills the branch."""
        cfn = self.work
        mode = self.config.consistency
        if mode == "nc":
            rep = enforce_nc_star(cfn, trail=self.trail)
        elif mode == "gac":
            rep = propagate_gac_star(cfn, trail=self.trail)
        else:
            rep = enforce_tdac(cfn, self._tdac_order, trail=self.trail)
            if not rep.wipeout:
                rep = propagate_gac_star(cfn, trail=self.trail)
        return not rep.wipeout and cfn.w_zero < cfn.top


def assign_and_propagate(ctx: SearchContext, x: int, v: int) -> bool:
    """Commit x=v on the context and re-propagate; False on a dead branch."""
    cfn = ctx.work
    if v not in cfn.vars[x].domain:
        raise ValueError(f"value {v} is not live for x{x}")
    removed = cfn.assign(x, v)
    if removed:
        def undo(cfn=cfn, x=x, removed=removed):
            for w in removed:
                cfn.restore_value(x, w)

        ctx.trail.append(undo)
    return ctx.propagate()


def _pick_var(ctx: SearchContext) -> int | None:
    cfn = ctx.work
    open_vars = [x for x in range(len(cfn.vars))
                 if len(cfn.vars[x].domain) > 1]
    if not open_vars:
        return None
    if ctx.config.var_order == "static":
        return min(open_vars, key=ctx._rank.__getitem__)
    return min(open_vars,
               key=lambda x: (len(cfn.vars[x].domain), ctx._rank[x]))


def _ordered_values(ctx: SearchContext, x: int) -> list:
    dom = list(ctx.work.vars[x].domain)
    if ctx.config.value_order == "unary-cost-ascending":
        dom.sort(key=lambda v: (ctx.work.unary[x][v], v))
    return dom


def _at_leaf(ctx: SearchContext) -> None:
    cfn = ctx.work
    values = [var.domain[0] for var in cfn.vars]
    total = cfn.eval_total(values)
    if total < cfn.top:
        ctx.stats.best_cost = total
        ctx.stats.best_assignment = values
        cfn.top = total  # the bound every later pass prunes against


def _dfs(ctx: SearchContext) -> None:
    x = _pick_var(ctx)
    if x is None:
        _at_leaf(ctx)
        return
    for v in _ordered_values(ctx, x):
        if ctx.stats.nodes >= ctx.config.node_limit:
            ctx.exhausted = False
            return
        ctx.stats.nodes += 1
        mark = ctx.mark()
        if assign_and_propagate(ctx, x, v):
            _dfs(ctx)
        ctx.undo_to(mark)
        ctx.stats.backtracks += 1
        if ctx.work.w_zero >= ctx.work.top:
            return  # the restored slack alone already kills every sibling


def solve(cfn: Cfn, config: SearchConfig | None = None) -> SearchStats:
    """Exact minimization of eval_total under the configured consistency.

    The caller's network is never touched. proved_optimal means the
    search ran to completion under the node limit: best_cost is then the
    true optimum, or the ceiling when nothing beats it (best_assignment
    None). Hitting the node limit returns the best found so far with
    proved_optimal False.
    """
    ctx = SearchContext(cfn, config)
    ctx.stats.nodes += 1  # the root: its propagation alone can decide
    if ctx.propagate():
        _dfs(ctx)
    ctx.stats.proved_optimal = ctx.exhausted
    return ctx.stats
