"""Equivalence preserving transformations (EPTs) and delta stores.

A 1-EPT shifts cost between a cost function and a unary table; a 0-EPT
shifts cost into W_0. Only those two kinds exist here (shifting onto
larger scopes breaks tractability). Table functions absorb shifts eagerly;
global cost functions record them in a DeltaStore so a shift is constant
time and the underlying semantic table is never rewritten.

Every shift is journaled on the network for replay and for equivalence
testing. Mutating calls accept an optional ``trail`` list; when given,
undo closures are appended so a solver can roll the network back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from cfnkit.core import (
    Cfn,
    CostError,
    CostFunction,
    EnumerationCapExceeded,
    TableFunction,
    cost_add_signed,
    cost_sub_signed,
    brute_force_cond_min,
    DEFAULT_ENUM_CAP,
)


@dataclass(frozen=True)
class EptRecord:
    """One applied EPT: source scope, target scope, target tuple, shift."""

    from_scope: tuple
    to_scope: tuple
    tup: tuple
    alpha: int
    fn_index: int | None  # index into cfn.plus_fns, None for a unary source


class DeltaStore:
    """Per variable-value pair ledger of shifted costs for one function.

    ``minus[pos][v]`` is the total cost projected out conditioned on value
    v at scope position pos; ``plus[pos][v]`` the total cost extended in.
    Both stay non-negative. The adjusted cost of a tuple applies, for each
    scope position in ascending variable order, the pair (- minus, + plus)
    as one atomic signed step; legal EPT histories keep the final result
    non-negative even when a prefix dips below zero.
    """

    def __init__(self, scope, n_values_per_pos):
        self.scope = tuple(scope)
        self.minus = [[0] * n for n in n_values_per_pos]
        self.plus = [[0] * n for n in n_values_per_pos]

    def shift(self, pos: int, v: int, alpha: int, trail=None) -> None:
        """Record a signed shift: alpha > 0 projected out, < 0 extended in."""
        if alpha == 0:
            return
        if trail is not None:
            old_minus = self.minus[pos][v]
            old_plus = self.plus[pos][v]

            def undo(store=self, pos=pos, v=v, om=old_minus, op=old_plus):
                store.minus[pos][v] = om
                store.plus[pos][v] = op

            trail.append(undo)
        if alpha > 0:
            self.minus[pos][v] += alpha
        else:
            self.plus[pos][v] += -alpha

    def net_out(self, pos: int, v: int) -> int:
        """Net cost removed from tuples with value v at pos (signed)."""
        return self.minus[pos][v] - self.plus[pos][v]

    def is_zero(self) -> bool:
        return all(c == 0 for col in self.minus for c in col) and \
            all(c == 0 for col in self.plus for c in col)

    def copy(self) -> "DeltaStore":
        other = DeltaStore(self.scope, [len(col) for col in self.minus])
        other.minus = [list(col) for col in self.minus]
        other.plus = [list(col) for col in self.plus]
        return other


def adjusted_eval(base: int, delta: DeltaStore, values, top: int) -> int:
    """Apply a DeltaStore to a base cost.

    Walks scope positions in ascending variable order applying each
    (- minus, + plus) pair atomically in signed arithmetic. top absorbs.
    Raises CostError if the final value is negative, which no legal EPT
    history can produce.
    """
    if base >= top:
        return top
    acc = base
    for pos, v in enumerate(values):
        acc += delta.plus[pos][v] - delta.minus[pos][v]
    if acc < 0:
        raise CostError(f"adjusted cost went negative: {acc}")
    return min(acc, top)


class PreconditionError(CostError):
    """An EPT shift amount is outside its legal bounds."""


def _table_cond_min(f: TableFunction, domains, pos: int, v: int,
                    top: int) -> int:
    if f.default >= top:
        # only stored entries can undercut a forbidding default
        live = [set(d) for d in domains]
        if any(not s for i, s in enumerate(live) if i != pos):
            raise ValueError("empty domain in brute_force_min")
        best = top
        for tup, c in f.entries.items():
            if c >= best or tup[pos] != v:
                continue
            if all(tup[i] in live[i] for i in range(len(tup)) if i != pos):
                best = c
        return best
    return brute_force_cond_min(f, domains, pos, v, top)


def _fn_cond_min(cfn: Cfn, f: CostFunction, x: int, v: int) -> int:
    """Current conditioned minimum of f given x = v, over current domains."""
    if f.is_global:
        return f.cond_min(x, v)
    domains = cfn.domains_for(f.scope)
    return _table_cond_min(f, domains, f.scope_pos(x), v, cfn.top)


def project(cfn: Cfn, s1, s2, ell, alpha: int, trail=None,
            check: bool = True) -> None:
    """Shift cost alpha between a cost function and a smaller scope.

    ``s1`` names the source: a CostFunction from cfn.plus_fns, or a
    one-variable scope tuple meaning that variable's unary table. ``s2``
    is () for W_0 or (x,) for a unary target, with ``ell`` the matching
    target tuple. alpha > 0 moves cost from s1 to s2 (projection);
    alpha < 0 moves it back (extension). Preconditions keep every cost
    non-negative; violations raise PreconditionError.
    """
    if alpha == 0:
        return
    ell = tuple(ell)
    s2 = tuple(s2)
    top = cfn.top

    if isinstance(s1, CostFunction):
        fn = s1
        from_scope = fn.scope
        fn_index = cfn.plus_fns.index(fn)
    else:
        from_scope = tuple(s1)
        if len(from_scope) != 1:
            raise ValueError("scope source must be a single unary scope")
        fn = None
        fn_index = None

    if fn is None:
        # unary table -> W_0
        if s2 != ():
            raise ValueError("a unary source can only shift to W_0")
        x = from_scope[0]
        dom = cfn.vars[x].domain
        if check:
            lo = -cfn.w_zero
            hi = min(cfn.unary[x][v] for v in dom)
            if not lo <= alpha <= hi:
                raise PreconditionError(
                    f"unary shift {alpha} outside [{lo}, {hi}] for x{x}")
        if trail is not None:
            old_w0 = cfn.w_zero
            old_vals = [(v, cfn.unary[x][v]) for v in dom]

            def undo(cfn=cfn, x=x, old_w0=old_w0, old_vals=old_vals):
                cfn.w_zero = old_w0
                for v, c in old_vals:
                    cfn.unary[x][v] = c

            trail.append(undo)
        cfn.w_zero = cost_add_signed(cfn.w_zero, alpha, top)
        for v in dom:
            cfn.unary[x][v] = cost_sub_signed(cfn.unary[x][v], alpha, top)
    elif len(s2) == 1:
        # 1-EPT between a plus function and a unary table
        x = s2[0]
        (v,) = ell
        if x not in fn.scope:
            raise ValueError(f"target variable {x} not in scope {fn.scope}")
        pos = fn.scope_pos(x)
        if check:
            lo = -cfn.unary[x][v]
            hi = _fn_cond_min(cfn, fn, x, v)
            if not lo <= alpha <= hi:
                raise PreconditionError(
                    f"1-EPT shift {alpha} outside [{lo}, {hi}] "
                    f"for ({x},{v}) on {fn.scope}")
        if trail is not None:
            old_u = cfn.unary[x][v]

            def undo_u(cfn=cfn, x=x, v=v, old_u=old_u):
                cfn.unary[x][v] = old_u

            trail.append(undo_u)
        cfn.unary[x][v] = cost_add_signed(cfn.unary[x][v], alpha, top)
        if fn.is_global:
            fn.apply_ept(x, v, alpha, trail=trail)
        else:
            if trail is not None:
                old_entries = dict(fn.entries)

                def undo_t(fn=fn, old_entries=old_entries):
                    fn.entries = dict(old_entries)

                trail.append(undo_t)
            fn.shift_column(pos, v, alpha, cfn.domains_for(fn.scope))
    elif len(s2) == 0:
        # 0-EPT from a plus function straight to W_0
        if fn.is_global:
            raise NotImplementedError(
                "0-EPT from a global cost function is not supported; "
                "project through a unary table instead")
        if check:
            lo = -cfn.w_zero
            domains = cfn.domains_for(fn.scope)
            hi = min(fn.cost(t)
                     for t in itertools.product(*domains))
            if not lo <= alpha <= hi:
                raise PreconditionError(
                    f"0-EPT shift {alpha} outside [{lo}, {hi}]")
        if trail is not None:
            old_w0 = cfn.w_zero
            old_entries = dict(fn.entries)

            def undo_0(cfn=cfn, fn=fn, old_w0=old_w0, old_entries=old_entries):
                cfn.w_zero = old_w0
                fn.entries = dict(old_entries)

            trail.append(undo_0)
        cfn.w_zero = cost_add_signed(cfn.w_zero, alpha, top)
        for tup in itertools.product(*cfn.domains_for(fn.scope)):
            c = fn.entries.get(tup, fn.default)
            if c >= top:
                continue
            fn.entries[tup] = cost_sub_signed(c, alpha, top)
    else:
        raise ValueError("only 0-EPTs and 1-EPTs are supported")

    record = EptRecord(from_scope, s2, ell, alpha, fn_index)
    cfn.journal.append(record)
    if trail is not None:
        trail.append(lambda cfn=cfn: cfn.journal.pop())


def replay_journal(target: Cfn, journal) -> None:
    """Re-apply a journal of EptRecords to an equivalent fresh network."""
    for rec in journal:
        if rec.fn_index is None:
            src = rec.from_scope
        else:
            src = target.plus_fns[rec.fn_index]
        project(target, src, rec.to_scope, rec.tup, rec.alpha)


def check_equivalence(before: Cfn, after: Cfn,
                      cap: int = DEFAULT_ENUM_CAP) -> bool:
    """True iff total cost agrees on every assignment over surviving values.

    Enumerates the complete assignments over ``after``'s current domains
    (pruned values are excluded, as pruning is justified by the bound).
    """
    if len(before.vars) != len(after.vars):
        return False
    domains = after.domains()
    count = 1
    for d in domains:
        count *= max(len(d), 1)
        if count > cap:
            raise EnumerationCapExceeded(
                f"equivalence check needs > {cap} tuples")
    for tup in itertools.product(*domains):
        if before.eval_total(tup) != after.eval_total(tup):
            return False
    return True
