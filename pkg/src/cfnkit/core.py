"""Cost algebra, the cost function network model, and brute-force oracles.

Costs are plain non-negative integers capped by a problem-wide intolerable
bound ``top``. Addition saturates at ``top`` and ``top`` absorbs: once a cost
reaches the bound it never comes back down. Subtraction is defined only when
the left operand dominates. Any stored cost at or above ``top`` means "the
intolerable cost"; comparisons treat them all the same.
"""

from __future__ import annotations

import itertools

DEFAULT_ENUM_CAP = 10_000_000


class CostError(Exception):
    """A cost-algebra precondition was violated."""


class EnumerationCapExceeded(Exception):
    """A brute-force enumeration would visit too many tuples."""


def cost_add(a: int, b: int, top: int) -> int:
    """Return a + b saturated at top. top absorbs both ways."""
    if a >= top or b >= top:
        return top
    return min(a + b, top)


def cost_sub(a: int, b: int, top: int) -> int:
    """Return a - b. Defined only for a >= b; top stays top."""
    if a >= top:
        return top
    if a < b:
        raise CostError(f"cost_sub underflow: {a} < {b}")
    return a - b


def cost_add_signed(a: int, alpha: int, top: int) -> int:
    """a + alpha where alpha may be negative (a + (-b) means a - b)."""
    if alpha >= 0:
        return cost_add(a, alpha, top)
    return cost_sub(a, -alpha, top)


def cost_sub_signed(a: int, alpha: int, top: int) -> int:
    """a - alpha where alpha may be negative (a - (-b) means a + b)."""
    if alpha >= 0:
        return cost_sub(a, alpha, top)
    return cost_add(a, -alpha, top)


def check_scope(scope) -> tuple:
    """Validate and return a scope: a strictly increasing tuple of var ids."""
    scope = tuple(scope)
    for a, b in zip(scope, scope[1:]):
        if a >= b:
            raise ValueError(f"scope not strictly increasing: {scope}")
    return scope


def project_tuple(full, scope):
    """Project a full assignment (indexed by var id) onto a scope."""
    return tuple(full[x] for x in scope)


class Variable:
    """One decision variable with a dense value range.

    Values are dense small integers 0..d-1; external names are kept only
    for parsing and printing. ``domain`` is the current (mutable) domain,
    always a strictly ascending list.
    """

    def __init__(self, vid: int, n_values: int, name: str | None = None,
                 value_names=None):
        if n_values < 1:
            raise ValueError("variable needs at least one value")
        self.id = vid
        self.name = name if name is not None else f"x{vid}"
        if value_names is None:
            value_names = tuple(str(v) for v in range(n_values))
        if len(value_names) != n_values:
            raise ValueError("value_names length mismatch")
        self.value_names = tuple(value_names)
        self.initial_domain = tuple(range(n_values))
        self.domain = list(self.initial_domain)

    @property
    def n_values(self) -> int:
        return len(self.initial_domain)

    def value_id(self, name: str) -> int:
        try:
            return self.value_names.index(name)
        except ValueError:
            raise KeyError(f"unknown value {name!r} for variable {self.name}")

    def __repr__(self):
        return f"Variable({self.name}, domain={self.domain})"


class CostFunction:
    """Base class for every cost function of arity >= 1 in W+.

    ``cost`` returns the current cost of a scope-aligned value tuple, i.e.
    the cost after every equivalence-preserving transformation applied so
    far. Subclasses keep that contract however they store their state.
    """

    is_global = False

    def __init__(self, scope):
        self.scope = check_scope(scope)

    @property
    def arity(self) -> int:
        return len(self.scope)

    def cost(self, values) -> int:
        raise NotImplementedError

    def scope_pos(self, x: int) -> int:
        """Position of variable x inside the scope."""
        try:
            return self.scope.index(x)
        except ValueError:
            raise KeyError(f"variable {x} not in scope {self.scope}")


class TableFunction(CostFunction):
    """Extensional cost function: explicit tuples plus a default cost.

    Cost shifts from equivalence-preserving transformations are applied
    eagerly to the stored entries. A shift conditioned on (x, v) touches
    every tuple with value v at x; when the default cost is not top those
    tuples are materialized first (top absorbs shifts, so a top default
    never needs materializing).
    """

    def __init__(self, scope, top: int, entries=None, default: int = 0,
                 name: str | None = None):
        super().__init__(scope)
        self.top = top
        self.default = default
        self.entries: dict[tuple, int] = {}
        if entries:
            for tup, c in dict(entries).items():
                self.entries[tuple(tup)] = c
        self.name = name

    def cost(self, values) -> int:
        return self.entries.get(tuple(values), self.default)

    def set_cost(self, values, c: int) -> None:
        self.entries[tuple(values)] = c

    def materialize_column(self, pos: int, v: int, domains) -> None:
        """Store an explicit entry for every tuple with value v at pos."""
        ranges = [list(d) for d in domains]
        ranges[pos] = [v]
        for tup in itertools.product(*ranges):
            self.entries.setdefault(tup, self.default)

    def shift_column(self, pos: int, v: int, alpha: int, domains) -> None:
        """Subtract a signed shift from every live tuple with value v at pos.

        ``domains`` gives the current value lists aligned with the scope.
        Tuples through pruned values keep their stored cost: they are out
        of play, and backtracking restores the whole table anyway. A
        forbidden tuple (cost >= top) absorbs any shift.
        """
        if alpha == 0:
            return
        if self.default >= self.top:
            # nothing outside the stored entries can move
            live = [set(d) for d in domains]
            for tup, c in self.entries.items():
                if tup[pos] != v or c >= self.top:
                    continue
                if all(tup[i] in live[i] for i in range(len(tup)) if i != pos):
                    self.entries[tup] = cost_sub_signed(c, alpha, self.top)
            return
        ranges = [list(d) for d in domains]
        ranges[pos] = [v]
        for tup in itertools.product(*ranges):
            c = self.entries.get(tup, self.default)
            if c >= self.top:
                continue
            self.entries[tup] = cost_sub_signed(c, alpha, self.top)

    def copy(self) -> "TableFunction":
        return TableFunction(self.scope, self.top, dict(self.entries),
                             self.default, self.name)

    def __repr__(self):
        return f"TableFunction(scope={self.scope}, |entries|={len(self.entries)})"


class Cfn:
    """A cost function network: variables, W_0, unary tables, W+.

    Unary cost tables exist for every variable (missing ones default to
    all-zero). ``plus_fns`` holds every cost function of arity >= 2.
    Instances are meant to be built once and then mutated only by a single
    owning solver or enforcement context.
    """

    def __init__(self, top: int, name: str = "cfn"):
        if top < 1:
            raise ValueError("top must be at least 1")
        self.top = top
        self.name = name
        self.vars: list[Variable] = []
        self.w_zero = 0
        self.unary: list[list[int]] = []
        self.plus_fns: list[CostFunction] = []
        # append-only record of applied cost shifts (see cfnkit.ept)
        self.journal: list = []
        # bumped on every domain change; caches key off it
        self.domain_rev = 0

    def add_variable(self, n_values: int, name: str | None = None,
                     value_names=None) -> Variable:
        var = Variable(len(self.vars), n_values, name, value_names)
        self.vars.append(var)
        self.unary.append([0] * n_values)
        return var

    def add_unary(self, x: int, costs) -> None:
        """Add costs into variable x's unary table (saturating)."""
        table = self.unary[x]
        if isinstance(costs, dict):
            items = costs.items()
        else:
            items = enumerate(costs)
        for v, c in items:
            table[v] = cost_add(table[v], c, self.top)

    def add_function(self, f: CostFunction) -> CostFunction:
        for x in f.scope:
            if not 0 <= x < len(self.vars):
                raise ValueError(f"scope references unknown variable {x}")
        if f.arity < 2:
            raise ValueError("plus functions need arity >= 2; use add_unary")
        self.plus_fns.append(f)
        if f.is_global:
            f.bind(self)
        return f

    def add_table(self, scope, entries=None, default: int = 0,
                  name: str | None = None) -> TableFunction:
        f = TableFunction(scope, self.top, entries, default, name)
        return self.add_function(f)

    def domains(self) -> list[list[int]]:
        return [list(v.domain) for v in self.vars]

    def initial_domains_for(self, scope) -> list[tuple]:
        return [self.vars[x].initial_domain for x in scope]

    def domains_for(self, scope) -> list[list[int]]:
        return [list(self.vars[x].domain) for x in scope]

    def remove_value(self, x: int, v: int) -> None:
        self.vars[x].domain.remove(v)
        self.domain_rev += 1

    def restore_value(self, x: int, v: int) -> None:
        """Put a pruned value back (solver backtracking)."""
        dom = self.vars[x].domain
        import bisect
        pos = bisect.bisect_left(dom, v)
        dom.insert(pos, v)
        self.domain_rev += 1

    def assign(self, x: int, v: int) -> list[int]:
        """Restrict D(x) to {v}; returns the removed values."""
        removed = [w for w in self.vars[x].domain if w != v]
        self.vars[x].domain = [v]
        self.domain_rev += 1
        return removed

    def eval_total(self, full_values) -> int:
        """Total cost of a complete assignment (indexed by var id)."""
        total = self.w_zero
        for x, var in enumerate(self.vars):
            total = cost_add(total, self.unary[x][full_values[x]], self.top)
        for f in self.plus_fns:
            total = cost_add(total, f.cost(project_tuple(full_values, f.scope)),
                             self.top)
        return total

    def clone(self) -> "Cfn":
        """Independent deep copy (tables, domains, global function state)."""
        other = Cfn(self.top, self.name)
        for var in self.vars:
            other.add_variable(var.n_values, var.name, var.value_names)
            other.vars[-1].domain = list(var.domain)
        other.w_zero = self.w_zero
        other.unary = [list(t) for t in self.unary]
        for f in self.plus_fns:
            g = f.copy()
            if g.is_global:
                g.bind(other)
            other.plus_fns.append(g)
        other.journal = list(self.journal)
        other.domain_rev = self.domain_rev
        return other

    def __repr__(self):
        return (f"Cfn({self.name}, n={len(self.vars)}, top={self.top}, "
                f"w0={self.w_zero}, |W+|={len(self.plus_fns)})")


def _check_cap(sizes, cap) -> None:
    count = 1
    for s in sizes:
        count *= max(s, 1)
        if count > cap:
            raise EnumerationCapExceeded(f"enumeration needs > {cap} tuples")


def brute_force_min(f: CostFunction, domains, top: int,
                    cap: int = DEFAULT_ENUM_CAP):
    """Exact minimum of f over the given domains, with a witness.

    ``domains`` is a list of value lists aligned with f.scope. Returns
    (min_cost, witness) where the witness is the lexicographically
    smallest minimizer under the given domain order.
    """
    _check_cap([len(d) for d in domains], cap)
    best = None
    best_tup = None
    for tup in itertools.product(*domains):
        c = min(f.cost(tup), top)
        if best is None or c < best:
            best = c
            best_tup = tup
    if best is None:
        raise ValueError("empty domain in brute_force_min")
    return best, best_tup


def brute_force_cond_min(f: CostFunction, domains, pos: int, v: int,
                         top: int, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Exact minimum of f over tuples with value v at scope position pos."""
    restricted = [list(d) for d in domains]
    restricted[pos] = [v]
    cost, _ = brute_force_min(f, restricted, top, cap)
    return cost


def brute_force_solve(cfn: Cfn, cap: int = DEFAULT_ENUM_CAP):
    """Exact optimum of eval_total over all complete assignments.

    Enumerates the current domains in lexicographic order. Returns
    (optimum, witness); the assignment is feasible iff optimum < top.
    """
    doms = cfn.domains()
    _check_cap([len(d) for d in doms], cap)
    best = None
    best_tup = None
    for tup in itertools.product(*doms):
        c = cfn.eval_total(tup)
        if best is None or c < best:
            best = c
            best_tup = tup
    if best is None:
        raise ValueError("empty domain in brute_force_solve")
    return best, best_tup
