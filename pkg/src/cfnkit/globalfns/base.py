"""Shared machinery for global cost functions.

A global cost function has a closed-form semantics (``base_cost``) and a
filtering backend that answers minima and conditioned minima over the
current domains in polynomial time. The default backend is a filtering DAG
rebuilt lazily whenever the owning network's domains change; the grammar
function swaps in its own dynamic-programming tables.

Cost moved in or out by equivalence-preserving transformations is recorded
twice, deliberately: once in a per-(position, value) delta store that
adjusts ``base_cost`` (the semantic truth, used by checkers and brute-force
oracles), and once in the backend's tables (the fast query path). Tests
compare both views; production code never needs to choose.
"""

from __future__ import annotations

from ..core import CostFunction
from ..dag import LEAF, FilterDag, build_min_plus, min_given, project_on_dag
from ..ept import DeltaStore, adjusted_eval


class GlobalCostFunction(CostFunction):
    is_global = True
    kind = "global"  # tag used by the instance file format

    def __init__(self, scope, top: int, name: str | None = None):
        super().__init__(scope)
        self.top = top
        self.name = name
        self.cfn = None
        self.deltas: DeltaStore | None = None
        self.dag: FilterDag | None = None

    # -- wiring ------------------------------------------------------

    def bind(self, cfn) -> None:
        """Attach to an owning network; keeps existing state on rebind.

        Clones carry their shifted tables with them, so only a first bind
        builds anything.
        """
        self.cfn = cfn
        if self.deltas is None:
            sizes = [cfn.vars[x].n_values for x in self.scope]
            self.deltas = DeltaStore(self.scope, sizes)
        self._init_backend()

    def _init_backend(self) -> None:
        if self.dag is None:
            self.dag = self.build_dag()

    def build_dag(self) -> FilterDag:
        raise NotImplementedError

    def base_cost(self, values) -> int:
        """Pristine semantic cost of a scope-aligned tuple (no shifts)."""
        raise NotImplementedError

    # -- evaluation ---------------------------------------------------

    def cost(self, values) -> int:
        base = self.base_cost(values)
        if self.deltas is None:
            return min(base, self.top)
        return adjusted_eval(base, self.deltas, tuple(values), self.top)

    # -- filtering queries ---------------------------------------------

    def _fresh(self) -> None:
        if self.cfn is None:
            raise RuntimeError(f"{type(self).__name__} used before add_function")
        if self.dag.built_stamp != self.cfn.domain_rev:
            domains = {x: self.cfn.vars[x].domain for x in self.scope}
            build_min_plus(self.dag, domains, stamp=self.cfn.domain_rev)

    def min_current(self) -> int:
        """Minimum cost over the current domains, shifts included."""
        self._fresh()
        return self.dag.min_table[self.dag.root]

    def cond_min(self, x: int, v: int) -> int:
        """Minimum cost over current domains given x = v, shifts included."""
        self._fresh()
        return min_given(self.dag, x, v, stamp=self.cfn.domain_rev)

    def apply_ept(self, x: int, v: int, alpha: int, trail=None) -> None:
        """Shift cost out of (alpha > 0) or into (alpha < 0) the function.

        Updates the backend tables and the delta store in lock step; with a
        trail, appends one closure restoring both.
        """
        self._fresh()
        dag = self.dag
        if trail is not None:
            snap = [(n.id, dict(n.table)) for n in dag.nodes
                    if n.kind == LEAF and n.scope[0] == x]

            def undo(dag=dag, snap=snap):
                for nid, entries in snap:
                    dag.nodes[nid].table = dict(entries)
                dag.built_stamp = None  # memos rebuilt on next query

            trail.append(undo)
        project_on_dag(dag, x, v, alpha)
        self.deltas.shift(self.scope_pos(x), v, alpha, trail)

    # -- copying -------------------------------------------------------

    def copy(self):
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.cfn = None
        other.deltas = self.deltas.copy() if self.deltas is not None else None
        other.dag = self.dag.copy() if self.dag is not None else None
        self._copy_extra(other)
        return other

    def _copy_extra(self, other) -> None:
        """Hook for subclasses with extra mutable state."""

    def __repr__(self):
        return f"{type(self).__name__}(scope={self.scope})"
