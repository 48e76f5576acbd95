"""Global cost functions with polynomial filtering backends."""

from .base import GlobalCostFunction
from .among import (AmongSpec, AmongFunction, among_cost, among_min,
                    among_build_dag, among_to_automaton)
from .regular import (Automaton, RegularFunction, regular_cost, regular_min,
                      regular_build_dag, weighted_regular_cost,
                      hamming_weighted)
from .grammar import (CnfGrammar, GrammarFunction, GrammarTables,
                      grammar_cost, grammar_min, grammar_precompute,
                      grammar_project, grammar_build_dag)
from .extremum import (WeightMap, WMaxFunction, WMinFunction, wmax_cost,
                       wmin_cost, wmax_min, wmin_min, wmax_build_dag,
                       wmin_build_dag, wmax_sweep_table)

__all__ = [
    "GlobalCostFunction",
    "AmongSpec", "AmongFunction", "among_cost", "among_min",
    "among_build_dag", "among_to_automaton",
    "Automaton", "RegularFunction", "regular_cost", "regular_min",
    "regular_build_dag", "weighted_regular_cost", "hamming_weighted",
    "CnfGrammar", "GrammarFunction", "GrammarTables", "grammar_cost",
    "grammar_min", "grammar_precompute", "grammar_project",
    "grammar_build_dag",
    "WeightMap", "WMaxFunction", "WMinFunction", "wmax_cost", "wmin_cost",
    "wmax_min", "wmin_min", "wmax_build_dag", "wmin_build_dag",
    "wmax_sweep_table",
]
