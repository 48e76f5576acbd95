"""cfnkit: cost function network optimization toolkit.

Soft local consistencies (NC*, GAC*, T-DAC) over global cost functions via
filtering DAGs and Berge-acyclic network decompositions, with a depth-first
branch-and-bound solver, brute-force oracles, instance generators and a CLI.
"""

from cfnkit.core import (
    Cfn,
    CostError,
    CostFunction,
    EnumerationCapExceeded,
    TableFunction,
    Variable,
    brute_force_min,
    brute_force_solve,
    cost_add,
    cost_sub,
)
from cfnkit.decompose import (
    Decomposition,
    berge_acyclic_check,
    decompose_grammar,
    decompose_linear_sum,
    decompose_regular,
    decomposition_to_filter_dag,
    embed_decomposition,
    min_projection,
    relax_network,
    tdac_order,
    to_cfn,
    validate_decomposition,
)

__all__ = [
    "Cfn",
    "CostError",
    "CostFunction",
    "Decomposition",
    "EnumerationCapExceeded",
    "TableFunction",
    "Variable",
    "berge_acyclic_check",
    "brute_force_min",
    "brute_force_solve",
    "cost_add",
    "cost_sub",
    "decompose_grammar",
    "decompose_linear_sum",
    "decompose_regular",
    "decomposition_to_filter_dag",
    "embed_decomposition",
    "min_projection",
    "relax_network",
    "tdac_order",
    "to_cfn",
    "validate_decomposition",
]

__version__ = "0.1.0"
