"""Edge-differentially-private k-core decomposition and its applications."""

__version__ = "0.1.0"

from dpkcore.apps import OrderingResult, dp_densest_subgraph, dp_low_outdegree_ordering
from dpkcore.graph import Graph, GraphInputError, VertexSubset, from_edge_list, generate
from dpkcore.ledp import LedpConfig, ledp_core_numbers
from dpkcore.mechanisms import NoiseOracle, laplace_cdf, mat_init, mat_query
from dpkcore.oracle import brute_force_densest, degeneracy_ordering, exact_core_numbers
from dpkcore.private_kcore import Schedule, default_schedule, dp_core_numbers

__all__ = [
    "Graph",
    "GraphInputError",
    "LedpConfig",
    "NoiseOracle",
    "OrderingResult",
    "Schedule",
    "VertexSubset",
    "brute_force_densest",
    "default_schedule",
    "degeneracy_ordering",
    "dp_core_numbers",
    "dp_densest_subgraph",
    "dp_low_outdegree_ordering",
    "exact_core_numbers",
    "from_edge_list",
    "generate",
    "laplace_cdf",
    "ledp_core_numbers",
    "mat_init",
    "mat_query",
]
