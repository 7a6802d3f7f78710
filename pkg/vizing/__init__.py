"""
Vizing edge-coloring toolkit.

Sequential (Δ+1)-edge-coloring with Vizing chains and multi-step Vizing
chains, and a LOCAL-model simulation of the randomized distributed variant.
"""

from vizing.coloring import PartialColoring, augment, validate
from vizing.graph import Graph, gen_random_max_degree, load_graph
from vizing.local_sim import run_distributed
from vizing.msva import msva
from vizing.sequential import color_greedy, color_msva, color_vizing

__all__ = [
    "Graph",
    "PartialColoring",
    "augment",
    "color_greedy",
    "color_msva",
    "color_vizing",
    "gen_random_max_degree",
    "load_graph",
    "msva",
    "run_distributed",
    "validate",
]
