"""
Shared fixtures: random proper partial colorings.

A partial coloring is made by fully coloring a random graph and then
clearing a random subset of its edges, which keeps it proper.
"""

import numpy as np
import pytest

from vizing.graph import gen_random_max_degree
from vizing.sequential import color_vizing


def make_partial(n: int, delta: int, seed: int, keep: float = 0.6):
    g = gen_random_max_degree(n, delta, seed)
    phi, _ = color_vizing(g, seed)
    rng = np.random.default_rng(seed)
    for e in range(g.m):
        if rng.random() > keep:
            phi.clear(e)
    return g, phi


@pytest.fixture
def partial_colorings():
    """A dozen (graph, coloring) pairs over Δ in 3..6."""
    return [make_partial(60, 3 + seed % 4, seed) for seed in range(12)]
