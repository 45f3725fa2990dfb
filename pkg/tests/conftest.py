import numpy as np
import pytest

from cmaslab.strategy import Strategy, S1Table, S2Table

# Worked example tables used across tests: a mixed action table and a
# simple placement table.
EXAMPLE_S1 = np.array([
    [0.1, 0.2, 0.3, 0.4],
    [0.0, 1.0, 0.0, 0.0],
    [0.005, 0.995, 0.0, 0.0],
    [0.0, 0.0, 0.9, 0.1],
])
EXAMPLE_S2 = np.array([
    [0.25, 0.75],
    [0.7, 0.3],
])


@pytest.fixture
def example_strategy():
    return Strategy(S1Table(EXAMPLE_S1), S2Table(EXAMPLE_S2), label="example")


def brute_force_base_fitness(table, n, k, point):
    """Independent recomputation of base fitness from the raw table."""
    bits = [(point >> (n - 1 - i)) & 1 for i in range(n)]
    total = 0.0
    for i in range(n):
        key = 0
        for j in range(k + 1):
            key = (key << 1) | bits[(i + j) % n]
        total += table[i][key]
    return total / n
