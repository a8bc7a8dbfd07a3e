"""Shared builders and independent oracles for the test suite."""
import numpy as np
import pytest
from hypothesis import strategies as st

from dagsl.dag import BIN, CONT, Dag, cat


def random_dag(rng, n_nodes, p_edge=0.4, kinds=("cont",)):
    """Random DAG whose declaration order is shuffled relative to its topology."""
    names = [f"V{i}" for i in range(n_nodes)]
    edges = [(names[i], names[j]) for i in range(n_nodes) for j in range(i + 1, n_nodes)
             if rng.random() < p_edge]
    declared = list(rng.permutation(names))
    types = {}
    for name in names:
        kind = kinds[rng.integers(len(kinds))]
        types[name] = cat(3) if kind == "cat" else {"cont": CONT, "bin": BIN}[kind]
    return Dag(declared, edges, types)


@st.composite
def dags(draw, max_nodes=8, min_nodes=1):
    n = draw(st.integers(min_nodes, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.floats(0.0, 1.0))
    return random_dag(np.random.default_rng(seed), n, p)


def closure_oracle(nodes, edges):
    """Reachability by repeated relaxation of the edge list until nothing changes."""
    reach = {n: set() for n in nodes}
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            new = {b} | reach[b]
            if not new <= reach[a]:
                reach[a] |= new
                changed = True
    return reach


@pytest.fixture
def fig1_dag():
    # C confounds X and Y, M mediates X -> Y
    return Dag(["C", "X", "M", "Y"],
               [("C", "X"), ("C", "Y"), ("X", "Y"), ("X", "M"), ("M", "Y")],
               {"C": "cont", "X": "bin", "M": "cont", "Y": "cont"})
