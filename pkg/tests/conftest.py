from __future__ import annotations

import numpy as np
from hypothesis import settings

from clusterroute import clifford as cl
from clusterroute.graphstate import GraphState, GraphStateError, grid_edges
from clusterroute.oracle import StateVector, gate, init_plus

settings.register_profile("repo", max_examples=40, deadline=None)
settings.load_profile("repo")


def grid(w: int, h: int, seed: int = 0) -> tuple[GraphState, dict[int, tuple[int, int]]]:
    """Bare ``w`` by ``h`` cluster and its coordinates (id = y*w + x)."""
    coords = {y * w + x: (x, y) for y in range(h) for x in range(w)}
    return GraphState(w * h, grid_edges(w, h), seed=seed), coords


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_product(rng: np.random.Generator, m: int) -> np.ndarray:
    return StateVector.product([random_qubit(rng) for _ in range(m)]).amplitudes


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def random_sequence(rng: np.random.Generator, n: int, length: int) -> tuple[GraphState, StateVector]:
    """Apply the same random CZ / local Clifford / forced measurement sequence to both backends."""
    g = GraphState(n, seed=int(rng.integers(1 << 30)))
    sv = init_plus(n)
    for _ in range(length):
        live = g.live()
        kind = rng.integers(3)
        if kind == 0 and len(live) >= 2:
            i, j = (int(v) for v in rng.choice(live, 2, replace=False))
            g.apply_cz(i, j)
            sv.apply(gate("CZ", i, j))
        elif kind == 1:
            a = int(rng.integers(n))
            c = int(rng.integers(24))
            g.apply_local_clifford(a, c)
            sv.apply_matrix(cl.MATRICES[c], [a])
        elif live:
            a = int(rng.choice(live))
            basis = "XYZ"[rng.integers(3)]
            want = int(rng.choice([1, -1]))
            try:
                out = g.measure_pauli(a, basis, forced=want)
            except GraphStateError:
                out = g.measure_pauli(a, basis, forced=-want)
            sv.measure_pauli(a, basis, forced=out.value)
    return g, sv
