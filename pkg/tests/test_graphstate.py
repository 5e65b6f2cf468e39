import itertools

import numpy as np
import pytest
from conftest import random_sequence
from hypothesis import given
from hypothesis import strategies as st

from clusterroute import clifford as cl
from clusterroute.graphstate import (
    GraphState,
    GraphStateError,
    apply_cz,
    apply_local_clifford,
    is_bell_pair,
    local_complement,
    measure_pauli,
    new_cluster,
    to_statevector,
)
from clusterroute.oracle import StateVector, equal_up_to_phase, gate, graph_state, init_plus

BELL = np.array([0.5, 0.5, 0.5, -0.5])


def _random_graph(rng, n, p=0.5):
    return [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]


def test_new_cluster_examples():
    assert np.allclose(to_statevector(new_cluster(1)).amplitudes, init_plus(1).amplitudes)
    assert equal_up_to_phase(to_statevector(new_cluster(2, [(0, 1)])), StateVector(BELL))
    sq = [(0, 1), (1, 3), (3, 2), (2, 0)]
    assert equal_up_to_phase(to_statevector(new_cluster(4, sq)), graph_state(4, sq))
    with pytest.raises(GraphStateError):
        new_cluster(2, [(0, 2)])
    with pytest.raises(GraphStateError):
        new_cluster(2, [(1, 1)])


def test_apply_cz():
    s = new_cluster(2)
    apply_cz(s, 0, 1)
    assert equal_up_to_phase(to_statevector(s), StateVector(BELL))
    apply_cz(s, 0, 1)
    assert s == new_cluster(2)
    with pytest.raises(GraphStateError):
        apply_cz(s, 1, 1)


@given(st.integers(0, 2**32 - 1))
def test_apply_cz_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    edges = _random_graph(rng, 6)
    vops = [int(v) for v in rng.integers(24, size=6)]
    s = GraphState(6, edges, vops=vops)
    sv = to_statevector(s)
    for _ in range(4):
        i, j = (int(v) for v in rng.choice(6, 2, replace=False))
        s.apply_cz(i, j)
        sv.apply(gate("CZ", i, j))
        assert equal_up_to_phase(to_statevector(s), sv, tol=1e-12)


def test_cz_between_isolated_irreducible_vertices():
    s = GraphState(2, vops=["H", "SX"])
    sv = to_statevector(s).apply(gate("CZ", 0, 1))
    s.apply_cz(0, 1)
    assert equal_up_to_phase(to_statevector(s), sv)


def test_local_complement_examples():
    s = new_cluster(3, [(0, 1)])
    t = s.copy()
    local_complement(t, 2)
    assert t.adj == s.adj
    star = new_cluster(5, [(0, k) for k in range(1, 5)])
    before = to_statevector(star)
    local_complement(star, 0)
    assert set(star.edges()) == set(itertools.combinations(range(5), 2))
    assert equal_up_to_phase(to_statevector(star), before)
    local_complement(star, 0)
    assert set(star.edges()) == {(0, k) for k in range(1, 5)}


def test_z_on_chain_end():
    s = new_cluster(2, [(0, 1)])
    out = measure_pauli(s, 0, "Z")
    assert s.edges() == []
    partner = to_statevector(s, [1])
    want = init_plus(1) if out.value == 1 else StateVector(np.array([1, -1]) / np.sqrt(2))
    assert equal_up_to_phase(partner, want)


def test_y_on_middle_of_three_chain():
    s = new_cluster(3, [(0, 1), (1, 2)])
    measure_pauli(s, 1, "Y")
    check = is_bell_pair(s, 0, 2)
    assert check and check.vops is not None


@pytest.mark.parametrize("forced", [1, -1])
def test_x_on_middle_with_special_neighbour(forced):
    s = new_cluster(3, [(0, 1), (1, 2)])
    sv = to_statevector(s)
    measure_pauli(s, 1, "X", forced=forced, special_neighbor=0)
    sv.measure_pauli(1, "X", forced=forced)
    assert is_bell_pair(s, 0, 2)
    # the tracked vops fix the exact two-qubit state
    assert equal_up_to_phase(to_statevector(s, [0, 2]), sv.reduced_pure([0, 2]))
    undone = s.copy()
    for v in (0, 2):
        undone.apply_local_clifford(v, cl.inverse(undone.vop[v]))
    assert equal_up_to_phase(to_statevector(undone, [0, 2]), StateVector(BELL))


def test_measurement_errors():
    s = new_cluster(3, [(0, 1), (1, 2)])
    with pytest.raises(GraphStateError):
        measure_pauli(s, 0, "X", special_neighbor=2)
    measure_pauli(s, 0, "Z")
    with pytest.raises(GraphStateError):
        measure_pauli(s, 0, "Z")
    with pytest.raises(GraphStateError):
        measure_pauli(new_cluster(1), 0, "X", forced=-1)


@given(st.integers(0, 2**32 - 1), st.sampled_from("XYZ"), st.sampled_from([1, -1]))
def test_rules_match_oracle_projection(seed, basis, forced):
    rng = np.random.default_rng(seed)
    n = 5
    s = GraphState(n, _random_graph(rng, n), vops=[int(v) for v in rng.integers(24, size=n)])
    sv = to_statevector(s)
    a = int(rng.integers(n))
    try:
        out = s.measure_pauli(a, basis, forced=forced)
    except GraphStateError:
        assert sv.probability(a, basis, forced) < 1e-12
        return
    assert out.value == forced
    sv.measure_pauli(a, basis, forced=forced)
    assert abs(np.linalg.norm(sv.amplitudes) - 1) < 1e-10
    assert equal_up_to_phase(to_statevector(s), sv)


def test_local_clifford_examples():
    s = new_cluster(2, [(0, 1)])
    apply_local_clifford(s, 0, "I")
    assert s == new_cluster(2, [(0, 1)])
    apply_local_clifford(s, 1, "H")
    apply_local_clifford(s, 1, "H")
    assert s == new_cluster(2, [(0, 1)])
    # Z-correct the -1 branch of a Z measurement into the +1 branch
    plus_branch = new_cluster(2, [(0, 1)])
    minus_branch = new_cluster(2, [(0, 1)])
    measure_pauli(plus_branch, 0, "Z", forced=1)
    measure_pauli(minus_branch, 0, "Z", forced=-1)
    apply_local_clifford(minus_branch, 1, "Z")
    assert equal_up_to_phase(to_statevector(minus_branch, [1]), to_statevector(plus_branch, [1]))
    oracle = graph_state(2, [(0, 1)])
    oracle.measure_pauli(0, "Z", forced=1)
    assert equal_up_to_phase(to_statevector(minus_branch, [1]), oracle.reduced_pure([1]))


def test_to_statevector_examples():
    assert np.allclose(to_statevector(new_cluster(1)).amplitudes, [2**-0.5] * 2)
    assert np.allclose(to_statevector(new_cluster(2, [(0, 1)])).amplitudes, BELL)
    rng = np.random.default_rng(8)
    edges = _random_graph(rng, 8)
    assert equal_up_to_phase(to_statevector(new_cluster(8, edges)), graph_state(8, edges))
    with pytest.raises(GraphStateError):
        to_statevector(new_cluster(21))


def test_is_bell_pair_examples():
    check = is_bell_pair(new_cluster(2, [(0, 1)]), 0, 1)
    assert check and check.vops == ("I", "I") and check.canonical
    assert not is_bell_pair(new_cluster(2), 0, 1)


@given(st.integers(0, 2**32 - 1))
def test_random_sequences_match_oracle(seed):
    rng = np.random.default_rng(seed)
    g, sv = random_sequence(rng, int(rng.integers(2, 11)), 30)
    assert equal_up_to_phase(to_statevector(g), sv)


def test_outcome_statistics():
    plus = sum(new_cluster(2, [(0, 1)], seed=s).measure_pauli(0, "Z").value == 1 for s in range(2000))
    assert 0.45 <= plus / 2000 <= 0.55
    s = new_cluster(2000)
    freq = sum(s.measure_pauli(v, "Z").value == 1 for v in range(2000)) / 2000
    assert 0.45 <= freq <= 0.55


def test_determinism():
    def run():
        s = new_cluster(6, [(i, i + 1) for i in range(5)], seed=11)
        outs = [s.measure_pauli(v, b).value for v, b in [(1, "Y"), (3, "X"), (4, "Z")]]
        return s, outs

    (s1, o1), (s2, o2) = run(), run()
    assert s1 == s2 and o1 == o2


def test_same_state_across_representations():
    s = new_cluster(4, [(0, 1), (1, 2), (2, 3)])
    t = s.copy()
    t.local_complement(1)
    assert t != s and t.same_state(s)
    t.apply_local_clifford(0, "Z")
    assert not t.same_state(s)


def test_json_round_trip():
    s = new_cluster(5, [(0, 1), (1, 2), (3, 4)], seed=4)
    s.measure_pauli(1, "Y")
    t = GraphState.from_json(s.to_json())
    assert t == s
    assert t.measure_pauli(3, "Z").value == s.measure_pauli(3, "Z").value
