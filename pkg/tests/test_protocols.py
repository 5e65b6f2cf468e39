import itertools

import numpy as np
import pytest
from conftest import grid, overlap, random_product, random_qubit
from hypothesis import given
from hypothesis import strategies as st

from clusterroute import clifford as cl
from clusterroute.graphstate import GraphState, grid_edges, to_statevector
from clusterroute.lattice import build_rect_leaves
from clusterroute.oracle import OracleError, StateVector, gate, graph_state, init_plus
from clusterroute.protocols import (
    CliffordCircuit,
    GhzResource,
    PauliString,
    ProtocolError,
    apply_diagonal,
    branches,
    clifford_teleport,
    diagonal_terms,
    make_ghz,
    multi_pauli_rotation,
    pauli_conjugate,
    prepare_ghz,
    remote_cnot,
    remote_cz,
)
from clusterroute.routing import PairRequest, execute_plan, plan_zipper

CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = gate("CNOT", 0, 1).unitary()
ZERO, ONE = np.array([1, 0], complex), np.array([0, 1], complex)
PLUS = np.array([1, 1], complex) / np.sqrt(2)


def _with_bell(psi):
    """Data state ``psi`` on qubits 0, 1 and a canonical Bell pair on 2, 3."""
    return StateVector(np.kron(psi, graph_state(2, [(0, 1)]).amplitudes))


def _data_fidelity(want, sv, keep):
    return overlap(want, sv.reduced_pure(keep).amplitudes)


# -- Pauli strings -------------------------------------------------------------


def test_pauli_string_basics():
    p = PauliString.parse("-iXZ")
    assert p.sign == -1j and str(p) == "-iXZ"
    assert str(PauliString.parse("X") * PauliString.parse("Z")) == "-iY"
    assert not PauliString.parse("XI").commutes(PauliString.parse("ZI"))
    assert PauliString.parse("XX").commutes(PauliString.parse("ZZ"))
    with pytest.raises(ProtocolError):
        PauliString.parse("XQ")
    with pytest.raises(ProtocolError):
        PauliString.parse("X") * PauliString.parse("XX")


paulis = st.tuples(st.text("IXYZ", min_size=3, max_size=3), st.integers(0, 3))


@given(paulis, paulis)
def test_pauli_algebra_matches_matrices(a, b):
    p, q = PauliString(*a), PauliString(*b)
    assert np.allclose((p * q).matrix(), p.matrix() @ q.matrix())
    comm = p.matrix() @ q.matrix() - q.matrix() @ p.matrix()
    assert p.commutes(q) == np.allclose(comm, 0)


def test_pauli_conjugate_examples():
    assert str(pauli_conjugate(CliffordCircuit(1, (("H", (0,)),)), PauliString("X"))) == "+Z"
    cnot = CliffordCircuit(2, (("CNOT", (0, 1)),))
    assert str(pauli_conjugate(cnot, PauliString("XI"))) == "+XX"
    assert str(pauli_conjugate(cnot, PauliString("IZ"))) == "+ZZ"
    with pytest.raises(ProtocolError):
        pauli_conjugate(cnot, PauliString("X"))


@given(st.integers(0, 2**32 - 1), paulis)
def test_pauli_conjugate_matches_dense(seed, drawn):
    rng = np.random.default_rng(seed)
    circ = CliffordCircuit.random(4, 15, rng)
    u = circ.unitary()
    p = PauliString(drawn[0] + "Z", drawn[1] * 2)
    got = pauli_conjugate(circ, p)
    assert np.allclose(got.matrix(), u @ p.matrix() @ u.conj().T)


def test_circuit_text_round_trip():
    text = "H 0\nS 1  # phase\n\nCNOT 0 2\n"
    circ = CliffordCircuit.parse(text)
    assert circ.m == 3 and len(circ.gates) == 3
    assert CliffordCircuit.parse(circ.to_text()) == circ
    with pytest.raises(ProtocolError):
        CliffordCircuit.parse("T 0")
    with pytest.raises(ProtocolError):
        CliffordCircuit.parse("CNOT 0 3", m=2)
    with pytest.raises(ProtocolError):
        CliffordCircuit.parse("H x")


# -- remote gates --------------------------------------------------------------


def test_remote_cz_examples():
    sv = _with_bell(np.kron(PLUS, PLUS))
    remote_cz(sv, (2, 3), 0, 1)
    assert _data_fidelity(graph_state(2, [(0, 1)]).amplitudes, sv, [0, 1]) == pytest.approx(1)
    rng = np.random.default_rng(0)
    psi = np.kron(ZERO, random_qubit(rng))
    sv = _with_bell(psi)
    remote_cz(sv, (2, 3), 0, 1)
    assert _data_fidelity(psi, sv, [0, 1]) == pytest.approx(1)


@pytest.mark.parametrize("fn,ideal", [(remote_cz, CZ), (remote_cnot, CNOT)])
def test_remote_gates_all_branches(fn, ideal):
    rng = np.random.default_rng(1)
    for _ in range(20):
        psi = random_product(rng, 2)
        for br in branches(2):
            sv = _with_bell(psi)
            assert fn(sv, (2, 3), 0, 1, forced=br) == br
            assert _data_fidelity(ideal @ psi, sv, [0, 1]) == pytest.approx(1, abs=1e-10)


def test_remote_cnot_truth_table():
    sv = _with_bell(np.kron(ONE, ZERO))
    remote_cnot(sv, (2, 3), 0, 1)
    assert _data_fidelity(np.kron(ONE, ONE), sv, [0, 1]) == pytest.approx(1)
    psi = np.kron(ZERO, random_qubit(np.random.default_rng(2)))
    sv = _with_bell(psi)
    remote_cnot(sv, (2, 3), 0, 1)
    assert _data_fidelity(psi, sv, [0, 1]) == pytest.approx(1)


def test_remote_cz_through_routed_pair():
    g, c = grid(3, 3, seed=4)
    plan = plan_zipper(g, PairRequest(0, 8), c)
    rec = execute_plan(g, plan)
    rng = np.random.default_rng(3)
    for br in branches(2):
        psi = random_product(rng, 2)
        sv = StateVector(np.kron(graph_state(9, grid_edges(3, 3)).amplitudes, psi))
        for v, basis, o in rec.log:
            sv.measure_pauli(v, basis, forced=o)
        with pytest.raises(ProtocolError):
            remote_cz(sv, rec, 9, 10, forced=br)
        for v in rec.pair:
            sv.apply_matrix(cl.MATRICES[cl.inverse(g.vop[v])], [v])
        remote_cz(sv, rec, 9, 10, forced=br)
        assert _data_fidelity(CZ @ psi, sv, [9, 10]) == pytest.approx(1, abs=1e-10)


def test_remote_cz_on_stabilizer_backend():
    g = GraphState(4, [(2, 3)], vops=["H", "I", "I", "I"])
    before = to_statevector(g)
    remote_cz(g, (2, 3), 0, 1, forced=(-1, 1))
    want = StateVector(np.kron(CZ @ before.reduced_pure([0, 1]).amplitudes, [1]))
    assert overlap(to_statevector(g, [0, 1]).amplitudes, want.amplitudes) == pytest.approx(1)


def test_remote_cz_preconditions():
    sv = StateVector(np.kron(np.kron(PLUS, PLUS), graph_state(2, [(0, 1)]).amplitudes))
    sv.apply(gate("H", 2))
    with pytest.raises(ProtocolError):
        remote_cz(sv, (2, 3), 0, 1)
    lat = build_rect_leaves(3, 3)
    d = lat.ids("data")[0]
    far = [a for a in lat.ids("auxiliary") if not lat.coupled(d, a)]
    g = GraphState(lat.n, [(far[0], far[1])])
    with pytest.raises(ProtocolError):
        remote_cz(g, (far[0], far[1]), d, lat.ids("data")[1], lattice=lat)


def test_remote_cz_composition():
    rng = np.random.default_rng(5)
    psi = random_product(rng, 3)
    sv = StateVector(np.kron(psi, np.kron(graph_state(2, [(0, 1)]).amplitudes, graph_state(2, [(0, 1)]).amplitudes)))
    remote_cz(sv, (3, 4), 0, 1)
    remote_cz(sv, (5, 6), 1, 2)
    ideal = np.kron(np.eye(2), CZ) @ np.kron(CZ, np.eye(2))
    assert _data_fidelity(ideal @ psi, sv, [0, 1, 2]) == pytest.approx(1, abs=1e-9)


# -- GHZ -----------------------------------------------------------------------


def _replay(w, h, log):
    sv = graph_state(w * h, grid_edges(w, h))
    for v, basis, o in log:
        sv.measure_pauli(v, basis, forced=o)
    return sv


def test_make_ghz_two_is_a_bell_pair():
    g, c = grid(4, 4)
    ghz = make_ghz(g, [0, 15], c)
    assert ghz.root == 0 and ghz.leaves == (15,)
    assert g.is_bell_pair(0, 15)


def test_make_ghz_three():
    g, c = grid(5, 5)
    ghz = make_ghz(g, [0, 12, 24], c)
    assert ghz.root == 12 and ghz.is_star(g)
    assert [g.adj[v] for v in ghz.leaves] == [{12}, {12}]


@pytest.mark.parametrize("targets", [[0, 2, 4], [0, 12, 19], [0, 2, 4, 15, 19]])
def test_make_ghz_oracle(targets):
    g, c = grid(5, 4, seed=6)
    ghz = make_ghz(g, targets, c)
    assert ghz.is_star(g) and set(ghz.qubits) == set(targets)
    sv = _replay(5, 4, ghz.log)
    assert overlap(to_statevector(g).amplitudes, sv.amplitudes) == pytest.approx(1, abs=1e-9)
    for v in ghz.qubits:
        sv.apply_matrix(cl.MATRICES[cl.inverse(g.vop[v])], [v])
    star = graph_state(ghz.m, [(0, k) for k in range(1, ghz.m)])
    assert overlap(sv.reduced_pure(list(ghz.qubits)).amplitudes, star.amplitudes) == pytest.approx(1, abs=1e-9)


def test_make_ghz_five_on_larger_cluster():
    g, c = grid(7, 7)
    at = {v: k for k, v in c.items()}
    targets = [at[p] for p in [(0, 0), (3, 0), (6, 0), (0, 6), (6, 6)]]
    ghz = make_ghz(g, targets, c)
    assert ghz.m == 5 and ghz.is_star(g)


def test_make_ghz_explicit_helpers():
    g, c = grid(4, 5, seed=2)
    at = {v: k for k, v in c.items()}
    targets = [at[p] for p in [(0, 0), (0, 2), (0, 4), (3, 0), (3, 4)]]
    ghz = make_ghz(g, targets, c, helpers=[(at[2, 2], at[3, 2])])
    assert ghz.is_star(g)
    sv = _replay(4, 5, ghz.log)
    assert overlap(to_statevector(g).amplitudes, sv.amplitudes) == pytest.approx(1, abs=1e-9)


def test_make_ghz_errors():
    g = GraphState(4, [(0, 1), (2, 3)])
    with pytest.raises(ProtocolError):
        make_ghz(g, [0, 3])


@pytest.mark.parametrize("m", [3, 4, 5])
def test_ghz_even_leaf_parity_leaves_root_plus(m):
    g = GraphState(m, seed=m)
    ghz = prepare_ghz(g, list(range(m)))
    for outs in branches(m - 1):
        if np.prod(outs) != 1:
            continue
        s = g.copy()
        for v, o in zip(ghz.leaves, outs):
            s.measure_pauli(v, "Z", forced=o)
        assert s.stabilizes({ghz.root: "X"})


def test_ghz_canonicalize():
    g, c = grid(5, 5)
    ghz = make_ghz(g, [0, 12, 24], c)
    ghz.canonicalize(g)
    assert all(g.vop[v] == cl.IDENTITY for v in ghz.qubits)
    g.apply_cz(0, 24)
    with pytest.raises(ProtocolError):
        ghz.canonicalize(g)
    assert GhzResource(0, (1,)).m == 2


# -- multi-qubit rotations -----------------------------------------------------


def _rotation(axes, alpha):
    return np.cos(alpha) * np.eye(2 ** len(axes)) - 1j * np.sin(alpha) * PauliString(axes).matrix()


def _run_rotation(psi, m, alpha, axes, br):
    sv = StateVector(np.kron(psi, init_plus(m).amplitudes))
    ghz = prepare_ghz(sv, list(range(m, 2 * m)))
    multi_pauli_rotation(sv, ghz, list(range(m)), alpha, axes, forced=br)
    return sv


@pytest.mark.parametrize("m", [2, 3])
@pytest.mark.parametrize("alpha", [0.0, np.pi / 2, 0.37])
def test_rotation_all_branches(m, alpha):
    rng = np.random.default_rng(m)
    psi = random_product(rng, m)
    want = _rotation("Z" * m, alpha) @ psi
    done = 0
    for br in branches(m):
        try:
            sv = _run_rotation(psi, m, alpha, None, br)
        except OracleError:
            continue
        done += 1
        assert _data_fidelity(want, sv, list(range(m))) == pytest.approx(1, abs=1e-9)
    assert done >= 2 ** (m - 1)


def test_rotation_half_pi_is_zz():
    psi = random_product(np.random.default_rng(9), 2)
    sv = _run_rotation(psi, 2, np.pi / 2, None, (1, 1))
    assert np.allclose(_rotation("ZZ", np.pi / 2), -1j * PauliString("ZZ").matrix())
    assert _data_fidelity(PauliString("ZZ").matrix() @ psi, sv, [0, 1]) == pytest.approx(1, abs=1e-10)


@given(st.integers(0, 2**32 - 1), st.text("XYZ", min_size=2, max_size=3), st.floats(-3, 3))
def test_rotation_other_axes(seed, axes, alpha):
    rng = np.random.default_rng(seed)
    m = len(axes)
    psi = random_product(rng, m)
    br = tuple(int(b) for b in rng.choice([1, -1], m))
    try:
        sv = _run_rotation(psi, m, alpha, axes, br)
    except OracleError:
        return
    assert _data_fidelity(_rotation(axes, alpha) @ psi, sv, list(range(m))) == pytest.approx(1, abs=1e-9)


def test_rotation_on_stabilizer_backend():
    g = GraphState(4, vops=["H", "I", "I", "I"])
    before = to_statevector(g, [0, 1]).amplitudes
    ghz = prepare_ghz(g, [2, 3])
    multi_pauli_rotation(g, ghz, [0, 1], np.pi / 4, forced=(1, -1))
    want = _rotation("ZZ", np.pi / 4) @ before
    assert overlap(to_statevector(g, [0, 1]).amplitudes, want) == pytest.approx(1)
    g = GraphState(4)
    ghz = prepare_ghz(g, [2, 3])
    with pytest.raises(ProtocolError):
        multi_pauli_rotation(g, ghz, [0, 1], 0.37)


@given(st.lists(st.floats(-np.pi, np.pi), min_size=8, max_size=8))
def test_diagonal_terms_reconstruct(phases):
    terms = diagonal_terms(phases)
    diag = np.ones(8, complex)
    for k in range(8):
        bits = [(k >> (2 - q)) & 1 for q in range(3)]
        for subset, alpha in terms:
            z = (-1) ** sum(bits[q] for q in subset)
            diag[k] *= np.exp(-1j * alpha * z)
    ratio = diag / np.exp(1j * np.array(phases))
    assert np.allclose(ratio, ratio[0])


def test_toffoli_phase_synthesis():
    rng = np.random.default_rng(11)
    psi = random_product(rng, 3)
    phases = [0.0] * 7 + [np.pi]
    sv = StateVector(np.kron(psi, init_plus(9).amplitudes))
    apply_diagonal(sv, [0, 1, 2], phases, list(range(3, 12)))
    want = np.diag([1] * 7 + [-1]) @ psi
    assert _data_fidelity(want, sv, [0, 1, 2]) == pytest.approx(1, abs=1e-8)
    with pytest.raises(ProtocolError):
        apply_diagonal(StateVector(np.kron(psi, init_plus(2).amplitudes)), [0, 1, 2], phases, [3, 4])


# -- Clifford teleportation ----------------------------------------------------


def _teleport(circ, psi, br, swap_back=True):
    m = circ.m
    sv = StateVector(np.kron(psi, init_plus(2 * m).amplitudes))
    clifford_teleport(sv, circ, list(range(m)), list(range(m, 2 * m)), list(range(2 * m, 3 * m)), br, swap_back)
    return sv


def test_teleport_identity():
    psi = random_product(np.random.default_rng(0), 2)
    for br in branches(4):
        sv = _teleport(CliffordCircuit(2), psi, br)
        assert _data_fidelity(psi, sv, [0, 1]) == pytest.approx(1, abs=1e-9)


def test_teleport_cnot_truth_table():
    circ = CliffordCircuit.parse("CNOT 0 1")
    for br in branches(4):
        sv = _teleport(circ, np.kron(ONE, ZERO), br)
        assert _data_fidelity(np.kron(ONE, ONE), sv, [0, 1]) == pytest.approx(1, abs=1e-9)
        out = _teleport(circ, np.kron(ONE, ZERO), br, swap_back=False)
        assert _data_fidelity(np.kron(ONE, ONE), out, [4, 5]) == pytest.approx(1, abs=1e-9)


def test_teleport_random_clifford():
    rng = np.random.default_rng(21)
    circ = CliffordCircuit.random(3, 20, rng)
    u = circ.unitary()
    every = list(branches(6))
    for k in rng.choice(len(every), 50, replace=False):
        psi = random_product(rng, 3)
        sv = _teleport(circ, psi, every[k])
        assert _data_fidelity(u @ psi, sv, [0, 1, 2]) == pytest.approx(1, abs=1e-9)


def test_teleport_on_stabilizer_backend():
    circ = CliffordCircuit.parse("H 0\nCNOT 0 1\nS 1")
    g = GraphState(6, vops=["X", "H", "I", "I", "I", "I"])
    before = to_statevector(g, [0, 1]).amplitudes
    clifford_teleport(g, circ, [0, 1], [2, 3], [4, 5], swap_back=True)
    assert overlap(to_statevector(g, [0, 1]).amplitudes, circ.unitary() @ before) == pytest.approx(1)


def test_branches():
    assert len(list(branches(3))) == 8
    assert set(itertools.chain.from_iterable(branches(2))) == {1, -1}
