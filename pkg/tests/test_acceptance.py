"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion."""

import time

import numpy as np
import pytest
from conftest import grid, overlap, random_product, random_sequence

from clusterroute import clifford as cl
from clusterroute import lattice as L
from clusterroute.graphstate import GraphState, grid_edges, to_statevector
from clusterroute.noise import (
    PauliNoiseModel,
    error_locations,
    estimate_bell_fidelity,
    exact_bell_fidelity,
    grid_schedule,
)
from clusterroute.oracle import OracleError, StateVector, equal_up_to_phase, fidelity, gate, graph_state, init_plus
from clusterroute.protocols import (
    CliffordCircuit,
    PauliString,
    branches,
    clifford_teleport,
    multi_pauli_rotation,
    prepare_ghz,
    remote_cnot,
    remote_cz,
)
from clusterroute.routing import (
    PairRequest,
    execute_steps,
    merge_plans,
    paths_disjoint,
    plan_cut,
    plan_zipper,
    route_3d,
    route_parallel,
    sequential_two_round,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def _pair_fidelity(want, sv, keep):
    return overlap(want, sv.reduced_pure(keep).amplitudes)


def test_criterion_01_graphical_rules(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    bad = 0
    for _ in range(500):
        g, sv = random_sequence(rng, int(rng.integers(2, 11)), int(rng.integers(1, 31)))
        bad += not equal_up_to_phase(to_statevector(g), sv, tol=1e-10)
    elapsed = time.perf_counter() - start
    report(1, bad == 0 and elapsed < 30, f"{500 - bad}/500 sequences match the oracle in {elapsed:.1f}s")


def test_criterion_02_zipper_crossing(report):
    details, ok = [], True
    for size in (6, 8):
        s, c = grid(size, size)
        at = {v: k for k, v in c.items()}
        n = size - 1
        reqs = [PairRequest(at[0, 0], at[n, n]), PairRequest(at[n, 0], at[0, n])]
        log = [t for _, rec in route_parallel(s, reqs, c) for t in rec.log]
        # every measurement of both plans in one round: random order, fresh outcomes
        for seed in range(20):
            g, _ = grid(size, size, seed=seed)
            order = np.random.default_rng(seed).permutation(len(log))
            for k in order:
                g.measure_pauli(log[k][0], log[k][1])
            ok &= all(g.is_bell_pair(r.a, r.b) for r in reqs)
        details.append(f"{size}x{size} one-round ok={ok}")
    for w, h in [(5, 4), (4, 5)]:
        s, c = grid(w, h, seed=1)
        at = {v: k for k, v in c.items()}
        reqs = [PairRequest(at[0, 0], at[w - 1, h - 1]), PairRequest(at[w - 1, 0], at[0, h - 1])]
        recs = [rec for _, rec in route_parallel(s, reqs, c)]
        sv = graph_state(w * h, grid_edges(w, h))
        for rec in recs:
            for v, basis, o in rec.log:
                sv.measure_pauli(v, basis, forced=o)
        f = fidelity(to_statevector(s), sv)
        for r in reqs:
            for v in (r.a, r.b):
                sv.apply_matrix(cl.MATRICES[cl.inverse(s.vop[v])], [v])
            f = min(f, _pair_fidelity(graph_state(2, [(0, 1)]).amplitudes, sv, [r.a, r.b]))
        ok &= abs(f - 1) < 1e-9
        details.append(f"{w}x{h} oracle fidelity {f:.12f}")
    report(2, ok, "; ".join(details))


def test_criterion_03_parallel_capacity(report):
    sizes, means, ok = (6, 8, 10), [], True
    for size in sizes:
        s, c = grid(size, size)
        at = {v: k for k, v in c.items()}
        reqs = [PairRequest(at[2 * k, 0], at[size - 1 - 2 * k, size - 1]) for k in range(size // 2)]
        out = route_parallel(s, reqs, c)
        ok &= len(out) == size // 2 and all(s.is_bell_pair(r.a, r.b) for r in reqs)
        means.append(np.mean([rec.measured_count for _, rec in out]))
    fit = np.polyfit(sizes, means, 1)[0]
    steps = np.diff(means) / np.diff(sizes)
    ok &= fit > 0 and all(abs(s / fit - 1) <= 0.3 for s in steps)
    report(3, ok, f"mean measured counts {np.round(means, 2).tolist()}, fit slope {fit:.2f}, "
                  f"segment slopes {np.round(steps, 2).tolist()}")


def test_criterion_04_remote_gates(report):
    rng = np.random.default_rng(4)
    worst = 1.0
    bell = graph_state(2, [(0, 1)]).amplitudes
    for fn, ideal in ((remote_cz, np.diag([1, 1, 1, -1])), (remote_cnot, gate("CNOT", 0, 1).unitary())):
        for _ in range(20):
            psi = random_product(rng, 2)
            for br in branches(2):
                sv = StateVector(np.kron(psi, bell))
                fn(sv, (2, 3), 0, 1, forced=br)
                worst = min(worst, _pair_fidelity(ideal @ psi, sv, [0, 1]))
    report(4, abs(worst - 1) < 1e-10, f"minimum fidelity {worst:.14f} over 2x20x4 runs")


def test_criterion_05_multi_qubit_rotation(report):
    rng = np.random.default_rng(5)
    worst, runs = 1.0, 0
    for m in (2, 3):
        for alpha in (0.0, np.pi / 2, 0.37):
            psi = random_product(rng, m)
            want = (np.cos(alpha) * np.eye(2**m) - 1j * np.sin(alpha) * PauliString("Z" * m).matrix()) @ psi
            for br in branches(m):
                sv = StateVector(np.kron(psi, init_plus(m).amplitudes))
                ghz = prepare_ghz(sv, list(range(m, 2 * m)))
                try:
                    multi_pauli_rotation(sv, ghz, list(range(m)), alpha, forced=br)
                except OracleError:
                    continue  # branch of probability zero
                runs += 1
                worst = min(worst, _pair_fidelity(want, sv, list(range(m))))
    report(5, abs(worst - 1) < 1e-9 and runs >= 30, f"minimum fidelity {worst:.12f} over {runs} branches")


def test_criterion_06_clifford_teleport(report):
    rng = np.random.default_rng(6)
    circ = CliffordCircuit.random(3, 20, rng)
    u = circ.unitary()
    every = list(branches(6))
    worst = 1.0
    for k in rng.choice(len(every), 50, replace=False):
        psi = random_product(rng, 3)
        sv = StateVector(np.kron(psi, init_plus(6).amplitudes))
        clifford_teleport(sv, circ, [0, 1, 2], [3, 4, 5], [6, 7, 8], forced=every[k], swap_back=True)
        worst = min(worst, _pair_fidelity(u @ psi, sv, [0, 1, 2]))
    report(6, abs(worst - 1) < 1e-9, f"minimum fidelity {worst:.12f} over 50 branches")


def test_criterion_07_honeycomb_schedules(report):
    details, ok = [], True
    for kind, params in [("honeycomb_dense", (1, 1)), ("honeycomb_sparse", (2, 1)), ("honeycomb_sparse", (1, 2))]:
        lat = L.build(kind, *params)
        sched, target = L.prepare_schedule(lat)
        sched.check(lat)
        tidy, _, _ = L.prepared_state(lat, seed=7)
        g = GraphState(lat.n, seed=7)
        outs = L.run_schedule(sched, g)
        sv, _ = L.oracle_replay(lat, sched, forced=[o.value for o in outs])
        f = min(fidelity(to_statevector(g), sv), fidelity(to_statevector(tidy), sv))
        ok &= abs(f - 1) < 1e-9 and set(tidy.edges()) == target
        details.append(f"{kind}{params} phases={len(sched.phases())} fidelity {f:.12f}")
    ok &= len(L.prepare_schedule(L.build_honeycomb_dense(1, 1))[0]) == 7
    ok &= L.prepare_schedule(L.build_honeycomb_sparse(2, 2))[0].phases() == ["vertical", "horizontal"]
    rng = np.random.default_rng(7)
    lat = L.build_honeycomb_dense(2, 1)
    sched, _ = L.prepare_schedule(lat)
    states = {d: random_product(rng, 1) for d in lat.ids("data")}
    plus = np.array([1, 1]) / np.sqrt(2)
    initial = StateVector.product([states.get(v, plus) for v in range(lat.n)])
    sv, _ = L.oracle_replay(lat, sched, initial)
    kept = min(_pair_fidelity(states[d], sv, [d]) for d in states)
    ok &= abs(kept - 1) < 1e-9
    details.append(f"dense data preserved with fidelity {kept:.12f}")
    report(7, ok, "; ".join(details))


def test_criterion_08_3d_advantages(report):
    n = 64
    g2, _ = grid(8, 8)
    d2 = len(plan_cut(g2, PairRequest(0, 63)).path) - 1
    cube = L.build_cubic3d(4, 4, 4)
    g3 = GraphState(cube.n, sorted(cube.couplings))
    d3 = len(plan_cut(g3, PairRequest(0, cube.n - 1)).path) - 1
    ok = d3 <= 3 * n ** (1 / 3) + 1e-9 and d2 <= 2 * n**0.5
    small = L.build_cubic3d(3, 3, 3)
    at = {tuple(v): k for k, v in small.grid_coords().items()}
    gs = GraphState(small.n, sorted(small.couplings))
    plans = route_3d(gs, [PairRequest(at[x, y, 0], at[x, y, 2]) for x in range(3) for y in range(3)])
    ok &= len(plans) == 9 and paths_disjoint(plans)
    big = L.build_cubic3d(5, 5, 5)
    at = {tuple(v): k for k, v in big.grid_coords().items()}
    gb = GraphState(big.n, sorted(big.couplings), seed=8)
    reqs = [PairRequest(at[x, y, 0], at[x, y, 4]) for x in (0, 2, 4) for y in (0, 2, 4)]
    execute_steps(gb, merge_plans(route_3d(gb, reqs)))
    joint = sum(bool(gb.is_bell_pair(r.a, r.b)) for r in reqs)
    ok &= joint == 9
    report(8, ok, f"n=64 distances 2D {d2} (bound 16), 3D {d3} (bound 12); "
                  f"9 disjoint plans on 3x3x3; {joint}/9 pairs from one joint round on 5x5x5")


def test_criterion_09_sequential(report):
    lat = L.build_rect_leaves(6, 6)
    at = {v: k for k, v in lat.grid_coords().items()}
    reqs = [PairRequest(at[0, 2], at[4, 5]), PairRequest(at[5, 0], at[2, 4])]
    sched = sequential_two_round(lat, reqs)
    ok = sched.cz_rounds == 2 and sched.measurement_rounds == 2 and len(sched) == 4
    good = 0
    for seed in range(10):
        g = GraphState(lat.n, seed=seed)
        L.run_schedule(sched, g)
        good += all(g.is_bell_pair(r.a, r.b) for r in reqs)
    ok &= good == 10
    report(9, ok, f"{sched.cz_rounds} CZ rounds, {sched.measurement_rounds} measurement rounds, "
                  f"both pairs verified in {good}/10 runs")


def test_criterion_10_fidelity(report):
    start = time.perf_counter()
    edges = [(i, i + 1) for i in range(4)]
    prep = L.Schedule((L.Round(tuple(L.cz(*e) for e in edges), "cluster:cz"),))
    plan = plan_cut(GraphState(5, edges), PairRequest(0, 4))
    details, ok = [], True
    for model in (PauliNoiseModel(p_meas=0.1), PauliNoiseModel(p_prep=0.05), PauliNoiseModel(p_gate=0.05)):
        nloc = len(error_locations(plan, prep, model))
        exact = exact_bell_fidelity(plan, prep, model)
        est = estimate_bell_fidelity(plan, prep, model, 100_000, seed=10)
        z = abs(est.mean - exact) / est.stderr
        ok &= nloc <= 6 and z <= 3
        details.append(f"{nloc} locations: MC {est.mean:.4f} vs exact {exact:.4f} ({z:.1f} sigma)")
    g, c = grid(8, 8)
    req = PairRequest(0, 63)
    prep8 = grid_schedule(8, 8)
    model = PauliNoiseModel(p_meas=0.01)
    fc = estimate_bell_fidelity(plan_cut(g, req), prep8, model, 20_000, seed=10)
    fz = estimate_bell_fidelity(plan_zipper(g, req, c), prep8, model, 20_000, seed=10)
    ok &= fz.mean >= fc.mean
    details.append(f"8x8 p_meas=0.01 zipper {fz.mean:.4f} >= cut {fc.mean:.4f}")
    zero = estimate_bell_fidelity(plan_cut(g, req), prep8, PauliNoiseModel(), 1000, seed=10).mean
    ok &= zero == 1.0
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    details.append(f"zero noise {zero}; {elapsed:.1f}s")
    report(10, ok, "; ".join(details))
