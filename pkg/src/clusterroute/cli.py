"""Command-line driver: ``build``, ``route``, ``verify`` and ``fidelity``.

Every command writes UTF-8 JSON (sorted keys) or DOT. Exit status is 0 when
everything requested succeeded, 1 when a verification or routing check
failed, and 2 on invalid input. The output directory defaults to the
current directory, or ``$CLUSTERROUTE_OUT`` when set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import clifford as cl
from .graphstate import GraphState, GraphStateError, grid_edges
from .lattice import (
    KINDS,
    Lattice,
    LatticeError,
    prepare_schedule,
    prepared_state,
    run_schedule,
    to_dot,
)
from .noise import NoiseError, PauliNoiseModel, compare_geometries, estimate_bell_fidelity, grid_schedule
from .oracle import MAX_QUBITS, OracleError, StateVector, equal_up_to_phase, gate, graph_state, init_plus
from .protocols import (
    CliffordCircuit,
    ProtocolError,
    branches,
    clifford_teleport,
    multi_pauli_rotation,
    prepare_ghz,
    remote_cnot,
    remote_cz,
)
from .routing import (
    STRATEGIES,
    PairRequest,
    RoutingError,
    execute_plan,
    execute_steps,
    l_path,
    load_requests,
    merge_plans,
    plan_cut,
    plan_zipper,
    route_3d,
    route_parallel,
    sequential_two_round,
)

ENV_OUT = "CLUSTERROUTE_OUT"
SUITES = ("remote-cz", "remote-cnot", "ghz-rotation", "teleport")
_ERRORS = (
    LatticeError,
    RoutingError,
    ProtocolError,
    NoiseError,
    OracleError,
    GraphStateError,
    OSError,
    ValueError,
)


class CliError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    lattice: Lattice
    requests: tuple[PairRequest, ...]
    strategy: str
    backend: str
    seed: int
    noise: PauliNoiseModel | None
    out: Path

    def check(self) -> None:
        if self.backend == "oracle" and self.lattice.n > MAX_QUBITS:
            raise CliError(
                f"oracle backend supports at most {MAX_QUBITS} qubits; lattice has {self.lattice.n}"
            )


def _lattice(words: list[str]) -> Lattice:
    if len(words) == 1 and words[0].endswith(".json"):
        return Lattice.from_json(Path(words[0]).read_text(encoding="utf-8"))
    kind, *params = words
    try:
        nums = [int(p) for p in params]
    except ValueError:
        raise CliError(f"lattice parameters must be integers: {params}") from None
    from .lattice import build

    return build(kind, *nums)


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get(ENV_OUT) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, data) -> None:
    text = data if isinstance(data, str) else json.dumps(data, sort_keys=True, indent=2)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


# -- build ------------------------------------------------------------------------


def cmd_build(args) -> int:
    lat = _lattice(args.lattice)
    out = _out_dir(args.out)
    _write(out / "lattice.json", json.dumps(lat.to_dict(), sort_keys=True, indent=2))
    _write(out / "lattice.dot", to_dot(lat))
    sched, _ = prepare_schedule(lat)
    _write(out / "schedule.json", json.dumps(sched.to_dict(), sort_keys=True, indent=2))
    summary = {
        "kind": lat.kind,
        "params": list(lat.params),
        "counts": {r: len(lat.ids(r)) for r in ("data", "auxiliary", "ancilla")},
        "vertices": lat.n,
        "prep_rounds": len(sched),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


# -- route ------------------------------------------------------------------------


def _oracle_start(lat: Lattice, seed: int) -> tuple[GraphState, StateVector]:
    """Raw preparation on both backends, sharing measurement outcomes."""
    sched, _ = prepare_schedule(lat)
    g = GraphState(lat.n, seed=seed)
    outs = run_schedule(sched, g)
    sv = init_plus(lat.n)
    run_schedule(sched, sv, [o.value for o in outs])
    return g, sv


def _route_cluster(cfg: RunConfig) -> tuple:
    lat, reqs = cfg.lattice, list(cfg.requests)
    for r in reqs:
        r.check_roles(lat)
    state, sched, _ = prepared_state(lat, cfg.seed)
    coords = lat.grid_coords()
    log: list = []
    if cfg.strategy == "zipper":
        if coords is None or lat.kind == "cubic3d":
            raise CliError(f"zipper routing needs a 2D grid; {lat.kind} has none")
        done = route_parallel(state, reqs, coords)
        plans = [p for p, _ in done]
        for _, rec in done:
            log += rec.log
    else:
        plans = route_3d(state, reqs)
        log = execute_steps(state, merge_plans(plans))
    rows = []
    for p in plans:
        check = state.is_bell_pair(*p.pair)
        rows.append(
            {
                "pair": list(p.pair),
                "measured_count": len(p.steps),
                "success": bool(check),
                "byproduct": list(check.vops) if check else None,
            }
        )
    return [p.to_dict() for p in plans], rows, state, log, sched


def cmd_route(args) -> int:
    lat = _lattice(args.lattice)
    reqs, strategy = [], args.strategy or "zipper"
    if args.requests:
        reqs, file_strategy = load_requests(Path(args.requests).read_text(encoding="utf-8"))
        strategy = args.strategy or file_strategy
    cfg = RunConfig(lat, tuple(reqs), strategy, args.backend, args.seed, None, _out_dir(args.out))
    cfg.check()
    if strategy == "sequential":
        if reqs:
            sched = sequential_two_round(lat, reqs)
        else:
            from .lattice import Schedule

            sched = Schedule()
        state = GraphState(lat.n, seed=cfg.seed)
        outs = run_schedule(sched, state)
        rows = []
        for r in reqs:
            check = state.is_bell_pair(r.a, r.b)
            rows.append(
                {
                    "pair": [r.a, r.b],
                    "measured_count": len(l_path(lat.grid_coords(), r.a, r.b)) - 2,
                    "success": bool(check),
                    "byproduct": list(check.vops) if check else None,
                }
            )
        plans_doc = {"schedule": sched.to_dict()}
        cz_rounds, m_rounds = sched.cz_rounds, sched.measurement_rounds
        oracle_ok = None
        if cfg.backend == "oracle":
            sv = init_plus(lat.n)
            run_schedule(sched, sv, [o.value for o in outs])
            oracle_ok = equal_up_to_phase(sv, state.to_statevector())
    else:
        plans, rows, state, log, prep = _route_cluster(cfg)
        plans_doc = {"plans": plans}
        cz_rounds, m_rounds = prep.cz_rounds, (1 if plans else 0)
        oracle_ok = None
        if cfg.backend == "oracle":
            _, sv = _oracle_start(lat, cfg.seed)
            for v, basis, o in log:
                sv.measure_pauli(v, basis, forced=o)
            oracle_ok = equal_up_to_phase(sv, state.to_statevector())
    report = {
        "lattice": {"kind": lat.kind, "params": list(lat.params)},
        "strategy": strategy,
        "backend": cfg.backend,
        "seed": cfg.seed,
        "pairs": rows,
        "cz_rounds": cz_rounds,
        "measurement_rounds": m_rounds,
        "success": all(r["success"] for r in rows) and oracle_ok is not False,
    }
    if oracle_ok is not None:
        report["oracle_match"] = oracle_ok
    _write(cfg.out / "plans.json", plans_doc)
    _write(cfg.out / "report.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0 if report["success"] else 1


# -- verify -----------------------------------------------------------------------


def _random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def _fid(expected: np.ndarray, sv: StateVector, keep: list[int]) -> float:
    try:
        red = sv.reduced_pure(keep)
    except ValueError:
        return 0.0
    return float(abs(np.vdot(expected, red.amplitudes)) ** 2)


def verify_remote(kind: str, w: int, h: int, seed: int, strategy: str = "zipper") -> dict:
    """Remote CZ/CNOT through a routed corner pair of a ``w`` by ``h`` cluster."""
    n = w * h + 2
    if n > MAX_QUBITS:
        raise CliError(f"{w}x{h} cluster plus two data qubits exceeds the oracle cap of {MAX_QUBITS}")
    rng = np.random.default_rng(seed)
    g = GraphState(w * h, grid_edges(w, h), seed=seed)
    req = PairRequest(0, w * h - 1)
    coords = {y * w + x: (x, y) for y in range(h) for x in range(w)}
    plan = plan_zipper(g, req, coords) if strategy == "zipper" else plan_cut(g, req)
    rec = execute_plan(g, plan)
    d1, d2 = w * h, w * h + 1
    ideal = np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "remote-cnot":
        ideal = gate("CNOT", 0, 1).unitary()
    fids = []
    for br in branches(2):
        psi = np.kron(_random_qubit(rng), _random_qubit(rng))
        sv = StateVector(np.kron(graph_state(w * h, grid_edges(w, h)).amplitudes, psi))
        for v, basis, o in rec.log:
            sv.measure_pauli(v, basis, forced=o)
        for v in plan.pair:
            sv.apply_matrix(cl.MATRICES[cl.inverse(g.vop[v])], [v])
        fn = remote_cz if kind == "remote-cz" else remote_cnot
        fn(sv, plan.pair, d1, d2, forced=br)
        fids.append(_fid(ideal @ psi, sv, [d1, d2]))
    return {
        "suite": kind,
        "cluster": [w, h],
        "strategy": strategy,
        "measured_count": rec.measured_count,
        "branches": len(fids),
        "fidelity": min(fids),
        "pass": min(fids) > 1 - 1e-9,
    }


def verify_rotation(m: int, alpha: float, seed: int, axes: str | None = None) -> dict:
    if 2 * m > MAX_QUBITS:
        raise CliError(f"m={m} needs {2 * m} qubits, above the oracle cap")
    rng = np.random.default_rng(seed)
    axes = axes or "Z" * m
    from .protocols import PauliString

    target = math.cos(alpha) * np.eye(2**m) - 1j * math.sin(alpha) * PauliString(axes).matrix()
    fids = []
    for br in branches(m):
        psi = StateVector.product([_random_qubit(rng) for _ in range(m)]).amplitudes
        sv = StateVector(np.kron(psi, init_plus(m).amplitudes))
        ghz = prepare_ghz(sv, list(range(m, 2 * m)))
        try:
            multi_pauli_rotation(sv, ghz, list(range(m)), alpha, axes, forced=br)
        except OracleError:
            continue  # zero-probability branch
        fids.append(_fid(target @ psi, sv, list(range(m))))
    return {
        "suite": "ghz-rotation",
        "m": m,
        "alpha": alpha,
        "axes": axes,
        "branches": len(fids),
        "fidelity": min(fids),
        "pass": min(fids) > 1 - 1e-9,
    }


def verify_teleport(circ: CliffordCircuit, seed: int, samples: int = 50) -> dict:
    m = circ.m
    if 3 * m > MAX_QUBITS:
        raise CliError(f"teleporting {m} qubits needs {3 * m} qubits, above the oracle cap")
    rng = np.random.default_rng(seed)
    u = circ.unitary()
    all_branches = list(branches(2 * m))
    picks = rng.permutation(len(all_branches))[: min(samples, len(all_branches))]
    fids = []
    for k in sorted(picks):
        psi = StateVector.product([_random_qubit(rng) for _ in range(m)]).amplitudes
        sv = StateVector(np.kron(psi, init_plus(2 * m).amplitudes))
        data = list(range(m))
        clifford_teleport(
            sv, circ, data, list(range(m, 2 * m)), list(range(2 * m, 3 * m)),
            forced=all_branches[k], swap_back=True,
        )
        fids.append(_fid(u @ psi, sv, data))
    return {
        "suite": "teleport",
        "m": m,
        "gates": len(circ.gates),
        "branches": len(fids),
        "fidelity": min(fids),
        "pass": min(fids) > 1 - 1e-9,
    }


def cmd_verify(args) -> int:
    if args.backend != "oracle":
        raise CliError("verification compares against the statevector oracle; use --backend oracle")
    suites = SUITES if args.suite == "all" else (args.suite,)
    rows = []
    for s in suites:
        if s in ("remote-cz", "remote-cnot"):
            w, h = args.size
            rows.append(verify_remote(s, w, h, args.seed, args.strategy))
        elif s == "ghz-rotation":
            rows.append(verify_rotation(args.m, args.alpha, args.seed, args.axes))
        else:
            if args.circuit:
                circ = CliffordCircuit.parse(Path(args.circuit).read_text(encoding="utf-8"))
            else:
                circ = CliffordCircuit.random(3, 20, np.random.default_rng(args.seed))
            rows.append(verify_teleport(circ, args.seed, args.samples))
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['suite']} fidelity={r['fidelity']:.12f} branches={r['branches']}")
    report = {"seed": args.seed, "results": rows, "pass": all(r["pass"] for r in rows)}
    if args.out or os.environ.get(ENV_OUT):
        _write(_out_dir(args.out) / "verify.json", report)
    return 0 if report["pass"] else 1


# -- fidelity ---------------------------------------------------------------------


def cmd_fidelity(args) -> int:
    model = PauliNoiseModel.from_json(Path(args.noise).read_text(encoding="utf-8"))
    s = args.size
    g = GraphState(s * s, grid_edges(s, s), seed=args.seed)
    coords = {y * s + x: (x, y) for y in range(s) for x in range(s)}
    if args.requests:
        reqs, _ = load_requests(Path(args.requests).read_text(encoding="utf-8"))
    else:
        reqs = [PairRequest(0, s * s - 1)]
    prep = grid_schedule(s, s)
    rows = []
    for r in reqs:
        for strategy in ("cut", "zipper"):
            row = {"geometry": "2d", "shape": [s, s], "pair": [r.a, r.b], "strategy": strategy}
            try:
                plan = plan_cut(g, r) if strategy == "cut" else plan_zipper(g, r, coords)
            except RoutingError as exc:
                row["error"] = str(exc)
                rows.append(row)
                continue
            est = estimate_bell_fidelity(plan, prep, model, args.samples, args.seed, s * s)
            row.update(est.to_dict())
            rows.append(row)
    geo = compare_geometries(args.n, model, args.samples, args.seed)
    report = {"model": json.loads(model.to_json()), "seed": args.seed, "table": rows, "geometries": geo}
    _write(_out_dir(args.out) / "fidelity.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0


# -- entry point ------------------------------------------------------------------


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clusterroute", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write lattice.json, lattice.dot and schedule.json")
    b.add_argument("lattice", nargs="+", help=f"KIND PARAM... ({', '.join(KINDS)}) or a lattice JSON path")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("route", help="plan and execute Bell-pair requests")
    r.add_argument("--lattice", nargs="+", required=True)
    r.add_argument("--requests", help="JSON file {pairs: [[a, b], ...], strategy}")
    r.add_argument("--strategy", choices=STRATEGIES)
    r.add_argument("--backend", choices=("stabilizer", "oracle"), default="stabilizer")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_route)

    v = sub.add_parser("verify", help="check protocols against the statevector oracle")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--backend", choices=("stabilizer", "oracle"), default="oracle")
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--size", type=int, nargs=2, default=(4, 4), metavar=("W", "H"))
    v.add_argument("--strategy", choices=("zipper", "cut"), default="zipper")
    v.add_argument("--m", type=int, default=3)
    v.add_argument("--alpha", type=float, default=0.37)
    v.add_argument("--axes")
    v.add_argument("--circuit", help="Clifford circuit text file (H q / S q / CNOT c t)")
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fidelity", help="Monte Carlo Bell-pair fidelities under Pauli noise")
    f.add_argument("--noise", required=True, help="JSON {p_prep, p_meas, p_gate}")
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--size", type=int, default=8)
    f.add_argument("--n", type=int, default=64)
    f.add_argument("--samples", type=int, default=10000)
    f.add_argument("--requests")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fidelity)
    return p


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, *_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
