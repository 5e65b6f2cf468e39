"""Monte Carlo Pauli-noise estimates of Bell-pair fidelity.

Errors enter at three kinds of location:

* ``prep``: a single-qubit depolarizing error on each ``|+>`` before the
  preparation CZs (storage noise is folded in here),
* ``gate``: a two-qubit depolarizing error after each preparation CZ,
* ``meas``: a flip of the recorded outcome of each plan measurement.

Depolarizing errors are uniform over the non-identity Paulis. Each sampled
error is pushed to the measurement layer by Clifford propagation. There it
flips the outcomes it anticommutes with and leaves a residual on the output
pair. The corrections an experimenter applies for those flipped outcomes are
Paulis, found once per measured qubit by re-running the stabilizer
simulation with that single outcome flipped. A sample succeeds when the
leftover Pauli on the pair is in the stabilizer group of the target Bell
state, so the per-sample cost is linear in the number of locations.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import clifford as cl
from .graphstate import GraphState, GraphStateError, grid_edges
from .lattice import Round, Schedule, build_cubic3d, cz, prepare_schedule
from .protocols import propagate
from .routing import (
    MeasurementPlan,
    PairRequest,
    RoutingError,
    execute_plan,
    plan_cut,
    plan_zipper,
)

CHUNK = 1 << 14
# (x_a, z_a, x_b, z_b) packed as x_a | z_a << 1 | x_b << 2 | z_b << 3
_BELL_GROUP = (0b0000, 0b1001, 0b0110, 0b1111)


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class PauliNoiseModel:
    p_prep: float = 0.0
    p_meas: float = 0.0
    p_gate: float = 0.0

    def __post_init__(self) -> None:
        for name, p in asdict(self).items():
            if not 0.0 <= p <= 0.25:
                raise NoiseError(f"{name}={p} is outside [0, 0.25]")

    @classmethod
    def from_dict(cls, d: Mapping) -> PauliNoiseModel:
        extra = set(d) - {"p_prep", "p_meas", "p_gate"}
        if extra:
            raise NoiseError(f"unknown noise fields {sorted(extra)}")
        return cls(**{k: float(v) for k, v in d.items()})

    @classmethod
    def from_json(cls, text: str) -> PauliNoiseModel:
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    stderr: float
    samples: int
    measured_count: int

    @classmethod
    def from_scores(cls, hits: int, samples: int, measured_count: int) -> FidelityEstimate:
        m = hits / samples
        return cls(m, math.sqrt(m * (1 - m) / samples), samples, measured_count)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Location:
    """One error site: ``kind``, the qubits or measurement it touches, and
    the packed pair residual for each non-identity choice."""

    kind: str
    where: tuple[int, ...]
    prob: float
    codes: np.ndarray

    def choices(self) -> int:
        return len(self.codes)


def measured_qubit_count(plan: MeasurementPlan) -> int:
    return len(set(plan.vertices))


# -- reference analysis -----------------------------------------------------------


def _prep_gates(prep: Schedule) -> list[tuple[str, tuple[int, ...]]]:
    gates = []
    for op in prep.ops():
        if op.op == "MEASURE":
            raise NoiseError("preparation schedules with measurements are not supported")
        gates.append((op.op, op.qubits))
    return gates


def _qubit_count(plan: MeasurementPlan, gates, n: int | None) -> int:
    top = max([*plan.pair, *plan.vertices, *(q for _, qs in gates for q in qs)])
    if n is None:
        return top + 1
    if top >= n:
        raise NoiseError(f"qubit {top} outside a {n}-qubit register")
    return n


def _pair_bits(vops: tuple[int, int], paulis: tuple[str, str]) -> int:
    """Pack the pair Pauli pulled back through the reference vertex operators."""
    code = 0
    for k, (v, p) in enumerate(zip(vops, paulis)):
        if p == "I":
            continue
        q = cl.pull_back(v, p)[1]
        code |= (q in "XY") << (2 * k) | (q in "ZY") << (2 * k + 1)
    return code


@dataclass
class _Reference:
    n: int
    gates: list
    plan: MeasurementPlan
    bases: dict[int, str]
    vops: tuple[int, int]
    flips: dict[int, int]


def _reference(plan: MeasurementPlan, gates, n: int, seed: int) -> _Reference:
    g = GraphState(n, seed=seed)
    for name, qs in gates:
        g.apply_cz(*qs) if name == "CZ" else g.swap(*qs)
    start = g.copy()
    rec = execute_plan(g, plan)
    a, b = plan.pair
    vops = (g.vop[a], g.vop[b])
    outs = rec.outcomes
    bases = {v: p for v, p, _ in rec.log}
    flips = {}
    for k in plan.vertices:
        h = start.copy()
        forced = dict(outs)
        forced[k] = -outs[k]
        try:
            execute_plan(h, plan, forced)
        except GraphStateError:
            # deterministic outcome: the flipped value never occurs
            flips[k] = 0
            continue
        paulis = []
        for v, v0 in zip(plan.pair, vops):
            f = cl.compose(h.vop[v], cl.inverse(v0))
            name = cl.NAMES[f]
            if name not in ("I", "X", "Y", "Z"):
                raise NoiseError(f"correction for vertex {k} is not a Pauli")
            paulis.append(name)
        flips[k] = _pair_bits(vops, tuple(paulis))
    return _Reference(n, gates, plan, bases, vops, flips)


def _residual_codes(ref: _Reference, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Pair residual code for each propagated Pauli in the batch."""
    a, b = ref.plan.pair
    code = np.zeros(len(x), dtype=np.uint8)
    # pull-back through the reference vops is linear on the symplectic bits
    for q, shift, v in ((a, 0, ref.vops[0]), (b, 2, ref.vops[1])):
        imx = _pull_bits(v, "X")
        imz = _pull_bits(v, "Z")
        xs, zs = x[:, q], z[:, q]
        cx = (xs & imx[0]) ^ (zs & imz[0])
        cz_ = (xs & imx[1]) ^ (zs & imz[1])
        code |= (cx << shift) | (cz_ << (shift + 1))
    for k, basis in ref.bases.items():
        if basis == "X":
            anti = z[:, k]
        elif basis == "Z":
            anti = x[:, k]
        else:
            anti = x[:, k] ^ z[:, k]
        code ^= anti * np.uint8(ref.flips[k])
    return code


def _pull_bits(v: int, p: str) -> tuple[int, int]:
    q = cl.pull_back(v, p)[1]
    return int(q in "XY"), int(q in "ZY")


def _paulis(width: int) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for bits in range(1, 4**width):
        x = np.array([(bits >> (2 * j)) & 1 for j in range(width)], dtype=np.uint8)
        z = np.array([(bits >> (2 * j + 1)) & 1 for j in range(width)], dtype=np.uint8)
        out.append((x, z))
    return out


def _region(plan: MeasurementPlan, gates) -> set[int]:
    core = set(plan.vertices) | set(plan.pair)
    out = set(core)
    for name, (i, j) in gates:
        if i in core or j in core:
            out |= {i, j}
    return out


def error_locations(
    plan: MeasurementPlan,
    prep: Schedule,
    model: PauliNoiseModel,
    seed: int = 0,
    n: int | None = None,
) -> list[Location]:
    """Error sites with nonzero probability that can reach the plan or the pair.

    A preparation or gate error on a qubit that shares no preparation gate
    with a plan or pair qubit cannot spread to them, so it is skipped.
    """
    gates = _prep_gates(prep)
    if any(name == "SWAP" for name, _ in gates):
        raise NoiseError("noise estimates need a CZ-only preparation schedule")
    n = _qubit_count(plan, gates, n)
    ref = _reference(plan, gates, n, seed)
    region = _region(plan, gates)
    locs: list[Location] = []

    def push(kind, where, prob, start, width):
        ps = _paulis(width)
        x = np.zeros((len(ps), n), dtype=np.uint8)
        z = np.zeros((len(ps), n), dtype=np.uint8)
        for r, (px, pz) in enumerate(ps):
            x[r, list(where)] = px
            z[r, list(where)] = pz
        propagate(gates[start:], x, z)
        locs.append(Location(kind, where, prob, _residual_codes(ref, x, z)))

    if model.p_prep > 0:
        for q in sorted(region):
            push("prep", (q,), model.p_prep, 0, 1)
    if model.p_gate > 0:
        for g, (name, qs) in enumerate(gates):
            if set(qs) & region:
                push("gate", qs, model.p_gate, g + 1, 2)
    if model.p_meas > 0:
        for k in plan.vertices:
            locs.append(Location("meas", (k,), model.p_meas, np.array([ref.flips[k]], np.uint8)))
    return locs


def _success(code: np.ndarray) -> np.ndarray:
    return np.isin(code, _BELL_GROUP)


def _chunk_hits(locs: Sequence[Location], size: int, seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    res = np.zeros(size, dtype=np.uint8)
    for loc in locs:
        u = rng.random(size)
        hit = u < loc.prob
        if not hit.any():
            continue
        pick = np.minimum((u[hit] / loc.prob * loc.choices()).astype(int), loc.choices() - 1)
        res[hit] ^= loc.codes[pick]
    return int(_success(res).sum())


def estimate_bell_fidelity(
    plan: MeasurementPlan,
    prep: Schedule,
    model: PauliNoiseModel,
    samples: int,
    seed: int,
    n: int | None = None,
    workers: int = 1,
) -> FidelityEstimate:
    """Monte Carlo probability that the corrected pair is the target Bell state.

    ``plan`` must have been made for the state ``prep`` produces from
    ``|+>`` on every qubit. Samples are drawn in fixed-size chunks, each
    with its own substream of ``seed``, so the estimate does not depend on
    ``workers``.
    """
    if samples < 100:
        raise NoiseError("need at least 100 samples")
    locs = error_locations(plan, prep, model, seed, n)
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(lambda j: _chunk_hits(locs, *j), jobs))
    else:
        hits = sum(_chunk_hits(locs, *j) for j in jobs)
    return FidelityEstimate.from_scores(hits, samples, measured_qubit_count(plan))


# -- exact enumeration oracle -----------------------------------------------------


def _patterns(locs: Sequence[Location]) -> Iterator[tuple[float, list[int]]]:
    """Every assignment of an error choice (0 = none) to each location."""

    def rec(i, prob, picks):
        if i == len(locs):
            yield prob, picks
            return
        loc = locs[i]
        yield from rec(i + 1, prob * (1 - loc.prob), picks + [0])
        for c in range(1, loc.choices() + 1):
            yield from rec(i + 1, prob * loc.prob / loc.choices(), picks + [c])

    yield from rec(0, 1.0, [])


def _letters(width: int, choice: int) -> list[str]:
    """Letters of the ``choice``-th Pauli in the ordering used by :func:`_paulis`."""
    bits = choice
    out = []
    for _ in range(width):
        out.append("IXZY"[bits & 1 | (bits >> 1 & 1) << 1])
        bits >>= 2
    return out


def exact_bell_fidelity(
    plan: MeasurementPlan,
    prep: Schedule,
    model: PauliNoiseModel,
    seed: int = 0,
    n: int | None = None,
    max_locations: int = 8,
) -> float:
    """Exhaustive-enumeration fidelity for a handful of error locations.

    Every error pattern is simulated directly: the Paulis are inserted into
    the preparation, the plan bases are measured on the noisy state, the
    recorded outcomes are perturbed by the readout errors, and the correction
    an experimenter derives from a clean run with those outcomes is applied.
    No error propagation rules are used.
    """
    locs = error_locations(plan, prep, model, seed, n)
    if len(locs) > max_locations:
        raise NoiseError(f"{len(locs)} error locations exceed the enumeration cap")
    gates = _prep_gates(prep)
    n = _qubit_count(plan, gates, n)
    clean = GraphState(n, seed=seed)
    for _, qs in gates:
        clean.apply_cz(*qs)
    bases = {v: p for v, p, _ in execute_plan(clean.copy(), plan).log}
    a, b = plan.pair
    total = 0.0
    rng = np.random.default_rng(seed)
    for prob, picks in _patterns(locs):
        if prob == 0:
            continue
        chosen = {(loc.kind, loc.where): c for loc, c in zip(locs, picks) if c}
        g = GraphState(n, seed=int(rng.integers(1 << 31)))
        for q in range(n):
            c = chosen.get(("prep", (q,)))
            if c:
                g.apply_local_clifford(q, _letters(1, c)[0])
        for _, qs in gates:
            g.apply_cz(*qs)
            c = chosen.get(("gate", qs))
            if c:
                for q, p in zip(qs, _letters(2, c)):
                    if p != "I":
                        g.apply_local_clifford(q, p)
        seen = {}
        for s in plan.steps:
            seen[s.vertex] = g.measure_pauli(s.vertex, bases[s.vertex]).value
            if chosen.get(("meas", (s.vertex,))):
                seen[s.vertex] = -seen[s.vertex]
        h = clean.copy()
        for s in plan.steps:
            try:
                h.measure_pauli(s.vertex, bases[s.vertex], seen[s.vertex])
            except GraphStateError:
                h.measure_pauli(s.vertex, bases[s.vertex])
        for v in (a, b):
            g.apply_local_clifford(v, cl.inverse(h.vop[v]))
        if g.stabilizes({a: "X", b: "Z"}) and g.stabilizes({a: "Z", b: "X"}):
            total += prob
    return total


# -- geometry comparison ---------------------------------------------------------


def grid_schedule(w: int, h: int) -> Schedule:
    """One CZ round preparing a bare ``w`` by ``h`` cluster."""
    return Schedule((Round(tuple(cz(i, j) for i, j in grid_edges(w, h)), "cluster:cz"),))


def _estimate_row(plan, prep, n, model, samples, seed) -> dict:
    est = estimate_bell_fidelity(plan, prep, model, samples, seed, n)
    return {
        "path_length": len(plan.path) - 1,
        "measured_count": est.measured_count,
        "mean": est.mean,
        "stderr": est.stderr,
    }


def compare_geometries(n: int, model: PauliNoiseModel, samples: int, seed: int = 0) -> dict:
    """Corner-to-corner Bell pairs on a square grid and a cube of about ``n`` qubits."""
    s2 = max(2, round(math.sqrt(n)))
    s3 = max(2, round(n ** (1 / 3)))
    g2 = GraphState(s2 * s2, grid_edges(s2, s2), seed=seed)
    coords = {y * s2 + x: (x, y) for y in range(s2) for x in range(s2)}
    req2 = PairRequest(0, s2 * s2 - 1)
    prep2 = grid_schedule(s2, s2)
    lat3 = build_cubic3d(s3, s3, s3)
    prep3, edges3 = prepare_schedule(lat3)
    g3 = GraphState(lat3.n, sorted(edges3), seed=seed)
    req3 = PairRequest(0, lat3.n - 1)
    rows2 = {"cut": _estimate_row(plan_cut(g2, req2), prep2, s2 * s2, model, samples, seed)}
    try:
        rows2["zipper"] = _estimate_row(
            plan_zipper(g2, req2, coords), prep2, s2 * s2, model, samples, seed
        )
    except RoutingError as exc:  # reported, not fatal
        rows2["zipper"] = {"error": str(exc)}
    return {
        "n": n,
        "model": asdict(model),
        "samples": samples,
        "2d": {
            "shape": [s2, s2],
            "distance": 2 * (s2 - 1),
            "bound": 2 * math.sqrt(n),
            "plans": rows2,
        },
        "3d": {
            "shape": [s3, s3, s3],
            "distance": 3 * (s3 - 1),
            "bound": 3 * n ** (1 / 3),
            "plans": {"cut": _estimate_row(plan_cut(g3, req3), prep3, lat3.n, model, samples, seed)},
        },
    }
