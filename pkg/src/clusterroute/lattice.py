"""Hardware connectivity graphs and cluster-state preparation schedules.

Five lattice kinds are supported. Each builder returns a :class:`Lattice`
with integer coordinates in a per-kind embedding:

``rect_leaves``
    Auxiliary qubit ``(x, y)`` at ``(2x, 2y)``, id ``y*w + x``. The data
    qubit of plaquette ``(x, y)`` sits at ``(2x+1, 2y+1)`` and couples to the
    lowest-coordinate corner ``(x, y)``.
``triangle_square``
    Tilted auxiliary grid ``(i, j)`` at ``(i - j + h - 1, i + j)``; cluster
    edges are the diagonal couplings. The data qubit of tilted plaquette
    ``(i, j)`` sits one unit below its top corner and couples to all four
    corners along the axes.
``honeycomb_dense``
    Blocks of nine qubits numbered 1..9 at local coordinates
    ``4:(0,0) 3:(1,0) 2:(2,0) 1:(3,0) 5:(0,1) 6:(0,2) 7:(1,2) 8:(2,2) 9:(3,2)``,
    offset by ``(4*bx, 4*by)``. Qubits 1, 3, 7, 9 hold data, 2, 4, 6, 8 are
    auxiliary and 5 is an ancilla. Block rows are joined by a bridge ancilla
    at local ``(2, 3)`` between 8 and the 2 of the block below.
``honeycomb_sparse``
    Heavy-hex rows ``r`` of ``4*bw`` qubits at ``(x, 2r)`` with bridge qubits
    at ``(x, 2r+1)`` for ``x = 0 mod 4`` (even ``r``) or ``x = 2 mod 4``
    (odd ``r``); ten qubits per cell. Cell ``(cx, cy)`` has its auxiliary
    qubit at ``(4cx, row 2cy)`` and its data qubit at ``(4cx+3, row 2cy+1)``.
``cubic3d``
    Auxiliary qubit ``(x, y, z)`` with id ``(z*w + y)*l + x``.

Schedules
---------
A :class:`Schedule` is a list of rounds. A round is one time step: CZ gates
may share qubits inside a round because they commute, every other operation
has exclusive use of its qubits. :meth:`Round.layers` splits a round into
strictly disjoint layers for hardware that cannot overlap gates.
Measurements carry an optional ``reset`` flag, re-preparing ``|+>`` right
after readout so the ancilla can be reused.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import clifford as cl
from .clifford import Outcome
from .graphstate import GraphState
from .oracle import MAX_QUBITS, StateVector, gate

KINDS = ("rect_leaves", "triangle_square", "honeycomb_dense", "honeycomb_sparse", "cubic3d")
ROLES = ("data", "auxiliary", "ancilla")
ROLE_COLORS = {"data": "green", "auxiliary": "red", "ancilla": "blue"}


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: int
    xyz: tuple[int, ...]
    role: str


@dataclass(frozen=True)
class Lattice:
    """Qubits with coordinates and roles plus the coupling graph."""

    kind: str
    params: tuple[int, ...]
    vertices: tuple[Vertex, ...]
    couplings: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for k, v in enumerate(self.vertices):
            if v.id != k:
                raise LatticeError(f"vertex ids must be 0..n-1 in order, got {v.id} at {k}")
            if v.role not in ROLES:
                raise LatticeError(f"unknown role {v.role!r}")
        for i, j in self.couplings:
            if not (0 <= i < j < len(self.vertices)):
                raise LatticeError(f"bad coupling ({i}, {j})")
        adj = self.adjacency()
        for v in self.vertices:
            if v.role == "data" and not any(
                self.vertices[w].role != "data" for w in adj[v.id]
            ):
                raise LatticeError(f"data qubit {v.id} has no non-data coupling")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def role(self, v: int) -> str:
        return self.vertices[v].role

    def ids(self, role: str) -> list[int]:
        return [v.id for v in self.vertices if v.role == role]

    def coupled(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.couplings

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in self.vertices]
        for i, j in self.couplings:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def data_partner(self, d: int) -> int:
        """The auxiliary qubit a data qubit is attached to."""
        if self.role(d) != "data":
            raise LatticeError(f"vertex {d} is not a data qubit")
        if self.kind == "honeycomb_sparse":
            _, cells = _sparse_index(*self.params)
            for cell, (aux, data) in cells.items():
                if data == d:
                    return aux
        near = sorted(w for w in self.adjacency()[d] if self.role(w) == "auxiliary")
        if not near:
            raise LatticeError(f"data qubit {d} has no adjacent auxiliary qubit")
        return near[0]

    def grid_coords(self) -> dict[int, tuple[int, ...]] | None:
        """Logical grid coordinates of the auxiliary cluster, if it is grid-like."""
        if self.kind == "rect_leaves":
            return {v.id: (v.xyz[0] // 2, v.xyz[1] // 2) for v in self.vertices if v.role == "auxiliary"}
        if self.kind == "triangle_square":
            w, h = self.params
            return {j * w + i: (i, j) for j in range(h) for i in range(w)}
        if self.kind == "honeycomb_sparse":
            _, cells = _sparse_index(*self.params)
            return {aux: cell for cell, (aux, _) in cells.items()}
        if self.kind == "honeycomb_dense":
            bw, bh = self.params
            out = {}
            for by in range(bh):
                for bx in range(bw):
                    base = 9 * (by * bw + bx)
                    for k, (dx, dy) in ((4, (0, 0)), (2, (1, 0)), (6, (0, 1)), (8, (1, 1))):
                        out[base + k - 1] = (2 * bx + dx, 2 * by + dy)
            return out
        if self.kind == "cubic3d":
            return {v.id: v.xyz for v in self.vertices}
        return None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": list(self.params),
            "vertices": [{"id": v.id, "xyz": list(v.xyz), "role": v.role} for v in self.vertices],
            "couplings": [list(e) for e in sorted(self.couplings)],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Lattice:
        verts = tuple(
            Vertex(int(v["id"]), tuple(int(c) for c in v["xyz"]), v["role"])
            for v in sorted(d["vertices"], key=lambda v: v["id"])
        )
        couplings = frozenset((min(i, j), max(i, j)) for i, j in d["couplings"])
        return cls(d["kind"], tuple(d.get("params", ())), verts, couplings)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Lattice:
        return cls.from_dict(json.loads(text))


def _make(kind, params, coords_roles, couplings) -> Lattice:
    verts = tuple(Vertex(k, tuple(xyz), role) for k, (xyz, role) in enumerate(coords_roles))
    cs = frozenset((min(i, j), max(i, j)) for i, j in couplings)
    return Lattice(kind, tuple(params), verts, cs)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise LatticeError(msg)


# -- builders ----------------------------------------------------------------


def build_rect_leaves(w: int, h: int) -> Lattice:
    _require(w >= 2 and h >= 2, f"rect_leaves needs w, h >= 2, got ({w}, {h})")
    cr = [((2 * x, 2 * y), "auxiliary") for y in range(h) for x in range(w)]
    couplings = []
    for y in range(h):
        for x in range(w):
            if x + 1 < w:
                couplings.append((y * w + x, y * w + x + 1))
            if y + 1 < h:
                couplings.append((y * w + x, (y + 1) * w + x))
    for y in range(h - 1):
        for x in range(w - 1):
            couplings.append((len(cr), y * w + x))
            cr.append(((2 * x + 1, 2 * y + 1), "data"))
    return _make("rect_leaves", (w, h), cr, couplings)


def build_triangle_square(w: int, h: int) -> Lattice:
    _require(w >= 2 and h >= 2, f"triangle_square needs w, h >= 2, got ({w}, {h})")

    def pos(i, j):
        return (i - j + h - 1, i + j)

    cr = [(pos(i, j), "auxiliary") for j in range(h) for i in range(w)]
    couplings = []
    for j in range(h):
        for i in range(w):
            if i + 1 < w:
                couplings.append((j * w + i, j * w + i + 1))
            if j + 1 < h:
                couplings.append((j * w + i, (j + 1) * w + i))
    for j in range(h - 1):
        for i in range(w - 1):
            x, y = pos(i, j)
            d = len(cr)
            cr.append(((x, y + 1), "data"))
            for c in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)):
                couplings.append((d, c[1] * w + c[0]))
    return _make("triangle_square", (w, h), cr, couplings)


_DENSE_LOCAL = {
    1: (3, 0), 2: (2, 0), 3: (1, 0), 4: (0, 0), 5: (0, 1),
    6: (0, 2), 7: (1, 2), 8: (2, 2), 9: (3, 2),
}
_DENSE_ROLE = {1: "data", 3: "data", 7: "data", 9: "data", 2: "auxiliary",
               4: "auxiliary", 6: "auxiliary", 8: "auxiliary", 5: "ancilla"}
_DENSE_INNER = ((4, 5), (5, 6), (2, 3), (7, 8), (3, 4), (6, 7), (1, 2), (8, 9))


def _dense_id(bw: int, bx: int, by: int, k: int) -> int:
    return 9 * (by * bw + bx) + k - 1


def _dense_bridge(bw: int, bh: int, bx: int, by: int) -> int:
    return 9 * bw * bh + by * bw + bx


def build_honeycomb_dense(bw: int, bh: int) -> Lattice:
    _require(bw >= 1 and bh >= 1, f"honeycomb_dense needs bw, bh >= 1, got ({bw}, {bh})")
    cr = []
    couplings = []
    for by in range(bh):
        for bx in range(bw):
            for k in range(1, 10):
                x, y = _DENSE_LOCAL[k]
                cr.append(((4 * bx + x, 4 * by + y), _DENSE_ROLE[k]))
            q = lambda k, bx=bx, by=by: _dense_id(bw, bx, by, k)
            couplings += [(q(i), q(j)) for i, j in _DENSE_INNER]
            if bx + 1 < bw:
                couplings.append((q(1), _dense_id(bw, bx + 1, by, 4)))
                couplings.append((q(9), _dense_id(bw, bx + 1, by, 6)))
    for by in range(bh - 1):
        for bx in range(bw):
            br = len(cr)
            cr.append(((4 * bx + 2, 4 * by + 3), "ancilla"))
            couplings.append((_dense_id(bw, bx, by, 8), br))
            couplings.append((br, _dense_id(bw, bx, by + 1, 2)))
    return _make("honeycomb_dense", (bw, bh), cr, couplings)


def _sparse_index(bw: int, bh: int):
    """Row-qubit and bridge ids plus ``{cell: (aux, data)}`` for the sparse layout."""
    width = 4 * bw
    rows = 2 * bh
    ids: dict[tuple, int] = {}
    for r in range(rows):
        for x in range(width):
            ids["q", x, r] = len(ids)
    for r in range(rows):
        for x in range(width):
            if x % 4 == (0 if r % 2 == 0 else 2):
                ids["b", x, r] = len(ids)
    cells = {
        (cx, cy): (ids["q", 4 * cx, 2 * cy], ids["q", 4 * cx + 3, 2 * cy + 1])
        for cy in range(bh)
        for cx in range(bw)
    }
    return ids, cells


def build_honeycomb_sparse(bw: int, bh: int) -> Lattice:
    _require(bw >= 1 and bh >= 1, f"honeycomb_sparse needs bw, bh >= 1, got ({bw}, {bh})")
    ids, cells = _sparse_index(bw, bh)
    aux = {a for a, _ in cells.values()}
    data = {d for _, d in cells.values()}
    cr = []
    couplings = []
    for key, k in ids.items():
        kind, x, r = key
        role = "auxiliary" if k in aux else "data" if k in data else "ancilla"
        cr.append(((x, 2 * r) if kind == "q" else (x, 2 * r + 1), role))
        if kind == "q" and ("q", x + 1, r) in ids:
            couplings.append((k, ids["q", x + 1, r]))
        if kind == "b":
            couplings.append((ids["q", x, r], k))
            if ("q", x, r + 1) in ids:
                couplings.append((k, ids["q", x, r + 1]))
    return _make("honeycomb_sparse", (bw, bh), cr, couplings)


def build_cubic3d(l: int, w: int, h: int) -> Lattice:
    _require(min(l, w, h) >= 2, f"cubic3d needs l, w, h >= 2, got ({l}, {w}, {h})")
    cr = []
    couplings = []
    for z in range(h):
        for y in range(w):
            for x in range(l):
                k = (z * w + y) * l + x
                cr.append(((x, y, z), "auxiliary"))
                if x + 1 < l:
                    couplings.append((k, k + 1))
                if y + 1 < w:
                    couplings.append((k, k + l))
                if z + 1 < h:
                    couplings.append((k, k + l * w))
    return _make("cubic3d", (l, w, h), cr, couplings)


BUILDERS = {
    "rect_leaves": build_rect_leaves,
    "triangle_square": build_triangle_square,
    "honeycomb_dense": build_honeycomb_dense,
    "honeycomb_sparse": build_honeycomb_sparse,
    "cubic3d": build_cubic3d,
}


def build(kind: str, *params: int) -> Lattice:
    if kind not in BUILDERS:
        raise LatticeError(f"unknown lattice kind {kind!r}; expected one of {', '.join(KINDS)}")
    try:
        return BUILDERS[kind](*params)
    except TypeError:
        raise LatticeError(f"wrong number of parameters for {kind}: {params}") from None


# -- schedules ---------------------------------------------------------------


@dataclass(frozen=True)
class Op:
    """One schedule step: ``CZ``, ``SWAP`` or ``MEASURE``."""

    op: str
    qubits: tuple[int, ...]
    basis: str | None = None
    reset: bool = False

    def __post_init__(self) -> None:
        arity = {"CZ": 2, "SWAP": 2, "MEASURE": 1}
        if self.op not in arity:
            raise LatticeError(f"unknown schedule op {self.op!r}")
        if len(self.qubits) != arity[self.op] or len(set(self.qubits)) != len(self.qubits):
            raise LatticeError(f"{self.op} needs {arity[self.op]} distinct qubits, got {self.qubits}")
        if (self.op == "MEASURE") != (self.basis is not None):
            raise LatticeError("a basis is required for measurements and only for them")
        if self.basis is not None and self.basis not in "XYZ":
            raise LatticeError(f"bad basis {self.basis!r}")

    def to_dict(self) -> dict:
        d: dict = {"op": self.op, "qubits": list(self.qubits)}
        if self.basis is not None:
            d["basis"] = self.basis
        if self.reset:
            d["reset"] = True
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> Op:
        return cls(d["op"], tuple(d["qubits"]), d.get("basis"), bool(d.get("reset", False)))


def cz(i: int, j: int) -> Op:
    return Op("CZ", (i, j))


def swap(i: int, j: int) -> Op:
    return Op("SWAP", (i, j))


def measure(q: int, basis: str = "Y", reset: bool = False) -> Op:
    return Op("MEASURE", (q,), basis, reset)


@dataclass(frozen=True)
class Round:
    ops: tuple[Op, ...]
    label: str = ""

    def __post_init__(self) -> None:
        exclusive: set[int] = set()
        shared: set[int] = set()
        for o in self.ops:
            qs = set(o.qubits)
            if qs & exclusive or (o.op != "CZ" and qs & shared):
                raise LatticeError(f"round {self.label!r}: qubits {sorted(qs)} used twice")
            (shared if o.op == "CZ" else exclusive).update(qs)
        pairs = [tuple(sorted(o.qubits)) for o in self.ops if o.op == "CZ"]
        if len(set(pairs)) != len(pairs):
            raise LatticeError(f"round {self.label!r}: repeated CZ")

    @property
    def kinds(self) -> set[str]:
        return {o.op for o in self.ops}

    def layers(self) -> list[list[Op]]:
        """Greedy split into layers with pairwise-disjoint support."""
        out: list[tuple[set[int], list[Op]]] = []
        for o in self.ops:
            for used, ops in out:
                if not used & set(o.qubits):
                    used.update(o.qubits)
                    ops.append(o)
                    break
            else:
                out.append((set(o.qubits), [o]))
        return [ops for _, ops in out]


@dataclass(frozen=True)
class Schedule:
    rounds: tuple[Round, ...] = ()

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def cz_rounds(self) -> int:
        """Rounds that contain CZ gates or are reserved for them by label."""
        return sum(1 for r in self.rounds if "CZ" in r.kinds or r.label.endswith(":cz"))

    @property
    def measurement_rounds(self) -> int:
        return sum(
            1 for r in self.rounds if "MEASURE" in r.kinds or r.label.endswith(":measure")
        )

    def phases(self) -> list[str]:
        """Distinct label prefixes (text before ``:``) in order of appearance."""
        out: list[str] = []
        for r in self.rounds:
            p = r.label.split(":")[0]
            if p and p not in out:
                out.append(p)
        return out

    def ops(self) -> list[Op]:
        return [o for r in self.rounds for o in r.ops]

    def check(self, lat: Lattice) -> None:
        """Raise unless every two-qubit step uses a coupling of ``lat``."""
        for r in self.rounds:
            for o in r.ops:
                if len(o.qubits) == 2 and not lat.coupled(*o.qubits):
                    raise LatticeError(f"{o.op}{o.qubits} in {r.label!r} is not a coupling")
                for q in o.qubits:
                    if not 0 <= q < lat.n:
                        raise LatticeError(f"qubit {q} outside the lattice")

    def __add__(self, other: Schedule) -> Schedule:
        return Schedule(self.rounds + other.rounds)

    def to_dict(self) -> dict:
        return {
            "rounds": [[o.to_dict() for o in r.ops] for r in self.rounds],
            "labels": [r.label for r in self.rounds],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Schedule:
        labels = d.get("labels") or [""] * len(d["rounds"])
        return cls(
            tuple(
                Round(tuple(Op.from_dict(o) for o in ops), lab)
                for ops, lab in zip(d["rounds"], labels)
            )
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Schedule:
        return cls.from_dict(json.loads(text))


def _rounds(*items: tuple[str, Iterable[Op]]) -> Schedule:
    return Schedule(tuple(Round(tuple(ops), label) for label, ops in items))


def _mediated(paths: Sequence[Sequence[int]], phase: str, reset: bool = True) -> Schedule:
    """CZ along each path, then Y on every interior vertex."""
    czs = [cz(p[k], p[k + 1]) for p in paths for k in range(len(p) - 1)]
    ms = [measure(v, "Y", reset) for p in paths for v in p[1:-1]]
    return _rounds((f"{phase}:cz", czs), (f"{phase}:measure", ms))


def _dense_schedule(lat: Lattice) -> tuple[Schedule, set[tuple[int, int]]]:
    bw, bh = lat.params
    steps: list[list[Op]] = [[] for _ in range(7)]
    target = set()
    for by in range(bh):
        for bx in range(bw):
            q = lambda k, bx=bx, by=by: _dense_id(bw, bx, by, k)
            right = bx + 1 < bw
            nxt = lambda k, bx=bx, by=by: _dense_id(bw, bx + 1, by, k)
            # positions hold logical qubits; the trace is in the module notes
            steps[0] += [cz(q(4), q(5)), cz(q(5), q(6)), swap(q(2), q(3)), swap(q(7), q(8))]
            steps[1] += [measure(q(5), "Y", True), swap(q(3), q(4)), swap(q(6), q(7))]
            steps[2] += [cz(q(3), q(4)), cz(q(6), q(7)), cz(q(4), q(5)), cz(q(5), q(6))]
            steps[3] += [measure(q(5), "Y", True), swap(q(3), q(4)), swap(q(6), q(7))]
            steps[4] += [swap(q(2), q(3)), swap(q(7), q(8))]
            target |= {(q(4), q(6)), (q(2), q(4)), (q(6), q(8)), (q(2), q(8))}
            if right:
                steps[4] += [swap(q(1), nxt(4)), swap(q(9), nxt(6))]
                steps[5] += [cz(q(1), q(2)), cz(q(8), q(9))]
                steps[6] += [swap(q(1), nxt(4)), swap(q(9), nxt(6))]
                target |= {(q(2), nxt(4)), (q(8), nxt(6))}
            if by + 1 < bh:
                br = _dense_bridge(bw, bh, bx, by)
                below = _dense_id(bw, bx, by + 1, 2)
                steps[5] += [cz(q(8), br), cz(br, below)]
                steps[6].append(measure(br, "Y", True))
                target.add((q(8), below))
    sched = _rounds(*((f"step{k + 1}", ops) for k, ops in enumerate(steps)))
    return sched, {(min(e), max(e)) for e in target}


def _sparse_paths(lat: Lattice):
    bw, bh = lat.params
    ids, cells = _sparse_index(bw, bh)
    q = lambda x, r: ids["q", x, r]
    b = lambda x, r: ids["b", x, r]
    vertical, horizontal, coupling = [], [], []
    for (cx, cy), (aux, data) in sorted(cells.items(), key=lambda t: (t[0][1], t[0][0])):
        x0, r0 = 4 * cx, 2 * cy
        if cy + 1 < bh:
            vertical.append([
                aux, b(x0, r0), q(x0, r0 + 1), q(x0 + 1, r0 + 1), q(x0 + 2, r0 + 1),
                b(x0 + 2, r0 + 1), q(x0 + 2, r0 + 2), q(x0 + 1, r0 + 2), cells[cx, cy + 1][0],
            ])
        if cx + 1 < bw:
            horizontal.append([aux, q(x0 + 1, r0), q(x0 + 2, r0), q(x0 + 3, r0), cells[cx + 1, cy][0]])
        coupling.append([data, q(x0 + 2, r0 + 1), q(x0 + 1, r0 + 1), q(x0, r0 + 1), b(x0, r0), aux])
    return vertical, horizontal, coupling


def prepare_schedule(lat: Lattice) -> tuple[Schedule, set[tuple[int, int]]]:
    """Schedule preparing the auxiliary cluster, and the target cluster edges."""
    if lat.kind in ("rect_leaves", "triangle_square", "cubic3d"):
        edges = sorted(
            (i, j) for i, j in lat.couplings
            if lat.role(i) == "auxiliary" and lat.role(j) == "auxiliary"
        )
        return _rounds(("cluster:cz", [cz(i, j) for i, j in edges])), set(edges)
    if lat.kind == "honeycomb_dense":
        return _dense_schedule(lat)
    if lat.kind == "honeycomb_sparse":
        vertical, horizontal, _ = _sparse_paths(lat)
        sched = _mediated(vertical, "vertical") + _mediated(horizontal, "horizontal")
        edges = {(min(p[0], p[-1]), max(p[0], p[-1])) for p in vertical + horizontal}
        return sched, edges
    raise LatticeError(f"no preparation schedule for lattice kind {lat.kind!r}")


def data_coupling_schedule(lat: Lattice) -> tuple[Schedule, dict[int, int]]:
    """Schedule entangling every data qubit with its auxiliary partner.

    Returns the schedule and the map data qubit -> auxiliary partner. Direct
    couplings use one CZ; the sparse honeycomb goes through its ancilla path.
    """
    if lat.kind == "honeycomb_sparse":
        _, _, coupling = _sparse_paths(lat)
        return _mediated(coupling, "coupling"), {p[0]: p[-1] for p in coupling}
    partners = {d: lat.data_partner(d) for d in lat.ids("data")}
    czs = [cz(d, a) for d, a in partners.items() if lat.coupled(d, a)]
    if len(czs) != len(partners):
        raise LatticeError(f"{lat.kind}: data qubits are not directly coupled to the cluster")
    return _rounds(("coupling:cz", czs)), partners


# -- execution ---------------------------------------------------------------


def run_schedule(
    sched: Schedule,
    state: GraphState | StateVector,
    forced: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
) -> list[Outcome]:
    """Execute ``sched`` in place on either backend.

    ``forced`` pins measurement outcomes in schedule order. Outcomes of the
    returned list can be fed back as ``forced`` to replay the same branch on
    the other backend.
    """
    outcomes: list[Outcome] = []
    forced = list(forced) if forced is not None else None
    sv = isinstance(state, StateVector)
    for r in sched.rounds:
        for o in r.ops:
            if o.op == "CZ":
                state.apply(gate("CZ", *o.qubits)) if sv else state.apply_cz(*o.qubits)
            elif o.op == "SWAP":
                state.apply(gate("SWAP", *o.qubits)) if sv else state.swap(*o.qubits)
            else:
                (q,) = o.qubits
                f = forced[len(outcomes)] if forced is not None else None
                if sv:
                    out = state.measure_pauli(q, o.basis, f, rng)
                    if o.reset:
                        prep = cl.PREPARE[o.basis, out.value]
                        state.apply_matrix(cl.MATRICES[cl.inverse(prep)], [q])
                else:
                    out = state.measure_pauli(q, o.basis, f)
                    if o.reset:
                        state.reset(q)
                outcomes.append(out)
    return outcomes


def cluster_byproducts(
    state: GraphState, target: Iterable[tuple[int, int]], vertices: Iterable[int]
) -> dict[int, str] | None:
    """Identify ``state`` as ``(prod_a D_a) |G_target>`` on ``vertices``.

    ``D_a`` ranges over the diagonal Cliffords ``I, Z, S, Sdg``, which is what
    Y-mediated edges leave behind. Returns ``{a: name}`` or ``None`` when the
    state is not of this form. Vertices outside ``vertices`` must be disjoint
    from the cluster.
    """
    vertices = sorted(set(vertices))
    nbrs: dict[int, set[int]] = {v: set() for v in vertices}
    for i, j in target:
        nbrs[i].add(j)
        nbrs[j].add(i)
    found = {}
    for a in vertices:
        for name, (sign, p) in (("I", (1, "X")), ("Z", (-1, "X")), ("S", (1, "Y")), ("Sdg", (-1, "Y"))):
            ops = {a: p} | {b: "Z" for b in nbrs[a]}
            if state.stabilizes(ops, sign):
                found[a] = name
                break
        else:
            return None
    return found


def prepared_state(lat: Lattice, seed: int = 0) -> tuple[GraphState, Schedule, set[tuple[int, int]]]:
    """Run the preparation schedule on ``|+>`` everywhere and return a tidy state.

    The returned state stores exactly the target graph with the identified
    diagonal byproducts as vertex operators; it is the same physical state
    as the raw simulation output.
    """
    sched, target = prepare_schedule(lat)
    g = GraphState(lat.n, seed=seed)
    run_schedule(sched, g)
    aux = lat.ids("auxiliary")
    found = cluster_byproducts(g, target, aux)
    if found is None:
        raise LatticeError(f"{lat.kind}: preparation did not produce the target cluster")
    rest = [v for v in range(lat.n) if v not in found]
    for v in rest:
        if not g.stabilizes({v: "X"}):
            raise LatticeError(f"{lat.kind}: qubit {v} was not returned to |+>")
    vops = [found.get(v, "I") for v in range(lat.n)]
    return GraphState(lat.n, sorted(target), seed=seed, vops=vops), sched, target


def oracle_replay(
    lat: Lattice, sched: Schedule, initial: StateVector | None = None, forced: Sequence[int] | None = None
) -> tuple[StateVector, list[Outcome]]:
    """Execute ``sched`` on the statevector backend (at most 20 qubits)."""
    if lat.n > MAX_QUBITS:
        raise LatticeError(f"{lat.n} qubits exceed the oracle cap of {MAX_QUBITS}")
    from .oracle import init_plus

    sv = initial.copy() if initial is not None else init_plus(lat.n)
    outs = run_schedule(sched, sv, forced, np.random.default_rng(0))
    return sv, outs


# -- rendering ---------------------------------------------------------------


def to_dot(lat: Lattice, scale: float = 1.0) -> str:
    """Graphviz source with pinned node positions and role colours."""
    lines = [f'graph "{lat.kind}" {{', "  node [shape=circle, style=filled, fontsize=8];"]
    for v in lat.vertices:
        x = v.xyz[0] + (0.35 * v.xyz[2] if len(v.xyz) > 2 else 0)
        y = -v.xyz[1] - (0.35 * v.xyz[2] if len(v.xyz) > 2 else 0)
        lines.append(
            f'  {v.id} [pos="{x * scale:g},{y * scale:g}!", '
            f'fillcolor={ROLE_COLORS[v.role]}, role={v.role}];'
        )
    for i, j in sorted(lat.couplings):
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
