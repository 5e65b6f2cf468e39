"""Graph states with vertex operators.

A :class:`GraphState` stores a simple graph ``G`` and one single-qubit
Clifford ``vop[a]`` per vertex; the physical state is
``(prod_a vop[a]) |G>`` with ``|G> = prod_{(i,j) in E} CZ_ij |+>^n``.

Measurement convention
----------------------
A physical Pauli measurement ``P`` on vertex ``a`` is the graph-frame
measurement of ``vop[a]^dagger P vop[a] = s Q``. ``Q = Y`` is handled by a
local complementation on ``a`` (turning it into ``Z``), ``Q = X`` by a local
complementation on the special neighbour ``b0`` first. The ``Z`` rule then
deletes every edge at ``a`` and, for graph outcome -1, appends ``Z`` to each
neighbour's vertex operator. For ``Q = X`` a final complementation on ``b0``
is applied so the graph matches the textbook rule
``tau_b0(tau_a(tau_b0(G)) - a)``. The measured vertex keeps its id, becomes
isolated, and its vertex operator maps ``|+>`` to the post-measurement
eigenstate.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cache

import numpy as np

from . import clifford as cl
from .clifford import Outcome, PauliBasis
from .oracle import MAX_QUBITS, StateVector, graph_state


class GraphStateError(ValueError):
    pass


_LC_SELF = cl.inverse(cl.SQRT_MINUS_IX)
_LC_NEIGHBOUR = cl.inverse(cl.SQRT_IZ)
_Z = cl.INDEX["Z"]


def _reduction_words() -> list[str]:
    # shortest word w over {"a": LC on the vertex, "c": LC on a neighbour}
    # such that vop * factors(w) is diagonal
    step = {"a": _LC_SELF, "c": _LC_NEIGHBOUR}
    best: dict[int, str] = {d: "" for d in cl.DIAGONAL}
    queue = deque(cl.DIAGONAL)
    # search backwards from diagonal targets: v * f = t  <=>  v = t * f^-1
    while queue:
        t = queue.popleft()
        for letter, f in step.items():
            v = cl.compose(t, cl.inverse(f))
            if v not in best:
                best[v] = letter + best[t]
                queue.append(v)
    assert len(best) == 24
    return [best[v] for v in range(24)]


_REDUCE = _reduction_words()


@cache
def _two_qubit_forms() -> dict[tuple, list[tuple[int, int, int]]]:
    forms: dict[tuple, list[tuple[int, int, int]]] = {}
    for edge in (0, 1):
        base = graph_state(2, [(0, 1)] if edge else [])
        for va, vb in itertools.product(range(24), repeat=2):
            s = base.copy().apply_matrix(np.kron(cl.MATRICES[va], cl.MATRICES[vb]), [0, 1])
            forms.setdefault(_phase_key(s.amplitudes), []).append((edge, va, vb))
    return forms


def _phase_key(amps: np.ndarray) -> tuple:
    k = int(np.argmax(np.abs(amps) > 1e-6))
    a = amps * (abs(amps[k]) / amps[k])
    return tuple(np.round(a, 7).tolist())


@cache
def _cz_lookup(edge: int, va: int, vb: int, keep_a: bool, keep_b: bool) -> tuple[int, int, int]:
    base = graph_state(2, [(0, 1)] if edge else [])
    s = base.apply_matrix(np.kron(cl.MATRICES[va], cl.MATRICES[vb]), [0, 1])
    s.apply_matrix(np.diag([1, 1, 1, -1]), [0, 1])
    for cand in _two_qubit_forms()[_phase_key(s.amplitudes)]:
        _, na, nb = cand
        if keep_a and na not in cl.DIAGONAL:
            continue
        if keep_b and nb not in cl.DIAGONAL:
            continue
        return cand
    raise AssertionError("no admissible two-vertex CZ form")  # pragma: no cover


@dataclass(frozen=True)
class BellCheck:
    is_bell: bool
    vops: tuple[str, str] | None = None

    def __bool__(self) -> bool:
        return self.is_bell

    @property
    def canonical(self) -> bool:
        """True when the pair is exactly ``CZ|+>|+>``."""
        return self.is_bell and self.vops == ("I", "I")


class GraphState:
    """Stabilizer state in graph-plus-vertex-operator form."""

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence[int]] = (),
        seed: int = 0,
        vops: Sequence[int | str] | None = None,
    ):
        if n < 1:
            raise GraphStateError(f"vertex count must be positive, got {n}")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.vop = [cl.IDENTITY] * n if vops is None else [cl.lookup(v) for v in vops]
        if len(self.vop) != n:
            raise GraphStateError("one vertex operator per vertex required")
        self.removed: set[int] = set()
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.Philox(self.seed))
        self._draws = 0
        for i, j in edges:
            self._check(i)
            self._check(j)
            if i == j:
                raise GraphStateError(f"self-loop at vertex {i}")
            self.adj[i].add(j)
            self.adj[j].add(i)

    # -- bookkeeping --------------------------------------------------------

    def _check(self, a: int) -> None:
        if not 0 <= a < self.n:
            raise GraphStateError(f"vertex {a} out of range for {self.n} vertices")

    def copy(self) -> GraphState:
        out = object.__new__(GraphState)
        out.n = self.n
        out.adj = [set(s) for s in self.adj]
        out.vop = list(self.vop)
        out.removed = set(self.removed)
        out.seed = self.seed
        out._rng = np.random.Generator(np.random.Philox(self.seed))
        out._rng.bit_generator.state = self._rng.bit_generator.state
        out._draws = self._draws
        return out

    def edges(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i in range(self.n) for j in self.adj[i] if i < j)

    def neighbors(self, a: int) -> set[int]:
        self._check(a)
        return set(self.adj[a])

    def live(self) -> list[int]:
        return [a for a in range(self.n) if a not in self.removed]

    def vop_name(self, a: int) -> str:
        return cl.NAMES[self.vop[a]]

    def component(self, a: int) -> set[int]:
        seen = {a}
        stack = [a]
        while stack:
            for b in self.adj[stack.pop()]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return seen

    def _toggle(self, i: int, j: int) -> None:
        if j in self.adj[i]:
            self.adj[i].discard(j)
            self.adj[j].discard(i)
        else:
            self.adj[i].add(j)
            self.adj[j].add(i)

    def _random_sign(self) -> int:
        self._draws += 1
        return 1 if self._rng.integers(2) == 0 else -1

    # -- Clifford operations ------------------------------------------------

    def local_complement(self, a: int) -> GraphState:
        """Complement the neighbourhood of ``a``; the physical state is unchanged."""
        self._check(a)
        nb = sorted(self.adj[a])
        for i, j in itertools.combinations(nb, 2):
            self._toggle(i, j)
        self.vop[a] = cl.compose(self.vop[a], _LC_SELF)
        for b in nb:
            self.vop[b] = cl.compose(self.vop[b], _LC_NEIGHBOUR)
        return self

    def apply_local_clifford(self, a: int, c: int | str) -> GraphState:
        """Apply ``c`` after the current vertex operator of ``a``."""
        self._check(a)
        self.vop[a] = cl.compose(cl.lookup(c), self.vop[a])
        return self

    def _reduce_vop(self, a: int, avoid: int) -> None:
        c = min(self.adj[a] - {avoid})
        for letter in _REDUCE[self.vop[a]]:
            self.local_complement(a if letter == "a" else c)
        assert self.vop[a] in cl.DIAGONAL

    def apply_cz(self, i: int, j: int) -> GraphState:
        self._check(i)
        self._check(j)
        if i == j:
            raise GraphStateError("CZ needs two distinct vertices")
        for _ in range(4):
            ok_i = self.vop[i] in cl.DIAGONAL or not (self.adj[i] - {j})
            ok_j = self.vop[j] in cl.DIAGONAL or not (self.adj[j] - {i})
            if ok_i and ok_j:
                break
            if not ok_i:
                self._reduce_vop(i, j)
            else:
                self._reduce_vop(j, i)
        else:  # pragma: no cover
            raise AssertionError("vertex-operator reduction did not converge")
        if self.vop[i] in cl.DIAGONAL and self.vop[j] in cl.DIAGONAL:
            self._toggle(i, j)
            return self
        edge, vi, vj = _cz_lookup(
            int(j in self.adj[i]),
            self.vop[i],
            self.vop[j],
            bool(self.adj[i] - {j}),
            bool(self.adj[j] - {i}),
        )
        if edge != (j in self.adj[i]):
            self._toggle(i, j)
        self.vop[i], self.vop[j] = vi, vj
        return self

    def swap(self, i: int, j: int) -> GraphState:
        """SWAP gate: exchange the roles of vertices ``i`` and ``j``."""
        self._check(i)
        self._check(j)
        if i == j:
            raise GraphStateError("SWAP needs two distinct vertices")
        ni = self.adj[i] - {j}
        nj = self.adj[j] - {i}
        for b in ni:
            self.adj[b].discard(i)
        for b in nj:
            self.adj[b].discard(j)
        for b in ni:
            self.adj[b].add(j)
        for b in nj:
            self.adj[b].add(i)
        linked = j in self.adj[i]
        self.adj[i] = nj | ({j} if linked else set())
        self.adj[j] = ni | ({i} if linked else set())
        self.vop[i], self.vop[j] = self.vop[j], self.vop[i]
        ri, rj = i in self.removed, j in self.removed
        self.removed.discard(i)
        self.removed.discard(j)
        if ri:
            self.removed.add(j)
        if rj:
            self.removed.add(i)
        return self

    def reset(self, a: int) -> GraphState:
        """Re-prepare an isolated vertex in ``|+>`` and mark it live again."""
        self._check(a)
        if self.adj[a]:
            raise GraphStateError(f"cannot reset vertex {a}: it is still entangled")
        self.vop[a] = cl.IDENTITY
        self.removed.discard(a)
        return self

    # -- measurement --------------------------------------------------------

    def measure_pauli(
        self,
        a: int,
        basis: PauliBasis | str,
        forced: int | None = None,
        special_neighbor: int | None = None,
    ) -> Outcome:
        """Measure the physical Pauli ``basis`` on vertex ``a``.

        Parameters
        ----------
        forced : int, optional
            Pin the physical outcome to +1 or -1. Raises if that outcome has
            probability zero.
        special_neighbor : int, optional
            The neighbour ``b0`` used by the X rule. Defaults to the smallest
            adjacent id. Ignored unless the graph-frame observable is X.
        """
        self._check(a)
        if a in self.removed:
            raise GraphStateError(f"vertex {a} has already been measured")
        if forced is not None and forced not in (1, -1):
            raise GraphStateError(f"forced outcome must be +1 or -1, got {forced}")
        basis = PauliBasis(basis).value
        sign, q = cl.pull_back(self.vop[a], basis)
        b0 = None
        if q == "X":
            if not self.adj[a]:
                if forced is not None and forced != sign:
                    raise GraphStateError(
                        f"forced outcome {forced} has zero probability on vertex {a}"
                    )
                self.removed.add(a)
                return Outcome(sign, forced is not None)
            if special_neighbor is None:
                b0 = min(self.adj[a])
            elif special_neighbor not in self.adj[a]:
                raise GraphStateError(
                    f"special neighbour {special_neighbor} is not adjacent to {a}"
                )
            else:
                b0 = special_neighbor
            self.local_complement(b0)
            sign, q = cl.pull_back(self.vop[a], basis)
        if q == "Y":
            self.local_complement(a)
            sign, q = cl.pull_back(self.vop[a], basis)
        assert q == "Z"
        r = self._random_sign() if forced is None else forced * sign
        for b in sorted(self.adj[a]):
            self.adj[b].discard(a)
            if r == -1:
                self.vop[b] = cl.compose(self.vop[b], _Z)
        self.adj[a] = set()
        self.vop[a] = cl.compose(self.vop[a], cl.PREPARE["Z", r])
        if b0 is not None:
            self.local_complement(b0)
        self.removed.add(a)
        return Outcome(r * sign, forced is not None)

    def graph_basis(self, a: int, basis: PauliBasis | str) -> tuple[int, str]:
        """Graph-frame observable ``(sign, Q)`` of a physical Pauli on ``a``."""
        return cl.pull_back(self.vop[a], PauliBasis(basis).value)

    def physical_basis(self, a: int, graph_basis: PauliBasis | str) -> tuple[int, str]:
        """Physical Pauli ``(sign, P)`` realizing graph-frame ``graph_basis`` on ``a``."""
        return cl.conjugate(self.vop[a], PauliBasis(graph_basis).value)

    # -- inspection ---------------------------------------------------------

    def stabilizes(self, pauli: dict[int, str], sign: int = 1) -> bool:
        """True iff ``sign * prod_v pauli[v]`` stabilizes the physical state.

        The test is independent of which graph represents the state: the
        operator is pulled back through the vertex operators and compared with
        the unique product of graph generators ``X_a Z_N(a)`` sharing its
        X-support.
        """
        coeff = sign
        frame: dict[int, str] = {}
        for v, p in pauli.items():
            self._check(v)
            if p == "I":
                continue
            s, q = cl.pull_back(self.vop[v], PauliBasis(p).value)
            coeff *= s
            frame[v] = q
        k = 0
        prod: dict[int, str] = {}
        for a in sorted(v for v, q in frame.items() if q in ("X", "Y")):
            factors = [(a, "X")] + [(b, "Z") for b in self.adj[a]]
            for v, p in factors:
                dk, r = cl.pauli_product(prod.get(v, "I"), p)
                k += dk
                prod[v] = r
        prod = {v: p for v, p in prod.items() if p != "I"}
        if prod != frame:
            return False
        phase = 1j**k
        return abs(phase - coeff) < 1e-9

    def to_statevector(self, qubits: Sequence[int] | None = None) -> StateVector:
        """Dense state of all vertices, or of ``qubits`` if they form whole components.

        Qubit ``k`` of the result is vertex ``qubits[k]``.
        """
        qubits = list(range(self.n)) if qubits is None else list(qubits)
        if len(qubits) > MAX_QUBITS:
            raise GraphStateError(
                f"{len(qubits)} qubits exceed the statevector cap of {MAX_QUBITS}"
            )
        pos = {v: k for k, v in enumerate(qubits)}
        if len(pos) != len(qubits):
            raise GraphStateError("duplicate qubits requested")
        edges = []
        for v in qubits:
            self._check(v)
            for w in self.adj[v]:
                if w not in pos:
                    raise GraphStateError(
                        f"vertex {v} is entangled with {w} outside the requested set"
                    )
                if v < w:
                    edges.append((pos[v], pos[w]))
        s = graph_state(len(qubits), edges)
        for k, v in enumerate(qubits):
            if self.vop[v] != cl.IDENTITY:
                s.apply_matrix(cl.MATRICES[self.vop[v]], [k])
        return s

    def generator(self, a: int) -> tuple[dict[int, str], int]:
        """Physical stabilizer generator ``V (X_a Z_N(a)) V^dagger`` as ``(paulis, sign)``."""
        self._check(a)
        sign = 1
        out = {}
        for v, p in [(a, "X")] + [(b, "Z") for b in self.adj[a]]:
            s, q = cl.conjugate(self.vop[v], p)
            sign *= s
            out[v] = q
        return out, sign

    def same_state(self, other: GraphState) -> bool:
        """Physical equality, whatever graphs represent the two states."""
        if self.n != other.n:
            return False
        return all(other.stabilizes(*self.generator(a)) for a in range(self.n))

    def is_bell_pair(self, i: int, j: int) -> BellCheck:
        self._check(i)
        self._check(j)
        if i == j:
            raise GraphStateError("a Bell pair needs two distinct vertices")
        ok = (
            self.adj[i] == {j}
            and self.adj[j] == {i}
            and i not in self.removed
            and j not in self.removed
        )
        return BellCheck(ok, (self.vop_name(i), self.vop_name(j)) if ok else None)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edges()],
            "vops": [cl.NAMES[v] for v in self.vop],
            "seed": self.seed,
            "removed": sorted(self.removed),
            "draws": self._draws,
        }

    @classmethod
    def from_dict(cls, d: dict) -> GraphState:
        s = cls(d["n"], d.get("edges", ()), d.get("seed", 0), d.get("vops"))
        s.removed = set(d.get("removed", ()))
        for _ in range(d.get("draws", 0)):
            s._random_sign()
        return s

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> GraphState:
        return cls.from_dict(json.loads(text))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return (
            self.n == other.n
            and self.adj == other.adj
            and self.vop == other.vop
            and self.removed == other.removed
        )

    def __repr__(self) -> str:
        return f"GraphState(n={self.n}, edges={len(self.edges())}, removed={len(self.removed)})"


def new_cluster(n: int, edges: Iterable[Sequence[int]] = (), seed: int = 0) -> GraphState:
    return GraphState(n, edges, seed)


def grid_edges(w: int, h: int) -> list[tuple[int, int]]:
    """Edges of a ``w`` x ``h`` grid with vertex id ``y * w + x``."""
    out = []
    for y in range(h):
        for x in range(w):
            v = y * w + x
            if x + 1 < w:
                out.append((v, v + 1))
            if y + 1 < h:
                out.append((v, v + w))
    return out


def apply_cz(s: GraphState, i: int, j: int) -> GraphState:
    return s.apply_cz(i, j)


def local_complement(s: GraphState, a: int) -> GraphState:
    return s.local_complement(a)


def apply_local_clifford(s: GraphState, a: int, c: int | str) -> GraphState:
    return s.apply_local_clifford(a, c)


def measure_pauli(
    s: GraphState,
    a: int,
    basis: PauliBasis | str,
    forced: int | None = None,
    special_neighbor: int | None = None,
) -> Outcome:
    return s.measure_pauli(a, basis, forced, special_neighbor)


def to_statevector(s: GraphState, qubits: Sequence[int] | None = None) -> StateVector:
    return s.to_statevector(qubits)


def is_bell_pair(s: GraphState, i: int, j: int) -> BellCheck:
    return s.is_bell_pair(i, j)
