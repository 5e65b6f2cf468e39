"""Gate protocols that consume routed entanglement.

Every protocol runs on either backend: a :class:`~clusterroute.graphstate.GraphState`
(Clifford operations only) or a :class:`~clusterroute.oracle.StateVector`.
Measurement outcomes can be pinned through ``forced`` so that every branch
can be enumerated; unpinned outcomes come from the backend's generator.

Conventions
-----------
* Bell pairs are consumed in the canonical form ``CZ|+>|+>``; use
  :func:`clusterroute.routing.canonicalize` after routing.
* A GHZ resource is the star graph ``prod_j CZ_{root, j} |+>^m``.
* ``RX(a) = exp(-i a X)``, so a rotation by ``alpha`` about a Pauli ``P``
  means ``exp(-i alpha P)``.
* The Bell measurement in :func:`clifford_teleport` is CNOT, H on the
  control, then two Z readouts.
"""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import clifford as cl
from .graphstate import GraphState
from .oracle import PAULI_MATRICES, StateVector, gate
from .routing import RoutingError, Step, _run, plan_links, settle_links


class ProtocolError(ValueError):
    pass


Backend = GraphState | StateVector


# -- Pauli strings and Clifford circuits --------------------------------------


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of single-qubit Paulis."""

    paulis: str
    phase: int = 0

    def __post_init__(self) -> None:
        if set(self.paulis) - set("IXYZ"):
            raise ProtocolError(f"bad Pauli letters in {self.paulis!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def parse(cls, text: str) -> PauliString:
        """Parse strings like ``"XZI"``, ``"-YY"`` or ``"+iZ"``."""
        m = re.fullmatch(r"([+-]?)(i?)([IXYZ]+)", text.strip())
        if not m:
            raise ProtocolError(f"cannot parse Pauli string {text!r}")
        phase = (2 if m.group(1) == "-" else 0) + (1 if m.group(2) else 0)
        return cls(m.group(3), phase)

    @classmethod
    def from_bits(cls, x: Sequence[int], z: Sequence[int], sign: int = 1) -> PauliString:
        letters = "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(x, z))
        return cls(letters, 0 if sign == 1 else 2)

    @property
    def n(self) -> int:
        return len(self.paulis)

    @property
    def sign(self) -> complex:
        return 1j**self.phase

    def bits(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([p in "XY" for p in self.paulis], dtype=np.uint8)
        z = np.array([p in "ZY" for p in self.paulis], dtype=np.uint8)
        return x, z

    def __mul__(self, other: PauliString) -> PauliString:
        if self.n != other.n:
            raise ProtocolError("Pauli strings act on different qubit counts")
        k = self.phase + other.phase
        out = []
        for p, q in zip(self.paulis, other.paulis):
            dk, r = cl.pauli_product(p, q)
            k += dk
            out.append(r)
        return PauliString("".join(out), k)

    def commutes(self, other: PauliString) -> bool:
        anti = sum(1 for p, q in zip(self.paulis, other.paulis) if "I" not in (p, q) and p != q)
        return anti % 2 == 0

    def matrix(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for p in self.paulis:
            m = np.kron(m, PAULI_MATRICES[p])
        return self.sign * m

    def __str__(self) -> str:
        return ["+", "+i", "-", "-i"][self.phase] + self.paulis


_GATE_ARITY = {"H": 1, "S": 1, "CNOT": 2, "CZ": 2}


@dataclass(frozen=True)
class CliffordCircuit:
    """Ordered gates from ``H``, ``S`` (Phase), ``CNOT`` and ``CZ`` on ``m`` qubits."""

    m: int
    gates: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def __post_init__(self) -> None:
        for name, qs in self.gates:
            if name not in _GATE_ARITY:
                raise ProtocolError(f"{name!r} is not a Clifford gate of this circuit model")
            if len(qs) != _GATE_ARITY[name] or len(set(qs)) != len(qs):
                raise ProtocolError(f"{name} needs {_GATE_ARITY[name]} distinct qubits, got {qs}")
            if any(not 0 <= q < self.m for q in qs):
                raise ProtocolError(f"{name}{qs} targets a qubit outside 0..{self.m - 1}")

    @classmethod
    def parse(cls, text: str, m: int | None = None) -> CliffordCircuit:
        """Read one gate per line: ``H q``, ``S q``, ``CNOT c t`` (``#`` comments)."""
        gates = []
        for line in text.splitlines():
            line = line.split("#")[0].strip()
            if not line:
                continue
            name, *args = line.split()
            try:
                gates.append((name.upper(), tuple(int(a) for a in args)))
            except ValueError:
                raise ProtocolError(f"bad gate line {line!r}") from None
        if m is None:
            m = 1 + max((q for _, qs in gates for q in qs), default=0)
        return cls(m, tuple(gates))

    def to_text(self) -> str:
        return "".join(f"{name} {' '.join(map(str, qs))}\n" for name, qs in self.gates)

    @classmethod
    def random(cls, m: int, n_gates: int, rng: np.random.Generator) -> CliffordCircuit:
        gates = []
        for _ in range(n_gates):
            name = ("H", "S", "CNOT")[rng.integers(3 if m > 1 else 2)]
            qs = rng.choice(m, _GATE_ARITY[name], replace=False)
            gates.append((name, tuple(int(q) for q in qs)))
        return cls(m, tuple(gates))

    def unitary(self) -> np.ndarray:
        from .oracle import MAX_QUBITS

        if self.m > MAX_QUBITS // 2:
            raise ProtocolError("circuit too large for a dense unitary")
        dim = 2**self.m
        cols = []
        for k in range(dim):
            e = np.zeros(dim, dtype=complex)
            e[k] = 1
            s = StateVector(e)
            for name, qs in self.gates:
                s.apply(gate(name, *qs))
            cols.append(s.amplitudes)
        return np.array(cols).T


def propagate(
    gates: Iterable[tuple[str, Sequence[int]]], x: np.ndarray, z: np.ndarray, r: np.ndarray | None = None
) -> None:
    """Conjugate a batch of Hermitian Paulis through ``gates`` in place.

    ``x`` and ``z`` have shape ``(batch, n)``; ``r`` holds sign bits (``-1``
    when set) and may be omitted when signs are not needed. The updates are
    the standard symplectic rules with phase tracking.
    """
    for name, qs in gates:
        if name == "H":
            (q,) = qs
            if r is not None:
                r ^= x[:, q] & z[:, q]
            x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
        elif name == "S":
            (q,) = qs
            if r is not None:
                r ^= x[:, q] & z[:, q]
            z[:, q] ^= x[:, q]
        elif name == "CNOT":
            c, t = qs
            if r is not None:
                r ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
        elif name == "CZ":
            a, b = qs
            if r is not None:
                r ^= x[:, a] & x[:, b] & (z[:, a] ^ z[:, b])
            z[:, a] ^= x[:, b]
            z[:, b] ^= x[:, a]
        elif name == "SWAP":
            a, b = qs
            x[:, [a, b]] = x[:, [b, a]]
            z[:, [a, b]] = z[:, [b, a]]
        else:
            raise ProtocolError(f"cannot propagate through {name}")


def pauli_conjugate(circ: CliffordCircuit, p: PauliString) -> PauliString:
    """Return ``U p U^dagger`` for the circuit unitary ``U``, signs included."""
    if p.n != circ.m:
        raise ProtocolError(f"Pauli on {p.n} qubits, circuit on {circ.m}")
    x, z = (b[None, :].copy() for b in p.bits())
    # split off the Hermitian part: Y = i X Z is stored with x = z = 1
    r = np.zeros(1, dtype=np.uint8)
    propagate(circ.gates, x, z, r)
    out = PauliString.from_bits(x[0], z[0], -1 if r[0] else 1)
    return PauliString(out.paulis, out.phase + p.phase)


# -- backend plumbing ----------------------------------------------------------


def _gate(backend: Backend, name: str, *qs: int, param: float | None = None) -> None:
    if isinstance(backend, StateVector):
        backend.apply(gate(name, *qs, param=param))
        return
    if name == "CZ":
        backend.apply_cz(*qs)
    elif name == "CNOT":
        c, t = qs
        backend.apply_local_clifford(t, "H")
        backend.apply_cz(c, t)
        backend.apply_local_clifford(t, "H")
    elif name == "SWAP":
        backend.swap(*qs)
    elif name in ("RX", "RY", "RZ"):
        mat = gate(name, *qs, param=param).unitary()
        try:
            c = cl.from_matrix(mat)
        except ValueError:
            raise ProtocolError(
                f"{name}({param}) is not a Clifford; use the statevector backend"
            ) from None
        backend.apply_local_clifford(qs[0], c)
    else:
        backend.apply_local_clifford(qs[0], {"SDG": "Sdg"}.get(name, name))


def _measure(backend: Backend, q: int, basis: str, forced: int | None) -> int:
    return backend.measure_pauli(q, basis, forced).value


def _bits(forced: Sequence[int] | None, k: int) -> list[int | None]:
    if forced is None:
        return [None] * k
    if len(forced) != k:
        raise ProtocolError(f"expected {k} forced outcomes, got {len(forced)}")
    return list(forced)


def _is_canonical_pair(backend: Backend, a: int, b: int) -> bool:
    if isinstance(backend, GraphState):
        return backend.is_bell_pair(a, b).canonical
    try:
        red = backend.reduced_pure([a, b])
    except ValueError:
        return False
    bell = np.array([0.5, 0.5, 0.5, -0.5])
    return abs(abs(np.vdot(bell, red.amplitudes)) - 1) < 1e-9


# -- remote gates --------------------------------------------------------------


def remote_cz(
    backend: Backend,
    bell: tuple[int, int] | object,
    d1: int,
    d2: int,
    forced: Sequence[int] | None = None,
    lattice=None,
) -> tuple[int, int]:
    """CZ between ``d1`` and ``d2`` through a canonical Bell pair.

    ``bell`` is a :class:`~clusterroute.routing.BellRecord` or a plain pair
    ``(a, b)`` with ``d1`` next to ``a`` and ``d2`` next to ``b``. Returns the
    X outcomes ``(m1, m2)`` of ``a`` and ``b``.
    """
    a, b = getattr(bell, "pair", bell)
    if not _is_canonical_pair(backend, a, b):
        raise ProtocolError(f"Bell pair {(a, b)} is not in the canonical CZ|+>|+> form")
    if lattice is not None:
        for d, x in ((d1, a), (d2, b)):
            if not lattice.coupled(d, x):
                raise ProtocolError(f"data qubit {d} is not coupled to {x}")
    f1, f2 = _bits(forced, 2)
    _gate(backend, "CZ", d1, a)
    _gate(backend, "CZ", d2, b)
    m1 = _measure(backend, a, "X", f1)
    m2 = _measure(backend, b, "X", f2)
    if m2 == -1:
        _gate(backend, "Z", d1)
    if m1 == -1:
        _gate(backend, "Z", d2)
    return m1, m2


def remote_cnot(
    backend: Backend,
    bell,
    control: int,
    target: int,
    forced: Sequence[int] | None = None,
    lattice=None,
) -> tuple[int, int]:
    """CNOT as Hadamards on the target around :func:`remote_cz`."""
    _gate(backend, "H", target)
    out = remote_cz(backend, bell, control, target, forced, lattice)
    _gate(backend, "H", target)
    return out


# -- GHZ -----------------------------------------------------------------------


@dataclass(frozen=True)
class GhzResource:
    """Star-graph GHZ state: ``root`` joined to every leaf."""

    root: int
    leaves: tuple[int, ...]
    log: tuple[tuple[int, str, int], ...] = field(default=(), compare=False, repr=False)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.root,) + self.leaves

    @property
    def m(self) -> int:
        return 1 + len(self.leaves)

    def is_star(self, state: GraphState) -> bool:
        if state.adj[self.root] != set(self.leaves):
            return False
        return all(state.adj[v] == {self.root} for v in self.leaves)

    def canonicalize(self, state: GraphState) -> None:
        """Remove the tracked vertex operators, leaving the bare star graph."""
        if not self.is_star(state):
            raise ProtocolError("GHZ qubits no longer form a star graph")
        for v in self.qubits:
            state.apply_local_clifford(v, cl.inverse(state.vop[v]))


def prepare_ghz(backend: Backend, qubits: Sequence[int]) -> GhzResource:
    """Entangle fresh ``|+>`` qubits into a star with ``qubits[0]`` as root."""
    root, *leaves = qubits
    for v in leaves:
        _gate(backend, "CZ", root, v)
    return GhzResource(root, tuple(leaves))


def _free_ranked(state: GraphState, src: Sequence[int], taken: set[int], min_dist: int = 0) -> list[int]:
    """Free live vertices by summed distance to ``src``, nearest first."""
    from .routing import _bfs

    dists = [_bfs(state, s) for s in src]
    keys = []
    for v in range(state.n):
        if v in taken or v in state.removed or any(v not in d for d in dists):
            continue
        if min(d[v] for d in dists) < min_dist:
            continue
        keys.append((sum(d[v] for d in dists), v))
    if not keys:
        raise ProtocolError("no free auxiliary vertex available for merging")
    return [v for _, v in sorted(keys)]


def _midpoint(state: GraphState, a: int, b: int, taken: set[int]) -> int:
    """Free vertex on a short route from ``a`` to ``b``, not adjacent to ``a``."""
    from .routing import _bfs

    da, db = _bfs(state, a), _bfs(state, b)
    cands = [
        (da[v] + db[v], abs(da[v] - db[v]), v)
        for v in da
        if v in db and v not in taken and v not in state.removed and da[v] >= 2 and db[v] >= 1
    ]
    if not cands:
        raise ProtocolError(f"no connector vertex available between {a} and {b}")
    return min(cands)[2]


_HELPER_TRIES = 6


def _ghz_tree(state, root, links, chunks, targets, helpers, rank):
    """Links of the GHZ tree and its ``(connector, helper)`` merges."""
    links = list(links)
    taken = set(targets)
    merges = []
    prev = root
    for i, chunk in enumerate(chunks):
        if helpers is not None and i < len(helpers):
            c, h = helpers[i]
        else:
            h = _free_ranked(state, chunk + [prev], taken, min_dist=2)[rank]
            taken.add(h)
            c = _midpoint(state, prev, h, taken)
        taken |= {c, h}
        links += [(prev, c), (c, h)] + [(h, leaf) for leaf in chunk]
        merges.append((c, h))
        prev = h
    return links, merges


def make_ghz(
    state: GraphState,
    targets: Sequence[int],
    coords=None,
    helpers: Sequence[tuple[int, int]] | None = None,
) -> GhzResource:
    """Build a GHZ star on ``targets`` from a live cluster, in place.

    ``m = 2`` gives a Bell pair rooted at ``targets[0]``; ``m = 3`` links
    ``(A1, A2)`` and ``(A2, A3)`` so ``A2`` is the root. Larger ``m`` attaches
    the remaining targets to helper roots, two leaves each, joins every helper
    to the previous root through a connector, and merges the helpers in by
    Y-measuring helper then connector. ``helpers`` may fix the
    ``(connector, helper)`` vertices; otherwise nearby free vertices are used.

    All links are routed on the same snapshot and measured as one round;
    merges are applied afterwards, last helper first. The physical
    measurement log is kept on the result for replay on other backends.
    """
    targets = list(targets)
    m = len(targets)
    if m < 2 or len(set(targets)) != m:
        raise ProtocolError("need at least two distinct targets")
    for v in targets:
        if v in state.removed:
            raise ProtocolError(f"target {v} has already been measured")
    if m == 2:
        root, links = targets[0], [(targets[0], targets[1])]
    else:
        root = targets[1]
        links = [(targets[0], targets[1]), (targets[1], targets[2])]
    rest = targets[3:]
    chunks = [rest[k: k + 2] for k in range(0, len(rest), 2)]
    error = None
    # helper placement is heuristic: fall back to less central helpers
    for rank in range(1 if not chunks or helpers is not None else _HELPER_TRIES):
        try:
            tree, merges = _ghz_tree(state, root, links, chunks, targets, helpers, rank)
            steps, _ = plan_links(state, tree, coords)
            break
        except (RoutingError, ProtocolError, IndexError) as exc:
            error = exc
    else:
        raise ProtocolError(f"routing failed while building GHZ: {error}")
    log = _run(state, steps)
    settle_links(state, tree)
    for c, h in reversed(merges):
        # graph-frame Y, translated just in time
        log += _run(state, [Step(h, "Y")])
        log += _run(state, [Step(c, "Y")])
    ghz = GhzResource(root, tuple(v for v in targets if v != root), tuple(log))
    if not ghz.is_star(state):
        raise ProtocolError("GHZ construction did not produce a star graph")
    return ghz


# -- multi-qubit rotations ------------------------------------------------------


def _axis_in(backend: Backend, q: int, axis: str) -> None:
    """Map the eigenbasis of ``axis`` onto that of Z: ``U^dagger`` with ``U Z U^dagger = axis``."""
    if axis == "X":
        _gate(backend, "H", q)
    elif axis == "Y":
        _gate(backend, "SDG", q)
        _gate(backend, "H", q)


def _axis_out(backend: Backend, q: int, axis: str) -> None:
    if axis == "X":
        _gate(backend, "H", q)
    elif axis == "Y":
        _gate(backend, "H", q)
        _gate(backend, "S", q)


def multi_pauli_rotation(
    backend: Backend,
    ghz: GhzResource,
    data: Sequence[int],
    alpha: float,
    axes: str | None = None,
    forced: Sequence[int] | None = None,
) -> list[int]:
    """Apply ``exp(-i alpha P)`` to ``data`` using a canonical GHZ resource.

    ``P`` is the tensor product of ``axes`` (default all Z). ``data[j]``
    couples to ``ghz.qubits[j]``: a CZ for the root and CNOTs with the data
    qubit as control for the rest. The leaves are read out in Z, fixing the
    root with a Z when their parity is odd; the root is rotated by ``RX``
    and read out in Z, and a -1 is corrected by Z on every data qubit.
    ``forced`` lists the leaf outcomes followed by the root outcome.
    Returns the outcomes in that order.
    """
    m = ghz.m
    axes = "Z" * m if axes is None else axes
    if len(data) != m or len(axes) != m:
        raise ProtocolError(f"need {m} data qubits and axes for an {m}-qubit GHZ")
    if set(axes) - set("XYZ"):
        raise ProtocolError(f"bad axes {axes!r}")
    frac = (4 * alpha / math.pi) % 1
    if isinstance(backend, GraphState) and min(frac, 1 - frac) > 1e-12:
        raise ProtocolError(f"alpha={alpha} is not a Clifford angle on the stabilizer backend")
    fs = _bits(forced, m)
    a = ghz.qubits
    for d, ax in zip(data, axes):
        _axis_in(backend, d, ax)
    _gate(backend, "CZ", data[0], a[0])
    for j in range(1, m):
        _gate(backend, "CNOT", data[j], a[j])
    outs = [_measure(backend, a[j], "Z", fs[j - 1]) for j in range(1, m)]
    if sum(o == -1 for o in outs) % 2:
        _gate(backend, "Z", a[0])
    _gate(backend, "RX", a[0], param=alpha)
    r = _measure(backend, a[0], "Z", fs[m - 1])
    if r == -1:
        for d in data:
            _gate(backend, "Z", d)
    for d, ax in zip(data, axes):
        _axis_out(backend, d, ax)
    return outs + [r]


def diagonal_terms(phases: Sequence[float]) -> list[tuple[tuple[int, ...], float]]:
    """Z-string expansion of ``diag(exp(i phases))`` on ``m`` qubits.

    Returns ``(subset, alpha)`` pairs with
    ``diag = global phase * prod exp(-i alpha Z_subset)``; qubit 0 is the
    most significant bit of the index. The empty subset is dropped.
    """
    phases = np.asarray(phases, dtype=float)
    m = int(round(math.log2(phases.size)))
    if 2**m != phases.size:
        raise ProtocolError("need 2**m phases")
    had = np.array([[1.0]])
    for _ in range(m):
        had = np.kron(had, [[1.0, 1.0], [1.0, -1.0]])
    coeff = had @ phases / 2**m
    out = []
    for s in range(1, 2**m):
        subset = tuple(q for q in range(m) if (s >> (m - 1 - q)) & 1)
        if abs(coeff[s]) > 1e-15:
            out.append((subset, -float(coeff[s])))
    return out


def apply_diagonal(
    sv: StateVector,
    data: Sequence[int],
    phases: Sequence[float],
    aux: Sequence[int],
) -> None:
    """Realize a diagonal gate by GHZ-mediated multi-qubit Z rotations.

    Single-qubit terms are applied directly; each multi-qubit term consumes
    ``|subset|`` fresh ``|+>`` qubits from ``aux``.
    """
    pool = list(aux)
    for subset, alpha in diagonal_terms(phases):
        qs = [data[q] for q in subset]
        if len(qs) == 1:
            sv.apply(gate("RZ", qs[0], param=alpha))
            continue
        if len(pool) < len(qs):
            raise ProtocolError("not enough auxiliary qubits for the diagonal gate")
        res, pool = pool[: len(qs)], pool[len(qs):]
        ghz = prepare_ghz(sv, res)
        multi_pauli_rotation(sv, ghz, qs, alpha)


# -- Clifford teleportation ---------------------------------------------------


def clifford_teleport(
    backend: Backend,
    circ: CliffordCircuit,
    data: Sequence[int],
    aux: Sequence[int],
    out: Sequence[int],
    forced: Sequence[int] | None = None,
    swap_back: bool = False,
) -> list[int]:
    """Apply ``circ`` to ``data`` by teleporting through its Choi state.

    ``aux`` and ``out`` are fresh ``|+>`` qubits, one each per data qubit.
    Each ``(aux[j], out[j])`` becomes ``|phi+>``, the circuit acts on the
    ``out`` qubits, each ``(data[j], aux[j])`` is Bell-measured, and the
    Pauli byproduct pushed through the circuit is undone on ``out``.
    ``forced`` lists the outcomes pairwise ``(data_j, aux_j)``. The result
    lives on ``out``; with ``swap_back`` it is swapped onto ``data``.
    Returns the outcomes.
    """
    m = circ.m
    if not (len(data) == len(aux) == len(out) == m):
        raise ProtocolError(f"need {m} data, auxiliary and output qubits")
    fs = _bits(forced, 2 * m)
    for a, o in zip(aux, out):
        _gate(backend, "CZ", a, o)
        _gate(backend, "H", o)
    for name, qs in circ.gates:
        _gate(backend, name, *(out[q] for q in qs))
    outcomes = []
    x, z = [], []
    for j in range(m):
        _gate(backend, "CNOT", data[j], aux[j])
        _gate(backend, "H", data[j])
        mx = _measure(backend, data[j], "Z", fs[2 * j])
        mz = _measure(backend, aux[j], "Z", fs[2 * j + 1])
        outcomes += [mx, mz]
        x.append(int(mz == -1))
        z.append(int(mx == -1))
    byproduct = PauliString.from_bits(x, z)
    fix = pauli_conjugate(circ, byproduct)
    for q, p in zip(out, fix.paulis):
        if p != "I":
            _gate(backend, p, q)
    if swap_back:
        for d, o in zip(data, out):
            _gate(backend, "SWAP", d, o)
    return outcomes


def branches(k: int) -> Iterator[tuple[int, ...]]:
    """All ``2**k`` tuples of +-1 outcomes."""
    return itertools.product((1, -1), repeat=k)
