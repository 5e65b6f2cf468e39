"""Dense statevector simulator used as ground truth.

Qubit 0 is the most significant bit of the amplitude index. States are capped
at :data:`MAX_QUBITS` qubits.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .clifford import PAULI_MATRICES, Outcome, PauliBasis

MAX_QUBITS = 20
_SQ2 = np.sqrt(0.5)

_FIXED = {
    "I": PAULI_MATRICES["I"],
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
_ARITY = {"CZ": 2, "CNOT": 2, "SWAP": 2, "CPHASE": 2}


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    """A gate and the qubits it acts on.

    ``kind`` is one of H, S, SDG, X, Y, Z, CZ, CNOT, SWAP, RX, RY, RZ, CPHASE
    or U. ``RX(a)`` is ``exp(-i a X)``, matching the rotation convention used
    by the multi-qubit rotation protocol; ``CPHASE(phi)`` is
    ``diag(1, 1, 1, e^{i phi})``; ``U`` carries an explicit matrix.
    """

    kind: str
    targets: tuple[int, ...]
    param: float | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)

    def unitary(self) -> np.ndarray:
        kind = self.kind.upper()
        if kind in _FIXED:
            return _FIXED[kind]
        if kind in ("RX", "RY", "RZ"):
            p = PAULI_MATRICES[kind[1]]
            a = float(self.param)
            return np.cos(a) * np.eye(2) - 1j * np.sin(a) * p
        if kind == "CPHASE":
            return np.diag([1, 1, 1, np.exp(1j * float(self.param))])
        if kind == "U":
            if self.matrix is None:
                raise OracleError("U gate needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12):
                raise OracleError("matrix is not unitary")
            return m
        raise OracleError(f"unknown gate kind {self.kind!r}")

    def inverse(self) -> GateSpec:
        return GateSpec("U", self.targets, matrix=self.unitary().conj().T)


def gate(kind: str, *targets: int, param: float | None = None) -> GateSpec:
    return GateSpec(kind.upper(), tuple(targets), param)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise OracleError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


class StateVector:
    """Pure state on ``n`` qubits stored as a ``(2,)*n`` tensor."""

    def __init__(self, amplitudes: np.ndarray):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise OracleError("amplitude count is not a power of two")
        _check_n(n)
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-10:
            raise OracleError(f"state is not normalized (norm={norm})")
        self.n = n
        self._t = amps.reshape((2,) * n)

    @classmethod
    def basis(cls, bits: Sequence[int]) -> StateVector:
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int("".join(str(b) for b in bits), 2) if bits else 0] = 1
        return cls(amps)

    @classmethod
    def product(cls, qubit_states: Sequence[Sequence[complex]]) -> StateVector:
        amps = np.array([1.0 + 0j])
        for s in qubit_states:
            v = np.asarray(s, dtype=complex)
            amps = np.kron(amps, v / np.linalg.norm(v))
        return cls(amps)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._t.reshape(-1).copy()

    def copy(self) -> StateVector:
        out = object.__new__(StateVector)
        out.n = self.n
        out._t = self._t.copy()
        return out

    def _check_targets(self, targets: Sequence[int]) -> None:
        if len(set(targets)) != len(targets):
            raise OracleError(f"duplicate targets {tuple(targets)}")
        for q in targets:
            if not 0 <= q < self.n:
                raise OracleError(f"qubit {q} out of range for {self.n} qubits")

    def apply_matrix(self, mat: np.ndarray, targets: Sequence[int]) -> StateVector:
        targets = list(targets)
        self._check_targets(targets)
        k = len(targets)
        m = np.asarray(mat, dtype=complex).reshape((2,) * (2 * k))
        t = np.tensordot(m, self._t, axes=(list(range(k, 2 * k)), targets))
        self._t = np.moveaxis(t, list(range(k)), targets)
        return self

    def apply(self, g: GateSpec) -> StateVector:
        u = g.unitary()
        arity = _ARITY.get(g.kind.upper(), int(round(np.log2(u.shape[0]))))
        if len(g.targets) != arity:
            raise OracleError(f"{g.kind} acts on {arity} qubit(s), got {g.targets}")
        return self.apply_matrix(u, g.targets)

    def probability(self, q: int, basis: PauliBasis | str, value: int) -> float:
        projected = self._project(q, PauliBasis(basis), value)
        return float(np.vdot(projected, projected).real)

    def _project(self, q: int, basis: PauliBasis, value: int) -> np.ndarray:
        self._check_targets([q])
        p = PAULI_MATRICES[basis.value]
        proj = (np.eye(2) + value * p) / 2
        t = np.tensordot(proj, self._t, axes=([1], [q]))
        return np.moveaxis(t, 0, q)

    def measure_pauli(
        self,
        q: int,
        basis: PauliBasis | str,
        forced: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> Outcome:
        """Projectively measure qubit ``q``; collapses the state in place."""
        basis = PauliBasis(basis)
        if forced is not None:
            if forced not in (1, -1):
                raise OracleError(f"forced outcome must be +1 or -1, got {forced}")
            value = forced
            prob = self.probability(q, basis, value)
            if prob < 1e-12:
                raise OracleError(
                    f"forced outcome {forced} has zero probability on qubit {q}"
                )
        else:
            p_plus = self.probability(q, basis, 1)
            rng = rng if rng is not None else np.random.default_rng()
            value = 1 if rng.random() < p_plus else -1
            prob = p_plus if value == 1 else 1 - p_plus
        t = self._project(q, basis, value)
        self._t = t / np.sqrt(prob)
        return Outcome(value, forced is not None)

    def expectation(self, mat: np.ndarray, targets: Sequence[int]) -> complex:
        other = self.copy().apply_matrix(mat, targets)
        return complex(np.vdot(self._t, other._t))

    def fidelity(self, other: StateVector) -> float:
        if self.n != other.n:
            raise OracleError(f"dimension mismatch: {self.n} vs {other.n} qubits")
        return float(min(1.0, abs(np.vdot(self._t, other._t)) ** 2))

    def reduced_pure(self, keep: Sequence[int], tol: float = 1e-9) -> StateVector:
        """Return the state of ``keep`` when it is unentangled from the rest."""
        keep = list(keep)
        rest = [q for q in range(self.n) if q not in keep]
        t = np.transpose(self._t, keep + rest).reshape(2 ** len(keep), -1)
        u, s, _ = np.linalg.svd(t, full_matrices=False)
        if len(s) > 1 and s[1] > tol:
            raise OracleError(f"qubits {keep} are entangled with the rest")
        return StateVector(u[:, 0])

    def to_json(self) -> str:
        amps = self.amplitudes
        return json.dumps({"n": self.n, "re": amps.real.tolist(), "im": amps.imag.tolist()})

    @classmethod
    def from_json(cls, text: str) -> StateVector:
        d = json.loads(text)
        return cls(np.array(d["re"]) + 1j * np.array(d["im"]))

    def __repr__(self) -> str:
        return f"StateVector(n={self.n})"


def init_plus(n: int) -> StateVector:
    _check_n(n)
    return StateVector(np.full(2**n, 2 ** (-n / 2), dtype=complex))


def apply(s: StateVector, g: GateSpec) -> StateVector:
    return s.apply(g)


def measure_pauli(
    s: StateVector,
    q: int,
    basis: PauliBasis | str,
    forced: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[Outcome, StateVector]:
    out = s.measure_pauli(q, basis, forced, rng)
    return out, s


def fidelity(s: StateVector, t: StateVector) -> float:
    return s.fidelity(t)


def graph_state(n: int, edges: Iterable[tuple[int, int]]) -> StateVector:
    """``prod CZ |+>^n`` built by phase flips on the amplitude vector."""
    _check_n(n)
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    parity = np.zeros(2**n, dtype=np.int64)
    for i, j in edges:
        parity ^= bits[:, i] & bits[:, j]
    amps = np.where(parity, -1.0, 1.0) * 2 ** (-n / 2)
    return StateVector(amps.astype(complex))


def phase_normalized(amps: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Divide out the phase of the first non-negligible amplitude."""
    amps = np.asarray(amps, dtype=complex).ravel()
    k = int(np.argmax(np.abs(amps) > tol))
    return amps * (abs(amps[k]) / amps[k])


def equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    if a.n != b.n:
        return False
    return bool(
        np.max(np.abs(phase_normalized(a.amplitudes) - phase_normalized(b.amplitudes)))
        < tol
    )
