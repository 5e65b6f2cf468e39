"""Single-qubit Clifford group and Pauli-measurement primitives.

The 24 elements (modulo global phase) are generated from ``H`` and ``S`` at
import time. Every element has a canonical name; see :data:`NAMES`.
Composition, inversion and Pauli conjugation are exposed as lookup tables
indexed by element id.

Naming: the eleven familiar gates keep their usual names
(``I X Y Z H S Sdg SX SXdg SY SYdg``); the remaining thirteen are named by the
shortest word over ``H``/``S`` that produces them, read as a matrix product
left to right (``"HS"`` is ``H @ S``, i.e. ``S`` acts first).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

_SQ2 = np.sqrt(0.5)

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliBasis(str, enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def matrix(self) -> np.ndarray:
        return PAULI_MATRICES[self.value]


@dataclass(frozen=True)
class Outcome:
    """Result of a single-qubit Pauli measurement; ``value`` is +1 or -1."""

    value: int
    forced: bool = False

    def __post_init__(self) -> None:
        if self.value not in (1, -1):
            raise ValueError(f"outcome must be +1 or -1, got {self.value}")

    @property
    def bit(self) -> int:
        """Outcome as the exponent m in (-1)**m."""
        return 0 if self.value == 1 else 1


def _canonical(mat: np.ndarray) -> np.ndarray:
    flat = mat.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return mat * (abs(flat[k]) / flat[k])


def _key(mat: np.ndarray) -> tuple:
    c = _canonical(mat)
    return tuple(np.round(c.ravel(), 8).tolist())


_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
_S = np.diag([1, 1j]).astype(complex)
_NAMED = {
    "I": np.eye(2, dtype=complex),
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
    "H": _H,
    "S": _S,
    "Sdg": _S.conj().T,
    "SX": _H @ _S @ _H,
    "SXdg": _H @ _S.conj().T @ _H,
    # sqrt(Y) maps Z -> X; up to phase this is exp(-i pi/4 Y)
    "SY": (np.eye(2) - 1j * PAULI_MATRICES["Y"]) * _SQ2,
    "SYdg": (np.eye(2) + 1j * PAULI_MATRICES["Y"]) * _SQ2,
}


def _generate() -> tuple[list[str], list[np.ndarray]]:
    words: dict[tuple, str] = {}
    mats: dict[tuple, np.ndarray] = {}
    queue = deque([("", np.eye(2, dtype=complex))])
    while queue:
        word, mat = queue.popleft()
        k = _key(mat)
        if k in words:
            continue
        words[k] = word or "I"
        mats[k] = _canonical(mat)
        for letter, gen in (("H", _H), ("S", _S)):
            queue.append((word + letter, mat @ gen))
    assert len(words) == 24
    names: list[str] = []
    matrices: list[np.ndarray] = []
    for name, mat in _NAMED.items():
        k = _key(mat)
        names.append(name)
        matrices.append(mats.pop(k))
        words.pop(k)
    for k, word in words.items():
        names.append(word)
        matrices.append(mats[k])
    return names, matrices


NAMES, MATRICES = _generate()
INDEX = {name: i for i, name in enumerate(NAMES)}
_KEYS = {_key(m): i for i, m in enumerate(MATRICES)}

IDENTITY = INDEX["I"]
DIAGONAL = frozenset(INDEX[n] for n in ("I", "Z", "S", "Sdg"))


def from_matrix(mat: np.ndarray) -> int:
    """Return the element id of a 2x2 Clifford unitary (phase ignored)."""
    try:
        return _KEYS[_key(np.asarray(mat, dtype=complex))]
    except KeyError:
        raise ValueError("matrix is not a single-qubit Clifford") from None


def lookup(c: int | str) -> int:
    if isinstance(c, str):
        try:
            return INDEX[c]
        except KeyError:
            raise ValueError(f"unknown Clifford name {c!r}") from None
    if not 0 <= c < 24:
        raise ValueError(f"Clifford id out of range: {c}")
    return int(c)


MULT = np.array(
    [[from_matrix(a @ b) for b in MATRICES] for a in MATRICES], dtype=np.int8
)
INVERSE = np.array([from_matrix(m.conj().T) for m in MATRICES], dtype=np.int8)


def compose(a: int, b: int) -> int:
    """Element id of the product ``a @ b`` (``b`` acts first)."""
    return int(MULT[a, b])


def inverse(a: int) -> int:
    return int(INVERSE[a])


def _conjugation_table() -> dict[tuple[int, str], tuple[int, str]]:
    table = {}
    for i, u in enumerate(MATRICES):
        for p in "XYZ":
            image = u @ PAULI_MATRICES[p] @ u.conj().T
            for q in "XYZ":
                overlap = np.trace(PAULI_MATRICES[q] @ image).real / 2
                if abs(abs(overlap) - 1) < 1e-9:
                    table[i, p] = (int(round(overlap)), q)
    return table


_CONJ = _conjugation_table()


def conjugate(c: int, pauli: str) -> tuple[int, str]:
    """Return ``(sign, q)`` with ``C P C^dagger = sign * Q``."""
    return _CONJ[c, pauli]


def pull_back(c: int, pauli: str) -> tuple[int, str]:
    """Return ``(sign, q)`` with ``C^dagger P C = sign * Q``."""
    return _CONJ[int(INVERSE[c]), pauli]


_PRODUCT = {
    ("X", "Y"): (1, "Z"),
    ("Y", "Z"): (1, "X"),
    ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"),
    ("Z", "Y"): (3, "X"),
    ("X", "Z"): (3, "Y"),
}


def pauli_product(p: str, q: str) -> tuple[int, str]:
    """Return ``(k, r)`` with ``P Q = i**k R`` for single-qubit Paulis."""
    if p == "I":
        return 0, q
    if q == "I":
        return 0, p
    if p == q:
        return 0, "I"
    return _PRODUCT[p, q]


# |+> -> eigenstate preparations used when a measured vertex is detached
PREPARE = {
    ("X", 1): IDENTITY,
    ("X", -1): INDEX["Z"],
    ("Y", 1): INDEX["S"],
    ("Y", -1): INDEX["Sdg"],
    ("Z", 1): INDEX["H"],
    ("Z", -1): from_matrix(PAULI_MATRICES["X"] @ _H),
}

# local complementation factors: |tau_a G> = sqrt(-iX)_a prod_b sqrt(iZ)_b |G>
SQRT_MINUS_IX = from_matrix((np.eye(2) - 1j * PAULI_MATRICES["X"]) * _SQ2)
SQRT_IZ = from_matrix((np.eye(2) + 1j * PAULI_MATRICES["Z"]) * _SQ2)
