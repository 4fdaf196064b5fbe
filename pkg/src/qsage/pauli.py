"""Sparse Pauli-string operator algebra and dense/matrix-free kernels.

Conventions used throughout the package:

* A Pauli string is a word over ``{I, X, Y, Z}`` with one letter per qubit.
* Qubit 0 is the *leftmost* tensor factor, i.e. the most significant bit of
  a computational-basis index.  ``to_dense`` therefore builds
  ``kron(op_0, kron(op_1, ...))`` and basis state ``|b_0 b_1 ... b_{n-1}>``
  has index ``sum(b_q << (n - 1 - q))``.
* Sums are kept canonical: terms sorted lexicographically by letter string,
  duplicate strings merged, coefficients with ``|c| < 1e-14`` dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

PAULI_LETTERS = "IXYZ"
COEFF_CUTOFF = 1e-14
DENSE_QUBIT_CAP = 12

# single-qubit product table: (left, right) -> (phase, letter)
_PRODUCT = {}
for _a in PAULI_LETTERS:
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
    _PRODUCT[(_a, _a)] = (1, "I")
_PRODUCT[("X", "Y")] = (1j, "Z")
_PRODUCT[("Y", "X")] = (-1j, "Z")
_PRODUCT[("Y", "Z")] = (1j, "X")
_PRODUCT[("Z", "Y")] = (-1j, "X")
_PRODUCT[("Z", "X")] = (1j, "Y")
_PRODUCT[("X", "Z")] = (-1j, "Y")

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, order=True)
class PauliString:
    """A tensor product of single-qubit Paulis, stored as a letter string."""

    letters: str

    def __post_init__(self):
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)!r} in {self.letters!r}")

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Mapping[int, str]) -> "PauliString":
        """Build a string acting with ``ops[q]`` on qubit ``q`` and I elsewhere."""
        letters = ["I"] * n_qubits
        for q, letter in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
            letters[q] = letter
        return cls("".join(letters))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls("I" * n_qubits)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return sum(1 for c in self.letters if c != "I")


def _mul_strings(a: str, b: str) -> tuple[complex, str]:
    phase = 1 + 0j
    letters = []
    for la, lb in zip(a, b):
        p, l = _PRODUCT[(la, lb)]
        phase *= p
        letters.append(l)
    return phase, "".join(letters)


class PauliSum:
    """Weighted sum of Pauli strings on a fixed qubit register.

    Immutable after construction; all algebra returns new sums in canonical
    form.  This is the universal Hamiltonian carrier for the reference
    solvers.
    """

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[complex, PauliString]] = ()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        merged: dict[str, complex] = {}
        for coeff, string in terms:
            if isinstance(string, str):
                string = PauliString(string)
            if len(string) != n_qubits:
                raise ValueError(
                    f"term {string.letters!r} has length {len(string)}, expected {n_qubits}"
                )
            coeff = complex(coeff)
            if not np.isfinite(coeff.real) or not np.isfinite(coeff.imag):
                raise ValueError(f"non-finite coefficient {coeff} for {string.letters!r}")
            merged[string.letters] = merged.get(string.letters, 0j) + coeff
        canonical = tuple(
            (c, PauliString(s))
            for s, c in sorted(merged.items())
            if abs(c) >= COEFF_CUTOFF
        )
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "terms", canonical)

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, [(coeff, PauliString.identity(n_qubits))])

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, [])

    @classmethod
    def from_ops(cls, n_qubits: int, coeff: complex, ops: Mapping[int, str]) -> "PauliSum":
        return cls(n_qubits, [(coeff, PauliString.from_ops(n_qubits, ops))])

    def coefficient(self, letters: str) -> complex:
        """Coefficient of the given letter string (0 if absent)."""
        for c, s in self.terms:
            if s.letters == letters:
                return c
        return 0j

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_compatible(other)
        return PauliSum(self.n_qubits, list(self.terms) + list(other.terms))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __neg__(self) -> "PauliSum":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check_compatible(other)
            terms = []
            for ca, sa in self.terms:
                for cb, sb in other.terms:
                    phase, letters = _mul_strings(sa.letters, sb.letters)
                    terms.append((ca * cb * phase, PauliString(letters)))
            return PauliSum(self.n_qubits, terms)
        return PauliSum(self.n_qubits, [(c * other, s) for c, s in self.terms])

    def __rmul__(self, scalar) -> "PauliSum":
        return self * scalar

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliSum)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n_qubits, self.terms))

    def isclose(self, other: "PauliSum", tol: float = 1e-12) -> bool:
        self._check_compatible(other)
        diff = self - other
        return all(abs(c) <= tol for c, _ in diff.terms)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self.terms)

    def _check_compatible(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise ValueError(
                f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}"
            )

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*{s}" for c, s in self.terms) or "0"
        return f"PauliSum({self.n_qubits}, {body})"


@dataclass(frozen=True)
class StateVector:
    """State of an n-qubit register; amplitudes are read-only after construction."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected (2**{self.n_qubits},)"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        """Computational basis state; qubit 0 is the most significant bit of ``index``."""
        if not 0 <= index < 2 ** n_qubits:
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "StateVector":
        index = 0
        for b in bits:
            index = (index << 1) | (b & 1)
        return cls.basis(len(bits), index)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amplitudes / n)

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _term_action(letters: str, n: int) -> tuple[int, int, complex]:
    """Bit masks describing a Pauli string as a basis permutation with phases.

    Returns ``(flip_mask, phase_mask, y_phase)`` so that the string maps
    ``|k>`` to ``y_phase * (-1)**popcount(k & phase_mask) * |k ^ flip_mask>``.
    """
    flip = 0
    phase_mask = 0
    n_y = 0
    for q, letter in enumerate(letters):
        bit = 1 << (n - 1 - q)
        if letter in "XY":
            flip |= bit
        if letter in "YZ":
            phase_mask |= bit
        if letter == "Y":
            n_y += 1
    return flip, phase_mask, 1j ** n_y


def apply(h: PauliSum, psi: StateVector) -> StateVector:
    """Matrix-free H|psi>; cost O(len(h.terms) * 2**n), no dense matrix built."""
    if h.n_qubits != psi.n_qubits:
        raise ValueError(
            f"dimension mismatch: operator on {h.n_qubits} qubits, state on {psi.n_qubits}"
        )
    n = h.n_qubits
    dim = 2 ** n
    src = psi.amplitudes
    out = np.zeros(dim, dtype=complex)
    indices = np.arange(dim, dtype=np.uint64)
    for coeff, string in h.terms:
        flip, phase_mask, y_phase = _term_action(string.letters, n)
        signs = 1.0 - 2.0 * (np.bitwise_count(indices & np.uint64(phase_mask)) & 1)
        targets = indices ^ np.uint64(flip)
        out[targets] += (coeff * y_phase) * signs * src
    return StateVector(n, out)


def to_dense(h: PauliSum, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense matrix of the sum via explicit Kronecker products.

    Deliberately the naive construction: it serves as the oracle the
    matrix-free path is tested against.
    """
    if h.n_qubits > cap:
        raise ValueError(f"{h.n_qubits} qubits exceeds the dense cap of {cap}")
    dim = 2 ** h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in h.terms:
        m = _MATRICES[string.letters[0]]
        for letter in string.letters[1:]:
            m = np.kron(m, _MATRICES[letter])
        out += coeff * m
    return out


def expectation(h: PauliSum, psi: StateVector) -> complex:
    """<psi|H|psi> (complex; real for Hermitian sums and normalized states)."""
    return psi.overlap(apply(h, psi))
