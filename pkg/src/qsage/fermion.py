"""Fermionic ladder-operator terms and their qubit images.

The mapping convention is fixed once for the whole package:
``a_j -> Z_0 ... Z_{j-1} (X_j + i Y_j)/2`` (parity string on the modes
*below* the ladder mode), hence ``a_j^dag`` carries ``(X_j - i Y_j)/2``.
Mode ``j`` lives on qubit ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .pauli import PauliString, PauliSum


@dataclass(frozen=True)
class FermionTerm:
    """A scalar times an ordered product of ladder operators.

    ``ladder`` is applied as written, leftmost factor first, so
    ``FermionTerm(1.0, ((0, True), (0, False)))`` is the number operator
    ``a_0^dag a_0``.  An empty ladder is a constant term.
    """

    coefficient: complex
    ladder: tuple[tuple[int, bool], ...] = ()

    def __post_init__(self):
        coeff = complex(self.coefficient)
        if not (np.isfinite(coeff.real) and np.isfinite(coeff.imag)):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(
            self, "ladder", tuple((int(m), bool(d)) for m, d in self.ladder)
        )
        for mode, _ in self.ladder:
            if mode < 0:
                raise ValueError(f"negative mode index {mode}")

    @property
    def max_mode(self) -> int:
        return max((m for m, _ in self.ladder), default=-1)

    def dagger(self) -> "FermionTerm":
        """Hermitian conjugate: reverse the ladder, flip daggers, conjugate."""
        return FermionTerm(
            self.coefficient.conjugate(),
            tuple((m, not d) for m, d in reversed(self.ladder)),
        )


def _ladder_image(mode: int, dagger: bool, n_modes: int) -> PauliSum:
    parity = {k: "Z" for k in range(mode)}
    x_string = PauliString.from_ops(n_modes, {**parity, mode: "X"})
    y_string = PauliString.from_ops(n_modes, {**parity, mode: "Y"})
    y_coeff = -0.5j if dagger else 0.5j
    return PauliSum(n_modes, [(0.5, x_string), (y_coeff, y_string)])


def jordan_wigner(term: FermionTerm, n_modes: int) -> PauliSum:
    """Qubit image of a single fermionic term on ``n_modes`` modes."""
    if term.max_mode >= n_modes:
        raise ValueError(
            f"mode index {term.max_mode} out of range for {n_modes} modes"
        )
    result = PauliSum.identity(n_modes, term.coefficient)
    for mode, dagger in term.ladder:
        result = result * _ladder_image(mode, dagger, n_modes)
    return result


def jordan_wigner_sum(terms: Iterable[FermionTerm], n_modes: int) -> PauliSum:
    """Map a sum of fermionic terms; the transform is linear."""
    total = PauliSum.zero(n_modes)
    for term in terms:
        total = total + jordan_wigner(term, n_modes)
    return total
