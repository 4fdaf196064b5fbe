"""Hamiltonian builders for the spin, fermion, and gauge problem families.

Sign and boundary conventions (recorded here and in the instance registry so
prompts and reference solvers always agree):

* TFIM, open chain, ferromagnetic couplings:
  ``H = -J sum_i Z_i Z_{i+1} - h sum_i X_i``.
* Fermi-Hubbard, open chain, spin-orbital mode ``2*site + spin``
  (spin 0 = up, 1 = down):
  ``H = -t sum_{<i,j>,s} (c^dag_{i,s} c_{j,s} + h.c.) + U sum_i n_{i,up} n_{i,dn}``.
* Lattice Schwinger model, staggered fermions on an open chain with the gauge
  field eliminated:
  ``H = h_hop sum_n (sp_n sm_{n+1} + h.c.) + (m/2) sum_n (-1)^n Z_n
  + g sum_{n<L-1} E_n^2`` with ``E_n = sum_{k<=n} (Z_k + (-1)^k)/2``.
"""

from __future__ import annotations

import numpy as np

from .fermion import FermionTerm, jordan_wigner_sum
from .pauli import PauliString, PauliSum, StateVector


def tfim_hamiltonian(L: int, J: float, h: float) -> PauliSum:
    """Transverse-field Ising chain with open boundaries."""
    if L < 1:
        raise ValueError("L must be >= 1")
    terms = []
    for i in range(L - 1):
        terms.append((-J, PauliString.from_ops(L, {i: "Z", i + 1: "Z"})))
    for i in range(L):
        terms.append((-h, PauliString.from_ops(L, {i: "X"})))
    return PauliSum(L, terms)


def hubbard_mode(site: int, spin: int) -> int:
    """Spin-orbital mode index: up/down interleaved per site."""
    return 2 * site + spin


def hubbard_hamiltonian(L: int, t: float, U: float) -> PauliSum:
    """Jordan-Wigner image of the open-chain Fermi-Hubbard model on 2L qubits."""
    if L < 1:
        raise ValueError("L must be >= 1")
    n_modes = 2 * L
    terms = []
    for i in range(L - 1):
        for spin in (0, 1):
            a, b = hubbard_mode(i, spin), hubbard_mode(i + 1, spin)
            terms.append(FermionTerm(-t, ((a, True), (b, False))))
            terms.append(FermionTerm(-t, ((b, True), (a, False))))
    for i in range(L):
        up, dn = hubbard_mode(i, 0), hubbard_mode(i, 1)
        terms.append(FermionTerm(U, ((up, True), (up, False), (dn, True), (dn, False))))
    return jordan_wigner_sum(terms, n_modes)


def half_filling_sector(L: int) -> tuple[int, int]:
    """Default (n_up, n_down) for a half-filled chain; Sz=0 when L is even."""
    return ((L + 1) // 2, L // 2)


def hubbard_sector_mask(L: int, n_up: int, n_down: int) -> np.ndarray:
    """Boolean mask over the 4**L basis selecting fixed (n_up, n_down) occupation."""
    n_modes = 2 * L
    indices = np.arange(2 ** n_modes, dtype=np.uint64)
    ups = np.zeros(len(indices), dtype=np.int64)
    downs = np.zeros(len(indices), dtype=np.int64)
    for site in range(L):
        up_bit = np.uint64(1 << (n_modes - 1 - hubbard_mode(site, 0)))
        dn_bit = np.uint64(1 << (n_modes - 1 - hubbard_mode(site, 1)))
        ups += (indices & up_bit) != 0
        downs += (indices & dn_bit) != 0
    return (ups == n_up) & (downs == n_down)


def schwinger_hamiltonian(L: int, h_hop: float, g: float, m: float) -> PauliSum:
    """Gauge-eliminated lattice Schwinger Hamiltonian on an even open chain."""
    if L < 2 or L % 2 != 0:
        raise ValueError("L must be even and >= 2")
    total = PauliSum.zero(L)
    hop_terms = []
    for n in range(L - 1):
        # sp_n sm_{n+1} + h.c. = (X_n X_{n+1} + Y_n Y_{n+1}) / 2
        hop_terms.append((h_hop / 2.0, PauliString.from_ops(L, {n: "X", n + 1: "X"})))
        hop_terms.append((h_hop / 2.0, PauliString.from_ops(L, {n: "Y", n + 1: "Y"})))
    total = total + PauliSum(L, hop_terms)
    mass_terms = [
        ((m / 2.0) * (-1) ** n, PauliString.from_ops(L, {n: "Z"})) for n in range(L)
    ]
    total = total + PauliSum(L, mass_terms)
    for n in range(L - 1):
        field_n = electric_field(L, n)
        total = total + g * (field_n * field_n)
    return total


def electric_field(L: int, n: int) -> PauliSum:
    """Electric field on link n after Gauss-law elimination: sum_{k<=n} (Z_k + (-1)^k)/2."""
    terms = [(0.5, PauliString.from_ops(L, {k: "Z"})) for k in range(n + 1)]
    const = sum((-1) ** k for k in range(n + 1)) / 2.0
    terms.append((const, PauliString.identity(L)))
    return PauliSum(L, terms)


def staggered_vacuum(L: int) -> StateVector:
    """Zero-charge, zero-particle state: qubit n in |1> for even n, |0> for odd n."""
    return StateVector.from_bits([1 - (n % 2) for n in range(L)])


def mean_particle_number(L: int) -> PauliSum:
    """Observable (1/L) sum_n ((-1)^n Z_n + 1)/2; zero on the staggered vacuum."""
    terms = [
        ((-1) ** n / (2.0 * L), PauliString.from_ops(L, {n: "Z"})) for n in range(L)
    ]
    terms.append((0.5, PauliString.identity(L)))
    return PauliSum(L, terms)
