"""Full configuration interaction from FCIDUMP-style molecular integrals.

Integral conventions follow the FCIDUMP format: spatial-orbital indices are
1-based in the file, two-electron integrals are chemist-notation ``(ij|kl)``
with the full 8-fold real-orbital symmetry, a line ``value i j 0 0`` carries
the one-body element ``h_ij``, and ``value 0 0 0 0`` the scalar core energy.

The solver builds the Hamiltonian directly in the Sz = 0 determinant basis
using bit-mask ladder operators (spin-orbital ``2*p + spin`` occupies bit
``2*p + spin``), so its cost scales with the sector size instead of the full
Fock space.  Tests cross-check it against an independent Jordan-Wigner route.
"""

from __future__ import annotations

import itertools
import re
import time
from dataclasses import dataclass

import numpy as np

from .fermion import FermionTerm
from .pauli import COEFF_CUTOFF

SYMMETRY_TOL = 1e-10
SECTOR_CAP = 4096


class FCIDumpError(ValueError):
    """Raised for unreadable or inconsistent integral files."""


@dataclass(frozen=True)
class IntegralSet:
    """Spatial-orbital integrals for a molecular Hamiltonian.

    ``one_body[p, q]`` is ``h_pq``; ``two_body[p, q, r, s]`` is the chemist
    integral ``(pq|rs)``.  Arrays are defensively copied and frozen.
    """

    n_orbitals: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray

    def __post_init__(self) -> None:
        n = self.n_orbitals
        if n < 1:
            raise ValueError("need at least one orbital")
        if not 0 <= self.n_electrons <= 2 * n:
            raise ValueError(f"electron count {self.n_electrons} out of range")
        h = np.array(self.one_body, dtype=np.float64)
        g = np.array(self.two_body, dtype=np.float64)
        if h.shape != (n, n):
            raise ValueError(f"one_body shape {h.shape}, expected {(n, n)}")
        if g.shape != (n, n, n, n):
            raise ValueError(f"two_body shape {g.shape}, expected 4x n={n}")
        if np.max(np.abs(h - h.T)) > SYMMETRY_TOL:
            raise ValueError("one_body is not symmetric")
        for perm, label in (
            ((1, 0, 2, 3), "(ji|kl)"),
            ((0, 1, 3, 2), "(ij|lk)"),
            ((2, 3, 0, 1), "(kl|ij)"),
        ):
            if np.max(np.abs(g - g.transpose(perm))) > SYMMETRY_TOL:
                raise ValueError(f"two_body violates {label} symmetry")
        h.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "one_body", h)
        object.__setattr__(self, "two_body", g)

    @property
    def n_modes(self) -> int:
        return 2 * self.n_orbitals


_HEADER_FIELD = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([-\d]+)")


def read_fcidump(path: str) -> IntegralSet:
    """Parse an FCIDUMP file into an :class:`IntegralSet`."""
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].upper().startswith("&FCI"):
        raise FCIDumpError(f"{path}: missing &FCI header")
    header_lines = []
    body_start = None
    for idx, ln in enumerate(lines):
        header_lines.append(ln)
        if ln.rstrip().endswith("/") or ln.upper().endswith("&END"):
            body_start = idx + 1
            break
    if body_start is None:
        raise FCIDumpError(f"{path}: header not terminated by '/'")
    fields = dict(_HEADER_FIELD.findall(" ".join(header_lines).upper()))
    try:
        n_orb = int(fields["NORB"])
        n_elec = int(fields["NELEC"])
    except KeyError as exc:
        raise FCIDumpError(f"{path}: header missing {exc.args[0]}") from None

    h = np.zeros((n_orb, n_orb))
    g = np.zeros((n_orb, n_orb, n_orb, n_orb))
    core = 0.0
    for ln in lines[body_start:]:
        parts = ln.split()
        if len(parts) != 5:
            raise FCIDumpError(f"{path}: malformed integral line {ln!r}")
        try:
            value = float(parts[0])
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FCIDumpError(f"{path}: malformed integral line {ln!r}") from None
        if max(i, j, k, l) > n_orb or min(i, j, k, l) < 0:
            raise FCIDumpError(f"{path}: orbital index out of range in {ln!r}")
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FCIDumpError(f"{path}: bad one-body indices in {ln!r}")
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise FCIDumpError(f"{path}: mixed zero indices in {ln!r}")
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in _eightfold((p, q, r, s)):
                g[a, b, c, d] = value
    return IntegralSet(n_orb, n_elec, core, h, g)


def _eightfold(idx: tuple[int, int, int, int]):
    p, q, r, s = idx
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def spin_orbital(orbital: int, spin: int) -> int:
    """Interleaved spin-orbital index (alpha = even, beta = odd)."""
    return 2 * orbital + spin


def molecular_fermion_terms(integrals: IntegralSet) -> list[FermionTerm]:
    """Second-quantised Hamiltonian terms (core energy excluded).

    ``H = sum_pq h_pq a+_ps a_qs + (1/2) sum_pqrs (pq|rs) a+_ps a+_rt a_st a_qs``.
    """
    n = integrals.n_orbitals
    terms: list[FermionTerm] = []
    for p in range(n):
        for q in range(n):
            hpq = integrals.one_body[p, q]
            if abs(hpq) < COEFF_CUTOFF:
                continue
            for s in (0, 1):
                terms.append(
                    FermionTerm(hpq, ((spin_orbital(p, s), True), (spin_orbital(q, s), False)))
                )
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    gval = integrals.two_body[p, q, r, s]
                    if abs(gval) < COEFF_CUTOFF:
                        continue
                    for sig in (0, 1):
                        for tau in (0, 1):
                            ladder = (
                                (spin_orbital(p, sig), True),
                                (spin_orbital(r, tau), True),
                                (spin_orbital(s, tau), False),
                                (spin_orbital(q, sig), False),
                            )
                            terms.append(FermionTerm(0.5 * gval, ladder))
    return terms


def _apply_ladder(mask: int, ladder: tuple[tuple[int, bool], ...]) -> tuple[int, int]:
    """Act with a ladder product (rightmost first) on an occupation bit mask.

    Returns ``(new_mask, sign)`` with sign 0 when the state is annihilated.
    The fermionic sign convention counts occupied modes below the acted index,
    matching the Jordan-Wigner Z-string order.
    """
    sign = 1
    for mode, dagger in reversed(ladder):
        bit = 1 << mode
        occupied = bool(mask & bit)
        if dagger == occupied:
            return 0, 0
        if (mask & (bit - 1)).bit_count() % 2:
            sign = -sign
        mask ^= bit
    return mask, sign


def sz_zero_determinants(n_orbitals: int, n_electrons: int) -> list[int]:
    """All Sz = 0 determinants as bit masks, lexicographically ordered."""
    if n_electrons % 2 != 0:
        raise ValueError(f"Sz = 0 sector is empty for {n_electrons} electrons")
    n_each = n_electrons // 2
    if n_each > n_orbitals:
        raise ValueError("more electron pairs than orbitals")
    dets = []
    orbitals = range(n_orbitals)
    for alphas in itertools.combinations(orbitals, n_each):
        a_mask = sum(1 << spin_orbital(p, 0) for p in alphas)
        for betas in itertools.combinations(orbitals, n_each):
            b_mask = sum(1 << spin_orbital(p, 1) for p in betas)
            dets.append(a_mask | b_mask)
    return sorted(dets)


def sector_hamiltonian(integrals: IntegralSet, determinants: list[int]) -> np.ndarray:
    """Dense Hamiltonian matrix in the given determinant basis (no core energy)."""
    index = {d: i for i, d in enumerate(determinants)}
    dim = len(determinants)
    mat = np.zeros((dim, dim))
    terms = molecular_fermion_terms(integrals)
    for j, det in enumerate(determinants):
        for term in terms:
            new_mask, sign = _apply_ladder(det, term.ladder)
            if sign == 0:
                continue
            i = index.get(new_mask)
            if i is None:
                # Number and Sz are conserved, so this cannot happen for a
                # well-formed molecular Hamiltonian.
                raise AssertionError("Hamiltonian left the Sz = 0 sector")
            mat[i, j] += sign * term.coefficient.real
    return mat


@dataclass(frozen=True)
class FCIResult:
    energy: float
    sector_dimension: int
    wall_time_s: float


def fci_ground_state(integrals: IntegralSet) -> FCIResult:
    """Exact ground-state energy in the Sz = 0 sector, core energy included."""
    t0 = time.monotonic()
    dets = sz_zero_determinants(integrals.n_orbitals, integrals.n_electrons)
    if len(dets) > SECTOR_CAP:
        raise ValueError(
            f"determinant sector of size {len(dets)} exceeds cap {SECTOR_CAP}"
        )
    mat = sector_hamiltonian(integrals, dets)
    if np.max(np.abs(mat - mat.T)) > 1e-9:
        raise AssertionError("sector Hamiltonian is not symmetric")
    e0 = float(np.linalg.eigvalsh(mat)[0])
    return FCIResult(e0 + integrals.core_energy, len(dets), time.monotonic() - t0)


def reference_determinant_energy(integrals: IntegralSet) -> float:
    """Closed-shell single-determinant energy (aufbau filling).

    An upper bound on the FCI energy by the variational principle; used to
    sanity-check solver output.
    """
    if integrals.n_electrons % 2 != 0:
        raise ValueError("closed-shell reference needs an even electron count")
    occ = range(integrals.n_electrons // 2)
    h, g = integrals.one_body, integrals.two_body
    energy = integrals.core_energy
    for i in occ:
        energy += 2.0 * h[i, i]
        for j in occ:
            energy += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    return float(energy)
