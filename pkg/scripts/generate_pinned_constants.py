#!/usr/bin/env python3
"""Recompute reference values for every bundled instance via independent
routes and freeze them into tests/data/pinned_references.json.

Nothing here imports the package under test.  Each family uses a different
algorithmic route than the library so the two implementations can only agree
if the physics conventions match:

* TFIM: dense Hamiltonian assembled with numpy.kron, full eigh.
* Hubbard: configuration interaction over explicit occupation bit masks with
  position-counted fermionic signs (no qubit mapping at all).
* MaxCut: pure-Python loop over all bipartitions via itertools.product.
* Schwinger quench: dense kron Hamiltonian, scipy.linalg.expm propagation.
* H2 FCI: private FCIDUMP parser, dense 16x16 Jordan-Wigner Fock matrix from
  kron-built ladder operators, particle/spin sector projection, eigh.

Run from the repository root after changing bundled instances or integrals:
    python3 scripts/generate_pinned_constants.py
"""

from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np
from scipy.linalg import expm

ROOT = Path(__file__).resolve().parent.parent
INSTANCES = ROOT / "src" / "qsage" / "data" / "instances" / "default_campaign.json"
INTEGRALS_DIR = ROOT / "src" / "qsage" / "data" / "integrals"
OUT = ROOT / "tests" / "data" / "pinned_references.json"

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def kron_chain(ops: list[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def site_op(n: int, idx: int, op: np.ndarray) -> np.ndarray:
    return kron_chain([op if k == idx else I2 for k in range(n)])


# --- TFIM --------------------------------------------------------------------


def tfim_energy(L: int, J: float, h: float) -> float:
    dim = 2 ** L
    H = np.zeros((dim, dim))
    for i in range(L - 1):
        H -= J * (site_op(L, i, Z) @ site_op(L, i + 1, Z)).real
    for i in range(L):
        H -= h * site_op(L, i, X).real
    return float(np.linalg.eigvalsh(H)[0])


# --- Hubbard (occupation-list CI, no qubit mapping) --------------------------


def hubbard_energy(L: int, t: float, U: float) -> float:
    n_up = (L + 1) // 2
    n_dn = L // 2
    ups = list(itertools.combinations(range(L), n_up))
    dns = list(itertools.combinations(range(L), n_dn))
    basis = [(u, d) for u in ups for d in dns]
    index = {det: i for i, det in enumerate(basis)}
    dim = len(basis)
    H = np.zeros((dim, dim))

    def hop(occ: tuple[int, ...], src: int, dst: int):
        """Move one particle; sign counts crossings in the sorted occupation."""
        if src not in occ or dst in occ:
            return None
        rest = [o for o in occ if o != src]
        # sign from removing src ...
        sign = (-1) ** occ.index(src)
        new = sorted(rest + [dst])
        # ... and inserting dst at its ordered position
        sign *= (-1) ** new.index(dst)
        return tuple(new), sign

    for j, (u_occ, d_occ) in enumerate(basis):
        H[j, j] += U * len(set(u_occ) & set(d_occ))
        for i_site in range(L - 1):
            for (a, b) in ((i_site, i_site + 1), (i_site + 1, i_site)):
                moved = hop(u_occ, a, b)
                if moved is not None:
                    H[index[(moved[0], d_occ)], j] += -t * moved[1]
                moved = hop(d_occ, a, b)
                if moved is not None:
                    H[index[(u_occ, moved[0])], j] += -t * moved[1]
    return float(np.linalg.eigvalsh(H)[0])


# --- MaxCut ------------------------------------------------------------------


def maxcut_value(n: int, edges: list[list]) -> float:
    best = 0.0
    for sides in itertools.product((0, 1), repeat=n):
        cut = sum(w for u, v, w in edges if sides[u] != sides[v])
        best = max(best, cut)
    return float(best)


# --- Schwinger quench --------------------------------------------------------


def schwinger_observable(L: int, h_hop: float, g: float, m: float, T: float) -> float:
    dim = 2 ** L
    H = np.zeros((dim, dim), dtype=complex)
    for n in range(L - 1):
        H += (h_hop / 2.0) * (
            site_op(L, n, X) @ site_op(L, n + 1, X)
            + site_op(L, n, Y) @ site_op(L, n + 1, Y)
        )
    for n in range(L):
        H += (m / 2.0) * (-1) ** n * site_op(L, n, Z)
    for n in range(L - 1):
        field = np.zeros((dim, dim), dtype=complex)
        for k in range(n + 1):
            field += 0.5 * site_op(L, k, Z)
        field += 0.5 * sum((-1) ** k for k in range(n + 1)) * np.eye(dim)
        H += g * (field @ field)
    # staggered vacuum: qubit n is |1> on even n, |0> on odd n
    bits = [1 - (n % 2) for n in range(L)]
    idx = sum(b << (L - 1 - q) for q, b in enumerate(bits))
    psi0 = np.zeros(dim, dtype=complex)
    psi0[idx] = 1.0
    psi = expm(-1j * H * T) @ psi0
    obs = 0.5 * np.eye(dim, dtype=complex)
    for n in range(L):
        obs += ((-1) ** n / (2.0 * L)) * site_op(L, n, Z)
    value = np.vdot(psi, obs @ psi)
    assert abs(value.imag) < 1e-10
    return float(value.real)


def schwinger_drift(L: int, h_hop: float, g: float, m: float, T: float):
    """Norm and energy at time T via expm, for the evolution drift oracle."""
    dim = 2 ** L
    # rebuild H exactly as above
    H = np.zeros((dim, dim), dtype=complex)
    for n in range(L - 1):
        H += (h_hop / 2.0) * (
            site_op(L, n, X) @ site_op(L, n + 1, X)
            + site_op(L, n, Y) @ site_op(L, n + 1, Y)
        )
    for n in range(L):
        H += (m / 2.0) * (-1) ** n * site_op(L, n, Z)
    for n in range(L - 1):
        field = np.zeros((dim, dim), dtype=complex)
        for k in range(n + 1):
            field += 0.5 * site_op(L, k, Z)
        field += 0.5 * sum((-1) ** k for k in range(n + 1)) * np.eye(dim)
        H += g * (field @ field)
    bits = [1 - (n % 2) for n in range(L)]
    idx = sum(b << (L - 1 - q) for q, b in enumerate(bits))
    psi0 = np.zeros(dim, dtype=complex)
    psi0[idx] = 1.0
    psi = expm(-1j * H * T) @ psi0
    return float(np.linalg.norm(psi)), float(np.vdot(psi, H @ psi).real)


# --- H2 FCI via dense Jordan-Wigner ------------------------------------------


def read_fcidump(path: Path):
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    header_end = next(i for i, ln in enumerate(lines) if ln.endswith("/"))
    header = " ".join(lines[: header_end + 1]).upper()
    n_orb = int(header.split("NORB=")[1].split(",")[0])
    h1 = np.zeros((n_orb, n_orb))
    g2 = np.zeros((n_orb, n_orb, n_orb, n_orb))
    core = 0.0
    for ln in lines[header_end + 1:]:
        parts = ln.split()
        val = float(parts[0])
        i, j, k, l = (int(p) for p in parts[1:])
        if i == j == k == l == 0:
            core = val
        elif k == l == 0:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = val
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for (a, b, c, d) in {
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            }:
                g2[a, b, c, d] = val
    return n_orb, core, h1, g2


def h2_fci_energy(path: Path) -> float:
    n_orb, core, h1, g2 = read_fcidump(path)
    n_modes = 2 * n_orb
    dim = 2 ** n_modes
    sminus = np.array([[0.0, 1.0], [0.0, 0.0]])  # annihilates |1> (occupied)

    def annihilator(mode: int) -> np.ndarray:
        ops = [Z] * mode + [sminus] + [I2] * (n_modes - mode - 1)
        return kron_chain([op.astype(complex) for op in ops])

    a = [annihilator(mm) for mm in range(n_modes)]
    ad = [op.conj().T for op in a]

    def so(p: int, spin: int) -> int:
        return 2 * p + spin

    H = np.zeros((dim, dim), dtype=complex)
    for p in range(n_orb):
        for q in range(n_orb):
            if abs(h1[p, q]) < 1e-14:
                continue
            for s in (0, 1):
                H += h1[p, q] * ad[so(p, s)] @ a[so(q, s)]
    for p in range(n_orb):
        for q in range(n_orb):
            for r in range(n_orb):
                for s_ in range(n_orb):
                    if abs(g2[p, q, r, s_]) < 1e-14:
                        continue
                    for sig in (0, 1):
                        for tau in (0, 1):
                            H += 0.5 * g2[p, q, r, s_] * (
                                ad[so(p, sig)] @ ad[so(r, tau)]
                                @ a[so(s_, tau)] @ a[so(q, sig)]
                            )
    # project onto n_alpha = n_beta = 1
    keep = []
    for state in range(dim):
        occ = [(state >> (n_modes - 1 - mm)) & 1 for mm in range(n_modes)]
        if sum(occ[0::2]) == 1 and sum(occ[1::2]) == 1:
            keep.append(state)
    sub = H[np.ix_(keep, keep)]
    assert np.max(np.abs(sub - sub.conj().T)) < 1e-10
    return float(np.linalg.eigvalsh(sub)[0]) + core


def main() -> None:
    doc = json.loads(INSTANCES.read_text())
    pinned = {}
    for entry in doc["instances"]:
        iid = entry["instance_id"]
        desc = entry["descriptor"]
        p = entry["params"]
        if desc == "condensedmatter/tfim":
            value, route = tfim_energy(p["L"], p["J"], p["h"]), "dense-kron-eigh"
        elif desc == "condensedmatter/hubbard":
            value, route = hubbard_energy(p["L"], p["t"], p["U"]), "occupation-ci"
        elif desc == "optimization/maxcut":
            value, route = maxcut_value(p["n_vertices"], p["edges"]), "python-enumeration"
        elif desc == "gauge/schwinger":
            value = schwinger_observable(p["L"], p["h_hop"], p["g"], p["m"], p["T"])
            route = "dense-expm"
        elif desc == "chem/h2":
            path = INTEGRALS_DIR / f"h2_sto3g_{p['bond_length']:g}.fcidump"
            value, route = h2_fci_energy(path), "jw-dense-sector"
        else:
            raise ValueError(desc)
        pinned[iid] = {"value": value, "route": route}
        print(f"{iid:24s} {value: .12f}  [{route}]")

    drifts = {}
    for T in (1.0, 2.5, 5.0):
        norm, energy = schwinger_drift(4, 1.0, 1.0, 0.5, T)
        drifts[f"T={T:g}"] = {"norm": norm, "energy": energy}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(
        json.dumps(
            {
                "comment": (
                    "Frozen oracle values computed by scripts/"
                    "generate_pinned_constants.py via routes independent of "
                    "the library (see script docstring). Regenerate only when "
                    "bundled instances or integrals change."
                ),
                "references": pinned,
                "schwinger_L4_drift_oracle": {
                    "params": {"L": 4, "h_hop": 1.0, "g": 1.0, "m": 0.5},
                    "values": drifts,
                },
            },
            indent=2,
        )
        + "\n"
    )
    print(f"\nwrote {OUT}")


if __name__ == "__main__":
    main()
