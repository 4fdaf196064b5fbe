#!/usr/bin/env python3
"""Generate FCIDUMP integral files for H2 in the STO-3G minimal basis.

Everything is computed from scratch with closed-form s-orbital Gaussian
integral formulas (overlap, kinetic, nuclear attraction with the Boys F0
function, and the four-centre repulsion integral), contracted with the
standard STO-3G hydrogen exponents and coefficients.

For H2 the symmetry-adapted orbitals sigma_g = (A + B)/sqrt(2(1+S)) and
sigma_u = (A - B)/sqrt(2(1-S)) are the exact restricted Hartree-Fock
orbitals of the minimal basis, so no SCF loop is needed; the molecular
integrals follow from a 2x2 basis transformation.  Output files use chemist
notation (ij|kl) with 1-based indices and list only symmetry-unique entries.

Usage: python3 scripts/generate_h2_fcidump.py [outdir]
Default outdir: src/qsage/data/integrals/
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

BOHR_PER_ANGSTROM = 1.0 / 0.52917721092

# STO-3G hydrogen: exponents already scaled by zeta^2 with zeta = 1.24.
ALPHA = np.array([3.42525091, 0.62391373, 0.16885540])
COEFF = np.array([0.15432897, 0.53532814, 0.44463454])

BOND_LENGTHS_ANGSTROM = [0.5, 0.735, 1.0, 1.5]


def boys_f0(t: float) -> float:
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def primitive_norms(alphas: np.ndarray) -> np.ndarray:
    return (2.0 * alphas / math.pi) ** 0.75


def overlap_prim(a: float, b: float, rab2: float) -> float:
    return (math.pi / (a + b)) ** 1.5 * math.exp(-a * b / (a + b) * rab2)


def kinetic_prim(a: float, b: float, rab2: float) -> float:
    mu = a * b / (a + b)
    return mu * (3.0 - 2.0 * mu * rab2) * (math.pi / (a + b)) ** 1.5 * math.exp(-mu * rab2)


def attraction_prim(
    a: float, b: float, ra: np.ndarray, rb: np.ndarray, rc: np.ndarray, z: float
) -> float:
    p = a + b
    rab2 = float(np.dot(ra - rb, ra - rb))
    rp = (a * ra + b * rb) / p
    rcp2 = float(np.dot(rp - rc, rp - rc))
    return -z * (2.0 * math.pi / p) * math.exp(-a * b / p * rab2) * boys_f0(p * rcp2)


def repulsion_prim(
    a: float, b: float, c: float, d: float,
    ra: np.ndarray, rb: np.ndarray, rc: np.ndarray, rd: np.ndarray,
) -> float:
    p, q = a + b, c + d
    rab2 = float(np.dot(ra - rb, ra - rb))
    rcd2 = float(np.dot(rc - rd, rc - rd))
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    rpq2 = float(np.dot(rp - rq, rp - rq))
    pref = 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))
    return pref * math.exp(-a * b / p * rab2 - c * d / q * rcd2) * boys_f0(p * q / (p + q) * rpq2)


def h2_ao_integrals(r_bohr: float):
    """Contracted AO integrals for two STO-3G hydrogens a distance r apart."""
    centers = [np.zeros(3), np.array([0.0, 0.0, r_bohr])]
    norms = primitive_norms(ALPHA)
    weights = COEFF * norms

    def contract2(kernel, ca, cb):
        total = 0.0
        for wa, aa in zip(weights, ALPHA):
            for wb, ab in zip(weights, ALPHA):
                total += wa * wb * kernel(aa, ab, ca, cb)
        return total

    s = np.zeros((2, 2))
    t = np.zeros((2, 2))
    v = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            rab2 = float(np.dot(centers[i] - centers[j], centers[i] - centers[j]))
            s[i, j] = contract2(lambda a, b, ca, cb: overlap_prim(a, b, rab2), centers[i], centers[j])
            t[i, j] = contract2(lambda a, b, ca, cb: kinetic_prim(a, b, rab2), centers[i], centers[j])
            for rc in centers:
                v[i, j] += contract2(
                    lambda a, b, ca, cb: attraction_prim(a, b, ca, cb, rc, 1.0),
                    centers[i],
                    centers[j],
                )

    eri = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    total = 0.0
                    for wa, aa in zip(weights, ALPHA):
                        for wb, ab in zip(weights, ALPHA):
                            for wc, ac in zip(weights, ALPHA):
                                for wd, ad in zip(weights, ALPHA):
                                    total += wa * wb * wc * wd * repulsion_prim(
                                        aa, ab, ac, ad,
                                        centers[i], centers[j], centers[k], centers[l],
                                    )
                    eri[i, j, k, l] = total
    return s, t + v, eri


def h2_mo_integrals(r_angstrom: float):
    """One- and two-body MO integrals plus nuclear repulsion for H2."""
    r = r_angstrom * BOHR_PER_ANGSTROM
    s, h_ao, eri_ao = h2_ao_integrals(r)
    s01 = s[0, 1]
    # Symmetry orbitals; columns are MO coefficients over the two AOs.
    cg = 1.0 / math.sqrt(2.0 * (1.0 + s01))
    cu = 1.0 / math.sqrt(2.0 * (1.0 - s01))
    c = np.array([[cg, cu], [cg, -cu]])
    h_mo = c.T @ h_ao @ c
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", c, c, c, c, eri_ao, optimize=True)
    core = 1.0 / r
    return h_mo, eri_mo, core


def write_fcidump(path: Path, h_mo: np.ndarray, eri_mo: np.ndarray, core: float) -> None:
    n = h_mo.shape[0]
    lines = [f"&FCI NORB={n},NELEC=2,MS2=0,", " ORBSYM=1,1,", " ISYM=1,", "/"]
    written = set()
    for p in range(n):
        for q in range(p + 1):
            for r in range(n):
                for s_ in range(r + 1):
                    if (p, q) < (r, s_):
                        continue
                    val = eri_mo[p, q, r, s_]
                    if abs(val) < 1e-12:
                        continue
                    key = (p, q, r, s_)
                    if key in written:
                        continue
                    written.add(key)
                    lines.append(f"{val: .16e} {p + 1} {q + 1} {r + 1} {s_ + 1}")
    for p in range(n):
        for q in range(p + 1):
            val = h_mo[p, q]
            if abs(val) < 1e-12:
                continue
            lines.append(f"{val: .16e} {p + 1} {q + 1} 0 0")
    lines.append(f"{core: .16e} 0 0 0 0")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "qsage" / "data" / "integrals"
    )
    outdir.mkdir(parents=True, exist_ok=True)
    for bl in BOND_LENGTHS_ANGSTROM:
        h_mo, eri_mo, core = h2_mo_integrals(bl)
        path = outdir / f"h2_sto3g_{bl:g}.fcidump"
        write_fcidump(path, h_mo, eri_mo, core)
        print(f"wrote {path} (core={core:.10f})")


if __name__ == "__main__":
    main()
