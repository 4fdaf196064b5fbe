"""Classical reference solvers keyed by problem-family descriptor.

Each family resolves to one numeric target per instance: ground-state energy
for the spin, fermion, and molecular families, the optimal cut weight for
MaxCut, and the time-evolved mean particle number for the gauge family.
Results are cached by instance content so campaigns solve each instance once.
"""

from __future__ import annotations

import importlib.resources
import threading
import time
from dataclasses import dataclass

import numpy as np

from . import fci, models
from .kernels import evolve_exact, ground_state, lanczos_ground_state, pauli_matvec
from .pauli import StateVector, expectation

SECTOR_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class ReferenceResult:
    """Reference value plus solver provenance for audit trails."""

    value: float
    solver: str
    wall_time_s: float
    iterations: int | None = None

    def __post_init__(self) -> None:
        if isinstance(self.value, complex):
            raise TypeError("reference value must be a real number")
        if not np.isfinite(self.value):
            raise ValueError(f"reference value must be finite, got {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


class UnknownDescriptorError(KeyError):
    pass


def solve_tfim(L: int, J: float, h: float) -> ReferenceResult:
    t0 = time.monotonic()
    hamiltonian = models.tfim_hamiltonian(L, J, h)
    stats: dict[str, int] = {}
    energy, _ = ground_state(hamiltonian, stats=stats)
    return ReferenceResult(
        energy, "lanczos", time.monotonic() - t0, stats.get("steps")
    )


def solve_hubbard(
    L: int, t: float, U: float, n_up: int | None = None, n_down: int | None = None
) -> ReferenceResult:
    """Half-filled ground-state energy from a sector-projected Lanczos run."""
    t0 = time.monotonic()
    if n_up is None or n_down is None:
        n_up, n_down = models.half_filling_sector(L)
    hamiltonian = models.hubbard_hamiltonian(L, t, U)
    mask = models.hubbard_sector_mask(L, n_up, n_down)
    if not mask.any():
        raise ValueError(f"occupation sector ({n_up}, {n_down}) is empty for L={L}")
    dim = 2 ** hamiltonian.n_qubits
    rng = np.random.default_rng(11)
    start = np.zeros(dim, dtype=np.complex128)
    start[mask] = rng.standard_normal(int(mask.sum()))
    start /= np.linalg.norm(start)
    stats: dict[str, int] = {}
    energy, vec = lanczos_ground_state(
        pauli_matvec(hamiltonian), dim, start=start, stats=stats
    )
    leak = float(np.linalg.norm(vec[~mask]))
    if leak > SECTOR_LEAK_TOL:
        raise RuntimeError(f"ground vector leaked out of sector: |leak|={leak:.2e}")
    return ReferenceResult(
        energy, "lanczos-sector", time.monotonic() - t0, stats.get("steps")
    )


def solve_maxcut(n_vertices: int, edges: list) -> ReferenceResult:
    from .maxcut import WeightedGraph, maxcut_bruteforce

    t0 = time.monotonic()
    graph = WeightedGraph(n_vertices, tuple(tuple(e) for e in edges))
    value, _ = maxcut_bruteforce(graph)
    return ReferenceResult(
        value, "bruteforce", time.monotonic() - t0, 2 ** max(n_vertices - 1, 0)
    )


def schwinger_evolve(
    L: int,
    h_hop: float,
    g: float,
    m: float,
    T: float,
    psi0: StateVector | None = None,
) -> ReferenceResult:
    """Mean particle number at time T, starting from the staggered vacuum."""
    t0 = time.monotonic()
    hamiltonian = models.schwinger_hamiltonian(L, h_hop, g, m)
    state = models.staggered_vacuum(L) if psi0 is None else psi0
    evolved = evolve_exact(hamiltonian, state, T)
    value = expectation(models.mean_particle_number(L), evolved)
    if abs(value.imag) > 1e-10:
        raise RuntimeError(f"observable came out non-real: {value!r}")
    return ReferenceResult(float(value.real), "exact-evolution", time.monotonic() - t0)


def _bundled_integrals_path(bond_length: float) -> str:
    name = f"h2_sto3g_{bond_length:g}.fcidump"
    root = importlib.resources.files("qsage") / "data" / "integrals" / name
    if not root.is_file():
        raise FileNotFoundError(
            f"no bundled integrals for bond length {bond_length:g} A (looked for {name})"
        )
    return str(root)


def solve_h2(
    bond_length: float | None = None, integrals_path: str | None = None
) -> ReferenceResult:
    """FCI ground-state energy from bundled or user-supplied FCIDUMP integrals."""
    if integrals_path is None:
        if bond_length is None:
            raise ValueError("need either bond_length or integrals_path")
        integrals_path = _bundled_integrals_path(bond_length)
    t0 = time.monotonic()
    integrals = fci.read_fcidump(integrals_path)
    result = fci.fci_ground_state(integrals)
    bound = fci.reference_determinant_energy(integrals)
    if result.energy > bound + 1e-9:
        raise RuntimeError(
            f"FCI energy {result.energy:.8f} above variational bound {bound:.8f}"
        )
    return ReferenceResult(
        result.energy, "fci-dense", time.monotonic() - t0, result.sector_dimension
    )


_SOLVERS = {
    "condensedmatter/tfim": lambda p: solve_tfim(p["L"], p["J"], p["h"]),
    "condensedmatter/hubbard": lambda p: solve_hubbard(
        p["L"], p["t"], p["U"], p.get("n_up"), p.get("n_down")
    ),
    "optimization/maxcut": lambda p: solve_maxcut(p["n_vertices"], p["edges"]),
    "gauge/schwinger": lambda p: schwinger_evolve(
        p["L"], p["h_hop"], p["g"], p["m"], p["T"]
    ),
    "chem/h2": lambda p: solve_h2(p.get("bond_length"), p.get("integrals_path")),
}


def solve_reference(instance, cache: "ReferenceCache | None" = None) -> ReferenceResult:
    """Dispatch an instance to its family solver, consulting the cache first."""
    descriptor = instance.descriptor
    solver = _SOLVERS.get(descriptor)
    if solver is None:
        raise UnknownDescriptorError(descriptor)
    if cache is not None:
        return cache.get_or_solve(instance, lambda: solver(dict(instance.params)))
    return solver(dict(instance.params))


class ReferenceCache:
    """Thread-safe memo of reference results keyed by instance content hash."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._results: dict[str, ReferenceResult] = {}
        self._pending: dict[str, threading.Event] = {}

    def get_or_solve(self, instance, solve) -> ReferenceResult:
        key = instance.content_hash()
        while True:
            with self._lock:
                if key in self._results:
                    return self._results[key]
                event = self._pending.get(key)
                if event is None:
                    event = threading.Event()
                    self._pending[key] = event
                    break
            event.wait()
        try:
            result = solve()
        except BaseException:
            with self._lock:
                del self._pending[key]
                event.set()
            raise
        with self._lock:
            self._results[key] = result
            del self._pending[key]
            event.set()
        return result

    def __len__(self) -> int:
        with self._lock:
            return len(self._results)
