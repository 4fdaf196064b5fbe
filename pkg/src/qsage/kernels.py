"""Ground-state and time-evolution kernels shared by the reference solvers."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .pauli import DENSE_QUBIT_CAP, PauliSum, StateVector, apply, to_dense

Matvec = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_SEED = 7


class LanczosError(RuntimeError):
    """Base class for Lanczos failures."""


class LanczosBreakdownError(LanczosError):
    """Non-finite values appeared during the iteration."""


class LanczosConvergenceError(LanczosError):
    """Residual target not reached within the iteration budget."""


def _tridiag_ground(alphas: list[float], betas: list[float]) -> tuple[float, np.ndarray]:
    k = len(alphas)
    t = np.diag(np.asarray(alphas, dtype=float))
    if betas:
        off = np.asarray(betas, dtype=float)
        t += np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(t)
    return float(vals[0]), vecs[:, 0]


def lanczos_ground_state(
    matvec: Matvec,
    dim: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
    start: Optional[np.ndarray] = None,
    stats: Optional[dict] = None,
) -> tuple[float, np.ndarray]:
    """Minimal eigenpair of a Hermitian operator given only its matvec.

    Uses full reorthogonalization (cheap at the dimensions this package
    targets) and a fixed-seed random start vector, so results are
    deterministic for a given seed.  Convergence criterion:
    ``norm(H v - E v) <= tol * max(1, |E|)``, certified with an explicit
    residual evaluation before returning.

    When ``stats`` is a dict, the number of Krylov steps is written to
    ``stats["steps"]``.  Raises LanczosConvergenceError when the budget is
    exhausted and LanczosBreakdownError on NaN/Inf contamination.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if start is not None:
        v = np.asarray(start, dtype=complex)
        if v.shape != (dim,):
            raise ValueError(f"start vector has shape {v.shape}, expected ({dim},)")
        v = v.copy()
    else:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    nrm = np.linalg.norm(v)
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError("start vector must be nonzero and finite")
    v /= nrm

    if dim == 1:
        e = float(np.real(np.vdot(v, matvec(v))))
        if stats is not None:
            stats["steps"] = 1
        return e, v

    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []

    w = matvec(v)
    alpha = float(np.real(np.vdot(v, w)))
    alphas.append(alpha)
    w = w - alpha * v

    def certified(theta: float, y: np.ndarray) -> Optional[tuple[float, np.ndarray]]:
        x = np.zeros(dim, dtype=complex)
        for coeff, vec in zip(y, basis):
            x += coeff * vec
        x /= np.linalg.norm(x)
        residual = np.linalg.norm(matvec(x) - theta * x)
        if residual <= tol * max(1.0, abs(theta)):
            if stats is not None:
                stats["steps"] = len(basis)
            return theta, x
        return None

    max_steps = min(max_iter, dim)
    for _ in range(1, max_steps):
        beta = float(np.linalg.norm(w))
        if not np.isfinite(beta):
            raise LanczosBreakdownError("non-finite norm during Lanczos iteration")
        theta, y = _tridiag_ground(alphas, betas)
        # cheap residual bound first, exact residual to certify
        if beta * abs(y[-1]) <= tol * max(1.0, abs(theta)):
            hit = certified(theta, y)
            if hit is not None:
                return hit
        if beta <= 1e-13:
            # Krylov space is invariant: Ritz pairs are exact in it
            hit = certified(theta, y)
            if hit is not None:
                return hit
            raise LanczosBreakdownError(
                "invariant subspace reached without meeting the residual target"
            )
        v = w / beta
        # full reorthogonalization against every previous basis vector
        for prev in basis:
            v -= np.vdot(prev, v) * prev
        v /= np.linalg.norm(v)
        basis.append(v)
        w = matvec(v) - beta * basis[-2]
        alpha = float(np.real(np.vdot(v, w)))
        if not np.isfinite(alpha):
            raise LanczosBreakdownError("non-finite diagonal entry during Lanczos")
        w = w - alpha * v
        alphas.append(alpha)
        betas.append(beta)

    theta, y = _tridiag_ground(alphas, betas)
    hit = certified(theta, y)
    if hit is not None:
        return hit
    raise LanczosConvergenceError(
        f"no convergence to tol={tol} within {max_steps} Lanczos steps"
    )


def pauli_matvec(h: PauliSum) -> Matvec:
    """Raw-array matvec closure for a PauliSum (matrix-free)."""

    def mv(vec: np.ndarray) -> np.ndarray:
        return apply(h, StateVector(h.n_qubits, vec)).amplitudes

    return mv


def ground_state(
    h: PauliSum,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
    start: Optional[np.ndarray] = None,
    stats: Optional[dict] = None,
) -> tuple[float, StateVector]:
    """Lanczos ground state of a Hermitian PauliSum."""
    if not h.is_hermitian():
        raise ValueError("ground_state requires a Hermitian operator")
    energy, vec = lanczos_ground_state(
        pauli_matvec(h),
        2 ** h.n_qubits,
        tol=tol,
        max_iter=max_iter,
        seed=seed,
        start=start,
        stats=stats,
    )
    return energy, StateVector(h.n_qubits, vec)


def evolve_exact(
    h: PauliSum, psi0: StateVector, time: float, cap: int = DENSE_QUBIT_CAP
) -> StateVector:
    """exp(-i H t)|psi0> via dense eigendecomposition.

    Exact up to floating point: unitary by construction, so norm and energy
    expectation are conserved.  Restricted to registers within the dense cap.
    """
    if h.n_qubits != psi0.n_qubits:
        raise ValueError(
            f"dimension mismatch: operator on {h.n_qubits} qubits, state on {psi0.n_qubits}"
        )
    if h.n_qubits > cap:
        raise ValueError(f"{h.n_qubits} qubits exceeds the evolution cap of {cap}")
    if not h.is_hermitian():
        raise ValueError("evolve_exact requires a Hermitian operator")
    if time == 0:
        return psi0
    matrix = to_dense(h, cap=cap)
    vals, vecs = np.linalg.eigh(matrix)
    phases = np.exp(-1j * vals * time)
    amps = vecs @ (phases * (vecs.conj().T @ psi0.amplitudes))
    return StateVector(h.n_qubits, amps)
