"""Adaptive ansatz growth for one (ADAPT-VQE) or several (MORE-ADAPT-VQE) references."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .pool import CompiledPool
from .vqe import Ansatz, ReferenceSet, _h_matrix, evolve_matrix, minimize

__all__ = [
    "AdaptResult",
    "AdaptTrace",
    "ConsistencyError",
    "DressedHamiltonian",
    "RitzSolution",
    "StopCriteria",
    "TraceRow",
    "build_dressed_hamiltonian",
    "ritz_diagonalize",
    "run_adapt",
    "screen_pool",
    "select_operator",
    "write_trace_csv",
]

log = logging.getLogger(__name__)

TIE_TOL = 1e-12


class ConsistencyError(ArithmeticError):
    """A matrix that must be symmetric is not."""


@dataclass(frozen=True)
class DressedHamiltonian:
    matrix: np.ndarray


@dataclass(frozen=True)
class RitzSolution:
    energies: np.ndarray
    coeffs: np.ndarray
    asymmetry: float = 0.0

    def states(self, ansatz: Ansatz, refset: ReferenceSet, pool: CompiledPool) -> np.ndarray:
        """Columns ``U sum_j c_ji phi_j``."""
        return evolve_matrix(ansatz, refset.matrix @ self.coeffs, pool)


@dataclass(frozen=True)
class StopCriteria:
    """Any criterion that is set can end the run.

    ``target_energies`` with ``target_tol`` stops once every Ritz energy is
    within ``target_tol`` of its target (benchmarking against exact values).
    """

    max_ops: int | None = None
    grad_norm: float | None = 1e-6
    energy_change: float | None = None
    target_energies: tuple[float, ...] | None = None
    target_tol: float = 1e-10

    def __post_init__(self):
        if self.max_ops is None and self.grad_norm is None and self.energy_change is None:
            raise ValueError("at least one of max_ops, grad_norm, energy_change is required")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    pool_id: int
    max_grad: float
    grad_norm: float
    e_sa: float
    energies: tuple[float, ...]
    vqe_iterations: int
    n_distinct: int


@dataclass
class AdaptTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    @property
    def e_sa(self) -> np.ndarray:
        return np.array([r.e_sa for r in self.rows])


@dataclass
class AdaptResult:
    ansatz: Ansatz
    ritz: RitzSolution
    trace: AdaptTrace
    stop_reason: str
    dressed: DressedHamiltonian

    @property
    def energies(self) -> np.ndarray:
        return self.ritz.energies

    @property
    def pool_exhausted(self) -> bool:
        return self.stop_reason == "pool exhausted"


def _evolved_with_sigma(ansatz, refset, H, pool):
    psi = evolve_matrix(ansatz, refset.matrix, pool)
    sigma = np.ascontiguousarray(_h_matrix(H, refset.basis) @ psi)
    return psi, sigma


def screen_pool(ansatz: Ansatz, refset: ReferenceSet, H, pool: CompiledPool) -> np.ndarray:
    """``g_j = sum_i w_i <psi_i|[H, A_j]|psi_i>`` for every pool generator, ``psi_i = U phi_i``."""
    psi, sigma = _evolved_with_sigma(ansatz, refset, H, pool)
    g = np.empty(len(pool))
    _kernels.screen(psi, sigma, np.ascontiguousarray(refset.weights), pool.ptr, pool.src, pool.dst, pool.sgn, g)
    return g


def select_operator(g, tie_tol: float = TIE_TOL, zero_tol: float = TIE_TOL) -> int | None:
    """Index of the largest ``|g_j|`` (smallest index among ties); ``None`` if ``g`` vanishes."""
    a = np.abs(np.asarray(g, dtype=float))
    if a.size == 0:
        raise ValueError("empty gradient vector")
    top = a.max()
    if top <= zero_tol:
        return None
    return int(np.flatnonzero(a >= top - tie_tol)[0])


def build_dressed_hamiltonian(
    ansatz: Ansatz, refset: ReferenceSet, H, pool: CompiledPool, sym_tol: float = 1e-10
) -> DressedHamiltonian:
    psi, sigma = _evolved_with_sigma(ansatz, refset, H, pool)
    m = psi.T @ sigma
    asym = float(np.abs(m - m.T).max())
    if asym > sym_tol:
        raise ConsistencyError(f"dressed Hamiltonian asymmetry {asym:.3e} exceeds {sym_tol:.1e}")
    return DressedHamiltonian(0.5 * (m + m.T))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def ritz_diagonalize(dh: DressedHamiltonian | np.ndarray) -> RitzSolution:
    m = dh.matrix if isinstance(dh, DressedHamiltonian) else np.asarray(dh, dtype=float)
    asym = float(np.abs(m - m.T).max())
    w, c = np.linalg.eigh(0.5 * (m + m.T))
    return RitzSolution(w, _fix_signs(c), asym)


def _grow_inverse_hessian(hinv: np.ndarray) -> np.ndarray | None:
    """Border the previous inverse Hessian with a unit entry for the new angle."""
    grown = np.eye(hinv.shape[0] + 1)
    grown[1:, 1:] = 0.5 * (hinv + hinv.T)
    try:
        np.linalg.cholesky(grown)
    except np.linalg.LinAlgError:
        return None
    return grown


def run_adapt(
    H,
    refset: ReferenceSet,
    pool: CompiledPool,
    stop: StopCriteria,
    gtol: float = 1e-8,
    max_iter: int | None = None,
    ansatz: Ansatz | None = None,
    recycle_hessian: bool = True,
) -> AdaptResult:
    """Grow the ansatz greedily by pool gradient, re-optimizing all angles each step.

    With one reference the Ritz step is trivial and the single energy is the
    VQE energy.
    """
    ansatz = ansatz or Ansatz()
    trace = AdaptTrace()
    targets = None if stop.target_energies is None else np.asarray(stop.target_energies)
    reason = None
    prev = None
    hinv = None
    while reason is None:
        if stop.max_ops is not None and len(ansatz) >= stop.max_ops:
            reason = "max_ops"
            break
        g = screen_pool(ansatz, refset, H, pool)
        gnorm = float(np.linalg.norm(g))
        if stop.grad_norm is not None and gnorm < stop.grad_norm:
            reason = "grad_norm"
            break
        j = select_operator(g)
        if j is None:
            reason = "pool exhausted"
            break
        ansatz = ansatz.prepend(j, 0.0)
        if recycle_hessian and hinv is not None:
            hinv = _grow_inverse_hessian(hinv)
        res = minimize(ansatz, refset, H, pool, gtol=gtol, max_iter=max_iter, hess_inv0=hinv)
        hinv = res.hess_inv if recycle_hessian else None
        if not res.converged:
            log.debug("inner VQE not converged at %d ops: %s", len(res.ansatz), res.message)
        ansatz = res.ansatz
        dressed = build_dressed_hamiltonian(ansatz, refset, H, pool)
        ritz = ritz_diagonalize(dressed)
        trace.rows.append(
            TraceRow(
                iteration=len(trace) + 1,
                pool_id=j,
                max_grad=float(np.abs(g).max()),
                grad_norm=gnorm,
                e_sa=res.energy,
                energies=tuple(float(e) for e in ritz.energies),
                vqe_iterations=res.iterations,
                n_distinct=ansatz.n_distinct(),
            )
        )
        log.info("iter %3d  op %4d  |g|max %.3e  E_SA %.12f", len(trace), j, np.abs(g).max(), res.energy)
        if stop.energy_change is not None and prev is not None and abs(prev - res.energy) < stop.energy_change:
            reason = "energy_change"
        elif targets is not None and np.abs(ritz.energies - targets).max() < stop.target_tol:
            reason = "target"
        prev = res.energy
    dressed = build_dressed_hamiltonian(ansatz, refset, H, pool)
    return AdaptResult(ansatz, ritz_diagonalize(dressed), trace, reason, dressed)


def write_trace_csv(trace: AdaptTrace, f, k: int | None = None) -> None:
    """One row per macro-iteration."""
    if k is None:
        k = len(trace[0].energies) if len(trace) else 0
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["iter", "pool_id", "max_grad", "grad_norm", "e_sa"] + [f"e{i}" for i in range(k)] + ["vqe_iter", "n_distinct_ops"])
    for r in trace:
        w.writerow(
            [r.iteration, r.pool_id, f"{r.max_grad:.12e}", f"{r.grad_norm:.12e}", f"{r.e_sa:.12f}"]
            + [f"{e:.12f}" for e in r.energies]
            + [r.vqe_iterations, r.n_distinct]
        )
