"""Excited states from the dressed Hamiltonian of a ground-state ansatz."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import StateVector
from .pool import CompiledPool
from .vqe import Ansatz, _h_matrix, evolve_matrix

__all__ = ["QscEomResult", "run_qsceom"]


@dataclass(frozen=True)
class QscEomResult:
    ground_energy: float
    excited_energies: np.ndarray
    manifold_coeffs: np.ndarray
    coupling: np.ndarray  # <phi_0|U^+ H U|phi_i> over the manifold

    @property
    def coupling_norm(self) -> float:
        return float(np.linalg.norm(self.coupling))

    @property
    def energies(self) -> np.ndarray:
        return np.concatenate([[self.ground_energy], self.excited_energies])

    def states(self, ansatz: Ansatz, phi0: StateVector, manifold: Sequence[StateVector], pool: CompiledPool):
        """Ground state followed by the excited states, as columns."""
        m = np.column_stack([v.coeffs for v in manifold]) @ self.manifold_coeffs
        return evolve_matrix(ansatz, np.column_stack([phi0.coeffs, m]), pool)


def run_qsceom(
    ground_ansatz: Ansatz,
    phi0: StateVector,
    manifold: Sequence[StateVector],
    H,
    pool: CompiledPool,
    ortho_tol: float = 1e-10,
) -> QscEomResult:
    """Diagonalize ``U^+ H U`` over the manifold, which excludes ``phi0``.

    The ground/manifold coupling block is reported, not diagonalized.
    """
    if not manifold:
        raise ValueError("empty expansion manifold")
    basis = phi0.basis
    if any(v.basis is not basis for v in manifold):
        raise ValueError("reference and manifold must share one basis")
    phi = np.column_stack([phi0.coeffs] + [v.coeffs for v in manifold])
    dev = np.abs(phi.T @ phi - np.eye(phi.shape[1])).max()
    if dev > ortho_tol:
        raise ValueError(f"reference and manifold are not orthonormal (max deviation {dev:.2e})")
    psi = evolve_matrix(ground_ansatz, phi, pool)
    hbar = psi.T @ (_h_matrix(H, basis) @ psi)
    hbar = 0.5 * (hbar + hbar.T)
    w, c = np.linalg.eigh(hbar[1:, 1:])
    idx = np.argmax(np.abs(c), axis=0)
    c = c * np.sign(c[idx, np.arange(c.shape[1])])
    return QscEomResult(float(hbar[0, 0]), w, c, hbar[0, 1:].copy())
