"""Operator matrices over approximate eigenstates, and transition dipoles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FermionOperator
from .pool import CompiledPool
from .vqe import Ansatz, ReferenceSet, evolve_matrix

__all__ = [
    "DEBYE_PER_AU",
    "PropertyMatrix",
    "expectation_values",
    "operator_in_ritz_basis",
    "operator_in_state_basis",
    "transition_dipole_sq",
]

# 1 e*a0 in Debye
DEBYE_PER_AU = 2.541746


@dataclass(frozen=True)
class PropertyMatrix:
    label: str
    matrix: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()


def operator_in_state_basis(op: FermionOperator, states: np.ndarray, basis, label: str = "") -> PropertyMatrix:
    """``<s_i|op|s_j>`` for the columns of ``states``."""
    states = np.asarray(states, dtype=float)
    return PropertyMatrix(label, _matrix_elements(op, states, basis))


def _matrix_elements(op: FermionOperator, states: np.ndarray, basis) -> np.ndarray:
    return states.T @ (op.matrix(basis, project=True) @ states)


def operator_in_ritz_basis(
    op: FermionOperator,
    ansatz: Ansatz,
    refset: ReferenceSet,
    coeffs: np.ndarray,
    pool: CompiledPool,
    label: str = "",
) -> PropertyMatrix:
    """``C^T M C`` with ``M_ij = <phi_i|U^+ op U|phi_j>``."""
    psi = evolve_matrix(ansatz, refset.matrix, pool)
    m = _matrix_elements(op, psi, refset.basis)
    c = np.asarray(coeffs, dtype=float)
    return PropertyMatrix(label, c.T @ m @ c)


def expectation_values(op: FermionOperator, states: np.ndarray, basis) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    return np.einsum("ik,ik->k", states, op.matrix(basis, project=True) @ states)


def transition_dipole_sq(i: int, j: int, dipoles) -> float:
    """``sum_axis <i|mu_axis|j>^2`` in Debye^2; ``dipoles`` holds one matrix per axis."""
    total = 0.0
    for d in dipoles:
        m = d.matrix if isinstance(d, PropertyMatrix) else np.asarray(d)
        total += m[i, j] ** 2
    return float(total * DEBYE_PER_AU**2)
