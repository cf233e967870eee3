"""Exact diagonalization within a determinant basis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .fock import Basis, FermionOperator, StateVector

__all__ = ["Assignment", "FciSpectrum", "assign_states", "fci_solve"]

DENSE_LIMIT = 4000
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class FciSpectrum:
    basis: Basis
    energies: np.ndarray
    vectors: np.ndarray  # columns
    s2_values: np.ndarray
    irreps: np.ndarray

    def __len__(self) -> int:
        return len(self.energies)

    def state(self, i: int) -> StateVector:
        return StateVector(self.basis, self.vectors[:, i])


def _eigh_block(h, n_states):
    n = h.shape[0]
    if n <= DENSE_LIMIT:
        w, v = np.linalg.eigh(h.toarray())
        return w[:n_states], v[:, :n_states]
    w, v = spla.eigsh(h, k=n_states, which="SA", tol=1e-14)
    order = np.argsort(w)
    return w[order], v[:, order]


def _canonicalize(energies, vectors, s2_mat, tol):
    """Rotate each degenerate cluster onto S^2 eigenvectors."""
    i = 0
    n = len(energies)
    while i < n:
        j = i + 1
        while j < n and energies[j] - energies[i] < tol:
            j += 1
        if j - i > 1:
            block = vectors[:, i:j]
            m = block.T @ (s2_mat @ block)
            _, rot = np.linalg.eigh(0.5 * (m + m.T))
            vectors[:, i:j] = block @ rot
        i = j
    return vectors


def fci_solve(
    H: FermionOperator,
    basis: Basis,
    n_states: int | None = None,
    s_squared: FermionOperator | None = None,
) -> FciSpectrum:
    """Lowest ``n_states`` eigenpairs of ``H`` in ``basis``.

    The basis is split by irrep first so every vector has a definite
    irrep; degenerate vectors are further rotated to S^2 eigenstates.
    """
    if n_states is None:
        n_states = len(basis)
    if not 1 <= n_states <= len(basis):
        raise ValueError(f"n_states={n_states} outside [1, {len(basis)}]")
    # projected: a truncated determinant set gives the variational CI problem
    hmat = H.matrix(basis, project=True)
    if s_squared is None:
        from .hamiltonian import build_s_squared

        s_squared = build_s_squared(basis.n_spatial)
    s2 = s_squared.matrix(basis, project=True)
    det_irreps = basis.irreps()
    energies, vectors, irreps = [], [], []
    for g in np.unique(det_irreps):
        idx = np.flatnonzero(det_irreps == g)
        w, v = _eigh_block(hmat[idx][:, idx], min(n_states, len(idx)))
        v = _canonicalize(w, v, s2[idx][:, idx], DEGENERACY_TOL)
        full = np.zeros((len(basis), v.shape[1]))
        full[idx] = v
        energies.append(w)
        vectors.append(full)
        irreps.append(np.full(len(w), g))
    energies = np.concatenate(energies)
    vectors = np.concatenate(vectors, axis=1)
    irreps = np.concatenate(irreps)
    order = np.argsort(energies, kind="stable")[:n_states]
    energies, vectors, irreps = energies[order], vectors[:, order], irreps[order]
    idx = np.argmax(np.abs(vectors), axis=0)
    vectors = vectors * np.sign(vectors[idx, np.arange(vectors.shape[1])])
    s2_values = np.einsum("ik,ik->k", vectors, s2 @ vectors)
    return FciSpectrum(basis, energies, vectors, s2_values, irreps)


@dataclass(frozen=True)
class Assignment:
    mapping: np.ndarray  # approximate state i -> exact state mapping[i]
    overlaps: np.ndarray  # |<approx_i|exact_mapping[i]>|^2
    ambiguous: np.ndarray


def assign_states(approx, exact: FciSpectrum, threshold: float = 0.5) -> Assignment:
    """Greedy matching on the largest remaining squared overlap."""
    if isinstance(approx, (list, tuple)):
        approx = np.column_stack([a.coeffs for a in approx])
    approx = np.asarray(approx, dtype=float)
    if approx.ndim == 1:
        approx = approx[:, None]
    ov = (approx.T @ exact.vectors) ** 2
    k, m = ov.shape
    mapping = np.full(k, -1)
    overlaps = np.zeros(k)
    work = ov.copy()
    for _ in range(min(k, m)):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        mapping[i] = j
        overlaps[i] = ov[i, j]
        work[i, :] = -1.0
        work[:, j] = -1.0
    return Assignment(mapping, overlaps, overlaps < threshold)
