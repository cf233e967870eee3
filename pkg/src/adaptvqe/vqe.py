"""State-averaged energy, its analytic gradient, and BFGS minimization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from . import _kernels
from .fock import FermionOperator, StateVector
from .pool import CompiledPool

__all__ = [
    "Ansatz",
    "MinimizeResult",
    "ReferenceSet",
    "evolve",
    "evolve_matrix",
    "minimize",
    "sa_energy",
    "sa_gradient",
]


@dataclass(frozen=True)
class Ansatz:
    """Product of exponentials; ``ops[0]`` is the newest factor and acts last."""

    ops: tuple[tuple[int, float], ...] = ()

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def ids(self) -> np.ndarray:
        return np.array([j for j, _ in self.ops], dtype=np.int64)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for _, t in self.ops], dtype=float)

    def prepend(self, pool_id: int, theta: float = 0.0) -> "Ansatz":
        return Ansatz(((int(pool_id), float(theta)),) + self.ops)

    def with_thetas(self, thetas) -> "Ansatz":
        thetas = np.asarray(thetas, dtype=float)
        if len(thetas) != len(self.ops):
            raise ValueError(f"{len(thetas)} angles for an ansatz of length {len(self.ops)}")
        return Ansatz(tuple((j, float(t)) for (j, _), t in zip(self.ops, thetas)))

    def n_distinct(self) -> int:
        return len({j for j, _ in self.ops})


@dataclass(frozen=True)
class ReferenceSet:
    refs: tuple[StateVector, ...]
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        refs = tuple(self.refs)
        if not refs:
            raise ValueError("at least one reference is required")
        object.__setattr__(self, "refs", refs)
        w = self.weights
        w = np.full(len(refs), 1.0 / len(refs)) if w is None else np.asarray(w, dtype=float)
        if w.shape != (len(refs),):
            raise ValueError(f"{w.shape[0]} weights for {len(refs)} references")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to one")
        object.__setattr__(self, "weights", w)
        basis = refs[0].basis
        if any(r.basis is not basis for r in refs):
            raise ValueError("references must share one basis")
        s = self.matrix.T @ self.matrix
        dev = np.abs(s - np.eye(len(refs))).max()
        if dev > 1e-12:
            raise ValueError(f"references are not orthonormal (max deviation {dev:.2e})")

    def __len__(self) -> int:
        return len(self.refs)

    @property
    def basis(self):
        return self.refs[0].basis

    @property
    def matrix(self) -> np.ndarray:
        """``(n_det, k)`` array of reference coefficients."""
        return np.ascontiguousarray(np.column_stack([r.coeffs for r in self.refs]))


def _h_matrix(H, basis) -> sp.csr_matrix:
    if isinstance(H, FermionOperator):
        return H.matrix(basis)
    return sp.csr_matrix(H)


def evolve_matrix(ansatz: Ansatz, states: np.ndarray, pool: CompiledPool) -> np.ndarray:
    """Apply the ansatz to every column of ``states`` (returns a new array)."""
    psi = np.array(states, dtype=float, order="C", copy=True)
    squeeze = psi.ndim == 1
    if squeeze:
        psi = psi[:, None].copy()
    if len(ansatz):
        _kernels.evolve(psi, ansatz.ids, ansatz.thetas, pool.ptr, pool.src, pool.dst, pool.sgn)
    return psi[:, 0] if squeeze else psi


def evolve(ansatz: Ansatz, v: StateVector, pool: CompiledPool) -> StateVector:
    return StateVector(v.basis, evolve_matrix(ansatz, v.coeffs, pool))


class _Objective:
    """E_SA and its gradient as functions of the angle vector, for fixed ids."""

    def __init__(self, ids, refset: ReferenceSet, H, pool: CompiledPool):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.phi = refset.matrix
        self.weights = np.ascontiguousarray(refset.weights)
        self.h = _h_matrix(H, refset.basis)
        self.pool = pool
        self.n_eval = 0

    def _forward(self, thetas):
        psi = self.phi.copy()
        p = self.pool
        _kernels.evolve(psi, self.ids, thetas, p.ptr, p.src, p.dst, p.sgn)
        return psi

    def energy(self, thetas) -> float:
        psi = self._forward(np.asarray(thetas, dtype=float))
        sigma = self.h @ psi
        return float(np.einsum("ik,ik->k", psi, sigma) @ self.weights)

    def energy_and_gradient(self, thetas):
        self.n_eval += 1
        thetas = np.ascontiguousarray(thetas, dtype=float)
        psi = self._forward(thetas)
        sigma = np.ascontiguousarray(self.h @ psi)
        e = float(np.einsum("ik,ik->k", psi, sigma) @ self.weights)
        g = np.empty(len(thetas))
        p = self.pool
        _kernels.gradient(psi, sigma, self.weights, self.ids, thetas, p.ptr, p.src, p.dst, p.sgn, g)
        return e, g


def sa_energy(ansatz: Ansatz, refset: ReferenceSet, H, pool: CompiledPool) -> float:
    """Weighted average of ``<phi_i|U^+ H U|phi_i>``."""
    return _Objective(ansatz.ids, refset, H, pool).energy(ansatz.thetas)


def sa_gradient(ansatz: Ansatz, refset: ReferenceSet, H, pool: CompiledPool) -> np.ndarray:
    """Analytic gradient of :func:`sa_energy` by one forward and one backward sweep."""
    if not len(ansatz):
        return np.zeros(0)
    return _Objective(ansatz.ids, refset, H, pool).energy_and_gradient(ansatz.thetas)[1]


@dataclass
class MinimizeResult:
    ansatz: Ansatz
    energy: float
    iterations: int
    converged: bool
    message: str = ""
    n_eval: int = 0
    hess_inv: np.ndarray | None = None


def minimize(
    ansatz: Ansatz,
    refset: ReferenceSet,
    H,
    pool: CompiledPool,
    gtol: float = 1e-8,
    max_iter: int | None = None,
    hess_inv0: np.ndarray | None = None,
) -> MinimizeResult:
    """BFGS over all angles, warm-started from ``ansatz.thetas``.

    ``hess_inv0`` seeds the inverse-Hessian estimate (identity by default).
    Never returns an energy above the starting one. ``converged`` is false
    when the iteration cap is hit or the line search gives up.
    """
    obj = _Objective(ansatz.ids, refset, H, pool)
    x0 = ansatz.thetas
    if not len(x0):
        return MinimizeResult(ansatz, obj.energy(x0), 0, True)
    if max_iter is None:
        max_iter = 200 * (len(x0) + 1)
    e0, g0 = obj.energy_and_gradient(x0)
    if np.abs(g0).max() <= gtol:
        return MinimizeResult(ansatz, e0, 0, True, "already stationary", obj.n_eval, hess_inv0)
    options = {"gtol": gtol, "maxiter": max_iter, "norm": np.inf}
    if hess_inv0 is not None:
        options["hess_inv0"] = hess_inv0
    res = scipy.optimize.minimize(obj.energy_and_gradient, x0, jac=True, method="BFGS", options=options)
    if res.fun > e0 + 1e-12:
        return MinimizeResult(
            ansatz, e0, int(res.nit), False, "no descent: " + str(res.message), obj.n_eval, hess_inv0
        )
    return MinimizeResult(
        ansatz.with_thetas(res.x),
        float(res.fun),
        int(res.nit),
        bool(res.success),
        str(res.message),
        obj.n_eval,
        res.hess_inv,
    )
