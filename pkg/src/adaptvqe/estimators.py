"""Estimator-style wrappers: construct with settings, ``fit`` on a problem,
read results from trailing-underscore attributes.

``transform(op)`` maps an operator into the fitted state basis.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from .adapt import StopCriteria, run_adapt
from .fci import assign_states
from .fock import StateVector
from .properties import PropertyMatrix, operator_in_state_basis
from .qsceom import run_qsceom
from .validation import check_orthonormal, check_problem, check_reference_set, check_states

__all__ = ["AdaptVQE", "MoreAdaptVQE", "QscEOM", "FCISolver"]


class _StateBasisMixin:
    def states(self) -> np.ndarray:
        """Fitted states as columns on ``problem_.basis``."""
        check_is_fitted(self)
        return self.states_

    def transform(self, op, label: str = "") -> PropertyMatrix:
        check_is_fitted(self)
        return operator_in_state_basis(op, self.states_, self.problem_.basis, label)

    def assign(self, threshold: float = 0.5):
        """Match fitted states to the exact spectrum of the same problem."""
        check_is_fitted(self)
        return assign_states(self.states_, self.problem_.fci(), threshold)


class MoreAdaptVQE(_StateBasisMixin, BaseEstimator):
    """State-averaged ADAPT over orthonormal references, then Ritz rotation.

    Parameters
    ----------
    max_ops, grad_norm, energy_change : stop criteria; any one that is set ends the run.
    target_tol : used only when ``fit`` is given target energies.
    gtol, max_iter : inner BFGS settings.
    recycle_hessian : carry the inverse Hessian between macro-iterations.
    """

    def __init__(
        self,
        max_ops=None,
        grad_norm=1e-6,
        energy_change=None,
        target_tol=1e-10,
        gtol=1e-8,
        max_iter=None,
        recycle_hessian=True,
    ):
        self.max_ops = max_ops
        self.grad_norm = grad_norm
        self.energy_change = energy_change
        self.target_tol = target_tol
        self.gtol = gtol
        self.max_iter = max_iter
        self.recycle_hessian = recycle_hessian

    def _stop(self, targets):
        return StopCriteria(
            max_ops=self.max_ops,
            grad_norm=self.grad_norm,
            energy_change=self.energy_change,
            target_energies=None if targets is None else tuple(float(t) for t in np.atleast_1d(targets)),
            target_tol=self.target_tol,
        )

    def fit(self, problem, references, weights=None, target_energies=None):
        problem = check_problem(problem)
        refset = check_reference_set(problem, references, weights)
        result = run_adapt(
            problem.h,
            refset,
            problem.pool,
            self._stop(target_energies),
            gtol=self.gtol,
            max_iter=self.max_iter,
            recycle_hessian=self.recycle_hessian,
        )
        self.problem_ = problem
        self.refset_ = refset
        self.result_ = result
        self.ansatz_ = result.ansatz
        self.energies_ = result.energies
        self.coeffs_ = result.ritz.coeffs
        self.trace_ = result.trace
        self.stop_reason_ = result.stop_reason
        self.states_ = result.ritz.states(result.ansatz, refset, problem.pool)
        return self


class AdaptVQE(MoreAdaptVQE):
    """Single-reference ADAPT-VQE."""

    def fit(self, problem, reference, target_energy=None):
        return super().fit(problem, [reference], None, target_energy)


class QscEOM(_StateBasisMixin, BaseEstimator):
    """Ground state from ``ground`` (an AdaptVQE), excited states from the manifold.

    The ground ansatz is grown on the reference's own irrep block when
    ``restrict_ground`` is set.
    """

    def __init__(self, ground=None, restrict_ground=True, ortho_tol=1e-10):
        self.ground = ground
        self.restrict_ground = restrict_ground
        self.ortho_tol = ortho_tol

    def fit(self, problem, reference, manifold, target_energy=None):
        problem = check_problem(problem)
        phi0, *rest = check_states(problem, [reference, *manifold])
        check_orthonormal([phi0, *rest], self.ortho_tol)
        ground = clone(self.ground) if self.ground is not None else AdaptVQE()
        sub = problem
        if self.restrict_ground:
            irreps = problem.basis.irreps()[np.abs(phi0.coeffs) > 0]
            sub = problem.restricted(tuple(sorted(set(irreps.tolist()))))
        ground.fit(sub, _move(phi0, sub.basis), target_energy)
        result = run_qsceom(ground.ansatz_, phi0, rest, problem.h, problem.pool, self.ortho_tol)
        self.problem_ = problem
        self.ground_ = ground
        self.ansatz_ = ground.ansatz_
        self.result_ = result
        self.energies_ = result.energies
        self.coupling_norm_ = result.coupling_norm
        self.states_ = result.states(ground.ansatz_, phi0, rest, problem.pool)
        return self


def _move(v, basis):
    """Re-express ``v`` on another basis that contains its support."""
    if v.basis is basis:
        return v
    out = np.zeros(len(basis))
    idx = basis.lookup(v.basis.bits[np.abs(v.coeffs) > 0])
    if np.any(idx < 0):
        raise ValueError("state has weight outside the target basis")
    out[idx] = v.coeffs[np.abs(v.coeffs) > 0]
    return StateVector(basis, out)


class FCISolver(_StateBasisMixin, BaseEstimator):
    """Exact eigenpairs of the problem basis; ``n_states=None`` keeps all."""

    def __init__(self, n_states=None):
        self.n_states = n_states

    def fit(self, problem):
        problem = check_problem(problem)
        spec = problem.fci()
        n = len(spec.energies) if self.n_states is None else int(self.n_states)
        if n > len(spec.energies):
            raise IndexError(f"n_states={n} exceeds basis size {len(spec.energies)}")
        self.problem_ = problem
        self.spectrum_ = spec
        self.energies_ = spec.energies[:n]
        self.s2_values_ = spec.s2_values[:n]
        self.irreps_ = spec.irreps[:n]
        self.states_ = spec.vectors[:, :n]
        return self
