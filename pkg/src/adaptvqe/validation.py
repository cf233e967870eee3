"""Input checks shared by the estimators and the scan driver."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .fock import StateVector
from .problem import Problem
from .vqe import ReferenceSet


def check_problem(problem) -> Problem:
    if not isinstance(problem, Problem):
        raise TypeError(f"expected a Problem, got {type(problem).__name__}")
    if len(problem.basis) == 0:
        raise ValueError("working basis is empty")
    return problem


def check_states(problem: Problem, references) -> list[StateVector]:
    """CSF specs or state vectors -> state vectors on the problem basis."""
    out = []
    for ref in references:
        if isinstance(ref, StateVector):
            if ref.basis is not problem.basis:
                raise ValueError("state vector belongs to a different basis")
            out.append(ref)
        else:
            out.append(problem.reference(ref))
    if not out:
        raise ValueError("no references given")
    return out


def check_reference_set(problem: Problem, references, weights=None) -> ReferenceSet:
    states = check_states(problem, references)
    if weights is not None and not isinstance(weights, str):
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    elif isinstance(weights, str) and weights != "equal":
        raise ValueError(f"unknown weight scheme {weights!r}")
    return ReferenceSet(tuple(states), None if isinstance(weights, str) else weights)


def check_orthonormal(states: Sequence[StateVector], tol: float = 1e-10) -> None:
    m = np.column_stack([s.coeffs for s in states])
    dev = np.abs(m.T @ m - np.eye(m.shape[1])).max()
    if dev > tol:
        raise ValueError(f"states are not orthonormal (max deviation {dev:.2e})")
