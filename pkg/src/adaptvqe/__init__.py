"""Noiseless statevector simulation of ADAPT-VQE, its state-averaged
Ritz variant (MORE-ADAPT-VQE), q-sc-EOM, and an exact FCI reference."""

from .adapt import AdaptResult, StopCriteria, run_adapt
from .estimators import AdaptVQE, FCISolver, MoreAdaptVQE, QscEOM
from .fci import assign_states, fci_solve
from .integral_io import read_fcidump, read_property_integrals
from .problem import Problem, build_problem, load_problem
from .qsceom import run_qsceom
from .vqe import Ansatz, ReferenceSet

__version__ = "0.1.0"

__all__ = [
    "AdaptResult",
    "AdaptVQE",
    "Ansatz",
    "FCISolver",
    "MoreAdaptVQE",
    "Problem",
    "QscEOM",
    "ReferenceSet",
    "StopCriteria",
    "assign_states",
    "build_problem",
    "fci_solve",
    "load_problem",
    "read_fcidump",
    "read_property_integrals",
    "run_adapt",
    "run_qsceom",
]
