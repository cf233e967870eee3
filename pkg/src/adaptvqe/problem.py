"""One molecular problem: integrals, working basis, operators and compiled pool."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fci import FciSpectrum, fci_solve
from .fock import Basis, Determinant, StateVector, build_reference, enumerate_basis, parse_occupation
from .hamiltonian import HamiltonianSet, build_hamiltonian_set
from .integral_io import (
    MolecularIntegrals,
    PropertyIntegrals,
    read_fcidump,
    read_property_integrals,
)
from .pool import CompiledPool, PoolOperator, build_uccgsd_pool, compile_pool

__all__ = ["Problem", "build_problem", "load_problem", "reference_irreps", "parse_csf"]


def parse_csf(spec) -> list[tuple[Determinant, float]]:
    """``[("2ab0", 0.7071), ("2ba0", -0.7071)]`` or a bare occupation string."""
    if isinstance(spec, str):
        return [(parse_occupation(spec), 1.0)]
    return [(parse_occupation(occ) if isinstance(occ, str) else occ, float(c)) for occ, c in spec]


def reference_irreps(csfs: Iterable, orbital_irreps: Sequence[int]) -> tuple[int, ...]:
    labels = set()
    for spec in csfs:
        for det, _ in parse_csf(spec):
            labels.add(det.irrep(orbital_irreps))
    return tuple(sorted(labels))


@dataclass
class Problem:
    integrals: MolecularIntegrals
    basis: Basis
    operators: HamiltonianSet
    pool_ops: tuple[PoolOperator, ...]
    pool: CompiledPool
    _fci: dict = field(default_factory=dict, repr=False)

    @property
    def h(self):
        return self.operators.h

    @property
    def s_squared(self):
        return self.operators.s_squared

    @property
    def dipole(self):
        return self.operators.dipole

    @property
    def irreps(self) -> tuple[int, ...]:
        sector = self.basis.sector[2]
        return tuple(np.unique(self.basis.irreps())) if sector == "all" else tuple(sector)

    def reference(self, spec) -> StateVector:
        return build_reference(parse_csf(spec), self.basis)

    def restricted(self, irreps) -> "Problem":
        """Same molecule on a smaller irrep set (shares operators and pool ids)."""
        return build_problem(self.integrals, irreps, operators=self.operators, pool_ops=self.pool_ops)

    def fci(self) -> FciSpectrum:
        if "full" not in self._fci:
            self._fci["full"] = fci_solve(self.h, self.basis, s_squared=self.s_squared)
        return self._fci["full"]

    def sector_dims(self) -> dict[int, int]:
        """Determinant count per irrep over the whole (n_alpha, n_beta) space."""
        mi = self.integrals
        full = enumerate_basis(mi.n_spatial, self.basis.sector[0], self.basis.sector[1], None, mi.orbital_irreps)
        return dict(sorted(Counter(full.irreps().tolist()).items()))


def build_problem(
    mi: MolecularIntegrals,
    irreps=None,
    dipoles: Sequence[PropertyIntegrals] | None = None,
    n_alpha: int | None = None,
    n_beta: int | None = None,
    operators: HamiltonianSet | None = None,
    pool_ops: Sequence[PoolOperator] | None = None,
) -> Problem:
    n_alpha = mi.n_alpha if n_alpha is None else n_alpha
    n_beta = mi.n_beta if n_beta is None else n_beta
    basis = enumerate_basis(mi.n_spatial, n_alpha, n_beta, irreps, mi.orbital_irreps)
    if operators is None:
        operators = build_hamiltonian_set(mi, dipoles)
    if pool_ops is None:
        pool_ops = build_uccgsd_pool(mi.n_spatial, mi.orbital_irreps)
    pool_ops = tuple(pool_ops)
    return Problem(mi, basis, operators, pool_ops, compile_pool(pool_ops, basis))


def load_problem(fcidump, dipoles: Sequence | None = None, irreps=None, references=None) -> Problem:
    """Read integrals (and optional x, y, z dipole files) and build the problem.

    When ``references`` (CSF specs) are given and ``irreps`` is not, the
    working basis is the union of the references' irreps.
    """
    mi = read_fcidump(fcidump)
    props = None
    if dipoles:
        props = [read_property_integrals(p, axis) for p, axis in zip(dipoles, "xyz")]
    if irreps is None and references is not None:
        irreps = reference_irreps(references, mi.orbital_irreps)
    return build_problem(mi, irreps, props)
