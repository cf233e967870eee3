"""Second-quantized Hamiltonian, total spin and dipole operators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FermionOperator
from .integral_io import MolecularIntegrals, PropertyIntegrals, symmetry_forbidden_masks

__all__ = [
    "HamiltonianSet",
    "build_dipole",
    "build_hamiltonian",
    "build_s_squared",
    "build_s_z",
    "build_hamiltonian_set",
]

DROP = 1e-14


@dataclass(frozen=True)
class HamiltonianSet:
    h: FermionOperator
    s_squared: FermionOperator
    dipole: tuple[FermionOperator, FermionOperator, FermionOperator] | None = None


def _spin_orb(p: int, spin: int) -> int:
    return 2 * p + spin


def build_hamiltonian(mi: MolecularIntegrals, drop: float = DROP, enforce_symmetry: bool = True) -> FermionOperator:
    """``E_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q`` (spin summed).

    Two-body strings are brought to the canonical form ``a+_i a+_j a_k a_l``
    with ``i < j`` and ``k < l`` so equivalent strings merge. With
    ``enforce_symmetry`` integrals that the orbital irreps forbid are zeroed,
    so round-off in the integral file cannot couple symmetry blocks.
    """
    n = mi.n_spatial
    h1, g2 = mi.one_body, mi.two_body
    if enforce_symmetry:
        h_bad, g_bad = symmetry_forbidden_masks(mi.orbital_irreps)
        h1 = np.where(h_bad, 0.0, h1)
        g2 = np.where(g_bad, 0.0, g2)
    acc: dict[tuple, float] = {}

    def add(coeff, string):
        acc[string] = acc.get(string, 0.0) + coeff

    for p in range(n):
        for q in range(n):
            if abs(h1[p, q]) > drop:
                for s in (0, 1):
                    add(h1[p, q], ((_spin_orb(p, s), True), (_spin_orb(q, s), False)))
    for p, q, r, s in zip(*np.nonzero(np.abs(g2) > drop)):
        v = 0.5 * g2[p, q, r, s]
        for sig in (0, 1):
            for tau in (0, 1):
                i, l = _spin_orb(p, sig), _spin_orb(q, sig)
                j, k = _spin_orb(r, tau), _spin_orb(s, tau)
                # a+_i a+_j a_k a_l
                if i == j or k == l:
                    continue
                sign = 1.0
                if i > j:
                    i, j, sign = j, i, -sign
                if k > l:
                    k, l, sign = l, k, -sign
                add(sign * v, ((i, True), (j, True), (k, False), (l, False)))
    terms = [(c, s) for s, c in acc.items() if abs(c) > drop]
    return FermionOperator(terms, mi.core_energy)


def build_s_z(n_spatial: int) -> FermionOperator:
    terms = []
    for p in range(n_spatial):
        a, b = _spin_orb(p, 0), _spin_orb(p, 1)
        terms.append((0.5, ((a, True), (a, False))))
        terms.append((-0.5, ((b, True), (b, False))))
    return FermionOperator(terms)


def build_s_squared(n_spatial: int) -> FermionOperator:
    """``S^2 = S- S+ + Sz (Sz + 1)``."""
    s_plus = FermionOperator(
        [(1.0, ((_spin_orb(p, 0), True), (_spin_orb(p, 1), False))) for p in range(n_spatial)]
    )
    s_minus = s_plus.adjoint()
    s_z = build_s_z(n_spatial)
    return s_minus * s_plus + s_z * s_z + s_z


def build_dipole(ints, drop: float = 0.0) -> tuple[FermionOperator, ...]:
    """Dipole operators ``nuclear - sum mu_pq a+_p a_q`` (electron charge -1), one per axis.

    ``ints`` is a sequence of three :class:`PropertyIntegrals` (x, y, z) or a
    mapping from axis label to integrals.
    """
    if isinstance(ints, dict):
        ints = [ints[a] for a in "xyz"]
    ops = []
    for pi in ints:
        mu = np.asarray(pi.one_body)
        n = mu.shape[0]
        terms = []
        for p in range(n):
            for q in range(n):
                if abs(mu[p, q]) > drop:
                    for s in (0, 1):
                        terms.append((-mu[p, q], ((_spin_orb(p, s), True), (_spin_orb(q, s), False))))
        ops.append(FermionOperator(terms, pi.nuclear_term))
    return tuple(ops)


def build_hamiltonian_set(
    mi: MolecularIntegrals, dipoles: list[PropertyIntegrals] | None = None
) -> HamiltonianSet:
    if dipoles is not None:
        for pi in dipoles:
            if np.shape(pi.one_body) != (mi.n_spatial, mi.n_spatial):
                raise ValueError(
                    f"{pi.component} dipole integrals have shape {np.shape(pi.one_body)}, "
                    f"expected {(mi.n_spatial, mi.n_spatial)}"
                )
    return HamiltonianSet(
        h=build_hamiltonian(mi),
        s_squared=build_s_squared(mi.n_spatial),
        dipole=build_dipole(dipoles) if dipoles is not None else None,
    )
