import numpy as np
import pytest

from adaptvqe.fci import fci_solve
from adaptvqe.fock import StateVector, apply_operator, build_reference, enumerate_basis, parse_occupation
from adaptvqe.hamiltonian import build_dipole, build_hamiltonian, build_s_squared, build_s_z
from adaptvqe.integral_io import MolecularIntegrals, PropertyIntegrals, read_fcidump
from adaptvqe.properties import DEBYE_PER_AU, expectation_values, operator_in_state_basis, transition_dipole_sq

from conftest import FIXTURES, RECT_REFS, load
from oracles import JordanWigner, restrict, sector_bits

JW8 = JordanWigner(8)


def _jw(op, jw):
    return jw.operator([(c, s) for s, c in op.items()], op.constant)


def test_constant_hamiltonian():
    mi = MolecularIntegrals(2, 2, 1.2, np.zeros((2, 2)), np.zeros((2,) * 4), (0, 0))
    h = build_hamiltonian(mi)
    b = enumerate_basis(2, 1, 1)
    rng = np.random.default_rng(0)
    v = StateVector(b, rng.normal(size=len(b)))
    v = v * (1 / v.norm())
    assert v.dot(apply_operator(h, v)) == pytest.approx(1.2, abs=1e-14)


def test_h2_ground_energy_matches_dense(h2):
    mi = h2.integrals
    jw = JordanWigner(4)
    full = jw.hamiltonian(mi.core_energy, mi.one_body, mi.two_body).toarray()
    bits = sector_bits(4, 1, 1)
    oracle = np.linalg.eigvalsh(full[np.ix_(bits, bits)])
    spec = fci_solve(h2.h, h2.basis)
    np.testing.assert_allclose(spec.energies, oracle, atol=1e-12)


def test_hamiltonian_matrix_matches_jordan_wigner(rect):
    mi = rect.integrals
    dense = restrict(JW8.hamiltonian(mi.core_energy, mi.one_body, mi.two_body), rect.basis.bits)
    np.testing.assert_allclose(rect.h.matrix(rect.basis).toarray(), dense, atol=1e-12)


def test_square_geometry_degenerate_leading_determinants(rect):
    spec = fci_solve(rect.h, rect.basis)
    v = spec.vectors[:, 0]
    c1 = v[rect.basis.index_of[parse_occupation("2200")]]
    c2 = v[rect.basis.index_of[parse_occupation("2020")]]
    assert abs(c1) > 0.5
    assert c1**2 == pytest.approx(c2**2, abs=1e-10)


def test_conserves_number_and_sz(rect):
    h = _jw(rect.h, JW8)
    n = JW8.number()
    sz, s2 = JW8.spin_ops()
    for other in (n, sz, s2):
        assert abs(h @ other - other @ h).max() < 1e-12


def test_s_squared_builder(rect):
    sz, s2 = JW8.spin_ops()
    assert abs(_jw(build_s_squared(4), JW8) - s2).max() < 1e-13
    assert abs(_jw(build_s_z(4), JW8) - sz).max() < 1e-13
    closed = build_reference([("2200", 1.0)], rect.basis)
    triplet = build_reference(RECT_REFS[4], rect.basis)
    vals = expectation_values(build_s_squared(4), np.column_stack([closed.coeffs, triplet.coeffs]), rect.basis)
    np.testing.assert_allclose(vals, [0.0, 2.0], atol=1e-12)


def test_linear_h4_has_quintet():
    p = load("h4_linear", "r0.88")
    spec = fci_solve(p.h, p.basis, s_squared=p.s_squared)
    assert np.min(np.abs(spec.s2_values - 6.0)) < 1e-8
    s = 0.5 * (-1 + np.sqrt(1 + 4 * spec.s2_values))
    np.testing.assert_allclose(2 * s, np.rint(2 * s), atol=1e-8)


def test_hermiticity(rect, rng):
    ops = [rect.h, build_s_squared(4)]
    ops += list(build_dipole([PropertyIntegrals(a, np.eye(4) * 0.1 + 0.05, 0.3) for a in "xyz"]))
    for op in ops:
        m = op.matrix(rect.basis)
        u, v = rng.normal(size=(2, len(rect.basis)))
        assert u @ (m @ v) == pytest.approx((m @ u) @ v, abs=1e-12)


def test_zero_dipole_is_nuclear_constant():
    mu = build_dipole([PropertyIntegrals(a, np.zeros((2, 2)), 0.75) for a in "xyz"])
    b = enumerate_basis(2, 1, 1)
    for op in mu:
        np.testing.assert_allclose(op.matrix(b).toarray(), 0.75 * np.eye(len(b)), atol=0)


@pytest.fixture(scope="module")
def beh2_ts():
    p = load("beh2", "y1.23", (0, 2), True)
    return p, fci_solve(p.h, p.basis, s_squared=p.s_squared)


def _singlets_triplets(spec):
    sing = [i for i in range(len(spec.energies)) if spec.s2_values[i] < 1.0]
    trip = [i for i in range(len(spec.energies)) if abs(spec.s2_values[i] - 2.0) < 1e-6]
    return sing, trip


def test_fci_singlet_triplet_dipole_vanishes(beh2_ts):
    p, spec = beh2_ts
    sing, trip = _singlets_triplets(spec)
    states = spec.vectors[:, [sing[0], trip[0], trip[1]]]
    mats = [operator_in_state_basis(d, states, p.basis).matrix for d in p.dipole]
    assert transition_dipole_sq(0, 1, mats) < 1e-10
    assert transition_dipole_sq(0, 2, mats) < 1e-10


def _irrep(bits, orbital_irreps):
    g = 0
    for j, label in enumerate(orbital_irreps):
        g ^= label * ((int(bits) >> (2 * j) & 1) ^ (int(bits) >> (2 * j + 1) & 1))
    return g


def test_fci_singlet_singlet_dipole_matches_oracle(beh2_ts):
    p, spec = beh2_ts
    sing, _ = _singlets_triplets(spec)
    a1 = [i for i in sing if spec.irreps[i] == 0][:2]
    states = spec.vectors[:, a1]
    mats = [operator_in_state_basis(d, states, p.basis).matrix for d in p.dipole]
    value = transition_dipole_sq(0, 1, mats)

    # oracle: Jordan-Wigner Hamiltonian and dipoles on the same A1 determinants
    mi = p.integrals
    jw = JordanWigner(14)
    sector = sector_bits(14, 3, 3)
    a1 = np.array([i for i, b in enumerate(sector) if _irrep(b, mi.orbital_irreps) == 0])
    h = jw.hamiltonian(mi.core_energy, mi.one_body, mi.two_body, sector).toarray()[np.ix_(a1, a1)]
    w, vecs = np.linalg.eigh(h)
    _, s2 = jw.spin_ops()
    s2 = restrict(s2, sector[a1])
    singlet = [i for i in range(len(w)) if vecs[:, i] @ s2 @ vecs[:, i] < 1.0][:2]
    from adaptvqe.integral_io import read_property_integrals

    total = 0.0
    for a in "xyz":
        pi = read_property_integrals(FIXTURES / "beh2" / f"y1.23.dip{a}", a)
        mu = jw.one_body(pi.one_body, pi.nuclear_term, -1.0, sector).toarray()[np.ix_(a1, a1)]
        total += (vecs[:, singlet[0]] @ mu @ vecs[:, singlet[1]]) ** 2
    oracle = total * DEBYE_PER_AU**2
    assert value > 1.0
    assert value == pytest.approx(oracle, rel=1e-10)
