import numpy as np
import pytest
import scipy.stats

from adaptvqe.fci import fci_solve
from adaptvqe.fock import StateVector, build_reference
from adaptvqe.vqe import Ansatz, ReferenceSet, evolve, evolve_matrix, minimize, sa_energy, sa_gradient

from conftest import RECT_REFS
from oracles import central_difference, evolve_dense


def _random_ansatz(rng, n_pool, length, scale=1.0):
    return Ansatz(tuple((int(j), float(t)) for j, t in zip(rng.integers(0, n_pool, length), rng.normal(size=length) * scale)))


def _dense_generators(problem, ids):
    return [problem.pool_ops[j].generator.matrix(problem.basis).toarray() for j in ids]


def test_evolve_identity(rect, rng):
    v = build_reference(RECT_REFS[0], rect.basis)
    np.testing.assert_array_equal(evolve(Ansatz(), v, rect.pool).coeffs, v.coeffs)
    zero = Ansatz(((3, 0.0), (7, 0.0)))
    np.testing.assert_array_equal(evolve(zero, v, rect.pool).coeffs, v.coeffs)


def test_evolve_matches_dense_products(rect, rng):
    v = build_reference(RECT_REFS[0], rect.basis)
    for length in (1, 2, 5, 12):
        a = _random_ansatz(rng, len(rect.pool), length)
        expected = evolve_dense(_dense_generators(rect, a.ids), a.thetas, v.coeffs)
        out = evolve(a, v, rect.pool)
        np.testing.assert_allclose(out.coeffs, expected, atol=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_sa_energy_single_reference(rect, rng):
    v = build_reference(RECT_REFS[0], rect.basis)
    a = _random_ansatz(rng, len(rect.pool), 6)
    psi = evolve(a, v, rect.pool).coeffs
    h = rect.h.matrix(rect.basis)
    assert sa_energy(a, ReferenceSet((v,)), rect.h, rect.pool) == pytest.approx(psi @ (h @ psi), abs=1e-12)


def test_sa_energy_eigenvector_references(rect):
    spec = fci_solve(rect.h, rect.basis)
    refs = tuple(spec.state(i) for i in range(3))
    w = np.array([0.5, 0.3, 0.2])
    e = sa_energy(Ansatz(), ReferenceSet(refs, w), rect.h, rect.pool)
    assert e == pytest.approx(w @ spec.energies[:3], abs=1e-12)


def test_sa_energy_h2_dense(h2, rng):
    from oracles import JordanWigner, restrict

    mi = h2.integrals
    hd = restrict(JordanWigner(4).hamiltonian(mi.core_energy, mi.one_body, mi.two_body), h2.basis.bits)
    v = h2.basis.basis_state(h2.basis.dets[0])
    for _ in range(5):
        a = _random_ansatz(rng, len(h2.pool), 4)
        psi = evolve_dense(_dense_generators(h2, a.ids), a.thetas, v.coeffs)
        assert sa_energy(a, ReferenceSet((v,)), h2.h, h2.pool) == pytest.approx(psi @ hd @ psi, abs=1e-12)


def test_gradient_empty(rect):
    v = build_reference(RECT_REFS[0], rect.basis)
    assert sa_gradient(Ansatz(), ReferenceSet((v,)), rect.h, rect.pool).shape == (0,)


def test_single_parameter_gradient_is_commutator(rect, rng):
    v = build_reference(RECT_REFS[0], rect.basis)
    h = rect.h.matrix(rect.basis).toarray()
    for j in rng.choice(len(rect.pool), 5, replace=False):
        theta = float(rng.normal())
        a = Ansatz(((int(j), theta),))
        am = _dense_generators(rect, [j])[0]
        psi = evolve(a, v, rect.pool).coeffs
        expected = psi @ (h @ am - am @ h) @ psi
        g = sa_gradient(a, ReferenceSet((v,)), rect.h, rect.pool)
        assert g[0] == pytest.approx(expected, abs=1e-12)


def test_gradient_matches_finite_differences(rect, rng):
    refs = ReferenceSet(tuple(build_reference(r, rect.basis) for r in RECT_REFS[:3]), np.array([0.5, 0.3, 0.2]))
    a = _random_ansatz(rng, len(rect.pool), 8, 0.5)
    g = sa_gradient(a, refs, rect.h, rect.pool)
    fd = central_difference(lambda x: sa_energy(a.with_thetas(x), refs, rect.h, rect.pool), a.thetas)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-9)


def test_trace_invariance_under_reference_rotation(rect, rng):
    refs = [build_reference(r, rect.basis) for r in (RECT_REFS[0], RECT_REFS[1], RECT_REFS[2])]
    a = _random_ansatz(rng, len(rect.pool), 7)
    e = sa_energy(a, ReferenceSet(tuple(refs)), rect.h, rect.pool)
    q = scipy.stats.ortho_group.rvs(3, random_state=7)
    m = np.column_stack([r.coeffs for r in refs]) @ q
    mixed = tuple(StateVector(rect.basis, m[:, i]) for i in range(3))
    assert sa_energy(a, ReferenceSet(mixed), rect.h, rect.pool) == pytest.approx(e, abs=1e-10)


def test_minimize_stationary_input(rect):
    spec = fci_solve(rect.h, rect.basis)
    refs = ReferenceSet((spec.state(0),))
    a = Ansatz(((4, 0.0),))
    res = minimize(a, refs, rect.h, rect.pool)
    assert res.iterations <= 1 and res.ansatz == a
    assert res.energy == pytest.approx(spec.energies[0], abs=1e-12)


def test_minimize_two_level_closed_form(h2):
    pool_id = next(op.id for op in h2.pool_ops if op.label == (0, 1, 2, 3))
    v = build_reference([("20", 1.0)], h2.basis)
    res = minimize(Ansatz(((pool_id, 0.0),)), ReferenceSet((v,)), h2.h, h2.pool, gtol=1e-12)
    # the exact rotation angle: exp(theta A)|20> = cos|20> + sin A|20>
    h = h2.h.matrix(h2.basis).toarray()
    am = h2.pool_ops[pool_id].generator.matrix(h2.basis).toarray()
    e1 = v.coeffs
    e2 = am @ e1
    hh = np.array([[e1 @ h @ e1, e1 @ h @ e2], [e2 @ h @ e1, e2 @ h @ e2]])
    w, c = np.linalg.eigh(hh)
    theta_star = np.arctan2(c[1, 0], c[0, 0])
    delta = (res.ansatz.thetas[0] - theta_star + np.pi / 2) % np.pi - np.pi / 2
    assert abs(delta) < 1e-8
    assert res.energy == pytest.approx(w[0], abs=1e-12)
    assert res.energy == pytest.approx(fci_solve(h2.h, h2.basis).energies[0], abs=1e-12)


def test_minimize_monotone_and_stationary(rect, rng):
    refs = ReferenceSet(tuple(build_reference(r, rect.basis) for r in RECT_REFS))
    for _ in range(5):
        a = _random_ansatz(rng, len(rect.pool), 6, 0.3)
        e0 = sa_energy(a, refs, rect.h, rect.pool)
        res = minimize(a, refs, rect.h, rect.pool, gtol=1e-8)
        assert res.energy <= e0 + 1e-12
        if res.converged:
            assert np.abs(sa_gradient(res.ansatz, refs, rect.h, rect.pool)).max() <= 1e-8


def test_reference_set_validation(rect):
    a = build_reference(RECT_REFS[0], rect.basis)
    b = build_reference(RECT_REFS[1], rect.basis)
    with pytest.raises(ValueError):
        ReferenceSet((a, a))
    with pytest.raises(ValueError):
        ReferenceSet((a, b), np.array([0.7, 0.7]))
    with pytest.raises(ValueError):
        ReferenceSet((a, b), np.array([1.2, -0.2]))
    np.testing.assert_allclose(ReferenceSet((a, b)).weights, [0.5, 0.5])


def test_evolve_matrix_columns(rect, rng):
    refs = ReferenceSet(tuple(build_reference(r, rect.basis) for r in RECT_REFS))
    a = _random_ansatz(rng, len(rect.pool), 5)
    m = evolve_matrix(a, refs.matrix, rect.pool)
    np.testing.assert_allclose(m.T @ m, np.eye(6), atol=1e-12)
    for i, r in enumerate(refs.refs):
        np.testing.assert_allclose(m[:, i], evolve(a, r, rect.pool).coeffs, atol=1e-14)
