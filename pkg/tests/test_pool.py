import numpy as np
import pytest

from adaptvqe.fock import enumerate_basis
from adaptvqe.hamiltonian import build_s_z
from adaptvqe.fock import number_operator
from adaptvqe.pool import build_uccgsd_pool, compile_pool

from conftest import load
from oracles import brute_force_pool


def test_single_orbital_pool_is_empty():
    assert build_uccgsd_pool(1) == []


@pytest.mark.parametrize(
    "n, irreps",
    [(2, (0, 0)), (2, (0, 1)), (3, (0, 0, 0)), (4, (0, 2, 1, 3)), (4, (0, 4, 0, 4))],
)
def test_pool_matches_brute_force(n, irreps):
    pool = build_uccgsd_pool(n, irreps)
    assert [op.label for op in pool] == brute_force_pool(n, irreps)
    assert [op.id for op in pool] == list(range(len(pool)))


def test_two_same_irrep_orbitals_contents():
    labels = [op.label for op in build_uccgsd_pool(2, (0, 0))]
    assert (0, 2) in labels and (1, 3) in labels  # alpha-alpha and beta-beta singles
    assert all(len(set(lab)) == len(lab) for lab in labels)
    assert (0, 1, 2, 3) in labels


def test_fixture_pool_sizes():
    assert len(load("h4_rect", "r1.00").pool) == 30
    assert len(load("h4_linear", "r0.88").pool) == 50
    assert len(load("beh2", "y1.23", (0, 2)).pool) == 322


def test_deterministic_ordering():
    a = build_uccgsd_pool(4, (0, 2, 1, 3))
    b = build_uccgsd_pool(4, (0, 2, 1, 3))
    assert [(x.id, x.label) for x in a] == [(y.id, y.label) for y in b]


def test_generators_stay_in_ag_sector():
    p = load("h4_rect", "r1.00")
    ag = enumerate_basis(4, 2, 2, 0, p.integrals.orbital_irreps)
    for op in p.pool_ops:
        op.generator.matrix(ag)  # raises SectorError when leaving the block


def test_antihermitian_and_conserving(rng):
    p = load("h4_rect", "r1.00")
    basis = p.basis
    n = number_operator(8).matrix(basis)
    sz = build_s_z(4).matrix(basis)
    for op in p.pool_ops:
        a = op.generator.matrix(basis)
        u, v = rng.normal(size=(2, len(basis)))
        assert u @ (a @ v) == pytest.approx(-(a @ u) @ v, abs=1e-12)
        assert np.abs((n @ a - a @ n) @ v).max() < 1e-12
        assert np.abs((sz @ a - a @ sz) @ v).max() < 1e-12


def test_compiled_pairs_reproduce_generator():
    p = load("h4_rect", "r1.00")
    cp = p.pool
    for j, op in enumerate(p.pool_ops):
        dense = op.generator.matrix(p.basis).toarray()
        rebuilt = np.zeros_like(dense)
        sl = slice(cp.ptr[j], cp.ptr[j + 1])
        rebuilt[cp.dst[sl], cp.src[sl]] = cp.sgn[sl]
        rebuilt[cp.src[sl], cp.dst[sl]] = -cp.sgn[sl]
        np.testing.assert_array_equal(rebuilt, dense)


def test_compile_rejects_overlapping_rotations():
    from adaptvqe.fock import FermionOperator
    from adaptvqe.pool import PoolOperator

    basis = enumerate_basis(2, 1, 1)
    # a+_0 a_2 - h.c. plus a+_0 a_2 n_1 type term touches states twice
    gen = FermionOperator([(1.0, ((2, True), (0, False))), (-1.0, ((0, True), (2, False))), (0.5, ((1, True), (1, False)))])
    with pytest.raises(ValueError):
        compile_pool([PoolOperator(0, gen, (0, 2), 0)], basis)
