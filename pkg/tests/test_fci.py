import numpy as np
import pytest

import adaptvqe.fci as fci_mod
from adaptvqe.fci import assign_states, fci_solve
from adaptvqe.fock import Basis, enumerate_basis, parse_occupation

from conftest import load


def test_single_determinant(rect):
    det = parse_occupation("2200")
    b = Basis([det], 4)
    spec = fci_solve(rect.h, b)
    v = rect.reference([("2200", 1.0)]).coeffs
    assert spec.energies[0] == pytest.approx(v @ (rect.h.matrix(rect.basis) @ v), abs=1e-12)


def test_bounds_error(rect):
    with pytest.raises(ValueError):
        fci_solve(rect.h, rect.basis, n_states=37)


def test_residuals_orthonormality_and_spin(rect):
    spec = fci_solve(rect.h, rect.basis)
    h = rect.h.matrix(rect.basis)
    res = h @ spec.vectors - spec.vectors * spec.energies
    assert np.linalg.norm(res, axis=0).max() < 1e-10
    np.testing.assert_allclose(spec.vectors.T @ spec.vectors, np.eye(36), atol=1e-12)
    s = 0.5 * (-1 + np.sqrt(1 + 4 * spec.s2_values))
    np.testing.assert_allclose(2 * s, np.rint(2 * s), atol=1e-8)
    assert np.all(np.diff(spec.energies) >= 0)


def test_sector_sum(rect):
    full = fci_solve(rect.h, rect.basis).energies
    parts = np.concatenate(
        [fci_solve(rect.h, enumerate_basis(4, 2, 2, g, rect.integrals.orbital_irreps)).energies for g in (0, 1, 2, 3)]
    )
    np.testing.assert_allclose(np.sort(parts), full, atol=1e-10)


def test_iterative_path_matches_dense(monkeypatch):
    p = load("h4_linear", "r0.88")
    dense = fci_solve(p.h, p.basis, n_states=5)
    monkeypatch.setattr(fci_mod, "DENSE_LIMIT", 4)
    sparse = fci_solve(p.h, p.basis, n_states=5)
    np.testing.assert_allclose(sparse.energies, dense.energies, atol=1e-10)
    np.testing.assert_allclose(np.abs(sparse.vectors.T @ dense.vectors), np.eye(5), atol=1e-8)


def test_square_geometry_avoided_crossing(rect):
    """Two lowest Ag singlets stay apart at the square geometry (no true crossing)."""
    spec = fci_solve(rect.h, rect.basis)
    ag = [e for e, g, s in zip(spec.energies, spec.irreps, spec.s2_values) if g == 0 and s < 0.5]
    assert ag[1] - ag[0] > 1e-3


def test_rect_low_spectrum_character():
    """Lowest states on a few geometries: two Ag singlets, B1g singlet and triplet, B2u/B3u triplets are all present."""
    for gid in ("r0.80", "r1.00", "r1.44"):
        p = load("h4_rect", gid)
        spec = fci_solve(p.h, p.basis)
        irreps = set(p.integrals.orbital_irreps)
        found = {(int(g), int(round(s))) for g, s in zip(spec.irreps[:8], spec.s2_values[:8])}
        b1g = [x for x in irreps if x not in (0,)]
        assert (0, 0) in found
        assert any((g, 2) in found for g in b1g)


def test_assign_identity_and_permutation(rect, rng):
    spec = fci_solve(rect.h, rect.basis)
    a = assign_states(spec.vectors[:, :6], spec)
    np.testing.assert_array_equal(a.mapping, np.arange(6))
    np.testing.assert_allclose(a.overlaps, 1.0, atol=1e-12)
    assert not a.ambiguous.any()
    perm = rng.permutation(6)
    a = assign_states(-spec.vectors[:, perm], spec)
    np.testing.assert_array_equal(a.mapping, perm)


def test_assign_flags_ambiguous(rect):
    spec = fci_solve(rect.h, rect.basis)
    mix = (spec.vectors[:, 0] + spec.vectors[:, 1] + spec.vectors[:, 2]) / np.sqrt(3)
    a = assign_states(mix, spec)
    assert a.ambiguous[0] and a.overlaps[0] == pytest.approx(1 / 3, abs=1e-12)
