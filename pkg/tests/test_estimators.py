import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from adaptvqe import AdaptVQE, FCISolver, MoreAdaptVQE, QscEOM

from conftest import RECT_REFS


def test_params_and_clone():
    est = MoreAdaptVQE(max_ops=7, grad_norm=1e-4)
    assert est.get_params()["max_ops"] == 7
    c = clone(est)
    assert c is not est and c.get_params() == est.get_params()
    est.set_params(max_ops=3)
    assert est.max_ops == 3
    q = QscEOM(ground=AdaptVQE(max_ops=5))
    assert q.get_params()["ground__max_ops"] == 5


@pytest.mark.parametrize("est", [MoreAdaptVQE(max_ops=3), AdaptVQE(max_ops=3), QscEOM(), FCISolver()])
def test_not_fitted(est):
    with pytest.raises(NotFittedError):
        check_is_fitted(est)


def test_fci_solver(rect):
    est = FCISolver(n_states=6).fit(rect)
    check_is_fitted(est)
    assert est.states().shape == (36, 6)
    np.testing.assert_allclose(est.transform(rect.h).diagonal, est.energies_, atol=1e-10)
    with pytest.raises((IndexError, ValueError)):
        FCISolver(n_states=37).fit(rect)


def test_more_adapt_fit(rect):
    exact = FCISolver().fit(rect)
    est = MoreAdaptVQE(max_ops=50, grad_norm=None).fit(rect, RECT_REFS)
    assert len(est.ansatz_) <= 50
    assert est.energies_.shape == (6,)
    # Ritz values bound the exact ones from above
    assert np.all(est.energies_ >= np.sort(exact.energies_)[:6] - 1e-10)
    a = est.assign()
    assert a.overlaps.min() > 0.9
    s2 = est.transform(rect.s_squared, "S2")
    assert s2.label == "S2"


def test_adapt_and_qsceom_fit(rect):
    e0 = FCISolver(n_states=1).fit(rect).energies_[0]
    ad = AdaptVQE(max_ops=25, grad_norm=None, target_tol=1e-12).fit(rect, RECT_REFS[0], target_energy=e0)
    assert ad.energies_[0] == pytest.approx(e0, abs=1e-10)
    q = QscEOM(ground=AdaptVQE(max_ops=25, grad_norm=None, target_tol=1e-12)).fit(
        rect, RECT_REFS[0], RECT_REFS[1:], target_energy=e0
    )
    check_is_fitted(q)
    assert q.energies_[0] == pytest.approx(e0, abs=1e-10)
    assert q.coupling_norm_ < 1e-8
    st = q.states()
    np.testing.assert_allclose(st.T @ st, np.eye(6), atol=1e-12)
