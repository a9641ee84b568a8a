import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from loewnerkit.core import DrivingTerm, Trace
from loewnerkit.errors import ArgumentError
from loewnerkit.estimators import (ForwardLoewner, SqrtAsymptote, TailGeometryEstimator,
                                   Unzipper, check_curve, check_driving, check_trace)
from loewnerkit.explicit import params_from_kappa, trace_explicit


def test_params_and_clone():
    est = ForwardLoewner(n_steps=64, grid="geometric_s")
    assert est.get_params() == {"n_steps": 64, "grid": "geometric_s", "tail_fraction": 0.5}
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    assert SqrtAsymptote().set_params(a=0.25).a == 0.25


@pytest.mark.parametrize("est", [ForwardLoewner(), Unzipper(), SqrtAsymptote()])
def test_not_fitted(est):
    with pytest.raises(NotFittedError):
        est.predict([0.5])


def test_forward_estimator():
    est = ForwardLoewner(n_steps=512).fit(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert est.fit(DrivingTerm.constant(0.0)) is est
    z = np.array([1 + 1j, 3j])
    assert np.allclose(est.inverse_transform(est.transform(z)), z, atol=1e-12)
    # the tip lands on the square-root branch point, so only half the digits survive
    assert abs(est.transform([2j])[0]) < 1e-6
    assert abs(est.predict([0.25])[0] - 1j) < 1e-12


def test_unzipper_round_trip():
    y = np.linspace(0.0, 2.0, 129)
    est = Unzipper().fit(np.column_stack([np.full_like(y, 0.5), y]))
    assert est.total_capacity_ == pytest.approx(1.0)
    assert np.allclose(est.predict([0.1, 0.9]), 0.5)


def test_sqrt_asymptote_estimator():
    est = SqrtAsymptote().fit(DrivingTerm.sqrt_family(-3.0, 0.5))
    assert est.kappa_ == pytest.approx(3.0, rel=1e-9)
    assert est.lambda_at_1_ == 0.5 and est.sign_ == -1.0
    assert np.allclose(est.predict([0.0, 0.75]), [-2.5, -1.0])


def test_tail_geometry_estimator():
    tr = trace_explicit(params_from_kappa(5.0), np.linspace(0.0, 24.0, 2001))
    est = TailGeometryEstimator(kappa=5.0).fit(tr)
    assert est.regime_ == "collision"
    assert abs(est.endpoint_ - 1.0) < 1e-2
    with pytest.raises(ArgumentError):
        TailGeometryEstimator().fit(tr)


def test_input_checks():
    with pytest.raises(ArgumentError):
        check_driving(np.zeros((3, 3)))
    with pytest.raises(ArgumentError):
        check_curve(np.zeros(4))
    assert check_curve(np.array([0.0, 1j])).base == 0.0
    tr = check_trace([[0.0, 1.0, 0.0], [1.0, 1.0, 1.0]])
    assert isinstance(tr, Trace) and tr.z[-1] == 1 + 1j
    with pytest.raises(ArgumentError):
        check_trace(np.zeros((2, 2)))
