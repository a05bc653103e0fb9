import numpy as np
import pytest

from pullback_hyperbolicity.errors import DegenerateModel, DomainError
from pullback_hyperbolicity.models import AFZ, PRESETS, STRONGLY_COUPLED, PowerModel, eval_model


def test_afz_at_unit_sigma2():
    ev = eval_model(AFZ, 1.0)
    assert ev.L == -0.5
    assert ev.L2 == pytest.approx(-3 / 8, abs=1e-15)
    assert ev.L22 == pytest.approx(3 / 32, abs=1e-15)
    # xi = 2 L22 / L2
    assert ev.xi == pytest.approx(-0.5, abs=1e-15)
    assert 1 + ev.xi * 1.0 == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("s", [1e-3, 0.2, 1.0, 7.5])
def test_strongly_coupled_has_zero_xi(s):
    ev = eval_model(STRONGLY_COUPLED, s)
    assert ev.L22 == 0.0 and ev.xi == 0.0 and ev.dxi == 0.0
    assert np.signbit(ev.xi) == False  # noqa: E712


@pytest.mark.parametrize("q", [0.5, 0.75, 1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("s", [0.3, 1.0, 4.0])
def test_finite_difference_derivatives(q, s):
    m = PowerModel(c=-0.7, q=q)
    ev = eval_model(m, s)
    d = 1e-5 * s
    assert abs(ev.L2 - (m(s + d) - m(s - d)) / (2 * d)) <= 1e-6
    d2 = 1e-4 * s
    fd_L22 = (m(s + d2) - 2 * m(s) + m(s - d2)) / d2**2
    assert abs(ev.L22 - fd_L22) <= 1e-5 * (1 + abs(ev.L22))


@pytest.mark.parametrize("q", [0.5, 0.75, 1.5, 2.0])
def test_xi_closed_form_and_derivative(q):
    m = PowerModel(c=1.3, q=q)
    for s in (0.2, 1.0, 3.0):
        ev = eval_model(m, s)
        assert ev.xi == pytest.approx(2 * (q - 1) / s, rel=1e-13)
        d = 1e-6 * s
        fd = (eval_model(m, s + d).xi - eval_model(m, s - d).xi) / (2 * d)
        assert ev.dxi == pytest.approx(fd, rel=1e-6)


def test_xi_independent_of_coefficient():
    assert eval_model(PowerModel(-0.5, 0.75), 2.0).xi == eval_model(PowerModel(3.0, 0.75), 2.0).xi


@pytest.mark.parametrize("s", [0.0, -1.0])
def test_fractional_exponent_domain(s):
    with pytest.raises(DomainError):
        eval_model(AFZ, s)


def test_integer_exponent_allows_negative_sigma2():
    ev = eval_model(PowerModel(-0.5, 2.0), -2.0)
    assert ev.L2 == pytest.approx(-0.5 * 2 * -2.0)
    assert ev.xi == pytest.approx(2 * 1 / -2.0)


def test_vanishing_L2_is_degenerate():
    with pytest.raises(DegenerateModel):
        eval_model(PowerModel(-0.5, 2.0), 0.0)


def test_nonfinite_sigma2():
    with pytest.raises(DomainError):
        eval_model(STRONGLY_COUPLED, float("nan"))


@pytest.mark.parametrize("c,q", [(0.0, 1.0), (-0.5, 0.0), (-0.5, -1.0)])
def test_invalid_parameters(c, q):
    with pytest.raises(ValueError):
        PowerModel(c, q)


def test_presets():
    assert set(PRESETS) == {"afz", "strongly_coupled"}
    assert (AFZ.c, AFZ.q) == (-0.5, 0.75)
    assert (STRONGLY_COUPLED.c, STRONGLY_COUPLED.q) == (-0.5, 1.0)
