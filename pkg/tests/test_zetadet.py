import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, strategies as st

from torsionlab import zetadet
from torsionlab.zetadet import ExplicitSpectrum, ZetaError


def test_basel():
    assert zetadet.hurwitz_zeta(2.0, 1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)


@given(st.floats(1.05, 12.0), st.floats(0.01, 5.0))
def test_matches_scipy_for_convergent_s(s, a):
    assert zetadet.hurwitz_zeta(s, a) == pytest.approx(float(sp.zeta(s, a)), rel=1e-12)


@given(st.floats(0.01, 5.0))
def test_continuation_at_nonpositive_integers(a):
    # ζ(-n, a) = -B_{n+1}(a) / (n+1)
    assert zetadet.hurwitz_zeta(0.0, a) == pytest.approx(0.5 - a, abs=1e-12)
    b2 = a * a - a + 1.0 / 6.0
    assert zetadet.hurwitz_zeta(-1.0, a) == pytest.approx(-b2 / 2, abs=1e-11 * max(1, a * a))


@given(st.floats(0.01, 0.99))
def test_lerch_cross_check(a):
    assert zetadet.lerch_discrepancy(a) <= 1e-9


def test_error_estimate_returned():
    v, err = zetadet.hurwitz_zeta(3.0, 0.5, return_error=True)
    assert err <= 1e-14 * max(1.0, abs(v))
    assert abs(v - 7 * float(sp.zeta(3.0))) <= 1e-13


def test_pole_and_domain_errors():
    with pytest.raises(ZetaError):
        zetadet.hurwitz_zeta(1.0, 0.5)
    with pytest.raises(ZetaError):
        zetadet.hurwitz_zeta(2.0, 0.0)
    with pytest.raises(ZetaError):
        zetadet.hurwitz_zeta_deriv0(-1.0)


@given(st.floats(0.02, 0.98))
def test_circle_closed_form(alpha):
    r = zetadet.circle_log_det_prime(alpha)
    assert r.log_det_prime == pytest.approx(zetadet.circle_log_det_closed_form(alpha), abs=1e-12)
    assert r.error_estimate <= 1e-12


def test_circle_examples():
    assert zetadet.circle_analytic_torsion(0.5) == pytest.approx(-math.log(2), abs=1e-13)
    assert zetadet.circle_analytic_torsion(1 / 3) == pytest.approx(-0.5 * math.log(3), abs=1e-13)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
def test_circle_endpoints_rejected(alpha):
    with pytest.raises(ZetaError, match="finite"):
        zetadet.circle_log_det_prime(alpha)


def test_finite_spectrum_pathway():
    r = zetadet.zeta_log_det(ExplicitSpectrum("finite", [0.0, 2.0, 3.0], kernel_dim=1))
    assert r.log_det_prime == pytest.approx(math.log(6))
    assert r.method == "direct_sum"
    r = zetadet.zeta_log_det(ExplicitSpectrum("circle_holonomy", alpha=0.25))
    assert r.log_det_prime == pytest.approx(math.log(2.0), abs=1e-12)
    with pytest.raises(ZetaError):
        ExplicitSpectrum("finite", [3.0, 1.0])
    with pytest.raises(ZetaError):
        ExplicitSpectrum("circle_holonomy", alpha=1.0)
