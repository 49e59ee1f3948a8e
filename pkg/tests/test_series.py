"""Series layer: the ODE solution f and its termwise derivatives."""

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from isogas.errors import DomainError, PrecisionError
from isogas.kernels import (
    DEFAULT_CONFIG,
    KernelConfig,
    eval_f,
    eval_f_derivs,
    series_f,
    series_f1,
)


def mp_series_f(m, terms=60):
    """Independent extended-precision oracle for f."""
    from mpmath import mp, mpf

    mp.dps = 40
    A2 = mpf(1) / 16
    tot = t = mpf(1)
    for n in range(terms):
        t *= (-A2 * mpf(m)) / (n + 1) ** 2
        tot += t
    return tot


def test_f_at_zero_exact():
    assert eval_f(0.0) == 1.0


def test_f1_at_zero_exact():
    assert series_f1(0.0) == -1.0 / 16.0


def test_f_minus_one_against_frozen_oracle():
    # 30-term extended-precision sum of ((1/4)^n / n!)^2
    assert eval_f(-1.0) == pytest.approx(1.063483370741323519263, abs=1e-15)


def test_f_negative_axis_matches_bessel_i0():
    # f(-y^2) = I0(2 A y); third-party Bessel evaluation as cross-check
    for y in (0.5, 1.0, 2.0, 5.0):
        assert eval_f(-(y**2)) == pytest.approx(float(sp.i0(0.5 * y)), rel=1e-13)


@pytest.mark.parametrize("y", [1.0, 2.0, 5.0])
def test_f_positive_axis_matches_bessel_j0(y):
    # f(y^2) = J0(2 A y)
    assert eval_f(y**2) == pytest.approx(float(sp.j0(0.5 * y)), rel=1e-11, abs=1e-14)


def test_f_matches_extended_precision_on_wide_range():
    for m in (-100.0, -17.3, -0.2, 0.7, 31.0, 100.0):
        assert eval_f(m) == pytest.approx(float(mp_series_f(m)), rel=1e-13, abs=1e-15)


def test_ode_residual_at_zero_exact():
    f, f1, _ = eval_f_derivs(0.0)
    assert 0.0 * 1.0 + f1 + f / 16.0 == 0.0


@pytest.mark.parametrize("m", [-25.0, -1.0, 1.0, 25.0])
def test_ode_residual_pointwise(m):
    f, f1, f2 = eval_f_derivs(m)
    assert abs(m * f2 + f1 + f / 16.0) <= 10.0 * DEFAULT_CONFIG.tail_tol


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-100.0, max_value=100.0))
def test_ode_invariant_on_interval(m):
    f, f1, f2 = eval_f_derivs(m)
    assert abs(m * f2 + f1 + f / 16.0) <= 10.0 * DEFAULT_CONFIG.tail_tol


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-200.0, max_value=0.0))
def test_f_at_least_one_on_negative_axis(m):
    # every series term is nonnegative for m <= 0
    assert series_f(m) >= 1.0


def test_vectorized_series_matches_scalar():
    m = np.linspace(-80.0, 80.0, 401)
    vec = series_f(m)
    assert vec.shape == m.shape
    for i in (0, 57, 200, 400):
        assert vec[i] == pytest.approx(eval_f(float(m[i])), rel=1e-14)


def test_non_finite_argument_rejected():
    with pytest.raises(DomainError):
        eval_f(float("nan"))
    with pytest.raises(DomainError):
        eval_f(float("inf"))


def test_truncation_cap_raises_precision_error():
    tight = KernelConfig(max_terms=4, tail_tol=1e-14)
    with pytest.raises(PrecisionError) as exc:
        series_f(50.0, tight)
    assert exc.value.last_term is not None and exc.value.last_term >= tight.tail_tol


def test_config_requires_exact_a_squared():
    with pytest.raises(DomainError):
        KernelConfig(A=0.25, A2=0.0626)
