"""Group actions on sampled wave-equation solutions."""

import numpy as np
import pytest

from isogas.errors import DomainError
from isogas.symmetry import (
    GridFunction,
    LieAction,
    apply_lie_action,
    invariant_solution,
    wave_equation_residual,
)


def make_grid(n=81, w_span=(0.5, 2.5), z_span=(-2.0, -0.25)):
    w = np.linspace(*w_span, n)
    z = np.linspace(*z_span, n)
    return w, z


def test_invariant_solution_residual_refines_at_second_order():
    res = []
    for n in (41, 81, 161):
        fn = invariant_solution(*make_grid(n))
        res.append(np.max(np.abs(wave_equation_residual(fn))))
    assert res[0] > res[1] > res[2]
    assert res[1] / res[0] == pytest.approx(0.25, abs=0.1)
    assert res[2] / res[1] == pytest.approx(0.25, abs=0.1)


def test_identity_parameters_leave_input_unchanged():
    fn = invariant_solution(*make_grid())
    for action in (
        LieAction("translate_w", 0.0),
        LieAction("translate_z", 0.0),
        LieAction("boost", 0.0),
    ):
        out = apply_lie_action(fn, action)
        assert np.allclose(out.values, fn.values, atol=1e-13)
    out = apply_lie_action(fn, LieAction("scale", 1.0))
    assert np.array_equal(out.values, fn.values)
    zero = GridFunction(fn.w, fn.z, np.zeros_like(fn.values))
    out = apply_lie_action(fn, LieAction("add_solution", zero))
    assert np.array_equal(out.values, fn.values)


@pytest.mark.parametrize("action", [
    LieAction("translate_w", 0.137),
    LieAction("translate_w", -0.2),
    LieAction("translate_z", 0.31),
    LieAction("scale", -2.5),
])
def test_translate_scale_keep_residual_small(action):
    fn = invariant_solution(*make_grid(121))
    base = np.max(np.abs(wave_equation_residual(fn)))
    out = apply_lie_action(fn, action)
    moved = np.max(np.abs(wave_equation_residual(out)))
    assert moved <= 10.0 * base


def test_add_solution_keeps_residual_small():
    fn = invariant_solution(*make_grid(121))
    beta = apply_lie_action(fn, LieAction("scale", 0.7))
    out = apply_lie_action(fn, LieAction("add_solution", beta))
    assert np.max(np.abs(wave_equation_residual(out))) <= 10.0 * np.max(
        np.abs(wave_equation_residual(fn))
    ) * 1.7


def test_boost_fixes_the_invariant_solution():
    # the exponent-weighted stretch maps e^{A(w-z)} f(wz) to itself
    fn = invariant_solution(*make_grid(201))
    out = apply_lie_action(fn, LieAction("boost", 0.12))
    ref = invariant_solution(out.w, out.z)
    assert np.max(np.abs(out.values - ref.values)) < 5e-5  # bilinear interp error


def test_boost_matches_direct_evaluation_on_translated_solution():
    from isogas.kernels import series_f
    from isogas.symmetry import A_COEFF

    c, xi = 0.21, 0.08
    w, z = make_grid(201)
    eta = lambda W, Z: np.exp(A_COEFF * (W + c - Z)) * series_f((W + c) * Z)
    fn = GridFunction(w, z, eta(w[:, None], z[None, :]))
    out = apply_lie_action(fn, LieAction("boost", xi))
    W, Z = np.meshgrid(out.w, out.z, indexing="ij")
    gauge = np.exp(A_COEFF * W * (1 - np.exp(-xi)) - A_COEFF * Z * (1 - np.exp(xi)))
    ref = eta(W * np.exp(-xi), Z * np.exp(xi)) * gauge
    assert np.max(np.abs(out.values - ref)) < 5e-5


def test_group_closure_of_translations():
    fn = invariant_solution(*make_grid(161))
    a = apply_lie_action(apply_lie_action(fn, LieAction("translate_w", 0.11)),
                         LieAction("translate_w", 0.07))
    b = apply_lie_action(fn, LieAction("translate_w", 0.18))
    nw = min(a.w.size, b.w.size)
    assert np.allclose(a.values[:nw, :], b.values[:nw, :], atol=5e-5)


def test_out_of_window_boost_rejected():
    fn = invariant_solution(*make_grid(41, w_span=(1.0, 1.2), z_span=(1.0, 1.2)))
    with pytest.raises(DomainError):
        apply_lie_action(fn, LieAction("boost", 5.0))


def test_unknown_kind_rejected():
    with pytest.raises(DomainError):
        LieAction("rotate", 1.0)
