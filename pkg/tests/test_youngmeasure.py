"""Atomic measures, commutation algebra, mollifier lemmas, classifier."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isogas.errors import DomainError
from isogas.youngmeasure import (
    DiscreteMeasure,
    Mollifier,
    MollifierPair,
    PowerEntropyPair,
    Verdict,
    commutation_residual,
    compute_Y,
    D_of_R,
    dichotomy_check,
    mollifier_limit_I,
    mollifier_limit_J,
    mollifier_limit_K,
    polynomial_bump,
    support_reduction_classify,
)

PHI2 = Mollifier.from_callable(polynomial_bump(-0.25, 0.7))
PHI3 = Mollifier.from_callable(polynomial_bump(0.25, 0.7))


class TestDiscreteMeasure:
    def test_weight_sum_enforced(self):
        with pytest.raises(DomainError):
            DiscreteMeasure(np.array([[0.1, 0.1, 0.5], [0.2, 0.2, 0.6]]))

    def test_quarter_plane_enforced(self):
        with pytest.raises(DomainError):
            DiscreteMeasure(np.array([[-0.1, 0.1, 1.0]]))

    def test_box_constraint(self):
        with pytest.raises(DomainError):
            DiscreteMeasure(np.array([[0.5, 0.1, 1.0]]), box=(0.4, 0.4))

    def test_dirac_plus_vacuum_builder(self):
        nu = DiscreteMeasure.dirac_plus_vacuum(0.3, (0.2, 0.1))
        assert nu.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert nu.off_vacuum_indices().size == 1


class TestCommutation:
    def test_single_atom_factorizes_exactly(self):
        nu = DiscreteMeasure(np.array([[0.3, 0.2, 1.0]]))
        assert commutation_residual(nu, PowerEntropyPair(2.0), PowerEntropyPair(3.0)) == 0.0

    def test_pure_vacuum_measure_gives_zero(self):
        nu = DiscreteMeasure(np.array([[0.3, 0.0, 0.5], [0.0, 0.7, 0.5]]))
        assert commutation_residual(nu, PowerEntropyPair(2.0), PowerEntropyPair(3.0)) == 0.0

    def test_two_atom_residual_matches_hand_expansion(self):
        alpha, P = 0.5, (0.2, 0.1)
        nu = DiscreteMeasure(np.array([[P[0], P[1], alpha], [0.0, 0.0, 1 - alpha]]))
        p1, p2 = PowerEntropyPair(2.0), PowerEntropyPair(3.0)
        e1, q1 = p1.eta_q(np.array([P[0]]), np.array([P[1]]))
        e2, q2 = p2.eta_q(np.array([P[0]]), np.array([P[1]]))
        by_hand = alpha * (1 - alpha) * float((e1 * q2 - e2 * q1)[0])
        measured = commutation_residual(nu, p1, p2)
        assert measured == pytest.approx(by_hand, rel=1e-14)
        assert measured != 0.0

    def test_antisymmetric_under_pair_swap(self):
        nu = DiscreteMeasure.dirac_plus_vacuum(0.4, (0.3, 0.1))
        a = commutation_residual(nu, PowerEntropyPair(2.0), PowerEntropyPair(3.0))
        b = commutation_residual(nu, PowerEntropyPair(3.0), PowerEntropyPair(2.0))
        assert a == pytest.approx(-b, rel=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(min_value=0.01, max_value=0.9),
        st.floats(min_value=0.01, max_value=0.9),
        st.floats(min_value=1.1, max_value=5.0),
        st.floats(min_value=1.1, max_value=5.0),
    )
    def test_point_mass_property(self, W, Z, B1, B2):
        nu = DiscreteMeasure(np.array([[W, Z, 1.0]]))
        assert commutation_residual(nu, PowerEntropyPair(B1), PowerEntropyPair(B2)) == 0.0


class TestDichotomy:
    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_degenerate_alphas_give_zero(self, alpha):
        nu = DiscreteMeasure.dirac_plus_vacuum(alpha, (0.2, 0.05))
        residual, _ = dichotomy_check(nu, 2.0, 3.0)
        assert residual == 0.0

    def test_matches_closed_form(self):
        nu = DiscreteMeasure.dirac_plus_vacuum(0.3, (0.2, 0.05))
        residual, predicted = dichotomy_check(nu, 2.0, 3.0)
        assert predicted != 0.0
        assert residual == pytest.approx(predicted, rel=1e-12)

    def test_grid_of_parameters(self):
        for alpha in (0.25, 0.5, 0.75):
            for B1 in (1.5, 2.0, 4.0):
                for B2 in (1.7, 3.0, 5.0):
                    if B1 == B2:
                        continue
                    nu = DiscreteMeasure.dirac_plus_vacuum(alpha, (0.15, 0.08))
                    residual, predicted = dichotomy_check(nu, B1, B2)
                    assert residual == pytest.approx(predicted, rel=1e-12)
                    assert residual != 0.0

    def test_invalid_exponent_rejected(self):
        nu = DiscreteMeasure.dirac_plus_vacuum(0.3, (0.2, 0.05))
        with pytest.raises(DomainError):
            dichotomy_check(nu, 0.9, 3.0)

    def test_flux_compatibility_residual_is_reported_not_asserted(self):
        # the verbatim flux of the dichotomy algebra is not pair-compatible;
        # the report shows an O(1) residual (documented behavior)
        res = PowerEntropyPair(2.0).compatibility_residual(0.3, 0.2)
        assert np.isfinite(res)


class TestMollifiers:
    def test_mass_and_support_validation(self):
        with pytest.raises(DomainError):
            Mollifier.from_callable(lambda y: np.full_like(np.asarray(y), 0.5))
        with pytest.raises(DomainError):
            Mollifier.from_callable(lambda y: -polynomial_bump()(y))

    def test_coefficient_complement_identities(self):
        for pair in (MollifierPair(PHI2, PHI3), MollifierPair(PHI3, PHI2)):
            right_mass = 1.0 - pair.outer.cdf(0.0)
            left_mass = pair.outer.cdf(0.0)
            assert pair.B_minus + pair.B_plus == pytest.approx(right_mass, abs=1e-10)
            assert pair.C_minus + pair.C_plus == pytest.approx(left_mass, abs=1e-10)
            assert pair.A_minus == pair.B_minus + pair.C_minus

    def test_Y_antisymmetry(self):
        y = compute_Y(PHI2, PHI3)
        assert y != 0.0
        assert compute_Y(PHI3, PHI2) == pytest.approx(-y, abs=1e-12)
        assert compute_Y(PHI2, PHI2) == pytest.approx(0.0, abs=1e-12)

    def test_Y_sign_tracks_which_mass_sits_left(self):
        # phi2 to the left of phi3: A-_{2,3} < A-_{3,2}, so Y < 0
        assert compute_Y(PHI2, PHI3) < 0.0


SMOOTH_F = lambda s: 1.0 + 0.1 * np.sin(np.asarray(s))  # noqa: E731
SMOOTH_BIG_F = lambda s: 2.0 + 0.2 * np.cos(np.asarray(s))  # noqa: E731
PSI = lambda s: np.cos(0.3 * np.asarray(s))  # noqa: E731


class TestMollifierLimits:
    def test_I_outside_gives_zero(self):
        res = mollifier_limit_I(SMOOTH_F, SMOOTH_BIG_F, PSI, -2.0, 1.5, -1.0, 2.0,
                                PHI2, PHI3, eps_seq=(2**-4, 2**-8))
        assert res.limit == 0.0
        assert abs(res.values[-1]) < 1e-10

    def test_I_interior_constant_case(self):
        one = lambda s: np.ones_like(np.asarray(s, dtype=float))
        res = mollifier_limit_I(one, one, PSI, 0.1, 1.5, -1.0, 2.0, PHI2, PHI3,
                                eps_seq=(2**-6, 2**-8, 2**-10))
        pair = MollifierPair(PHI2, PHI3)
        assert res.limit == pytest.approx(float(PSI(0.1)) * pair.A_minus, rel=1e-10)
        errs = res.errors()
        assert errs[-1] <= 1e-3 * abs(res.limit)
        assert errs[0] >= errs[-1]

    def test_I_edge_selects_B_minus(self):
        res = mollifier_limit_I(SMOOTH_F, SMOOTH_BIG_F, PSI, -1.0, 1.5, -1.0, 2.0,
                                PHI2, PHI3, eps_seq=(2**-5, 2**-7, 2**-10))
        pair = MollifierPair(PHI2, PHI3)
        want = float(PSI(-1.0)) * float(SMOOTH_BIG_F(-1.0)) * pair.B_minus * float(SMOOTH_F(-1.0))
        assert res.limit == pytest.approx(want, rel=1e-6)
        assert res.errors()[-1] <= 1e-2 * abs(res.limit)

    def test_J_outside_gives_zero(self):
        res = mollifier_limit_J(SMOOTH_F, SMOOTH_BIG_F, PSI, -0.5, 2.5, -1.0, 2.0,
                                PHI2, PHI3, eps_seq=(2**-4, 2**-8))
        assert res.limit == 0.0
        assert abs(res.values[-1]) < 1e-10

    def test_J_interior_and_edge(self):
        pair = MollifierPair(PHI2, PHI3)
        res = mollifier_limit_J(SMOOTH_F, SMOOTH_BIG_F, PSI, -0.5, 0.9, -1.0, 2.0,
                                PHI2, PHI3, eps_seq=(2**-6, 2**-10))
        want = float(PSI(0.9) * SMOOTH_BIG_F(0.9)) * pair.A_plus * float(SMOOTH_F(0.9))
        assert res.limit == pytest.approx(want, rel=1e-9)
        assert res.errors()[-1] <= 2e-3 * abs(res.limit)
        res = mollifier_limit_J(SMOOTH_F, SMOOTH_BIG_F, PSI, -0.5, 2.0, -1.0, 2.0,
                                PHI2, PHI3, eps_seq=(2**-6, 2**-10))
        want = float(PSI(2.0) * SMOOTH_BIG_F(2.0)) * pair.C_plus * float(SMOOTH_F(2.0))
        assert res.limit == pytest.approx(want, rel=1e-6)

    def test_K_interior_continuity_case(self):
        res = mollifier_limit_K(SMOOTH_F, SMOOTH_BIG_F, PSI, 0.1, 1.5, 0.8,
                                PHI2, PHI3, eps_seq=(2**-6, 2**-10))
        want = float(PSI(0.8) * SMOOTH_BIG_F(0.8) * SMOOTH_F(0.8))
        assert res.limit == pytest.approx(want, rel=1e-12)  # mollifier-independent
        assert res.errors()[-1] <= 1e-3 * abs(res.limit)

    def test_K_jump_at_left_edge_selects_swapped_B_minus(self):
        # f jumping 0 -> 1 at a: the limit carries B-_{3,2} (outer is phi3)
        fj = lambda s: np.where(np.asarray(s) >= 0.1, 1.0, 0.0)
        res = mollifier_limit_K(fj, SMOOTH_BIG_F, PSI, 0.1, 1.5, 0.1,
                                PHI2, PHI3, eps_seq=(2**-6, 2**-8, 2**-10))
        pair32 = MollifierPair(PHI3, PHI2)
        want = float(PSI(0.1) * SMOOTH_BIG_F(0.1)) * pair32.B_minus
        assert res.limit == pytest.approx(want, rel=1e-10)
        assert res.errors()[-1] <= 1e-2 * abs(res.limit)
        errs = res.errors()
        assert errs[0] > errs[-1]

    def test_K_outside_gives_zero(self):
        res = mollifier_limit_K(SMOOTH_F, SMOOTH_BIG_F, PSI, 0.1, 1.5, -0.7,
                                PHI2, PHI3, eps_seq=(2**-4, 2**-8))
        assert res.limit == 0.0
        assert abs(res.values[-1]) < 1e-10


class TestDFunction:
    def test_value_at_zero(self):
        assert D_of_R(0.0) == -0.5

    def test_threshold_equality(self):
        for R in (8.0 / 15.0, -8.0 / 15.0):
            assert D_of_R(R) == pytest.approx(0.5 * math.exp(R / 2.0), rel=4e-16)

    def test_lower_bound_past_threshold(self):
        for R in np.linspace(-30.0, -8.0 / 15.0, 500):
            assert D_of_R(R) >= 0.5 * math.exp(R / 2.0) * (1 - 1e-15)

    def test_cross_form_agreement(self):
        # section-3 closed form vs the boundary-density combination with
        # f(0) = 1, f'(0) = -1/16
        for R in (-1.0, -2.0, -5.0):
            other = math.exp(R / 2.0) * (-0.5 + 2.0 * abs(R) + 2.0 * abs(R) * (-1.0 / 16.0))
            assert D_of_R(R) == pytest.approx(other, rel=1e-15)


class TestSupportReduction:
    def test_single_dirac(self):
        nu = DiscreteMeasure(np.array([[0.2, 0.1, 1.0]]))
        v = support_reduction_classify(nu)
        assert v.kind == "dirac_plus_vacuum"
        assert v.alpha == 1.0 and v.point == (0.2, 0.1)

    def test_dirac_plus_vacuum_atoms(self):
        nu = DiscreteMeasure.dirac_plus_vacuum(0.4, (0.2, 0.1))
        v = support_reduction_classify(nu)
        assert v.kind == "dirac_plus_vacuum"
        assert v.alpha == pytest.approx(0.4)

    def test_pure_vacuum(self):
        nu = DiscreteMeasure(np.array([[0.3, 0.0, 0.5], [0.0, 0.7, 0.5]]))
        v = support_reduction_classify(nu)
        assert v.kind == "dirac_plus_vacuum" and v.alpha == 0.0

    def test_nested_pair_violates(self):
        nu = DiscreteMeasure(np.array([[0.2, 0.1, 0.5], [0.05, 0.02, 0.5]]))
        v = support_reduction_classify(nu)
        assert v.kind == "violates_reduction"
        assert v.violating_pair == (0, 1)
        assert v.mstar_mass > 0.0

    def test_boundary_atom_counts_as_outside(self):
        # second atom sits exactly on both region boundaries of the first
        # (W equal; Z exactly 1/W*): strict inequalities leave it outside
        nu = DiscreteMeasure(np.array([[0.9, 0.1, 0.5], [0.9, 1.0 / 0.9, 0.5]]))
        v = support_reduction_classify(nu)
        # no M*-mass, but two off-vacuum atoms still violate the dichotomy
        assert v.kind == "violates_reduction"
        assert v.mstar_mass == 0.0
        assert "more than one" in v.reason

    def test_randomized_dirac_plus_vacuum_battery(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            alpha = rng.uniform(0.05, 0.95)
            W = rng.uniform(0.02, 0.9)
            Z = rng.uniform(0.02, min(0.9, 0.9 / W))
            nu = DiscreteMeasure.dirac_plus_vacuum(alpha, (W, Z), n_vacuum=3)
            assert support_reduction_classify(nu).kind == "dirac_plus_vacuum"

    def test_randomized_nested_battery(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            W1 = rng.uniform(0.1, 0.9)
            Z1 = rng.uniform(0.05, 0.9 / W1 * 0.9)
            W2 = W1 * rng.uniform(0.1, 0.9)
            Z2 = min(1.0 / W1, Z1) * rng.uniform(0.1, 0.9)
            nu = DiscreteMeasure(np.array([[W1, Z1, 0.6], [W2, Z2, 0.4]]))
            v = support_reduction_classify(nu)
            assert v.kind == "violates_reduction"
            assert v.mstar_mass > 0.0
