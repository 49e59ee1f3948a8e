"""Kernel family: chi, H, h, sigma, the boundary densities, and the pairings."""

import math

import numpy as np
import pytest

from isogas.errors import DomainError
from isogas.kernels import (
    DEFAULT_CONFIG,
    EntropyGenerator,
    KernelPoint,
    SmoothBump1D,
    SmoothBump2D,
    chi_values,
    entropy_eta,
    entropy_flux_q,
    eta_values,
    eval_G_chi,
    eval_G_h,
    eval_H,
    eval_chi,
    eval_h,
    eval_sigma,
    fundamental_solution_pairing,
    h_values,
    pairing_chi_s_direct,
    pairing_h_s_direct,
    q_values,
    singular_pairing_chi_s,
    singular_pairing_h_s,
)

# frozen extended-precision oracle values (40-digit mpmath, scratch-derived)
CHI_AT_M1_00 = 0.645035270449150068108  # e^{-1/2} f(-1)
H_AT_SU_M1 = 0.8014560736340217652506  # int_{-1}^0 e^{r/2} f(-r^2) dr
H_VAL_M1_05 = -0.1994505788065055413  # h at R=-1, u-s=1/2
SIGMA_M1_03 = 0.072435383701787195507  # u*chi + h at (R,u,s)=(-1,0.3,0)
G_CHI_M1_05 = -0.0388036072483316967602  # e^{-1/2} f'(-3/4)
G_H_M1_025 = -0.06947038962134575648704  # stated interior form at R=-1, v=1/4


class TestChi:
    def test_outside_support_zero(self):
        assert eval_chi(KernelPoint(R=-1.0, u=2.0, s=0.0)) == 0.0

    def test_center_value(self):
        assert eval_chi(KernelPoint(R=-1.0, u=0.0, s=0.0)) == pytest.approx(
            CHI_AT_M1_00, abs=1e-15
        )

    def test_boundary_is_open(self):
        assert eval_chi(KernelPoint(R=-1.0, u=1.0, s=0.0)) == 0.0
        assert eval_chi(KernelPoint(R=-1.0, u=-1.0, s=0.0)) == 0.0

    def test_one_sided_boundary_limit_is_jump_strength(self):
        # interior limit at |u-s| -> |R|^- equals e^{R/2} f(0) = e^{R/2}
        R = -1.3
        vals = [eval_chi(KernelPoint(R, abs(R) - d, 0.0)) for d in (1e-3, 1e-5, 1e-7)]
        errs = [abs(v - math.exp(R / 2.0)) for v in vals]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-6

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(7)
        R = -3.0 * rng.random(200) - 1e-3
        u = 4.0 * rng.random(200) - 2.0
        assert np.all(chi_values(R, u) >= 0.0)

    def test_vacuum_decay_against_asymptotic(self):
        # chi(R, 0) ~ 1/sqrt(pi |R|) for R -> -infty; factor-2 agreement
        for R in (-25.0, -100.0):
            val = eval_chi(KernelPoint(R, 0.0, 0.0))
            bound = 1.0 / math.sqrt(math.pi * abs(R))
            assert 0.5 * bound <= val <= 2.0 * bound

    def test_shift_parameter(self):
        assert eval_chi(KernelPoint(-1.0, 0.7, 0.7)) == pytest.approx(CHI_AT_M1_00, abs=1e-15)


class TestFluxKernels:
    def test_H_outside_support_is_abs_v(self):
        assert eval_H(KernelPoint(-1.0, 3.0, 0.5)) == 2.5

    def test_H_at_center_frozen(self):
        assert eval_H(KernelPoint(-1.0, 0.4, 0.4)) == pytest.approx(H_AT_SU_M1, abs=1e-12)

    def test_h_equals_dH_ds_by_centered_differences(self):
        R, u = -1.0, 0.0
        for s, step in ((0.3, 1e-4), (-0.6, 1e-4), (1.4, 1e-4)):
            dH = (
                float(eval_H(KernelPoint(R, u, s + step)))
                - float(eval_H(KernelPoint(R, u, s - step)))
            ) / (2 * step)
            assert dH == pytest.approx(eval_h(KernelPoint(R, u, s)), abs=5e-7)

    def test_h_outside_support_is_minus_sign(self):
        assert eval_h(KernelPoint(-1.0, 3.0, 0.5)) == -1.0
        assert eval_h(KernelPoint(-1.0, -3.0, 0.5)) == 1.0

    def test_h_frozen_value(self):
        assert eval_h(KernelPoint(-1.0, 0.5, 0.0)) == pytest.approx(H_VAL_M1_05, abs=1e-12)

    def test_h_is_odd(self):
        for v in (0.2, 0.8, 1.7):
            plus = eval_h(KernelPoint(-1.0, v, 0.0))
            minus = eval_h(KernelPoint(-1.0, -v, 0.0))
            assert plus == pytest.approx(-minus, abs=1e-13)

    def test_h_rejects_sign_line(self):
        with pytest.raises(DomainError):
            eval_h(KernelPoint(-1.0, 0.5, 0.5))

    def test_sigma_is_u_chi_plus_h(self):
        assert eval_sigma(KernelPoint(-1.0, 0.3, 0.0)) == pytest.approx(SIGMA_M1_03, abs=1e-12)

    def test_sigma_reduces_to_h_at_zero_velocity(self):
        p = KernelPoint(-1.0, 0.0, 0.4)
        assert eval_sigma(p) == pytest.approx(eval_h(p), abs=1e-14)

    def test_sigma_outside_support(self):
        # u - s > |R|: chi = 0 and h = -1
        assert eval_sigma(KernelPoint(-1.0, 2.0, 0.5)) == pytest.approx(-1.0, abs=1e-14)


class TestBoundaryDensities:
    def test_g_chi_odd_in_v(self):
        assert eval_G_chi(-1.0, 0.0) == 0.0
        assert eval_G_chi(-1.0, 0.3) == pytest.approx(-eval_G_chi(-1.0, -0.3), abs=1e-16)

    def test_g_chi_continuous_at_support_edge(self):
        R = -1.0
        inner = eval_G_chi(R, abs(R) - 1e-9)
        outer = eval_G_chi(R, abs(R))
        assert outer == pytest.approx(2.0 * abs(R) * (-1.0 / 16.0) * math.exp(R / 2.0), rel=1e-15)
        assert inner == pytest.approx(outer, abs=1e-9)

    def test_g_chi_frozen_interior_value(self):
        assert eval_G_chi(-1.0, 0.5) == pytest.approx(G_CHI_M1_05, abs=1e-15)

    def test_g_h_exterior_constant(self):
        for R in (-0.5, -1.0, -2.0):
            want = math.exp(R / 2.0) * (2.0 * R + 0.5)
            assert eval_G_h(R, abs(R)) == pytest.approx(want, rel=1e-15)
            assert eval_G_h(R, 2.0 * abs(R)) == pytest.approx(want, rel=1e-15)

    def test_g_h_small_R_limit_at_origin(self):
        # v = 0, R -> 0: empty integral leaves e^0 * (1/2 - 0)
        assert eval_G_h(-1e-8, 0.0) == pytest.approx(0.5, abs=1e-7)

    def test_g_h_frozen_interior_value(self):
        assert eval_G_h(-1.0, 0.25) == pytest.approx(G_H_M1_025, abs=1e-12)


class TestSingularPairings:
    BUMPS = [
        SmoothBump1D(center=0.1, width=0.7, amplitude=1.3),
        SmoothBump1D(center=-0.4, width=1.1, amplitude=0.8),
        SmoothBump1D(center=0.0, width=0.5, amplitude=2.0),
        SmoothBump1D(center=0.55, width=0.9, amplitude=-1.1),
        SmoothBump1D(center=-0.15, width=1.4, amplitude=0.6),
    ]

    def test_zero_when_supported_away(self):
        far = SmoothBump1D(center=10.0, width=0.5)
        assert singular_pairing_chi_s(-1.0, 0.0, far) == 0.0
        assert pairing_chi_s_direct(-1.0, 0.0, far) == pytest.approx(0.0, abs=1e-15)

    def test_constant_testfn_gives_zero(self):
        # wide bump that is flat (= amplitude) across the kernel support
        flat = SmoothBump1D(center=0.0, width=60.0, amplitude=1.0)
        val = singular_pairing_chi_s(-1.0, 0.0, flat)
        direct = pairing_chi_s_direct(-1.0, 0.0, flat)
        assert abs(val) < 1e-10 and abs(direct) < 1e-10

    @pytest.mark.parametrize("R", [-0.5, -1.0, -2.0])
    def test_chi_pairing_matches_direct(self, R):
        for bump in self.BUMPS:
            closed = singular_pairing_chi_s(R, 0.0, bump)
            direct = pairing_chi_s_direct(R, 0.0, bump)
            assert closed == pytest.approx(direct, abs=1e-6)

    @pytest.mark.parametrize("R", [-0.5, -1.0, -2.0])
    def test_h_pairing_matches_direct(self, R):
        for bump in self.BUMPS:
            closed = singular_pairing_h_s(R, 0.0, bump)
            direct = pairing_h_s_direct(R, 0.0, bump)
            assert closed == pytest.approx(direct, abs=1e-6)

    def test_rejects_zero_R(self):
        with pytest.raises(DomainError):
            singular_pairing_chi_s(0.0, 0.0, self.BUMPS[0])


class TestFundamentalSolution:
    def test_vanishing_near_origin_pairs_to_zero(self):
        # support outside the kernel cone |u| <= |R|: integrand identically 0
        phi = SmoothBump2D(center=(0.2, 1.5), width=(0.4, 0.4))
        assert phi.value(0.0, 0.0) == 0.0
        assert fundamental_solution_pairing(phi, 2**-6) == 0.0
        # support crossing the cone but avoiding the origin: quadrature -> 0
        phi2 = SmoothBump2D(center=(1.5, 1.5), width=(0.4, 0.4))
        assert phi2.value(0.0, 0.0) == 0.0
        vals = [abs(fundamental_solution_pairing(phi2, s)) for s in (2**-7, 2**-9)]
        assert vals[1] < 0.4 * vals[0] and vals[1] < 6e-5

    def test_pairing_converges_to_four_phi0(self):
        phi = SmoothBump2D(center=(0.0, 0.0), width=(1.2, 1.0), amplitude=2.0)
        target = 4.0 * phi.value(0.0, 0.0)
        errs = [
            abs(fundamental_solution_pairing(phi, step) - target)
            for step in (2**-8, 2**-9, 2**-10)
        ]
        assert errs[-1] <= 0.02 * abs(target)
        order = math.log2(errs[0] / errs[-1]) / 2.0
        assert order >= 1.0

    def test_translated_kernel_picks_up_shift(self):
        phi = SmoothBump2D(center=(0.0, 0.3), width=(1.0, 1.0), amplitude=1.0)
        s0 = 0.3
        val = fundamental_solution_pairing(phi, 2**-9, shift=s0)
        assert val == pytest.approx(4.0 * phi.value(0.0, s0), rel=2e-3)

    def test_unbounded_support_rejected(self):
        class Unbounded(SmoothBump2D):
            @property
            def support_box(self):
                return (-math.inf, math.inf, -1.0, 1.0)

        with pytest.raises(DomainError):
            fundamental_solution_pairing(Unbounded(), 2**-4)


class TestEntropyGeneration:
    GEN = EntropyGenerator.from_callable(lambda s: np.exp(-4.0 * s * s), -4.0, 4.0, 801)

    def test_zero_generator_gives_zero_pair(self):
        zero = EntropyGenerator(s0=-1.0, s_grid_step=0.01, values=np.zeros(201))
        assert entropy_eta(zero, -1.0, 0.3) == 0.0
        assert entropy_flux_q(zero, -1.0, 0.3) == 0.0

    def test_eta_vanishes_as_R_to_zero(self):
        vals = [abs(entropy_eta(self.GEN, R, 0.3)) for R in (-0.1, -0.01, -0.001)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 2e-3

    def test_eta_R_one_sided_limit_is_minus_two_psi(self):
        # (eta(-d, u) - eta(0, u)) / (-d) -> -2 psi(u) as d -> 0+
        u = 0.3
        target = -2.0 * float(self.GEN.psi(u))
        errs = []
        for d in (1e-2, 1e-3, 1e-4):
            slope = entropy_eta(self.GEN, -d, u) / (-d)
            errs.append(abs(slope - target))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-4 * abs(target)

    def test_region_restriction(self):
        with pytest.raises(DomainError):
            entropy_eta(self.GEN, 0.5, 0.0)

    @pytest.mark.parametrize("generator_psi", [
        lambda s: np.exp(-4.0 * s * s),
        lambda s: np.exp(-2.0 * (s - 0.3) ** 2),
        lambda s: 1.0 / (1.0 + 4.0 * s * s) * np.exp(-0.5 * s * s),
    ])
    def test_flux_compatibility_system(self, generator_psi):
        # Q = q - u*eta satisfies Q_R = eta_u and Q_u = eta_R - eta
        gen = EntropyGenerator.from_callable(generator_psi, -5.0, 5.0, 1001)
        R0, u0, d = -1.0, 0.2, 1e-3

        def eta(R, u):
            return entropy_eta(gen, R, u, panels=64)

        def Q(R, u):
            return entropy_flux_q(gen, R, u, panels=64) - u * eta(R, u)

        res1 = (Q(R0 + d, u0) - Q(R0 - d, u0)) / (2 * d) - (
            eta(R0, u0 + d) - eta(R0, u0 - d)
        ) / (2 * d)
        res2 = (Q(R0, u0 + d) - Q(R0, u0 - d)) / (2 * d) - (
            (eta(R0 + d, u0) - eta(R0 - d, u0)) / (2 * d) - eta(R0, u0)
        )
        assert abs(res1) <= 1e-4 and abs(res2) <= 1e-4

    def test_q_against_brute_force_quadrature(self):
        # independent oracle: direct fine trapezoid of u*chi*psi + h*psi
        import scipy.integrate

        gen = self.GEN
        R, u = -1.0, 0.0
        s = np.linspace(-4.0, 4.0, 1_000_001)
        psi = gen.psi(s)
        chi = chi_values(R, u, s)
        with np.errstate(all="ignore"):
            hh = h_values(R, u, np.where(s == u, u + 1e-13, s), panels=24)
        brute = scipy.integrate.trapezoid((u * chi + hh) * psi, s)
        assert entropy_flux_q(gen, R, u) == pytest.approx(float(brute), abs=5e-9)

    def test_vectorized_pair_matches_scalar(self):
        R = np.array([-0.8, -1.2, -0.3])
        u = np.array([0.1, -0.3, 0.45])
        ev = eta_values(self.GEN, R, u, nodes=257)
        qv = q_values(self.GEN, R, u, nodes=257, inner_panels=24)
        for i in range(R.size):
            assert ev[i] == pytest.approx(entropy_eta(self.GEN, R[i], u[i]), abs=1e-9)
            assert qv[i] == pytest.approx(entropy_flux_q(self.GEN, R[i], u[i]), abs=1e-9)


def test_d_function_consistency_identity():
    # (-1/2 + 15|R|/8) e^{R/2} == e^{R/2}(-f(0)/2 + 2|R| + 2|R| f'(0)) with
    # f(0) = 1, f'(0) = -1/16
    for R in (-1.0, -2.0, -5.0):
        lhs = (-0.5 + 15.0 * abs(R) / 8.0) * math.exp(R / 2.0)
        rhs = math.exp(R / 2.0) * (-0.5 + 2.0 * abs(R) + 2.0 * abs(R) * (-1.0 / 16.0))
        assert lhs == pytest.approx(rhs, rel=1e-15)
