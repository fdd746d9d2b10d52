"""Scalar special functions against independent high-precision oracles."""

import math

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import lpmv

from ado3d import (
    PhaseFunction,
    bessel_j0,
    bessel_remainder_d,
    chandrasekhar_g,
    normalized_plm,
    normalized_plm_table,
    wigner_d_continued,
)


class TestPhaseFunction:
    def test_moments_truncate_at_degree(self):
        phase = PhaseFunction(anisotropy=0.9, degree=3, albedo=0.5)
        assert phase.moment(0) == 1.0
        assert phase.moment(2) == pytest.approx(0.81)
        assert phase.moment(4) == 0.0

    def test_recurrence_coefficients(self):
        phase = PhaseFunction(anisotropy=0.5, degree=2, albedo=0.8)
        assert phase.h(0) == pytest.approx(1.0 * (1.0 - 0.8))
        assert phase.h(1) == pytest.approx(3.0 * (1.0 - 0.8 * 0.5))
        assert phase.h(2) == pytest.approx(5.0 * (1.0 - 0.8 * 0.25))
        assert phase.h(3) == 7.0  # beyond the truncation degree

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(anisotropy=-0.1, degree=1, albedo=0.5),
            dict(anisotropy=1.1, degree=1, albedo=0.5),
            dict(anisotropy=0.5, degree=-1, albedo=0.5),
            dict(anisotropy=0.5, degree=1, albedo=0.0),
            dict(anisotropy=0.5, degree=1, albedo=1.0),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PhaseFunction(**kwargs)


class TestNormalizedPlm:
    @pytest.mark.parametrize("m", [0, 1, 2, 5])
    def test_against_scipy(self, m):
        """p_l^m carries the unit normalization and no half-integer power."""
        rng = np.random.default_rng(7)
        for mu in rng.uniform(-0.99, 0.99, size=5):
            for l in range(m, 11):
                scale = math.sqrt(
                    math.factorial(l - m) / math.factorial(l + m)
                )
                expected = (
                    (-1) ** m
                    * scale
                    * lpmv(m, l, mu)
                    / (1.0 - mu * mu) ** (m / 2.0)
                )
                assert normalized_plm(l, m, mu) == pytest.approx(
                    expected, rel=1e-11, abs=1e-12
                )

    def test_negative_order_sign(self):
        for l, m, mu in [(3, 1, 0.4), (5, 3, -0.2), (7, 7, 0.9)]:
            assert normalized_plm(l, -m, mu) == pytest.approx(
                (-1) ** m * normalized_plm(l, m, mu), rel=1e-13
            )

    def test_safe_at_unit_argument(self):
        table = normalized_plm_table(6, 2, np.array([1.0, -1.0]))
        assert np.all(np.isfinite(table))

    def test_rejects_bad_orders(self):
        with pytest.raises(ValueError):
            normalized_plm(2, 3, 0.5)
        with pytest.raises(ValueError):
            normalized_plm_table(1, 2, 0.5)


def _mpmath_forward_g(nu, phase, l_cut, dps=50):
    """Forward three-term recurrence in arbitrary precision (m = 0)."""
    with mpmath.workdps(dps):
        nu = mpmath.mpf(nu)
        values = [mpmath.mpf(1)]
        g_prev, g_curr = mpmath.mpf(0), mpmath.mpf(1)
        for l in range(0, l_cut):
            h = mpmath.mpf(phase.h(l))
            g_next = (nu * h * g_curr - l * g_prev) / (l + 1)
            g_prev, g_curr = g_curr, g_next
            values.append(g_curr)
        return [float(v) for v in values]


class TestChandrasekhar:
    def test_forward_against_mpmath(self):
        phase = PhaseFunction(anisotropy=0.9, degree=9, albedo=10.0 / 10.01)
        for nu in (0.3, 0.5, 0.95, -0.7):
            table = chandrasekhar_g(0, nu, phase, 9)
            ref = _mpmath_forward_g(nu, phase, 9)
            np.testing.assert_allclose(table.values, ref, rtol=1e-12,
                                       atol=1e-13)

    def test_dual_path_agreement_at_dispersion_root(self):
        """Backward ratios match the exact forward solution at the root of
        1 = (albedo*nu/2) ln((nu+1)/(nu-1)), where the forward solution is
        the minimal one."""
        albedo = 0.9
        phase = PhaseFunction(anisotropy=0.0, degree=0, albedo=albedo)
        seed = brentq(
            lambda nu: 1.0 - 0.5 * albedo * nu * math.log((nu + 1) / (nu - 1)),
            1.0 + 1e-9,
            5.0,
            xtol=1e-15,
        )
        # The forward solution only stays minimal exactly at the root, so
        # the oracle refines it beyond double precision; any residual seeds
        # the growing contaminant and is amplified along the recurrence.
        with mpmath.workdps(50):
            root_mp = mpmath.findroot(
                lambda nu: 1
                - albedo * nu / 2 * mpmath.log((nu + 1) / (nu - 1)),
                mpmath.mpf(seed),
            )
            forward = _mpmath_forward_g(root_mp, phase, 12)
        backward = chandrasekhar_g(0, float(root_mp), phase, 12)
        for l in range(13):
            denom = max(abs(forward[l]), 1e-30)
            assert abs(backward.value(l) - forward[l]) / denom < 1e-8

    def test_off_root_forward_is_not_minimal(self):
        """Away from a dispersion root the exact forward recurrence grows
        while the backward ratios pick the decaying solution, so the two
        paths must diverge; agreement there would signal a bug."""
        phase = PhaseFunction(anisotropy=0.0, degree=0, albedo=0.9)
        backward = chandrasekhar_g(0, 1.5, phase, 12)
        forward = _mpmath_forward_g(1.5, phase, 12)
        rel = abs(backward.value(12) - forward[12]) / abs(forward[12])
        assert rel > 0.5

    def test_negative_order_and_table_accessors(self):
        phase = PhaseFunction(anisotropy=0.9, degree=3, albedo=0.5)
        pos = chandrasekhar_g(2, 0.4, phase, 6)
        neg = chandrasekhar_g(-2, 0.4, phase, 6)
        np.testing.assert_allclose(neg.values, pos.values, rtol=1e-14)
        assert pos.l_cut == 6
        with pytest.raises(ValueError):
            pos.value(1)

    def test_rejects_zero_nu_and_short_tables(self):
        phase = PhaseFunction(anisotropy=0.9, degree=3, albedo=0.5)
        with pytest.raises(ValueError):
            chandrasekhar_g(0, 0.0, phase, 5)
        with pytest.raises(ValueError):
            chandrasekhar_g(0, 0.5, phase, 2)


def _mpmath_wigner_d(l, m1, m2, tau, dps=40):
    """Factorial-sum evaluation at the continued angle, cos(theta) >= 1."""
    with mpmath.workdps(dps):
        tau = mpmath.mpf(tau)
        cos_theta = mpmath.sqrt(1 + tau * tau)
        c = mpmath.sqrt((1 + cos_theta) / 2)
        s = mpmath.mpc(0, 1) * tau / (2 * c)
        pref = mpmath.sqrt(
            mpmath.factorial(l + m1)
            * mpmath.factorial(l - m1)
            * mpmath.factorial(l + m2)
            * mpmath.factorial(l - m2)
        )
        total = mpmath.mpc(0)
        for k in range(max(0, m2 - m1), min(l + m2, l - m1) + 1):
            denom = (
                mpmath.factorial(l + m2 - k)
                * mpmath.factorial(k)
                * mpmath.factorial(m1 - m2 + k)
                * mpmath.factorial(l - m1 - k)
            )
            total += (
                (-1) ** (m1 - m2 + k)
                / denom
                * c ** (2 * l + m2 - m1 - 2 * k)
                * s ** (m1 - m2 + 2 * k)
            )
        return complex(pref * total)


class TestWignerD:
    def test_identity_at_zero_angle(self):
        for l in range(5):
            for m1 in range(-l, l + 1):
                for m2 in range(-l, l + 1):
                    expected = 1.0 if m1 == m2 else 0.0
                    assert wigner_d_continued(l, m1, m2, 0.0) == pytest.approx(
                        expected, abs=1e-14
                    )

    @pytest.mark.parametrize("tau", [0.3, 2.0])
    def test_recurrence_against_factorial_sum(self, tau):
        rng = np.random.default_rng(11)
        for _ in range(40):
            l = int(rng.integers(0, 9))
            m1 = int(rng.integers(-l, l + 1))
            m2 = int(rng.integers(-l, l + 1))
            ref = _mpmath_wigner_d(l, m1, m2, tau)
            got = wigner_d_continued(l, m1, m2, tau)
            assert abs(got - ref) <= 1e-9 * max(abs(ref), 1.0)

    @pytest.mark.parametrize("tau", [0.2, 1.0, 3.0])
    def test_bilinear_sum_rule(self, tau):
        """Rows of the continued d-matrix stay orthonormal under the
        non-conjugated bilinear product (analytic continuation of the real
        orthogonality), measured relative to the coefficient magnitudes."""
        for l in range(9):
            for m1 in range(-l, l + 1):
                for m2 in range(m1, l + 1):
                    acc = 0.0 + 0.0j
                    mag = 0.0
                    for mp in range(-l, l + 1):
                        d1 = wigner_d_continued(l, mp, m1, tau)
                        d2 = wigner_d_continued(l, mp, m2, tau)
                        acc += d1 * d2
                        mag += abs(d1) * abs(d2)
                    expected = 1.0 if m1 == m2 else 0.0
                    assert abs(acc - expected) <= 1e-9 * max(mag, 1.0)

    def test_rejects_out_of_range_orders(self):
        with pytest.raises(ValueError):
            wigner_d_continued(1, 2, 0, 0.5)


class TestBessel:
    def test_j0_against_mpmath(self):
        for x in (0.0, 0.5, 3.7, 25.0, 120.0):
            assert bessel_j0(x) == pytest.approx(
                float(mpmath.besselj(0, x)), abs=2e-15
            )

    def test_remainder_matches_definition(self):
        rho_star = 50.0
        for q in (0.3, 1.0, 4.0):
            x = q * rho_star
            with mpmath.workdps(40):
                j0 = float(mpmath.besselj(0, x))
            amp = math.sqrt(2.0 * q / (math.pi * rho_star))
            asym = amp * (
                (1.0 - 9.0 / (128.0 * x * x)) * math.cos(x - math.pi / 4.0)
                + (1.0 / (8.0 * x) - 75.0 / (1024.0 * x**3))
                * math.sin(x - math.pi / 4.0)
            )
            assert bessel_remainder_d(q, rho_star) == pytest.approx(
                q * j0 - asym, abs=1e-13
            )

    def test_remainder_decays_fast(self):
        rho_star = 50.0
        q = np.array([0.5, 1.0, 2.0, 4.0])
        r = np.abs(bessel_remainder_d(q, rho_star))
        bound = np.sqrt(2.0 * q / (np.pi * rho_star)) * (
            q * rho_star
        ) ** (-2.5)
        assert np.all(r < bound)
