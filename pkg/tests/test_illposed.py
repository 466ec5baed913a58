"""High-frequency ill-posedness pipeline: data profiles, phase, kernel,
convolution geometry, the quadrature, its torus oracle, and the growth fit."""

import numpy as np
import pytest

from gbolab.experiments.illposed import (
    FrequencyProfile,
    IllposedParams,
    QuadratureError,
    _time_kernel,
    convolution_power,
    convolution_power_oracle,
    hN_sobolev_norm,
    illposed_build_hN,
    illposed_compute_v,
    illposed_growth_fit,
    illposed_phase_P,
    illposed_v_details,
    oracle_agreement,
    phase_from_dispersion,
    support_audit,
    torus_duhamel_oracle,
)

CHEAP = dict(s=0.2, theta=0.2, T=1.0, freq_resolution=16)


class TestParams:
    def test_derived_quantities(self):
        p = IllposedParams(N=256.0, s=0.2, theta=0.5, T=1.0)
        assert p.alpha == pytest.approx(256.0 ** -0.5)
        assert p.amplitude == pytest.approx(256.0 ** 0.25 * 256.0 ** -0.2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(N=0.0, s=0.2, theta=0.2, T=1.0),
            dict(N=16.0, s=0.2, theta=-0.1, T=1.0),
            dict(N=16.0, s=0.2, theta=0.2, T=0.0),
            dict(N=16.0, s=0.2, theta=0.2, T=1.0, freq_resolution=8),
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            IllposedParams(**kwargs)


class TestDataProfile:
    def test_even_symmetry(self):
        p = IllposedParams(N=64.0, **CHEAP)
        pos, neg = illposed_build_hN(p)
        np.testing.assert_allclose(neg.xi, -pos.xi[::-1])
        np.testing.assert_allclose(neg.values, pos.values[::-1])

    def test_profile_covers_band_at_constant_height(self):
        p = IllposedParams(N=64.0, **CHEAP)
        pos, _ = illposed_build_hN(p)
        assert pos.xi[0] > p.N and pos.xi[-1] < p.N + p.alpha
        np.testing.assert_allclose(pos.values, p.amplitude)

    def test_norm_in_unit_window(self):
        p = IllposedParams(N=256.0, s=0.2, theta=0.2, T=1.0)
        assert 0.3 <= hN_sobolev_norm(p) <= 3.0

    def test_norm_stable_under_resolution_doubling(self):
        base = IllposedParams(N=256.0, s=0.2, theta=0.2, T=1.0,
                              freq_resolution=16)
        fine = IllposedParams(N=256.0, s=0.2, theta=0.2, T=1.0,
                              freq_resolution=32)
        a, b = hN_sobolev_norm(base), hN_sobolev_norm(fine)
        assert abs(a - b) / b < 0.05

    def test_norm_independent_of_N(self):
        norms = [
            hN_sobolev_norm(IllposedParams(N=N, s=0.2, theta=0.2, T=1.0))
            for N in (64.0, 256.0, 1024.0)
        ]
        assert max(norms) / min(norms) < 1.05


class TestPhasePolynomial:
    def test_direct_arithmetic(self):
        assert illposed_phase_P(4.0, 3.0, 2.0, 1.0) == pytest.approx(-12.0)

    def test_coincident_frequencies_vanish(self):
        assert illposed_phase_P(7.0, 7.0, 7.0, 7.0) == 0.0

    def test_matches_dispersion_form_on_positive_region(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x0 = rng.uniform(3.0, 9.0)
            x3 = rng.uniform(0.1, 1.0)
            x2 = x3 + rng.uniform(0.1, 1.0)
            x1 = x2 + rng.uniform(0.1, 1.0)
            # factor frequencies x0-x1, x1-x2, x2-x3, x3 all positive
            if x0 - x1 <= 0:
                continue
            poly = illposed_phase_P(x0, x1, x2, x3)
            disp = phase_from_dispersion(x0, x0 - x1, x1 - x2, x2 - x3, x3)
            assert poly == pytest.approx(disp, abs=1e-10 * max(1.0, abs(poly)))

    def test_band_magnitude_of_order_N_squared(self):
        rng = np.random.default_rng(1)
        N, alpha = 128.0, 128.0 ** -0.2
        vals = []
        for _ in range(200):
            f = N + alpha * rng.random(4)  # the four factor frequencies
            x3 = f[3]
            x2 = x3 + f[2]
            x1 = x2 + f[1]
            x0 = x1 + f[0]
            vals.append(abs(illposed_phase_P(x0, x1, x2, x3)) / N ** 2)
        assert 4.0 < min(vals) and max(vals) < 30.0


class TestTimeKernel:
    def test_zero_phase_gives_T(self):
        assert _time_kernel(np.array([0.0]), 2.5)[0] == pytest.approx(2.5)

    def test_series_matches_exact_at_crossover(self):
        T = 1.0
        for q in (0.9e-6, 1.1e-6):
            val = _time_kernel(np.array([q]), T)[0]
            exact = (np.exp(1j * T * q) - 1.0) / (1j * q)
            assert val == pytest.approx(exact, rel=1e-9)

    def test_exact_value_moderate_phase(self):
        q, T = 3.0, 0.7
        val = _time_kernel(np.array([q]), T)[0]
        # direct Riemann check of int_0^T e^{i s q} ds
        s = np.linspace(0.0, T, 20001)
        ref = np.trapezoid(np.exp(1j * s * q), s)
        assert val == pytest.approx(ref, rel=1e-8)

    def test_magnitude_bounded_by_two_over_q(self):
        q = np.array([50.0, 500.0, 5000.0])
        vals = np.abs(_time_kernel(q, 1.0))
        assert np.all(vals <= 2.0 / q + 1e-15)


class TestConvolutionPower:
    def test_support_and_positivity(self):
        alpha = 0.5
        prof = convolution_power(alpha, 64)
        inside = (prof.xi > 0) & (prof.xi < 4 * alpha)
        assert np.all(prof.values[inside] > 0)
        assert np.all(np.abs(prof.values[~inside]) <= 1e-12 * alpha ** 3)

    def test_center_value(self):
        alpha = 0.5
        prof = convolution_power(alpha, 128)
        center = prof.values[np.argmin(np.abs(prof.xi - 2 * alpha))]
        assert center == pytest.approx((2.0 / 3.0) * alpha ** 3, rel=0.02)

    def test_knot_values(self):
        alpha = 0.5
        prof = convolution_power(alpha, 128)
        for knot in (alpha, 3 * alpha):
            v = prof.values[np.argmin(np.abs(prof.xi - knot))]
            assert v == pytest.approx(alpha ** 3 / 6.0, rel=0.02)

    def test_total_mass_exact(self):
        alpha = 0.37
        prof = convolution_power(alpha, 64)
        mass = prof.values.sum() * (alpha / 64)
        assert mass == pytest.approx(alpha ** 4, rel=1e-10)

    def test_matches_quadrature_oracle(self):
        alpha = 0.5
        prof = convolution_power(alpha, 128)
        targets = np.array([0.7, 1.0, 1.3]) * alpha
        oracle = convolution_power_oracle(alpha, targets)
        for t, ref in zip(targets, oracle):
            v = prof.values[np.argmin(np.abs(prof.xi - t))]
            assert v == pytest.approx(ref, rel=0.02)


@pytest.fixture(scope="module")
def cheap_params():
    return IllposedParams(N=16.0, **CHEAP)


class TestComputeV:

    def test_profile_on_top_band(self, cheap_params):
        profile, band_norm = illposed_compute_v(cheap_params)
        p = cheap_params
        assert np.all(profile.xi >= 4 * p.N)
        assert np.all(profile.xi <= 4 * (p.N + p.alpha))
        assert band_norm > 0

    def test_midband_nonvanishing(self, cheap_params):
        profile, _ = illposed_compute_v(cheap_params)
        p = cheap_params
        mid = (profile.xi >= 4 * p.N + p.alpha) & (
            profile.xi <= 4 * p.N + 3 * p.alpha
        )
        assert np.all(np.abs(profile.values[mid]) > 0)

    def test_support_audit_mass_in_bands(self, cheap_params):
        assert support_audit(cheap_params) >= 0.999

    def test_refinement_check_passes_default_tol(self, cheap_params):
        details = illposed_v_details(cheap_params, check=True)
        assert details["refinement_disagreement"] <= 0.05

    def test_refinement_check_can_fail(self, cheap_params):
        with pytest.raises(QuadratureError):
            illposed_v_details(cheap_params, check=True, tol=1e-9)


class TestTorusOracle:
    def test_agreement_small_instance(self):
        p = IllposedParams(N=16.0, s=0.2, theta=0.2, T=1.0,
                           freq_resolution=32)
        assert oracle_agreement(p) <= 0.05

    def test_requires_enough_modes(self):
        p = IllposedParams(N=16.0, **CHEAP)
        with pytest.raises(ValueError):
            torus_duhamel_oracle(p, modes_per_alpha=4)

    def test_oracle_window_covers_top_band(self):
        p = IllposedParams(N=16.0, **CHEAP)
        prof = torus_duhamel_oracle(p, modes_per_alpha=8)
        assert prof.xi[0] <= 4 * p.N + prof.spacing
        assert prof.xi[-1] >= 4 * (p.N + p.alpha) - prof.spacing


class TestGrowthFit:
    LADDER = [8.0, 16.0, 32.0, 64.0, 128.0]

    def test_requires_geometric_ladder(self):
        with pytest.raises(ValueError, match="geometric"):
            illposed_growth_fit(0.2, 0.2, 1.0, [8.0, 16.0, 32.0, 64.0, 100.0],
                                freq_resolution=16)

    def test_requires_five_points(self):
        with pytest.raises(ValueError, match="5"):
            illposed_growth_fit(0.2, 0.2, 1.0, [8.0, 16.0, 32.0],
                                freq_resolution=16)

    def test_report_fields_and_determinism(self):
        rep = illposed_growth_fit(0.2, 0.2, 1.0, self.LADDER,
                                  freq_resolution=16)
        again = illposed_growth_fit(0.2, 0.2, 1.0, self.LADDER,
                                    freq_resolution=16)
        assert rep.slope == again.slope
        assert rep.ci > 0
        assert len(rep.points) == 5
        for pt in rep.points:
            assert pt["band_norm"] > 0
            assert pt["refinement_disagreement"] <= 0.05
        assert rep.inputs["predicted_exponent"] == pytest.approx(0.1)

    def test_theta_sensitivity_of_slope(self):
        lo = illposed_growth_fit(0.2, 0.1, 1.0, self.LADDER,
                                 freq_resolution=16)
        hi = illposed_growth_fit(0.2, 0.3, 1.0, self.LADDER,
                                 freq_resolution=16)
        # the -3 theta / 2 term in the exponent: slopes differ by 3 dtheta/2
        assert lo.slope - hi.slope == pytest.approx(0.3, abs=0.1)

    def test_slope_is_clean_power_law(self):
        rep = illposed_growth_fit(0.2, 0.2, 1.0, self.LADDER,
                                  freq_resolution=16)
        assert rep.ci < 0.05
