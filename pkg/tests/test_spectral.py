"""Chain-mapping tests.

Expected numbers here were frozen from independent oracles:

* closed forms for the exponential-cutoff power-law density (monic
  generalized-Laguerre recurrence),
* direct ``scipy.integrate.quad`` evaluations of the zeroth moment of the
  thermalized density (positive and negative half-lines integrated
  separately in Bose form, abs error < 3e-8).
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaintomo import (
    ChainCoefficients,
    ConfigError,
    ConvergenceError,
    QuadratureConfig,
    SpectralDensity,
    ThermalizedDensity,
    chain_coefficients,
)

OHMIC = SpectralDensity(alpha=0.2, s=1.0, omega_c=4.0)
SUBOHMIC = SpectralDensity(alpha=0.2, s=0.5, omega_c=4.0)


class TestSpectralDensity:
    def test_frozen_point_value(self):
        # 2 * 0.2 * 4 * exp(-1)
        assert OHMIC(4.0) == pytest.approx(0.5886071058743078, abs=1e-14)

    def test_total_weight_closed_form(self):
        # 2 alpha omega_c^2 Gamma(1+s)
        assert OHMIC.total_weight() == pytest.approx(6.4, rel=1e-14)
        assert SUBOHMIC.total_weight() == pytest.approx(
            2 * 0.2 * 16.0 * math.gamma(1.5), rel=1e-14
        )

    def test_vectorized_matches_scalar(self):
        w = np.linspace(0.0, 30.0, 301)
        vec = OHMIC(w)
        assert vec.shape == w.shape
        assert vec[0] == 0.0
        for i in (1, 57, 300):
            assert vec[i] == pytest.approx(OHMIC(float(w[i])), rel=1e-15)

    def test_rejects_negative_argument(self):
        with pytest.raises(ValueError):
            OHMIC(-1.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha=0.0, s=1.0, omega_c=4.0),
            dict(alpha=-0.1, s=1.0, omega_c=4.0),
            dict(alpha=0.2, s=0.0, omega_c=4.0),
            dict(alpha=0.2, s=1.0, omega_c=0.0),
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ConfigError):
            SpectralDensity(**kwargs)

    @given(
        alpha=st.floats(0.01, 2.0),
        s=st.floats(0.1, 2.0),
        omega_c=st.floats(0.5, 10.0),
        omega=st.floats(0.0, 50.0),
    )
    def test_nonnegative(self, alpha, s, omega_c, omega):
        dens = SpectralDensity(alpha=alpha, s=s, omega_c=omega_c)
        assert dens(omega) >= 0.0


class TestThermalizedDensity:
    def test_detailed_balance_frozen(self):
        dens = ThermalizedDensity(OHMIC, theta=1.0)
        assert dens(-1.0) / dens(1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)

    @given(
        s=st.floats(0.2, 2.0),
        theta=st.floats(0.2, 5.0),
        omega=st.floats(0.05, 20.0),
    )
    def test_detailed_balance_property(self, s, theta, omega):
        dens = ThermalizedDensity(
            SpectralDensity(alpha=0.3, s=s, omega_c=4.0), theta=theta
        )
        ratio = dens(-omega) / dens(omega)
        assert ratio == pytest.approx(math.exp(-omega / theta), rel=1e-10)

    def test_zero_frequency_limit(self):
        # lim_{w->0} J(w)/(1-e^{-w/theta}) = theta J'(0) for s=1
        ohmic = ThermalizedDensity(OHMIC, theta=1.0)
        assert ohmic(0.0) == pytest.approx(2 * 0.2 * 1.0, rel=1e-14)
        assert ohmic(1e-12) == pytest.approx(ohmic(0.0), rel=1e-9)
        # s < 1: integrable divergence
        assert np.isinf(ThermalizedDensity(SUBOHMIC, theta=1.0)(0.0))
        # s > 1: vanishes
        super_ohmic = SpectralDensity(alpha=0.2, s=1.5, omega_c=4.0)
        assert ThermalizedDensity(super_ohmic, theta=1.0)(0.0) == 0.0

    def test_large_negative_argument_stable(self):
        """Occupation side must decay smoothly, not underflow to garbage."""
        dens = ThermalizedDensity(OHMIC, theta=1.0)
        w = -np.linspace(30.0, 80.0, 11)
        vals = np.asarray(dens(w))
        assert np.all(np.isfinite(vals))
        assert np.all(vals > 0.0)
        # log-slope ~ -(1/theta + 1/omega_c) for large |w|
        slope = np.diff(np.log(vals)) / np.diff(-w)
        assert np.allclose(slope, -(1.0 + 0.25), atol=0.05)

    def test_positive_side_reduces_to_base_at_low_theta(self):
        dens = ThermalizedDensity(OHMIC, theta=1e-6)
        assert dens(3.0) == pytest.approx(OHMIC(3.0), rel=1e-12)

    def test_invalid_theta(self):
        with pytest.raises(ConfigError):
            ThermalizedDensity(OHMIC, theta=0.0)


class TestChainCoefficients:
    def test_ohmic_closed_form(self):
        """Monic Laguerre recurrence, s = 1: w_n = wc(2n+2), t_n = wc sqrt((n+1)(n+2))."""
        coeffs = chain_coefficients(OHMIC, 40)
        n = np.arange(40)
        exact_w = 4.0 * (2 * n + 2)
        exact_t = 4.0 * np.sqrt((n[:-1] + 1) * (n[:-1] + 2))
        assert np.max(np.abs(coeffs.omegas / exact_w - 1)) < 1e-12
        assert np.max(np.abs(coeffs.hops / exact_t - 1)) < 1e-12

    def test_subohmic_closed_form(self):
        """General s: w_n = wc(2n+s+1), t_n = wc sqrt((n+1)(n+1+s))."""
        coeffs = chain_coefficients(SUBOHMIC, 40)
        n = np.arange(40)
        exact_w = 4.0 * (2 * n + 1.5)
        exact_t = 4.0 * np.sqrt((n[:-1] + 1) * (n[:-1] + 1.5))
        assert coeffs.omegas[0] == pytest.approx(6.0, rel=1e-12)
        assert np.max(np.abs(coeffs.omegas / exact_w - 1)) < 1e-12
        assert np.max(np.abs(coeffs.hops / exact_t - 1)) < 1e-12

    def test_coupling_normalization(self):
        coeffs = chain_coefficients(OHMIC, 8)
        assert coeffs.g == pytest.approx(1.4272992929222168, rel=1e-12)
        assert coeffs.g == pytest.approx(math.sqrt(coeffs.total_weight / math.pi), rel=1e-14)

    @pytest.mark.parametrize(
        "s, expected_mu0",
        [
            # scipy.integrate.quad on both half-lines, abs err < 3e-8
            (0.5, 8.809883119639027),
            (1.0, 7.357863323605689),
        ],
    )
    def test_thermal_total_weight_vs_quad_oracle(self, s, expected_mu0):
        dens = ThermalizedDensity(
            SpectralDensity(alpha=0.2, s=s, omega_c=4.0), theta=1.0
        )
        coeffs = chain_coefficients(dens, 24)
        assert coeffs.total_weight == pytest.approx(expected_mu0, abs=1e-7)

    def test_thermal_chain_properties(self):
        dens = ThermalizedDensity(SUBOHMIC, theta=1.0)
        coeffs = chain_coefficients(dens, 24)
        assert np.all(coeffs.hops > 0)
        assert np.all(np.isfinite(coeffs.omegas))
        assert coeffs.quadrature["converged"] is True
        # thermal support is two-sided, so frequencies may be of either sign,
        # but the first one is the mean frequency of the thermalized measure
        # and must be positive for these parameters
        assert coeffs.omegas[0] > 0

    def test_zero_temperature_frequencies_positive(self):
        coeffs = chain_coefficients(SUBOHMIC, 16)
        assert np.all(coeffs.omegas > 0)

    def test_refinement_metadata(self):
        coeffs = chain_coefficients(OHMIC, 12)
        meta = coeffs.quadrature
        assert meta["converged"] is True
        assert meta["rel_change"] < 1e-10
        assert meta["nodes"] >= 12

    def test_budget_exhaustion_raises(self):
        config = QuadratureConfig(
            nodes_per_panel=2, rel_tol=1e-30, max_refinements=0
        )
        with pytest.raises(ConvergenceError) as excinfo:
            chain_coefficients(OHMIC, 12, config)
        assert excinfo.value.achieved is not None

    def test_invalid_length(self):
        with pytest.raises(ConfigError):
            chain_coefficients(OHMIC, 0)

    @given(length=st.integers(2, 24))
    def test_hop_positivity_property(self, length):
        coeffs = chain_coefficients(OHMIC, length)
        assert np.all(coeffs.hops > 0)
        assert len(coeffs.hops) == length - 1
        assert len(coeffs.omegas) == length


class TestSerialization:
    def test_json_round_trip(self):
        coeffs = chain_coefficients(SUBOHMIC, 10)
        text = coeffs.to_json()
        back = ChainCoefficients.from_json(text)
        assert np.array_equal(back.omegas, coeffs.omegas)
        assert np.array_equal(back.hops, coeffs.hops)
        assert back.g == coeffs.g
        assert back.total_weight == coeffs.total_weight

    def test_json_schema(self):
        coeffs = chain_coefficients(OHMIC, 6)
        payload = json.loads(coeffs.to_json())
        for key in ("schema_version", "L", "g", "omegas", "hops", "density", "quadrature"):
            assert key in payload, key
        assert payload["L"] == 6
        assert len(payload["omegas"]) == 6
        assert len(payload["hops"]) == 5
        assert payload["density"]["kind"] == "power_law_exp_cutoff"

    def test_thermal_density_tagged(self):
        dens = ThermalizedDensity(OHMIC, theta=1.0)
        coeffs = chain_coefficients(dens, 6)
        payload = json.loads(coeffs.to_json())
        assert payload["density"]["kind"] == "thermal_extension"
        assert payload["density"]["theta"] == 1.0

    def test_from_json_rejects_garbage(self):
        with pytest.raises(ConfigError):
            ChainCoefficients.from_json(json.dumps({"omegas": [1.0]}))

    def test_from_json_rejects_length_mismatch(self):
        coeffs = chain_coefficients(OHMIC, 6)
        payload = json.loads(coeffs.to_json())
        payload["hops"] = payload["hops"][:-1]
        with pytest.raises(ConfigError):
            ChainCoefficients.from_json(json.dumps(payload))
