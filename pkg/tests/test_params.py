"""Parameter containers, the pump-rate formula, and validation."""

import math

import numpy as np
import pytest

from phasenoise import (
    Bundle,
    ConfigError,
    NoiseSpec,
    SimConfig,
    SystemParams,
    collect_violations,
    pump_rate_from_power,
    tabulated_from_arrays,
    validate,
)


class TestPumpRate:
    def test_reference_value(self):
        # 50 mW at 1064 nm into a kappa = 1e7 rad/s cavity; value frozen
        # from an independent evaluation of sqrt(2 kappa P / (hbar w_L))
        e = pump_rate_from_power(50e-3, 1064e-9, 1e7)
        assert e == pytest.approx(2314368170336.2246, rel=1e-12)
        assert 1e12 <= e <= 1e13

    def test_scalings(self):
        base = pump_rate_from_power(50e-3, 1064e-9, 1e7)
        # sqrt in power and kappa, sqrt(wavelength) through 1/omega_L
        assert pump_rate_from_power(200e-3, 1064e-9, 1e7) == pytest.approx(2 * base, rel=1e-12)
        assert pump_rate_from_power(50e-3, 1064e-9, 4e7) == pytest.approx(2 * base, rel=1e-12)
        assert pump_rate_from_power(50e-3, 4 * 1064e-9, 1e7) == pytest.approx(2 * base, rel=1e-12)

    @pytest.mark.parametrize("bad", [
        dict(power=0.0, wavelength=1064e-9, kappa=1e7),
        dict(power=-1e-3, wavelength=1064e-9, kappa=1e7),
        dict(power=50e-3, wavelength=0.0, kappa=1e7),
        dict(power=50e-3, wavelength=1064e-9, kappa=-1.0),
    ])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ConfigError):
            pump_rate_from_power(**bad)


class TestSystemParams:
    def test_resolved_pump_prefers_explicit(self):
        sy = SystemParams(kappa=1e7, delta=1e7, pump_rate=3.0,
                          laser_power=50e-3, laser_wavelength=1064e-9)
        assert sy.resolved_pump_rate() == 3.0

    def test_resolved_pump_derives(self):
        sy = SystemParams(kappa=1e7, delta=1e7,
                          laser_power=50e-3, laser_wavelength=1064e-9)
        assert sy.resolved_pump_rate() == pytest.approx(2314368170336.2246, rel=1e-12)

    def test_resolved_pump_underdetermined(self):
        with pytest.raises(ConfigError, match="not derivable"):
            SystemParams(kappa=1e7, delta=1e7).resolved_pump_rate()

    def test_frozen(self):
        sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)
        with pytest.raises(Exception):
            sy.kappa = 2e7


class TestValidate:
    def _ok_sim(self):
        return SimConfig(dt=1e-9, duration=1e-5, burn_in=1e-6, seed=1)

    def test_happy_path_returns_bundle(self):
        b = validate(SystemParams(kappa=1e7, delta=1e7, pump_rate=1e12),
                     NoiseSpec(kind="white", gamma_l=10.0), self._ok_sim())
        assert isinstance(b, Bundle)
        assert b.sim.burn_in == 1e-6

    def test_derives_pump_into_bundle(self):
        b = validate(SystemParams(kappa=1e7, delta=1e7,
                                  laser_power=50e-3, laser_wavelength=1064e-9),
                     NoiseSpec(kind="none"))
        assert b.system.pump_rate == pytest.approx(2314368170336.2246, rel=1e-12)

    def test_consistent_power_and_pump_pass(self):
        e = pump_rate_from_power(50e-3, 1064e-9, 1e7)
        validate(SystemParams(kappa=1e7, delta=1e7, pump_rate=e,
                              laser_power=50e-3, laser_wavelength=1064e-9),
                 NoiseSpec(kind="none"))

    def test_inconsistent_power_and_pump_fail(self):
        e = pump_rate_from_power(50e-3, 1064e-9, 1e7)
        with pytest.raises(ConfigError, match="inconsistent"):
            validate(SystemParams(kappa=1e7, delta=1e7, pump_rate=1.001 * e,
                                  laser_power=50e-3, laser_wavelength=1064e-9),
                     NoiseSpec(kind="none"))

    def test_consistency_tolerance_is_tight(self):
        e = pump_rate_from_power(50e-3, 1064e-9, 1e7)
        v = collect_violations(
            SystemParams(kappa=1e7, delta=1e7, pump_rate=e * (1 + 1e-9),
                         laser_power=50e-3, laser_wavelength=1064e-9),
            NoiseSpec(kind="none"))
        assert any("inconsistent" in m for m in v)

    def test_collects_multiple_violations(self):
        v = collect_violations(
            SystemParams(kappa=-1.0, delta=math.nan, pump_rate=-2.0),
            NoiseSpec(kind="white", gamma_l=-5.0),
            SimConfig(dt=-1e-9, duration=-1.0, n_trajectories=0, batches=0),
        )
        text = "\n".join(v)
        for field in ["system.kappa", "system.delta", "system.pump_rate",
                      "noise.gamma_l"]:
            assert field in text, f"missing {field} in:\n{text}"
        # sim checks require a positive kappa and are skipped here
        assert len(v) >= 4

    def test_sim_violations_reported_together(self):
        v = collect_violations(
            SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0),
            NoiseSpec(kind="none"),
            SimConfig(dt=-1e-9, duration=-1.0, n_trajectories=0, batches=0,
                      store_trajectories=-1, seed=-3),
        )
        text = "\n".join(v)
        for field in ["sim.dt", "sim.duration", "sim.n_trajectories",
                      "sim.batches", "sim.store_trajectories", "sim.seed"]:
            assert field in text, f"missing {field} in:\n{text}"

    def test_messages_carry_field_and_value(self):
        v = collect_violations(SystemParams(kappa=0.0, delta=0.0, pump_rate=1.0),
                               NoiseSpec(kind="none"))
        assert v == ["system.kappa: must be > 0 (got 0.0)"]

    def test_dt_stability_bound(self):
        sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)
        ok = SimConfig(dt=1e-8, duration=1e-5, burn_in=1e-6)
        assert collect_violations(sy, NoiseSpec(kind="none"), ok) == []
        bad = SimConfig(dt=2e-8, duration=1e-5, burn_in=1e-6)
        v = collect_violations(sy, NoiseSpec(kind="none"), bad)
        assert len(v) == 1 and "sim.dt" in v[0]

    def test_dt_bound_includes_detuning_and_gamma(self):
        sy = SystemParams(kappa=1e6, delta=5e7, pump_rate=1.0)
        v = collect_violations(sy, NoiseSpec(kind="none"),
                               SimConfig(dt=1e-8, duration=1e-4, burn_in=1e-5))
        assert any("sim.dt" in m for m in v)
        sy2 = SystemParams(kappa=1e6, delta=0.0, pump_rate=1.0)
        v2 = collect_violations(sy2, NoiseSpec(kind="white", gamma_l=5e7),
                                SimConfig(dt=1e-8, duration=1e-4, burn_in=1e-5))
        assert any("sim.dt" in m for m in v2)

    def test_dt_bound_for_colored_filter(self):
        sy = SystemParams(kappa=1e6, delta=1e6, pump_rate=1.0)
        spec = NoiseSpec(kind="lorentzian", total_strength=1.0,
                         center_frequency=4e7, half_width=1e7)
        v = collect_violations(sy, spec,
                               SimConfig(dt=2e-8, duration=1e-4, burn_in=1e-5))
        assert any("center_frequency" in m for m in v)

    def test_burn_in_vs_duration(self):
        sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)
        v = collect_violations(sy, NoiseSpec(kind="none"),
                               SimConfig(dt=1e-9, duration=1e-6, burn_in=1e-6))
        assert any("burn_in" in m for m in v)

    def test_short_burn_in_warns(self):
        sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)
        with pytest.warns(UserWarning, match="burn_in"):
            validate(sy, NoiseSpec(kind="none"),
                     SimConfig(dt=1e-9, duration=1e-5, burn_in=1e-7))

    def test_default_burn_in_is_ten_lifetimes(self):
        sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)
        b = validate(sy, NoiseSpec(kind="none"),
                     SimConfig(dt=1e-9, duration=1e-5))
        assert b.sim.burn_in == pytest.approx(1e-6, rel=1e-15)


class TestNoiseSpecValidation:
    _sy = SystemParams(kappa=1e7, delta=0.0, pump_rate=1.0)

    def test_unknown_kind(self):
        v = collect_violations(self._sy, NoiseSpec(kind="pink"))
        assert any("noise.kind" in m for m in v)

    def test_lorentzian_bounds(self):
        v = collect_violations(self._sy, NoiseSpec(
            kind="lorentzian", total_strength=-1.0,
            center_frequency=-2.0, half_width=0.0))
        text = "\n".join(v)
        assert "total_strength" in text
        assert "half_width" in text
        assert "center_frequency" in text

    def test_tabulated_grid_checks(self):
        v = collect_violations(self._sy, NoiseSpec(
            kind="tabulated", spectrum_omega=(0.0, 2.0, 1.0),
            spectrum_s=(1.0, 1.0, -1.0)))
        text = "\n".join(v)
        assert "strictly increasing" in text
        assert "S must be >= 0" in text

    def test_tabulated_requires_arrays(self):
        v = collect_violations(self._sy, NoiseSpec(kind="tabulated"))
        assert any("required" in m for m in v)

    def test_tabulated_shape_mismatch(self):
        v = collect_violations(self._sy, NoiseSpec(
            kind="tabulated", spectrum_omega=(0.0, 1.0, 2.0),
            spectrum_s=(1.0, 1.0)))
        assert any("matching" in m for m in v)

    def test_tabulated_helper_builds_valid_spec(self):
        spec = tabulated_from_arrays(np.array([0.0, 1e6]), np.array([2.0, 2.0]))
        assert collect_violations(self._sy, spec) == []
        assert isinstance(spec.spectrum_omega, tuple)


class TestSpectrumEvaluation:
    def test_white_is_flat_at_twice_gamma(self):
        spec = NoiseSpec(kind="white", gamma_l=7.0)
        w = np.array([-1e9, 0.0, 3.3e5])
        assert np.all(spec.evaluate_spectrum(w) == 14.0)

    def test_none_is_zero(self):
        assert np.all(NoiseSpec(kind="none").evaluate_spectrum([0.0, 1.0]) == 0.0)

    def test_lorentzian_symmetry_and_peak(self):
        spec = NoiseSpec(kind="lorentzian", total_strength=4.0,
                         center_frequency=1e6, half_width=1e5)
        w = np.linspace(0, 3e6, 301)
        s = spec.evaluate_spectrum(w)
        assert np.all(spec.evaluate_spectrum(-w) == s)
        assert abs(w[np.argmax(s)] - 1e6) <= 1e4

    def test_lorentzian_total_power(self):
        # Var(phidot) = integral S dw / 2pi must recover total_strength
        spec = NoiseSpec(kind="lorentzian", total_strength=4.0,
                         center_frequency=1e6, half_width=1e5)
        w = np.linspace(-1e9, 1e9, 4_000_001)
        power = np.trapezoid(spec.evaluate_spectrum(w), w) / (2 * math.pi)
        assert power == pytest.approx(4.0, rel=1e-3)

    def test_lorentzian_dc_centered_collapses(self):
        spec = NoiseSpec(kind="lorentzian", total_strength=2.0,
                         center_frequency=0.0, half_width=1e5)
        # both peaks coincide: S(0) = 2 P / (pi gamma) * pi = 2P*2g/(2g^2)...
        expected = 2.0 * 2.0 / 1e5
        assert float(spec.evaluate_spectrum(0.0)) == pytest.approx(expected, rel=1e-12)

    def test_tabulated_interpolates_and_clamps(self):
        spec = tabulated_from_arrays([1.0, 2.0, 4.0], [10.0, 20.0, 0.0])
        assert float(spec.evaluate_spectrum(1.5)) == pytest.approx(15.0)
        assert float(spec.evaluate_spectrum(-1.5)) == pytest.approx(15.0)
        assert float(spec.evaluate_spectrum(0.1)) == 10.0   # clamp below
        assert float(spec.evaluate_spectrum(100.0)) == 0.0  # clamp above

    def test_white_equivalent_gamma(self):
        assert NoiseSpec(kind="white", gamma_l=3.0).white_equivalent_gamma_l() == 3.0
        assert NoiseSpec(kind="lorentzian", total_strength=1.0,
                         half_width=1.0).white_equivalent_gamma_l() == 0.0
