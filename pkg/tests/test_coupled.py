"""Optomechanical steady states: Lyapunov closure vs spectral quadrature."""

import math

import numpy as np
import pytest

from phasenoise import (
    ConfigError,
    InstabilityError,
    MechanicalParams,
    NoiseSpec,
    SystemParams,
    build_model,
    phase_noise_occupation_white,
    solve_spectral,
    solve_steady,
    tabulated_from_arrays,
)

MECH = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=1e3, g=1e4)
SYS = SystemParams(kappa=1e6, delta=1e6, pump_rate=1.5e9)

# operating points exercised on both routes: (system, noise, mechanical)
ROUTE_POINTS = [
    (SYS, NoiseSpec(kind="white", gamma_l=1.0), MECH),
    (SystemParams(kappa=1e6, delta=2e6, pump_rate=1e9),
     NoiseSpec(kind="white", gamma_l=10.0),
     MechanicalParams(omega_m=2e6, gamma_m=50.0, n_th=500.0, g=2e4)),
    (SYS,
     NoiseSpec(kind="lorentzian", total_strength=4e4,
               center_frequency=1e6, half_width=2e5),
     MECH),
    (SystemParams(kappa=2e6, delta=1e6, pump_rate=2e9),
     NoiseSpec(kind="lorentzian", total_strength=5e4,
               center_frequency=0.0, half_width=3e5),
     MechanicalParams(omega_m=1e6, gamma_m=200.0, n_th=100.0, g=3e4)),
]


class TestModelAssembly:
    def test_mechanical_validation(self):
        bad = MechanicalParams(omega_m=0.0, gamma_m=-1.0, n_th=-2.0, g=1.0)
        with pytest.raises(ConfigError) as err:
            build_model(SYS, NoiseSpec(kind="none"), bad)
        text = str(err.value)
        assert "omega_m" in text and "gamma_m" in text and "n_th" in text

    def test_no_coupling_blocks_decouple(self):
        mech0 = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=1e3, g=0.0)
        m = build_model(SYS, NoiseSpec(kind="none"), mech0)
        assert np.all(m.a[:2, 2:] == 0.0)
        assert np.all(m.a[2:, :2] == 0.0)

    def test_phase_weights_follow_alpha(self):
        m = build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0), MECH)
        v = m.phase_weights
        assert v[0] == pytest.approx(-math.sqrt(2) * m.alpha.imag, rel=1e-15)
        assert v[1] == pytest.approx(math.sqrt(2) * m.alpha.real, rel=1e-15)
        assert v[2] == 0.0 and v[3] == 0.0

    def test_white_noise_stays_four_dimensional(self):
        m = build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0), MECH)
        assert m.a.shape == (4, 4)
        assert not m.augmented
        assert m.has_lyapunov_closure

    def test_lorentzian_augments_to_six(self):
        spec = NoiseSpec(kind="lorentzian", total_strength=4e4,
                         center_frequency=1e6, half_width=2e5)
        m = build_model(SYS, spec, MECH)
        assert m.a.shape == (6, 6)
        assert m.augmented and m.has_lyapunov_closure
        assert m.labels[4:] == ("zr", "zi")
        # filter block rotates at the line center and damps at its width
        assert m.a[4, 4] == -2e5 and m.a[4, 5] == 1e6
        assert m.d[4, 4] == 2e5 * 4e4

    def test_tabulated_has_no_closure(self):
        spec = tabulated_from_arrays([0.0, 1e8], [2.0, 2.0])
        m = build_model(SYS, spec, MECH)
        assert not m.has_lyapunov_closure
        with pytest.raises(ConfigError, match="solve_spectral"):
            solve_steady(m)

    def test_vacuum_diffusion_entries(self):
        m = build_model(SYS, NoiseSpec(kind="none"), MECH)
        # kappa on both cavity quadratures reproduces vacuum variance 1/2
        assert m.d_static[0, 0] == 1e6 and m.d_static[1, 1] == 1e6
        assert m.d_static[3, 3] == 1e2 * (2e3 + 1.0)
        assert m.d_static[2, 2] == 0.0


class TestDecoupledLimits:
    def test_uncoupled_mirror_stays_thermal(self):
        mech0 = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=1e3, g=0.0)
        rep = solve_steady(build_model(SYS, NoiseSpec(kind="none"), mech0))
        assert rep.n_m == 1e3  # exactly the bath occupation
        assert rep.n_cav == pytest.approx(0.0, abs=1e-12)
        assert rep.share_m == 0.0 and rep.share_cav == 0.0

    def test_uncoupled_cavity_matches_analytic_heating(self):
        # g = 0 and large n: the Lyapunov route must reproduce the
        # closed-form added occupation to near machine precision
        kappa, delta, gamma_l = 1e7, 1e7, 1e-3
        pump = math.sqrt(1e10) * abs(complex(kappa + gamma_l, delta))
        sy = SystemParams(kappa=kappa, delta=delta, pump_rate=pump)
        mech0 = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=10.0, g=0.0)
        rep = solve_steady(build_model(sy, NoiseSpec(kind="white", gamma_l=gamma_l),
                                       mech0))
        expected = phase_noise_occupation_white(1e10, gamma_l, kappa)
        assert rep.share_cav == pytest.approx(expected, rel=1e-8)
        assert rep.n_cav == pytest.approx(expected, rel=1e-8)
        assert rep.n_m == pytest.approx(10.0, rel=1e-12)

    def test_phase_to_vacuum_crossover_trace_ratio(self):
        # resonant drive, real alpha: trace of the phase diffusion over
        # the vacuum diffusion on the cavity block is exactly 2 n G/kappa
        kappa, gamma_l, n = 1e7, 1e-3, 1e10
        pump = math.sqrt(n) * (kappa + gamma_l)
        sy = SystemParams(kappa=kappa, delta=0.0, pump_rate=pump)
        m = build_model(sy, NoiseSpec(kind="white", gamma_l=gamma_l), MECH)
        d_phase = m.d[:2, :2] - m.d_static[:2, :2]
        ratio = np.trace(d_phase) / np.trace(m.d_static[:2, :2])
        assert 2.0 * n * gamma_l / kappa == 2.0
        assert ratio == pytest.approx(2.0, rel=1e-12)


class TestCooling:
    def test_reference_point(self):
        rep = solve_steady(build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0),
                                       MECH))
        # frozen output of this solver configuration; guards regressions
        assert rep.n_m == pytest.approx(715.1865105881491, rel=1e-9)
        assert rep.n_m < 1e3  # cooled below the bath

    def test_coupling_squared_scaling(self):
        # weak coupling: optical damping ~ g^2 well below gamma_m, so the
        # occupation shift off the bath value scales as g^2
        mech_g = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=1e3, g=1e3)
        mech_half = MechanicalParams(omega_m=1e6, gamma_m=1e2, n_th=1e3, g=5e2)
        spec = NoiseSpec(kind="white", gamma_l=1.0)
        full = solve_steady(build_model(SYS, spec, mech_g)).n_m
        half = solve_steady(build_model(SYS, spec, mech_half)).n_m
        ratio = (full - 1e3) / (half - 1e3)
        assert ratio == pytest.approx(4.0, rel=0.05)

    def test_heating_monotone_in_linewidth(self):
        values = []
        for gl in [0.0, 1.0, 10.0, 100.0]:
            spec = NoiseSpec(kind="white", gamma_l=gl) if gl else NoiseSpec(kind="none")
            values.append(solve_steady(build_model(SYS, spec, MECH)).n_m)
        assert values == sorted(values)

    def test_phase_share_positive_and_additive(self):
        rep0 = solve_steady(build_model(SYS, NoiseSpec(kind="none"), MECH))
        rep1 = solve_steady(build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0),
                                        MECH))
        assert rep0.share_m == 0.0
        assert rep1.share_m > 0.0
        # additivity across the two models holds up to the O(gamma_l/kappa)
        # pole shift that zeroing the phase channel deliberately keeps
        assert rep1.n_m == pytest.approx(rep0.n_m + rep1.share_m, rel=1e-5)

    def test_temperatures_consistent(self):
        rep = solve_steady(build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0),
                                       MECH))
        assert rep.t_eff_delta / rep.t_eff_omega_m == pytest.approx(
            SYS.delta / MECH.omega_m, rel=1e-12)

    def test_temperature_nan_for_nonpositive_detuning(self):
        sy = SystemParams(kappa=1e6, delta=-1e6, pump_rate=1e8)
        mech = MechanicalParams(omega_m=1e6, gamma_m=1e3, n_th=10.0, g=1e3)
        rep = solve_steady(build_model(sy, NoiseSpec(kind="white", gamma_l=1.0),
                                       mech))
        assert math.isnan(rep.t_eff_delta)
        assert math.isfinite(rep.t_eff_omega_m)


class TestRouteAgreement:
    @pytest.mark.parametrize("sy,spec,mech", ROUTE_POINTS)
    def test_lyapunov_vs_spectral(self, sy, spec, mech):
        model = build_model(sy, spec, mech)
        lyap = solve_steady(model)
        spect = solve_spectral(model)
        assert spect.n_m == pytest.approx(lyap.n_m, rel=1e-4)
        assert spect.n_cav == pytest.approx(lyap.n_cav, rel=1e-4)
        assert spect.share_m == pytest.approx(lyap.share_m, rel=1e-3, abs=1e-12)

    def test_residual_reported_and_small(self):
        rep = solve_steady(build_model(SYS, NoiseSpec(kind="white", gamma_l=1.0),
                                       MECH))
        assert rep.residual_rel <= 1e-10
        assert math.isnan(solve_spectral(
            build_model(SYS, NoiseSpec(kind="none"), MECH)).residual_rel)

    def test_spectral_handles_tabulated_flat(self):
        # a flat tabulated spectrum S = 2 gamma_l must land on the white
        # closure up to the O(gamma_l/kappa) pole-shift difference
        gamma_l = 1.0
        spec_tab = tabulated_from_arrays([0.0, 5e7], [2 * gamma_l, 2 * gamma_l])
        white = solve_steady(build_model(
            SYS, NoiseSpec(kind="white", gamma_l=gamma_l), MECH))
        tab = solve_spectral(build_model(SYS, spec_tab, MECH))
        assert tab.n_m == pytest.approx(white.n_m, rel=1e-5)
        assert tab.n_cav == pytest.approx(white.n_cav, rel=1e-5)

    def test_zero_spectrum_matches_no_noise(self):
        spec_tab = tabulated_from_arrays([0.0, 5e7], [0.0, 0.0])
        none = solve_steady(build_model(SYS, NoiseSpec(kind="none"), MECH))
        tab = solve_spectral(build_model(SYS, spec_tab, MECH))
        assert tab.n_m == pytest.approx(none.n_m, rel=1e-6)
        assert tab.share_m == pytest.approx(0.0, abs=1e-12)


class TestPhysicality:
    @pytest.mark.parametrize("sy,spec,mech", ROUTE_POINTS[:2])
    def test_uncertainty_bound(self, sy, spec, mech):
        rep = solve_steady(build_model(sy, spec, mech))
        v4 = rep.cov[:4, :4]
        j = np.array([[0.0, 1.0], [-1.0, 0.0]])
        omega = np.block([[j, np.zeros((2, 2))], [np.zeros((2, 2)), j]])
        m = v4 + 0.5j * omega
        lam = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        assert float(lam.min()) >= -1e-9

    def test_occupations_above_floor(self):
        for sy, spec, mech in ROUTE_POINTS:
            rep = solve_steady(build_model(sy, spec, mech))
            assert rep.n_cav > -1e-12
            assert rep.n_m > 0.0


class TestInstability:
    UNSTABLE = (SystemParams(kappa=1e5, delta=-1e6, pump_rate=1e9),
                MechanicalParams(omega_m=1e6, gamma_m=10.0, n_th=100.0, g=2e4))

    def test_blue_detuned_raises(self):
        sy, mech = self.UNSTABLE
        model = build_model(sy, NoiseSpec(kind="white", gamma_l=1.0), mech)
        with pytest.raises(InstabilityError, match="Hurwitz"):
            solve_steady(model)

    def test_message_carries_eigenvalues(self):
        sy, mech = self.UNSTABLE
        model = build_model(sy, NoiseSpec(kind="white", gamma_l=1.0), mech)
        with pytest.raises(InstabilityError) as err:
            solve_steady(model)
        assert len(err.value.eigenvalues) == 4
        assert err.value.eigenvalues[0].real > 0

    def test_spectral_route_also_guards(self):
        sy, mech = self.UNSTABLE
        model = build_model(sy, NoiseSpec(kind="white", gamma_l=1.0), mech)
        with pytest.raises(InstabilityError):
            solve_spectral(model)
