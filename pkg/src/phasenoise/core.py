"""Parameter types and validation for the pumped-cavity model.

Conventions used throughout the package:

* every rate (cavity linewidth ``kappa``, detuning ``delta``, phase
  diffusion ``gamma_l``, pump amplitude ``pump_rate``, mechanical rates)
  is an angular rate in rad/s;
* phase-noise spectra are two-sided in angular frequency, normalized so
  that ``Var(phidot) = integral S(omega) domega / (2 pi)`` where the
  integral converges, and a white spectrum has the constant value
  ``S = 2 gamma_l``;
* all parameter containers are frozen; ``validate`` cross-checks a
  (system, noise, sim) triple and returns an immutable bundle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import constants as _const

from .errors import ConfigError

__all__ = [
    "SystemParams",
    "NoiseSpec",
    "SimConfig",
    "Bundle",
    "pump_rate_from_power",
    "validate",
    "collect_violations",
]

# relative tolerance for the pump_rate vs laser_power cross-check
_POWER_CONSISTENCY_RTOL = 1e-12

# hard stability bound on the integrator step
_DT_RATE_BOUND = 0.1


def pump_rate_from_power(power: float, wavelength: float, kappa: float) -> float:
    """Pump amplitude E (s^-1) delivered to the cavity by a laser beam.

    E = sqrt(2 kappa P / (hbar omega_L)) with omega_L = 2 pi c / wavelength,
    i.e. the input-coupler photon flux P/(hbar omega_L) times 2 kappa,
    square-rooted into an amplitude rate.

    Parameters
    ----------
    power : float
        Optical power P in W, > 0.
    wavelength : float
        Laser wavelength in m, > 0.
    kappa : float
        Cavity amplitude decay rate in rad/s, > 0.
    """
    if power <= 0 or wavelength <= 0 or kappa <= 0:
        raise ConfigError(
            [f"pump_rate_from_power requires power, wavelength, kappa > 0; "
             f"got power={power!r}, wavelength={wavelength!r}, kappa={kappa!r}"]
        )
    omega_l = 2.0 * math.pi * _const.c / wavelength
    return math.sqrt(2.0 * kappa * power / (_const.hbar * omega_l))


@dataclass(frozen=True)
class SystemParams:
    """Cavity drive parameters.

    Attributes
    ----------
    kappa : float
        Amplitude decay rate of the cavity mode, rad/s.
    delta : float
        Detuning of the drive from the cavity resonance, rad/s. May be
        negative (blue side); occupation-to-temperature conversion needs
        delta > 0.
    pump_rate : float
        Pump amplitude E in s^-1. If omitted (None) but laser_power and
        laser_wavelength are given, validate() derives it.
    laser_power, laser_wavelength : float, optional
        W and m. When both are present alongside pump_rate, the derived
        value must agree with pump_rate to relative 1e-12.
    """

    kappa: float
    delta: float
    pump_rate: Optional[float] = None
    laser_power: Optional[float] = None
    laser_wavelength: Optional[float] = None

    def resolved_pump_rate(self) -> float:
        if self.pump_rate is not None:
            return float(self.pump_rate)
        if self.laser_power is not None and self.laser_wavelength is not None:
            return pump_rate_from_power(self.laser_power, self.laser_wavelength, self.kappa)
        raise ConfigError(["pump_rate missing and not derivable "
                           "(need laser_power and laser_wavelength)"])


@dataclass(frozen=True)
class NoiseSpec:
    """Laser phase-noise model.

    kind is one of:

    ``"none"``
        No phase noise, S(omega) = 0.
    ``"white"``
        Phase diffusion at rate gamma_l; flat S(omega) = 2 gamma_l.
    ``"lorentzian"``
        phidot with total integrated power ``total_strength`` (rad^2/s^2,
        equals Var(phidot)) split between two Lorentzian peaks of
        ``half_width`` at +-``center_frequency``:

            S(omega) = (total_strength/2) * [ 2 g / (g^2 + (omega-w0)^2)
                                            + 2 g / (g^2 + (omega+w0)^2) ]

        with g = half_width, w0 = center_frequency. center_frequency = 0
        collapses both peaks onto a single Lorentzian at DC.
    ``"tabulated"``
        Piecewise-linear S over the strictly increasing grid
        ``spectrum_omega`` (rad/s, >= 0); evaluation uses S(|omega|) so the
        two-sided symmetry is built in, and clamps to the end values
        outside the tabulated band.
    """

    kind: str = "none"
    gamma_l: float = 0.0
    total_strength: float = 0.0
    center_frequency: float = 0.0
    half_width: float = 0.0
    spectrum_omega: Optional[tuple] = None
    spectrum_s: Optional[tuple] = None

    def evaluate_spectrum(self, omega) -> np.ndarray:
        """Two-sided phase-rate spectrum S(omega), vectorized, S(-w) = S(w)."""
        w = np.abs(np.asarray(omega, dtype=float))
        if self.kind == "none":
            return np.zeros_like(w)
        if self.kind == "white":
            return np.full_like(w, 2.0 * self.gamma_l)
        if self.kind == "lorentzian":
            g = self.half_width
            w0 = self.center_frequency
            half = self.total_strength / 2.0
            return half * (2.0 * g / (g * g + (w - w0) ** 2)
                           + 2.0 * g / (g * g + (w + w0) ** 2))
        if self.kind == "tabulated":
            grid = np.asarray(self.spectrum_omega, dtype=float)
            vals = np.asarray(self.spectrum_s, dtype=float)
            # np.interp clamps to the end values outside the grid
            return np.interp(w, grid, vals)
        raise ConfigError([f"unknown noise kind {self.kind!r}"])

    def white_equivalent_gamma_l(self) -> float:
        """gamma_l entering broadband validity margins; 0 for colored kinds."""
        return self.gamma_l if self.kind == "white" else 0.0


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run controls.

    burn_in defaults to 10/kappa when left as None (resolved by
    validate); at least 5/kappa is recommended and warned about below.
    vacuum_noise switches the symmetrized vacuum input on or off; the
    occupation estimator subtracts the 1/2 offset only when it is on.
    """

    dt: float
    duration: float
    burn_in: Optional[float] = None
    n_trajectories: int = 256
    seed: int = 0
    vacuum_noise: bool = True
    batches: int = 16
    store_trajectories: int = 0

    def resolved_burn_in(self, kappa: float) -> float:
        return 10.0 / kappa if self.burn_in is None else float(self.burn_in)

    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class Bundle:
    """A validated (system, noise, sim) triple; produced by validate()."""

    system: SystemParams
    noise: NoiseSpec
    sim: SimConfig


def collect_violations(system: SystemParams,
                       noise: NoiseSpec,
                       sim: Optional[SimConfig] = None) -> list[str]:
    """Every violated invariant as 'field: requirement (got value)' strings.

    Does not raise and never mutates its inputs; validate() wraps this.
    """
    v: list[str] = []

    if not (system.kappa > 0):
        v.append(f"system.kappa: must be > 0 (got {system.kappa!r})")
    if not math.isfinite(system.delta):
        v.append(f"system.delta: must be finite (got {system.delta!r})")

    pump = system.pump_rate
    if pump is not None and not (pump >= 0):
        v.append(f"system.pump_rate: must be >= 0 (got {pump!r})")
    have_power = system.laser_power is not None and system.laser_wavelength is not None
    if system.laser_power is not None and not (system.laser_power > 0):
        v.append(f"system.laser_power: must be > 0 (got {system.laser_power!r})")
    if system.laser_wavelength is not None and not (system.laser_wavelength > 0):
        v.append(f"system.laser_wavelength: must be > 0 "
                 f"(got {system.laser_wavelength!r})")
    if pump is None and not have_power:
        v.append("system.pump_rate: missing and not derivable "
                 "(need laser_power and laser_wavelength)")
    if pump is not None and have_power and system.kappa > 0 \
            and system.laser_power > 0 and system.laser_wavelength > 0:
        derived = pump_rate_from_power(system.laser_power,
                                       system.laser_wavelength, system.kappa)
        if abs(derived - pump) > _POWER_CONSISTENCY_RTOL * max(abs(derived), abs(pump)):
            v.append(f"system.pump_rate: inconsistent with laser_power/wavelength "
                     f"(given {pump!r}, derived {derived!r}, rel tol 1e-12)")

    if noise.kind not in ("none", "white", "lorentzian", "tabulated"):
        v.append(f"noise.kind: must be one of none/white/lorentzian/tabulated "
                 f"(got {noise.kind!r})")
    elif noise.kind == "white":
        if not (noise.gamma_l >= 0):
            v.append(f"noise.gamma_l: must be >= 0 (got {noise.gamma_l!r})")
    elif noise.kind == "lorentzian":
        if not (noise.total_strength >= 0):
            v.append(f"noise.total_strength: must be >= 0 "
                     f"(got {noise.total_strength!r})")
        if not (noise.half_width > 0):
            v.append(f"noise.half_width: must be > 0 (got {noise.half_width!r})")
        if not (noise.center_frequency >= 0):
            v.append(f"noise.center_frequency: must be >= 0 "
                     f"(got {noise.center_frequency!r})")
    elif noise.kind == "tabulated":
        if noise.spectrum_omega is None or noise.spectrum_s is None:
            v.append("noise.spectrum_omega/spectrum_s: required for tabulated kind")
        else:
            grid = np.asarray(noise.spectrum_omega, dtype=float)
            vals = np.asarray(noise.spectrum_s, dtype=float)
            if grid.ndim != 1 or vals.shape != grid.shape or grid.size < 2:
                v.append("noise.spectrum_omega/spectrum_s: need matching 1-d "
                         "arrays with at least 2 points")
            else:
                if not np.all(np.diff(grid) > 0):
                    v.append("noise.spectrum_omega: grid must be strictly increasing")
                if grid[0] < 0:
                    v.append(f"noise.spectrum_omega: grid must be >= 0, symmetry "
                             f"is implicit (got min {grid[0]!r})")
                if not np.all(vals >= 0):
                    v.append(f"noise.spectrum_s: S must be >= 0 "
                             f"(got min {vals.min()!r})")

    if sim is not None and system.kappa > 0:
        gl = noise.gamma_l if noise.kind == "white" else 0.0
        if not (sim.dt > 0):
            v.append(f"sim.dt: must be > 0 (got {sim.dt!r})")
        else:
            rate = max(system.kappa + gl, abs(system.delta))
            if sim.dt * rate > _DT_RATE_BOUND:
                v.append(f"sim.dt: dt*max(kappa+gamma_l, |delta|) must be <= "
                         f"{_DT_RATE_BOUND} (got {sim.dt * rate:.3e})")
            if noise.kind == "lorentzian":
                fscale = noise.center_frequency + noise.half_width
                if sim.dt * fscale > 0.5:
                    v.append(f"sim.dt: dt*(center_frequency+half_width) must be "
                             f"<= 0.5 to resolve the colored filter "
                             f"(got {sim.dt * fscale:.3e})")
        if not (sim.duration > 0):
            v.append(f"sim.duration: must be > 0 (got {sim.duration!r})")
        elif sim.dt > 0 and sim.n_steps() < 2:
            v.append(f"sim.duration: must cover at least 2 steps "
                     f"(got {sim.duration!r} at dt={sim.dt!r})")
        burn = sim.resolved_burn_in(system.kappa)
        if burn < 0:
            v.append(f"sim.burn_in: must be >= 0 (got {burn!r})")
        if sim.duration > 0 and burn >= sim.duration:
            v.append(f"sim.burn_in: must be < duration "
                     f"(got {burn!r} >= {sim.duration!r})")
        if sim.n_trajectories < 1:
            v.append(f"sim.n_trajectories: must be >= 1 (got {sim.n_trajectories!r})")
        if sim.batches < 1:
            v.append(f"sim.batches: must be >= 1 (got {sim.batches!r})")
        if sim.store_trajectories < 0:
            v.append(f"sim.store_trajectories: must be >= 0 "
                     f"(got {sim.store_trajectories!r})")
        if not isinstance(sim.seed, (int, np.integer)) or sim.seed < 0:
            v.append(f"sim.seed: must be a nonnegative integer (got {sim.seed!r})")

    return v


def validate(system: SystemParams,
             noise: NoiseSpec,
             sim: Optional[SimConfig] = None) -> Bundle:
    """Cross-check a parameter triple and return an immutable Bundle.

    Raises ConfigError carrying every violated invariant (field name and
    bound in each message). A burn-in below the recommended 5/kappa only
    warns. When sim is omitted a minimal placeholder SimConfig is stored
    (analytic-only workflows never read it).
    """
    violations = collect_violations(system, noise, sim)
    if violations:
        raise ConfigError(violations)

    if system.pump_rate is None:
        system = SystemParams(
            kappa=system.kappa,
            delta=system.delta,
            pump_rate=pump_rate_from_power(system.laser_power,
                                           system.laser_wavelength,
                                           system.kappa),
            laser_power=system.laser_power,
            laser_wavelength=system.laser_wavelength,
        )

    if sim is None:
        sim_resolved = SimConfig(dt=0.01 / system.kappa, duration=1.0 / system.kappa,
                                 burn_in=0.0, n_trajectories=1)
    else:
        burn = sim.resolved_burn_in(system.kappa)
        if burn < 5.0 / system.kappa:
            warnings.warn(
                f"burn_in = {burn:.3e} s is below the recommended 5/kappa "
                f"= {5.0 / system.kappa:.3e} s; early-transient bias possible",
                stacklevel=2,
            )
        sim_resolved = SimConfig(
            dt=float(sim.dt),
            duration=float(sim.duration),
            burn_in=burn,
            n_trajectories=int(sim.n_trajectories),
            seed=int(sim.seed),
            vacuum_noise=bool(sim.vacuum_noise),
            batches=int(sim.batches),
            store_trajectories=int(sim.store_trajectories),
        )

    return Bundle(system=system, noise=noise, sim=sim_resolved)


def tabulated_from_arrays(omega: Sequence[float], s: Sequence[float]) -> NoiseSpec:
    """Convenience constructor for a tabulated NoiseSpec from array-likes."""
    return NoiseSpec(
        kind="tabulated",
        spectrum_omega=tuple(float(x) for x in omega),
        spectrum_s=tuple(float(x) for x in s),
    )
