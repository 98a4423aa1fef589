"""Noise path generation and spectral estimation.

Stream discipline
-----------------
All randomness comes from counter-based Philox streams. ``stream(seed,
index)`` returns an independent generator for any (seed, index) pair via
``Philox(key=seed).jumped(index)``; the ensemble runner assigns three
stream indices per trajectory (phase, vacuum A, vacuum B) so that a
two-cavity run shares its phase path with the corresponding
single-cavity run sample for sample.

Conventions
-----------
Vacuum increments w are complex Gaussian with E[|w|^2] = dt (each
quadrature carries spectral density 1/2; the integrators scale by
1/sqrt(2) to realize the symmetrized vacuum). White phase increments
have Var = 2 gamma_l dt. Colored phase noise is synthesized either by
circulant FFT synthesis on the resolvable band (tabulated spectra) or by
an exact-update complex OU filter (Lorentzian spectra, streamable).
Spectra are two-sided in angular frequency with Var(phidot) =
integral S(omega) domega/(2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import welch

from .core import NoiseSpec
from .errors import ConfigError

__all__ = [
    "RNG_ALGORITHM",
    "stream",
    "NoisePath",
    "PsdEstimate",
    "gen_vacuum",
    "gen_phase_white",
    "gen_phase_colored",
    "gen_phase",
    "estimate_psd",
    "read_spectrum_csv",
    "write_spectrum_csv",
]

RNG_ALGORITHM = "numpy.random.Philox"

# stream indices per trajectory: phase, vacuum A, vacuum B
STREAMS_PER_TRAJECTORY = 3


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent reproducible generator for (seed, index).

    Philox is counter based; jumped(index) offsets the counter by
    index * 2^128, so distinct indices can never overlap.
    """
    if index < 0:
        raise ConfigError([f"stream index must be >= 0 (got {index!r})"])
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(int(index)))


@dataclass(frozen=True)
class NoisePath:
    """Increment arrays driving one trajectory.

    dphi has one entry per step. w is None when vacuum fluctuations are
    switched off. For white noise the sample variance of dphi converges
    to 2 gamma_l dt.
    """

    dt: float
    dphi: np.ndarray
    w: Optional[np.ndarray] = None

    @property
    def n_steps(self) -> int:
        return int(self.dphi.shape[0])


def gen_vacuum(rng: np.random.Generator, n_steps: int, dt: float) -> np.ndarray:
    """Complex vacuum increments, E[w]=0, E[|w|^2]=dt, E[w^2]=0, iid."""
    x = rng.standard_normal(2 * n_steps)
    w = (x[0::2] + 1j * x[1::2]) * math.sqrt(dt / 2.0)
    return w


def gen_phase_white(rng: np.random.Generator, n_steps: int, dt: float,
                    gamma_l: float) -> np.ndarray:
    """Wiener phase increments, Var = 2 gamma_l dt, iid."""
    if gamma_l < 0:
        raise ConfigError([f"gamma_l must be >= 0 (got {gamma_l!r})"])
    return rng.standard_normal(n_steps) * math.sqrt(2.0 * gamma_l * dt)


def _synth_tabulated(rng, n_steps, dt, spec: NoiseSpec) -> np.ndarray:
    """Circulant spectral synthesis of phidot over the resolvable band.

    Requires the tabulated grid to cover [2 pi/(N dt), pi/dt]; DC uses
    the spectrum clamped to its lowest knot. Needs the whole path length
    up front (documented; the Lorentzian kind streams instead).
    """
    n = int(n_steps)
    grid = np.asarray(spec.spectrum_omega, dtype=float)
    w_min = 2.0 * math.pi / (n * dt)
    w_max = math.pi / dt
    if grid[0] > w_min or grid[-1] < w_max:
        raise ConfigError(
            [f"tabulated spectrum must cover the resolvable band "
             f"[{w_min:.6e}, {w_max:.6e}] rad/s; tabulated range is "
             f"[{grid[0]:.6e}, {grid[-1]:.6e}]"]
        )
    freqs = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    s_vals = spec.evaluate_spectrum(freqs)
    # E[|X_j|^2] = N S(w_j)/dt, split over two quadratures for inner bins
    amp = np.sqrt(s_vals * n / dt)
    coef = np.empty(freqs.shape[0], dtype=np.complex128)
    g = rng.standard_normal(2 * freqs.shape[0])
    coef.real = g[0::2]
    coef.imag = g[1::2]
    coef[1:] *= amp[1:] / math.sqrt(2.0)
    coef[0] = g[0] * amp[0]  # DC bin is real
    if n % 2 == 0:
        coef[-1] = coef[-1].real * math.sqrt(2.0)  # Nyquist bin is real
    phidot = np.fft.irfft(coef, n=n)
    return phidot * dt


def _ou_filter_state(rng, n_steps, dt, spec: NoiseSpec):
    """Exact-update complex OU path z with E|z|^2 = total_strength.

    phidot = sqrt(2) Re z has the two-peak Lorentzian spectrum of the
    spec. Returns z sampled at the start of each step.
    """
    from . import kernels  # local import avoids a cycle at package init

    p_tot = spec.total_strength
    g = spec.half_width
    w0 = spec.center_frequency
    f = np.exp(-(g + 1j * w0) * dt)
    sig = math.sqrt(p_tot * (1.0 - math.exp(-2.0 * g * dt)))
    x = rng.standard_normal(2 * (n_steps + 1))
    u = (x[0::2] + 1j * x[1::2]) / math.sqrt(2.0)  # E|u|^2 = 1
    z0 = math.sqrt(p_tot) * u[0]  # stationary start
    z_rest = kernels.recurrence(z0, f, sig * u[1:])
    z = np.empty(n_steps, dtype=np.complex128)
    z[0] = z0
    z[1:] = z_rest[: n_steps - 1]
    return z


def gen_phase_colored(rng: np.random.Generator, n_steps: int, dt: float,
                      spec: NoiseSpec) -> np.ndarray:
    """Phase increments for a colored spectrum (lorentzian or tabulated)."""
    if spec.kind == "lorentzian":
        z = _ou_filter_state(rng, n_steps, dt, spec)
        return math.sqrt(2.0) * z.real * dt
    if spec.kind == "tabulated":
        return _synth_tabulated(rng, n_steps, dt, spec)
    raise ConfigError(
        [f"gen_phase_colored handles kinds lorentzian/tabulated (got {spec.kind!r})"]
    )


def gen_phase(rng: np.random.Generator, n_steps: int, dt: float,
              spec: NoiseSpec) -> np.ndarray:
    """Dispatch on spec.kind; 'none' yields zeros."""
    if spec.kind == "none":
        return np.zeros(n_steps)
    if spec.kind == "white":
        return gen_phase_white(rng, n_steps, dt, spec.gamma_l)
    return gen_phase_colored(rng, n_steps, dt, spec)


@dataclass(frozen=True)
class PsdEstimate:
    """Welch estimate of a two-sided spectrum in angular frequency.

    stderr is S/sqrt(n_segments) per bin. Invariants: S >= 0 everywhere;
    the band integral recovers the sample variance within 5 percent
    (Parseval check, exercised in the test suite).
    """

    omega: np.ndarray
    s: np.ndarray
    stderr: np.ndarray
    n_segments: int
    dt: float

    def band_integral(self) -> float:
        """integral S domega/(2 pi) over [-w_max, w_max], trapezoid.

        The stored axis is one-sided with two-sided values, so the
        symmetric extension doubles the trapezoid sum. Equals Var(x) for
        input resolved within the band.
        """
        return float(np.trapezoid(self.s, self.omega) / math.pi)


def estimate_psd(samples, dt: float, segment_length: int,
                 overlap: float = 0.5) -> PsdEstimate:
    """Welch PSD with a Hann window.

    Normalization: a white sequence with variance rate q (Var = q/dt per
    sample) estimates the flat two-sided spectrum S = q. One-sided
    scipy output is folded back to the two-sided convention (inner bins
    halved, DC and Nyquist carried through).
    """
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if not (dt > 0):
        raise ConfigError([f"dt must be > 0 (got {dt!r})"])
    if segment_length < 8:
        raise ConfigError([f"segment_length must be >= 8 (got {segment_length!r})"])
    if segment_length > n:
        raise ConfigError(
            [f"segment_length must be <= number of samples "
             f"({segment_length!r} > {n})"]
        )
    if not (0.0 <= overlap < 1.0):
        raise ConfigError([f"overlap must be in [0, 1) (got {overlap!r})"])

    noverlap = int(round(overlap * segment_length))
    if noverlap >= segment_length:
        noverlap = segment_length - 1
    freqs, pxx = welch(x, fs=1.0 / dt, window="hann", nperseg=segment_length,
                       noverlap=noverlap, detrend=False, scaling="density",
                       return_onesided=True)
    s = pxx / 2.0
    s[0] = pxx[0]  # scipy does not double DC
    if segment_length % 2 == 0:
        s[-1] = pxx[-1]  # nor Nyquist
    step = segment_length - noverlap
    n_segments = 1 + (n - segment_length) // step
    stderr = s / math.sqrt(n_segments)
    return PsdEstimate(omega=2.0 * math.pi * freqs, s=s, stderr=stderr,
                       n_segments=n_segments, dt=dt)


def read_spectrum_csv(path) -> NoiseSpec:
    """Load a two-column (omega_rad_per_s, S) CSV into a tabulated spec."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = [c.strip() for c in header.split(",")]
        if cols[:2] != ["omega_rad_per_s", "S"]:
            raise ConfigError(
                [f"{path}: expected header 'omega_rad_per_s,S' (got {header!r})"]
            )
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    if rows.shape[1] < 2:
        raise ConfigError([f"{path}: need two columns (omega_rad_per_s, S)"])
    grid, vals = rows[:, 0], rows[:, 1]
    problems = []
    if grid.size < 2:
        problems.append("need at least 2 rows")
    if not np.all(np.diff(grid) > 0):
        problems.append("omega_rad_per_s must be strictly increasing")
    if grid.size and grid[0] < 0:
        problems.append("omega_rad_per_s must be >= 0 (symmetry is implicit)")
    if not np.all(vals >= 0):
        problems.append("S must be >= 0")
    if problems:
        raise ConfigError([f"{path}: {p}" for p in problems])
    return NoiseSpec(
        kind="tabulated",
        spectrum_omega=tuple(float(v) for v in grid),
        spectrum_s=tuple(float(v) for v in vals),
    )


def write_spectrum_csv(path, omega, s) -> None:
    """Emit the same two-column format read_spectrum_csv ingests.

    Floats are written with repr: shortest digits that round-trip.
    """
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("omega_rad_per_s,S\n")
        for w, v in zip(omega, s):
            fh.write(f"{float(w)!r},{float(v)!r}\n")
