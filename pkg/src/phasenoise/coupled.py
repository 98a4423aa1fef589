"""Linearized cavity-mirror covariance dynamics with laser phase noise.

Quadrature ordering is (X, Y, x, p): cavity amplitude/phase, mirror
position/momentum, all dimensionless with vacuum variance 1/2. The
drift is the standard linearized optomechanics form,

    dX/dt = -k' X + Delta Y
    dY/dt = -Delta X - k' Y + g x
    dx/dt =  omega_m p
    dp/dt = -omega_m x - gamma_m p + g X

with k' = kappa + gamma_l (white noise; plain kappa otherwise) and g
the effective linearized coupling (vacuum coupling times |alpha|,
real by phase choice). Laser phase noise drives the cavity quadratures
with the weight vector v = (-sqrt(2) Im alpha, sqrt(2) Re alpha, 0, 0)
times phidot.

Diffusion (in the V' = AV + VA^T + D convention):
vacuum diag(kappa, kappa, 0, 0); mechanical bath gamma_m (2 n_th + 1)
on p; white phase noise 2 gamma_l v v^T. A Lorentzian phase spectrum
has no white closure; the state is augmented with the two quadratures
of the complex Ornstein-Uhlenbeck filter state z (phidot = sqrt(2) Re z)
giving a 6x6 model. Tabulated spectra are handled by the spectral route
only.

Two independent steady-state routes are provided: solve_steady (dense
Lyapunov solve, residual-checked) and solve_spectral (frequency-domain
transfer-function integration of the physical 4x4 block with the exact
S(omega) weight), which must agree and serve as cross-oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import solve_continuous_lyapunov

from .analytic import CODATA, mean_amplitude
from .core import NoiseSpec, SystemParams
from .errors import ConfigError, InstabilityError, NumericalError

__all__ = [
    "MechanicalParams",
    "CoupledModel",
    "CoolingReport",
    "build_model",
    "solve_steady",
    "solve_spectral",
]

_RESIDUAL_RTOL = 1e-10
_PHYSICALITY_TOL = -1e-9
# integration band for the spectral route, in units of the largest rate
_SPECTRAL_BAND_FACTOR = 2000.0


@dataclass(frozen=True)
class MechanicalParams:
    """Mirror oscillator: frequency, damping, bath occupation, coupling.

    All rates angular (rad/s); g couples the amplitude quadrature to the
    position as in the drift above.
    """

    omega_m: float
    gamma_m: float
    n_th: float
    g: float

    def check(self) -> list[str]:
        v = []
        if not (self.omega_m > 0):
            v.append(f"mechanical.omega_m: must be > 0 (got {self.omega_m!r})")
        if not (self.gamma_m > 0):
            v.append(f"mechanical.gamma_m: must be > 0 (got {self.gamma_m!r})")
        if not (self.n_th >= 0):
            v.append(f"mechanical.n_th: must be >= 0 (got {self.n_th!r})")
        if not math.isfinite(self.g):
            v.append(f"mechanical.g: must be finite (got {self.g!r})")
        return v


@dataclass(frozen=True)
class CoupledModel:
    """Drift/diffusion matrices plus the ingredients of the spectral route."""

    a: np.ndarray              # full drift (4x4, or 6x6 when augmented)
    d: np.ndarray              # full diffusion
    a_phys: np.ndarray         # physical 4x4 block
    d_static: np.ndarray       # vacuum + mechanical diffusion, 4x4
    phase_weights: np.ndarray  # v: phidot coupling into (X, Y, x, p)
    alpha: complex
    system: SystemParams
    noise: NoiseSpec
    mechanical: MechanicalParams
    augmented: bool
    labels: tuple

    @property
    def has_lyapunov_closure(self) -> bool:
        return self.noise.kind in ("none", "white", "lorentzian")


@dataclass(frozen=True)
class CoolingReport:
    """Steady-state occupations and the phase-noise share of each.

    The share is the difference against a solve with the phase channel
    zeroed (damping kept). Both effective-temperature conversions of the
    mirror share are reported since either quantum (detuning or
    mechanical frequency) can be argued for; t_eff_delta is NaN when
    delta <= 0. residual_rel is NaN for the spectral route.
    """

    method: str
    n_cav: float
    n_m: float
    share_cav: float
    share_m: float
    t_eff_delta: float
    t_eff_omega_m: float
    residual_rel: float
    cov: np.ndarray


def build_model(system: SystemParams, spec: NoiseSpec,
                mech: MechanicalParams) -> CoupledModel:
    """Assemble drift and diffusion for the chosen noise kind."""
    problems = mech.check()
    if problems:
        raise ConfigError(problems)
    gamma_w = spec.white_equivalent_gamma_l()
    alpha = mean_amplitude(system, gamma_w)
    k_eff = system.kappa + gamma_w
    delta = system.delta

    dim = 6 if spec.kind == "lorentzian" else 4
    a = np.zeros((dim, dim))
    d = np.zeros((dim, dim))

    a[0, 0] = -k_eff
    a[0, 1] = delta
    a[1, 0] = -delta
    a[1, 1] = -k_eff
    a[1, 2] = mech.g
    a[2, 3] = mech.omega_m
    a[3, 2] = -mech.omega_m
    a[3, 3] = -mech.gamma_m
    a[3, 0] = mech.g

    d[0, 0] = system.kappa
    d[1, 1] = system.kappa
    d[3, 3] = mech.gamma_m * (2.0 * mech.n_th + 1.0)
    d_static = d[:4, :4].copy()

    v = np.array([-math.sqrt(2.0) * alpha.imag,
                  math.sqrt(2.0) * alpha.real, 0.0, 0.0])

    labels: tuple = ("X", "Y", "x", "p")
    if spec.kind == "white" and spec.gamma_l > 0:
        d[:4, :4] += 2.0 * spec.gamma_l * np.outer(v, v)
    elif spec.kind == "lorentzian":
        g_hw = spec.half_width
        w0 = spec.center_frequency
        p_tot = spec.total_strength
        # filter block: z = zr + i zi, dz = -(g+iw0) z dt + sqrt(2 g P) dB
        a[4, 4] = -g_hw
        a[4, 5] = w0
        a[5, 4] = -w0
        a[5, 5] = -g_hw
        d[4, 4] = g_hw * p_tot
        d[5, 5] = g_hw * p_tot
        # phidot = sqrt(2) zr enters through the phase weights
        a[0, 4] = math.sqrt(2.0) * v[0]
        a[1, 4] = math.sqrt(2.0) * v[1]
        labels = ("X", "Y", "x", "p", "zr", "zi")

    return CoupledModel(
        a=a, d=d, a_phys=a[:4, :4].copy(), d_static=d_static,
        phase_weights=v, alpha=alpha, system=system, noise=spec,
        mechanical=mech, augmented=(dim == 6), labels=labels,
    )


def _check_hurwitz(a: np.ndarray) -> None:
    ev = np.linalg.eigvals(a)
    if np.any(ev.real >= 0):
        raise InstabilityError(sorted(ev, key=lambda z: -z.real))


def _occupations(v4: np.ndarray):
    n_cav = (v4[0, 0] + v4[1, 1] - 1.0) / 2.0
    n_m = (v4[2, 2] + v4[3, 3] - 1.0) / 2.0
    return float(n_cav), float(n_m)


def _check_physical(v4: np.ndarray) -> None:
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.block([[j, np.zeros((2, 2))], [np.zeros((2, 2)), j]])
    m = v4 + 0.5j * omega
    lam_min = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
    if lam_min < _PHYSICALITY_TOL:
        raise NumericalError(
            f"covariance violates the uncertainty bound: min eig of "
            f"V + i Omega/2 is {lam_min:.3e} (tolerance {_PHYSICALITY_TOL:.0e})"
        )


def _zero_phase_channel(model: CoupledModel) -> CoupledModel:
    """Same drift (damping kept), phase noise channel removed."""
    a = model.a.copy()
    d = model.d.copy()
    if model.augmented:
        a[0, 4] = 0.0
        a[1, 4] = 0.0
    elif model.noise.kind == "white" and model.noise.gamma_l > 0:
        v = model.phase_weights
        d[:4, :4] -= 2.0 * model.noise.gamma_l * np.outer(v, v)
    return CoupledModel(
        a=a, d=d, a_phys=model.a_phys, d_static=model.d_static,
        phase_weights=model.phase_weights, alpha=model.alpha,
        system=model.system, noise=model.noise, mechanical=model.mechanical,
        augmented=model.augmented, labels=model.labels,
    )


def _lyapunov(a: np.ndarray, d: np.ndarray):
    v = solve_continuous_lyapunov(a, -d)
    v = (v + v.T) / 2.0
    resid = a @ v + v @ a.T + d
    d_norm = np.linalg.norm(d)
    rel = float(np.linalg.norm(resid) / d_norm) if d_norm > 0 else 0.0
    if rel > _RESIDUAL_RTOL:
        n = a.shape[0]
        kron = np.kron(np.eye(n), a) + np.kron(a, np.eye(n))
        cond = float(np.linalg.cond(kron))
        raise NumericalError(
            f"Lyapunov residual {rel:.3e} exceeds {_RESIDUAL_RTOL:.0e} "
            f"(Kronecker operator condition number {cond:.3e})"
        )
    return v, rel


def _temperatures(share_m: float, delta: float, omega_m: float):
    share = max(share_m, 0.0)
    t_delta = CODATA.hbar * delta * share / CODATA.k_b if delta > 0 else math.nan
    t_omega = CODATA.hbar * omega_m * share / CODATA.k_b
    return t_delta, t_omega


def solve_steady(model: CoupledModel) -> CoolingReport:
    """Dense Lyapunov route: AV + VA^T + D = 0, residual-checked."""
    if not model.has_lyapunov_closure:
        raise ConfigError(
            ["noise.kind: tabulated spectra have no finite-dimensional "
             "closure; use solve_spectral"]
        )
    _check_hurwitz(model.a)
    v, rel = _lyapunov(model.a, model.d)
    v4 = v[:4, :4]
    _check_physical(v4)
    n_cav, n_m = _occupations(v4)
    zeroed = _zero_phase_channel(model)
    v0, _ = _lyapunov(zeroed.a, zeroed.d)
    n_cav0, n_m0 = _occupations(v0[:4, :4])
    share_cav = n_cav - n_cav0
    share_m = n_m - n_m0
    t_delta, t_omega = _temperatures(share_m, model.system.delta,
                                     model.mechanical.omega_m)
    return CoolingReport(
        method="lyapunov", n_cav=n_cav, n_m=n_m,
        share_cav=share_cav, share_m=share_m,
        t_eff_delta=t_delta, t_eff_omega_m=t_omega,
        residual_rel=rel, cov=v,
    )


def _spectral_band(model: CoupledModel) -> float:
    sy, mech, spec = model.system, model.mechanical, model.noise
    scale = max(sy.kappa + abs(sy.delta), mech.omega_m + mech.gamma_m)
    if spec.kind == "lorentzian":
        scale = max(scale, spec.center_frequency + spec.half_width)
    elif spec.kind == "tabulated":
        scale = max(scale, float(spec.spectrum_omega[-1]))
    return _SPECTRAL_BAND_FACTOR * scale


def _spectral_points(model: CoupledModel, band: float) -> list:
    pts = {abs(model.system.delta), model.mechanical.omega_m}
    g_m = model.mechanical.gamma_m
    for s in (-5.0, 5.0):
        pts.add(model.mechanical.omega_m + s * g_m)
    if model.noise.kind == "lorentzian":
        pts.add(model.noise.center_frequency)
        pts.add(model.noise.center_frequency + model.noise.half_width)
        pts.add(max(model.noise.center_frequency - model.noise.half_width, 0.0))
    elif model.noise.kind == "tabulated":
        knots = list(model.noise.spectrum_omega)
        stride = max(1, len(knots) // 40)
        pts.update(knots[::stride])
    return sorted(p for p in pts if 0.0 < p < band)


def solve_spectral(model: CoupledModel, epsrel: float = 1e-10) -> CoolingReport:
    """Frequency-domain route on the physical 4x4 block.

    V_ii = 2 Int_0^B dw/2pi [H (D_static + S(w) v v^T) H^dag]_ii + tail,
    H(w) = (i w I - A)^-1. The integrand diagonals are even in w. The
    tail beyond the band B freezes the integrand at its leading D/w^2
    behaviour, contributing D_ii/(pi B).
    """
    a4 = model.a_phys
    _check_hurwitz(a4)
    band = _spectral_band(model)
    eye = np.eye(4)
    v_w = model.phase_weights
    spec = model.noise

    def diag_integrand(w):
        h = np.linalg.inv(1j * w * eye - a4)
        hv = h @ v_w
        phase = float(spec.evaluate_spectrum(w)) * (hv.real ** 2 + hv.imag ** 2)
        static = np.real(np.diag(h @ model.d_static @ h.conj().T))
        return np.concatenate([static + phase, phase])

    pts = _spectral_points(model, band)
    res, err = quad_vec(diag_integrand, 0.0, band, epsrel=epsrel,
                        points=pts or None, limit=400)
    res = res / math.pi  # 2 * integral / (2 pi)

    s_edge = float(spec.evaluate_spectrum(band))
    tail_full = (np.diag(model.d_static) + s_edge * v_w ** 2) / (math.pi * band)
    tail_phase = s_edge * v_w ** 2 / (math.pi * band)

    v_diag = res[:4] + tail_full
    share_diag = res[4:] + tail_phase

    n_cav = (v_diag[0] + v_diag[1] - 1.0) / 2.0
    n_m = (v_diag[2] + v_diag[3] - 1.0) / 2.0
    share_cav = (share_diag[0] + share_diag[1]) / 2.0
    share_m = (share_diag[2] + share_diag[3]) / 2.0
    t_delta, t_omega = _temperatures(share_m, model.system.delta,
                                     model.mechanical.omega_m)
    cov = np.diag(v_diag)
    return CoolingReport(
        method="spectral", n_cav=float(n_cav), n_m=float(n_m),
        share_cav=float(share_cav), share_m=float(share_m),
        t_eff_delta=t_delta, t_eff_omega_m=t_omega,
        residual_rel=math.nan, cov=cov,
    )
