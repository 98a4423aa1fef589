"""Stochastic integration of the driven cavity mode.

Frames
------
``displaced``
    Fluctuation mode around alpha; phase noise enters additively as
    i alpha dphi, damping is k' = kappa + gamma_l.
``lab``
    Full amplitude with the pump E exp(-i phi(t)); damping kappa. Only
    sensible at rescaled pump (|alpha|^2 <= 1e6, overflow guarded).
    Fluctuation statistics are taken on the phase-referenced amplitude
    a exp(i phi), whose mean converges to E/(kappa+gamma_l+i delta);
    the raw lab-frame mean wanders with the undiffused phase and is not
    ergodic on realistic run lengths.
``twin``
    Differential mode of two cavities sharing one pump: the additive
    phase drive cancels, the multiplicative i dphi rotation survives.
``two_cavity_lab``
    Both lab-frame cavities with one shared phase path and independent
    vacuums; statistics reported for a, b and (a+-b)/sqrt(2).

Update rule (exact in distribution at any step size)
----------------------------------------------------
a' = exp(-lam dt) a + i alpha dphi g + sqrt(kappa) g w,
g = sqrt((1 - exp(-2 Re(lam) dt)) / (2 Re(lam) dt)),

so the drift factor is exact and every per-step second moment matches
the continuous equation; with all noise zero a(t) = exp(-lam t) a(0)
exactly. The sqrt(kappa) w term is sqrt(2 kappa) times the symmetrized
vacuum increment w/sqrt(2). The lab pump is integrated at the midpoint
phase phi + dphi/2 with the exact filter h = (1 - exp(-lam dt))/lam.
The twin update is a' = exp(i dphi) (exp(-lam dt) a + sqrt(kappa) g w);
internally the rotation is peeled off by the accumulated phase, which
turns all four frames into one constant-coefficient recurrence (see
kernels).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from . import noise as noise_mod
from .analytic import mean_amplitude
from .core import Bundle
from .errors import ConfigError, DivergenceError

__all__ = [
    "MODES",
    "THREADS_ENV",
    "Trajectory",
    "EnsembleStats",
    "EnsembleResult",
    "step_displaced",
    "step_lab",
    "step_twin",
    "integrate_displaced",
    "integrate_lab",
    "integrate_twin",
    "integrate_two_cavity_lab",
    "run_ensemble",
]

MODES = ("displaced", "lab", "twin", "two_cavity_lab")
THREADS_ENV = "PHASENOISE_THREADS"

# |a| beyond OVERFLOW_FACTOR * max(1, |alpha|) aborts a trajectory
OVERFLOW_FACTOR = 1e6
# more than this fraction of divergent trajectories fails the run
DIVERGENT_FRACTION = 0.01


def _decay_scale(k_eff: float, dt: float) -> float:
    # sqrt((1 - exp(-2 k dt)) / (2 k dt)); -> 1 in the Euler limit
    x = 2.0 * k_eff * dt
    if x == 0.0:
        return 1.0
    return math.sqrt(-math.expm1(-x) / x)


def _displaced_coeffs(kappa, gamma_l, delta, alpha, dt):
    lam = complex(kappa + gamma_l, delta)
    f = complex(np.exp(-lam * dt))
    g = _decay_scale(kappa + gamma_l, dt)
    return f, 1j * alpha * g, math.sqrt(kappa) * g


def _lab_coeffs(kappa, delta, pump, dt):
    lam = complex(kappa, delta)
    f = complex(np.exp(-lam * dt))
    h = (1.0 - f) / lam
    g = _decay_scale(kappa, dt)
    return f, pump * h, math.sqrt(kappa) * g


def _twin_coeffs(kappa, gamma_l, delta, dt):
    lam = complex(kappa + gamma_l, delta)
    f = complex(np.exp(-lam * dt))
    g = _decay_scale(kappa + gamma_l, dt)
    return f, math.sqrt(kappa) * g


def step_displaced(a, dt, kappa, gamma_l, delta, alpha, dphi, w=None):
    """One exact update of the displaced fluctuation mode."""
    f, c_phi, c_vac = _displaced_coeffs(kappa, gamma_l, delta, alpha, dt)
    u = c_phi * np.asarray(dphi)
    if w is not None:
        u = u + c_vac * np.asarray(w)
    return f * np.asarray(a) + u


def step_lab(a, dt, kappa, delta, pump, phi, dphi, w=None):
    """One exact update of the lab-frame amplitude; pump at midpoint phase."""
    f, c_pump, c_vac = _lab_coeffs(kappa, delta, pump, dt)
    u = c_pump * np.exp(-1j * (np.asarray(phi) + 0.5 * np.asarray(dphi)))
    if w is not None:
        u = u + c_vac * np.asarray(w)
    return f * np.asarray(a) + u


def step_twin(a, dt, kappa, gamma_l, delta, dphi, w=None):
    """One exact update of the twin differential mode (rotation exact)."""
    f, c_vac = _twin_coeffs(kappa, gamma_l, delta, dt)
    inner = f * np.asarray(a)
    if w is not None:
        inner = inner + c_vac * np.asarray(w)
    return np.exp(1j * np.asarray(dphi)) * inner


@dataclass(frozen=True)
class Trajectory:
    """Sampled path: len(t) = n_steps + 1 = len(a); phi/b where relevant."""

    t: np.ndarray
    a: np.ndarray
    phi: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None


def _times(n_steps: int, dt: float) -> np.ndarray:
    return np.arange(n_steps + 1) * dt


def integrate_displaced(bundle: Bundle, path: noise_mod.NoisePath,
                        a0: complex = 0j) -> Trajectory:
    sy, sp = bundle.system, bundle.noise
    alpha = mean_amplitude(sy, sp.white_equivalent_gamma_l())
    f, c_phi, c_vac = _displaced_coeffs(sy.kappa, sp.white_equivalent_gamma_l(),
                                        sy.delta, alpha, path.dt)
    u = c_phi * path.dphi
    if path.w is not None:
        u = u + c_vac * path.w
    a = np.empty(path.n_steps + 1, dtype=np.complex128)
    a[0] = a0
    kernels.recurrence(a0, f, u, out=a[1:])
    return Trajectory(t=_times(path.n_steps, path.dt), a=a)


def integrate_lab(bundle: Bundle, path: noise_mod.NoisePath,
                  a0: Optional[complex] = None) -> Trajectory:
    sy, sp = bundle.system, bundle.noise
    gamma_w = sp.white_equivalent_gamma_l()
    if a0 is None:
        a0 = mean_amplitude(sy, gamma_w)  # phi(0) = 0
    pump = sy.resolved_pump_rate()
    f, c_pump, c_vac = _lab_coeffs(sy.kappa, sy.delta, pump, path.dt)
    phi = np.empty(path.n_steps + 1)
    phi[0] = 0.0
    np.cumsum(path.dphi, out=phi[1:])
    u = c_pump * np.exp(-1j * (phi[:-1] + 0.5 * path.dphi))
    if path.w is not None:
        u = u + c_vac * path.w
    a = np.empty(path.n_steps + 1, dtype=np.complex128)
    a[0] = a0
    kernels.recurrence(a0, f, u, out=a[1:])
    return Trajectory(t=_times(path.n_steps, path.dt), a=a, phi=phi)


def integrate_twin(bundle: Bundle, path: noise_mod.NoisePath,
                   a0: complex = 0j) -> Trajectory:
    sy, sp = bundle.system, bundle.noise
    f, c_vac = _twin_coeffs(sy.kappa, sp.white_equivalent_gamma_l(),
                            sy.delta, path.dt)
    # peel the multiplicative rotation: with Phi_k = sum_{j<k} dphi_j,
    # y = a exp(-i Phi) obeys y' = f y + c_vac w exp(-i Phi)
    phi_acc = np.empty(path.n_steps + 1)
    phi_acc[0] = 0.0
    np.cumsum(path.dphi, out=phi_acc[1:])
    rot = np.exp(-1j * phi_acc)
    if path.w is not None:
        u = c_vac * (path.w * rot[:-1])
    else:
        u = np.zeros(path.n_steps, dtype=np.complex128)
    y = kernels.recurrence(a0, f, u)
    a = np.empty(path.n_steps + 1, dtype=np.complex128)
    a[0] = a0
    np.conjugate(rot[1:], out=rot[1:])
    a[1:] = y * rot[1:]
    return Trajectory(t=_times(path.n_steps, path.dt), a=a, phi=phi_acc)


def integrate_two_cavity_lab(bundle: Bundle, path: noise_mod.NoisePath,
                             w_b: Optional[np.ndarray],
                             a0: Optional[complex] = None) -> Trajectory:
    """Both cavities: shared phase path, independent vacuums."""
    traj_a = integrate_lab(bundle, path, a0=a0)
    path_b = noise_mod.NoisePath(dt=path.dt, dphi=path.dphi, w=w_b)
    traj_b = integrate_lab(bundle, path_b, a0=a0)
    return Trajectory(t=traj_a.t, a=traj_a.a, phi=traj_a.phi, b=traj_b.a)


@dataclass(frozen=True)
class EnsembleStats:
    """Batched estimators for one reported component.

    occupation is <|x - <x>|^2> - vacuum_offset with the offset 1/2 iff
    vacuum fluctuations were simulated. Negative estimates within error
    bars are reported as is, never clipped. Standard errors come from
    the scatter of per-trajectory batch means and scale as 1/sqrt(total
    batches); batches span several cavity lifetimes each.
    """

    label: str
    frame: str
    n_trajectories: int
    n_batches: int
    mean_amplitude: complex
    mean_amplitude_stderr: float
    second_moment: float
    second_moment_stderr: float
    occupation: float
    occupation_stderr: float
    vacuum_offset: float


@dataclass(frozen=True)
class EnsembleResult:
    mode: str
    stats: dict
    n_divergent: int
    rng: dict
    alpha: complex
    n_steps: int
    burn_steps: int
    batch_length: int
    trajectories: tuple = ()


def _worker_count(requested: Optional[int]) -> int:
    cap_raw = os.environ.get(THREADS_ENV)
    cap = None
    if cap_raw is not None and cap_raw.strip():
        try:
            cap = int(cap_raw)
        except ValueError:
            cap = -1
        if cap < 1:
            raise ConfigError(
                [f"{THREADS_ENV}: must be a positive integer (got {cap_raw!r})"]
            )
    if requested is None:
        requested = min(4, os.cpu_count() or 1)
    if requested < 1:
        raise ConfigError([f"workers: must be >= 1 (got {requested!r})"])
    return min(requested, cap) if cap is not None else requested


def _batch_means(x: np.ndarray, start: int, n_batches: int, length: int):
    seg = x[start:start + n_batches * length]
    blocks = seg.reshape(n_batches, length)
    return blocks.mean(axis=1), (blocks.real ** 2 + blocks.imag ** 2).mean(axis=1)


def _component_stats(label, frame, amp, sq, offset, n_ok):
    amp = np.concatenate(amp)
    sq = np.concatenate(sq)
    b_tot = amp.shape[0]
    m_amp = complex(amp.mean())
    if b_tot > 1:
        se_amp = math.sqrt((amp.real.var(ddof=1) + amp.imag.var(ddof=1)) / b_tot)
    else:
        se_amp = math.inf
    m_sq = float(sq.mean())
    se_sq = float(sq.std(ddof=1) / math.sqrt(b_tot)) if b_tot > 1 else math.inf
    # per-batch <|x - M|^2> with the global mean M; identical in expectation
    # to m_sq - |M|^2 but carries the right covariance into the std error
    centered = sq - 2.0 * (np.conj(m_amp) * amp).real + abs(m_amp) ** 2
    occ = float(centered.mean() - offset)
    se_occ = float(centered.std(ddof=1) / math.sqrt(b_tot)) if b_tot > 1 else math.inf
    return EnsembleStats(
        label=label, frame=frame, n_trajectories=n_ok, n_batches=b_tot,
        mean_amplitude=m_amp, mean_amplitude_stderr=se_amp,
        second_moment=m_sq, second_moment_stderr=se_sq,
        occupation=occ, occupation_stderr=se_occ, vacuum_offset=offset,
    )


def run_ensemble(bundle: Bundle, mode: str,
                 workers: Optional[int] = None) -> EnsembleResult:
    """Monte Carlo ensemble in the requested frame.

    Per-trajectory Philox streams make the result independent of worker
    scheduling: accumulation slots are indexed by trajectory and merged
    in a fixed order, so a fixed seed reproduces identical numbers at
    any worker count.
    """
    if mode not in MODES:
        raise ConfigError([f"mode: must be one of {MODES} (got {mode!r})"])
    sy, sp, sim = bundle.system, bundle.noise, bundle.sim
    gamma_w = sp.white_equivalent_gamma_l()
    alpha = mean_amplitude(sy, gamma_w)
    steps = sim.n_steps()
    burn_steps = int(round(sim.resolved_burn_in(sy.kappa) / sim.dt))
    n_post = steps - burn_steps
    if n_post < sim.batches:
        raise ConfigError(
            [f"sim.batches: only {n_post} post-burn-in samples for "
             f"{sim.batches} batches"]
        )
    length = n_post // sim.batches
    start = burn_steps + 1 + (n_post - sim.batches * length)
    guard = OVERFLOW_FACTOR * max(1.0, abs(alpha))

    if mode == "displaced":
        components = (("a", "displaced"),)
    elif mode == "lab":
        components = (("a", "lab_referenced"),)
    elif mode == "twin":
        components = (("diff", "twin"),)
    else:
        components = (("a", "lab_referenced"), ("b", "lab_referenced"),
                      ("sum", "lab_referenced"), ("diff", "lab_referenced"))

    def one(i: int):
        rng_phase = noise_mod.stream(sim.seed, 3 * i)
        dphi = noise_mod.gen_phase(rng_phase, steps, sim.dt, sp)
        w = None
        if sim.vacuum_noise:
            w = noise_mod.gen_vacuum(noise_mod.stream(sim.seed, 3 * i + 1),
                                     steps, sim.dt)
        path = noise_mod.NoisePath(dt=sim.dt, dphi=dphi, w=w)

        if mode == "displaced":
            traj = integrate_displaced(bundle, path)
            series = {"a": traj.a}
        elif mode == "lab":
            traj = integrate_lab(bundle, path)
            series = {"a": traj.a * np.exp(1j * traj.phi)}
        elif mode == "twin":
            traj = integrate_twin(bundle, path)
            series = {"diff": traj.a}
        else:
            w_b = None
            if sim.vacuum_noise:
                w_b = noise_mod.gen_vacuum(noise_mod.stream(sim.seed, 3 * i + 2),
                                           steps, sim.dt)
            traj = integrate_two_cavity_lab(bundle, path, w_b)
            rot = np.exp(1j * traj.phi)
            a_ref = traj.a * rot
            b_ref = traj.b * rot
            inv_sqrt2 = 1.0 / math.sqrt(2.0)
            series = {"a": a_ref, "b": b_ref,
                      "sum": (a_ref + b_ref) * inv_sqrt2,
                      "diff": (a_ref - b_ref) * inv_sqrt2}

        diverged = False
        for x in series.values():
            if not np.all(np.isfinite(x.real)) or not np.all(np.isfinite(x.imag)):
                diverged = True
                break
            if np.max(np.abs(x)) > guard:
                diverged = True
                break
        if diverged:
            return None, None
        stats = {lbl: _batch_means(series[lbl], start, sim.batches, length)
                 for lbl, _ in components}
        keep = traj if i < sim.store_trajectories else None
        return stats, keep

    n_traj = sim.n_trajectories
    eff_workers = _worker_count(workers)
    slots = [None] * n_traj
    if eff_workers == 1 or n_traj == 1:
        for i in range(n_traj):
            slots[i] = one(i)
    else:
        with ThreadPoolExecutor(max_workers=eff_workers) as ex:
            for i, res in enumerate(ex.map(one, range(n_traj))):
                slots[i] = res

    n_div = sum(1 for s, _ in slots if s is None)
    if n_div > DIVERGENT_FRACTION * n_traj:
        raise DivergenceError(
            f"{n_div} of {n_traj} trajectories diverged "
            f"(> {DIVERGENT_FRACTION:.0%}); first guard |a| > {guard:.3e}"
        )
    n_ok = n_traj - n_div
    if n_ok == 0:
        raise DivergenceError("all trajectories diverged")

    offset = 0.5 if sim.vacuum_noise else 0.0
    out = {}
    for lbl, frame in components:
        amp = [s[lbl][0] for s, _ in slots if s is not None]
        sq = [s[lbl][1] for s, _ in slots if s is not None]
        out[lbl] = _component_stats(lbl, frame, amp, sq, offset, n_ok)

    stored = tuple(t for _, t in slots if t is not None)
    rng_meta = {
        "algorithm": noise_mod.RNG_ALGORITHM,
        "seed": int(sim.seed),
        "streams_per_trajectory": noise_mod.STREAMS_PER_TRAJECTORY,
        "scheme": "Philox(key=seed).jumped(3*trajectory + channel)",
        "backend": kernels.active_backend(),
    }
    return EnsembleResult(
        mode=mode, stats=out, n_divergent=n_div, rng=rng_meta, alpha=alpha,
        n_steps=steps, burn_steps=burn_steps, batch_length=length,
        trajectories=stored,
    )
