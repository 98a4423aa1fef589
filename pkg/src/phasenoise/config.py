"""INI scenario files: parsing, canonical serialization, unit handling.

A scenario file holds up to six sections:

    [system]      kappa, delta, pump_rate | laser_power + laser_wavelength
    [noise]       kind (none/white/lorentzian/tabulated) and its fields
    [sim]         dt, duration, burn_in, n_trajectories, seed, vacuum_noise,
                  batches, store_trajectories, mode
    [mechanical]  omega_m, gamma_m, n_th, g
    [analytic]    threshold
    [sweep]       parameter, values | start + stop + num [+ spacing],
                  target (analytic/simulate/coupled)

Internally everything is angular (rad/s). With units="hz" the scalar
rate fields listed in RATE_FIELDS are read as ordinary frequencies and
multiplied by 2 pi on load (sweep values too, when the swept parameter
is a rate field). Times (dt, duration, burn_in) are always seconds;
laser_power is watts and laser_wavelength metres; tabulated spectrum
grids are always rad/s (the column name says so) and spectral densities
are per (rad/s)/2pi, which makes their numerical values identical in
both conventions.

serialize_scenario emits a canonical rad/s form with repr floats, so
parse(serialize(x)) reproduces x bit-exactly.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import NoiseSpec, SimConfig, SystemParams
from .coupled import MechanicalParams
from .errors import ConfigError
from .langevin import MODES
from .noise import read_spectrum_csv

__all__ = [
    "SweepSpec",
    "Scenario",
    "RATE_FIELDS",
    "parse_scenario_text",
    "load_scenario",
    "serialize_scenario",
    "apply_parameter",
]

TWO_PI = 2.0 * np.pi

# scalar fields scaled by 2 pi when the file is in hz units
RATE_FIELDS = {
    ("system", "kappa"),
    ("system", "delta"),
    ("system", "pump_rate"),
    ("noise", "gamma_l"),
    ("noise", "center_frequency"),
    ("noise", "half_width"),
    ("mechanical", "omega_m"),
    ("mechanical", "gamma_m"),
    ("mechanical", "g"),
}

_SYSTEM_KEYS = ("kappa", "delta", "pump_rate", "laser_power", "laser_wavelength")
_NOISE_KEYS = ("kind", "gamma_l", "total_strength", "center_frequency",
               "half_width", "spectrum_file", "spectrum_omega", "spectrum_s")
_SIM_KEYS = ("dt", "duration", "burn_in", "n_trajectories", "seed",
             "vacuum_noise", "batches", "store_trajectories", "mode")
_MECH_KEYS = ("omega_m", "gamma_m", "n_th", "g")
_ANALYTIC_KEYS = ("threshold",)
_SWEEP_KEYS = ("parameter", "values", "start", "stop", "num", "spacing",
               "target")
_SECTIONS = {
    "system": _SYSTEM_KEYS,
    "noise": _NOISE_KEYS,
    "sim": _SIM_KEYS,
    "mechanical": _MECH_KEYS,
    "analytic": _ANALYTIC_KEYS,
    "sweep": _SWEEP_KEYS,
}

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False, "on": True, "off": False}

_SWEEP_TARGETS = ("analytic", "simulate", "coupled")


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter ("section.key") over explicit values."""

    parameter: str
    values: tuple
    target: str = "analytic"


@dataclass(frozen=True)
class Scenario:
    system: SystemParams
    noise: NoiseSpec
    sim: Optional[SimConfig] = None
    mechanical: Optional[MechanicalParams] = None
    sweep: Optional[SweepSpec] = None
    threshold: float = 0.01
    mode: str = "displaced"


def _get_float(raw, section, key, problems):
    text = raw.pop(key, None)
    if text is None:
        return None
    try:
        return float(text)
    except ValueError:
        problems.append(f"{section}.{key}: not a number (got {text!r})")
        return None


def _get_int(raw, section, key, problems):
    text = raw.pop(key, None)
    if text is None:
        return None
    try:
        return int(text)
    except ValueError:
        problems.append(f"{section}.{key}: not an integer (got {text!r})")
        return None


def _get_bool(raw, section, key, problems):
    text = raw.pop(key, None)
    if text is None:
        return None
    val = _BOOL.get(text.strip().lower())
    if val is None:
        problems.append(f"{section}.{key}: not a boolean (got {text!r})")
    return val


def _get_floats(raw, section, key, problems):
    text = raw.pop(key, None)
    if text is None:
        return None
    out = []
    for tok in text.replace(",", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            problems.append(f"{section}.{key}: not a number (got {tok!r})")
            return None
    return tuple(out)


def parse_scenario_text(text: str, units: str = "rad",
                        base_dir: Optional[str] = None) -> Scenario:
    """Parse INI text into a Scenario. Raises ConfigError on any problem.

    base_dir resolves a relative [noise] spectrum_file; defaults to the
    working directory.
    """
    if units not in ("rad", "hz"):
        raise ConfigError([f"units: must be 'rad' or 'hz' (got {units!r})"])
    scale = TWO_PI if units == "hz" else 1.0

    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"config syntax: {exc}"]) from None

    problems: list[str] = []
    for sect in cp.sections():
        if sect not in _SECTIONS:
            problems.append(f"[{sect}]: unknown section "
                            f"(expected one of {'/'.join(_SECTIONS)})")
            continue
        for key in cp[sect]:
            if key not in _SECTIONS[sect]:
                problems.append(f"{sect}.{key}: unknown key")
    if problems:
        raise ConfigError(problems)

    def section(name):
        return dict(cp[name]) if cp.has_section(name) else None

    def rate(section_name, key, value):
        if value is None:
            return None
        return value * scale if (section_name, key) in RATE_FIELDS else value

    sys_raw = section("system")
    if sys_raw is None:
        raise ConfigError(["[system]: section is required"])
    kappa_v = _get_float(sys_raw, "system", "kappa", problems)
    delta_v = _get_float(sys_raw, "system", "delta", problems)
    if kappa_v is None:
        problems.append("system.kappa: required")
    if delta_v is None:
        problems.append("system.delta: required")
    system = SystemParams(
        kappa=rate("system", "kappa", kappa_v if kappa_v is not None else 0.0),
        delta=rate("system", "delta", delta_v if delta_v is not None else 0.0),
        pump_rate=rate("system", "pump_rate",
                       _get_float(sys_raw, "system", "pump_rate", problems)),
        laser_power=_get_float(sys_raw, "system", "laser_power", problems),
        laser_wavelength=_get_float(sys_raw, "system", "laser_wavelength",
                                    problems),
    )

    noise = NoiseSpec(kind="none")
    noise_raw = section("noise")
    if noise_raw is not None:
        kind = noise_raw.pop("kind", "none").strip()
        spectrum_file = noise_raw.pop("spectrum_file", None)
        inline_omega = _get_floats(noise_raw, "noise", "spectrum_omega", problems)
        inline_s = _get_floats(noise_raw, "noise", "spectrum_s", problems)
        if spectrum_file is not None and inline_omega is not None:
            problems.append("noise.spectrum_file: give either a file or inline "
                            "spectrum_omega/spectrum_s, not both")
        if kind == "tabulated" and spectrum_file is not None:
            path = spectrum_file
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            loaded = read_spectrum_csv(path)
            inline_omega = loaded.spectrum_omega
            inline_s = loaded.spectrum_s
        noise = NoiseSpec(
            kind=kind,
            gamma_l=rate("noise", "gamma_l",
                         _get_float(noise_raw, "noise", "gamma_l", problems))
            or 0.0,
            total_strength=_get_float(noise_raw, "noise", "total_strength",
                                      problems) or 0.0,
            center_frequency=rate(
                "noise", "center_frequency",
                _get_float(noise_raw, "noise", "center_frequency", problems))
            or 0.0,
            half_width=rate("noise", "half_width",
                            _get_float(noise_raw, "noise", "half_width",
                                       problems)) or 0.0,
            spectrum_omega=inline_omega,
            spectrum_s=inline_s,
        )

    sim = None
    mode = "displaced"
    sim_raw = section("sim")
    if sim_raw is not None:
        mode_text = sim_raw.pop("mode", None)
        if mode_text is not None:
            mode = mode_text.strip()
            if mode not in MODES:
                problems.append(f"sim.mode: must be one of {'/'.join(MODES)} "
                                f"(got {mode!r})")
        dt = _get_float(sim_raw, "sim", "dt", problems)
        duration = _get_float(sim_raw, "sim", "duration", problems)
        if dt is None or duration is None:
            problems.append("sim.dt/sim.duration: both are required when "
                            "[sim] is present")
        else:
            n_traj = _get_int(sim_raw, "sim", "n_trajectories", problems)
            seed = _get_int(sim_raw, "sim", "seed", problems)
            batches = _get_int(sim_raw, "sim", "batches", problems)
            store = _get_int(sim_raw, "sim", "store_trajectories", problems)
            sim = SimConfig(
                dt=dt,
                duration=duration,
                burn_in=_get_float(sim_raw, "sim", "burn_in", problems),
                n_trajectories=256 if n_traj is None else n_traj,
                seed=0 if seed is None else seed,
                vacuum_noise=_first_not_none(
                    _get_bool(sim_raw, "sim", "vacuum_noise", problems), True),
                batches=16 if batches is None else batches,
                store_trajectories=0 if store is None else store,
            )

    mechanical = None
    mech_raw = section("mechanical")
    if mech_raw is not None:
        vals = {k: rate("mechanical", k,
                        _get_float(mech_raw, "mechanical", k, problems))
                for k in _MECH_KEYS}
        missing = [k for k, x in vals.items() if x is None]
        if missing:
            problems.append(f"mechanical: missing keys {', '.join(missing)}")
        else:
            mechanical = MechanicalParams(**vals)

    threshold = 0.01
    ana_raw = section("analytic")
    if ana_raw is not None:
        t = _get_float(ana_raw, "analytic", "threshold", problems)
        if t is not None:
            threshold = t

    sweep = _parse_sweep(section("sweep"), scale, problems)

    if problems:
        raise ConfigError(problems)
    return Scenario(system=system, noise=noise, sim=sim,
                    mechanical=mechanical, sweep=sweep,
                    threshold=threshold, mode=mode)


def _first_not_none(a, b):
    return b if a is None else a


def _parse_sweep(raw, scale, problems) -> Optional[SweepSpec]:
    if raw is None:
        return None
    parameter = raw.pop("parameter", None)
    target = raw.pop("target", "analytic").strip()
    values = _get_floats(raw, "sweep", "values", problems)
    start = _get_float(raw, "sweep", "start", problems)
    stop = _get_float(raw, "sweep", "stop", problems)
    num = _get_int(raw, "sweep", "num", problems)
    spacing = raw.pop("spacing", "linear").strip()

    if parameter is None:
        problems.append("sweep.parameter: required")
        return None
    parameter = parameter.strip()
    sect, _, key = parameter.partition(".")
    if sect not in ("system", "noise", "mechanical") \
            or key not in _SECTIONS.get(sect, ()):
        problems.append(f"sweep.parameter: must name a numeric "
                        f"system/noise/mechanical field as 'section.key' "
                        f"(got {parameter!r})")
        return None
    if target not in _SWEEP_TARGETS:
        problems.append(f"sweep.target: must be one of "
                        f"{'/'.join(_SWEEP_TARGETS)} (got {target!r})")
    if values is None:
        if start is None or stop is None or num is None:
            problems.append("sweep: give values, or start+stop+num")
            return None
        if num < 2:
            problems.append(f"sweep.num: must be >= 2 (got {num})")
            return None
        if spacing == "log":
            if start <= 0 or stop <= 0:
                problems.append("sweep: log spacing needs positive start/stop")
                return None
            values = tuple(float(x) for x in np.geomspace(start, stop, num))
        elif spacing == "linear":
            values = tuple(float(x) for x in np.linspace(start, stop, num))
        else:
            problems.append(f"sweep.spacing: must be linear or log "
                            f"(got {spacing!r})")
            return None
    elif start is not None or stop is not None or num is not None:
        problems.append("sweep: values and start/stop/num are exclusive")
    if (sect, key) in RATE_FIELDS:
        values = tuple(v * scale for v in values)
    return SweepSpec(parameter=parameter, values=values, target=target)


def load_scenario(path, units: str = "rad") -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from None
    return parse_scenario_text(text, units=units,
                               base_dir=os.path.dirname(os.path.abspath(path)))


def apply_parameter(scenario: Scenario, parameter: str, value: float) -> Scenario:
    """Return a copy with one dotted 'section.key' field replaced."""
    sect, _, key = parameter.partition(".")
    if sect == "system":
        sub = replace(scenario.system, **{key: value})
        # a swept pump invalidates any power specification it came from
        if key in ("laser_power", "laser_wavelength"):
            sub = replace(sub, pump_rate=None)
        elif key in ("pump_rate", "kappa") and scenario.system.laser_power is not None:
            sub = replace(sub, laser_power=None, laser_wavelength=None)
        return replace(scenario, system=sub)
    if sect == "noise":
        return replace(scenario, noise=replace(scenario.noise, **{key: value}))
    if sect == "mechanical":
        if scenario.mechanical is None:
            raise ConfigError(
                [f"sweep.parameter: {parameter!r} needs a [mechanical] section"])
        return replace(scenario,
                       mechanical=replace(scenario.mechanical, **{key: value}))
    raise ConfigError([f"sweep.parameter: unknown section in {parameter!r}"])


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (tuple, list)):
        return ", ".join(repr(float(v)) for v in value)
    return repr(float(value))


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical rad/s INI text; parse_scenario_text round-trips it bit-exactly.

    Tabulated spectra are written inline, so the text is self-contained
    even when the scenario was loaded from a spectrum_file.
    """
    out = io.StringIO()

    def emit(name, pairs):
        rows = [(k, v) for k, v in pairs if v is not None]
        if not rows:
            return
        out.write(f"[{name}]\n")
        for k, v in rows:
            out.write(f"{k} = {v if isinstance(v, str) else _fmt(v)}\n")
        out.write("\n")

    sy = scenario.system
    emit("system", [("kappa", sy.kappa), ("delta", sy.delta),
                    ("pump_rate", sy.pump_rate),
                    ("laser_power", sy.laser_power),
                    ("laser_wavelength", sy.laser_wavelength)])
    nz = scenario.noise
    emit("noise", [("kind", nz.kind),
                   ("gamma_l", nz.gamma_l if nz.kind == "white" else None),
                   ("total_strength",
                    nz.total_strength if nz.kind == "lorentzian" else None),
                   ("center_frequency",
                    nz.center_frequency if nz.kind == "lorentzian" else None),
                   ("half_width",
                    nz.half_width if nz.kind == "lorentzian" else None),
                   ("spectrum_omega",
                    nz.spectrum_omega if nz.kind == "tabulated" else None),
                   ("spectrum_s",
                    nz.spectrum_s if nz.kind == "tabulated" else None)])
    sim = scenario.sim
    if sim is not None:
        emit("sim", [("dt", sim.dt), ("duration", sim.duration),
                     ("burn_in", sim.burn_in),
                     ("n_trajectories", sim.n_trajectories),
                     ("seed", sim.seed), ("vacuum_noise", sim.vacuum_noise),
                     ("batches", sim.batches),
                     ("store_trajectories", sim.store_trajectories),
                     ("mode", scenario.mode)])
    mech = scenario.mechanical
    if mech is not None:
        emit("mechanical", [("omega_m", mech.omega_m),
                            ("gamma_m", mech.gamma_m),
                            ("n_th", mech.n_th), ("g", mech.g)])
    emit("analytic", [("threshold", scenario.threshold)])
    sw = scenario.sweep
    if sw is not None:
        emit("sweep", [("parameter", sw.parameter), ("values", sw.values),
                       ("target", sw.target)])
    return out.getvalue()
