"""Command line entry points.

    phasenoise analytic --config FILE [--output FILE] [--units rad|hz]
    phasenoise simulate --config FILE [--mode M] [--seed N]
                        [--trajectories N] [--dump-trajectories FILE]
    phasenoise sweep    --config FILE --output FILE
    phasenoise coupled  --config FILE [--method auto|lyapunov|spectral|both]
    phasenoise psd      --input FILE --segment-length N [--overlap F]
                        [--column re|im|abs] [--output FILE]

Exit codes: 0 success, 2 configuration or usage problems, 3 numerical
failures (instability, divergence, solver residuals). Run records are
JSON with sorted keys and repr floats, so identical inputs give byte
identical output; wall-clock timings go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .analytic import steady_state_report
from .config import (Scenario, apply_parameter, load_scenario,
                     serialize_scenario)
from .core import validate
from .coupled import build_model, solve_spectral, solve_steady
from .errors import ConfigError, NumericalError
from .langevin import EnsembleStats, _worker_count, run_ensemble

__all__ = ["main"]


def _jf(x):
    """JSON-safe float: NaN/inf become None (null), which is valid JSON."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _timing(label: str, t0: float) -> None:
    print(f"[timing] {label}: {time.perf_counter() - t0:.3f} s",
          file=sys.stderr)


def _record(command: str, args, scenario: Scenario, results: dict,
            rng=None) -> dict:
    rec = {
        "tool": "phasenoise",
        "version": __version__,
        "command": command,
        "units": args.units,
        "scenario": serialize_scenario(scenario),
        "results": results,
    }
    if rng is not None:
        rec["rng"] = rng
    return rec


def _stats_dict(st: EnsembleStats) -> dict:
    return {
        "frame": st.frame,
        "n_trajectories": st.n_trajectories,
        "n_batches": st.n_batches,
        "mean_re": _jf(st.mean_amplitude.real),
        "mean_im": _jf(st.mean_amplitude.imag),
        "mean_stderr": _jf(st.mean_amplitude_stderr),
        "second_moment": _jf(st.second_moment),
        "second_moment_stderr": _jf(st.second_moment_stderr),
        "occupation": _jf(st.occupation),
        "occupation_stderr": _jf(st.occupation_stderr),
        "vacuum_offset": _jf(st.vacuum_offset),
    }


def _cooling_dict(rep) -> dict:
    return {
        "method": rep.method,
        "n_cav": _jf(rep.n_cav),
        "n_m": _jf(rep.n_m),
        "share_cav": _jf(rep.share_cav),
        "share_m": _jf(rep.share_m),
        "t_eff_delta_k": _jf(rep.t_eff_delta),
        "t_eff_omega_m_k": _jf(rep.t_eff_omega_m),
        "residual_rel": _jf(rep.residual_rel),
        "cov_diag": [_jf(v) for v in np.diag(rep.cov)[:4]],
    }


def _analytic_results(scenario: Scenario) -> dict:
    bundle = validate(scenario.system, scenario.noise)
    rep = steady_state_report(bundle.system, bundle.noise, scenario.threshold)
    return {k: (_jf(v) if isinstance(v, float) else v)
            for k, v in rep.as_dict().items()}


def cmd_analytic(args) -> int:
    scenario = load_scenario(args.config, units=args.units)
    t0 = time.perf_counter()
    results = _analytic_results(scenario)
    _timing("analytic", t0)
    _emit(args, _record("analytic", args, scenario, results))
    return 0


def _scenario_for_sim(args, scenario: Scenario) -> Scenario:
    if scenario.sim is None:
        raise ConfigError(["[sim]: section is required for simulate"])
    sim = scenario.sim
    if getattr(args, "seed", None) is not None:
        sim = replace(sim, seed=args.seed)
    if getattr(args, "trajectories", None) is not None:
        sim = replace(sim, n_trajectories=args.trajectories)
    if getattr(args, "dump_trajectories", None) and sim.store_trajectories < 1:
        sim = replace(sim, store_trajectories=1)
    return replace(scenario, sim=sim)


def _dump_trajectories(path, result) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        has_b = any(t.b is not None for t in result.trajectories)
        head = ["trajectory", "t", "re_a", "im_a"]
        if has_b:
            head += ["re_b", "im_b"]
        wr.writerow(head)
        for idx, tr in enumerate(result.trajectories):
            for k in range(tr.t.shape[0]):
                row = [str(idx), repr(float(tr.t[k])),
                       repr(float(tr.a[k].real)), repr(float(tr.a[k].imag))]
                if has_b:
                    row += [repr(float(tr.b[k].real)),
                            repr(float(tr.b[k].imag))]
                wr.writerow(row)


def cmd_simulate(args) -> int:
    scenario = _scenario_for_sim(args, load_scenario(args.config,
                                                     units=args.units))
    bundle = validate(scenario.system, scenario.noise, scenario.sim)
    mode = args.mode or scenario.mode
    if mode == "two-cavity":
        mode = "two_cavity_lab"
    t0 = time.perf_counter()
    result = run_ensemble(bundle, mode)
    _timing(f"simulate[{mode}]", t0)
    results = {
        "mode": result.mode,
        "alpha_re": _jf(result.alpha.real),
        "alpha_im": _jf(result.alpha.imag),
        "n_steps": result.n_steps,
        "burn_steps": result.burn_steps,
        "batch_length": result.batch_length,
        "n_divergent": result.n_divergent,
        "components": {lbl: _stats_dict(st)
                       for lbl, st in result.stats.items()},
    }
    if args.dump_trajectories:
        _dump_trajectories(args.dump_trajectories, result)
    _emit(args, _record("simulate", args, scenario, results, rng=result.rng))
    return 0


def cmd_coupled(args) -> int:
    scenario = load_scenario(args.config, units=args.units)
    if scenario.mechanical is None:
        raise ConfigError(["[mechanical]: section is required for coupled"])
    bundle = validate(scenario.system, scenario.noise)
    model = build_model(bundle.system, bundle.noise, scenario.mechanical)
    method = args.method
    if method == "auto":
        method = "both" if model.has_lyapunov_closure else "spectral"
    t0 = time.perf_counter()
    results = {}
    if method in ("lyapunov", "both"):
        results["lyapunov"] = _cooling_dict(solve_steady(model))
    if method in ("spectral", "both"):
        results["spectral"] = _cooling_dict(solve_spectral(model))
    _timing(f"coupled[{method}]", t0)
    if method == "both":
        ly, sp = results["lyapunov"], results["spectral"]
        denom = max(abs(ly["n_m"]), abs(sp["n_m"]), 1e-300)
        results["agreement_n_m_rel"] = _jf(abs(ly["n_m"] - sp["n_m"]) / denom)
    _emit(args, _record("coupled", args, scenario, results))
    return 0


_SIM_ROW_FIELDS = ("occupation", "occupation_stderr", "mean_re", "mean_im",
                   "second_moment")


def _input_columns(sc: Scenario) -> dict:
    row = {
        "system.kappa": sc.system.kappa,
        "system.delta": sc.system.delta,
        "system.pump_rate": sc.system.pump_rate,
        "noise.kind": sc.noise.kind,
    }
    if sc.noise.kind == "white":
        row["noise.gamma_l"] = sc.noise.gamma_l
    elif sc.noise.kind == "lorentzian":
        row["noise.total_strength"] = sc.noise.total_strength
        row["noise.center_frequency"] = sc.noise.center_frequency
        row["noise.half_width"] = sc.noise.half_width
    if sc.mechanical is not None:
        row["mechanical.omega_m"] = sc.mechanical.omega_m
        row["mechanical.gamma_m"] = sc.mechanical.gamma_m
        row["mechanical.n_th"] = sc.mechanical.n_th
        row["mechanical.g"] = sc.mechanical.g
    return row


def _sweep_row(scenario: Scenario, value: float) -> dict:
    sw = scenario.sweep
    sc = apply_parameter(scenario, sw.parameter, value)
    row = {"sweep.parameter": sw.parameter, "sweep.value": value}
    row.update(_input_columns(sc))
    if sw.target == "analytic":
        row.update(_analytic_results(sc))
    elif sw.target == "simulate":
        if sc.sim is None:
            raise ConfigError(["[sim]: section is required for a simulate sweep"])
        bundle = validate(sc.system, sc.noise, sc.sim)
        res = run_ensemble(bundle, sc.mode)
        for lbl, st in res.stats.items():
            d = _stats_dict(st)
            for f in _SIM_ROW_FIELDS:
                row[f"{lbl}.{f}"] = d[f]
    else:
        if sc.mechanical is None:
            raise ConfigError(
                ["[mechanical]: section is required for a coupled sweep"])
        bundle = validate(sc.system, sc.noise)
        model = build_model(bundle.system, bundle.noise, sc.mechanical)
        rep = solve_steady(model) if model.has_lyapunov_closure \
            else solve_spectral(model)
        d = _cooling_dict(rep)
        d.pop("cov_diag")
        row.update(d)
    return row


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.config, units=args.units)
    if scenario.sweep is None:
        raise ConfigError(["[sweep]: section is required for sweep"])
    if getattr(args, "seed", None) is not None and scenario.sim is not None:
        scenario = replace(scenario,
                           sim=replace(scenario.sim, seed=args.seed))
    values = scenario.sweep.values
    t0 = time.perf_counter()
    if scenario.sweep.target == "simulate":
        # ensembles parallelize internally; row-level threads would only
        # oversubscribe
        rows = [_sweep_row(scenario, v) for v in values]
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=_worker_count(None)) as ex:
            rows = list(ex.map(lambda v: _sweep_row(scenario, v), values))
    _timing(f"sweep[{scenario.sweep.target}] x{len(values)}", t0)

    header = list(rows[0].keys())
    out = sys.stdout if not args.output else open(args.output, "w",
                                                 encoding="utf-8", newline="")
    try:
        wr = csv.writer(out)
        wr.writerow(header)
        for row in rows:
            wr.writerow([_csv_cell(row.get(k)) for k in header])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _read_series_csv(path, column: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from None
    except ValueError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    if data.shape[0] < 2 or data.shape[1] < 2:
        raise ConfigError([f"{path}: need a header plus >= 2 rows of "
                           f"(t, value...) columns"])
    if "trajectory" in header[0]:
        keep = data[:, 0] == data[0, 0]
        data = data[keep][:, 1:]
        header = header[1:]
    t = data[:, 0]
    dt = float(t[1] - t[0])
    if dt <= 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-6 * dt:
        raise ConfigError([f"{path}: time column must be uniformly spaced"])
    if data.shape[1] >= 3:
        series = {"re": data[:, 1], "im": data[:, 2],
                  "abs": np.hypot(data[:, 1], data[:, 2])}[column]
    else:
        series = data[:, 1]
    return series, dt


def cmd_psd(args) -> int:
    from .noise import estimate_psd
    series, dt = _read_series_csv(args.input, args.column)
    est = estimate_psd(series, dt, args.segment_length, args.overlap)
    lines = ["omega_rad_per_s,S,stderr"]
    for w, s, e in zip(est.omega, est.s, est.stderr):
        lines.append(f"{float(w)!r},{float(s)!r},{float(e)!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"[psd] {est.n_segments} segments, "
          f"band [{est.omega[0]!r}, {est.omega[-1]!r}] rad/s",
          file=sys.stderr)
    return 0


def _add_common(p, config_required=True):
    if config_required:
        p.add_argument("--config", required=True, metavar="FILE",
                       help="scenario INI file")
    p.add_argument("--output", metavar="FILE",
                   help="write the result here instead of stdout")
    p.add_argument("--units", choices=("rad", "hz"), default="rad",
                   help="how rate fields in the config are interpreted")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="phasenoise",
        description="Cavity field statistics under laser phase noise: "
                    "analytic budgets, Monte Carlo ensembles, coupled "
                    "cavity-mirror covariances, spectral estimation.",
    )
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("analytic", help="closed-form steady-state report")
    _add_common(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo ensemble")
    _add_common(p)
    p.add_argument("--mode", choices=("displaced", "lab", "twin",
                                      "two-cavity", "two_cavity_lab"),
                   help="integration frame (default: [sim] mode)")
    p.add_argument("--seed", type=int, help="override [sim] seed")
    p.add_argument("--trajectories", type=int,
                   help="override [sim] n_trajectories")
    p.add_argument("--dump-trajectories", metavar="FILE",
                   help="write stored trajectories as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the [sweep] section, CSV out")
    _add_common(p)
    p.add_argument("--seed", type=int, help="override [sim] seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("coupled", help="cavity-mirror covariance solve")
    _add_common(p)
    p.add_argument("--method",
                   choices=("auto", "lyapunov", "spectral", "both"),
                   default="auto")
    p.set_defaults(func=cmd_coupled)

    p = sub.add_parser("psd", help="Welch spectral estimate of a series CSV")
    _add_common(p, config_required=False)
    p.add_argument("--input", required=True, metavar="FILE",
                   help="CSV with (t, value) or (t, re, im) columns")
    p.add_argument("--segment-length", type=int, required=True)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--column", choices=("re", "im", "abs"), default="re",
                   help="which component of a complex series to use")
    p.set_defaults(func=cmd_psd)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
