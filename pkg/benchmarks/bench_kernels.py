"""Timing comparison of the recurrence backends.

Runs y[k+1] = f*y[k] + u[k] through both implementations over a range
of lengths, checks they agree bit for bit, and reports the ratio. An
optional end-to-end ensemble timing shows what the difference means for
a realistic Monte Carlo run.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --ensemble
"""

import argparse
import math
import time

import numpy as np

from phasenoise import kernels


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_recurrence(lengths, repeats):
    rng = np.random.default_rng(0)
    f = complex(math.exp(-0.01)) * complex(math.cos(0.01), math.sin(0.01))
    rows = []
    for n in lengths:
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        out = np.empty(n, dtype=np.complex128)
        results = {}
        timings = {}
        for name in ("numba", "numpy"):
            try:
                kernels.use_backend(name)
            except Exception as exc:
                timings[name] = None
                print(f"  {name}: unavailable ({exc})")
                continue
            kernels.recurrence(0.2 + 0.1j, f, u, out=out)  # warm up / compile
            timings[name] = best_of(
                lambda: kernels.recurrence(0.2 + 0.1j, f, u, out=out),
                repeats)
            results[name] = kernels.recurrence(0.2 + 0.1j, f, u)
        if len(results) == 2:
            identical = np.array_equal(results["numba"], results["numpy"])
        else:
            identical = None
        rows.append((n, timings.get("numba"), timings.get("numpy"),
                     identical))
    kernels.use_backend("auto")
    return rows


def bench_ensemble(repeats):
    from phasenoise import (Bundle, NoiseSpec, SimConfig, SystemParams,
                            run_ensemble)
    n = 1e4
    pump = math.sqrt(n) * abs(complex(1.001, 1.0))
    bundle = Bundle(
        system=SystemParams(kappa=1.0, delta=1.0, pump_rate=pump),
        noise=NoiseSpec(kind="white", gamma_l=1e-3),
        sim=SimConfig(dt=0.01, duration=110.0, burn_in=10.0,
                      n_trajectories=200, seed=1),
    )
    print("\nensemble: 200 trajectories x 11000 steps, displaced frame")
    for name in ("numba", "numpy"):
        try:
            kernels.use_backend(name)
        except Exception as exc:
            print(f"  {name:6s}  unavailable ({exc})")
            continue
        run_ensemble(bundle, "displaced")  # warm up
        t = best_of(lambda: run_ensemble(bundle, "displaced"), repeats)
        print(f"  {name:6s}  {t * 1e3:9.1f} ms")
    kernels.use_backend("auto")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="best-of-N timing (default 5)")
    ap.add_argument("--ensemble", action="store_true",
                    help="also time a full Monte Carlo ensemble")
    args = ap.parse_args()

    lengths = (1_000, 10_000, 100_000, 1_000_000)
    rows = bench_recurrence(lengths, args.repeats)

    print(f"{'length':>10s} {'numba':>12s} {'numpy':>12s} "
          f"{'numpy/numba':>12s}  bit-identical")
    for n, t_nb, t_np, same in rows:
        nb = f"{t_nb * 1e6:9.1f} us" if t_nb else "n/a"
        np_ = f"{t_np * 1e6:9.1f} us" if t_np else "n/a"
        ratio = f"{t_np / t_nb:12.2f}" if t_nb and t_np else "n/a"
        print(f"{n:>10d} {nb:>12s} {np_:>12s} {ratio:>12s}  {same}")

    if args.ensemble:
        bench_ensemble(args.repeats)


if __name__ == "__main__":
    main()
