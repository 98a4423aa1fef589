"""Hot-loop backends for first-order complex recurrences.

Every integrator in this package (displaced frame, lab frame, twin
differential mode, the colored-noise OU filter) reduces to

    y[k+1] = f * y[k] + u[k]

with a constant complex factor f and a precomputed driving array u.
Two interchangeable implementations are provided:

* ``numba``: a compiled sequential loop (default when numba imports);
* ``numpy``: scipy.signal.lfilter on the same recurrence, no compilation.

Selection is by the environment variable PHASENOISE_BACKEND, values
``numba``, ``numpy``, or ``auto`` (default). The choice is cached on
first use; use_backend() overrides it at runtime for tests and
benchmarks. Both paths implement the identical arithmetic; see
benchmarks/bench_kernels.py for a timing comparison.
"""

from __future__ import annotations

import os

from ..errors import ConfigError

BACKEND_ENV = "PHASENOISE_BACKEND"

_impl = None
_name = None


def _load(choice: str):
    if choice == "numba":
        from . import numba_backend as impl
        return "numba", impl
    if choice == "numpy":
        from . import numpy_backend as impl
        return "numpy", impl
    raise ConfigError(
        [f"{BACKEND_ENV}: must be 'numba', 'numpy', or 'auto' (got {choice!r})"]
    )


def _resolve():
    global _impl, _name
    if _impl is not None:
        return
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower() or "auto"
    if choice == "auto":
        try:
            _name, _impl = _load("numba")
        except ImportError:
            _name, _impl = _load("numpy")
    else:
        _name, _impl = _load(choice)


def use_backend(name: str) -> str:
    """Force a backend ('numba', 'numpy', or 'auto' to re-read the env)."""
    global _impl, _name
    if name == "auto":
        _impl = None
        _name = None
        _resolve()
    else:
        _name, _impl = _load(name)
    return _name


def active_backend() -> str:
    _resolve()
    return _name


def recurrence(a0: complex, f: complex, u, out=None):
    """Run y[k+1] = f*y[k] + u[k] from y[0]=a0; returns y[1..len(u)]."""
    _resolve()
    return _impl.recurrence(a0, f, u, out)
