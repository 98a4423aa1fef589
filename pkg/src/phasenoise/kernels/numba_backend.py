"""Compiled recurrence kernel. No fastmath: IEEE ordering must match the
numpy backend so the two paths stay interchangeable."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _loop(a0, f, u, out):
    a = a0
    for k in range(u.shape[0]):
        a = f * a + u[k]
        out[k] = a


def recurrence(a0, f, u, out=None):
    u = np.ascontiguousarray(u, dtype=np.complex128)
    if out is None:
        out = np.empty(u.shape[0], dtype=np.complex128)
    _loop(complex(a0), complex(f), u, out)
    return out
