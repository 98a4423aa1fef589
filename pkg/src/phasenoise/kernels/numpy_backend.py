"""Pure-numpy recurrence via scipy.signal.lfilter.

y[k] = u[k] + f*y[k-1] is the direct-form-II-transposed update of the
IIR filter b=[1], a=[1, -f], so lfilter performs the identical
floating-point operations as the compiled loop.
"""

import numpy as np
from scipy.signal import lfilter


def recurrence(a0, f, u, out=None):
    u = np.asarray(u, dtype=np.complex128)
    b = np.ones(1, dtype=np.complex128)
    a = np.array([1.0, -complex(f)], dtype=np.complex128)
    zi = np.array([complex(f) * complex(a0)], dtype=np.complex128)
    y, _ = lfilter(b, a, u, zi=zi)
    if out is not None:
        out[:] = y
        return out
    return y
