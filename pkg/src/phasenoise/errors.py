"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
numerical failures exit 3.
"""


class PhaseNoiseError(Exception):
    """Base class for all package errors."""


class ConfigError(PhaseNoiseError):
    """Invalid parameters, scenario files, or units.

    Carries the full list of violations so a caller sees every problem
    at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericalError(PhaseNoiseError):
    """Solver or integrator failure (divergence, residual, quadrature)."""


class InstabilityError(NumericalError):
    """Drift matrix is not Hurwitz; message lists the offending eigenvalues."""

    def __init__(self, eigenvalues):
        self.eigenvalues = list(eigenvalues)
        parts = ", ".join(f"{ev.real:+.6e}{ev.imag:+.6e}j" for ev in self.eigenvalues)
        super().__init__(f"drift matrix is not Hurwitz; eigenvalues: [{parts}]")


class DivergenceError(NumericalError):
    """A trajectory left the numerical domain (non-finite or overflow guard)."""
