"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``DomainError`` subclasses exit with 2,
``NumericError`` subclasses with 3, ``ConfigError`` with 1.
"""


class RabiError(Exception):
    """Base class for all package errors."""


class ConfigError(RabiError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class DomainError(RabiError, ValueError):
    """Parameters outside the region where an operation is defined."""


class SingularAnisotropyError(DomainError):
    pass


class ValidityError(DomainError):
    """|g| >= g_c: the Bogolubov frame does not exist."""

    def __init__(self, g, g_critical):
        self.g = g
        self.g_critical = g_critical
        super().__init__(
            f"|g|={abs(g):.17g} is not below the critical coupling g_c={g_critical:.17g}; "
            "only the truncated-space oracle applies here"
        )


class NoSolutionError(DomainError):
    pass


class OutOfDomainError(DomainError):
    pass


class NotDegenerateError(DomainError):
    pass


class NumericError(RabiError, ArithmeticError):
    pass


class NearSingularFError(NumericError):
    def __init__(self, m, f_value):
        self.m = m
        self.f_value = f_value
        super().__init__(f"|f_{m}|={abs(f_value):.3e} is below the singularity guard; perturb E")


class PoleProximityError(NumericError):
    def __init__(self, E, pole, distance):
        self.E = E
        self.pole = pole
        self.distance = distance
        super().__init__(f"E={E:.17g} lies {distance:.3e} from the pole at {pole:.17g}")


class NonConvergenceError(NumericError):
    def __init__(self, steps, tail_magnitude):
        self.steps = steps
        self.tail_magnitude = tail_magnitude
        super().__init__(
            f"coefficient chain did not converge in {steps} steps (tail {tail_magnitude:.3e})"
        )


class FormulaMismatchError(NumericError):
    def __init__(self, element_class, deviation, threshold):
        self.element_class = element_class
        self.deviation = deviation
        self.threshold = threshold
        super().__init__(
            f"transformed-Hamiltonian element class {element_class!r} deviates by "
            f"{deviation:.3e} (threshold {threshold:.3e})"
        )


class InsufficientCutoffError(NumericError):
    def __init__(self, tail_mass, n_trunc):
        self.tail_mass = tail_mass
        self.n_trunc = n_trunc
        super().__init__(f"state tail mass {tail_mass:.3e} above tolerance at nTrunc={n_trunc}")


class EigenSolverError(NumericError):
    pass
