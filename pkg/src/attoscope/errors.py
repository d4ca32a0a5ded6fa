"""Exception hierarchy. The CLI maps these onto exit codes:
ConfigError -> 1, NumericalError -> 2, MissingPrerequisiteError -> 3.
"""


class AttoscopeError(Exception):
    pass


class ConfigError(AttoscopeError):
    """Invalid run configuration. Carries the full list of violations."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(AttoscopeError):
    pass


class MissingPrerequisiteError(AttoscopeError):
    pass


class SingularOriginError(NumericalError):
    """Potential evaluated exactly at z = rho = 0."""


class NoBarrierError(NumericalError):
    """Barrier geometry requested at an instant with zero field."""


class NyquistError(NumericalError):
    """Momentum grid extends beyond pi/(2 dz) for the given z spacing."""


class ConvergenceError(NumericalError):
    """An iterative solve exhausted its budget without meeting tolerance."""


class PropagationUnstableError(NumericalError):
    """Norm grew by more than the stability threshold in a single step."""


class NoInflectionError(NumericalError):
    """No inflection point of the stationary momentum curve in the scan range."""


class NoBracketError(NumericalError):
    """Root bracketing failed. Carries the scanned residual table."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class BoundElectronError(NumericalError):
    """Detected momentum undefined: final kinetic energy below the Coulomb deficit."""
