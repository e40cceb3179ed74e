"""Exception hierarchy shared by the numerical modules and the CLI."""


class QCurveError(Exception):
    """Base class for all errors raised by qcurvelab."""


class NonIntegrablePotential(QCurveError):
    """A density's tail makes the potential or its mass integral diverge."""


class UnreliableTail(NonIntegrablePotential):
    """The extrapolated tail carries too large a share of the total mass."""


class NonIntegrableDensity(QCurveError):
    """The solver's density f e^{nu} stopped being integrable."""


class DivergenceDetected(QCurveError):
    pass


class MaxIterExceeded(QCurveError):
    pass


class BlowUp(QCurveError):
    """Shooting left the admissible region before reaching r_end."""


class FitWindowTooSmall(QCurveError):
    pass


class HypothesisViolated(QCurveError):
    pass


class ConfigError(QCurveError):
    """Invalid run configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
