"""Exception hierarchy."""


class MovingFrameError(Exception):
    """Base class for all errors raised by this package."""


class SingularFrame(MovingFrameError):
    """The coframe matrix (or a derived linear system) is numerically singular."""


class EvaluationFailure(MovingFrameError):
    """A user-supplied callable failed or returned non-finite values."""


class NumericalFailure(MovingFrameError):
    """Base for solver / integrator breakdowns."""


class NoConvergence(NumericalFailure):
    pass


class SingularHessian(NumericalFailure):
    pass


class StepFailure(NumericalFailure):
    pass


class SingularConstraintMetric(NumericalFailure):
    pass


class InconsistentInitialData(MovingFrameError):
    pass


class IncompatibleTrajectories(MovingFrameError):
    pass


class ConfigError(MovingFrameError):
    pass
