"""Exception hierarchy shared by the analysis modules."""


class AnalysisError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AnalysisError, ValueError):
    """A Lagrangian was evaluated outside its real domain."""


class DegenerateModel(AnalysisError):
    """The first derivative of the Lagrangian vanishes, so xi is undefined."""


class MissingHessian(AnalysisError):
    """An operation needing second derivatives got a first-order jet."""


class ChartDomainError(AnalysisError, ValueError):
    """A map value left the coordinate chart of the target geometry."""


class NoRealRoot(AnalysisError):
    """The requested spatial direction has no real characteristic frequency."""


class FullyDegenerate(AnalysisError):
    """Every coefficient of the reduced null-cone quadratic vanished."""


class StepUnderflow(AnalysisError):
    """Adaptive step control shrank the step below its floor."""


class ConfigError(AnalysisError):
    """A scenario file could not be parsed or validated."""
