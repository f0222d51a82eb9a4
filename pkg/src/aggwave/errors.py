"""Exception hierarchy shared by all modules."""


class AggwaveError(Exception):
    """Base class for library errors."""


class ShapeError(AggwaveError, ValueError):
    """Array shape, length or block layout is inconsistent."""


class LevelError(AggwaveError, ValueError):
    """Resolution level outside the admissible range."""


class UnsupportedFilterError(AggwaveError, ValueError):
    """No filter table entry for the requested number of vanishing moments."""


class ParameterError(AggwaveError, ValueError):
    """Hyperparameter or configuration value out of range."""


class DomainError(AggwaveError, ValueError):
    """Function argument outside its domain of definition."""


class RankError(AggwaveError, ArithmeticError):
    """Least-squares system is singular or too ill-conditioned to solve."""
