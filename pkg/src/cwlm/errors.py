"""Exception types raised across the package."""


class CWLMError(Exception):
    """Base class for all package errors."""


class InvalidPolarization(CWLMError, ValueError):
    pass


class InvalidPostSelection(CWLMError, ValueError):
    pass


class InvalidConfiguration(CWLMError, ValueError):
    """Detector or run configuration that cannot be evaluated."""


class ZeroPostSelectionProbability(CWLMError, ArithmeticError):
    pass


class ZeroOverlap(CWLMError, ValueError):
    """Shift generating function undefined: Tr[rho_f rho_i] vanishes."""


class NumericalOverflow(CWLMError, ArithmeticError):
    pass


class GridError(CWLMError, ValueError):
    pass
