class GeodecompError(Exception):
    pass


class ValidationError(GeodecompError, ValueError):
    """
    Raised for invalid inputs: mismatched dimensions, points off the sphere, malformed files.
    The command line maps it to exit status 1.
    """


class NumericalError(GeodecompError, ArithmeticError):
    """
    Raised when a computation is undefined or fails to converge.
    The command line maps it to exit status 2.
    """


class AntipodalError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class DegenerateBandwidthError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class SimulationError(NumericalError):
    pass
