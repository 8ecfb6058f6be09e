"""Exception hierarchy shared by the library and the CLI."""


class CoxTestError(Exception):
    """Base class for all errors raised by coxtest."""


class DomainError(CoxTestError, ValueError):
    """An argument lies outside the domain of an operation."""


class InvalidSampleError(CoxTestError, ValueError):
    """A trajectory sample is malformed (too few paths, mismatched horizons, ...)."""


class DegenerateSampleError(CoxTestError, ArithmeticError):
    """The sample holds no events, so the normalizers of both statistics vanish."""


class ParameterError(CoxTestError, ValueError):
    """A model or experiment parameter is invalid."""


class ContractViolation(CoxTestError, RuntimeError):
    """A caller-supplied callback broke its contract (non-monotone inverse, rate above bound)."""


class DataError(CoxTestError, ValueError):
    """An input file could not be parsed or holds out-of-range data."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
