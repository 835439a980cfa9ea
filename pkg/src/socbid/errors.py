"""Exception hierarchy shared across the package."""


class SocbidError(Exception):
    """Base class for all errors raised by socbid."""


class InvalidBidError(SocbidError, ValueError):
    """A bid or storage asset fails Assumption-1 / EDCR preconditions."""


class OutOfRangeError(SocbidError, ValueError):
    """A state of charge lies outside the bid partition."""


class ContractViolation(SocbidError, ValueError):
    """An operation was called with arguments violating its contract."""


class InfeasibleTrajectoryError(SocbidError, ValueError):
    """A storage trajectory breaks a power cap, SoC bound or complementarity."""

    def __init__(self, message: str, interval: int | None = None, constraint: str | None = None):
        super().__init__(message)
        self.interval = interval
        self.constraint = constraint


class CaseFormatError(SocbidError, ValueError):
    """A case file is malformed or has inconsistent dimensions."""


class CaseValidationError(SocbidError, ValueError):
    """A case file parsed correctly but violates model invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class NumericalError(SocbidError, RuntimeError):
    """The LP solver lost accuracy and refuses to report a result."""


class InfeasibleDispatchError(SocbidError):
    """The relaxed dispatch LP has no feasible point."""


class EnumerationLimitError(SocbidError):
    """A brute-force enumeration would exceed its evaluation cap."""


class OracleInfeasibleError(SocbidError):
    """No grid point of the brute-force oracle is feasible."""
