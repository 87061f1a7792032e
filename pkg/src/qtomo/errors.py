"""Exception types shared across the package."""


class QtomoError(Exception):
    """Base class for all qtomo errors."""


class ContractViolation(QtomoError, ValueError):
    """An input breaks a documented precondition (dimensions, hermiticity,
    unitarity, negative rates, out-of-range parameters)."""


class FormulaHypothesisError(ContractViolation):
    """A closed-form formula was requested outside the assumptions under
    which it holds."""


class EigensolverError(QtomoError):
    """The underlying eigensolver failed to converge."""


class UnderdeterminedSystemError(QtomoError):
    """A reconstruction was attempted with an observation span too small to
    determine the state.  Carries the achieved and required rank."""

    def __init__(self, rank: int, required: int):
        self.rank = rank
        self.required = required
        super().__init__(
            f"observation span has rank {rank} < {required}; "
            "the linear system does not determine the state"
        )
