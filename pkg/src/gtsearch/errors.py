"""Exception hierarchy shared by the group-testing modules."""


class GroupTestingError(Exception):
    """Base class for all errors raised by :mod:`gtsearch`."""


class ParameterError(GroupTestingError, ValueError):
    """Code parameters are invalid (e.g. the inner code is too small for ``q``)."""


class CapacityError(ParameterError):
    """More items were requested than the code can index."""


class InconsistentOutcome(GroupTestingError):
    """Test outcomes cannot come from a defect set the strategy supports.

    Raised when the oracle holds more defectives than promised, or lies.
    """


class ProtocolViolation(GroupTestingError):
    """A strategy broke the stage discipline of a testing session."""


class BudgetExceeded(GroupTestingError):
    """An exhaustive verification would exceed the configured case budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"exhaustive run needs {required} cases, budget is {budget}")
        self.required = required
        self.budget = budget
