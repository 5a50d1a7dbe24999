class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class ProtocolViolation(RuntimeError):
    """A player broke the rules of the game (e.g. a non-realizable label)."""

    def __init__(self, message, round_index=None):
        super().__init__(message)
        self.round_index = round_index


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its configured size budget."""

    def __init__(self, message, reached=None):
        super().__init__(message)
        self.reached = reached
