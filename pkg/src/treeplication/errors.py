class TreeplicationError(Exception):
    """Base class for domain errors (CLI exit code 2)."""


class InvalidInput(TreeplicationError, ValueError):
    pass


class NonDecodable(TreeplicationError):
    pass


class BudgetTooSmall(TreeplicationError, ValueError):
    pass


class DegenerateModel(TreeplicationError):
    pass


class InvalidLoss(TreeplicationError, ValueError):
    pass


class BadHeader(TreeplicationError):
    pass
