class ValidationError(ValueError):
    """Bad input: malformed file, wrong prime, rank mismatch and so on."""


class PresentationError(ValidationError):
    """A pc presentation that is structurally wrong or inconsistent."""


class NotNormalError(ValidationError):
    pass


class BudgetExceeded(RuntimeError):
    """A computation was refused or abandoned because it exceeds a configured limit.

    ``bound`` carries whatever partial information was available (for instance
    a lower bound on an automorphism group order), or None.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound
