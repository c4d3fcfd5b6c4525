class NumericalError(ArithmeticError):
    """Filter divergence, singular precision, or integrator blow-up."""


class TrialError(RuntimeError):
    """A trial aborted; carries the decision step at which it failed."""

    def __init__(self, step: int, cause: BaseException):
        self.step = step
        self.cause = cause
        super().__init__(f"trial failed at step {step}: {type(cause).__name__}: {cause}")
