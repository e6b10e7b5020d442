"""Exception types raised across the package."""


class ModelMismatchError(ValueError):
    """Arguments belong to different model spaces (or ranks)."""


class DegenerateInputError(ValueError):
    """Input is outside the domain where the quantity is defined."""


class NoConvergenceError(RuntimeError):
    """A limiting object (hitting point, decay rate) could not be detected."""


class ReducibleChainError(ValueError):
    """Markov kernel has more than one recurrent class."""

    def __init__(self, classes):
        self.classes = [sorted(int(s) for s in c) for c in classes]
        super().__init__(f"kernel has {len(self.classes)} recurrent classes: {self.classes}")


class PeriodicChainError(ValueError):
    """Markov kernel is periodic, so iterates do not decay."""

    def __init__(self, period):
        self.period = int(period)
        super().__init__(f"chain is periodic with period {self.period}")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""
