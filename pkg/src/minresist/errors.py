"""Exception types shared across the package."""


class DegenerateConfiguration(RuntimeError):
    """The combinatorial structure of the body could not be resolved.

    Raised when the facet classification stays ambiguous even after the
    circle sampling has been refined.  Callers (typically the optimizers)
    should perturb the offending configuration and try again.
    """


class NoRoot(RuntimeError):
    """A tangency computation failed to produce a supporting plane."""


class InvalidLift(ValueError):
    """A refinement lift would push a point to or above the top face."""


class EmptyArc(ValueError):
    """No on-axis points were found when seeding the restricted variables."""
