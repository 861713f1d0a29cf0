"""Exception and warning types raised across the package."""


class SingletLhvError(ValueError):
    """Base class for invalid inputs rejected by this package."""


class InvalidRegion(SingletLhvError):
    """(a0, mu) lies outside the closed effect triangle."""

    def __init__(self, a0, mu, reason=""):
        self.a0 = a0
        self.mu = mu
        self.reason = reason
        msg = f"(a0={a0!r}, mu={mu!r}) is not a valid effect"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class ZeroDirection(SingletLhvError):
    """A direction vector was (numerically) zero."""


class NotAdmissible(SingletLhvError):
    """A scenario violates the restrictions of the requested LHV model.

    ``violations`` lists the names of the failed conditions.
    """

    def __init__(self, violations, detail=""):
        self.violations = tuple(violations)
        msg = "scenario not admissible: " + ", ".join(self.violations)
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ProtocolMismatch(SingletLhvError):
    """Alice's unsharpness differs from the constant baked into an eta model."""


class ZeroSamples(SingletLhvError):
    pass


class InvalidRange(SingletLhvError):
    pass


class OptimizerDidNotConverge(RuntimeWarning):
    """No CHSH restart reached the gradient tolerance; best value still reported."""
