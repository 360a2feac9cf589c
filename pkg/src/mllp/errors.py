"""Exception and warning types shared across the toolkit."""


class DomainError(ValueError):
    """A parameter or argument lies outside the supported domain."""


class PoleError(DomainError):
    """A gamma-function pole was hit (argument is a nonpositive integer)."""


class TermCapExceeded(ArithmeticError):
    """A series could not be summed to the requested accuracy within the term cap."""


class IntegrationFailure(ArithmeticError):
    """Numerical quadrature did not reach the requested tolerance."""


class EmptySample(ValueError):
    pass


class NonMonotoneCDF(ValueError):
    pass


class ConfigError(ValueError):
    """Malformed verification config. The message names the offending key."""


class EfficiencyWarning(RuntimeWarning):
    """Rejection sampler running with a very small acceptance probability."""
