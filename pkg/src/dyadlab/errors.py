"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid/space/experiment configuration (CLI exit code 1)."""


class HypothesisFailure(RuntimeError):
    """An input failed a required structural hypothesis, e.g. the left and
    right symbol reconstructions of a kernel disagree (CLI exit code 2)."""


class QuadratureError(RuntimeError):
    """A quadrature failed its convergence or tail-tolerance check."""
