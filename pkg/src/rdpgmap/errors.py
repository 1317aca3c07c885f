"""Exception taxonomy shared across the package.

Every error raised by library code is one of these, so callers (and the
command line driver) can map failure modes to exit codes without string
matching.
"""


class RdpgmapError(Exception):
    """Common base so callers can catch any library failure at once."""


class InputError(RdpgmapError, ValueError):
    """Malformed or inconsistent caller input (shapes, dtypes, ranges)."""


class ConfigError(RdpgmapError, ValueError):
    """Invalid configuration object (grids, sizes, model parameters)."""


class DomainError(RdpgmapError, ValueError):
    """Operation applied outside its mathematical domain."""


class ModelViolationError(RdpgmapError, ValueError):
    """Latent positions or probability entries violate model constraints.

    Carries the offending index pairs so callers can report them.
    """

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = list(pairs) if pairs is not None else []


class ParseError(RdpgmapError, ValueError):
    """Malformed input file. Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(RdpgmapError, RuntimeError):
    """Iterative routine failed to reach its tolerance.

    ``residuals`` holds whatever convergence measures were available at
    the point of failure.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals) if residuals is not None else {}
