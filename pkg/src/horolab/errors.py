"""Exception types shared across the package."""


class HorolabError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(HorolabError, ValueError):
    """Dimension parameter outside the supported range."""


class UnsupportedDimensionError(HorolabError, NotImplementedError):
    """Operation implemented only for ambient dimension 2 or 3."""


class BoundaryError(HorolabError, ArithmeticError):
    """Input sits on a measure-zero boundary where coordinates degenerate."""


class DisjointnessError(HorolabError, RuntimeError):
    """Overlapping windows detected; the thickening parameter is too large."""


class ResourceLimitError(HorolabError, RuntimeError):
    """Enumeration budget exceeded; carries the bound that was used."""

    def __init__(self, message: str, budget: int):
        super().__init__(message)
        self.budget = budget


class ConfigError(HorolabError, ValueError):
    """Malformed configuration document or flag combination."""
