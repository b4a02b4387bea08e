"""Exception types shared across the package."""


class SetdynError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SetdynError):
    """Invalid user input: unknown system, bad parameter, malformed config."""


class BudgetError(SetdynError):
    """A box or edge budget would be exceeded."""


class NumericsError(SetdynError):
    """Numerical failure: blow-up, non-finite map image, no convergence."""
