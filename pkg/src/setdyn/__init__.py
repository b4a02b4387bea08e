"""setdyn: set-oriented detection of attractors, repellers and reversible cores.

Subpackages:

- ``mapzoo``  -- the catalogue of benchmark maps,
- ``flows``   -- normal-form vector fields, rescalings and RK4 integration,
- ``boxdyn``  -- box coverings and epsilon-transition graphs,
- ``chain``   -- chain recurrence, attractor/repeller/core detection,
- ``revcore`` -- reversibility and symmetric-point verification,
- ``cli``     -- the command-line front end.
"""

__version__ = "0.1.0"

from .errors import BudgetError, ConfigError, NumericsError, SetdynError

__all__ = ["BudgetError", "ConfigError", "NumericsError", "SetdynError", "__version__"]
