"""rotlab: exact computations around irrational rotations and shrinking
targets, plus the formal-Laurent-series analogue over finite fields.

Everything rigorous is exact integer/rational arithmetic or a directed-
rounded enclosure; floating point never enters a certified result.
"""

__version__ = "0.1.0"

from .errors import (DepthExceededError, InputError, InternalInvariantError,
                     PrecisionError, RotlabError, WitnessNotFoundError)
from .intervals import DEFAULT_BITS, RatInterval

__all__ = [
    "DEFAULT_BITS",
    "DepthExceededError",
    "InputError",
    "InternalInvariantError",
    "PrecisionError",
    "RatInterval",
    "RotlabError",
    "WitnessNotFoundError",
    "__version__",
]
