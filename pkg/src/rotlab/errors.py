"""Exception taxonomy.

Three failure modes are distinguished everywhere in this package:

* bad input (caller error)                      -> InputError
* the quotient/coefficient source ran dry       -> DepthExceededError
* a comparison stayed undecided at the
  configured precision cap                      -> PrecisionError

DepthExceededError and PrecisionError mean "refused, not wrong": the
requested computation may be possible with a deeper stream or more bits.
InternalInvariantError signals that an exactly-checked invariant failed,
which is always an implementation bug.
"""


class RotlabError(Exception):
    pass


class InputError(RotlabError, ValueError):
    pass


class DepthExceededError(RotlabError):
    pass


class PrecisionError(RotlabError):
    pass


class WitnessNotFoundError(DepthExceededError):
    """No witness subsequence found within the searched depth.

    Consistent with the searched number not admitting one at all; the
    search depth is reported in the message.
    """


class InternalInvariantError(RotlabError):
    pass
