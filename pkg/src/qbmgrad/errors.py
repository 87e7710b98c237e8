"""Exception hierarchy shared across the package.

Two families matter to callers: ``SpecError`` for malformed inputs
(bad shapes, schema violations, out-of-range options) and ``GuardError``
for runs that are well-formed but numerically out of bounds.  The CLI
maps them to exit codes 2 and 3 respectively.
"""


class SpecError(ValueError):
    """Input is malformed or violates a declared precondition."""


class StructureError(SpecError):
    """Operator lacks the block structure the caller declared."""


class GuardError(RuntimeError):
    """A numerical guard tripped (overflow, support loss, size limit)."""


class SupportError(GuardError):
    """State eigenvalue below the support floor; inverses untrustworthy."""


class ScaleError(GuardError):
    """Matrix exponent or register size exceeds the supported range."""
