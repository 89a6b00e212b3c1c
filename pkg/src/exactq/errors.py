"""Exception types shared across the package.

Everything derives from ValueError so callers that only care about "bad input
vs bug" can catch one base class.
"""

from __future__ import annotations


class ExactQError(ValueError):
    """Base class for all package-specific errors."""


class NotIsometry(ExactQError):
    """Specified gadget columns are not orthonormal, or completion failed."""


class BindingConflict(ExactQError):
    """A label binding is not a bijection onto the gadget's label space."""


class PartitionGap(ExactQError):
    """A measured label matched no outcome predicate."""


class IndexOutOfRange(ExactQError):
    """A query extractor produced an index outside 1..n."""


class ConstraintViolation(ExactQError):
    """Step constants fail one of their defining identities."""


class DivergedChain(ExactQError):
    """The decay recurrence was fed a gamma at or beyond its pole."""


class DegenerateCase(ExactQError):
    """Parameters collapse the construction (for example n = d)."""


class NoChain(ExactQError):
    """No known recursion chain exists for the requested parameters."""


class InconsistentSpec(ExactQError):
    """A symmetric-function description contradicts itself."""


class NotSymmetrizable(ExactQError):
    """A polynomial expected to be symmetric is not, beyond tolerance."""


class ZeroWitnessMissing(ExactQError):
    """Root counting requires a nonzero witness point, and it vanished."""
