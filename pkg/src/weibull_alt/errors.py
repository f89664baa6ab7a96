"""Exception types shared across the package.

Input problems (bad arguments, malformed files) raise ``ValueError`` or one of
its subclasses.  Numeric or model failures derive from :class:`ModelError`; the
CLI maps the first family to exit code 2 and the second to exit code 1.
"""


class ModelError(Exception):
    """A numeric or statistical model failure."""


class DegenerateDataError(ModelError):
    """The score equation has no sign change, e.g. all failure times are equal."""


class NonIdentifiableError(ModelError):
    """The likelihood has no interior maximum (PHC with zero failures before the cutoff)."""


class InformationError(ModelError):
    """The observed information matrix is not positive definite."""


class RankDeficiencyError(ModelError):
    """A regression design is singular or too ill-conditioned to solve."""


class SchemeError(ValueError):
    """A censoring scheme or dataset violates its structural invariants."""
