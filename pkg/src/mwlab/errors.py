"""Exception types shared across the library."""


class MwlabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(MwlabError):
    """Operands live in different ambient dimensions."""


class DegenerateBody(MwlabError):
    """A full-dimensional body was required but a lower-dimensional one was given."""


class SolverFailure(MwlabError):
    """An iterative solver did not converge within its iteration cap."""


class NotSPD(MwlabError):
    """A matrix that must be symmetric positive definite is not."""


class Singular(MwlabError):
    """A matrix that must be invertible is numerically singular."""


class DegenerateNorm(MwlabError):
    """A norm evaluator vanishes on a probe direction."""


class ParseError(MwlabError):
    """A file could not be parsed."""


class SchemaMismatch(MwlabError):
    """A file parsed but does not match the expected schema."""


class CubeOutsideDomain(MwlabError):
    """A dyadic cube reference does not lie inside the domain."""


class DomainMismatch(MwlabError):
    """Two grid functions live on different domains."""


class BoundViolation(MwlabError):
    """A certified operator bound was violated beyond the escalation budget."""


class NonMonotoneOperator(MwlabError):
    """An operator failed a monotonicity validation probe."""


class NotInAp(MwlabError):
    """A weight's Muckenhoupt-type constant overflowed."""


class ExponentOutOfRange(MwlabError):
    """An exponent lies on the wrong side of the allowed range."""


class CaseMismatch(MwlabError):
    """Exponents do not match the requested rescaling case."""


class ZeroNorm(MwlabError):
    """An input function has zero norm where a positive norm is required."""
