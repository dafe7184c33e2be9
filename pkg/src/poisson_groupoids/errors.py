"""Exception hierarchy shared by all modules."""


class DomainError(Exception):
    """A point left the open locus on which a construction is defined."""


class NotInOpenCell(DomainError):
    """Gauss factorization failed: a leading principal minor is too small."""


class NotInDressingDomain(DomainError):
    """The pair is outside the open set where the dressing factorization exists."""


class NotInCell(DomainError):
    """A group element is not in the requested Bruhat cell."""


class DomainEscape(DomainError):
    """A finite-difference probe point left the domain of the map."""


class NotComposable(Exception):
    """Groupoid multiplication attempted on a non-composable pair."""


class IndexMismatch(Exception):
    """Action vector lists are not indexed like the dual Borel bases."""


class RankDeficient(Exception):
    """A parametrization is not immersive at the requested point."""


class InvariantViolation(Exception):
    """A structured element fails its defining algebraic constraint."""


class ConfigError(Exception):
    """Invalid verification suite configuration."""
