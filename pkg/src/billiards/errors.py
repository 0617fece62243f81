"""Exception types shared across the package.

Every error raised on a documented failure path derives from BilliardsError so
callers (and the CLI) can catch one base class and map it to a nonzero exit.
"""


class BilliardsError(Exception):
    """Base class for all package-specific failures."""


class DegenerateInput(BilliardsError):
    """Construction input is geometrically unusable (too few vertices,
    repeated points, zero-length edge, collinear corner, cusp)."""


class SelfIntersecting(BilliardsError):
    """The requested boundary would cross itself."""


class NonClosing(BilliardsError):
    """A polygon walk fails to return to its starting point."""


class RadiusTooLarge(BilliardsError):
    """Corner fillets would overlap or swallow an edge."""


class SupportHitsCorner(BilliardsError):
    """A curvature bump's support interval contains a corner."""


class UnsupportedTable(BilliardsError):
    """The operation is not defined for this table's piece types."""


class AtCorner(BilliardsError):
    """Pointwise boundary data requested exactly at a corner parameter."""


class HitCorner(BilliardsError):
    """A traced ray lands within the corner guard of a corner."""


class GrazingRay(BilliardsError):
    """A traced ray meets the boundary tangentially (|w . n| below the
    tangency tolerance), where the bounce map is discontinuous."""


class NoIntersection(BilliardsError):
    """A ray escapes without meeting the boundary again (numerical failure;
    geometrically impossible for a closed table)."""


class InvalidConfiguration(BilliardsError):
    """A bounce configuration violates its invariants (corner guard,
    separation of consecutive points, parameter count)."""


class NotCritical(BilliardsError):
    """Second-order data requested at a configuration that is not a critical
    point of the perimeter-chord length sum."""


class NoConvergence(BilliardsError):
    """The orbit solver exhausted its iteration budget."""


class DegenerateChord(BilliardsError):
    """Consecutive bounce points collapsed below the minimum chord length."""


class CornerAdjacent(BilliardsError):
    """An orbit solve or trace ran into the corner guard."""


class ObstructedOrbit(BilliardsError):
    """A variational critical point failed the dynamical re-trace check
    (a chord exits the table or a bounce re-traces to the wrong point)."""


class TolTooSmall(BilliardsError):
    """No rational-angle polygon within the approximation budget meets the
    requested tolerance."""


class MismatchedReport(BilliardsError):
    """A report file was produced from a different table than the one given."""


class EmptySample(BilliardsError):
    """A unit-tangent-bundle sample contains no states."""
