"""Planar billiard dynamics on piecewise-smooth perimeter-one tables.

Periodic orbits are found as critical points of the chord-length sum over
bounce configurations; certificates come from the cyclic-tridiagonal second
variation.  Tables can be smoothed at corners, perturbed by compact
curvature bumps, approximated by rational-angle polygons, and compared in a
Hausdorff-type distance on their sampled unit tangent bundles.
"""

from .errors import (AtCorner, BilliardsError, CornerAdjacent,
                     DegenerateChord, DegenerateInput, EmptySample,
                     GrazingRay, HitCorner, InvalidConfiguration,
                     MismatchedReport, NoConvergence, NoIntersection,
                     NonClosing, NotCritical, ObstructedOrbit,
                     RadiusTooLarge, SelfIntersecting, SupportHitsCorner,
                     TolTooSmall, UnsupportedTable)
from .metric import (BundleSample, alpha_distance, sample_unit_tangent_bundle)
from .phase import (HalfCircle, PhasePoint, Trajectory,
                    admissible_directions, billiard_map, iterate)
from .rational import (RationalAngleSpec, approximate_by_rational_polygon,
                       build_rational_polygon)
from .render import orbit_report, render_svg, trajectory_report
from .search import (CoverageReport, PeriodicOrbit, PersistenceReport,
                     PhaseCell, density_scan, find_periodic_orbit,
                     multistart_search, persistence_test, phase_grid)
from .table import (CornerInfo, CurvatureBump, Table, build_polygon,
                    build_smooth_curve, corner_set, perturb_curvature,
                    smooth_corners, table_fingerprint, transfer_params)
from .tablefile import load_table, save_table, table_from_definition
from .variational import (BounceConfiguration, HessianData,
                          NondegeneracyReport, SensitivityRecord,
                          assemble_hessian, check_nondegeneracy,
                          curvature_sensitivity, length_functional,
                          length_gradient)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
