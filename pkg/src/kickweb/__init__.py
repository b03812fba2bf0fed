"""Kicked nano-mechanical membrane: stochastic web map and chaos diagnostics."""

__version__ = "0.1.0"

from .webmap import (  # noqa: E402
    ESCAPE_X,
    EscapeError,
    FixedPoint,
    MapParams,
    OrbitRecord,
    PhaseState,
    find_fixed_points,
    fixed_line_slope,
    iterate,
    kick,
    rotate,
    step,
    step_arrays,
    step_complex,
)
from .diagnostics import (  # noqa: E402
    EigenPair,
    Jacobian,
    LyapunovEstimate,
    SurvivalCurve,
    disk_ensemble,
    eigenvalues,
    jacobian,
    jacobian_arrays,
    lyapunov_divergence,
    lyapunov_tangent,
    survival_probability,
    symmetry_score,
)
from .physical import (  # noqa: E402
    DerivedScales,
    OptomechanicalParams,
    check_regime,
    derive_scales,
    from_dimensionless,
    to_dimensionless,
)
from .portrait import (  # noqa: E402
    GridInitials,
    OccupancyGrid,
    PointCloud,
    PortraitSpec,
    RandomInitials,
    magnify,
    render_portrait,
)
