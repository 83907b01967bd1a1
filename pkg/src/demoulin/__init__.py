"""Surfaces in projective 3-space from their canonical-system coefficients.

The package takes the four coefficient functions (b, c, p, q) of a canonical
system, builds invariant jets and unimodular moving frames, maps frames to
quadrics through the two Gauss constructions, extends the frame connection
into spectral-parameter families for the two twistings, and verifies the
classification equivalences numerically: conformality of the first-order map
against the Demoulin condition, and flatness of the two families against the
Demoulin-or-coincidence and projective-minimal conditions.
"""

__version__ = "0.1.0"

from .errors import (
    ChartError, ConfigError, ConsistencyError, DegenerateCoefficientError,
    DemoulinError, DomainBoundaryError, EvalDomainError, NonUnimodularFrameError,
    NotDemoulinError, ParseError, SingularMatrixError,
)
from .expr import differentiate, evaluate, evaluate_array, parse, to_string
from .linalg import J1, J2, commutator, det_inv_trace, offdiag, quadric_check
from .surface import (
    InvariantJet, SurfaceClassification, SurfaceSpec, classify,
    compatibility_residual, invariants_at, invariants_grid,
)
from .frame import (
    ConnectionPair, FrameField, connection_at, connection_matrices,
    frame_at, integrate_frame, mc_residual, path_independence_residual,
)
from .gauss import (
    Quadric, conformality_diagnostics, gauss_derivatives_closed_form,
    gauss_map, inner_product,
)
from .loopgroup import (
    KappaGrading, eigenprojection, flatness_scan, gauge_transform,
    kappa, loop_connection, primitivity_check, sigma, tau1, tau2,
    twisted_symmetry_residual,
)
from .cli import DiagnosticsReport, export_surface, load_config, run_report
