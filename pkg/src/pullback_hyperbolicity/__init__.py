"""Characteristic analysis of sigma models whose Lagrangian depends only on sigma2.

Maps from 4D Minkowski space into a 2D target are analyzed pointwise: the
principal symbol of the field equations factors into two quadratic forms
``G1`` and ``G2``, and ``G1`` is always singular on a pullback configuration.
"""

__version__ = "0.1.0"

from .backgrounds import (
    BACKGROUNDS,
    GEOMETRIES,
    ConstantMap,
    CustomDiagonal,
    FlatTarget,
    LinearMap,
    PlaneWave,
    PoincareDisk,
    ProductWave,
    SphereStereographic,
    fd_check,
    jet_eval,
)
from .errors import (
    AnalysisError,
    ChartDomainError,
    ConfigError,
    DegenerateModel,
    DomainError,
    FullyDegenerate,
    MissingHessian,
    NoRealRoot,
    StepUnderflow,
)
from .geometry import (
    EUCLIDEAN_TARGET,
    MINKOWSKI,
    JetSample,
    MetricSample,
    PullbackForm,
    TargetMetricSample,
    cayley_hamilton_residual,
    elementary_symmetric,
    hodge_dual,
    jet_strain,
    pullback_metric,
    pullback_two_form,
    strain_and_invariants,
)
from .models import AFZ, PRESETS, STRONGLY_COUPLED, LagrangianModel, PowerModel, eval_model
from .rays import BranchField, integrate_ray, null_project
from .symbol import (
    char_poly,
    classify_form,
    contract_symbol,
    degeneracy_report,
    determinant_identity,
    eom_residual,
    factorization_residual,
    inertia,
    principal_part,
    QuarticForm,
    quadratic_forms,
    quartic_form,
    symbol,
)
