"""rapidtail: joint light-tail asymptotics of skew-elliptical distributions.

The package evaluates skew-elliptical densities and their margins, builds
the canonical tail normalization (auxiliary scale m and scaling function V),
exposes the closed-form exponential tail density at infinity together with
its copula-level counterparts (upper tail density, tail dependence
function), and verifies the limit relations at finite truncation via
log-domain quadrature and sequence extrapolation.
"""

from .copulatail import (
    CopulaTailForm,
    copula_density,
    lambda_u_closed_form,
    log_copula_density,
    numeric_b_u_ratio,
    numeric_lambda_u_ratio,
    scaling_defect_lambda_u,
    survival_copula_value,
)
from .errors import (
    DomainError,
    InconclusiveEstimateError,
    InvalidDimensionError,
    InvalidDispersionError,
    InvalidMatrixError,
    InvalidSkewnessError,
    InvalidSpecError,
    NonIntegrableOrthantError,
    NotTailEquivalentError,
    NumericFailureError,
    QuantileRangeError,
    RapidTailError,
    ShapeError,
)
from .extrapolate import aitken_extrapolate, richardson_extrapolate
from .generators import (
    DensityGenerator,
    gamma_class_ratio,
    make_normal_generator,
    mda_gumbel_defect,
    normalization_defect,
    reduce_dimension,
    self_neglecting_defect,
)
from .skewell import (
    SkewEllipticalSpec,
    TailEquivalenceProfile,
    build_spec,
    example31_spec,
    log_density,
    marginal_log_density,
    sample,
    tail_equivalence_profile,
)
from .specio import spec_digest, spec_from_toml, spec_to_toml
from .tailasym import (
    ExponentialTailDensity,
    FiniteTTailDensity,
    additive_stability_defect,
    closed_form_tail_density,
    log_upper_integral,
    numeric_lambda,
    upper_integral,
)
from .tails1d import (
    ScalingPair,
    build_scaling,
    log_cdf,
    log_survival,
    quantile,
    reciprocal_hazard,
)
from .verify import (
    ConvergenceReport,
    importance_survival,
    joint_survival,
    local_uniformity_sweep,
    report_to_csv,
    verify_example31,
    verify_rapid_variation,
    verify_tail_density,
    write_report,
)

__version__ = "0.1.0"
