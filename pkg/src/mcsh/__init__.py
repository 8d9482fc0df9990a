"""Pseudo-spectral toolkit for a gauged scalar field coupled to a
Chern-Simons-modified Maxwell field and a neutral scalar on a periodic
2-torus, in Lorenz gauge, together with the Fourier-analytic machinery
(Fourier-Lebesgue norms, null forms, cone-weighted estimates) used to
study its low-regularity behaviour.
"""

from .errors import (
    BasisError,
    BlowUpError,
    ConfigurationError,
    ConstraintError,
    DivergenceError,
    GridMismatchError,
    McshError,
    NonConvergenceError,
    PreconditionError,
    ResolutionError,
)
from .spectral import (
    Grid2D,
    MultiplierSpec,
    SpectralField,
    WindowInfo,
    as_field,
    dealias_product,
    gaussian_bump,
    random_complex_field,
    random_real_field,
)
from .model import (
    FIELD_NAMES,
    FieldState,
    GaussSolveInfo,
    HalfWaveState,
    PhysParams,
    apply_spatial_gauge,
    covariant_derivative,
    curvature,
    make_compatible_data,
    rhs_second_order,
    split,
    unsplit,
    zero_state,
)
from .evolve import EvolveResult, integrate, self_convergence_order
from .diagnostics import (
    DiagnosticsRecord,
    diagnostics_record,
    energy,
    gauss_residual,
    lorenz_residual,
    maxwell_residuals,
    write_diagnostics_csv,
)
from .spaces import (
    RegularityParams,
    SpaceTimeField,
    admissible,
    cor13_values,
    critical_exponent,
    dilate,
    fl_norm,
    fl_norm_homogeneous,
    gap,
    gap_report,
    scaling_check,
    signed_norm,
    wave_sobolev_norm,
)
from .nullforms import (
    DeltaIntegralSpec,
    FreqPair,
    delta_integral,
    delta_integral_asymptotic,
    df_cf_split,
    far_branch_integral,
    hlr_sweep,
    hyperbolic_leibniz_check,
    null2_residual,
    nullform_Q,
    nullform_q,
    symbol_bound_ratio,
    symbol_sweep,
)
from .probes import (
    LEMMAS,
    ProbeSpec,
    hypothesis_violations,
    make_random_wave,
    probe,
    probe_cubic,
    report_json,
    st_product,
    st_upsample,
)

__version__ = "0.1.0"
