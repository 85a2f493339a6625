"""Exact multi-soliton solutions of the symmetric matrix wave equation.

The equation (g_{,zeta} g^{-1})_{,eta} + (g_{,eta} g^{-1})_{,zeta} = 0
for a real symmetric positive 2x2 field with det g = 1 is integrable;
this package builds its N-soliton solutions on diagonal wave
backgrounds, checks them against the PDE by finite differences,
computes the associated hierarchy of conservation laws, and performs
the scalar log-eigenvalue reduction.
"""

__version__ = "0.1.0"

from .background import Background, by_name, custom, flat, spacelike, timelike
from .conservation import (
    ABPair,
    BarredMap,
    ConservedHierarchy,
    IntegralReport,
    PQPoint,
    barred_map,
    compute_ab,
    integrals,
    p_series,
    pq_eval,
    q_series,
    riccati_residual,
)
from .errors import (
    ChiralFieldError,
    ConfigError,
    ConstraintViolation,
    DegenerateField,
    DegeneratePair,
    InvalidPole,
    NoCrest,
    NonRealOutput,
    Overflow,
    SingularLambda,
    SingularMatrix,
    SpectralPole,
    UnknownComponent,
)
from .fields import (
    FieldGrid,
    Grid,
    HyperboloidPoint,
    LightconePoint,
    SymUnitMatrix,
    from_lightcone,
    hyperboloid_constraint,
    pde_residual,
    to_hyperboloid,
    to_lightcone,
)
from .numerics import (
    ConvergenceReport,
    MonotoneCubic,
    central_diff,
    convergence_study,
    cumulative_simpson,
    fit_order,
    simpson,
    trimmed_max,
)
from .reduction import (
    LambdaPhi,
    ScalarReport,
    alt_equations_residual,
    compose,
    compose_field,
    decompose,
    decompose_field,
    det_identities,
    phi_elimination,
    scalar_residual,
    unit_constraint_residual,
)
from .solitons import (
    CrestTrack,
    Kinematics,
    SolitonConfig,
    crest_track,
    kinematics,
    n_soliton,
    one_soliton,
    soliton_field,
    soliton_frame,
    two_soliton,
)

__all__ = [name for name in dir() if not name.startswith("_")]
