"""Mean oscillation, Campanato approximation and W^{2,p} checks on the unit disk."""

from .campanato import Poly2, campanato_iterate, decay_exponent, drift_check, key_step, lsq_fit_quadratic, trace_correct
from .corpus import AnalyticPair, get_pair, list_pairs, pair_validate
from .elliptic import SolverConfig, harmonic_replacement, poisson_dirichlet, residual, w22_interior_check
from .errors import (
    ConfigurationError,
    GridMismatchError,
    InputError,
    InsufficientDataError,
    NumericalError,
    OscillometerError,
    SolverError,
    UnderResolvedError,
)
from .estimates import (
    cz_sweep,
    fefferman_stein_check,
    load_pair_data,
    pinf_failure_probe,
    sharp_bound_check,
    theorem_t2_report,
)
from .field import GridSpec, ScalarField, SymTensorField, VectorField, ball_region, build_grid, sample_analytic
from .norms import ScaleLadder, bmo_norm, bmo_seminorm_at, bmo_seminorm_domain, mean, oscillation, sharp_maximal_field, starred_norm
from .reports import EstimateReport

__version__ = "0.1.0"
