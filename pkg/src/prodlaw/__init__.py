"""Products of independent non-Hermitian random matrices: exact mean
spectral measures, limit laws, sampling, spectral statistics, logarithmic
potentials, and rate-of-convergence experiment harnesses.

The package splits into exact computation (specfun, limits), simulation
(ensembles, spectra), potential-theoretic checks (potential_lab), and
orchestration (harness, cli).
"""

__version__ = "0.1.0"

from .ensembles import ENTRY_LAWS, EnsembleSpec, Linearization, ProductSample
from .ensembles import build_hermitization, build_linearization
from .ensembles import condition_c_report, sample_product
from .harness import ExperimentPlan, RateReport, TARGETS
from .harness import emit_report, fit_rate, run_plan
from .limits import LimitLaw, StieltjesPoint
from .limits import limit_ball_measure, limit_ring_cdf, log_potential_limit
from .limits import nu_z_density, quarter_circle_cdf, stieltjes_limit
from .potential_lab import BUMP_CONSTANT, MollifiedIndicator, PoweredIndicator
from .potential_lab import RandomGrid, grid_approximation
from .potential_lab import limit_integral, local_law_identity_eval
from .potential_lab import local_law_statistic, log_potential_empirical
from .spectra import BallDistanceStat, Spectrum
from .spectra import ball_sup_distance, ball_sup_doubling_gap
from .spectra import bernoulli_count_sample, eigenvalues
from .spectra import linearization_root_spectrum, radial_ks_distance
from .spectra import singular_values
from .specfun import ContourConfig, DistanceProfile, MeanSpectralMeasure
from .specfun import MeijerWeight, PrecisionError
from .specfun import eta_k, eta_profile, mean_ball_complement, mean_ball_measure
from .specfun import mean_ball_measure_contour, mean_density
from .specfun import mean_distance_profile, meijer_g_log

__all__ = [
    "__version__",
    "ENTRY_LAWS", "EnsembleSpec", "Linearization", "ProductSample",
    "build_hermitization", "build_linearization", "condition_c_report",
    "sample_product",
    "ExperimentPlan", "RateReport", "TARGETS", "emit_report", "fit_rate",
    "run_plan",
    "LimitLaw", "StieltjesPoint", "limit_ball_measure", "limit_ring_cdf",
    "log_potential_limit", "nu_z_density", "quarter_circle_cdf",
    "stieltjes_limit",
    "BUMP_CONSTANT", "MollifiedIndicator", "PoweredIndicator", "RandomGrid",
    "grid_approximation", "limit_integral", "local_law_identity_eval",
    "local_law_statistic", "log_potential_empirical",
    "BallDistanceStat", "Spectrum", "ball_sup_distance",
    "ball_sup_doubling_gap", "bernoulli_count_sample", "eigenvalues",
    "linearization_root_spectrum", "radial_ks_distance", "singular_values",
    "ContourConfig", "DistanceProfile", "MeanSpectralMeasure", "MeijerWeight",
    "PrecisionError", "eta_k", "eta_profile", "mean_ball_complement",
    "mean_ball_measure", "mean_ball_measure_contour", "mean_density",
    "mean_distance_profile", "meijer_g_log",
]
