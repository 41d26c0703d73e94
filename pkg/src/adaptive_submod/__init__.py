"""Low-adaptivity submodular maximization and cover, with exact query
and adaptive-round accounting.

The package provides:

  * an instrumented oracle layer (`OracleHandle`, `QueryLedger`) over
    monotone submodular objectives,
  * concrete objectives (weighted coverage, facility location, additive)
    with random generators and an instance-file format,
  * threshold sampling and the mean estimator it is built on,
  * three maximization drivers (exhaustive threshold grid, imprecise
    bisection, subsample preprocessing) for cardinality constraints,
  * submodular cover for integer-valued objectives,
  * classical baselines (greedy, lazy greedy, brute force), and
  * a benchmark CLI (`adaptive-submod`).
"""

from .baselines import (EnumerationLimitError, brute_force_cover,
                        brute_force_max, greedy, lazy_greedy)
from .cover import (CoverConfig, CoverOutcome, InfeasibleTargetError,
                    adaptive_greedy_cover, threshold_sampling_for_cover)
from .estimator import (BernoulliSource, DtSampler, EstimatorVerdict,
                        reduced_mean, reduced_mean_batched,
                        reduced_mean_sample_count)
from .maximize import (DecisionOutcome, Interval, PreprocessSchedule,
                       binary_search_interval, binary_search_maximization,
                       exhaustive_maximization, imprecise_decision,
                       max_singleton, subsample_maximization,
                       subsample_preprocessing)
from .objectives import (AdditiveInstance, CoverageInstance, FacilityInstance,
                         InstanceFormatError, additive_value, coverage_value,
                         facility_value, gen_additive, gen_coverage,
                         gen_facility, load_instance, save_instance)
from .oracle import (OracleHandle, QueryLedger, as_selection,
                     sample_uniform_subset, subsample_bernoulli)
from .report import RunReport
from .rng import RandomSource
from .threshold import (ThresholdConfig, ThresholdOutcome, round_filter,
                        threshold_sampling)

__all__ = [
    "AdditiveInstance", "BernoulliSource", "CoverConfig", "CoverOutcome",
    "CoverageInstance", "DecisionOutcome", "DtSampler", "EnumerationLimitError",
    "EstimatorVerdict", "FacilityInstance", "InfeasibleTargetError",
    "InstanceFormatError", "Interval", "OracleHandle", "PreprocessSchedule",
    "QueryLedger", "RandomSource", "RunReport", "ThresholdConfig",
    "ThresholdOutcome", "additive_value", "adaptive_greedy_cover",
    "as_selection", "binary_search_interval", "binary_search_maximization",
    "brute_force_cover", "brute_force_max", "coverage_value",
    "exhaustive_maximization", "facility_value", "gen_additive",
    "gen_coverage", "gen_facility", "greedy", "imprecise_decision",
    "lazy_greedy", "load_instance", "max_singleton", "reduced_mean",
    "reduced_mean_batched", "reduced_mean_sample_count", "round_filter",
    "sample_uniform_subset", "save_instance", "subsample_bernoulli",
    "subsample_maximization", "subsample_preprocessing", "threshold_sampling",
    "threshold_sampling_for_cover",
]

__version__ = "0.1.0"
