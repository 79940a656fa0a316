"""Variation indexes for positive multivariate data.

Generalized (GVI), marginal (MVI), relative (RVI) and relative-weighted (RWI)
variation indexes, their delta-method and bootstrap inference, closed-form
calculators for several bivariate and multivariate families, and a NORTA
scenario simulator.
"""

__version__ = "0.1.0"

from .core import (AugmentedMoments, DataError, Dataset, MomentSummary, NumericError,
                   VarIndexError, augmented_moments, correlation_from_cov, load_csv, summarize,
                   write_csv)
from .indexes import (IndexValue, VarianceFunction, VariationClass, bivariate_decomposition,
                      classify, cross_term, gvi, gvi_function, marginal_vi, mvi, mvi_function,
                      pseudo_inverse, rvi, rwi)
from .asymptotics import (ConfidenceInterval, asymptotic_ci, delta_gvi, lambda_mvi, sigma2_gvi,
                          sigma2_mvi, sample_raw_moments, univariate_sigma2,
                          wald_equivariation_test)
from .resampling import BootstrapResult, bootstrap_indexes
from .norta import (InfeasibleCorrelationError, MarginalSpec, ScenarioSpec, load_scenario,
                    marginal_quantile, marginal_stats, match_gaussian_correlation, nearest_pd,
                    norta_sample)

__all__ = [name for name in dir() if not name.startswith("_")]
