"""Numerical laboratory for the bound sup_z P(X <= z, X + Y >= 2z) >= 1/(24 + 8 log2(med(X) ||f||_inf))."""

__version__ = "0.1.0"

from .density import (
    Density,
    ExponentialDensity,
    HistogramDensity,
    cdf_eval,
    dilate,
    histogram_from_bins,
    median_of,
    renormalize,
)
from .functionals import (
    DeltaProfile,
    conditional_ratio,
    convolution_tail,
    delta_at,
    delta_monte_carlo,
    delta_profile,
    delta_values,
    min_sum_decomposition,
)
from .openproblem import RatioProfile, conjecture_scan, exponential_identity_check, weighted_ratio
from .optimizer import SearchConfig, SearchState, certify_candidate, optimize
from .sharpness import SharpFamilyParams, b_constant_obstruction, sharp_family, sharpness_experiment
from .theorem import TheoremReport, dyadic_band_lemma, ell_partition_check, theorem_rhs, verify_theorem
