"""Robust polytomous logistic regression via density power divergence."""
from ._plrm import (  # noqa: F401
    __version__,
    approximate_power,
    category_probabilities,
    chisq_cdf,
    chisq_quantile,
    dpd_objective,
    estimating_function,
    fit,
    influence,
    level_study,
    mse_study,
    noncentral_chisq_cdf,
    normal_cdf,
    normal_quantile,
    required_sample_size,
    select_lambda,
    wald_test,
)
