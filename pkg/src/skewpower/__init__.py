"""
Epsilon-skew exponential power (ESEP) and epsilon-skew t distributions.

Densities, CDFs, quantiles and samplers; simultaneous ML estimation of
location, scale and skewness by iterative reweighting; robustness and
asymptotic diagnostics; goodness of fit; and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    Distribution,
    Family,
    cdf,
    central_moment,
    density,
    esep,
    esgt,
    esl,
    esn,
    est,
    log_likelihood,
    logpdf,
    make_distribution,
    quantile,
    sample,
)
from .estimation import FitConfig, FitResult, fit  # noqa: E402
from .exceptions import (  # noqa: E402
    ConditioningError,
    DegenerateDataError,
    InputError,
    IntegrationError,
    MomentError,
    ParameterError,
    RegularityDomainError,
)

__all__ = [
    "Distribution", "Family", "cdf", "central_moment", "density", "esep", "esgt", "esl",
    "esn", "est", "log_likelihood", "logpdf", "make_distribution", "quantile", "sample",
    "FitConfig", "FitResult", "fit",
    "ConditioningError", "DegenerateDataError", "InputError", "IntegrationError",
    "MomentError", "ParameterError", "RegularityDomainError",
]
