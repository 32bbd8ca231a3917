"""Pure statistical kernels used by the analysis standards."""

from .descriptive import (
    SUMMARY_FIELDS,
    CategoricalSummary,
    DescriptiveSummary,
    describe_categorical,
    describe_continuous,
    quantile,
)
from .incidence import ANY_EVENT, IncidenceRow, ae_incidence
from .km import KMCurve, KMPoint, km_estimate, km_median
from .normal import norm_ppf, two_sided_z

__all__ = [
    "ANY_EVENT",
    "SUMMARY_FIELDS",
    "CategoricalSummary",
    "DescriptiveSummary",
    "IncidenceRow",
    "KMCurve",
    "KMPoint",
    "ae_incidence",
    "describe_categorical",
    "describe_continuous",
    "km_estimate",
    "km_median",
    "norm_ppf",
    "quantile",
    "two_sided_z",
]
