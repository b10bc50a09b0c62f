"""Expected critical points of Gaussian random holomorphic sections.

Monte-Carlo estimators of the universal Gaussian constants, exact rational
formulas on CP^m, large-N expansions and a direct CP^1 sampler.
"""

__version__ = "0.1.0"

from .cpm import chern_check, cpm_expected_number, cpm_total, series_expand
from .gauss_mc import (
    JetCovariance,
    estimate_b0,
    estimate_b0q,
    estimate_beta2q,
    morse_leading_table,
)
from .montecarlo import MCEstimate
from .rational import Polynomial, RationalFunction, parse_rational

__all__ = [
    "JetCovariance",
    "MCEstimate",
    "Polynomial",
    "RationalFunction",
    "chern_check",
    "cpm_expected_number",
    "cpm_total",
    "estimate_b0",
    "estimate_b0q",
    "estimate_beta2q",
    "morse_leading_table",
    "parse_rational",
    "series_expand",
]
