"""Bayesian binary-endpoint trial designs.

Exact conjugate, mixture and grid posteriors; historical-data borrowing
priors; posterior- and predictive-probability decision rules; exact and
Monte Carlo operating characteristics; Type I error and assurance
calibration; and Phase-I dose-finding designs. The heavy lifting lives in
the compiled `_core` extension.
"""

from betatrial._core import *  # noqa: F401,F403
from betatrial._core import __version__, dose  # noqa: F401
