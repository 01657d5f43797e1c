"""Dichotomous valuation under a Beta-Binomial bipartition.

The package values every player of a cooperative game by the expected
marginal gain when inside the random coalition and the expected marginal
loss when outside, derives the balanced-budget tax system those values
imply, and verifies the large-market behaviour of the posterior employment
rate numerically.
"""

from .coalition import CoalitionModel, PosteriorRate, SubsetId
from .dvalue import Valuation, exact_valuation, mc_valuation
from .production import (
    AdditiveGame,
    DenseTableGame,
    Game,
    KOutOfNGame,
    SizeSymmetricGame,
    WeightedVotingGame,
)
from .taxpolicy import (
    TaxSolution,
    asymptotic_tax_rule,
    corrected_tax_rule,
    solve_theta_rho,
)

__version__ = "0.1.0"

__all__ = [
    "CoalitionModel",
    "PosteriorRate",
    "SubsetId",
    "Valuation",
    "exact_valuation",
    "mc_valuation",
    "Game",
    "DenseTableGame",
    "SizeSymmetricGame",
    "WeightedVotingGame",
    "KOutOfNGame",
    "AdditiveGame",
    "TaxSolution",
    "asymptotic_tax_rule",
    "corrected_tax_rule",
    "solve_theta_rho",
    "__version__",
]
