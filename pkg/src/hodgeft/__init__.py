"""Exact descendant potentials of cyclic Hodge algebras.

The potential is built twice, as a weighted sum over decorated stable
graphs and as exp(-(G- G+ z)^) applied to the TFT potential, and both are
checked against string, dilaton, genus-0 TRR and the 3g-2 property.
"""

__version__ = "0.1.0"

from .series import LogPotential, TruncationWindow  # noqa: E402
from .frobenius import HodgeAlgebra, check_axioms  # noqa: E402
from .psi import psi_integral  # noqa: E402
from .graphs import DecoratedGraph, enumerate_graphs, graph_sum_potential  # noqa: E402
from .givental import RMatrixSeries, hodge_potential, tft_potential  # noqa: E402

__all__ = [
    "LogPotential", "TruncationWindow", "HodgeAlgebra", "check_axioms",
    "psi_integral", "DecoratedGraph", "enumerate_graphs", "graph_sum_potential",
    "RMatrixSeries", "hodge_potential", "tft_potential",
]
