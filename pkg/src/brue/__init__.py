"""Boundedly rational user equilibria in non-atomic routing games.

Core objects live in :mod:`brue.network`; solvers in
:mod:`brue.equilibrium`, :mod:`brue.worstcase` and :mod:`brue.persuasion`.
"""
from .equilibrium import UESolution, min_social_cost, solve_ue, system_optimum
from .errors import BrueError, NetworkFormatError, NoPath, NotConverged, PathExplosion, UnsupportedStateSpace
from .functionals import (
    average_excess,
    epsilon_threshold,
    is_brue,
    path_cost,
    potential,
    social_cost,
    variational_gap,
)
from .network import CostPolynomial, Edge, Network, PathFlow, PathSet, Trip, enumerate_paths, load_network
from .persuasion import (
    Belief,
    SignalScheme,
    StochasticNetwork,
    blackwell_compare,
    posterior_excess_report,
    design_signal,
    epsilon_infinity,
    expected_realized_cost,
    load_stochastic_network,
    posterior_network,
    psi_eps_at_belief,
)
from .topologies import make_n1, make_n2, make_parallel, make_two_road, make_wheatstone, make_wheatstone_chain
from .worstcase import (
    ExcessTimeReport,
    WorstBrueResult,
    average_excess_time,
    estimate_inefficiency_factor,
    psi_eps_curve,
    worst_brue,
)

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "BrueError",
    "CostPolynomial",
    "Edge",
    "ExcessTimeReport",
    "Network",
    "NetworkFormatError",
    "NoPath",
    "NotConverged",
    "PathExplosion",
    "PathFlow",
    "PathSet",
    "SignalScheme",
    "StochasticNetwork",
    "Trip",
    "UESolution",
    "UnsupportedStateSpace",
    "WorstBrueResult",
    "average_excess",
    "average_excess_time",
    "blackwell_compare",
    "design_signal",
    "enumerate_paths",
    "epsilon_infinity",
    "epsilon_threshold",
    "estimate_inefficiency_factor",
    "expected_realized_cost",
    "is_brue",
    "load_network",
    "load_stochastic_network",
    "make_n1",
    "make_n2",
    "make_parallel",
    "make_two_road",
    "make_wheatstone",
    "make_wheatstone_chain",
    "min_social_cost",
    "path_cost",
    "posterior_excess_report",
    "posterior_network",
    "potential",
    "psi_eps_at_belief",
    "psi_eps_curve",
    "social_cost",
    "solve_ue",
    "system_optimum",
    "variational_gap",
    "worst_brue",
]
