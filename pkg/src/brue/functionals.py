"""Scalar functionals of a path flow: social cost, potential, BRUE threshold."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import PathFlow, PathSet

SUPPORT_RTOL = 1e-9


def default_support_tol(paths: PathSet) -> float:
    return SUPPORT_RTOL * paths.network.total_demand


def path_cost(flow: PathFlow, path: int) -> float:
    """Travel time of one path at the edge flows induced by ``flow``."""
    return float(flow.path_costs[path])


def social_cost(flow: PathFlow) -> float:
    """Total travel time, computed path-wise and cross-checked edge-wise."""
    by_path = float(flow.values @ flow.path_costs)
    by_edge = float(flow.edge_flow @ flow.edge_costs)
    if abs(by_path - by_edge) > 1e-9 * (1.0 + abs(by_edge)):
        raise ArithmeticError(f"path/edge social cost mismatch: {by_path} vs {by_edge}")
    return by_edge


def potential(flow: PathFlow) -> float:
    """Beckmann potential: sum over edges of the latency integrated up to the edge flow."""
    return float(flow.network.edge_integrals(flow.edge_flow).sum())


def epsilon_threshold(flow: PathFlow, support_tol: float | None = None) -> float:
    """Smallest eps for which ``flow`` is an eps-BRUE.

    A path counts as chosen when its flow exceeds ``support_tol`` (default
    1e-9 times the total demand).  The path set must be complete for the
    result to mean anything.
    """
    if support_tol is None:
        support_tol = default_support_tol(flow.paths)
    costs = flow.path_costs
    worst = 0.0
    for rng in flow.paths.trip_ranges:
        c = costs[rng.start : rng.stop]
        used = flow.values[rng.start : rng.stop] > support_tol
        if used.any():
            worst = max(worst, float(c[used].max() - c.min()))
    return worst


def is_brue(flow: PathFlow, eps: float, support_tol: float | None = None) -> bool:
    return epsilon_threshold(flow, support_tol) <= eps


def variational_gap(f: PathFlow, g: PathFlow, eps: float | None = None) -> float:
    """``sum_P (f_P - g_P) c_P(f) - eps/2 * ||f - g||_1``.

    With ``eps`` defaulting to the threshold of ``f``, this is never
    positive (up to rounding) for any feasible ``g``.
    """
    if f.paths is not g.paths and f.paths.paths != g.paths.paths:
        raise ValueError("flows must share a path set")
    if eps is None:
        eps = epsilon_threshold(f)
    diff = f.values - g.values
    return float(diff @ f.path_costs - 0.5 * eps * np.abs(diff).sum())


def average_excess(flow: PathFlow, psi0: float) -> float:
    return (social_cost(flow) - psi0) / flow.network.total_demand


@dataclass(frozen=True)
class BatchMetrics:
    social_cost: np.ndarray
    potential: np.ndarray
    threshold: np.ndarray
    path_costs: np.ndarray


def evaluate_batch(paths: PathSet, values: np.ndarray, support_tol: float | None = None) -> BatchMetrics:
    """Vectorized functionals for a stack of path flows (rows of ``values``).

    No feasibility checks; callers generate feasible rows.
    """
    net = paths.network
    if support_tol is None:
        support_tol = default_support_tol(paths)
    g = np.atleast_2d(np.asarray(values, dtype=float))
    fe = g @ paths.incidence
    ce = net.edge_costs(fe)
    pc = ce @ paths.incidence.T
    psi = np.einsum("ij,ij->i", fe, ce)
    phi = net.edge_integrals(fe).sum(axis=1)
    thr = np.zeros(len(g))
    for rng in paths.trip_ranges:
        c = pc[:, rng.start : rng.stop]
        used = g[:, rng.start : rng.stop] > support_tol
        cmax = np.where(used, c, -np.inf).max(axis=1)
        thr = np.maximum(thr, cmax - c.min(axis=1))
    return BatchMetrics(psi, phi, thr, pc)


def random_flows(paths: PathSet, n: int, rng: np.random.Generator, sparsity: float = 0.3) -> np.ndarray:
    """``n`` random feasible path flows.

    Each trip's split is Dirichlet; with probability ``sparsity`` per path a
    coordinate is zeroed first so samples also cover lower-dimensional faces.
    """
    out = np.zeros((n, len(paths)))
    for t, r in enumerate(paths.trip_ranges):
        k = len(r)
        w = rng.dirichlet(np.ones(k), size=n)
        if k > 1 and sparsity > 0:
            mask = rng.random((n, k)) < sparsity
            mask[mask.all(axis=1), 0] = False
            w = np.where(mask, 0.0, w)
            w /= w.sum(axis=1, keepdims=True)
        out[:, r.start : r.stop] = w * paths.network.trips[t].demand
    return out
