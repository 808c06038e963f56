"""User equilibria as minimizers of the Beckmann potential.

Two solvers share one loop skeleton:

* ``"pairwise"`` (default): path-based.  Each iteration finds every trip's
  shortest path and shifts flow from each costlier active path onto it
  with an exact line search on the potential.  Converges linearly in
  practice, including on degenerate instances where several paths tie.
* ``"fw"``: classic edge-flow Frank-Wolfe with exact line search.  Path
  flows are tracked as the running convex combination of all-or-nothing
  loads, so no separate decomposition pass is needed.

Both stop on the relative duality gap
``sum_e c_e(f_e) (f_e - y_e) / Phi(f)`` where ``y`` is the all-or-nothing
load at current costs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NotConverged, PathExplosion
from .functionals import potential, social_cost
from .network import Network, PathFlow, PathSet, enumerate_paths, path_set_from
from .shortest_path import all_or_nothing

log = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 5000


@dataclass(frozen=True)
class UESolution:
    flow: PathFlow
    psi0: float
    phi0: float
    relative_gap: float
    iterations: int

    @property
    def edge_flow(self) -> np.ndarray:
        return self.flow.edge_flow

    @property
    def edge_costs(self) -> np.ndarray:
        return self.flow.edge_costs


def _mask(net: Network, path) -> np.ndarray:
    m = np.zeros(net.n_edges)
    m[list(path)] = 1.0
    return m


def _line_search(dphi, upper: float) -> float:
    """Root of the nondecreasing ``dphi`` on ``[0, upper]`` (or an endpoint)."""
    if upper <= 0 or dphi(0.0) >= 0:
        return 0.0
    if dphi(upper) <= 0:
        return upper
    return brentq(dphi, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _initial_path_flows(net: Network, seed: int | None) -> list[dict[tuple[int, ...], float]]:
    free = net.edge_costs(np.zeros(net.n_edges))
    if seed is None:
        return [{p: t.demand} for t, (_, p) in zip(net.trips, all_or_nothing(net, free))]
    rng = np.random.default_rng(seed)
    loaded = net.edge_costs(np.full(net.n_edges, net.total_demand))
    flows: list[dict[tuple[int, ...], float]] = [{} for _ in net.trips]
    draws = 3
    weights = rng.dirichlet(np.ones(draws), size=len(net.trips))
    for k in range(draws):
        noisy = (free + loaded) * rng.uniform(0.25, 1.75, net.n_edges)
        for t, (_, p) in enumerate(all_or_nothing(net, noisy)):
            flows[t][p] = flows[t].get(p, 0.0) + weights[t, k] * net.trips[t].demand
    return flows


def _edge_flow(net: Network, path_flows) -> np.ndarray:
    f = np.zeros(net.n_edges)
    for trip_flows in path_flows:
        for p, h in trip_flows.items():
            f[list(p)] += h
    return f


def _gap(net: Network, f: np.ndarray):
    c = net.edge_costs(f)
    sp = all_or_nothing(net, c)
    gap = float(c @ f) - sum(t.demand * dist for t, (dist, _) in zip(net.trips, sp))
    phi = float(net.edge_integrals(f).sum())
    rel = gap / phi if phi > 0 else gap
    return max(rel, 0.0), c, sp


def _pairwise_sweep(net: Network, path_flows, f: np.ndarray, shortest) -> np.ndarray:
    for t, (_, s) in enumerate(shortest):
        active = path_flows[t]
        active.setdefault(s, 0.0)
        ms = _mask(net, s)
        c = net.edge_costs(f)
        others = sorted((p for p in active if p != s), key=lambda p: -float(c[list(p)].sum()))
        for p in others:
            mp = _mask(net, p)
            only_s = (ms > 0) & (mp == 0)
            only_p = (mp > 0) & (ms == 0)
            if not only_s.any() and not only_p.any():
                continue

            def dphi(g, f=f, only_s=only_s, only_p=only_p):
                return float(
                    net.edge_costs(f + g * only_s)[only_s].sum() - net.edge_costs(f - g * only_p)[only_p].sum()
                )

            step = _line_search(dphi, active[p])
            if step <= 0:
                continue
            if step >= active[p]:
                step = active[p]
                del active[p]
            else:
                active[p] -= step
            active[s] += step
            f = f + step * (ms - mp)
        if active.get(s, 0.0) == 0.0:
            active.pop(s, None)
    return _edge_flow(net, path_flows)


def _fw_step(net: Network, path_flows, f: np.ndarray, shortest) -> np.ndarray:
    y = np.zeros(net.n_edges)
    for t, (_, s) in enumerate(shortest):
        y[list(s)] += net.trips[t].demand
    direction = y - f

    def dphi(g):
        return float(net.edge_costs(f + g * direction) @ direction)

    step = _line_search(dphi, 1.0)
    if step <= 0:
        return f
    for t, (_, s) in enumerate(shortest):
        for p in path_flows[t]:
            path_flows[t][p] *= 1.0 - step
        path_flows[t][s] = path_flows[t].get(s, 0.0) + step * net.trips[t].demand
        for p in [p for p, h in path_flows[t].items() if h <= 0.0]:
            del path_flows[t][p]
    return _edge_flow(net, path_flows)


def _to_path_flow(net: Network, path_flows, paths: PathSet | None) -> PathFlow:
    if paths is None:
        try:
            paths = enumerate_paths(net, cap=DEFAULT_PATH_CAP)
        except PathExplosion:
            paths = path_set_from(net, [list(pf) for pf in path_flows], complete=False)
    values = np.zeros(len(paths))
    for t, pf in enumerate(path_flows):
        for p, h in pf.items():
            values[paths.index(t, p)] += h
    return PathFlow.normalized(paths, values)


def solve_ue(
    net: Network,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    *,
    paths: PathSet | None = None,
    method: str = "pairwise",
    seed: int | None = None,
) -> UESolution:
    """Minimize the Beckmann potential over demand-feasible flows.

    ``seed`` randomizes the starting flow (used to probe essential
    uniqueness); ``None`` starts from the free-flow all-or-nothing load.
    The returned flow lives on ``paths`` if given, else on the full
    enumeration when it stays under a few thousand paths, else on the
    paths the solver actually used.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in ("pairwise", "fw"):
        raise ValueError(f"unknown method {method!r}")
    step = _pairwise_sweep if method == "pairwise" else _fw_step
    path_flows = _initial_path_flows(net, seed)
    f = _edge_flow(net, path_flows)
    best = None
    for it in range(max_iters + 1):
        rel, _, shortest = _gap(net, f)
        if best is None or rel < best[0]:
            best = (rel, [dict(pf) for pf in path_flows], it)
        if rel <= tol:
            break
        if it == max_iters:
            flow = _to_path_flow(net, best[1], paths)
            sol = UESolution(flow, social_cost(flow), potential(flow), best[0], it)
            raise NotConverged(f"relative gap {best[0]:.3e} > {tol:g} after {it} iterations", best=sol, iterations=it)
        f = step(net, path_flows, f, shortest)
    flow = _to_path_flow(net, path_flows, paths)
    log.debug("UE solved in %d iterations, relative gap %.3e", it, rel)
    return UESolution(flow, social_cost(flow), potential(flow), rel, it)


def system_optimum(net: Network, tol: float = 1e-10, max_iters: int = 100_000, **kw) -> PathFlow:
    """Flow minimizing total travel time (a UE of the marginal-cost network)."""
    sol = solve_ue(net.marginal_network(), tol, max_iters, **kw)
    paths = PathSet(net, sol.flow.paths.paths, sol.flow.paths.trip_of, sol.flow.paths.complete)
    return PathFlow(paths, sol.flow.values)


def min_social_cost(net: Network, tol: float = 1e-10, max_iters: int = 100_000) -> float:
    return social_cost(system_optimum(net, tol, max_iters))
