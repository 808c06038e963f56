"""Worst-case social cost over eps-BRUE flows and excess-time diagnostics.

The feasible set ``{g : eps(g) <= eps}`` is not closed under changes of
support, so it is split by support.  For a candidate support S the flow is
restricted to S and *every* path of S must stay within ``eps`` of the
cheapest path of its trip, used or not.  A flow whose true support is a
subset of S satisfies all of these constraints it actually needs, and each
feasible flow satisfies exactly the constraint set of its own support, so
the maximum over supports is the worst-case value.

Per support:

* zero free dimensions: one point, checked directly;
* one free dimension: exact.  Path costs and the social cost are
  polynomials in the single free coordinate; the feasible set is a union
  of closed intervals whose endpoints are roots of the constraint
  polynomials, and the social cost is convex so its maximum over each
  interval sits at an endpoint;
* more: multi-start SLSQP on the smooth polynomial program.

Networks with too many paths for exhaustive support enumeration fall back
to a greedy support search starting from the user equilibrium.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize

from .equilibrium import solve_ue
from .errors import PathExplosion
from .functionals import (
    average_excess,
    default_support_tol,
    epsilon_threshold,
    evaluate_batch,
    social_cost,
)
from .network import Network, PathFlow, PathSet, enumerate_paths

log = logging.getLogger(__name__)

METHODS = ("support_enum", "support_search", "grid_oracle")
MAX_ENUM_PATHS = 20
MAX_SUPPORTS = 5000
WITNESS_TOL = 1e-8
CERTIFY_TOL = 1e-3
CERTIFY_STEP = 1e-4
GRID_BUDGET = 2_000_000


@dataclass(frozen=True)
class WorstBrueResult:
    psi_eps: float
    witness: PathFlow
    support: frozenset[int]
    method: str
    certified: bool
    eps: float = 0.0
    skipped: int = 0


@dataclass(frozen=True)
class ExcessTimeReport:
    psi: float
    eps: float
    ratio: float
    demand_l1: float


class _Program:
    """Cached arrays for one (path set, eps) pair."""

    def __init__(self, paths: PathSet, eps: float):
        self.paths = paths
        self.net = paths.network
        self.eps = float(eps)
        self.A = paths.incidence
        self.ranges = paths.trip_ranges
        self.demands = np.array([t.demand for t in self.net.trips])
        self.support_tol = default_support_tol(paths)
        upper = self.net.edge_costs(np.full(self.net.n_edges, self.net.total_demand))
        self.cost_scale = 1.0 + float((self.A @ upper).max())
        self.feas_tol = 1e-10 * self.cost_scale

    def evaluate(self, g):
        fe = g @ self.A
        ce = self.net.edge_costs(fe)
        return fe, ce, self.A @ ce

    def threshold(self, g) -> float:
        _, _, pc = self.evaluate(g)
        worst = 0.0
        for r in self.ranges:
            used = g[r.start : r.stop] > self.support_tol
            if used.any():
                worst = max(worst, float(pc[r.start : r.stop][used].max() - pc[r.start : r.stop].min()))
        return worst

    def social(self, g) -> float:
        fe, ce, _ = self.evaluate(g)
        return float(fe @ ce)

    def accept(self, g) -> bool:
        return self.threshold(g) <= self.eps + WITNESS_TOL * self.cost_scale

    def trip_groups(self, support):
        return [[p for p in support if p in r] for r in self.ranges]


# -- exact low-dimensional solver --------------------------------------------


def _solve_exact(prog: _Program, support: list[int]):
    """Exact max for supports with at most one free coordinate."""
    groups = prog.trip_groups(support)
    base = np.zeros(len(prog.paths))
    direction = np.zeros(len(prog.paths))
    span = 0.0
    for t, grp in enumerate(groups):
        base[grp[0]] = prog.demands[t]
        if len(grp) == 2:
            direction[grp[0]], direction[grp[1]] = -1.0, 1.0
            span = prog.demands[t]
    if span == 0.0:
        g = base
        if _band_ok(prog, support, g):
            return prog.social(g), g
        return None

    f0, df = base @ prog.A, direction @ prog.A
    edge_polys = [e.cost.compose_affine(f0[i], df[i]) for i, e in enumerate(prog.net.edges)]
    flow_polys = [Polynomial([f0[i], df[i]]) for i in range(prog.net.n_edges)]
    psi_poly = sum((fp * cp for fp, cp in zip(flow_polys, edge_polys)), Polynomial([0.0]))
    path_polys = [sum((edge_polys[e] for e in p), Polynomial([0.0])) for p in prog.paths.paths]

    breaks = {0.0, span}
    for t, grp in enumerate(groups):
        r = prog.ranges[t]
        for p in grp:
            for q in r:
                if q == p:
                    continue
                h = path_polys[p] - path_polys[q] - prog.eps
                breaks.update(_real_roots(h, span))
    best = None
    for x in sorted(breaks):
        g = base + x * direction
        if _band_ok(prog, support, g):
            val = float(psi_poly(x))
            if best is None or val > best[0]:
                best = (val, g)
    return best


def _real_roots(poly: Polynomial, span: float) -> list[float]:
    poly = poly.trim(tol=0.0)
    if poly.degree() < 1:
        return []
    roots = poly.roots()
    out = []
    for z in np.atleast_1d(roots):
        if abs(z.imag) <= 1e-9 * (1.0 + abs(z.real)) and -1e-12 <= z.real <= span + 1e-12:
            x = min(max(float(z.real), 0.0), span)
            # one Newton step polishes np.roots' eigenvalue-based estimate
            d = poly.deriv()(x)
            if d != 0:
                x2 = x - poly(x) / d
                if 0.0 <= x2 <= span and abs(poly(x2)) <= abs(poly(x)):
                    x = float(x2)
            out.append(x)
    return out


def _band_ok(prog: _Program, support, g) -> bool:
    """Relaxed constraint set of ``support``: all its paths within eps of their trip minimum."""
    _, _, pc = prog.evaluate(g)
    for r, grp in zip(prog.ranges, prog.trip_groups(support)):
        m = pc[r.start : r.stop].min()
        if any(pc[p] - m > prog.eps + prog.feas_tol for p in grp):
            return False
    return True


# -- smooth local solver -----------------------------------------------------


def _solve_local(prog: _Program, support: list[int], starts: list[np.ndarray], working=None, patience: int = 8):
    """Best feasible local maximum of the social cost over the support program.

    Returns ``(value, flow)`` or None, plus whether any start stopped on
    SLSQP's iteration limit (the only exit treated as non-convergence;
    infeasible supports end in line-search failures).  Multi-start stops
    after ``patience`` consecutive starts that do not improve.

    ``working`` optionally restricts which comparison paths enter the band
    constraints; violated comparisons are added and the solve repeated.
    """
    S = np.array(sorted(support))
    groups = prog.trip_groups(list(S))
    pos = {p: i for i, p in enumerate(S)}
    net, A = prog.net, prog.A
    AS = A[S]
    if working is None:
        working = [set(r) for r in prog.ranges]
    else:
        working = [set(w) for w in working]

    eq_rows = np.zeros((len(groups), len(S)))
    for t, grp in enumerate(groups):
        eq_rows[t, [pos[p] for p in grp]] = 1.0
    bounds = [(0.0, prog.demands[prog.paths.trip_of[p]]) for p in S]

    def full(x):
        g = np.zeros(len(prog.paths))
        g[S] = x
        return g

    def objective(x):
        fe = x @ AS
        ce = net.edge_costs(fe)
        mc = ce + fe * net.edge_cost_derivatives(fe)
        return -float(fe @ ce), -(AS @ mc)

    hit_limit = False
    for _ in range(8):
        pairs = [(p, q) for t, grp in enumerate(groups) for p in grp for q in sorted(working[t]) if q != p]
        P = np.array([p for p, _ in pairs], dtype=int)
        Q = np.array([q for _, q in pairs], dtype=int)
        D = A[P] - A[Q] if pairs else np.zeros((0, net.n_edges))

        def band(x, D=D):
            ce = net.edge_costs(x @ AS)
            return prog.eps - D @ ce

        def band_jac(x, D=D):
            fe = x @ AS
            return -(D * net.edge_cost_derivatives(fe)) @ AS.T

        cons = [{"type": "eq", "fun": lambda x: eq_rows @ x - prog.demands, "jac": lambda x: eq_rows}]
        if pairs:
            cons.append({"type": "ineq", "fun": band, "jac": band_jac})
        cands = []
        stale, top = 0, -np.inf
        for x0 in starts:
            if stale >= patience:
                break
            x0 = np.asarray(x0, dtype=float)[S]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = minimize(
                    objective, x0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
                    options={"maxiter": 400, "ftol": 1e-13},
                )
            hit_limit |= res.status == 9
            g = _renormalize(prog, full(np.clip(res.x, 0.0, None)), groups)
            stale += 1
            if g is None or (pairs and band(g[S]).min() < -prog.feas_tol):
                continue
            val = prog.social(g)
            if val > top + 1e-10 * prog.cost_scale:
                stale, top = 0, val
            cands.append((val, g))
        if not cands:
            return None, hit_limit
        # cutting planes: cheapest comparison paths missing from the working set
        added = False
        for _, g in cands:
            _, _, pc = prog.evaluate(g)
            for t, r in enumerate(prog.ranges):
                q = r.start + int(np.argmin(pc[r.start : r.stop]))
                if q not in working[t]:
                    working[t].add(q)
                    added = True
        if added:
            starts = [g for _, g in sorted(cands, key=lambda c: -c[0])[:3]]
            continue
        for val, g in sorted(cands, key=lambda c: -c[0]):
            if _band_ok(prog, list(S), g) and prog.accept(g):
                return (val, g), hit_limit
        return None, hit_limit
    return None, hit_limit


def _phase_one(prog: _Program, support: list[int], starts: list[np.ndarray]):
    """A point of the relaxed constraint set, or None when the smallest
    reachable band violation stays above tolerance."""
    S = np.array(sorted(support))
    groups = prog.trip_groups(list(S))
    pos = {p: i for i, p in enumerate(S)}
    net, A = prog.net, prog.A
    AS = A[S]
    pairs = [(p, q) for t, grp in enumerate(groups) for p in grp for q in prog.ranges[t] if q != p]
    if not pairs:
        return starts[0] if starts else None
    D = A[[p for p, _ in pairs]] - A[[q for _, q in pairs]]
    n = len(S)
    eq_rows = np.zeros((len(groups), n + 1))
    for t, grp in enumerate(groups):
        eq_rows[t, [pos[p] for p in grp]] = 1.0
    bounds = [(0.0, prog.demands[prog.paths.trip_of[p]]) for p in S] + [(0.0, None)]

    def viol(z):
        return prog.eps - D @ net.edge_costs(z[:n] @ AS) + z[n]

    def viol_jac(z):
        J = np.empty((len(D), n + 1))
        J[:, :n] = -(D * net.edge_cost_derivatives(z[:n] @ AS)) @ AS.T
        J[:, n] = 1.0
        return J

    cons = [
        {"type": "eq", "fun": lambda z: eq_rows @ z - prog.demands, "jac": lambda z: eq_rows},
        {"type": "ineq", "fun": viol, "jac": viol_jac},
    ]
    obj_grad = np.zeros(n + 1)
    obj_grad[n] = 1.0
    for x0 in starts:
        x0 = np.asarray(x0, dtype=float)[S]
        z0 = np.append(x0, max(0.0, -float((prog.eps - D @ net.edge_costs(x0 @ AS)).min())))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize(
                lambda z: (z[n], obj_grad), z0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
                options={"maxiter": 400, "ftol": 1e-14},
            )
        g = np.zeros(len(prog.paths))
        g[S] = np.clip(res.x[:n], 0.0, None)
        g = _renormalize(prog, g, groups)
        if g is not None and _band_ok(prog, list(S), g):
            return g
    return None


def _renormalize(prog, g, groups):
    g = g.copy()
    for t, grp in enumerate(groups):
        s = g[grp].sum()
        if s <= 0:
            return None
        g[grp] *= prog.demands[t] / s
    return g


def _random_starts(prog: _Program, support, n: int, rng: np.random.Generator):
    out = []
    groups = prog.trip_groups(support)
    for _ in range(n):
        g = np.zeros(len(prog.paths))
        for t, grp in enumerate(groups):
            g[grp] = rng.dirichlet(np.ones(len(grp))) * prog.demands[t]
        out.append(g)
    return out


# -- support enumeration -----------------------------------------------------


def _support_count(paths: PathSet) -> int:
    return int(np.prod([2 ** len(r) - 1 for r in paths.trip_ranges], dtype=float))


def _vertex_table(prog: _Program, limit: int = 200_000):
    sizes = [len(r) for r in prog.ranges]
    if np.prod(sizes, dtype=float) > limit:
        return None, None
    choices = np.array(list(itertools.product(*prog.ranges)), dtype=int)
    G = np.zeros((len(choices), len(prog.paths)))
    for t in range(len(prog.ranges)):
        G[np.arange(len(choices)), choices[:, t]] = prog.demands[t]
    return choices, evaluate_batch(prog.paths, G).social_cost


def _enumerate(prog: _Program, starts: int, seed: int):
    choices, vertex_vals = _vertex_table(prog)
    per_trip = []
    for r in prog.ranges:
        idx = list(r)
        subsets = [
            tuple(p for k, p in enumerate(idx) if mask >> k & 1) for mask in range(1, 2 ** len(idx))
        ]
        per_trip.append(subsets)
    supports = []
    for sid, combo in enumerate(itertools.product(*per_trip)):
        support = [p for grp in combo for p in grp]
        if choices is not None:
            inside = np.isin(choices, support).all(axis=1)
            ub = float(vertex_vals[inside].max())
        else:
            ub = np.inf
        dim = sum(len(grp) - 1 for grp in combo)
        supports.append((-ub, dim, sid, support))
    supports.sort(key=lambda s: (s[0], s[1], s[2]))

    best, skipped = None, 0
    slack = 1e-12 * prog.cost_scale
    for neg_ub, dim, sid, support in supports:
        if best is not None and -neg_ub <= best[0] + slack:
            break
        if dim <= 1:
            sol = _solve_exact(prog, support)
        else:
            rng = np.random.default_rng(np.random.SeedSequence([seed, sid]))
            pool = _random_starts(prog, support, starts, rng)
            sol, hit_limit = _solve_local(prog, support, pool)
            if sol is None and hit_limit:
                # an iteration-limit exit is only a failure if the support is feasible
                g0 = _phase_one(prog, support, pool[:4])
                if g0 is not None:
                    sol, _ = _solve_local(prog, support, [g0] + pool[:4])
                    if sol is None:
                        skipped += 1
        if sol is not None and (best is None or sol[0] > best[0]):
            best = (sol[0], sol[1], support)
    return best, skipped


# -- greedy support search for large networks -------------------------------


def _support_search(
    prog: _Program, starts: int, seed: int, ue: PathFlow | None, max_rounds: int = 200, fan: int = 2, vertex_seeds: int = 3
):
    """Greedy support growth from several seeds; a lower bound on the worst case.

    Seeds are the user equilibrium and the costliest pure flows (one path
    per trip) that are themselves feasible.  The social cost is convex, so
    for large eps the global maximum sits at such a vertex.
    """
    paths = prog.paths
    if ue is None:
        ue = solve_ue(prog.net, paths=paths).flow
    seeds = [np.array(ue.values)]
    seeds += _feasible_vertices(prog, vertex_seeds)
    best = None
    for k, g in enumerate(seeds):
        support = sorted(int(i) for i in np.flatnonzero(g > prog.support_tol))
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        pool = [g] + _random_starts(prog, support, max(1, starts // 8), rng)
        sol, _ = _solve_local(prog, support, pool, _working(prog, g, support))
        if sol is None:
            sol = (prog.social(g), g)
        found = _grow(prog, sol[0], sol[1], support, max_rounds, fan)
        if best is None or found[0] > best[0] + 1e-12 * prog.cost_scale:
            best = found
    return best, 0


def _feasible_vertices(prog: _Program, k: int) -> list[np.ndarray]:
    choices, vals = _vertex_table(prog)
    if choices is None:
        return []
    out = []
    for i in np.argsort(-vals, kind="stable"):
        g = np.zeros(len(prog.paths))
        g[choices[i]] = prog.demands
        if prog.accept(g):
            out.append(g)
            if len(out) == k:
                break
    return out


def _grow(prog: _Program, best_val, best_g, support, max_rounds, fan):
    for _ in range(max_rounds):
        fe, ce, pc = prog.evaluate(best_g)
        mc = prog.A @ (ce + fe * prog.net.edge_cost_derivatives(fe))
        trials = []
        for t, r in enumerate(prog.ranges):
            m = pc[r.start : r.stop].min()
            used = [p for p in support if p in r and best_g[p] > prog.support_tol]
            floor = min(mc[p] for p in used) if used else 0.0
            scored = sorted(
                (-(mc[q] - floor), q)
                for q in r
                if q not in support and pc[q] - m <= prog.eps + prog.feas_tol
            )
            # every trip gets its own candidates; a global ranking starves light trips
            trials += [q for _, q in scored[:fan]]
        improved = None
        for q in trials:
            cand = sorted(support + [q])
            res, _ = _solve_local(prog, cand, [best_g], _working(prog, best_g, cand))
            if res is not None and res[0] > best_val + 1e-12 * prog.cost_scale:
                if improved is None or res[0] > improved[0]:
                    improved = (res[0], res[1], cand)
        if improved is None:
            break
        best_val, best_g, support = improved
    return best_val, best_g, support


def _working(prog: _Program, g, support, k: int = 4):
    _, _, pc = prog.evaluate(g)
    out = []
    for r in prog.ranges:
        idx = np.arange(r.start, r.stop)
        cheap = idx[np.argsort(pc[r.start : r.stop], kind="stable")[:k]]
        out.append(set(int(i) for i in cheap) | {p for p in support if p in r})
    return out


# -- grid oracle -------------------------------------------------------------


def _compositions(n: int, k: int) -> np.ndarray:
    """All k-tuples of nonnegative integers summing to n."""
    if k == 1:
        return np.array([[n]])
    rows = []
    for first in range(n + 1):
        rest = _compositions(n - first, k - 1)
        rows.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(rows)


def lattice_size(paths: PathSet, step: float) -> float:
    from math import comb

    n = int(round(1.0 / step))
    return float(np.prod([comb(n + len(r) - 1, len(r) - 1) for r in paths.trip_ranges], dtype=float))


def _lattice_chunks(paths: PathSet, step: float, chunk: int = 500_000):
    n = int(round(1.0 / step))
    demands = [t.demand for t in paths.network.trips]
    if len(paths.trip_ranges) == 1 and len(paths.trip_ranges[0]) == 3:
        # stream the 2-simplex row by row; materializing it can take gigabytes
        i_block = max(1, chunk // (n + 1))
        for i0 in range(0, n + 1, i_block):
            parts = []
            for i in range(i0, min(n + 1, i0 + i_block)):
                j = np.arange(n - i + 1)
                parts.append(np.column_stack([np.full(len(j), i), j, n - i - j]))
            yield np.vstack(parts) * (demands[0] / n)
        return
    per_trip = [_compositions(n, len(r)) * (demands[t] / n) for t, r in enumerate(paths.trip_ranges)]
    sizes = [len(x) for x in per_trip]
    total = int(np.prod(sizes))
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk))
        cols = []
        for t in range(len(per_trip) - 1, -1, -1):
            cols.append(per_trip[t][idx % sizes[t]])
            idx = idx // sizes[t]
        yield np.hstack(cols[::-1])


def grid_worst_brue(paths: PathSet, eps: float, step: float = 1e-3, budget: float = 5e7) -> WorstBrueResult:
    """Brute-force worst case over a lattice of path flows.

    Independent of the support decomposition: it only evaluates the social
    cost and the threshold function at lattice points (spacing ``step`` of
    each trip's demand) and keeps the best feasible one.  Thin feasible
    regions between lattice points are missed, so this is a lower bound.
    """
    size = lattice_size(paths, step)
    if size > budget:
        raise PathExplosion(f"lattice of {size:.3g} points exceeds budget {budget:.3g}")
    n = int(round(1.0 / step))
    tol = 0.25 * min(t.demand for t in paths.network.trips) / n
    best_val, best_g = -np.inf, None
    for G in _lattice_chunks(paths, step):
        m = evaluate_batch(paths, G, support_tol=tol)
        ok = m.threshold <= eps + 1e-12
        if ok.any():
            i = int(np.argmax(np.where(ok, m.social_cost, -np.inf)))
            if m.social_cost[i] > best_val:
                best_val, best_g = float(m.social_cost[i]), G[i].copy()
    witness = PathFlow(paths, best_g)
    support = frozenset(int(i) for i in np.flatnonzero(best_g > tol))
    return WorstBrueResult(best_val, witness, support, "grid_oracle", True, float(eps))


# -- public API --------------------------------------------------------------


def worst_brue(
    net: Network,
    paths: PathSet | None,
    eps: float,
    starts: int = 32,
    *,
    seed: int = 0,
    method: str = "auto",
    certify: bool = False,
    ue: PathFlow | None = None,
) -> WorstBrueResult:
    """Largest social cost over flows with threshold at most ``eps``.

    ``method`` is ``"support_enum"`` (exhaustive, refuses more than 20
    paths), ``"support_search"`` (greedy support growth from the user
    equilibrium; a lower bound), ``"grid_oracle"`` or ``"auto"``, which
    enumerates when the support count is manageable and searches otherwise.

    With ``certify`` and at most 6 paths, a lattice oracle is run and the
    result is marked certified when the two agree within 1e-3.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if paths is None:
        paths = enumerate_paths(net)
    if paths.network is not net and paths.network != net:
        raise ValueError("path set belongs to a different network")
    if not paths.complete:
        raise ValueError("worst_brue needs the complete path set")
    if method == "grid_oracle":
        return grid_worst_brue(paths, eps, _affordable_step(paths, CERTIFY_STEP))
    if method == "auto":
        small = len(paths) <= MAX_ENUM_PATHS and _support_count(paths) <= MAX_SUPPORTS
        method = "support_enum" if small else "support_search"
    prog = _Program(paths, eps)
    if method == "support_enum":
        if len(paths) > MAX_ENUM_PATHS:
            raise PathExplosion(f"support enumeration refused over {len(paths)} > {MAX_ENUM_PATHS} paths")
        best, skipped = _enumerate(prog, starts, seed)
    elif method == "support_search":
        best, skipped = _support_search(prog, starts, seed, ue)
    else:
        raise ValueError(f"unknown method {method!r}")
    if best is None:
        raise ArithmeticError("no feasible flow found; a user equilibrium should always qualify")
    val, g, support = best
    witness = PathFlow.normalized(paths, g)
    val = social_cost(witness)
    if skipped:
        log.warning("%d supports failed to converge; result is uncertified", skipped)
    certified = False
    if certify and method == "support_enum" and not skipped and len(paths) <= 6:
        step = _affordable_step(paths, CERTIFY_STEP)
        oracle = grid_worst_brue(paths, eps, step)
        certified = abs(oracle.psi_eps - val) <= CERTIFY_TOL
    used = frozenset(int(i) for i in np.flatnonzero(witness.values > prog.support_tol))
    return WorstBrueResult(val, witness, used, method, certified, float(eps), skipped)


def _affordable_step(paths: PathSet, step: float) -> float:
    while lattice_size(paths, step) > GRID_BUDGET * 25:
        step *= 2
    return step


def epsilon_bar(net: Network, paths: PathSet | None = None) -> float:
    """Upper bound on every path cost: each edge loaded with the whole demand."""
    if paths is None:
        paths = enumerate_paths(net)
    loaded = net.edge_costs(np.full(net.n_edges, net.total_demand))
    return float((paths.incidence @ loaded).max())


def average_excess_time(net: Network, paths: PathSet, g: PathFlow, psi0: float) -> ExcessTimeReport:
    psi = average_excess(g, psi0)
    eps = epsilon_threshold(g)
    ratio = psi / eps if eps > 0 else float("nan")
    return ExcessTimeReport(psi, eps, ratio, net.total_demand)


class CurveCheckError(ArithmeticError):
    """A computed worst-case curve violates monotonicity or ultimate constancy."""


def psi_eps_curve(net: Network, paths: PathSet | None, eps_grid, slack: float = 1e-6, **kw) -> list[tuple[float, float]]:
    """Worst-case social cost along a sorted grid of eps values."""
    grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be strictly increasing")
    if paths is None:
        paths = enumerate_paths(net)
    curve = [(e, worst_brue(net, paths, e, **kw).psi_eps) for e in grid]
    for (e0, v0), (e1, v1) in zip(curve, curve[1:]):
        if v1 < v0 - slack:
            raise CurveCheckError(f"worst-case cost decreases between eps={e0:g} ({v0}) and eps={e1:g} ({v1})")
    bar = epsilon_bar(net, paths)
    tail = [v for e, v in curve if e >= bar]
    if tail and max(tail) - min(tail) > slack:
        raise CurveCheckError(f"worst-case cost not constant beyond eps_bar={bar:g}")
    return curve


def estimate_inefficiency_factor(net: Network, paths: PathSet | None, eps_grid, psi0: float | None = None, **kw) -> float:
    """Largest ``(Psi_eps - Psi_0) / (||d||_1 eps)`` over the positive grid points.

    A lower bound on the network's inefficiency factor.
    """
    if paths is None:
        paths = enumerate_paths(net)
    sol = solve_ue(net, paths=paths)
    if psi0 is None:
        psi0 = sol.psi0
    kw.setdefault("ue", sol.flow)
    best = 0.0
    for e in eps_grid:
        if e <= 0:
            continue
        val = worst_brue(net, paths, float(e), **kw).psi_eps
        best = max(best, (val - psi0) / (net.total_demand * e))
    return best


def chain_proof_flows(paths: PathSet, eta: float) -> tuple[PathFlow, PathFlow]:
    """UE ``f`` and perturbed flow ``g`` on a Wheatstone chain.

    In ``f`` every local trip splits evenly between its up and down paths
    and the crossing trip sends half its demand along all-up and half along
    all-down.  ``g`` moves a ``2 eta`` share of each local demand onto the
    middle path.
    """
    net = paths.network
    n = len(net.trips) - 1
    ix = net.edge_index

    def path(*ids):
        return tuple(ix[i] for i in ids)

    f, g = np.zeros(len(paths)), np.zeros(len(paths))
    for i in range(1, n + 1):
        dp = net.trips[i - 1].demand
        up = paths.index(i - 1, path(f"a{i}", f"b{i}"))
        mid = paths.index(i - 1, path(f"a{i}", f"m{i}", f"d{i}"))
        down = paths.index(i - 1, path(f"c{i}", f"d{i}"))
        f[up] = f[down] = dp / 2
        g[up] = g[down] = dp * (0.5 - eta)
        g[mid] = 2 * eta * dp
    cross = net.trips[-1].demand
    all_up = paths.index(n, path(*[e for i in range(1, n + 1) for e in (f"a{i}", f"b{i}")]))
    all_down = paths.index(n, path(*[e for i in range(1, n + 1) for e in (f"c{i}", f"d{i}")]))
    for h in (f, g):
        h[all_up] = h[all_down] = cross / 2
    return PathFlow(paths, f), PathFlow(paths, g)
