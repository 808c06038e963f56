"""Stochastic networks and public signals chosen against worst-case eps-BRUE.

A stochastic network carries one set of edge latencies per state of
nature and a prior over states.  A public signal moves the common belief
to a posterior; drivers then route on the posterior-expected latencies and
the planner evaluates the worst-case social cost there.  The optimal
signal minimizes the expected worst-case cost over Bayes-plausible
posterior distributions, i.e. it reads the lower convex envelope of
``mu -> Psi_eps^mu`` at the prior.

For two states a belief is identified with the probability of the second
state (index 1).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .envelope import chord_value, lower_hull
from .equilibrium import solve_ue
from .errors import NetworkFormatError, UnsupportedStateSpace
from .functionals import epsilon_threshold, social_cost
from .network import CostPolynomial, Network, PathFlow, PathSet, enumerate_paths
from .worstcase import worst_brue

log = logging.getLogger(__name__)

PRIOR_TOL = 1e-12
BAYES_TOL = 1e-9
DEFAULT_GRID = 2001


# -- types -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Belief:
    """Probability vector over the states of a stochastic network."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("belief must be a non-empty vector")
        if np.any(p < -PRIOR_TOL) or abs(p.sum() - 1.0) > PRIOR_TOL:
            raise ValueError(f"belief {p} is not a probability vector")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def binary(cls, p1: float) -> Belief:
        """Belief putting mass ``p1`` on state 1 of a two-state space."""
        return cls(np.array([1.0 - p1, p1]))

    @property
    def p1(self) -> float:
        if len(self.probabilities) != 2:
            raise UnsupportedStateSpace("scalar belief only defined for two states")
        return float(self.probabilities[1])

    def __len__(self):
        return len(self.probabilities)

    def __eq__(self, other):
        return isinstance(other, Belief) and np.array_equal(self.probabilities, other.probabilities)

    def __hash__(self):
        return hash(self.probabilities.tobytes())

    def __repr__(self):
        return f"Belief({np.array2string(self.probabilities, precision=6)})"


@dataclass(frozen=True)
class StochasticNetwork:
    """Topology and trips of ``base`` with one latency list per state."""

    base: Network
    state_costs: tuple[tuple[CostPolynomial, ...], ...]
    prior: Belief
    state_names: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.prior, Belief):
            object.__setattr__(self, "prior", Belief(np.asarray(self.prior, dtype=float)))
        costs = tuple(tuple(c) for c in self.state_costs)
        object.__setattr__(self, "state_costs", costs)
        if len(costs) != len(self.prior):
            raise ValueError(f"{len(costs)} cost lists for {len(self.prior)} prior entries")
        for k, cs in enumerate(costs):
            if len(cs) != self.base.n_edges:
                raise ValueError(f"state {k} lists {len(cs)} costs for {self.base.n_edges} edges")
            if not all(isinstance(c, CostPolynomial) for c in cs):
                raise TypeError("state costs must be CostPolynomial instances")
        names = tuple(self.state_names) or tuple(f"w{k}" for k in range(len(costs)))
        if len(names) != len(costs) or len(set(names)) != len(names):
            raise ValueError("state names must be distinct, one per state")
        object.__setattr__(self, "state_names", names)

    @property
    def n_states(self) -> int:
        return len(self.state_costs)

    @cached_property
    def paths(self) -> PathSet:
        return enumerate_paths(self.base)

    def state_network(self, k: int) -> Network:
        return self.base.with_costs(self.state_costs[k], name=f"{self.base.name}[{self.state_names[k]}]")

    def to_dict(self) -> dict:
        doc = self.base.to_dict()
        states = []
        for name, p, cs in zip(self.state_names, self.prior.probabilities, self.state_costs):
            diff = {
                e.id: list(c.coefficients) for e, c in zip(self.base.edges, cs) if c != e.cost
            }
            states.append({"name": name, "prior": float(p), "edge_costs": diff})
        doc["states"] = states
        return doc

    @classmethod
    def from_dict(cls, doc: dict, name: str = "") -> StochasticNetwork:
        base = Network.from_dict(doc, name=name)
        raw = doc.get("states")
        if not isinstance(raw, list) or not raw:
            raise NetworkFormatError("stochastic network needs a non-empty 'states' list")
        costs, prior, names = [], [], []
        try:
            for k, st in enumerate(raw):
                overrides = st.get("edge_costs", {})
                unknown = set(overrides) - set(base.edge_index)
                if unknown:
                    raise NetworkFormatError(f"state {k} overrides unknown edges {sorted(unknown)}")
                costs.append(
                    tuple(
                        CostPolynomial(tuple(overrides[e.id])) if e.id in overrides else e.cost
                        for e in base.edges
                    )
                )
                prior.append(float(st["prior"]))
                names.append(str(st.get("name", f"w{k}")))
            return cls(base, tuple(costs), Belief(np.array(prior)), tuple(names))
        except NetworkFormatError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise NetworkFormatError(f"malformed states block: {exc!r}") from exc


def load_stochastic_network(path) -> StochasticNetwork:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise NetworkFormatError(f"{path}: top level must be an object")
    return StochasticNetwork.from_dict(doc, name=path.stem)


def as_belief(snet: StochasticNetwork, mu) -> Belief:
    """Accept a Belief, a probability vector, or (two states) a scalar ``Pr[state 1]``."""
    if isinstance(mu, Belief):
        b = mu
    elif np.ndim(mu) == 0:
        if snet.n_states != 2:
            raise UnsupportedStateSpace("scalar beliefs need exactly two states")
        b = Belief.binary(float(mu))
    else:
        b = Belief(np.asarray(mu, dtype=float))
    if len(b) != snet.n_states:
        raise ValueError(f"belief over {len(b)} states for a {snet.n_states}-state network")
    return b


@dataclass(frozen=True, eq=False)
class SignalScheme:
    """Public signal: posteriors, their probabilities, and ``pi[state, message]``.

    Message ``m`` is the index of its posterior.  ``approximate`` marks
    schemes from the best-effort path for more than two states.
    """

    prior: Belief
    posteriors: tuple[Belief, ...]
    weights: np.ndarray
    conditional: np.ndarray
    approximate: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        pi = np.asarray(self.conditional, dtype=float)
        n, m = len(self.prior), len(self.posteriors)
        if w.shape != (m,) or pi.shape != (n, m):
            raise ValueError("weights/conditional shapes do not match the posteriors")
        if np.any(w < 0) or abs(w.sum() - 1.0) > BAYES_TOL:
            raise ValueError("weights must be a probability vector")
        if np.any(pi < -BAYES_TOL) or np.abs(pi.sum(axis=1) - 1.0).max() > BAYES_TOL:
            raise ValueError("each state's message distribution must sum to 1")
        mus = np.array([b.probabilities for b in self.posteriors])
        nu = self.prior.probabilities
        if np.abs(w @ mus - nu).max() > BAYES_TOL:
            raise ValueError("posteriors are not Bayes-plausible for the prior")
        if np.abs(w[None, :] * mus.T - nu[:, None] * pi).max() > BAYES_TOL:
            raise ValueError("conditional is inconsistent with Bayes' rule")
        w.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "conditional", pi)

    @classmethod
    def from_posteriors(cls, prior: Belief, posteriors: Sequence[Belief], weights, approximate=False) -> SignalScheme:
        """Recover ``pi(m | w) = tau_m mu_m(w) / nu(w)`` by Bayes' rule."""
        w = np.asarray(weights, dtype=float)
        mus = np.array([b.probabilities for b in posteriors])
        nu = prior.probabilities
        pi = np.empty((len(nu), len(posteriors)))
        for k in range(len(nu)):
            # a state the prior rules out never occurs; any row works
            pi[k] = w * mus[:, k] / nu[k] if nu[k] > 0 else w
        return cls(prior, tuple(posteriors), w, pi, approximate)

    @classmethod
    def no_revelation(cls, prior: Belief) -> SignalScheme:
        return cls.from_posteriors(prior, [prior], [1.0])

    @property
    def kind(self) -> str:
        """``"none"``, ``"full"`` (every posterior a point mass) or ``"partial"``."""
        if len(self.posteriors) == 1:
            return "none"
        if all(b.probabilities.max() >= 1.0 - BAYES_TOL for b in self.posteriors):
            return "full"
        return "partial"

    def hull(self) -> tuple[float, float]:
        """Interval spanned by the posteriors (two states only)."""
        ps = [b.p1 for b in self.posteriors]
        return min(ps), max(ps)


# -- posterior-indexed quantities ---------------------------------------------


def posterior_network(snet: StochasticNetwork, mu) -> Network:
    """Deterministic network with the belief-weighted latencies.

    Expectation is linear in the coefficients, so each edge's latency is
    the weighted sum of its per-state polynomials.
    """
    b = as_belief(snet, mu)
    costs = []
    for i in range(snet.base.n_edges):
        total = CostPolynomial(())
        for w, cs in zip(b.probabilities, snet.state_costs):
            if w > 0:
                total = total + cs[i].scaled(float(w))
        costs.append(total)
    return snet.base.with_costs(costs)


def _posterior_paths(snet: StochasticNetwork, net: Network) -> PathSet:
    ps = snet.paths
    return PathSet(net, ps.paths, ps.trip_of, ps.complete)


def psi_eps_at_belief(snet: StochasticNetwork, mu, eps: float, **kw) -> float:
    """Worst-case social cost over eps-BRUE flows of the posterior network."""
    net = posterior_network(snet, mu)
    return worst_brue(net, _posterior_paths(snet, net), eps, **kw).psi_eps


def epsilon_infinity(snet: StochasticNetwork) -> float:
    """Largest path latency over states with the whole demand on every edge.

    Exact for single-trip networks, where loading one path with the whole
    demand is feasible.  With several trips it is an upper bound only; see
    :func:`epsilon_infinity_is_exact`.
    """
    load = np.full(snet.base.n_edges, snet.base.total_demand)
    inc = snet.paths.incidence
    best = max(float((inc @ snet.state_network(k).edge_costs(load)).max()) for k in range(snet.n_states))
    if not epsilon_infinity_is_exact(snet):
        log.warning("multi-trip network: eps_infinity is a conservative upper bound")
    return best


def epsilon_infinity_is_exact(snet: StochasticNetwork) -> bool:
    return len(snet.base.trips) == 1


# -- signal design -----------------------------------------------------------


def belief_grid(grid_size: int, nu: float | None = None) -> np.ndarray:
    """``grid_size`` evenly spaced beliefs on [0, 1], plus ``nu`` if given."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    mus = np.linspace(0.0, 1.0, int(grid_size))
    if nu is not None:
        mus = np.union1d(mus, [nu])
    return mus


def belief_curve(snet: StochasticNetwork, eps: float, grid_size: int = DEFAULT_GRID, **kw) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``mu -> Psi_eps^mu`` on the belief grid (two states; the prior is included)."""
    if snet.n_states != 2:
        raise UnsupportedStateSpace(f"belief curve needs two states, got {snet.n_states}")
    mus = belief_grid(grid_size, snet.prior.p1)
    vals = np.array([psi_eps_at_belief(snet, m, eps, **kw) for m in mus])
    return mus, vals


def design_signal(
    snet: StochasticNetwork,
    eps: float,
    grid_size: int = DEFAULT_GRID,
    *,
    best_effort: bool = False,
    refine: bool = True,
    curve: tuple[np.ndarray, np.ndarray] | None = None,
    **kw,
) -> tuple[SignalScheme, float]:
    """Optimal public signal against worst-case eps-BRUE and its expected cost.

    Two states: the lower convex envelope of the sampled belief curve is
    read at the prior, contact points are refined off-grid, and ties go to
    the scheme revealing less (the prior itself whenever it lies on the
    envelope).  More states need ``best_effort``: a linear program over a
    belief lattice, flagged approximate.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if snet.n_states == 1:
        return SignalScheme.no_revelation(snet.prior), psi_eps_at_belief(snet, snet.prior, eps, **kw)
    if snet.n_states > 2:
        if not best_effort:
            raise UnsupportedStateSpace(
                f"exact signal design needs two states, got {snet.n_states}; pass best_effort"
            )
        return _design_lattice(snet, eps, grid_size, **kw)
    mus, vals = curve if curve is not None else belief_curve(snet, eps, grid_size, **kw)
    return _design_binary(snet, eps, np.asarray(mus), np.asarray(vals), refine, **kw)


def _design_binary(snet, eps, mus, vals, refine, **kw):
    nu = snet.prior.p1
    prior = snet.prior
    k = int(np.searchsorted(mus, nu))
    if k >= len(mus) or mus[k] != nu:
        raise ValueError("belief curve must contain the prior")
    scale = 1.0 + float(np.abs(vals).max())
    tol = 1e-12 * scale
    hull = lower_hull(mus, vals)
    if k in set(hull.tolist()) or nu in (0.0, 1.0):
        return SignalScheme.no_revelation(prior), float(vals[k])
    j = int(np.searchsorted(hull, k))
    ia, ib = int(hull[j - 1]), int(hull[j])
    a, fa, b, fb = float(mus[ia]), float(vals[ia]), float(mus[ib]), float(vals[ib])
    if refine:
        def psi(m):
            return psi_eps_at_belief(snet, m, eps, **kw)

        lo_a, hi_a = float(mus[max(ia - 1, 0)]), min(float(mus[ia + 1]), nu)
        lo_b, hi_b = max(float(mus[ib - 1]), nu), float(mus[min(ib + 1, len(mus) - 1)])
        for _ in range(3):
            a, fa = _refine_end(psi, (a, fa), lambda x, fx: chord_value(x, fx, b, fb, nu), lo_a, hi_a, tol)
            b, fb = _refine_end(psi, (b, fb), lambda x, fx: chord_value(a, fa, x, fx, nu), lo_b, hi_b, tol)
    cost = chord_value(a, fa, b, fb, nu)
    if cost >= vals[k] - tol:
        return SignalScheme.no_revelation(prior), float(vals[k])
    ta = (b - nu) / (b - a)
    scheme = SignalScheme.from_posteriors(prior, [Belief.binary(a), Belief.binary(b)], [ta, 1.0 - ta])
    return scheme, float(cost)


def _refine_end(psi, current, chord, lo, hi, tol):
    """Move one contact point within [lo, hi] to lower the chord value at the prior.

    The incumbent and the interval ends are kept unless the continuous
    optimum beats them by more than ``tol``, so grid-exact contacts (such
    as the belief 0 or 1) are not nudged by solver noise.
    """
    if hi <= lo:
        return current
    best = current
    best_val = chord(*current)
    for x in (lo, hi):
        if x != current[0]:
            fx = psi(x)
            if chord(x, fx) < best_val - tol:
                best, best_val = (x, fx), chord(x, fx)
    res = minimize_scalar(lambda x: chord(x, psi(x)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    x = float(res.x)
    fx = psi(x)
    if chord(x, fx) < best_val - tol:
        best = (x, fx)
    return best


def _simplex_lattice(n_states: int, resolution: int) -> np.ndarray:
    """All beliefs with coordinates in multiples of ``1/resolution``."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i, slots - 1)

    rec([], resolution, n_states)
    return np.array(out, dtype=float) / resolution


def _design_lattice(snet, eps, grid_size, **kw):
    n = snet.n_states
    res = 1
    while comb(res + 1 + n - 1, n - 1) <= grid_size:
        res += 1
    beliefs = np.vstack([_simplex_lattice(n, res), snet.prior.probabilities])
    vals = np.array([psi_eps_at_belief(snet, b, eps, **kw) for b in beliefs])
    A_eq = np.vstack([beliefs.T, np.ones(len(beliefs))])
    b_eq = np.append(snet.prior.probabilities, 1.0)
    lp = linprog(vals, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if not lp.success:
        raise ArithmeticError(f"lattice program failed: {lp.message}")
    keep = np.flatnonzero(lp.x > 1e-12)
    nu_val = float(vals[-1])
    if lp.fun >= nu_val - 1e-12 * (1.0 + abs(nu_val)):
        s = SignalScheme.no_revelation(snet.prior)
        return SignalScheme(s.prior, s.posteriors, s.weights, s.conditional, approximate=True), nu_val
    posts = [Belief(beliefs[i] / beliefs[i].sum()) for i in keep]
    # rebalance the weights exactly onto the prior
    w, *_ = np.linalg.lstsq(np.vstack([beliefs[keep].T, np.ones(len(keep))]), b_eq, rcond=None)
    scheme = SignalScheme.from_posteriors(snet.prior, posts, np.clip(w, 0.0, None), approximate=True)
    return scheme, float(w @ vals[keep])


# -- comparisons and evaluation ----------------------------------------------


def blackwell_compare(a: SignalScheme, b: SignalScheme) -> str:
    """Blackwell order of two binary-state schemes: more, less, equal or incomparable.

    With two states a scheme is summarized by its distribution of
    posteriors on [0, 1].  ``a`` dominates ``b`` when both share the prior
    mean and the integrated CDF of ``a`` lies above that of ``b``
    everywhere (convex order).  For two-posterior schemes this is interval
    containment of the posterior hulls.
    """
    for s in (a, b):
        if len(s.prior) != 2:
            raise UnsupportedStateSpace("Blackwell comparison is implemented for two states")
    ma = float(a.weights @ [p.p1 for p in a.posteriors])
    mb = float(b.weights @ [p.p1 for p in b.posteriors])
    if abs(ma - mb) > BAYES_TOL:
        return "incomparable"
    knots = sorted({p.p1 for p in a.posteriors} | {p.p1 for p in b.posteriors} | {0.0, 1.0})
    ia = np.array([_integrated_cdf(a, t) for t in knots])
    ib = np.array([_integrated_cdf(b, t) for t in knots])
    tol = 1e-9
    ge = bool(np.all(ia >= ib - tol))
    le = bool(np.all(ia <= ib + tol))
    if ge and le:
        return "equal"
    if ge:
        return "more"
    if le:
        return "less"
    return "incomparable"


def _integrated_cdf(s: SignalScheme, t: float) -> float:
    # E[(t - mu)^+], piecewise linear with kinks at the posteriors
    return float(sum(w * max(t - p.p1, 0.0) for w, p in zip(s.weights, s.posteriors)))


def expected_realized_cost(snet: StochasticNetwork, scheme: SignalScheme, eps_actual: float, **kw) -> float:
    """Expected worst-case cost when drivers actually play eps_actual-BRUE under ``scheme``."""
    return float(
        sum(w * psi_eps_at_belief(snet, mu, eps_actual, **kw) for w, mu in zip(scheme.weights, scheme.posteriors))
    )


@dataclass(frozen=True)
class PosteriorReport:
    excess: np.ndarray = field(repr=False)
    thresholds: np.ndarray = field(repr=False)
    expected_excess: float
    expected_eps: float
    ratio: float


def posterior_excess_report(snet: StochasticNetwork, scheme: SignalScheme, flows: Sequence) -> PosteriorReport:
    """Expected average excess time and expected threshold of one flow per posterior.

    ``flows[m]`` is a PathFlow (or raw path-flow vector) on the posterior
    network of message ``m``, in the path order of ``snet.paths``.
    """
    if len(flows) != len(scheme.posteriors):
        raise ValueError("need exactly one flow per posterior")
    excess, thr = [], []
    for mu, g in zip(scheme.posteriors, flows):
        net = posterior_network(snet, mu)
        paths = _posterior_paths(snet, net)
        values = g.values if isinstance(g, PathFlow) else np.asarray(g, dtype=float)
        flow = PathFlow(paths, values)
        psi0 = solve_ue(net, paths=paths).psi0
        excess.append((social_cost(flow) - psi0) / net.total_demand)
        thr.append(epsilon_threshold(flow))
    excess, thr = np.array(excess), np.array(thr)
    ee = float(scheme.weights @ excess)
    et = float(scheme.weights @ thr)
    ratio = ee / et if et > 0 else float("nan")
    return PosteriorReport(excess, thr, ee, et, ratio)
