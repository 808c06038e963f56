"""Named reproduction checks for the bundled example networks.

Each target returns a list of :class:`Check` records; the CLI prints one
line per check and exits non-zero when any fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import reference as ref
from .equilibrium import min_social_cost, solve_ue
from .functionals import (
    epsilon_threshold,
    evaluate_batch,
    random_flows,
)
from .network import Network, PathFlow, enumerate_paths
from .persuasion import (
    StochasticNetwork,
    belief_curve,
    blackwell_compare,
    design_signal,
    epsilon_infinity,
    expected_realized_cost,
    posterior_network,
    psi_eps_at_belief,
)
from .topologies import make_n1, make_n2, make_parallel, make_two_road, make_wheatstone, make_wheatstone_chain
from .worstcase import (
    average_excess_time,
    chain_proof_flows,
    epsilon_bar,
    estimate_inefficiency_factor,
    grid_worst_brue,
    psi_eps_curve,
    worst_brue,
)

TARGETS = ("wheatstone", "chain", "n1", "n2", "bounds")


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tol: float
    passed: bool
    relation: str = "=="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: observed={self.observed:.12g} {self.relation} "
            f"expected={self.expected:.12g} (tol {self.tol:.3g})"
        )


def close(name, observed, expected, tol) -> Check:
    observed, expected = float(observed), float(expected)
    return Check(name, observed, expected, tol, abs(observed - expected) <= tol)


def at_most(name, observed, bound, tol=0.0) -> Check:
    observed, bound = float(observed), float(bound)
    return Check(name, observed, bound, tol, observed <= bound + tol, "<=")


def at_least(name, observed, bound, tol=0.0) -> Check:
    observed, bound = float(observed), float(bound)
    return Check(name, observed, bound, tol, observed >= bound - tol, ">=")


def flag(name, ok: bool) -> Check:
    return Check(name, float(ok), 1.0, 0.0, bool(ok))


# -- wheatstone ----------------------------------------------------------------


def check_wheatstone() -> list[Check]:
    net = make_wheatstone()
    paths = enumerate_paths(net)
    ue = solve_ue(net, paths=paths)
    g = PathFlow(paths, [0.0, 1.0, 0.0])
    out = [close("UE social cost", ue.psi0, 1.0, 1e-6)]
    for i, label in enumerate("UMD"):
        out.append(close(f"UE cost of path {label}", ue.flow.path_costs[i], 1.0, 1e-6))
    out += [
        close("threshold of (0,1,0)", epsilon_threshold(g), 0.5, 1e-9),
        close("average excess time of (0,1,0)", average_excess_time(net, paths, g, ue.psi0).psi, 1.0, 1e-6),
        close("cost of M at (0,1,0)", g.path_costs[1], 2.0, 1e-12),
        close("cost of U at (0,1,0)", g.path_costs[0], 1.5, 1e-12),
        close("system optimum", min_social_cost(net), 1.0, 1e-6),
    ]
    for eps in (0.0, 0.1, 0.25, 0.5, 1.0):
        res = worst_brue(net, paths, eps)
        oracle = grid_worst_brue(paths, eps, step=1e-3)
        out.append(close(f"worst case at eps={eps:g} vs lattice oracle", res.psi_eps, oracle.psi_eps, 1e-3))
    out.append(close("worst case at eps=0.5", worst_brue(net, paths, 0.5).psi_eps, 2.0, 1e-6))
    m_hat = estimate_inefficiency_factor(net, paths, [0.1, 0.25, 0.5])
    out.append(at_least("inefficiency estimate with eps grid reaching 1/2", m_hat, 2.0, 1e-6))
    return out


# -- chain -----------------------------------------------------------------------


def chain_table(ns=(1, 2, 3, 4), d_prime=1e-3, eta=0.25) -> list[tuple[int, float, float]]:
    """``(N, witness ratio, inefficiency estimate)`` rows for the Wheatstone chain."""
    rows = []
    for n in ns:
        net = make_wheatstone_chain(n, d_prime)
        paths = enumerate_paths(net)
        f, g = chain_proof_flows(paths, eta)
        psi0 = solve_ue(net, paths=paths).psi0
        rep = average_excess_time(net, paths, g, psi0)
        grid = [k * d_prime for k in (0.1, 0.25, 0.5)]
        m_hat = estimate_inefficiency_factor(net, paths, grid, psi0=psi0)
        rows.append((n, rep.ratio, m_hat))
    return rows


def check_chain() -> list[Check]:
    out = []
    net = make_wheatstone_chain(4, 0.1)
    out.append(close("chain N=4 vertex count", len(net.vertices), 13, 0))
    out.append(close("chain N=4 edge count", net.n_edges, 20, 0))
    net = make_wheatstone_chain(2, 0.1)
    paths = enumerate_paths(net)
    out.append(close("chain N=2 crossing-trip paths", len(paths.trip_ranges[-1]), 9, 0))
    f, g = chain_proof_flows(paths, 0.25)
    thr, gap = ref.chain_excess(2, 0.1, 0.25)
    out.append(close("chain N=2 perturbed threshold", epsilon_threshold(g), thr, 1e-12))
    out.append(close("chain N=2 social-cost gap", g.values @ g.path_costs - f.values @ f.path_costs, gap, 1e-12))
    for n, ratio, m_hat in chain_table():
        out.append(close(f"chain N={n} witness excess/threshold", ratio, n, 0.05 * n))
        out.append(at_least(f"chain N={n} inefficiency estimate", m_hat, 0.95 * n))
    return out


# -- N1 --------------------------------------------------------------------------


def _bisect_kind(snet: StochasticNetwork, lo: float, hi: float, width: float, grid_size: int) -> float:
    kind_lo = design_signal(snet, lo, grid_size)[0].kind
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if design_signal(snet, mid, grid_size)[0].kind == kind_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_high_eps(snet: StochasticNetwork, label: str, grid_size: int = 401) -> list[Check]:
    eps = epsilon_infinity(snet) + 0.1
    mus, vals = belief_curve(snet, eps, grid_size)
    scheme, _ = design_signal(snet, eps, grid_size, curve=(mus, vals))
    second = np.diff(vals, 2)
    return [
        flag(f"{label}: no revelation beyond eps_infinity", scheme.kind == "none"),
        at_least(f"{label}: second differences of the belief curve beyond eps_infinity", second.min(), 0.0, 1e-6),
    ]


def check_n1(grid_size: int = 2001) -> list[Check]:
    snet = make_n1()
    out = [
        close("posterior upper-road cost at mu=1", posterior_network(snet, 1.0).edges[1].cost(0.37), 2.0, 1e-12),
        close("worst case at eps=0, mu=1/2", psi_eps_at_belief(snet, 0.5, 0.0), 11 / 6, 1e-9),
        close("eps_infinity", epsilon_infinity(snet), 2.0, 1e-12),
    ]
    worst = 0.0
    for mu in np.linspace(0, 1, 11):
        for eps in np.linspace(0, 0.1, 6):
            worst = max(worst, abs(psi_eps_at_belief(snet, mu, eps) - ref.n1_psi(mu, eps)))
    out.append(at_most("belief-curve formula, max deviation on 11x6 grid", worst, 2e-3))

    schemes = {}
    for eps in (0.02, 0.04, 0.05, 0.06, 0.08, 0.095):
        schemes[eps] = design_signal(snet, eps, grid_size)[0]
    out.append(flag("no revelation at eps=0.02", schemes[0.02].kind == "none"))
    out.append(flag("full revelation at eps=0.095", schemes[0.095].kind == "full"))
    for eps in (0.04, 0.05, 0.06, 0.08):
        s = schemes[eps]
        low = s.hull()[0] if s.kind == "partial" else float("nan")
        out.append(close(f"lower posterior at eps={eps:g}", low, ref.n1_contact(eps), 1e-4))
        out.append(close(f"upper posterior at eps={eps:g}", s.hull()[1], 1.0, 1e-9))
    eps_list = sorted(schemes)
    nested = all(blackwell_compare(schemes[b], schemes[a]) in ("more", "equal") for a, b in zip(eps_list, eps_list[1:]))
    out.append(flag("revealed information increases with eps (Blackwell)", nested))
    coarse = 401
    b1 = _bisect_kind(snet, 0.02, 0.05, 2e-4, coarse)
    b2 = _bisect_kind(snet, 0.05, 0.095, 2e-4, coarse)
    out.append(close("boundary no/partial revelation", b1, ref.N1_NO_REVELATION_UNTIL, 1e-3))
    out.append(close("boundary partial/full revelation", b2, ref.N1_FULL_REVELATION_FROM, 1e-3))
    out.append(close("contact formula at the first boundary", ref.n1_contact(1 / 35), 0.5, 1e-5))

    s0, _ = design_signal(snet, 0.0, coarse)
    s9, _ = design_signal(snet, 0.09, coarse)
    out.append(
        Check(
            "realized cost at eps=0: scheme for 0.09 exceeds scheme for 0",
            expected_realized_cost(snet, s9, 0.0),
            expected_realized_cost(snet, s0, 0.0),
            0.0,
            expected_realized_cost(snet, s9, 0.0) > expected_realized_cost(snet, s0, 0.0),
            ">",
        )
    )
    out += check_high_eps(snet, "N1")
    return out


# -- N2 --------------------------------------------------------------------------


def check_n2(grid_size: int = 2001) -> list[Check]:
    snet = make_n2(0.5)
    out = [
        close("posterior upper-road cost at mu=1/2, x=0.3", posterior_network(snet, 0.5).edges[1].cost(0.3), 0.8, 1e-12),
        close("worst case at eps=0.3, mu=1/2", psi_eps_at_belief(snet, 0.5, 0.3), 1.045, 1e-9),
        close("eps_infinity", epsilon_infinity(snet), 2.0, 1e-12),
    ]
    worst = 0.0
    for mu in np.linspace(0, 1, 21):
        for eps in np.linspace(0, 2, 21):
            worst = max(worst, abs(psi_eps_at_belief(snet, mu, eps) - ref.n2_psi(mu, eps)))
    out.append(at_most("piecewise formulas, max deviation on 21x21 grid", worst, 2e-3))
    for eps in (0.8, 1.0, 1.2, 0.3, 0.6, 1.3, 1.6):
        scheme, cost = design_signal(snet, eps, grid_size)
        p0, p1 = psi_eps_at_belief(snet, 0.0, eps), psi_eps_at_belief(snet, 1.0, eps)
        chord = 0.5 * (p0 + p1)
        no_rev = psi_eps_at_belief(snet, 0.5, eps)
        if ref.N2_FULL_REVELATION[0] < eps < ref.N2_FULL_REVELATION[1]:
            out.append(flag(f"full revelation emitted at eps={eps:g}", scheme.kind == "full"))
            out.append(close(f"optimal cost equals full-revelation chord at eps={eps:g}", cost, chord, 1e-9))
            out.append(Check(f"chord below no revelation at eps={eps:g}", chord, no_rev - 1e-4, 0.0, chord < no_rev - 1e-4, "<"))
        else:
            out.append(flag(f"full revelation not emitted at eps={eps:g}", scheme.kind != "full"))
            out.append(Check(f"optimal cost below full-revelation chord at eps={eps:g}", cost, chord - 1e-4, 0.0, cost < chord - 1e-4, "<"))
    out += check_high_eps(snet, "N2")
    return out


# -- property suites ---------------------------------------------------------------


def example_networks() -> dict[str, Network]:
    return {
        "wheatstone": make_wheatstone(),
        "tworoad": make_two_road(),
        "chain2": make_wheatstone_chain(2, 0.1),
        "parallel3": make_parallel([[0.5, 1.0], [1.0, 0.0, 1.0], [0.2, 2.0]], 1.0, "parallel3"),
        "n1_half": posterior_network(make_n1(), 0.5),
        "n2_half": posterior_network(make_n2(), 0.5),
    }


def parallel_networks() -> dict[str, Network]:
    return {
        "tworoad": make_two_road(),
        "tworoad_eps": make_two_road(0.1, 0.01),
        "parallel3": make_parallel([[0.5, 1.0], [1.0, 0.0, 1.0], [0.2, 2.0]], 1.0, "parallel3"),
        "n1_mu0": posterior_network(make_n1(), 0.0),
        "n2_half": posterior_network(make_n2(), 0.5),
    }


def near_equilibrium_flows(paths, ue: PathFlow, n: int, rng, smallest: float = 1e-5) -> np.ndarray:
    """Mixtures ``(1-s) f + s h`` with ``s`` log-uniform in [smallest, 1]."""
    h = random_flows(paths, n, rng)
    s = np.exp(rng.uniform(np.log(smallest), 0.0, size=(n, 1)))
    return (1 - s) * ue.values + s * h


def excess_ratio_profile(net: Network, n: int = 10_000, seed: int = 0):
    """Sampled ``(threshold, excess/threshold)`` pairs for flows near the UE."""
    paths = enumerate_paths(net)
    ue = solve_ue(net, paths=paths)
    G = near_equilibrium_flows(paths, ue.flow, n, np.random.default_rng(seed))
    m = evaluate_batch(paths, G)
    psi = (m.social_cost - ue.psi0) / net.total_demand
    keep = m.threshold > 0
    return m.threshold[keep], psi[keep] / m.threshold[keep], psi[keep]


def check_bounds(samples: int = 10_000, seed: int = 0) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed)
    for name, net in example_networks().items():
        paths = enumerate_paths(net)
        ue = solve_ue(net, paths=paths)
        F = random_flows(paths, samples, rng)
        Gs = random_flows(paths, samples, rng)
        mf = evaluate_batch(paths, F)
        # variational inequality, vectorized over pairs
        diff = F - Gs
        vi = np.einsum("ij,ij->i", diff, mf.path_costs) - 0.5 * mf.threshold * np.abs(diff).sum(axis=1)
        out.append(at_most(f"{name}: variational inequality, max gap over {samples} pairs", vi.max(), 0.0, 1e-8))
        pot = mf.potential - ue.phi0 - net.total_demand * mf.threshold
        out.append(at_most(f"{name}: potential bound, max slack over {samples} flows", pot.max(), 0.0, 1e-8))
        bar = epsilon_bar(net, paths)
        grid = sorted(set(np.round(np.concatenate([np.linspace(0, bar, 9), [bar * 1.5, bar * 2]]), 12)))
        try:
            psi_eps_curve(net, paths, grid)
            ok = True
        except ArithmeticError:
            ok = False
        out.append(flag(f"{name}: worst case nondecreasing and ultimately constant", ok))
        thr, ratio, _ = excess_ratio_profile(net, samples, seed)
        small = ratio[thr < 1e-3]
        big = ratio[thr >= 1e-3]
        # no blow-up: small thresholds do not push the ratio past what larger ones reach
        bound = max(float(big.max()) if len(big) else 0.0, 1.0)
        out.append(at_most(f"{name}: excess/threshold below 1e-3 vs above", small.max() if len(small) else 0.0, 1.1 * bound))
    for name, net in parallel_networks().items():
        paths = enumerate_paths(net)
        ue = solve_ue(net, paths=paths)
        G = np.vstack([random_flows(paths, samples, rng), near_equilibrium_flows(paths, ue.flow, samples, rng)])
        m = evaluate_batch(paths, G)
        psi = (m.social_cost - ue.psi0) / net.total_demand
        out.append(at_most(f"{name}: excess minus threshold on parallel roads", (psi - m.threshold).max(), 0.0, 1e-6))
    return out


RUNNERS: dict[str, Callable[[], list[Check]]] = {
    "wheatstone": check_wheatstone,
    "chain": check_chain,
    "n1": check_n1,
    "n2": check_n2,
    "bounds": check_bounds,
}


def run(target: str) -> list[Check]:
    if target not in RUNNERS:
        raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    return RUNNERS[target]()
