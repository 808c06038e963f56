"""Independent reference computations used by the tests.

Nothing here imports the package's solvers: path costs are written out by
hand for each small topology and worst cases are brute-forced on lattices.
"""
from __future__ import annotations

import math

import numpy as np


# -- two parallel roads -------------------------------------------------------


def two_road_worst(c1, c2, eps: float, step: float = 1e-5) -> tuple[float, float]:
    """Brute-force worst-case social cost on two parallel roads, unit demand.

    ``c1``/``c2`` are coefficient lists (index k multiplies x**k).  Returns
    ``(value, flow on road 1)``.  A road counts as used when its flow is
    positive.  The band is widened by the cost-gap Lipschitz constant times
    the step so that lattice points next to a thin feasible set count (no
    widening for constant costs).
    """
    x = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    p1 = np.polynomial.polynomial.polyval(x, c1)
    p2 = np.polynomial.polynomial.polyval(1 - x, c2)
    psi = x * p1 + (1 - x) * p2
    lo = np.minimum(p1, p2)
    thr = np.maximum(np.where(x > 0, p1 - lo, 0.0), np.where(x < 1, p2 - lo, 0.0))
    lip = sum(k * abs(a) for k, a in enumerate(c1)) + sum(k * abs(a) for k, a in enumerate(c2))
    ok = thr <= eps + lip * step + 1e-12
    if not ok.any():
        raise ValueError("no feasible lattice point")
    i = int(np.argmax(np.where(ok, psi, -np.inf)))
    return float(psi[i]), float(x[i])


# -- Wheatstone --------------------------------------------------------------


def wheatstone_costs(u: float, m: float, d: float) -> tuple[float, float, float]:
    """Path costs (U, M, D) of the unit Wheatstone network for path flows u, m, d."""
    top = u + m  # flow on s->u
    bottom = m + d  # flow on l->t
    return top + 0.5, top + bottom, 0.5 + bottom


def wheatstone_lattice(step: float = 1e-3):
    n = int(round(1 / step))
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = i + j <= n
    u = i[keep] / n
    m = j[keep] / n
    d = 1.0 - u - m
    d[d < 0] = 0.0
    return u, m, d


def wheatstone_worst(eps: float, step: float = 1e-3) -> float:
    u, m, d = wheatstone_lattice(step)
    cu, cm, cd = wheatstone_costs(u, m, d)
    lo = np.minimum(np.minimum(cu, cm), cd)
    tol = 0.25 * step
    thr = np.maximum.reduce([np.where(u > tol, cu - lo, 0), np.where(m > tol, cm - lo, 0), np.where(d > tol, cd - lo, 0)])
    psi = u * cu + m * cm + d * cd
    # no band widening: the tested extremizers are lattice points
    return float(np.where(thr <= eps + 1e-12, psi, -np.inf).max())


def wheatstone_min_social(step: float = 1e-3) -> float:
    u, m, d = wheatstone_lattice(step)
    cu, cm, cd = wheatstone_costs(u, m, d)
    return float((u * cu + m * cm + d * cd).min())


# -- closed forms transcribed independently ----------------------------------------


def n1_formula(mu: float, eps: float) -> float:
    return min(2.0, (12 + eps + 10 * eps * eps - 2 * mu + 4 * eps * mu) / (7 - 2 * mu))


def n1_p(eps: float) -> float:
    return 1 - 5 / 2 * eps - 5 / 2 * math.sqrt(eps + eps * eps)


def n1_worst_direct(mu: float, eps: float, step: float = 1e-5) -> float:
    """N1 at belief mu by brute force: lower x/2+3/2, upper (1-mu)(x/5+8/5)+2mu."""
    return two_road_worst([1.5, 0.5], [1.6 + 0.4 * mu, 0.2 * (1 - mu)], eps, step)[0]


def n2_formula(mu: float, eps: float) -> float:
    base = (1.5 + mu + eps * eps) / 2

    def mid():
        return base + abs(0.5 - mu) * eps / 2

    if eps <= 0.5:
        return mid()
    if eps <= 1:
        if mu <= eps - 0.5:
            return 1 + mu
        return mid() if mu <= 1.5 - eps else 1.5
    if eps <= 1.5:
        if mu <= 1.5 - eps:
            return base - (0.5 - mu) * eps / 2
        if mu <= eps - 0.5:
            return max(1.5, 1 + mu)
        return base + (0.5 - mu) * eps / 2
    return max(1.5, 1 + mu)


def n2_worst_direct(mu: float, eps: float, step: float = 1e-5) -> float:
    """N2 at belief mu by brute force: lower x+1/2, upper x+mu."""
    return two_road_worst([0.5, 1.0], [mu, 1.0], eps, step)[0]


def chain_ratio(n: int, d_prime: float, eta: float) -> float:
    return (n + 2 * n * eta * d_prime) / (n * d_prime + 1 - d_prime)


# -- convex envelope by brute force ---------------------------------------------------


def envelope_at(xs, ys, x0: float) -> float:
    """min over chords (a <= x0 <= b) of the chord value at x0, O(n^2)."""
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    best = np.inf
    left = np.flatnonzero(xs <= x0)
    right = np.flatnonzero(xs >= x0)
    for i in left:
        for j in right:
            if xs[j] == xs[i]:
                v = ys[i]
            else:
                v = ys[i] + (ys[j] - ys[i]) * (x0 - xs[i]) / (xs[j] - xs[i])
            best = min(best, v)
    return float(best)
