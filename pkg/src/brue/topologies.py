"""Builders for the reference networks used throughout the test-suite and CLI."""
from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

from .network import CostPolynomial, Edge, Network, Trip

if TYPE_CHECKING:
    from .persuasion import StochasticNetwork

LINEAR = CostPolynomial((0.0, 1.0))
HALF = CostPolynomial.constant(0.5)
ZERO = CostPolynomial.constant(0.0)


def _wheatstone_edges(tail: str, head: str, up: str, low: str, suffix: str) -> list[Edge]:
    # order chosen so the lexicographic path order is up, middle, down
    return [
        Edge(f"a{suffix}", tail, up, LINEAR),
        Edge(f"b{suffix}", up, head, HALF),
        Edge(f"m{suffix}", up, low, ZERO),
        Edge(f"c{suffix}", tail, low, HALF),
        Edge(f"d{suffix}", low, head, LINEAR),
    ]


def make_wheatstone(demand: float = 1.0) -> Network:
    """Diamond s -> {u, l} -> t with a zero-cost rung u -> l.

    Latencies: s-u x, u-t 1/2, u-l 0, s-l 1/2, l-t x.  Paths in order:
    up (s-u-t), middle (s-u-l-t), down (s-l-t).
    """
    edges = _wheatstone_edges("s", "t", "u", "l", "")
    return Network(("s", "u", "l", "t"), tuple(edges), (Trip("s", "t", demand),), "wheatstone")


def make_wheatstone_chain(n: int, d_prime: float) -> Network:
    """``n`` Wheatstone copies in series, vertices v0 .. vn.

    Each copy carries a local trip of demand ``d_prime``; one trip of
    demand ``1 - d_prime`` crosses the whole chain.  Trips are listed local
    ones first, the crossing trip last.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"chain length must be a positive integer, got {n}")
    if not 0.0 < d_prime < 1.0:
        raise ValueError(f"d_prime must lie in (0, 1), got {d_prime}")
    n = int(n)
    vertices, edges, trips = ["v0"], [], []
    for i in range(1, n + 1):
        vertices += [f"u{i}", f"l{i}", f"v{i}"]
        edges += _wheatstone_edges(f"v{i - 1}", f"v{i}", f"u{i}", f"l{i}", str(i))
        trips.append(Trip(f"v{i - 1}", f"v{i}", d_prime))
    trips.append(Trip("v0", f"v{n}", 1.0 - d_prime))
    return Network(tuple(vertices), tuple(edges), tuple(trips), f"chain{n}")


def make_parallel(costs: Sequence[Sequence[float]], demand: float = 1.0, name: str = "") -> Network:
    """Single trip over parallel roads, one per coefficient list."""
    edges = tuple(Edge(f"r{i + 1}", "o", "d", CostPolynomial(tuple(c))) for i, c in enumerate(costs))
    return Network(("o", "d"), edges, (Trip("o", "d", demand),), name or f"parallel{len(costs)}")


def make_two_road(c1: float = 1.0, c2: float = 2.0, demand: float = 1.0) -> Network:
    """Two parallel roads with constant latencies ``c1`` and ``c2``."""
    return make_parallel([[c1], [c2]], demand, name="tworoad")


def make_n1() -> "StochasticNetwork":
    """Two roads, uniform prior over two states.

    Lower road x/2 + 3/2 in both states; upper road x/5 + 8/5 in state 0
    and the constant 2 in state 1.
    """
    from .persuasion import Belief, StochasticNetwork

    lower = CostPolynomial((1.5, 0.5))
    base = Network(
        ("o", "d"),
        (Edge("lower", "o", "d", lower), Edge("upper", "o", "d", CostPolynomial((1.6, 0.2)))),
        (Trip("o", "d", 1.0),),
        "n1",
    )
    states = ((lower, CostPolynomial((1.6, 0.2))), (lower, CostPolynomial.constant(2.0)))
    return StochasticNetwork(base, states, Belief.binary(0.5), ("w0", "w1"))


def make_n2(prior: float = 0.5) -> "StochasticNetwork":
    """Two roads: lower x + 1/2, upper x + w with w in {0, 1}, ``Pr[w=1] = prior``."""
    from .persuasion import Belief, StochasticNetwork

    lower = CostPolynomial((0.5, 1.0))
    base = Network(
        ("o", "d"),
        (Edge("lower", "o", "d", lower), Edge("upper", "o", "d", LINEAR)),
        (Trip("o", "d", 1.0),),
        "n2",
    )
    states = ((lower, LINEAR), (lower, CostPolynomial((1.0, 1.0))))
    return StochasticNetwork(base, states, Belief.binary(prior), ("w0", "w1"))
