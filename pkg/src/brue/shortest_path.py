"""Label-setting shortest paths with deterministic tie-breaking."""
from __future__ import annotations

from heapq import heappop, heappush

import numpy as np

from .network import Network


def shortest_paths_from(net: Network, source: str, costs: np.ndarray) -> dict[str, tuple[float, tuple[int, ...]]]:
    """Dijkstra from ``source`` over nonnegative edge ``costs``.

    Returns ``{vertex: (distance, edge-index path)}`` for every reachable
    vertex.  Among equal-length paths the lexicographically smallest edge
    index sequence wins, so results do not depend on dict or heap order.
    """
    if np.any(costs < 0):
        raise ValueError("label-setting requires nonnegative edge costs")
    settled: dict[str, tuple[float, tuple[int, ...]]] = {}
    heap: list[tuple[float, tuple[int, ...], str]] = [(0.0, (), source)]
    while heap:
        dist, path, v = heappop(heap)
        if v in settled:
            continue
        settled[v] = (dist, path)
        for i in net.out_edges[v]:
            w = net.edges[i].head
            if w not in settled:
                heappush(heap, (dist + float(costs[i]), path + (i,), w))
    return settled


def all_or_nothing(net: Network, costs: np.ndarray) -> list[tuple[float, tuple[int, ...]]]:
    """Shortest path (and its length) for every trip, one Dijkstra per origin."""
    trees: dict[str, dict] = {}
    out = []
    for trip in net.trips:
        if trip.origin not in trees:
            trees[trip.origin] = shortest_paths_from(net, trip.origin, costs)
        out.append(trees[trip.origin][trip.destination])
    return out
