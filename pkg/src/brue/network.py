"""Deterministic congestion networks: latencies, trips, paths and path flows.

A :class:`Network` is a directed multigraph whose edges carry polynomial
latencies with nonnegative coefficients, together with a list of trips
(origin, destination, demand).  Path-level objects (:class:`PathSet`,
:class:`PathFlow`) are built on top of it.

Everything here is immutable once constructed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import NetworkFormatError, NoPath, PathExplosion

DEMAND_RTOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CostPolynomial:
    """Edge latency ``c(x) = sum_k a_k x**k`` with every ``a_k >= 0``."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coefficients) or (0.0,)
        for a in coeffs:
            if not math.isfinite(a) or a < 0:
                raise NetworkFormatError(f"cost coefficients must be finite and >= 0, got {coeffs}")
        # drop trailing zeros but keep the constant term
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, value: float) -> CostPolynomial:
        return cls((value,))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def derivative(self) -> CostPolynomial:
        return CostPolynomial(tuple(k * a for k, a in enumerate(self.coefficients))[1:])

    def integral(self, x):
        """Exact value of the integral of ``c`` over ``[0, x]``."""
        anti = (0.0,) + tuple(a / (k + 1) for k, a in enumerate(self.coefficients))
        return np.polynomial.polynomial.polyval(x, anti)

    def marginal(self) -> CostPolynomial:
        """Marginal social cost ``c(x) + x c'(x)``."""
        return CostPolynomial(tuple((k + 1) * a for k, a in enumerate(self.coefficients)))

    def compose_affine(self, offset: float, slope: float) -> Polynomial:
        """``c(offset + slope * t)`` as a polynomial in ``t``."""
        return Polynomial(self.coefficients)(Polynomial([offset, slope]))

    def scaled(self, weight: float) -> CostPolynomial:
        return CostPolynomial(tuple(weight * a for a in self.coefficients))

    def __add__(self, other: CostPolynomial) -> CostPolynomial:
        n = max(len(self.coefficients), len(other.coefficients))
        a = self.coefficients + (0.0,) * (n - len(self.coefficients))
        b = other.coefficients + (0.0,) * (n - len(other.coefficients))
        return CostPolynomial(tuple(x + y for x, y in zip(a, b)))

    def __str__(self):
        terms = []
        for k, a in enumerate(self.coefficients):
            if a == 0 and len(self.coefficients) > 1:
                continue
            terms.append(f"{a:g}" if k == 0 else f"{a:g}x" if k == 1 else f"{a:g}x^{k}")
        return " + ".join(terms)


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    cost: CostPolynomial


@dataclass(frozen=True)
class Trip:
    origin: str
    destination: str
    demand: float


@dataclass(frozen=True)
class Network:
    """The triple (graph, latencies, demand).

    Edges are indexed by their position in ``edges``; that index is what
    paths are made of.  Parallel edges and several trips sharing endpoints
    are allowed.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    trips: tuple[Trip, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "trips", tuple(self.trips))
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise NetworkFormatError("duplicate vertex ids")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise NetworkFormatError("duplicate edge ids")
        for e in self.edges:
            if e.tail not in vset or e.head not in vset:
                raise NetworkFormatError(f"edge {e.id!r} references an unknown vertex")
        if not self.trips:
            raise NetworkFormatError("a network needs at least one trip")
        for t in self.trips:
            if t.origin not in vset or t.destination not in vset:
                raise NetworkFormatError(f"trip {t} references an unknown vertex")
            if t.origin == t.destination:
                raise NetworkFormatError(f"trip {t} is vacuous")
            if not (t.demand > 0 and math.isfinite(t.demand)):
                raise NetworkFormatError(f"trip demand must be positive, got {t.demand}")
        for t in self.trips:
            if t.destination not in self._reachable(t.origin):
                raise NoPath(f"no path from {t.origin!r} to {t.destination!r}")

    def _reachable(self, source):
        seen, stack = {source}, [source]
        while stack:
            v = stack.pop()
            for i in self.out_edges.get(v, ()):
                w = self.edges[i].head
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    @cached_property
    def out_edges(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            out[e.tail].append(i)
        return {v: tuple(ix) for v, ix in out.items()}

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def demands(self) -> np.ndarray:
        return _frozen([t.demand for t in self.trips])

    @property
    def total_demand(self) -> float:
        return float(self.demands.sum())

    @cached_property
    def _coef(self) -> np.ndarray:
        width = max(len(e.cost.coefficients) for e in self.edges) if self.edges else 1
        c = np.zeros((self.n_edges, width))
        for i, e in enumerate(self.edges):
            c[i, : len(e.cost.coefficients)] = e.cost.coefficients
        c.setflags(write=False)
        return c

    def edge_costs(self, flows) -> np.ndarray:
        """Latencies ``c_e(f_e)``; ``flows`` has the edge axis last."""
        f = np.asarray(flows, dtype=float)
        out = np.zeros_like(f)
        for k in range(self._coef.shape[1] - 1, -1, -1):
            out = out * f + self._coef[:, k]
        return out

    def edge_cost_derivatives(self, flows) -> np.ndarray:
        f = np.asarray(flows, dtype=float)
        out = np.zeros_like(f)
        for k in range(self._coef.shape[1] - 1, 0, -1):
            out = out * f + k * self._coef[:, k]
        return out

    def edge_integrals(self, flows) -> np.ndarray:
        f = np.asarray(flows, dtype=float)
        out = np.zeros_like(f)
        for k in range(self._coef.shape[1] - 1, -1, -1):
            out = out * f + self._coef[:, k] / (k + 1)
        return out * f

    def with_costs(self, costs: Sequence[CostPolynomial], name: str | None = None) -> Network:
        if len(costs) != self.n_edges:
            raise NetworkFormatError("one cost per edge required")
        edges = tuple(Edge(e.id, e.tail, e.head, c) for e, c in zip(self.edges, costs))
        return Network(self.vertices, edges, self.trips, self.name if name is None else name)

    def marginal_network(self) -> Network:
        return self.with_costs([e.cost.marginal() for e in self.edges], name=f"{self.name}:marginal")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "tail": e.tail, "head": e.head, "cost": list(e.cost.coefficients)}
                for e in self.edges
            ],
            "trips": [
                {"origin": t.origin, "destination": t.destination, "demand": t.demand}
                for t in self.trips
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict, name: str = "") -> Network:
        try:
            vertices = [str(v) for v in doc["vertices"]]
            edges = [
                Edge(str(e["id"]), str(e["tail"]), str(e["head"]), CostPolynomial(tuple(e["cost"])))
                for e in doc["edges"]
            ]
            trips = [
                Trip(str(t["origin"]), str(t["destination"]), float(t["demand"])) for t in doc["trips"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"malformed network document: {exc!r}") from exc
        return cls(tuple(vertices), tuple(edges), tuple(trips), name)


def load_network(path) -> Network:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise NetworkFormatError(f"{path}: top level must be an object")
    return Network.from_dict(doc, name=path.stem)


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- paths -----------------------------------------------------------------


@dataclass(frozen=True)
class PathSet:
    """Simple paths per trip, concatenated trip by trip.

    ``paths[i]`` is a tuple of edge indices; ``trip_of[i]`` the trip it
    realizes.  ``complete`` is False when only a subset of each trip's
    simple paths is present (e.g. paths used by a solver on a network too
    large to enumerate).
    """

    network: Network
    paths: tuple[tuple[int, ...], ...]
    trip_of: tuple[int, ...]
    complete: bool = True

    def __post_init__(self):
        if len(self.paths) != len(self.trip_of):
            raise ValueError("paths and trip_of must have equal length")
        if list(self.trip_of) != sorted(self.trip_of):
            raise ValueError("paths must be grouped by trip")
        for t in range(len(self.network.trips)):
            if t not in set(self.trip_of):
                raise NoPath(f"trip {t} has no path in the path set")

    def __len__(self):
        return len(self.paths)

    @cached_property
    def incidence(self) -> np.ndarray:
        """Path-by-edge 0/1 matrix."""
        a = np.zeros((len(self.paths), self.network.n_edges))
        for i, p in enumerate(self.paths):
            a[i, list(p)] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def trip_index(self) -> np.ndarray:
        a = np.array(self.trip_of, dtype=int)
        a.setflags(write=False)
        return a

    @cached_property
    def trip_ranges(self) -> tuple[range, ...]:
        out = []
        for t in range(len(self.network.trips)):
            ix = [i for i, s in enumerate(self.trip_of) if s == t]
            out.append(range(ix[0], ix[-1] + 1))
        return tuple(out)

    @cached_property
    def _lookup(self) -> dict[tuple[int, tuple[int, ...]], int]:
        return {(t, p): i for i, (t, p) in enumerate(zip(self.trip_of, self.paths))}

    def index(self, trip: int, path: Sequence[int]) -> int:
        return self._lookup[(trip, tuple(path))]

    def label(self, i: int) -> str:
        return "-".join(self.network.edges[e].id for e in self.paths[i])

    def vertices_of(self, i: int) -> list[str]:
        edges = [self.network.edges[e] for e in self.paths[i]]
        return [edges[0].tail] + [e.head for e in edges]


def enumerate_paths(net: Network, cap: int = 10_000) -> PathSet:
    """All simple origin-destination paths of every trip.

    Paths are listed trip by trip, each trip's paths in lexicographic order
    of their edge-index sequences.  Raises :class:`PathExplosion` once more
    than ``cap`` paths have been found.
    """
    paths: list[tuple[int, ...]] = []
    trip_of: list[int] = []
    per_od: dict[tuple[str, str], list[tuple[int, ...]]] = {}
    for t, trip in enumerate(net.trips):
        key = (trip.origin, trip.destination)
        if key not in per_od:
            per_od[key] = _simple_paths(net, trip.origin, trip.destination, cap - len(paths))
        found = per_od[key]
        if not found:
            raise NoPath(f"no simple path for trip {t} ({trip.origin} -> {trip.destination})")
        paths.extend(found)
        trip_of.extend([t] * len(found))
        if len(paths) > cap:
            raise PathExplosion(f"more than {cap} paths")
    return PathSet(net, tuple(paths), tuple(trip_of))


def _simple_paths(net: Network, source: str, target: str, budget: int) -> list[tuple[int, ...]]:
    found: list[tuple[int, ...]] = []
    on_path = {source}
    edges: list[int] = []

    def dfs(v):
        if v == target:
            found.append(tuple(edges))
            if len(found) > budget:
                raise PathExplosion(f"more than the remaining budget of {budget} paths")
            return
        for i in net.out_edges[v]:
            w = net.edges[i].head
            if w in on_path:
                continue
            on_path.add(w)
            edges.append(i)
            dfs(w)
            edges.pop()
            on_path.discard(w)

    dfs(source)
    return sorted(found)


def path_set_from(net: Network, paths_per_trip: Iterable[Iterable[Sequence[int]]], complete=False) -> PathSet:
    paths, trip_of = [], []
    for t, group in enumerate(paths_per_trip):
        for p in sorted({tuple(p) for p in group}):
            paths.append(p)
            trip_of.append(t)
    return PathSet(net, tuple(paths), tuple(trip_of), complete)


@dataclass(frozen=True, eq=False)
class PathFlow:
    """Nonnegative path flow meeting every trip's demand."""

    paths: PathSet
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.paths),):
            raise ValueError(f"expected {len(self.paths)} path values, got shape {v.shape}")
        scale = self.paths.network.total_demand
        if np.any(v < -DEMAND_RTOL * scale) or not np.all(np.isfinite(v)):
            raise ValueError("path flows must be finite and nonnegative")
        v = np.maximum(v, 0.0)
        sums = np.bincount(self.paths.trip_index, weights=v, minlength=len(self.paths.network.trips))
        demand = self.paths.network.demands
        if np.any(np.abs(sums - demand) > DEMAND_RTOL * np.maximum(demand, 1.0)):
            raise ValueError(f"path flows {sums} do not meet demand {demand}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, paths: PathSet, values) -> PathFlow:
        """Clip negatives and rescale each trip's flows to its demand exactly."""
        v = np.maximum(np.asarray(values, dtype=float), 0.0)
        for t, rng in enumerate(paths.trip_ranges):
            s = v[rng.start : rng.stop].sum()
            d = paths.network.trips[t].demand
            if s > 0:
                v[rng.start : rng.stop] *= d / s
            else:
                v[rng.start : rng.stop] = d / len(rng)
        return cls(paths, v)

    @classmethod
    def from_mapping(cls, paths: PathSet, mapping: dict[int, float]) -> PathFlow:
        v = np.zeros(len(paths))
        for i, x in mapping.items():
            v[i] = x
        return cls(paths, v)

    @property
    def network(self) -> Network:
        return self.paths.network

    @cached_property
    def edge_flow(self) -> np.ndarray:
        return _frozen(self.values @ self.paths.incidence)

    @cached_property
    def edge_costs(self) -> np.ndarray:
        return _frozen(self.network.edge_costs(self.edge_flow))

    @cached_property
    def path_costs(self) -> np.ndarray:
        return _frozen(self.paths.incidence @ self.edge_costs)

    def __repr__(self):
        vals = ", ".join(f"{x:.6g}" for x in self.values)
        return f"PathFlow([{vals}])"
