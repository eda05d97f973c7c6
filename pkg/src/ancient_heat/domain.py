"""Finite graphs and lattices carrying the graph Laplacian.

Fields are plain 1-D float arrays indexed by vertex id. The Laplacian uses
the sign convention ``Delta = -(D - W)``, so it is symmetric negative
semidefinite and ``du/dt = Delta u`` smooths forward in time.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ._io import fmt, write_atomic, write_json

BOUNDARIES = ("dirichlet", "neumann", "periodic")


class DomainError(ValueError):
    """Invalid domain description or field."""


@dataclass(frozen=True)
class LatticeMeta:
    dims: tuple[int, ...]
    h: float
    boundary: str


@dataclass(frozen=True)
class DomainGraph:
    """Connected weighted graph with a reference vertex.

    ``edges`` holds ``(i, j, w)`` triples with ``i < j``. Construction
    validates every invariant, so an instance is always usable.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    origin: int = 0
    lattice: LatticeMeta | None = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"vertex count must be a positive integer, got {self.n!r}")
        if not 0 <= self.origin < self.n:
            raise DomainError(f"origin {self.origin} out of range [0, {self.n})")
        seen = set()
        canon = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DomainError(f"edge ({i}, {j}) references a missing vertex")
            if i == j:
                raise DomainError(f"self-loop at vertex {i}")
            if not np.isfinite(w) or w <= 0:
                raise DomainError(f"nonpositive weight {w} on edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DomainError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(canon))
        if self.n > 1:
            ncomp, _ = csgraph.connected_components(self.adjacency(), directed=False)
            if ncomp != 1:
                raise DomainError(f"graph is disconnected ({ncomp} components)")
        if self.lattice is not None:
            expected = build_lattice(
                self.lattice.dims, self.lattice.h, self.lattice.boundary
            ).edges
            if sorted(expected) != sorted(canon):
                raise DomainError("edges do not match the declared lattice")

    @property
    def vertex_count(self) -> int:
        return self.n

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weight matrix W."""
        if not self.edges:
            return sp.csr_matrix((self.n, self.n))
        e = np.array(self.edges, dtype=float)
        i = e[:, 0].astype(int)
        j = e[:, 1].astype(int)
        w = e[:, 2]
        W = sp.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )
        return W.tocsr()

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def absorption(self) -> np.ndarray:
        """Diagonal sink from Dirichlet ghost neighbours (zero otherwise)."""
        out = np.zeros(self.n)
        lat = self.lattice
        if lat is None or lat.boundary != "dirichlet":
            return out
        coords = np.array(np.unravel_index(np.arange(self.n), lat.dims)).T
        w = 1.0 / lat.h**2
        for axis, size in enumerate(lat.dims):
            out[coords[:, axis] == 0] += w
            out[coords[:, axis] == size - 1] += w
        return out


@dataclass(frozen=True)
class LaplacianOperator:
    graph: DomainGraph
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def __matmul__(self, a):
        return self.matrix @ a


def laplacian(g: DomainGraph) -> LaplacianOperator:
    W = g.adjacency()
    diag = g.degrees() + g.absorption()
    L = (W - sp.diags(diag)).tocsr()
    L.sort_indices()
    return LaplacianOperator(g, L)


def build_lattice(
    dims: Sequence[int],
    spacing: float = 1.0,
    boundary: str = "neumann",
    origin: int | Sequence[int] = 0,
) -> DomainGraph:
    """Nearest-neighbour lattice with weights ``1/spacing**2``.

    Vertices are numbered in C order over ``dims``; ``origin`` may be a
    vertex id or a coordinate tuple.
    """
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DomainError("lattice needs at least one dimension")
    if boundary not in BOUNDARIES:
        raise DomainError(f"unknown boundary {boundary!r}")
    min_size = 3 if boundary == "periodic" else 2
    if any(d < min_size for d in dims):
        raise DomainError(f"{boundary} lattice needs every dim >= {min_size}, got {list(dims)}")
    if not np.isfinite(spacing) or spacing <= 0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    w = 1.0 / spacing**2
    n = int(np.prod(dims))
    edges = []
    for idx in itertools.product(*(range(d) for d in dims)):
        i = int(np.ravel_multi_index(idx, dims))
        for axis, size in enumerate(dims):
            nb = list(idx)
            if idx[axis] + 1 < size:
                nb[axis] += 1
            elif boundary == "periodic":
                nb[axis] = 0
            else:
                continue
            j = int(np.ravel_multi_index(nb, dims))
            edges.append((min(i, j), max(i, j), w))
    if not isinstance(origin, (int, np.integer)):
        origin = int(np.ravel_multi_index(tuple(origin), dims))
    meta = LatticeMeta(dims, float(spacing), boundary)
    # bypass the lattice cross-check: these edges are the definition
    g = DomainGraph(n, tuple(edges), int(origin))
    object.__setattr__(g, "lattice", meta)
    return g


def random_connected_graph(
    n: int,
    rng: np.random.Generator,
    extra_edge_prob: float = 0.1,
    weight_range: tuple[float, float] = (0.5, 2.0),
) -> DomainGraph:
    """Random spanning tree plus Erdos-Renyi extras, uniform weights."""
    if n < 1:
        raise DomainError("n must be positive")
    lo, hi = weight_range
    order = rng.permutation(n)
    keys = set()
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        keys.add((min(order[k], parent), max(order[k], parent)))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra_edge_prob:
                keys.add((i, j))
    keys = sorted((int(i), int(j)) for i, j in keys)
    weights = rng.uniform(lo, hi, size=len(keys))
    edges = tuple((i, j, float(w)) for (i, j), w in zip(keys, weights))
    return DomainGraph(n, edges, 0)


def path_graph(n: int, weight: float = 1.0, origin: int = 0) -> DomainGraph:
    return DomainGraph(n, tuple((i, i + 1, weight) for i in range(n - 1)), origin)


def apply_delta(op: LaplacianOperator, a) -> np.ndarray:
    a = check_field(op.graph, a)
    return op.matrix @ a


def hop_distance(g: DomainGraph, source: int | None = None) -> np.ndarray:
    """Unweighted shortest-path hop counts from ``source`` (default: origin)."""
    source = g.origin if source is None else int(source)
    if not 0 <= source < g.n:
        raise DomainError(f"vertex {source} out of range")
    d = csgraph.shortest_path(g.adjacency(), directed=False, unweighted=True, indices=source)
    return np.rint(d).astype(np.int64)


def ball_volume(g: DomainGraph, center: int | None = None, R: int = 0) -> int:
    if R < 0:
        raise DomainError("radius must be nonnegative")
    return int(np.count_nonzero(hop_distance(g, center) <= R))


def spectral_radius_bound(op: LaplacianOperator) -> float:
    """Gershgorin bound, equal to the induced infinity-norm of Delta."""
    return float(np.max(np.asarray(abs(op.matrix).sum(axis=1)).ravel()))


def check_field(g: DomainGraph, a, name: str = "field") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (g.n,):
        raise DomainError(f"{name} has shape {a.shape}, expected ({g.n},)")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class SpaceTimeField:
    """Samples ``values[vertex, k]`` at ``times[k]``, a uniform grid ending at 0."""

    values: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        t = np.asarray(self.times, dtype=float)
        if v.ndim != 2 or t.ndim != 1 or v.shape[1] != t.size:
            raise DomainError(f"values {v.shape} do not match {t.size} time samples")
        if not np.all(np.isfinite(v)):
            raise DomainError("space-time field has non-finite entries")
        if t.size < 1 or t[-1] != 0.0:
            raise DomainError("time grid must end at t = 0")
        if t.size > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise DomainError("time grid must be strictly increasing")
            if np.max(np.abs(dt - dt.mean())) > 1e-12 * abs(dt.mean()) * t.size:
                raise DomainError("time grid is not uniform")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "times", t)

    @property
    def dt(self) -> float:
        if self.times.size < 2:
            return 0.0
        return float((self.times[-1] - self.times[0]) / (self.times.size - 1))

    def scaled(self, c: float) -> "SpaceTimeField":
        return SpaceTimeField(self.values * c, self.times)


# ---------------------------------------------------------------- file i/o

def domain_to_dict(g: DomainGraph) -> dict:
    lat = None
    if g.lattice is not None:
        lat = {"dims": list(g.lattice.dims), "h": g.lattice.h, "boundary": g.lattice.boundary}
    return {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges], "origin": g.origin, "lattice": lat}


def domain_from_dict(doc: dict) -> DomainGraph:
    try:
        n = doc["n"]
        edges = doc["edges"]
        origin = doc.get("origin", 0)
        lat = doc.get("lattice")
    except (TypeError, KeyError) as exc:
        raise DomainError(f"domain JSON missing field {exc}") from None
    if not isinstance(n, int) or isinstance(n, bool):
        raise DomainError(f"field 'n' must be an integer, got {n!r}")
    for k, e in enumerate(edges):
        if not isinstance(e, (list, tuple)) or len(e) != 3:
            raise DomainError(f"edges[{k}] must be [i, j, w], got {e!r}")
    meta = None
    if lat is not None:
        try:
            meta = LatticeMeta(tuple(int(d) for d in lat["dims"]), float(lat["h"]), str(lat["boundary"]))
        except (TypeError, KeyError, ValueError) as exc:
            raise DomainError(f"malformed lattice block: {exc}") from None
        if meta.boundary not in BOUNDARIES:
            raise DomainError(f"lattice.boundary must be one of {BOUNDARIES}")
    return DomainGraph(n, tuple(tuple(e) for e in edges), origin, meta)


def load_domain(path) -> DomainGraph:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"parse error in {path}: {exc}") from None
    return domain_from_dict(doc)


def save_domain(g: DomainGraph, path) -> None:
    write_json(path, domain_to_dict(g))


def read_field_csv(path, g: DomainGraph | None = None) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["vertex", "value"]:
        raise DomainError(f"{path}: header must be 'vertex,value'")
    vals = []
    for k, row in enumerate(rows[1:]):
        try:
            v, x = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise DomainError(f"{path}: malformed row {k + 2}: {row!r}") from None
        if v != k:
            raise DomainError(f"{path}: vertex ids must be 0..n-1 in order (row {k + 2} has {v})")
        vals.append(x)
    a = np.array(vals, dtype=float)
    if g is not None:
        a = check_field(g, a, name=str(path))
    return a


def field_to_csv(a: Iterable[float]) -> str:
    lines = ["vertex,value"]
    lines += [f"{i},{fmt(x)}" for i, x in enumerate(a)]
    return "\n".join(lines) + "\n"


def write_field_csv(a, path) -> None:
    write_atomic(path, field_to_csv(a))


def spacetime_to_csv(u: SpaceTimeField) -> str:
    lines = ["vertex,t,value"]
    for i in range(u.values.shape[0]):
        for k, t in enumerate(u.times):
            lines.append(f"{i},{fmt(t)},{fmt(u.values[i, k])}")
    return "\n".join(lines) + "\n"


def read_spacetime_csv(path) -> SpaceTimeField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["vertex", "t", "value"]:
        raise DomainError(f"{path}: header must be 'vertex,t,value'")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    verts = np.unique(data[:, 0]).astype(int)
    times = np.unique(data[:, 1])
    vals = np.full((verts.size, times.size), np.nan)
    vals[data[:, 0].astype(int), np.searchsorted(times, data[:, 1])] = data[:, 2]
    return SpaceTimeField(vals, times)
