"""Finite metric rooted tree graphs.

A tree is a set of edges with positive lengths joined at vertices. One
boundary (degree-1) vertex is the root. Every edge is identified with an
interval [0, l]; the endpoint farther from the root is x = 0 ("head"), the
closer one is x = l ("tail"). Each edge carries a real matrix potential
described by two sample arrays p, q on the edge grid {0, dt, ..., l}.

All lengths are integer multiples of the grid step dt, so travel times of
wavefronts land exactly on grid indices. Internal vertices must have degree
at least 3: a degree-2 joint scatters nothing and is invisible to boundary
data, so it is rejected up front.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "TreeValidationError",
    "EdgePotential",
    "Edge",
    "MetricTree",
    "validate_tree",
    "walk_spectrum",
]


class TreeValidationError(ValueError):
    """Raised when a raw graph description violates the tree model."""


@dataclass(frozen=True)
class EdgePotential:
    """Samples of the potential entries (p, q) on an edge grid of n+1 nodes.

    The sampled values are read as a piecewise-linear interpolant; `at`
    evaluates it at arbitrary positions (used for half-grid points).
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if p.shape != q.shape or p.ndim != 1:
            raise TreeValidationError("p and q must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise TreeValidationError("potential samples must be finite")

    @property
    def n_cells(self) -> int:
        return len(self.p) - 1

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.p) <= tol) and np.all(np.abs(self.q) <= tol))

    def reversed(self) -> "EdgePotential":
        """Potential of the same physical edge parametrized from the other end.

        Reversing the coordinate with the component flip that restores the
        system's form sends (p, q)(x) -> (p(l-x), -q(l-x)).
        """
        return EdgePotential(self.p[::-1].copy(), -self.q[::-1].copy())

    def at(self, pos: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Piecewise-linear values of (p, q) at positions `pos` (same units as dt)."""
        xi = np.clip(np.asarray(pos, dtype=float) / dt, 0.0, self.n_cells)
        i0 = np.minimum(xi.astype(int), self.n_cells - 1) if self.n_cells > 0 else np.zeros_like(xi, dtype=int)
        w = xi - i0
        return (self.p[i0] * (1 - w) + self.p[i0 + 1] * w,
                self.q[i0] * (1 - w) + self.q[i0 + 1] * w) if self.n_cells > 0 else (self.p[0] + 0 * w, self.q[0] + 0 * w)

    @staticmethod
    def constant(p: float, q: float, n_cells: int) -> "EdgePotential":
        return EdgePotential(np.full(n_cells + 1, float(p)), np.full(n_cells + 1, float(q)))

    @staticmethod
    def zero(n_cells: int) -> "EdgePotential":
        return EdgePotential.constant(0.0, 0.0, n_cells)


@dataclass(frozen=True)
class Edge:
    """One oriented edge: head is the x = 0 end (farther from the root)."""

    id: str
    head: str
    tail: str
    length: float
    length_idx: int
    potential: EdgePotential


@dataclass(frozen=True)
class MetricTree:
    """Validated rooted metric tree. Immutable; operations on it are pure."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str
    boundary: tuple[str, ...]  # non-root leaves in input order, root last
    dt: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in (e.head, e.tail))

    def incident(self, v: str) -> list[Edge]:
        return [e for e in self.edges if v in (e.head, e.tail)]

    def internal_vertices(self) -> list[str]:
        return [v for v in self.vertices if v not in self.boundary]

    def leaves(self) -> tuple[str, ...]:
        """Non-root boundary vertices, in response-matrix order."""
        return self.boundary[:-1]

    def edge_by_id(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def leaf_edge(self, leaf: str) -> Edge:
        (e,) = self.incident(leaf)
        return e

    def dist_idx(self, a: str, b: str) -> int:
        """Graph distance between two vertices, in grid steps."""
        adj: dict[str, list[tuple[str, int]]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.head].append((e.tail, e.length_idx))
            adj[e.tail].append((e.head, e.length_idx))
        dist = {a: 0}
        stack = [a]
        while stack:
            u = stack.pop()
            for w, step in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + step
                    stack.append(w)
        return dist[b]

    def depth_idx(self) -> int:
        """Largest leaf-to-root distance, in grid steps."""
        return max(self.dist_idx(leaf, self.root) for leaf in self.leaves())


def _snap(length: float, dt: float) -> tuple[int, bool]:
    n = int(round(length / dt))
    return n, abs(n * dt - length) > 1e-12 * max(1.0, abs(length))


def validate_tree(
    edges: Sequence[tuple[str, str, float]],
    root: str,
    dt: float,
    potentials: Sequence[EdgePotential | None] | None = None,
    edge_ids: Sequence[str] | None = None,
) -> MetricTree:
    """Validate a raw description and return an oriented MetricTree.

    `edges` lists (endpoint, endpoint, length) in arbitrary orientation; the
    head/tail assignment is derived from root distances. Lengths that miss
    the grid are snapped to the nearest multiple of dt with a warning.
    Potentials default to zero; sample counts must match the snapped length.
    """
    if dt <= 0:
        raise TreeValidationError("grid step must be positive")
    warnings: list[str] = []

    vertices: list[str] = []
    for a, b, _ in edges:
        for v in (a, b):
            if v not in vertices:
                vertices.append(v)
    if root not in vertices:
        raise TreeValidationError(f"root vertex {root!r} not present in edge list")
    if len(edges) != len(vertices) - 1:
        raise TreeValidationError(
            f"cycle detected: {len(edges)} edges over {len(vertices)} vertices"
        )

    lengths_idx = []
    for a, b, length in edges:
        if length <= 0:
            raise TreeValidationError(f"non-positive length on edge ({a}, {b})")
        n, snapped = _snap(length, dt)
        if n == 0:
            raise TreeValidationError(f"edge ({a}, {b}) shorter than the grid step")
        if snapped:
            warnings.append(f"length of edge ({a}, {b}) snapped to {n * dt:.12g}")
        lengths_idx.append(n)

    # Root distances via BFS; also detects disconnected components.
    adj: dict[str, list[tuple[int, str]]] = {v: [] for v in vertices}
    for i, (a, b, _) in enumerate(edges):
        adj[a].append((i, b))
        adj[b].append((i, a))
    dist: dict[str, int] = {root: 0}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for i, w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + lengths_idx[i]
                queue.append(w)
    if len(dist) != len(vertices):
        missing = sorted(set(vertices) - set(dist))
        raise TreeValidationError(f"disconnected: no path from root to {missing}")

    degrees = {v: len(adj[v]) for v in vertices}
    if degrees[root] != 1:
        raise TreeValidationError(f"root must have degree 1, got {degrees[root]}")
    for v in vertices:
        if degrees[v] == 2:
            raise TreeValidationError(
                f"internal vertex {v!r} has degree 2; joints must have degree >= 3"
            )

    if potentials is None:
        potentials = [None] * len(edges)
    if edge_ids is None:
        edge_ids = [f"e{i + 1}" for i in range(len(edges))]
    if len(set(edge_ids)) != len(edges):
        raise TreeValidationError("edge ids must be unique")

    oriented: list[Edge] = []
    for i, (a, b, _) in enumerate(edges):
        n = lengths_idx[i]
        head, tail = (a, b) if dist[a] > dist[b] else (b, a)
        if dist[head] != dist[tail] + n:
            raise TreeValidationError(
                f"edge ({a}, {b}) is not oriented by root distance; graph is inconsistent"
            )
        pot = potentials[i] if potentials[i] is not None else EdgePotential.zero(n)
        if pot.n_cells != n:
            raise TreeValidationError(
                f"edge ({a}, {b}): potential has {pot.n_cells + 1} samples, expected {n + 1}"
            )
        oriented.append(Edge(edge_ids[i], head, tail, n * dt, n, pot))

    leaves = [v for v in vertices if degrees[v] == 1 and v != root]
    return MetricTree(
        vertices=tuple(vertices),
        edges=tuple(oriented),
        root=root,
        boundary=tuple(leaves) + (root,),
        dt=dt,
        warnings=tuple(warnings),
    )


def walk_spectrum(tree: MetricTree, a: str, b: str, horizon: float) -> list[int]:
    """Distinct lengths (grid indices) of walks from a to b, 0 < length <= horizon.

    A walk may turn back at any vertex, including boundary vertices and the
    endpoints themselves. Breadth-first enumeration over (vertex, length)
    states; exact because all lengths are grid integers. The zero-length
    trivial walk is excluded.
    """
    if a not in tree.vertices or b not in tree.vertices:
        raise TreeValidationError("walk endpoints must be tree vertices")
    if horizon <= 0:
        raise TreeValidationError("horizon must be positive")
    hmax = int(np.floor(horizon / tree.dt + 1e-9))

    adj: dict[str, list[tuple[str, int]]] = {v: [] for v in tree.vertices}
    for e in tree.edges:
        adj[e.head].append((e.tail, e.length_idx))
        adj[e.tail].append((e.head, e.length_idx))

    seen = {(a, 0)}
    frontier = [(a, 0)]
    out = set()
    while frontier:
        nxt = []
        for v, t in frontier:
            for w, step in adj[v]:
                t2 = t + step
                if t2 > hmax or (w, t2) in seen:
                    continue
                seen.add((w, t2))
                nxt.append((w, t2))
                if w == b:
                    out.add(t2)
        frontier = nxt
    return sorted(out)
