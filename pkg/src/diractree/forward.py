"""Forward solver on a whole tree.

At each internal vertex v the common first-component trace g_v satisfies a
Volterra equation of the second kind,

    i deg(v) g_v(t) + (K_v * g_v)(t) = G_v(t),

where K_v sums the zero-position kernel traces of the incident edges (each
taken for actuation at v's side) and G_v collects everything delayed: the
vertex's own round trips (delay 2 l_e) and the arrivals from neighbouring
vertices and boundary controls (delay l_e). All equations march jointly in
blocks of the shortest edge length, the largest step for which every
right-hand side only reads already-computed history.

The per-edge field is then the superposition of the two single-end interval
solutions driven by the endpoint traces, and the response matrix collects
the u2 traces at the non-root boundary vertices for unit impulse controls.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .edge import (
    EdgeField,
    EdgeKernels,
    compute_goursat_kernels,
    forward_from_end,
    trace_far_side,
    trace_same_side,
)
from .graph import Edge, MetricTree
from .signals import Signal, VolterraMarcher, add_scale

__all__ = [
    "BoundaryInput",
    "SolutionField",
    "ResponseMatrix",
    "tree_kernels",
    "assemble_interior_system",
    "solve_interior_traces",
    "forward_solve",
    "response_matrix",
    "kirchhoff_residual",
]


@dataclass(frozen=True)
class BoundaryInput:
    """Controls at non-root boundary vertices; missing leaves are zero."""

    signals: dict[str, Signal]

    @staticmethod
    def delta_at(tree: MetricTree, leaf: str, nt: int) -> "BoundaryInput":
        return BoundaryInput({leaf: Signal.delta(tree.dt, nt)})

    def at(self, tree: MetricTree, leaf: str, nt: int) -> Signal:
        sig = self.signals.get(leaf)
        return sig.truncated(nt) if sig is not None else Signal.zero(tree.dt, nt)


@dataclass
class SolutionField:
    """Per-edge space-time fields plus the interior vertex traces."""

    tree: MetricTree
    nt: int
    edges: dict[str, EdgeField]
    traces: dict[str, Signal]

    @property
    def dt(self) -> float:
        return self.tree.dt

    def regular_fields(self) -> dict[str, np.ndarray]:
        return {eid: f.regular for eid, f in self.edges.items()}

    def norm_history(self) -> np.ndarray:
        """Discrete L2 norm of the regular part at each time sample."""
        total = None
        for f in self.edges.values():
            n = np.sum(np.abs(f.regular) ** 2, axis=(0, 1)) * self.dt
            total = n if total is None else total + n
        return np.sqrt(total)


@dataclass
class ResponseMatrix:
    """u2 traces at non-root leaves for impulse controls, keyed (from, to)."""

    dt: float
    nt: int
    leaves: tuple[str, ...]
    entries: dict[tuple[str, str], Signal]

    def entry(self, from_leaf: str, to_leaf: str) -> Signal:
        return self.entries[(from_leaf, to_leaf)]


def tree_kernels(tree: MetricTree, horizon: float, mode: str = "traces") -> dict[str, EdgeKernels]:
    return {e.id: compute_goursat_kernels(e, horizon, mode=mode) for e in tree.edges}


@dataclass
class _DelayedTerm:
    src: str          # vertex whose trace feeds the term
    delay_idx: int
    atom_coeff: complex
    row: np.ndarray   # kernel row; zero ahead of its onset
    row_coeff: complex
    onset: int        # position index where the row starts


@dataclass
class InteriorSystem:
    tree: MetricTree
    nt: int
    vertices: list[str]
    coeff: dict[str, complex]
    kernel0: dict[str, np.ndarray]
    base_rhs: dict[str, Signal]
    terms: dict[str, list[_DelayedTerm]]
    block_idx: int


def assemble_interior_system(
    tree: MetricTree,
    binput: BoundaryInput,
    horizon: float,
    kernels: dict[str, EdgeKernels] | None = None,
) -> InteriorSystem:
    """Set up one Volterra problem per internal vertex.

    The leading coefficient is i deg(v); the self-kernel sums the
    zero-position w2 rows of incident edges. Boundary-control arrivals are
    folded into a precomputed base right-hand side; couplings to interior
    neighbours and the vertex's own reflections stay symbolic with their
    delays.
    """
    dt = tree.dt
    nt = int(round(horizon / dt))
    if kernels is None:
        kernels = tree_kernels(tree, horizon)

    internal = tree.internal_vertices()
    coeff = {}
    kernel0 = {}
    base_rhs = {}
    terms: dict[str, list[_DelayedTerm]] = {}

    for v in internal:
        inc = tree.incident(v)
        coeff[v] = 1j * len(inc)
        k0 = np.zeros(nt + 1, dtype=complex)
        base = Signal.zero(dt, nt)
        tl: list[_DelayedTerm] = []
        for e in inc:
            near_side = "head" if e.head == v else "tail"
            far_side_name = "tail" if near_side == "head" else "head"
            w = e.tail if near_side == "head" else e.head
            K_near = kernels[e.id].for_side(near_side)
            K_far = kernels[e.id].for_side(far_side_name)
            L = e.length_idx

            k0 += K_near.w2_row(0)[: nt + 1]

            n = 1
            while 2 * n * L <= nt:
                y = 2 * n * L
                tl.append(_DelayedTerm(v, y, -2j, K_near.w2_row(y), -2.0, y))
                n += 1

            if w in internal:
                m = 0
                while (2 * m + 1) * L <= nt:
                    y = (2 * m + 1) * L
                    tl.append(_DelayedTerm(w, y, 2j, K_far.w2_row(y), 2.0, y))
                    m += 1
            else:
                f = binput.at(tree, w, nt) if w != tree.root else Signal.zero(dt, nt)
                if f.atoms or np.any(f.regular):
                    contrib = trace_far_side(K_far, L, f, nt)
                    base = add_scale([(1.0, base), (-1.0, contrib)])
        kernel0[v] = k0
        base_rhs[v] = base
        terms[v] = tl

    block_idx = min((e.length_idx for e in tree.edges), default=nt + 1)
    return InteriorSystem(tree, nt, internal, coeff, kernel0, base_rhs, terms, block_idx)


def solve_interior_traces(
    tree: MetricTree,
    binput: BoundaryInput,
    horizon: float,
    kernels: dict[str, EdgeKernels] | None = None,
    system: InteriorSystem | None = None,
) -> dict[str, Signal]:
    """March all interior vertex equations jointly."""
    if system is None:
        system = assemble_interior_system(tree, binput, horizon, kernels)
    nt = system.nt
    dt = tree.dt
    if not system.vertices:
        return {}

    marchers = {
        v: VolterraMarcher(system.coeff[v], system.kernel0[v], dt, nt) for v in system.vertices
    }

    n0 = 0
    while n0 <= nt:
        n1 = min(n0 + system.block_idx, nt + 1)
        blocks = {}
        for v in system.vertices:
            base = system.base_rhs[v]
            atoms = [(i, a) for i, a in base.atoms if n0 <= i < n1]
            reg = base.regular[n0:n1].copy()
            for term in system.terms[v]:
                src = marchers[term.src]
                d = term.delay_idx
                y = term.onset
                for i, a in src.g_atoms:
                    j = i + d
                    if n0 <= j < n1:
                        atoms.append((j, term.atom_coeff * a))
                    start = max(i + y, n0)  # row tail of the atom begins at its onset
                    if start < n1:
                        reg[start - n0 :] += term.row_coeff * a * term.row[start - i : n1 - i]
                lo = max(n0 - d, 0)
                if lo < n1 - d:
                    reg[lo + d - n0 :] += term.atom_coeff * src.g[lo : n1 - d]
                if y < n1:
                    # trapezoid convolution of the row with the known regular
                    # prefix; identical values to conv_regular on full arrays,
                    # skipping the row's leading zeros
                    conv = np.convolve(term.row[y:n1], src.g[: n1 - y])[: n1 - y]
                    seg = np.zeros(n1 - n0, dtype=complex)
                    lo2 = max(y, n0)
                    seg[lo2 - n0 :] = conv[lo2 - y : n1 - y]
                    seg -= 0.5 * term.row[n0:n1] * src.g[0]
                    reg += term.row_coeff * dt * seg
            blocks[v] = (atoms, reg)
        for v in system.vertices:
            atoms, reg = blocks[v]
            marchers[v].advance(atoms, reg, n1)
        n0 = n1

    return {v: marchers[v].result() for v in system.vertices}


def _vertex_trace(tree: MetricTree, binput: BoundaryInput, traces: dict[str, Signal], v: str, nt: int) -> Signal:
    if v in traces:
        return traces[v]
    if v == tree.root:
        return Signal.zero(tree.dt, nt)
    return binput.at(tree, v, nt)


def forward_solve(
    tree: MetricTree,
    binput: BoundaryInput,
    horizon: float,
    kernels: dict[str, EdgeKernels] | None = None,
) -> SolutionField:
    """Full space-time solution by endpoint superposition on every edge."""
    dt = tree.dt
    nt = int(round(horizon / dt))
    if kernels is None:
        kernels = tree_kernels(tree, horizon, mode="full")
    trace_kernels = kernels
    traces = solve_interior_traces(tree, binput, horizon, trace_kernels)

    fields: dict[str, EdgeField] = {}
    for e in tree.edges:
        g_head = _vertex_trace(tree, binput, traces, e.head, nt)
        g_tail = _vertex_trace(tree, binput, traces, e.tail, nt)
        fh = forward_from_end(e, "head", g_head, horizon, kernels[e.id])
        ft = forward_from_end(e, "tail", g_tail, horizon, kernels[e.id])
        fields[e.id] = EdgeField(
            dt,
            e.length_idx,
            nt,
            fh.regular + ft.regular,
            fh.rays + ft.rays,
        )
    return SolutionField(tree, nt, fields, traces)


def _response_column(
    tree: MetricTree,
    k_leaf: str,
    horizon: float,
    kernels: dict[str, EdgeKernels],
) -> dict[tuple[str, str], Signal]:
    dt = tree.dt
    nt = int(round(horizon / dt))
    binput = BoundaryInput.delta_at(tree, k_leaf, nt)
    traces = solve_interior_traces(tree, binput, horizon, kernels)
    out = {}
    for j_leaf in tree.leaves():
        e = tree.leaf_edge(j_leaf)
        K = kernels[e.id]
        f_j = binput.at(tree, j_leaf, nt)
        g_tail = _vertex_trace(tree, binput, traces, e.tail, nt)
        same = trace_same_side(K.plus, e.length_idx, f_j, nt)
        far = trace_far_side(K.minus, e.length_idx, g_tail, nt)
        out[(k_leaf, j_leaf)] = add_scale([(1.0, same), (1.0, far)])
    return out


def response_matrix(
    tree: MetricTree,
    horizon: float,
    kernels: dict[str, EdgeKernels] | None = None,
    threads: int = 1,
) -> ResponseMatrix:
    """Impulse responses u2(leaf_j) for a unit delta control at each leaf_k."""
    dt = tree.dt
    nt = int(round(horizon / dt))
    if kernels is None:
        kernels = tree_kernels(tree, horizon)
    leaves = tree.leaves()
    entries: dict[tuple[str, str], Signal] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for col in pool.map(
                lambda k: _response_column(tree, k, horizon, kernels), leaves
            ):
                entries.update(col)
    else:
        for k_leaf in leaves:
            entries.update(_response_column(tree, k_leaf, horizon, kernels))
    return ResponseMatrix(dt, nt, leaves, entries)


def kirchhoff_residual(field: SolutionField, tree: MetricTree) -> float:
    """Worst violation of vertex continuity and balance over the field.

    Regular parts are compared sample-wise; atoms are compared by amplitude
    at matching times.
    """
    worst = 0.0
    nt = field.nt
    for v in tree.internal_vertices():
        u1_traces = []
        signed_u2 = []
        for e in tree.incident(v):
            x_idx = 0 if e.head == v else e.length_idx
            sign = 1.0 if e.head == v else -1.0
            u1, u2 = field.edges[e.id].trace(x_idx)
            u1_traces.append(u1)
            signed_u2.append((sign, u2))

        ref = u1_traces[0]
        for other in u1_traces[1:]:
            worst = max(worst, float(np.max(np.abs(other.regular - ref.regular))))
            keys = set(ref.atom_dict()) | set(other.atom_dict())
            for i in keys:
                worst = max(
                    worst,
                    abs(ref.atom_dict().get(i, 0.0) - other.atom_dict().get(i, 0.0)),
                )
        bal = add_scale([(s, u2) for s, u2 in signed_u2])
        worst = max(worst, float(np.max(np.abs(bal.regular))))
        for _, amp in bal.atoms:
            worst = max(worst, abs(amp))
    return worst
