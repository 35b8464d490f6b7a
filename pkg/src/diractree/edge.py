"""Per-edge machinery: folded potential extensions, Goursat kernels, and the
interval solutions actuated from either end.

The solution driven from the x = 0 end is a superposition of image terms on
a half-line carrying the folded-out potential: even images at positions
2nl + x keep their components, odd images at 2nl - x flip the first
component. For the image terms to solve the same equation, p extends
even-periodically across every reflection point while q flips sign there
(reversing x and negating u1 conjugates the potential matrix to
(p, q) -> (p, -q); see EdgePotential.reversed).

The kernel W(x, t) of the representation solves the same Dirac system in
(x, t) with data prescribed on the characteristic t = x. In the
characteristic variables

    phi = w1 - i w2   (advances along t - x = const)
    psi = w1 + i w2   (advances along t + x = const)

the system reads

    (d_t + d_x) phi = (q + i p) psi
    (d_t - d_x) psi = (i p - q) phi

with psi(x, x) = i p(x) - q(x) on the diagonal and phi(0, t) = -psi(0, t)
at the actuated end (which pins w1(0, .) = 0 exactly). The march walks time
rows with a Heun predictor-corrector along characteristics.

Actuation from the x = l end is the x-reversed, component-flipped copy of
the same construction, run on the reversed potential; one code path serves
both directions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import Edge, EdgePotential
from .signals import Signal, add_scale, conv_regular, shift

__all__ = [
    "fold_extension",
    "GoursatKernel",
    "EdgeKernels",
    "compute_goursat_kernels",
    "trace_same_side",
    "trace_far_side",
    "boundary_trace",
    "EdgeField",
    "Ray",
    "forward_from_end",
]


def fold_extension(pot: EdgePotential, direction: str, nt: int) -> tuple[np.ndarray, np.ndarray]:
    """Fold the edge potential out to node indices 0..nt.

    p satisfies p(2nl +- x) = p(x); q satisfies q(2nl + x) = q(x) and
    q(2nl - x) = -q(x), so it jumps at reflection points unless it vanishes
    there. Nodes sitting exactly on a reflection point take the jump mean
    (zero for q). The minus direction folds the reversed potential.
    """
    if direction not in ("plus", "minus"):
        raise ValueError(f"unknown direction {direction!r}")
    base = pot if direction == "plus" else pot.reversed()
    L = base.n_cells
    p_ext = np.empty(nt + 1)
    q_ext = np.empty(nt + 1)
    m = np.arange(nt + 1)
    r = m % (2 * L)
    lo = r <= L
    p_ext[lo] = base.p[r[lo]]
    q_ext[lo] = base.q[r[lo]]
    p_ext[~lo] = base.p[2 * L - r[~lo]]
    q_ext[~lo] = -base.q[2 * L - r[~lo]]
    fold = (r % L == 0) & (m > 0)
    q_ext[fold] = 0.0
    return p_ext, q_ext


@dataclass
class GoursatKernel:
    """Kernel samples on the triangle 0 <= x <= t <= T, by rows of fixed x.

    Row arrays span the full time grid with zeros ahead of the onset t = x.
    `full` mode additionally retains every row for field evaluation.
    """

    dt: float
    nt: int
    rows_w1: dict[int, np.ndarray] = field(default_factory=dict)
    rows_w2: dict[int, np.ndarray] = field(default_factory=dict)
    full_w1: np.ndarray | None = None
    full_w2: np.ndarray | None = None

    def w1_row(self, pos_idx: int) -> np.ndarray:
        if pos_idx in self.rows_w1:
            return self.rows_w1[pos_idx]
        if self.full_w1 is not None:
            return self.full_w1[pos_idx]
        raise KeyError(f"kernel row {pos_idx} was not retained")

    def w2_row(self, pos_idx: int) -> np.ndarray:
        if pos_idx in self.rows_w2:
            return self.rows_w2[pos_idx]
        if self.full_w2 is not None:
            return self.full_w2[pos_idx]
        raise KeyError(f"kernel row {pos_idx} was not retained")

    def is_zero(self) -> bool:
        tol = 1e-15
        if self.full_w1 is not None:
            return bool(np.max(np.abs(self.full_w1)) < tol and np.max(np.abs(self.full_w2)) < tol)
        return all(np.max(np.abs(r)) < tol for r in self.rows_w1.values()) and all(
            np.max(np.abs(r)) < tol for r in self.rows_w2.values()
        )


def march_goursat(
    p_ext: np.ndarray,
    q_ext: np.ndarray,
    dt: float,
    nt: int,
    keep_rows: Iterable[int] | None,
    keep_full: bool,
) -> GoursatKernel:
    """March the characteristic system over the grid triangle."""
    cp = q_ext + 1j * p_ext          # source coefficient for phi
    cm = 1j * p_ext - q_ext          # source coefficient for psi; also diagonal data
    cmh = 0.5 * (cm[:-1] + cm[1:]) if nt > 0 else np.zeros(0, dtype=complex)

    kern = GoursatKernel(dt=dt, nt=nt)
    if keep_full:
        kern.full_w1 = np.zeros((nt + 1, nt + 1), dtype=complex)
        kern.full_w2 = np.zeros((nt + 1, nt + 1), dtype=complex)
    wanted = set(int(i) for i in keep_rows) if keep_rows is not None else set()
    for i in wanted:
        kern.rows_w1[i] = np.zeros(nt + 1, dtype=complex)
        kern.rows_w2[i] = np.zeros(nt + 1, dtype=complex)

    def stash(j: int, phi: np.ndarray, psi: np.ndarray):
        w1 = 0.5 * (phi + psi)
        w2 = -0.5j * (psi - phi)
        if keep_full:
            kern.full_w1[: j + 1, j] = w1
            kern.full_w2[: j + 1, j] = w2
        for i in wanted:
            if i <= j:
                kern.rows_w1[i][j] = w1[i]
                kern.rows_w2[i][j] = w2[i]

    psi = np.array([cm[0]], dtype=complex)
    phi = np.array([-cm[0]], dtype=complex)
    stash(0, phi, psi)

    for j in range(nt):
        psi_new = np.empty(j + 2, dtype=complex)
        phi_new = np.empty(j + 2, dtype=complex)

        # interior psi, corrected with Euler-predicted phi at the new points
        if j >= 1:
            phi_at_new = np.empty(j, dtype=complex)  # new-row indices 0..j-1
            if j >= 2:
                phi_at_new[1:] = phi[: j - 1] + dt * cp[: j - 1] * psi[: j - 1]
            phi_at_new[0] = -(psi[1] + dt * cm[1] * phi[1])
            psi_new[:j] = psi[1:] + 0.5 * dt * (
                cm[1 : j + 1] * phi[1:] + cm[:j] * phi_at_new
            )
        # entry just above the diagonal: characteristic from the half-node
        phi_mid = phi[j] + 0.5 * dt * cp[j] * psi[j]
        psi_new[j] = cmh[j] + 0.5 * dt * cmh[j] * phi_mid
        psi_new[j + 1] = cm[j + 1]

        # phi, corrected with the fresh psi at the new points
        phi_new[1 : j + 2] = phi + 0.5 * dt * (cp[: j + 1] * psi + cp[1 : j + 2] * psi_new[1:])
        phi_new[0] = -psi_new[0]

        phi, psi = phi_new, psi_new
        stash(j + 1, phi, psi)

    return kern


@dataclass(frozen=True)
class EdgeKernels:
    """Kernels for both actuation directions of one edge."""

    plus: GoursatKernel   # actuation at x = 0, potential (p, q)
    minus: GoursatKernel  # actuation at x = l, reversed potential (p(l-.), -q(l-.))
    length_idx: int

    def for_side(self, side: str) -> GoursatKernel:
        return self.plus if side == "head" else self.minus


def compute_goursat_kernels(
    edge: Edge,
    horizon: float,
    *,
    mode: str = "traces",
    extra_rows: Iterable[int] = (),
) -> EdgeKernels:
    """Kernels of one edge up to the horizon.

    mode "traces" keeps only the rows at integer multiples of the edge
    length (all the boundary-trace formulas need); "full" keeps the whole
    triangle for field evaluation.
    """
    dt = edge.length / edge.length_idx
    nt = int(round(horizon / dt))
    L = edge.length_idx
    if mode == "full":
        keep_rows, keep_full = None, True
    else:
        keep_rows = sorted(set(range(0, nt + 1, L)) | set(int(i) for i in extra_rows))
        keep_full = False

    kernels = []
    for direction in ("plus", "minus"):
        p_ext, q_ext = fold_extension(edge.potential, direction, nt)
        kernels.append(march_goursat(p_ext, q_ext, dt, nt, keep_rows, keep_full))
    return EdgeKernels(plus=kernels[0], minus=kernels[1], length_idx=L)


# -- boundary traces ---------------------------------------------------------
#
# Both primitives return the vertex-signed second component u^{2,+-}
# (u2 at x = 0, minus u2 at x = l), which is what the balance condition
# sums. The kernel argument is always the one for the actuated side:
# plus kernel for head actuation, minus kernel for tail actuation.


def _row_times_signal(row: np.ndarray, g: Signal, nt: int) -> Signal:
    """Convolution of a kernel row with a signal: int row(s) g(t - s) ds."""
    reg = conv_regular(row[: nt + 1], g.regular[: nt + 1], g.dt, nt)
    for idx, amp in g.atoms:
        if idx <= nt:
            reg[idx:] += amp * row[: nt + 1 - idx]
    return Signal(g.dt, (), reg)


def trace_same_side(kernel: GoursatKernel, length_idx: int, g: Signal, nt: int) -> Signal:
    """u^{2,+-} at the actuated end of the edge.

    The direct term i g(t) plus the zero-position kernel tail, then each
    round trip 2nl arrives doubled: the incoming reflection and the wave
    re-emitted to hold the boundary value coincide at the endpoint.
    """
    terms: list[tuple[complex, Signal]] = [(1j, g), (1.0, _row_times_signal(kernel.w2_row(0), g, nt))]
    n = 1
    while 2 * n * length_idx <= nt:
        y = 2 * n * length_idx
        terms.append((2j, shift(g.truncated(nt), y)))
        terms.append((2.0, _row_times_signal(kernel.w2_row(y), g, nt)))
        n += 1
    return add_scale([(c, s.truncated(nt)) for c, s in terms])


def trace_far_side(kernel: GoursatKernel, length_idx: int, g: Signal, nt: int) -> Signal:
    """u^{2,+-} at the non-actuated end (arrivals at odd multiples of l)."""
    terms: list[tuple[complex, Signal]] = []
    m = 0
    while (2 * m + 1) * length_idx <= nt:
        y = (2 * m + 1) * length_idx
        terms.append((-2j, shift(g.truncated(nt), y)))
        terms.append((-2.0, _row_times_signal(kernel.w2_row(y), g, nt)))
        m += 1
    if not terms:
        return Signal.zero(g.dt, nt)
    return add_scale([(c, s.truncated(nt)) for c, s in terms])


def boundary_trace(
    edge: Edge,
    actuated_side: str,
    observed_side: str,
    input_signal: Signal,
    horizon: float,
    kernels: EdgeKernels | None = None,
) -> Signal:
    """Raw u2 trace at the observed end for a single actuated interval.

    The far end of the edge is held at u1 = 0. Signs follow the vertex
    convention: u^{2,+-} is u2 at x = 0 and -u2 at x = l.
    """
    dt = input_signal.dt
    nt = int(round(horizon / dt))
    if kernels is None:
        kernels = compute_goursat_kernels(edge, horizon)
    k = kernels.for_side(actuated_side)
    if observed_side == actuated_side:
        signed = trace_same_side(k, edge.length_idx, input_signal, nt)
    else:
        signed = trace_far_side(k, edge.length_idx, input_signal, nt)
    sign = 1.0 if observed_side == "head" else -1.0
    return add_scale([(sign, signed)])


# -- full interval fields ----------------------------------------------------


@dataclass(frozen=True)
class Ray:
    """Delta contribution along a characteristic: atom at (x_i, origin + slope*i)."""

    origin_idx: int
    slope: int  # +1 or -1
    vec: tuple[complex, complex]


@dataclass
class EdgeField:
    """Space-time field on one edge: regular samples plus symbolic atom rays."""

    dt: float
    length_idx: int
    nt: int
    regular: np.ndarray  # complex, shape (2, L+1, nt+1)
    rays: list[Ray]

    def atoms_at(self, x_idx: int) -> list[tuple[int, complex, complex]]:
        """Collapsed (time_idx, u1_amp, u2_amp) atoms at one spatial node."""
        acc: dict[int, np.ndarray] = {}
        for ray in self.rays:
            t = ray.origin_idx + ray.slope * x_idx
            if 0 <= t <= self.nt:
                acc.setdefault(t, np.zeros(2, dtype=complex))
                acc[t] += np.asarray(ray.vec)
        out = []
        for t in sorted(acc):
            v = acc[t]
            if abs(v[0]) > 1e-14 or abs(v[1]) > 1e-14:
                out.append((t, complex(v[0]), complex(v[1])))
        return out

    def trace(self, x_idx: int) -> tuple[Signal, Signal]:
        """(u1, u2) traces at a spatial node, atoms included."""
        atoms = self.atoms_at(x_idx)
        u1 = Signal(self.dt, tuple((t, a1) for t, a1, _ in atoms), self.regular[0, x_idx].copy())
        u2 = Signal(self.dt, tuple((t, a2) for t, _, a2 in atoms), self.regular[1, x_idx].copy())
        return u1, u2


def _plus_field(kernel: GoursatKernel, L: int, g: Signal, nt: int, with_rays: bool) -> EdgeField:
    """Field on the edge for actuation at x = 0 (far end held at zero)."""
    if kernel.full_w1 is None:
        raise ValueError("field evaluation needs kernels computed with mode='full'")
    dt = g.dt
    reg = np.zeros((2, L + 1, nt + 1), dtype=complex)
    rays: list[Ray] = []

    g_reg = g.regular[: nt + 1]

    def add_kernel_term(x_idx: int, y: int, sign1: float):
        w1 = kernel.full_w1[y]
        w2 = kernel.full_w2[y]
        r1 = conv_regular(w1[: nt + 1], g_reg, dt, nt)
        r2 = conv_regular(w2[: nt + 1], g_reg, dt, nt)
        for idx, amp in g.atoms:
            if idx <= nt:
                r1[idx:] += amp * w1[: nt + 1 - idx]
                r2[idx:] += amp * w2[: nt + 1 - idx]
        reg[0, x_idx] += sign1 * r1
        reg[1, x_idx] += r2

    for x_idx in range(L + 1):
        n = 0
        while 2 * n * L + x_idx <= nt:
            y = 2 * n * L + x_idx
            shifted = g_reg[: nt + 1 - y]
            reg[0, x_idx, y:] += shifted
            reg[1, x_idx, y:] += 1j * shifted
            add_kernel_term(x_idx, y, 1.0)
            n += 1
        n = 1
        while 2 * n * L - x_idx <= nt:
            y = 2 * n * L - x_idx
            shifted = g_reg[: nt + 1 - y]
            reg[0, x_idx, y:] -= shifted
            reg[1, x_idx, y:] += 1j * shifted
            add_kernel_term(x_idx, y, -1.0)
            n += 1

    if with_rays:
        for idx, amp in g.atoms:
            n = 0
            while 2 * n * L + idx <= nt:
                rays.append(Ray(idx + 2 * n * L, +1, (amp, 1j * amp)))
                n += 1
            n = 1
            while 2 * n * L - L + idx <= nt:  # reaches the edge when origin - L <= nt
                rays.append(Ray(idx + 2 * n * L, -1, (-amp, 1j * amp)))
                n += 1
    return EdgeField(dt, L, nt, reg, rays)


def forward_from_end(
    edge: Edge,
    side: str,
    input_signal: Signal,
    horizon: float,
    kernels: EdgeKernels | None = None,
    with_rays: bool = True,
) -> EdgeField:
    """Solution field on one edge actuated from `side`, other end at u1 = 0.

    Tail actuation is the x-reversed, (u1 -> u1, u2 -> -u2)-flipped head
    actuation of the reversed potential; the remap below undoes the
    reversal, so a single field builder serves both directions.
    """
    dt = input_signal.dt
    nt = int(round(horizon / dt))
    if kernels is None:
        kernels = compute_goursat_kernels(edge, horizon, mode="full")
    L = edge.length_idx
    if side == "head":
        return _plus_field(kernels.plus, L, input_signal, nt, with_rays)
    if side != "tail":
        raise ValueError(f"unknown side {side!r}")

    base = _plus_field(kernels.minus, L, input_signal, nt, with_rays)
    reg = np.empty_like(base.regular)
    reg[0] = base.regular[0, ::-1]
    reg[1] = -base.regular[1, ::-1]
    rays = []
    for ray in base.rays:
        # atom at (L - x, origin + slope (L - x)) becomes, in x, an atom at
        # origin + slope L - slope x
        vec = (ray.vec[0], -ray.vec[1])
        rays.append(Ray(ray.origin_idx + ray.slope * L, -ray.slope, vec))
    return EdgeField(dt, L, nt, reg, rays)
