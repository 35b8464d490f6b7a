"""Time signals split into an exact finite delta train and a gridded regular part.

Every trace this library produces has the form

    f(t) = sum_j amp_j * delta(t - tau_j) + f_reg(t)

where the atom times tau_j are exact integer grid indices and f_reg is a
piecewise-continuous function sampled on {0, dt, ..., T}. Keeping the two
parts separate makes impulse propagation exact: delta amplitudes never pass
through quadrature, and the inverse algorithms can match atom times by
integer equality.

Quadrature is the trapezoidal rule throughout, so that forward simulation,
the Volterra marching solver, and the reconstruction steps share one
discrete convolution and round trips are not limited by scheme mismatch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridMismatchError",
    "Signal",
    "convolve",
    "add_scale",
    "shift",
    "solve_volterra_second_kind",
    "volterra_apply",
    "extract_atoms",
    "first_atom",
]

ATOM_MERGE_TOL = 1e-14


class GridMismatchError(ValueError):
    """Operands live on different grids (dt mismatch or bad shift)."""


def _normalize_atoms(atoms, nt: int) -> tuple[tuple[int, complex], ...]:
    merged: dict[int, complex] = {}
    for idx, amp in atoms:
        i = int(idx)
        if i < 0 or i > nt:
            continue
        merged[i] = merged.get(i, 0.0) + complex(amp)
    return tuple(
        (i, merged[i]) for i in sorted(merged) if abs(merged[i]) > ATOM_MERGE_TOL
    )


@dataclass(frozen=True)
class Signal:
    """Immutable delta train + regular samples on {0, dt, ..., nt*dt}."""

    dt: float
    atoms: tuple[tuple[int, complex], ...]
    regular: np.ndarray

    def __post_init__(self):
        reg = np.asarray(self.regular, dtype=complex)
        object.__setattr__(self, "regular", reg)
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms, len(reg) - 1))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(dt: float, nt: int) -> "Signal":
        return Signal(dt, (), np.zeros(nt + 1, dtype=complex))

    @staticmethod
    def delta(dt: float, nt: int, time_idx: int = 0, amp: complex = 1.0) -> "Signal":
        return Signal(dt, ((time_idx, amp),), np.zeros(nt + 1, dtype=complex))

    @staticmethod
    def from_samples(dt: float, samples: np.ndarray) -> "Signal":
        return Signal(dt, (), np.asarray(samples, dtype=complex))

    # -- basic properties --------------------------------------------------

    @property
    def nt(self) -> int:
        return len(self.regular) - 1

    @property
    def horizon(self) -> float:
        return self.nt * self.dt

    def is_regular_only(self) -> bool:
        return not self.atoms

    def atom_dict(self) -> dict[int, complex]:
        return dict(self.atoms)

    def truncated(self, nt: int) -> "Signal":
        if nt >= self.nt:
            return self
        return Signal(self.dt, self.atoms, self.regular[: nt + 1].copy())

    def sample_dense(self) -> np.ndarray:
        """Regular samples with each atom folded in as a unit-cell spike amp/dt."""
        out = self.regular.copy()
        for idx, amp in self.atoms:
            out[idx] += amp / self.dt
        return out

    def regular_norm(self) -> float:
        return float(np.sqrt(self.dt * np.sum(np.abs(self.regular) ** 2)))


def _check_grid(*sigs: Signal):
    dt = sigs[0].dt
    for s in sigs[1:]:
        if abs(s.dt - dt) > 1e-15 * max(dt, s.dt):
            raise GridMismatchError(f"dt mismatch: {dt} vs {s.dt}")


def conv_regular(a: np.ndarray, b: np.ndarray, dt: float, nt_out: int) -> np.ndarray:
    """Trapezoidal causal convolution of sample arrays, truncated to nt_out."""
    full = np.convolve(a, b)[: nt_out + 1]
    n = len(full)
    corr = np.zeros(n, dtype=complex)
    na, nb = len(a), len(b)
    idx = np.arange(n)
    mb = idx < nb
    corr[mb] += a[0] * b[idx[mb]]
    ma = idx < na
    corr[ma] += a[idx[ma]] * b[0]
    out = dt * (full - 0.5 * corr)
    if n < nt_out + 1:
        out = np.concatenate([out, np.zeros(nt_out + 1 - n, dtype=complex)])
    return out


def convolve(a: Signal, b: Signal) -> Signal:
    """(a * b)(t) = int_0^t a(s) b(t-s) ds, truncated to the shorter horizon."""
    _check_grid(a, b)
    nt = min(a.nt, b.nt)
    atoms: list[tuple[int, complex]] = []
    reg = np.zeros(nt + 1, dtype=complex)

    for ia, aa in a.atoms:
        for ib, ab in b.atoms:
            if ia + ib <= nt:
                atoms.append((ia + ib, aa * ab))
    for ia, aa in a.atoms:
        if ia <= nt:
            reg[ia:] += aa * b.regular[: nt + 1 - ia]
    for ib, ab in b.atoms:
        if ib <= nt:
            reg[ib:] += ab * a.regular[: nt + 1 - ib]
    reg += conv_regular(a.regular, b.regular, a.dt, nt)
    return Signal(a.dt, tuple(atoms), reg)


def add_scale(terms: Sequence[tuple[complex, Signal]]) -> Signal:
    """Pointwise linear combination; result on the shortest horizon."""
    if not terms:
        raise ValueError("add_scale needs at least one term")
    _check_grid(*[s for _, s in terms])
    nt = min(s.nt for _, s in terms)
    reg = np.zeros(nt + 1, dtype=complex)
    atoms: list[tuple[int, complex]] = []
    for coeff, s in terms:
        reg += coeff * s.regular[: nt + 1]
        atoms.extend((i, coeff * amp) for i, amp in s.atoms if i <= nt)
    return Signal(terms[0][1].dt, tuple(atoms), reg)


def shift(a: Signal, tau_idx: int) -> Signal:
    """Delay by tau_idx grid steps, zero-filling [0, tau)."""
    if tau_idx < 0:
        raise GridMismatchError("shift must be by a non-negative grid multiple")
    if tau_idx == 0:
        return a
    reg = np.zeros(a.nt + 1, dtype=complex)
    if tau_idx <= a.nt:
        reg[tau_idx:] = a.regular[: a.nt + 1 - tau_idx]
    atoms = tuple((i + tau_idx, amp) for i, amp in a.atoms if i + tau_idx <= a.nt)
    return Signal(a.dt, atoms, reg)


def first_atom(a: Signal) -> tuple[float, complex] | None:
    """Earliest atom as (time, amplitude), or None for a regular-only signal."""
    if not a.atoms:
        return None
    idx, amp = a.atoms[0]
    return idx * a.dt, amp


def extract_atoms(samples, dt: float, threshold: float = 1e-6) -> Signal:
    """Split raw dense samples into isolated spikes (atoms) and a regular rest.

    A sample is a spike when it exceeds threshold/dt against the local
    background interpolated from its neighbours; the atom amplitude is the
    excess times dt. Signals already carrying exact atoms pass through.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if isinstance(samples, Signal):
        return samples
    x = np.asarray(samples, dtype=complex)
    nt = len(x) - 1
    reg = x.copy()
    atoms: list[tuple[int, complex]] = []
    cut = threshold / dt
    for n in range(nt + 1):
        left = x[n - 1] if n > 0 else 0.0
        right = x[n + 1] if n < nt else 0.0
        background = 0.5 * (left + right)
        excess = x[n] - background
        if abs(excess) > cut and abs(left) < cut and abs(right) < cut or (
            abs(excess) > cut and abs(x[n]) > 4 * max(abs(left), abs(right), cut)
        ):
            atoms.append((n, excess * dt))
            reg[n] = background
    return Signal(dt, tuple(atoms), reg)


# -- Volterra equations of the second kind ---------------------------------

RhsBlock = Callable[[int, int, np.ndarray, tuple], tuple[Sequence[tuple[int, complex]], np.ndarray]]


def volterra_apply(c: complex, kernel: Signal, g: Signal) -> Signal:
    """Left-hand side c*g + kernel*g, for residual checks."""
    return add_scale([(c, g), (1.0, convolve(kernel, g))])


class VolterraMarcher:
    """Incremental state of one marching Volterra solve.

    Blocks of the right-hand side are fed in time order through `advance`;
    the discrete update matches `convolve` (trapezoid plus exact atoms), so
    applying the left-hand side to the finished solution reproduces the
    right-hand side to rounding.
    """

    def __init__(self, c: complex, kernel_samples: np.ndarray, dt: float, nt: int):
        if c == 0:
            raise ValueError("leading coefficient must be nonzero")
        self.c = complex(c)
        self.dt = dt
        self.nt = nt
        k = np.asarray(kernel_samples, dtype=complex)
        if len(k) < nt + 1:
            k = np.concatenate([k, np.zeros(nt + 1 - len(k), dtype=complex)])
        self.k = k
        self.g = np.zeros(nt + 1, dtype=complex)
        self.g_atoms: list[tuple[int, complex]] = []
        self._hist = np.zeros(nt + 1, dtype=complex)   # kernel x finished g blocks, j >= 1
        self._tails = np.zeros(nt + 1, dtype=complex)  # kernel x atom part of g
        self._diag = self.c + 0.5 * dt * k[0]
        self.cursor = 0

    def advance(self, blk_atoms: Sequence[tuple[int, complex]], blk_reg: np.ndarray, n1: int):
        n0 = self.cursor
        if n1 <= n0:
            return
        k, g, dt = self.k, self.g, self.dt
        blk_reg = np.asarray(blk_reg, dtype=complex)

        for i, amp in blk_atoms:
            ga = complex(amp) / self.c
            self.g_atoms.append((int(i), ga))
            self._tails[i:] += ga * k[: self.nt + 1 - i]

        off = max(n0, 1)  # j = 0 carries half weight, kept out of hist
        for n in range(n0, n1):
            if n == 0:
                g[0] = (blk_reg[0] - self._tails[0]) / self.c
                continue
            mid = self._hist[n]
            if n > off:
                mid += np.dot(k[1 : n - off + 1][::-1], g[off:n])
            g[n] = (blk_reg[n - n0] - self._tails[n] - dt * (mid + 0.5 * k[n] * g[0])) / self._diag

        if n1 > off:
            upd = np.convolve(k[: self.nt + 1 - off], g[off:n1])
            m = self.nt + 1 - n1
            if m > 0:
                self._hist[n1:] += upd[n1 - off : n1 - off + m]
        self.cursor = n1

    def result(self) -> Signal:
        return Signal(self.dt, tuple(self.g_atoms), self.g.copy())


def solve_volterra_second_kind(
    c: complex,
    kernel: Signal,
    rhs: Signal | RhsBlock,
    *,
    nt: int | None = None,
    delay_idx: int = 0,
    block: int = 128,
) -> Signal:
    """March g through c*g(t) + int_0^t k(s) g(t-s) ds = G(t).

    Atoms of G become atoms of g with amplitude divided by c; their
    convolution tails move into the regular right-hand side. The regular
    part advances by trapezoidal marching, consistent with `convolve`.

    `rhs` is either a Signal, or a callback rhs(n0, n1, g_reg, g_atoms)
    returning (atoms, regular_samples) for grid indices [n0, n1). The
    callback form serves self-referencing right-hand sides whose dependence
    on g is delayed by at least delay_idx steps; it may read g_reg only
    below index n0. Blocks never exceed the delay.
    """
    if not kernel.is_regular_only():
        raise ValueError("kernel must be regular-only")
    is_sig = isinstance(rhs, Signal)
    if is_sig:
        _check_grid(kernel, rhs)
        if nt is None:
            nt = min(kernel.nt, rhs.nt)
    elif nt is None:
        raise ValueError("nt is required with a callback right-hand side")
    if delay_idx < 0 or delay_idx != int(delay_idx):
        raise ValueError("delay must be a non-negative grid multiple")

    step = min(block, nt + 1)
    if not is_sig and delay_idx > 0:
        step = min(step, delay_idx)
    step = max(step, 1)

    m = VolterraMarcher(c, kernel.regular, kernel.dt, nt)
    n0 = 0
    while n0 <= nt:
        n1 = min(n0 + step, nt + 1)
        if is_sig:
            blk_atoms = [(i, a) for i, a in rhs.atoms if n0 <= i < n1]
            blk_reg = rhs.regular[n0:n1]
        else:
            blk_atoms, blk_reg = rhs(n0, n1, m.g, tuple(m.g_atoms))
        m.advance(blk_atoms, blk_reg, n1)
        n0 = n1
    return m.result()
