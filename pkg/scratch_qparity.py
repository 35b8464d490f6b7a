"""Scratch: discriminate odd-q vs even-q fold extension against the FD oracle."""
import numpy as np

import diractree.edge as edge_mod
from diractree.graph import EdgePotential, validate_tree
from diractree.edge import compute_goursat_kernels, forward_from_end
from diractree.oracle import fd_solve, l2_compare, raised_cosine_bump, raised_cosine_callable

dt = 1.0 / 256
T = 6.0
n = int(round(1.0 / dt))
pot = EdgePotential.constant(0.2, 0.5, n)
tree = validate_tree([("a", "r", 1.0)], root="r", dt=dt, potentials=[pot])
e = tree.edges[0]
nt = int(round(T / dt))
bump = raised_cosine_bump(dt, nt, 8)
fd = fd_solve(tree, {"a": raised_cosine_callable(dt, 8)}, T, substeps=4)

orig_fold = edge_mod.fold_extension

kern = compute_goursat_kernels(e, T, mode="full")
rep = forward_from_end(e, "head", bump, T, kernels=kern)
print("odd-q extension :", l2_compare({e.id: rep.regular}, fd.fields, dt))


def even_fold(pot, direction, nt_):
    base = pot if direction == "plus" else EdgePotential(pot.p[::-1].copy(), -pot.q[::-1].copy())
    L = base.n_cells
    m = np.arange(nt_ + 1)
    r = m % (2 * L)
    lo = r <= L
    p_ext = np.empty(nt_ + 1)
    q_ext = np.empty(nt_ + 1)
    p_ext[lo] = base.p[r[lo]]
    q_ext[lo] = base.q[r[lo]]
    p_ext[~lo] = base.p[2 * L - r[~lo]]
    q_ext[~lo] = base.q[2 * L - r[~lo]]  # even extension for q as well
    return p_ext, q_ext


edge_mod.fold_extension = even_fold
kern2 = compute_goursat_kernels(e, T, mode="full")
rep2 = forward_from_end(e, "head", bump, T, kernels=kern2)
print("even-q extension:", l2_compare({e.id: rep2.regular}, fd.fields, dt))
edge_mod.fold_extension = orig_fold
