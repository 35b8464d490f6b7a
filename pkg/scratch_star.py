"""Scratch: tree forward solver on stars — atoms, FD cross-check, Kirchhoff."""
import numpy as np

from diractree.graph import EdgePotential, validate_tree
from diractree.forward import (
    BoundaryInput,
    forward_solve,
    kirchhoff_residual,
    response_matrix,
    solve_interior_traces,
    tree_kernels,
)
from diractree.oracle import fd_solve, l2_compare, raised_cosine_callable, raised_cosine_bump

dt = 1.0 / 64

# ---- Q=0 equal 3-star: g first atom 2/N at t=l ----
tree = validate_tree(
    [("g1", "c", 1.0), ("g2", "c", 1.0), ("c", "r", 1.0)], root="r", dt=dt
)
nt = int(round(4.0 / dt))
traces = solve_interior_traces(tree, BoundaryInput.delta_at(tree, "g1", nt), 4.0)
g = traces["c"]
print("g atoms (t, amp):", [(i * dt, a) for i, a in g.atoms])
print("g regular max:", np.max(np.abs(g.regular)))

# ---- response diagonal atoms for N in {3,4,5}, Q=0 ----
for N in (3, 4, 5):
    edges = [(f"g{k}", "c", 1.0) for k in range(1, N)] + [("c", "r", 1.0)]
    t = validate_tree(edges, root="r", dt=dt)
    R = response_matrix(t, 4.0)
    e11 = R.entry("g1", "g1")
    print(f"N={N} R11 atoms:", [(i * dt, np.round(a, 12)) for i, a in e11.atoms])
    print(f"     reg max: {np.max(np.abs(e11.regular)):.2e}")
    e12 = R.entry("g1", "g2")
    print(f"     R12 atoms:", [(i * dt, np.round(a, 12)) for i, a in e12.atoms])

# ---- FD cross-validation on a 3-star with constant potentials ----
dt = 1.0 / 256
lengths = (0.75, 1.0, 0.5)
pots = [
    EdgePotential.constant(0.3, -0.2, int(round(lengths[0] / dt))),
    EdgePotential.constant(-0.1, 0.4, int(round(lengths[1] / dt))),
    EdgePotential.constant(0.2, 0.3, int(round(lengths[2] / dt))),
]
tree = validate_tree(
    [("g1", "c", lengths[0]), ("g2", "c", lengths[1]), ("c", "r", lengths[2])],
    root="r",
    dt=dt,
    potentials=pots,
)
T = 4.0
nt = int(round(T / dt))
bump = raised_cosine_bump(dt, nt, 8)
binput = BoundaryInput({"g1": bump})
field = forward_solve(tree, binput, T, kernels=tree_kernels(tree, T, mode="full"))
fd = fd_solve(tree, {"g1": raised_cosine_callable(dt, 8)}, T, substeps=4)
err = l2_compare(field.regular_fields(), fd.fields, dt)
res = kirchhoff_residual(field, tree)
print(f"3-star FD relerr: {err:.4f}   kirchhoff residual: {res:.2e}")
print(f"fd drift: {fd.norm_drift(int(0.5 / dt)):.2e}")
