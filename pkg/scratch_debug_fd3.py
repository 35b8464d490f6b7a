"""Scratch: localize rep-vs-FD discrepancy on the free interval."""
import numpy as np

from diractree.graph import validate_tree
from diractree.edge import compute_goursat_kernels, forward_from_end
from diractree.oracle import fd_solve, raised_cosine_bump, raised_cosine_callable

dt = 1.0 / 256
T = 2.5
tree = validate_tree([("a", "r", 1.0)], root="r", dt=dt)
edge = tree.edges[0]
nt = int(round(T / dt))
bump = raised_cosine_bump(dt, nt, 8)

fd = fd_solve(tree, {"a": raised_cosine_callable(dt, 8)}, T, substeps=4)
kern = compute_goursat_kernels(edge, T, mode="full")
rep = forward_from_end(edge, "head", bump, T, kernels=kern)

D = np.abs(rep.regular - fd.fields["e1"])  # (2, L+1, nt+1)
err_t = np.sqrt((D ** 2).sum(axis=(0, 1)))
ref_t = np.sqrt((np.abs(fd.fields["e1"]) ** 2).sum(axis=(0, 1)))
for n in range(0, nt + 1, 64):
    print(f"t={n * dt:5.2f}  errnorm={err_t[n]:9.3f}  refnorm={ref_t[n]:9.3f}")
# where is the max?
comp, xi, ti = np.unravel_index(np.argmax(D), D.shape)
print("max diff", D[comp, xi, ti], "at comp", comp, "x", xi * dt, "t", ti * dt)
print("rep:", rep.regular[comp, xi, ti], "fd:", fd.fields["e1"][comp, xi, ti])
