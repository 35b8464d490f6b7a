"""Scratch: cross-validate kernel/representation vs FD oracle on an interval."""
import numpy as np

from diractree.graph import EdgePotential, validate_tree
from diractree.edge import compute_goursat_kernels, forward_from_end
from diractree.oracle import fd_solve, l2_compare, raised_cosine_bump, raised_cosine_callable

def run(label, p0, q0, dt=1.0 / 256, T=2.5, sine_q=False):
    n = int(round(1.0 / dt))
    if sine_q:
        x = np.arange(n + 1) * dt
        pot = EdgePotential(np.full(n + 1, p0), q0 * np.sin(np.pi * x))
    else:
        pot = EdgePotential.constant(p0, q0, n)
    tree = validate_tree([("a", "r", 1.0)], root="r", dt=dt, potentials=[pot])
    edge = tree.edges[0]
    nt = int(round(T / dt))
    bump = raised_cosine_bump(dt, nt, width_cells=8)

    fd = fd_solve(tree, {"a": raised_cosine_callable(dt, 8)}, T)
    kern = compute_goursat_kernels(edge, T, mode="full")
    rep = forward_from_end(edge, "head", bump, T, kernels=kern)
    err = l2_compare({edge.id: rep.regular}, fd.fields, dt)
    print(f"{label:28s} relerr={err:.4f}  drift={fd.norm_drift(int(0.2/dt)):.2e}")
    return err

print("== interval, control at x=0, bump ==")
run("free transport", 0.0, 0.0)
run("constant p=0.3", 0.3, 0.0)
run("constant q=0.3", 0.0, 0.3)
run("constant p=0.3 q=0.4", 0.3, 0.4)
run("p=0.3, q=0.5 sin(pi x)", 0.3, 0.5, sine_q=True)
