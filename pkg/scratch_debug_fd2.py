"""Scratch: measure fractional misalignment of FD free transport."""
import numpy as np

from diractree.graph import validate_tree
from diractree.oracle import fd_solve, raised_cosine_callable

dt = 1.0 / 256
T = 0.75
tree = validate_tree([("a", "r", 1.0)], root="r", dt=dt)
nt = int(round(T / dt))
f = raised_cosine_callable(dt, 8)

for s in (1, 2, 4, 8):
    fd = fd_solve(tree, {"a": f}, T, substeps=s)
    U = fd.fields["e1"]
    t = np.arange(nt + 1) * dt
    x_idx = 64
    x = x_idx * dt
    u1 = U[0, x_idx, :].real
    best = None
    for shift in np.linspace(-1.5, 1.5, 61):
        ex = np.array([f(tt - x + shift * dt) for tt in t]).real
        e = np.linalg.norm(u1 - ex) / np.linalg.norm(ex)
        if best is None or e < best[1]:
            best = (shift, e)
    ex0 = np.array([f(tt - x) for tt in t]).real
    e0 = np.linalg.norm(u1 - ex0) / np.linalg.norm(ex0)
    print(f"s={s}: err@0={e0:.4f}  best shift={best[0]:+.3f} cells err={best[1]:.4f}  peak={np.max(u1):.2f}/{np.max(ex0):.2f}")
