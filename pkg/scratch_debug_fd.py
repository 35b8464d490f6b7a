"""Scratch: locate the FD offset in the free case."""
import numpy as np

from diractree.graph import validate_tree
from diractree.oracle import fd_solve, raised_cosine_bump

dt = 1.0 / 256
T = 0.75  # before any reflection
tree = validate_tree([("a", "r", 1.0)], root="r", dt=dt)
nt = int(round(T / dt))
bump = raised_cosine_bump(dt, nt, width_cells=8)

fd = fd_solve(tree, {"a": bump}, T)
U = fd.fields["e1"]

t = np.arange(nt + 1) * dt
x_idx = 64  # x = 0.25
x = x_idx * dt
exact = np.interp(t - x, t, bump.regular.real, left=0.0)

u1 = U[0, x_idx, :].real
n0 = np.argmax(u1)
ne = np.argmax(exact)
print("peak index fd:", n0, "exact:", ne, "offset (cells):", n0 - ne)
print("max |u1|:", np.max(np.abs(u1)), "exact max:", np.max(exact))
print("rel err at node:", np.linalg.norm(u1 - exact) / np.linalg.norm(exact))

# try fractional alignment
from numpy.fft import rfft, irfft
for shift in (-1.0, -0.5, 0.0, 0.5, 1.0):
    ex = np.interp(t - x + shift * dt, t, bump.regular.real, left=0.0)
    print(f"shift {shift:+.1f} cells -> rel err {np.linalg.norm(u1 - ex) / np.linalg.norm(ex):.4f}")
