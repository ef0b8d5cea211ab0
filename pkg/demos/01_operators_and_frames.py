"""Diffusion operators and wavelet frames on a three-vertex path.

Run with ``python demos/01_operators_and_frames.py``.
"""

import numpy as np

from graphscat import apply_frame, build_frame, diffusion_system, frame_bounds, load_graph, lower_bound_constant, weighted_norm

np.set_printoptions(precision=4, suppress=True)

p3 = load_graph([(0, 1), (1, 2)])

# M = D^-1/2 turns K into the lazy random walk (I + A D^-1) / 2
walk = diffusion_system(p3, "d_inv_sqrt")
print("lazy walk K:\n", walk.K)
print("eigenvalues of T:", walk.lambdas)

# tight frames preserve the M-weighted energy, poly frames sit between C_J and 1
x = np.array([1.0, -2.0, 0.5])
for kind in ("tight", "poly"):
    for J in (0, 2, 4):
        frame = build_frame(walk, J, kind)
        energy = sum(weighted_norm(y, walk.M) ** 2 for y in apply_frame(frame, x)) / weighted_norm(x, walk.M) ** 2
        A, B = frame_bounds(frame)
        print(f"{kind:5s} J={J}: energy ratio {energy:.6f}, frame bounds [{A:.4f}, {B:.4f}], C_J = {lower_bound_constant(J):.4f}")
