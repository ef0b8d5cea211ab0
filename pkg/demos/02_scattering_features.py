"""Scattering features of a signal and their behaviour under relabelling.

Run with ``python demos/02_scattering_features.py``.
"""

import numpy as np

from graphscat import ScatteringConfig, build_frame, diffusion_system, load_graph, permuted_system, scatter
from graphscat.io import read_edge_list, read_signal

here = __file__.rsplit("/", 1)[0]
graph = read_edge_list(f"{here}/data/ring6.txt")
x = read_signal(f"{here}/data/signal6.csv", graph.n)

sys = diffusion_system(graph, "d_sqrt")
frame = build_frame(sys, 2, "tight")
out = scatter(ScatteringConfig(frame, 0, 3), x)

print(f"{len(out.nonwindowed)} paths up to layer 3")
for m, e in sorted(out.layer_energies.items()):
    print(f"layer {m}: energy {e:.6f}")
print("first coefficients:", {p: round(v, 5) for p, v in list(out.nonwindowed.items())[:5]})

# relabel the vertices: non-windowed features are unchanged
sigma = np.array([3, 5, 0, 1, 4, 2])
other = permuted_system(sys, sigma)
out_p = scatter(ScatteringConfig(build_frame(other, 2, "tight"), 0, 3, M=other.M), x[sigma])
gap = np.max(np.abs(out.nonwindowed_array() - out_p.nonwindowed_array()))
print(f"largest change of a non-windowed coefficient after relabelling: {gap:.2e}")

# windowed features are equivariant: they move with the vertices
w, w_p = out.windowed[(0, 1)], out_p.windowed[(0, 1)]
print(f"windowed path (0, 1) after relabelling matches w[sigma]: {np.allclose(w_p, w[sigma])}")
