"""Stability of wavelets and scattering under a small change of edge weights.

Run with ``python demos/03_stability.py``.
"""

import numpy as np

from graphscat import GraphPair, check_wavelet_stability_tight, diffusion_system, stability_report
from graphscat.harness import jitter_graph, symmetric_uniform
from graphscat.io import read_edge_list, read_signal

here = __file__.rsplit("/", 1)[0]
a = diffusion_system(read_edge_list(f"{here}/data/ring6.txt"), "d_sqrt")
b = diffusion_system(read_edge_list(f"{here}/data/ring6_perturbed.txt"), "d_sqrt")
x = read_signal(f"{here}/data/signal6.csv", a.n)

report = stability_report(GraphPair(a, b), 2, "poly", x, (0, 2), perm="search")
print(f"kappa = {report.kappa:.4g}, R = {report.bigR:.4g}")
for r in report.records:
    print(f"{'PASS' if r.passed else 'FAIL'} {r.name:34s} lhs {r.lhs:.3e}  rhs {r.rhs:.3e}")

# the wavelet distance shrinks with the perturbation
g = read_edge_list(f"{here}/data/ring6.txt")
base = diffusion_system(g)
u = symmetric_uniform(g.n, np.random.default_rng(0))
for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    rec = check_wavelet_stability_tight(GraphPair(base, diffusion_system(jitter_graph(g, eps, u))), 2)
    print(f"eps {eps:.0e}: squared frame distance {rec.lhs:.3e} (bound {rec.rhs:.3e})")
