"""Asymmetric diffusion wavelets and graph scattering transforms.

The diffusion operator ``T = V g(Omega) V^T`` of a connected weighted graph is
conjugated by an invertible weight matrix, ``K = M^-1 T M``, and dyadic
wavelet frames built from K feed windowed and non-windowed scattering
transforms. :mod:`graphscat.stability` and :mod:`graphscat.harness` evaluate
the frame, energy, invariance and stability guarantees numerically.
"""

from .errors import *  # noqa: F401,F403
from .graph_core import (
    DiffusionSystem,
    Graph,
    SpectralDecomposition,
    SpectralFunction,
    WeightMatrix,
    build_diffusion,
    diffusion_system,
    load_graph,
    matrix_function,
    normalized_laplacian,
    operator_norm_weighted,
    permuted_system,
    spectral_decompose,
    weighted_inner,
    weighted_norm,
    with_weight,
)
from .harness import Certificate, TrialSpec, oracle_small_scatter, run_suite
from .scattering import (
    ScatteringConfig,
    ScatteringOutput,
    enumerate_paths,
    modulus,
    nonwindowed_coefficient,
    propagate,
    scatter,
    windowed_coefficient,
)
from .stability import (
    GraphPair,
    StabilityRecord,
    StabilityReport,
    alignment_metrics,
    check_partial_invariance,
    check_scattering_stability,
    check_transfer,
    check_wavelet_stability_poly,
    check_wavelet_stability_tight,
    diffusion_distances,
    frame_distance,
    frame_gain,
    stability_report,
)
from .wavelets import FilterBank, WaveletFrame, apply_frame, build_frame, frame_bounds, lower_bound_constant

__version__ = "0.1.0"
