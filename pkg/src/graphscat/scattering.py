"""Windowed and non-windowed scattering transforms on a wavelet frame.

A path is a tuple ``(j_1, ..., j_m)`` of filter indices; ``()`` is the empty
path. The propagator is ``U[path] x = |Psi_{j_m} ... |Psi_{j_1} x||`` and the
coefficients are ``S[path] x = Phi U[path] x`` (windowed) and
``<mu, U[path] x>_M`` (non-windowed).

:func:`scatter` evaluates a whole layer range breadth first: every layer is a
single ``n x P`` block, so each wavelet multiplies every parent exactly once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .errors import DimensionMismatch, InvalidPathEntry, PathBudgetExceeded
from .graph_core import WeightMatrix, weighted_inner
from .wavelets import WaveletFrame

Path = tuple

DEFAULT_J = 3
DEFAULT_LAYERS = (0, 2)
DEFAULT_PATH_BUDGET = 200_000


def modulus(x) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=float))


def enumerate_paths(J: int, min_layer: int, max_layer: int) -> Iterator[Path]:
    """All paths with ``min_layer <= m <= max_layer``, by length then lexicographically."""
    for m in range(min_layer, max_layer + 1):
        yield from itertools.product(range(J + 1), repeat=m)


def path_count(J: int, min_layer: int, max_layer: int) -> int:
    return sum((J + 1) ** m for m in range(min_layer, max_layer + 1))


def path_key(path: Path) -> str:
    """Stable string form used as a map key in output files: ``"[1,0,2]"``."""
    return "[" + ",".join(str(int(j)) for j in path) + "]"


def _check_path(frame: WaveletFrame, path: Path) -> None:
    for j in path:
        if not (isinstance(j, (int, np.integer)) and 0 <= j <= frame.J):
            raise InvalidPathEntry(f"path entry {j!r} outside 0..{frame.J}")


def _check_signal(frame: WaveletFrame, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (frame.n,):
        raise DimensionMismatch(f"signal of shape {x.shape} for a frame on {frame.n} vertices")
    return x


def propagate(frame: WaveletFrame, path: Path, x) -> np.ndarray:
    _check_path(frame, path)
    y = _check_signal(frame, x)
    for j in path:
        y = np.abs(frame.psi[j] @ y)
    return y


def windowed_coefficient(frame: WaveletFrame, path: Path, x) -> np.ndarray:
    return frame.phi @ propagate(frame, path, x)


def resolve_mu(mu, M: WeightMatrix, frame: WaveletFrame | None = None) -> np.ndarray:
    """Turn a weighting-vector choice into a concrete vector.

    ``"u0"`` is the lead eigenvector ``M^-1 v_0`` of K; ``"ones"`` is
    ``(M^T M)^-1 1``, for which the non-windowed coefficients become l1 norms.
    """
    if isinstance(mu, str):
        if mu == "u0":
            if frame is None or frame.sys is None:
                raise ValueError("mu='u0' needs a frame built on a DiffusionSystem")
            return np.array(frame.sys.U_basis[:, 0])
        if mu in ("ones", "ones_dual"):
            return np.linalg.solve(M.M.T @ M.M, np.ones(M.n))
        raise ValueError(f"unknown weighting vector {mu!r}")
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (M.n,):
        raise DimensionMismatch(f"weighting vector of shape {mu.shape}, expected ({M.n},)")
    return mu


def nonwindowed_coefficient(frame: WaveletFrame, path: Path, x, mu="u0", M=None) -> float:
    M = M if M is not None else frame.sys.M
    mu = resolve_mu(mu, M, frame)
    return weighted_inner(mu, propagate(frame, path, x), M)


@dataclass(frozen=True)
class ScatteringConfig:
    frame: WaveletFrame
    min_layer: int = DEFAULT_LAYERS[0]
    max_layer: int = DEFAULT_LAYERS[1]
    mu: Union[str, np.ndarray] = "u0"
    M: WeightMatrix | None = None
    budget: int = DEFAULT_PATH_BUDGET

    def __post_init__(self):
        if not 0 <= self.min_layer <= self.max_layer:
            raise ValueError(f"need 0 <= min_layer <= max_layer, got {self.min_layer}:{self.max_layer}")
        if self.M is None:
            if self.frame.sys is None:
                raise ValueError("frame has no DiffusionSystem; pass M explicitly")
            object.__setattr__(self, "M", self.frame.sys.M)
        object.__setattr__(self, "mu", resolve_mu(self.mu, self.M, self.frame))

    @property
    def n_paths(self) -> int:
        return path_count(self.frame.J, self.min_layer, self.max_layer)


@dataclass
class ScatteringOutput:
    windowed: dict = field(default_factory=dict)
    nonwindowed: dict = field(default_factory=dict)
    # layer m -> sum over paths of length m of ||U[path] x||_M^2, for m = 0..max_layer
    layer_energies: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def paths(self) -> list[Path]:
        return list(self.windowed)

    def windowed_array(self) -> np.ndarray:
        return np.array(list(self.windowed.values()))

    def nonwindowed_array(self) -> np.ndarray:
        return np.array(list(self.nonwindowed.values()))


def _layers(frame: WaveletFrame, x: np.ndarray, max_layer: int):
    """Yield ``(m, Y)`` where the columns of ``Y`` are ``U[path] x`` for the
    paths of length ``m`` in lexicographic order."""
    Y = x[:, None]
    yield 0, Y
    psi = np.stack(frame.psi)  # (J+1, n, n)
    for m in range(1, max_layer + 1):
        # Z[j, :, a] = |Psi_j Y[:, a]|; child a*(J+1)+j extends parent a with j
        Z = np.abs(psi @ Y)
        Y = Z.transpose(1, 2, 0).reshape(frame.n, -1)
        yield m, Y


def scatter(config: ScatteringConfig, x) -> ScatteringOutput:
    frame = config.frame
    x = _check_signal(frame, x)
    if config.n_paths > config.budget:
        raise PathBudgetExceeded(
            f"{config.n_paths} paths for J={frame.J}, layers "
            f"{config.min_layer}:{config.max_layer} exceed budget {config.budget}"
        )
    M = config.M.M
    dual = M.T @ (M @ config.mu)  # <mu, y>_M = dual . y
    out = ScatteringOutput(
        metadata={
            "J": frame.J,
            "kind": frame.kind,
            "min_layer": config.min_layer,
            "max_layer": config.max_layer,
            "M": config.M.kind,
            "n": frame.n,
        }
    )
    for m, Y in _layers(frame, x, config.max_layer):
        out.layer_energies[m] = float(np.sum((M @ Y) ** 2))
        if m < config.min_layer:
            continue
        S = frame.phi @ Y
        s_bar = dual @ Y
        for a, path in enumerate(itertools.product(range(frame.J + 1), repeat=m)):
            out.windowed[path] = S[:, a]
            out.nonwindowed[path] = float(s_bar[a])
    return out


def scattering_distance(a: ScatteringOutput, b: ScatteringOutput, M) -> tuple[float, float]:
    """Distances between two outputs over the same paths.

    Returns the windowed distance in l^2(L^2(G, M)) and the non-windowed
    distance in l^2.
    """
    Mm = M.M if isinstance(M, WeightMatrix) else np.asarray(M)
    if a.paths() != b.paths():
        raise DimensionMismatch("outputs cover different paths")
    dw = a.windowed_array() - b.windowed_array()
    dn = a.nonwindowed_array() - b.nonwindowed_array()
    return float(np.linalg.norm(dw @ Mm.T)), float(np.linalg.norm(dn))
