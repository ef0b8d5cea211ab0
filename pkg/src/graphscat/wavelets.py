"""Dyadic diffusion wavelet frames built from K.

Two filter banks share the dyadic polynomials

    p_0(t) = 1 - t,  p_j(t) = t^(2^(j-1)) - t^(2^j)  (1 <= j <= J),  p_{J+1}(t) = t^(2^J)

which sum to one on [0, 1]. The ``"poly"`` frame uses ``p_j(K)`` directly and
the ``"tight"`` frame uses the spectral square roots ``q_j(K) = p_j(K)^{1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch
from .graph_core import DiffusionSystem, weighted_norm

KINDS = ("tight", "poly")


def dyadic_polynomial(j: int, J: int, t):
    t = np.asarray(t, dtype=float)
    if j == 0:
        return 1.0 - t
    if 1 <= j <= J:
        return t ** (2 ** (j - 1)) - t ** (2**j)
    if j == J + 1:
        return t ** (2**J)
    raise ValueError(f"filter index {j} outside 0..{J + 1}")


def dyadic_sqrt(j: int, J: int, t):
    return np.sqrt(np.clip(dyadic_polynomial(j, J, t), 0.0, None))


@dataclass(frozen=True)
class FilterBank:
    J: int
    kind: str

    def __post_init__(self):
        if self.J < 0:
            raise ValueError(f"J must be >= 0, got {self.J}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def filters(self) -> list[Callable]:
        base = dyadic_sqrt if self.kind == "tight" else dyadic_polynomial
        return [partial(base, j, self.J) for j in range(self.J + 2)]

    def energy(self, t) -> np.ndarray:
        """F(t) = sum of squared filter responses."""
        return sum(f(t) ** 2 for f in self.filters)

    @property
    def lowpass_exponent(self) -> float:
        """Phi = K^t with t = 2^(J-1) (tight) or 2^J (poly)."""
        return 2.0 ** (self.J - 1) if self.kind == "tight" else 2.0**self.J


@dataclass(frozen=True)
class WaveletFrame:
    """Filter matrices ``Psi_0..Psi_J`` and the low-pass ``Phi``.

    ``sys`` is None for frames assembled from raw matrices (permuted or
    synthetic frames used in distance computations).
    """

    psi: tuple
    phi: np.ndarray
    J: int
    kind: str
    sys: Optional[DiffusionSystem] = None

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def bank(self) -> FilterBank:
        return FilterBank(self.J, self.kind)

    @property
    def matrices(self) -> list[np.ndarray]:
        return [*self.psi, self.phi]

    def stacked(self) -> np.ndarray:
        """The analysis operator as a ``(J+2)n x n`` block column."""
        return np.vstack(self.matrices)

    def permuted(self, sigma: Sequence[int]) -> "WaveletFrame":
        """``Pi W Pi^T`` with the relabelling convention of :meth:`Graph.permuted`."""
        ix = np.ix_(sigma, sigma)
        return WaveletFrame(
            psi=tuple(P[ix] for P in self.psi), phi=self.phi[ix], J=self.J, kind=self.kind
        )

    @classmethod
    def from_matrices(cls, psi, phi, kind: str = "custom") -> "WaveletFrame":
        psi = tuple(np.asarray(P, dtype=float) for P in psi)
        return cls(psi=psi, phi=np.asarray(phi, dtype=float), J=len(psi) - 1, kind=kind)


def build_frame(sys: DiffusionSystem, J: int, kind: str = "poly") -> WaveletFrame:
    bank = FilterBank(J, kind)
    mats = [sys.matrix_function(f, target="K") for f in bank.filters]
    for m in mats:
        m.setflags(write=False)
    return WaveletFrame(psi=tuple(mats[:-1]), phi=mats[-1], J=J, kind=kind, sys=sys)


def apply_frame(frame: WaveletFrame, x) -> list[np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape != (frame.n,):
        raise DimensionMismatch(f"signal of shape {x.shape} for a frame on {frame.n} vertices")
    return [F @ x for F in frame.matrices]


def frame_energy(frame: WaveletFrame, x) -> float:
    """sum_j ||Psi_j x||_M^2 + ||Phi x||_M^2."""
    M = frame.sys.M
    return float(sum(weighted_norm(y, M) ** 2 for y in apply_frame(frame, x)))


def frame_bounds(frame: WaveletFrame) -> tuple[float, float]:
    """Optimal frame bounds, read off the spectrum of K."""
    if frame.sys is None:
        raise ValueError("frame_bounds needs a frame built on a DiffusionSystem")
    F = frame.bank.energy(frame.sys.lambdas)
    return float(F.min()), float(F.max())


def lower_bound_constant(J: int) -> float:
    """min over [0, 1] of (1 - t)^2 + t^(2^(J+1)); a lower frame bound for the poly frame."""
    if J < 0:
        raise ValueError(f"J must be >= 0, got {J}")
    e = 2 ** (J + 1)

    def h(t):
        return (1.0 - t) ** 2 + t**e

    grid = np.linspace(0.0, 1.0, 100_001)
    k = int(np.argmin(h(grid)))
    if 0 < k < grid.size - 1:
        res = optimize.minimize_scalar(
            h, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-12
        )
        return float(min(res.fun, h(grid[k])))
    return float(h(grid[k]))
