"""Graphs, normalized Laplacians and the diffusion operators T and K = M^-1 T M.

Everything here is dense numpy. Objects are frozen dataclasses holding
read-only arrays, so a :class:`DiffusionSystem` can be shared freely between
threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    DomainError,
    EigensolverFailure,
    EmptyGraph,
    NonpositiveWeight,
    SingularWeightMatrix,
    SpectralGapViolation,
)

TOL = 1e-9
GAP_TOL = 1e-10
CLAMP_TOL = 1e-9
# eigenvalues of N this close to 2 are snapped onto 2 (bipartite components)
SNAP_TOL = 1e-12
MAX_CONDITION = 1e12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Weighted undirected connected graph.

    Self-loops are allowed; they only add to the degree of their vertex.
    """

    adjacency: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.array(self.adjacency, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got shape {A.shape}")
        if A.shape[0] == 0:
            raise EmptyGraph("graph has no vertices")
        if not np.all(np.isfinite(A)):
            raise NonpositiveWeight("adjacency contains non-finite entries")
        if np.any(A < 0):
            raise NonpositiveWeight("edge weights must be nonnegative")
        if not np.allclose(A, A.T, rtol=0, atol=TOL * max(1.0, np.abs(A).max())):
            raise DimensionMismatch("adjacency must be symmetric")
        A = 0.5 * (A + A.T)
        d = A.sum(axis=1)
        if not np.any(A):
            raise EmptyGraph("graph has no edges")
        _check_connected(A)
        object.__setattr__(self, "adjacency", _frozen(A))
        object.__setattr__(self, "degrees", _frozen(d))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def permuted(self, sigma: Sequence[int]) -> "Graph":
        """Graph with vertex ``i`` relabelled so that ``A'[i, k] = A[sigma[i], sigma[k]]``."""
        sigma = np.asarray(sigma)
        return Graph(self.adjacency[np.ix_(sigma, sigma)])


def _check_connected(A: np.ndarray) -> None:
    n = A.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for k in np.flatnonzero(A[i]):
            if not seen[k]:
                seen[k] = True
                queue.append(k)
    if not seen.all():
        missing = np.flatnonzero(~seen).tolist()
        raise DisconnectedGraph(f"vertices {missing} are unreachable from vertex 0")


def load_graph(
    records: Iterable[Sequence[float]],
    n: int | None = None,
    one_based: bool = False,
) -> Graph:
    """Build a :class:`Graph` from ``(u, v, w)`` edge records.

    Parameters
    ----------
    records
        Iterable of ``(u, v)`` or ``(u, v, w)``; a missing weight means 1.
    n
        Vertex count. Defaults to one more than the largest id, which means
        trailing isolated vertices must be declared explicitly.
    one_based
        Interpret ids as starting at 1.

    Repeated edges accumulate their weights.
    """
    edges = []
    for rec in records:
        if len(rec) == 2:
            u, v, w = rec[0], rec[1], 1.0
        elif len(rec) == 3:
            u, v, w = rec
        else:
            raise ValueError(f"edge record must have 2 or 3 fields, got {rec!r}")
        u, v, w = int(u), int(v), float(w)
        if one_based:
            u, v = u - 1, v - 1
        if u < 0 or v < 0:
            raise ValueError(f"negative vertex id in edge {rec!r}")
        if not w > 0:
            raise NonpositiveWeight(f"edge {rec!r} has nonpositive weight")
        edges.append((u, v, w))
    if not edges and not n:
        raise EmptyGraph("no edges and no vertex count given")
    n_ids = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    if n is None:
        n = n_ids
    elif n < n_ids:
        raise ValueError(f"vertex id {n_ids - 1} out of range for n={n}")
    A = np.zeros((n, n))
    for u, v, w in edges:
        A[u, v] += w
        if u != v:
            A[v, u] += w
    return Graph(A)


def normalized_laplacian(graph: Graph) -> np.ndarray:
    """N = I - D^{-1/2} A D^{-1/2}."""
    s = 1.0 / np.sqrt(graph.degrees)
    N = np.eye(graph.n) - s[:, None] * graph.adjacency * s[None, :]
    return 0.5 * (N + N.T)


# ---------------------------------------------------------------------------
# Spectral decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    omegas: np.ndarray
    V: np.ndarray

    @property
    def n(self) -> int:
        return self.omegas.shape[0]

    @property
    def gap(self) -> float:
        return float(self.omegas[1]) if self.n > 1 else np.inf


def _normalize_signs(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for i in range(1, V.shape[1]):
        col = np.abs(V[:, i])
        # lowest index among entries tied (to rounding) for the largest magnitude
        k = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        if V[k, i] < 0:
            V[:, i] = -V[:, i]
    return V


def spectral_decompose(N: np.ndarray, d: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of the normalized Laplacian with pinned conventions.

    Eigenvalues come out ascending and inside ``[0, 2]``. Column 0 is the
    analytic lead eigenvector ``d^{1/2} / ||d^{1/2}||``; every other column
    has its largest-magnitude entry positive.
    """
    N = np.asarray(N, dtype=float)
    d = np.asarray(d, dtype=float)
    n = N.shape[0]
    if N.shape != (n, n) or d.shape != (n,):
        raise DimensionMismatch("N must be n x n and d of length n")
    if not np.allclose(N, N.T, rtol=0, atol=TOL):
        raise DimensionMismatch("N is not symmetric")
    try:
        omegas, V = np.linalg.eigh(0.5 * (N + N.T))
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not (np.all(np.isfinite(omegas)) and np.all(np.isfinite(V))):
        raise EigensolverFailure("eigensolver returned non-finite values")
    if omegas[0] < -CLAMP_TOL or omegas[-1] > 2 + CLAMP_TOL:
        raise EigensolverFailure(
            f"eigenvalues [{omegas[0]:.3g}, {omegas[-1]:.3g}] fall outside [0, 2]"
        )
    omegas = np.clip(omegas, 0.0, 2.0)
    omegas[np.abs(omegas - 2.0) <= SNAP_TOL] = 2.0
    if abs(omegas[0]) > TOL:
        raise EigensolverFailure(f"smallest eigenvalue {omegas[0]:.3g} is not 0")
    omegas[0] = 0.0
    if n > 1 and omegas[1] <= GAP_TOL:
        raise SpectralGapViolation(f"spectral gap omega_1 = {omegas[1]:.3g} <= {GAP_TOL}")
    V = _normalize_signs(V)
    sq = np.sqrt(d)
    V[:, 0] = sq / np.linalg.norm(sq)
    return SpectralDecomposition(_frozen(omegas), _frozen(V))


# ---------------------------------------------------------------------------
# Spectral functions and weight matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralFunction:
    """Strictly decreasing ``g: [0, 2] -> [0, 1]`` with ``g(0) = 1`` and ``g(2) = 0``."""

    func: Callable[[np.ndarray], np.ndarray]
    tag: str = "custom-expression"

    def __post_init__(self):
        grid = np.linspace(0.0, 2.0, 2001)
        vals = np.asarray(self(grid))
        if vals.shape != grid.shape or not np.all(np.isfinite(vals)):
            raise DomainError(f"spectral function {self.tag!r} is not finite on [0, 2]")
        if abs(vals[0] - 1.0) > TOL or abs(vals[-1]) > TOL:
            raise DomainError(f"spectral function {self.tag!r} must satisfy g(0)=1, g(2)=0")
        if np.any(np.diff(vals) >= 0):
            raise DomainError(f"spectral function {self.tag!r} is not strictly decreasing")

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    @classmethod
    def g_star(cls) -> "SpectralFunction":
        return cls(lambda t: 1.0 - t / 2.0, tag="g_star")

    @classmethod
    def from_table(cls, t, g) -> "SpectralFunction":
        """Piecewise-linear interpolation through the points ``(t[k], g[k])``."""
        t = np.asarray(t, dtype=float)
        g = np.asarray(g, dtype=float)
        order = np.argsort(t)
        t, g = t[order], g[order]
        if t[0] != 0.0 or t[-1] != 2.0:
            raise DomainError("table must cover t = 0 and t = 2 exactly")
        return cls(lambda s: np.interp(s, t, g), tag="custom-table")

    @classmethod
    def from_expression(cls, expr: str) -> "SpectralFunction":
        """Parse an expression in ``t`` such as ``"(1 - t/2)**2"``."""
        import sympy

        t = sympy.Symbol("t")
        f = sympy.lambdify(t, sympy.sympify(expr), "numpy")
        return cls(lambda s: np.broadcast_to(f(s), np.shape(s)).astype(float), tag="custom-expression")


@dataclass(frozen=True)
class WeightMatrix:
    kind: str
    M: np.ndarray
    M_inv: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.M - np.diag(np.diag(self.M))) == 0)

    @classmethod
    def identity(cls, n: int) -> "WeightMatrix":
        return cls("identity", _frozen(np.eye(n)), _frozen(np.eye(n)))

    @classmethod
    def d_sqrt(cls, graph: Graph) -> "WeightMatrix":
        s = np.sqrt(graph.degrees)
        return cls("d_sqrt", _frozen(np.diag(s)), _frozen(np.diag(1.0 / s)))

    @classmethod
    def d_inv_sqrt(cls, graph: Graph) -> "WeightMatrix":
        s = np.sqrt(graph.degrees)
        return cls("d_inv_sqrt", _frozen(np.diag(1.0 / s)), _frozen(np.diag(s)))

    @classmethod
    def custom(cls, M, kind: str = "custom") -> "WeightMatrix":
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"weight matrix must be square, got {M.shape}")
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularWeightMatrix(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
        if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
            M_inv = np.diag(1.0 / np.diag(M))
        else:
            M_inv = np.linalg.inv(M)
        return cls(kind, _frozen(M), _frozen(M_inv))

    @classmethod
    def of_kind(cls, kind: str, graph: Graph) -> "WeightMatrix":
        makers = {
            "identity": lambda: cls.identity(graph.n),
            "d_sqrt": lambda: cls.d_sqrt(graph),
            "d_inv_sqrt": lambda: cls.d_inv_sqrt(graph),
        }
        if kind not in makers:
            raise ValueError(f"unknown weight-matrix kind {kind!r}")
        return makers[kind]()

    def permuted(self, sigma: Sequence[int]) -> "WeightMatrix":
        """``Pi M Pi^T`` for the relabelling used by :meth:`Graph.permuted`."""
        ix = np.ix_(sigma, sigma)
        return WeightMatrix(self.kind, _frozen(self.M[ix]), _frozen(self.M_inv[ix]))


# ---------------------------------------------------------------------------
# Diffusion system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiffusionSystem:
    graph: Graph
    spectral: SpectralDecomposition
    g: SpectralFunction
    lambdas: np.ndarray
    T: np.ndarray
    M: WeightMatrix
    K: np.ndarray
    U_basis: np.ndarray
    W_basis: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def V(self) -> np.ndarray:
        return self.spectral.V

    @property
    def lambda1(self) -> float:
        return float(self.lambdas[1]) if self.n > 1 else 0.0

    def matrix_function(self, f, target: str = "K", sqrt: bool = False) -> np.ndarray:
        return matrix_function(self, f, target=target, sqrt=sqrt)


def build_diffusion(
    graph: Graph,
    spectral: SpectralDecomposition,
    g: SpectralFunction,
    M: WeightMatrix,
) -> DiffusionSystem:
    if M.n != graph.n or spectral.n != graph.n:
        raise DimensionMismatch("graph, spectral decomposition and M disagree on n")
    cond = np.linalg.cond(M.M)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularWeightMatrix(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    lambdas = np.clip(g(spectral.omegas), 0.0, 1.0)
    lambdas[0] = 1.0
    if graph.n > 1 and not lambdas[1] < 1.0:
        raise SpectralGapViolation("lambda_1 must be < 1")
    V = spectral.V
    T = (V * lambdas) @ V.T
    T = 0.5 * (T + T.T)
    K = M.M_inv @ T @ M.M
    return DiffusionSystem(
        graph=graph,
        spectral=spectral,
        g=g,
        lambdas=_frozen(lambdas),
        T=_frozen(T),
        M=M,
        K=_frozen(K),
        U_basis=_frozen(M.M_inv @ V),
        # left eigenvectors of K; equals M v_i whenever M is symmetric
        W_basis=_frozen(M.M.T @ V),
    )


def with_weight(sys: DiffusionSystem, M: WeightMatrix | str) -> DiffusionSystem:
    """Same graph and g, different weight matrix (reuses the eigendecomposition)."""
    if isinstance(M, str):
        M = WeightMatrix.of_kind(M, sys.graph)
    return build_diffusion(sys.graph, sys.spectral, sys.g, M)


def permuted_system(sys: DiffusionSystem, sigma) -> DiffusionSystem:
    """The system on the relabelled graph with ``M' = Pi M Pi^T``."""
    graph = sys.graph.permuted(sigma)
    spec = spectral_decompose(normalized_laplacian(graph), graph.degrees)
    return build_diffusion(graph, spec, sys.g, sys.M.permuted(sigma))


def permutation_matrix(sigma) -> np.ndarray:
    """``Pi`` with ``(Pi x)[i] = x[sigma[i]]``."""
    sigma = np.asarray(sigma)
    return np.eye(sigma.size)[sigma]


def diffusion_system(
    graph: Graph,
    M: WeightMatrix | str = "identity",
    g: SpectralFunction | None = None,
) -> DiffusionSystem:
    """Convenience wrapper: Laplacian, eigendecomposition and T/K in one call."""
    if isinstance(M, str):
        M = WeightMatrix.of_kind(M, graph)
    g = g if g is not None else SpectralFunction.g_star()
    spec = spectral_decompose(normalized_laplacian(graph), graph.degrees)
    return build_diffusion(graph, spec, g, M)


# ---------------------------------------------------------------------------
# Weighted space L^2(G, M)
# ---------------------------------------------------------------------------


def _as_matrix(M) -> np.ndarray:
    return M.M if isinstance(M, WeightMatrix) else np.asarray(M, dtype=float)


def weighted_inner(x, y, M) -> float:
    """<x, y>_M = <Mx, My>_2."""
    Mm = _as_matrix(M)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape[0] != Mm.shape[0]:
        raise DimensionMismatch(f"shapes {x.shape}, {y.shape} incompatible with M {Mm.shape}")
    return float((Mm @ x) @ (Mm @ y))


def weighted_norm(x, M) -> float:
    Mm = _as_matrix(M)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != Mm.shape[0]:
        raise DimensionMismatch(f"vector of length {x.shape[0]} with M of size {Mm.shape[0]}")
    return float(np.linalg.norm(Mm @ x))


def operator_norm_weighted(B, M) -> float:
    """Operator norm of ``B`` on L^2(G, M), i.e. ``||M B M^-1||_2``."""
    if isinstance(M, WeightMatrix):
        Mm, Minv = M.M, M.M_inv
    else:
        Mm = np.asarray(M, dtype=float)
        Minv = np.linalg.inv(Mm)
    return float(np.linalg.norm(Mm @ np.asarray(B, dtype=float) @ Minv, 2))


def matrix_function(
    sys: DiffusionSystem,
    f,
    target: str = "K",
    sqrt: bool = False,
) -> np.ndarray:
    """Apply a scalar function to T or K through the eigenvalues of T.

    ``f`` is evaluated at every ``lambda_i``. With ``sqrt=True`` the result is
    the entrywise square root of ``f(Lambda)``; values in ``[-CLAMP_TOL, 0)``
    are treated as zero, anything more negative raises :class:`DomainError`.
    """
    if target not in ("T", "K"):
        raise ValueError(f"target must be 'T' or 'K', got {target!r}")
    vals = np.asarray(f(sys.lambdas), dtype=float)
    vals = np.broadcast_to(vals, sys.lambdas.shape).copy()
    if not np.all(np.isfinite(vals)):
        raise DomainError("filter is not finite on the spectrum")
    if sqrt:
        if np.any(vals < -CLAMP_TOL):
            raise DomainError(f"cannot take square root of {vals.min():.3g}")
        vals = np.sqrt(np.clip(vals, 0.0, None))
    V = sys.V
    F = (V * vals) @ V.T
    F = 0.5 * (F + F.T)
    if target == "T":
        return F
    return sys.M.M_inv @ F @ sys.M.M
