"""Alignment metrics between two graphs and numerical checks of the stability bounds.

Every ``check_*`` function returns a :class:`StabilityRecord` holding the two
sides of one inequality. Suprema over unit vectors are evaluated exactly as
top singular values of stacked block operators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, HypothesisViolated, ShapeMismatch, SingularAlignment
from .graph_core import (
    TOL,
    DiffusionSystem,
    WeightMatrix,
    operator_norm_weighted,
    weighted_norm,
    with_weight,
)
from .scattering import ScatteringConfig, resolve_mu, scatter, scattering_distance
from .wavelets import FilterBank, WaveletFrame, build_frame

EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True)
class GraphPair:
    sysA: DiffusionSystem
    sysB: DiffusionSystem

    def __post_init__(self):
        if self.sysA.n != self.sysB.n:
            raise ShapeMismatch(f"graphs have {self.sysA.n} and {self.sysB.n} vertices")

    @property
    def n(self) -> int:
        return self.sysA.n

    @property
    def R1(self) -> np.ndarray:
        return self.sysA.M.M_inv @ self.sysB.M.M

    @property
    def R2(self) -> np.ndarray:
        return self.sysB.M.M @ self.sysA.M.M_inv

    @property
    def lambda1_star(self) -> float:
        return max(self.sysA.lambda1, self.sysB.lambda1)


@dataclass
class StabilityRecord:
    name: str
    lhs: float
    rhs: float
    passed: bool
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": bool(self.passed),
            **({"details": self.details} if self.details else {}),
        }


def _record(name, lhs, rhs, tol=TOL, **details) -> StabilityRecord:
    lhs, rhs = float(lhs), float(rhs)
    return StabilityRecord(name, lhs, rhs, bool(lhs <= rhs + tol), details)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def alignment_metrics(pair: GraphPair) -> tuple[float, float]:
    """kappa(G, G') and R(G, G') from R1 = M^-1 M' and R2 = M' M^-1."""
    I = np.eye(pair.n)
    kappa, big_r = 0.0, 0.0
    for R in (pair.R1, pair.R2):
        if np.linalg.cond(R) > 1e14:
            raise SingularAlignment("alignment matrix is numerically singular")
        R_inv = np.linalg.inv(R)
        kappa = max(kappa, np.linalg.norm(I - R, 2), np.linalg.norm(I - R_inv, 2))
        big_r = max(big_r, np.linalg.norm(R, 2), np.linalg.norm(R_inv, 2))
    return float(kappa), float(big_r)


def diffusion_distances(pair: GraphPair) -> tuple[float, float]:
    """(||T - T'||_2, ||K - K'||_M) with M the weight matrix of the first graph."""
    dT = np.linalg.norm(pair.sysA.T - pair.sysB.T, 2)
    dK = operator_norm_weighted(pair.sysA.K - pair.sysB.K, pair.sysA.M)
    return float(dT), float(dK)


def _check_frames(frameA: WaveletFrame, frameB: WaveletFrame) -> None:
    if frameA.n != frameB.n or len(frameA.psi) != len(frameB.psi):
        raise ShapeMismatch("frames differ in size or number of filters")
    if frameA.kind != frameB.kind:
        raise ShapeMismatch(f"frame kinds differ: {frameA.kind} vs {frameB.kind}")


def _top_sv_squared(blocks, M: WeightMatrix) -> float:
    stacked = np.vstack([M.M @ B @ M.M_inv for B in blocks])
    return float(np.linalg.norm(stacked, 2) ** 2)


def _aligned(frame: WaveletFrame, perm) -> WaveletFrame:
    return frame if perm is None else frame.permuted(perm)


def frame_distance(frameA, frameB, M: WeightMatrix, perm: Optional[Sequence[int]] = None) -> float:
    """A_Pi = sup over ||x||_M = 1 of ||W x - Pi W' Pi^T x||^2 (squared, exact)."""
    _check_frames(frameA, frameB)
    B = _aligned(frameB, perm)
    return _top_sv_squared([F - G for F, G in zip(frameA.matrices, B.matrices)], M)


def frame_gain(frameB, M: WeightMatrix, perm: Optional[Sequence[int]] = None) -> float:
    """C_Pi = sup over ||x||_M = 1 of ||Pi W' Pi^T x||^2 (squared, exact)."""
    return _top_sv_squared(_aligned(frameB, perm).matrices, M)


# ---------------------------------------------------------------------------
# wavelet stability with M = I
# ---------------------------------------------------------------------------


def _require_identity(pair: GraphPair) -> None:
    for s in (pair.sysA, pair.sysB):
        if not np.array_equal(s.M.M, np.eye(s.n)):
            raise HypothesisViolated("wavelet stability theorems assume M = I on both graphs")


def aligned_eigenvectors(sysA: DiffusionSystem, sysB: DiffusionSystem, cluster_tol: float = 1e-8) -> np.ndarray:
    """Eigenvectors of the second system rotated to best match the first.

    Columns of ``V'`` are only determined up to an orthogonal change of basis
    inside each eigenspace. Within every cluster of (nearly) equal
    ``lambda'_i`` the block is replaced by the orthogonal Procrustes fit to
    the matching block of ``V``, which for simple eigenvalues is a sign flip.
    Both matrices still diagonalise their own T.
    """
    V, Vb = sysA.V, np.array(sysB.V)
    lam = sysB.lambdas
    start = 0
    n = lam.size
    while start < n:
        stop = start + 1
        while stop < n and abs(lam[stop] - lam[stop - 1]) <= cluster_tol:
            stop += 1
        block = Vb[:, start:stop]
        U, _, Wt = np.linalg.svd(block.T @ V[:, start:stop])
        Vb[:, start:stop] = block @ (U @ Wt)
        start = stop
    return Vb


def check_wavelet_stability_tight(pair: GraphPair, J: int, envelope: float | None = None) -> StabilityRecord:
    """Tight frame, M = I.

    ``V'`` is first aligned with ``V`` (see :func:`aligned_eigenvectors`).

    ``lhs`` is ||W - W'||^2. The headline quantity
    ``2^J sup_i |lambda_i - lambda'_i|^2 + ||V - V'||^2`` only bounds ``lhs``
    up to an unspecified constant, so it is reported (with the ratio) while
    the pass flag uses the fully explicit bound
    ``3 sup_i sum_j |q_j(lambda_i) - q_j(lambda'_i)|^2 + 6 ||V - V'||^2``.
    ``envelope``, if given, additionally caps the ratio.
    """
    _require_identity(pair)
    A, B = pair.sysA, pair.sysB
    lhs = frame_distance(build_frame(A, J, "tight"), build_frame(B, J, "tight"), A.M)
    dlam = np.abs(A.lambdas - B.lambdas)[1:]
    dV = float(np.linalg.norm(A.V - aligned_eigenvectors(A, B), 2))
    structured = 2.0**J * float(dlam.max(initial=0.0)) ** 2 + dV**2
    dq = [f(A.lambdas) - f(B.lambdas) for f in FilterBank(J, "tight").filters]
    explicit = 3.0 * float(np.max(np.sum(np.square(dq), axis=0))) + 6.0 * dV**2
    ratio = lhs / structured if structured > 0 else None
    rec = _record(
        "wavelet_stability_tight",
        lhs,
        explicit,
        structured_rhs=structured,
        empirical_constant=ratio,
        lambda1_star=pair.lambda1_star,
    )
    if envelope is not None and ratio is not None and ratio > envelope:
        rec.passed = False
    return rec


def deflated(sys: DiffusionSystem) -> np.ndarray:
    """T with its lead eigenpair removed: T - v0 v0^T."""
    v = sys.V[:, 0]
    return sys.T - np.outer(v, v)


def geometric_constant(lambda1_star: float, J: int) -> float:
    """sum_{j=0}^{J} 4^j (lambda1*)^(2^(j+1) - 2)."""
    return float(sum(4.0**j * lambda1_star ** (2 ** (j + 1) - 2) for j in range(J + 1)))


def check_wavelet_stability_poly(pair: GraphPair, J: int) -> list[StabilityRecord]:
    """Polynomial frame, M = I, together with the two lemmas its proof rests on.

    Returns the main record followed by the geometric-sum lemma, the
    lead-eigenvector lemma and the deflation identity.
    """
    _require_identity(pair)
    A, B = pair.sysA, pair.sysB
    lam = pair.lambda1_star
    lhs = frame_distance(build_frame(A, J, "poly"), build_frame(B, J, "poly"), A.M)
    dT = float(np.linalg.norm(A.T - B.T, 2))
    Tb, Tb2 = deflated(A), deflated(B)
    dTb = float(np.linalg.norm(Tb - Tb2, 2))
    c_geo = geometric_constant(lam, J)

    powers_gap = 0.0
    P, P2 = Tb.copy(), Tb2.copy()
    for j in range(J + 1):
        powers_gap += float(np.linalg.norm(P - P2, 2)) ** 2
        P, P2 = P @ P, P2 @ P2

    v, v2 = A.V[:, 0], B.V[:, 0]
    dv2 = float(np.sum((v - v2) ** 2))
    d_proj = float(np.linalg.norm(np.outer(v, v) - np.outer(v2, v2), 2))
    gap = 1.0 - lam
    # ||W - W'||^2 <= 4(||vv^T - v'v'^T||^2 + sum_j ||Tb^(2^j) - Tb'^(2^j)||^2), then
    # ||vv^T - v'v'^T||^2 <= 8 dT / gap and ||Tb - Tb'||^2 <= 2 dT^2 + 16 dT / gap
    explicit = 4.0 * (8.0 * dT / gap + c_geo * (2.0 * dT**2 + 16.0 * dT / gap))
    structured = dT**2 + dT
    return [
        _record(
            "wavelet_stability_poly",
            lhs,
            explicit,
            structured_rhs=structured,
            empirical_constant=(lhs / structured if structured > 0 else None),
            intermediate_rhs=4.0 * (d_proj**2 + powers_gap),
            lambda1_star=lam,
        ),
        _record("deflated_power_sum", powers_gap, c_geo * dTb**2, constant=c_geo),
        _record("lead_eigenvector", dv2, 2.0 * dT / gap),
        _record(
            "deflation_kills_lead",
            max(np.linalg.norm(Tb @ v), np.linalg.norm(Tb2 @ v2)),
            0.0,
        ),
    ]


# ---------------------------------------------------------------------------
# general M
# ---------------------------------------------------------------------------


def check_transfer(pair: GraphPair, J: int, kind: str = "poly") -> list[StabilityRecord]:
    """Frame distance for K versus T, and the cross-graph upper frame bound.

    ``||W^K - W^K'||^2 <= 6(||W^T - W^T'||^2 + kappa^2 (kappa + 1)^2)`` and
    ``C(G, G') <= R^4``.
    """
    A, B = pair.sysA, pair.sysB
    kappa, big_r = alignment_metrics(pair)
    WK, WK2 = build_frame(A, J, kind), build_frame(B, J, kind)
    TA, TB = with_weight(A, "identity"), with_weight(B, "identity")
    dist_T = frame_distance(build_frame(TA, J, kind), build_frame(TB, J, kind), TA.M)
    dist_K = frame_distance(WK, WK2, A.M)
    gain = frame_gain(WK2, A.M)
    return [
        _record(
            "transfer",
            dist_K,
            6.0 * (dist_T + kappa**2 * (kappa + 1.0) ** 2),
            kappa=kappa,
            T_distance=dist_T,
        ),
        _record("cross_frame_bound", gain, big_r**4, R=big_r),
    ]


def check_diffusion_distance(pair: GraphPair) -> StabilityRecord:
    """||T - T'||_2 <= kappa (1 + R^3) + R ||K - K'||_M."""
    kappa, big_r = alignment_metrics(pair)
    dT, dK = diffusion_distances(pair)
    return _record("diffusion_distance", dT, kappa * (1.0 + big_r**3) + big_r * dK, dK=dK)


def check_alignment_consistency(pair: GraphPair) -> StabilityRecord:
    kappa, big_r = alignment_metrics(pair)
    return _record("alignment_consistency", big_r, kappa + 1.0, kappa=kappa)


# ---------------------------------------------------------------------------
# scattering stability
# ---------------------------------------------------------------------------


def _require_modulus_isometry(*systems: DiffusionSystem) -> None:
    for s in systems:
        if not s.M.is_diagonal:
            raise HypothesisViolated(
                "scattering bounds need |.| to be nonexpansive on L^2(G, M); "
                "this holds for diagonal M only"
            )


def _layer_sums(C: float, lo: int, hi: int, inner_offset: int) -> float:
    """sum_{m=lo}^{hi} sum_{k=0}^{m - inner_offset} C^(k/2)."""
    r = math.sqrt(max(C, 0.0))
    return float(sum(sum(r**k for k in range(m - inner_offset + 1)) for m in range(lo, hi + 1)))


def transported_mu(mu_b: np.ndarray, M_b: WeightMatrix, M_a: WeightMatrix) -> np.ndarray:
    """The vector representing ``y -> <mu_b, y>_{M_b}`` in the inner product of ``M_a``."""
    G_a = M_a.M.T @ M_a.M
    G_b = M_b.M.T @ M_b.M
    return np.linalg.solve(G_a, G_b @ mu_b)


def scattering_bounds(A_val, C_val, mu_a, mu_b_eff, M, x_norm, lo, hi) -> tuple[float, float]:
    """Right-hand sides of the windowed and non-windowed stability bounds."""
    windowed = math.sqrt(2.0 * max(A_val, 0.0)) * _layer_sums(C_val, lo, hi, 0) * x_norm
    dmu = weighted_norm(mu_a - mu_b_eff, M)
    nonwindowed = (
        math.sqrt(2.0)
        * (
            (hi - lo + 1) * dmu
            + weighted_norm(mu_b_eff, M) * math.sqrt(max(A_val, 0.0)) * _layer_sums(C_val, lo, hi, 1)
        )
        * x_norm
    )
    return windowed, nonwindowed


def candidate_permutations(pair: GraphPair, mode: str = "search", limit: int = EXHAUSTIVE_LIMIT):
    """Permutations to try when aligning the second graph with the first.

    ``"search"`` is exhaustive up to ``limit`` vertices and otherwise returns
    the identity plus a degree-sorted matching (not optimal in general).
    ``"exhaustive"`` insists on all of S_n.
    """
    n = pair.n
    if mode == "identity":
        return [tuple(range(n))], True
    if n <= limit or mode == "exhaustive":
        if math.factorial(n) > math.factorial(limit):
            raise BudgetExceeded(f"exhaustive search over S_{n} exceeds the {limit}! budget")
        return list(itertools.permutations(range(n))), True
    dA = pair.sysA.graph.degrees
    dB = pair.sysB.graph.degrees
    sigma = np.empty(n, dtype=int)
    sigma[np.argsort(dA, kind="stable")] = np.argsort(dB, kind="stable")
    return [tuple(range(n)), tuple(sigma.tolist())], False


def check_scattering_stability(
    pair: GraphPair,
    J: int,
    kind: str,
    x,
    layers: tuple[int, int] = (0, 2),
    mu: str = "u0",
    perm=None,
    check_all: bool = False,
) -> list[StabilityRecord]:
    """Windowed and non-windowed scattering stability.

    With ``perm=None`` the frames are compared as given, using A = A_I and
    C = C_I. With ``perm`` a sequence, or ``"search"``, the second graph is
    relabelled by each candidate permutation (frame ``Pi W' Pi^T``, weight
    ``Pi M' Pi^T``, weighting vector ``Pi mu'``) and the bound with
    A_Pi, C_Pi is checked at the permutation minimising the non-windowed
    right-hand side; ``check_all`` checks every candidate.
    """
    A, B = pair.sysA, pair.sysB
    _require_modulus_isometry(A, B)
    lo, hi = layers
    x = np.asarray(x, dtype=float)
    x_norm = weighted_norm(x, A.M)
    frame_a = build_frame(A, J, kind)
    frame_b = build_frame(B, J, kind)
    out_a = scatter(ScatteringConfig(frame_a, lo, hi, mu=mu), x)
    mu_a = resolve_mu(mu, A.M, frame_a)
    mu_b = resolve_mu(mu, B.M, frame_b)

    def evaluate(sigma):
        if sigma is None:
            fb, Mb, mub = frame_b, B.M, mu_b
        else:
            sigma = np.asarray(sigma)
            fb, Mb, mub = frame_b.permuted(sigma), B.M.permuted(sigma), mu_b[sigma]
        A_val = frame_distance(frame_a, fb, A.M)
        C_val = frame_gain(fb, A.M)
        out_b = scatter(ScatteringConfig(fb, lo, hi, mu=mub, M=Mb), x)
        lhs_w, lhs_n = scattering_distance(out_a, out_b, A.M)
        rhs_w, rhs_n = scattering_bounds(A_val, C_val, mu_a, transported_mu(mub, Mb, A.M), A.M, x_norm, lo, hi)
        return dict(A=A_val, C=C_val, lhs_w=lhs_w, lhs_n=lhs_n, rhs_w=rhs_w, rhs_n=rhs_n)

    if perm is None:
        r = evaluate(None)
        return [
            _record("scattering_stability_windowed", r["lhs_w"], r["rhs_w"], A=r["A"], C=r["C"]),
            _record("scattering_stability_nonwindowed", r["lhs_n"], r["rhs_n"], A=r["A"], C=r["C"]),
        ]

    if isinstance(perm, str):
        candidates, optimal = candidate_permutations(pair, perm)
    else:
        candidates, optimal = [tuple(int(i) for i in perm)], False
    if check_all:
        results = [(s, evaluate(s)) for s in candidates]
    else:
        # rank by the bound first; only the minimiser needs a scattering pass
        ranked = []
        for s in candidates:
            fb = frame_b.permuted(np.asarray(s))
            A_val = frame_distance(frame_a, fb, A.M)
            C_val = frame_gain(fb, A.M)
            mub_eff = transported_mu(mu_b[np.asarray(s)], B.M.permuted(s), A.M)
            ranked.append((scattering_bounds(A_val, C_val, mu_a, mub_eff, A.M, x_norm, lo, hi)[1], s))
        best = min(ranked, key=lambda t: t[0])[1]
        results = [(best, evaluate(best))]
    best_sigma, best = min(results, key=lambda t: t[1]["rhs_n"])
    worst_w = max(r["lhs_w"] - r["rhs_w"] for _, r in results)
    worst_n = max(r["lhs_n"] - r["rhs_n"] for _, r in results)
    info = dict(
        permutation=list(best_sigma),
        candidates=len(candidates),
        exhaustive=optimal,
        A=best["A"],
        C=best["C"],
    )
    rec_w = _record("permuted_stability_windowed", best["lhs_w"], best["rhs_w"], **info, max_violation=worst_w)
    rec_n = _record("permuted_stability_nonwindowed", best["lhs_n"], best["rhs_n"], **info, max_violation=worst_n)
    rec_w.passed = rec_w.passed and worst_w <= TOL
    rec_n.passed = rec_n.passed and worst_n <= TOL
    return [rec_w, rec_n]


def check_partial_invariance(sys: DiffusionSystem, J: int, kind: str, sigma, x, layers=(0, 2)) -> list[StabilityRecord]:
    """Windowed scattering is invariant up to ``lambda_1^t`` when M = D^{1/2}.

    Checks ``||S' Pi x - S x|| <= lambda_1^t ||Pi - I||_M (1 + n ||d||_inf / d_min)^{1/2} ||x||_M``
    and the ingredient ``Pi u_0 = u_0``.
    """
    from .graph_core import permutation_matrix, permuted_system

    d = sys.graph.degrees
    if sys.M.kind != "d_sqrt" or not np.allclose(sys.M.M, np.diag(np.sqrt(d)), rtol=0, atol=1e-12):
        raise HypothesisViolated("partial invariance requires M = D^{1/2}")
    sigma = np.asarray(sigma)
    x = np.asarray(x, dtype=float)
    lo, hi = layers
    sys_p = permuted_system(sys, sigma)
    frame = build_frame(sys, J, kind)
    frame_p = build_frame(sys_p, J, kind)
    out = scatter(ScatteringConfig(frame, lo, hi), x)
    out_p = scatter(ScatteringConfig(frame_p, lo, hi), x[sigma])
    lhs, _ = scattering_distance(out_p, out, sys.M)
    Pi = permutation_matrix(sigma)
    t = FilterBank(J, kind).lowpass_exponent
    rhs = (
        sys.lambda1**t
        * operator_norm_weighted(Pi - np.eye(sys.n), sys.M)
        * math.sqrt(1.0 + sys.n * d.max() / d.min())
        * weighted_norm(x, sys.M)
    )
    u0 = sys.U_basis[:, 0]
    return [
        _record("partial_invariance", lhs, rhs, t=t, lambda1=sys.lambda1),
        _record("lead_vector_fixed", float(np.max(np.abs(Pi @ u0 - u0))), 0.0),
    ]


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class StabilityReport:
    kappa: float
    bigR: float
    lambda1: float
    lambda1_prime: float
    lambda1_star: float
    eigenvalue_distance: float
    eigenvector_distance: float
    dT: float
    dK: float
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def as_dict(self) -> dict:
        return {
            "metadata": {
                "kappa": self.kappa,
                "R": self.bigR,
                "lambda1": self.lambda1,
                "lambda1_prime": self.lambda1_prime,
                "lambda1_star": self.lambda1_star,
                "eigenvalue_distance": self.eigenvalue_distance,
                "eigenvector_distance": self.eigenvector_distance,
                "dT": self.dT,
                "dK": self.dK,
                "pass": self.passed,
            },
            "records": [r.as_dict() for r in self.records],
        }


def stability_report(
    pair: GraphPair,
    J: int,
    kind: str = "poly",
    x=None,
    layers=(0, 2),
    mu: str = "u0",
    perm=None,
) -> StabilityReport:
    """Every applicable check for one pair of graphs.

    Checks whose hypotheses fail for this pair (M != I for the wavelet
    theorems, non-diagonal M for scattering) are skipped.
    """
    A, B = pair.sysA, pair.sysB
    kappa, big_r = alignment_metrics(pair)
    dT, dK = diffusion_distances(pair)
    report = StabilityReport(
        kappa=kappa,
        bigR=big_r,
        lambda1=A.lambda1,
        lambda1_prime=B.lambda1,
        lambda1_star=pair.lambda1_star,
        eigenvalue_distance=float(np.max(np.abs(A.lambdas - B.lambdas))),
        eigenvector_distance=float(np.linalg.norm(A.V - aligned_eigenvectors(A, B), 2)),
        dT=dT,
        dK=dK,
    )
    recs = report.records
    recs.append(check_alignment_consistency(pair))
    recs.append(check_diffusion_distance(pair))
    recs.extend(check_transfer(pair, J, kind))
    plain = GraphPair(with_weight(A, "identity"), with_weight(B, "identity"))
    recs.append(check_wavelet_stability_tight(plain, J))
    recs.extend(check_wavelet_stability_poly(plain, J))
    if A.M.is_diagonal and B.M.is_diagonal:
        if x is None:
            x = np.random.default_rng(0).standard_normal(pair.n)
        recs.extend(check_scattering_stability(pair, J, kind, x, layers, mu))
        if perm is not None and not (isinstance(perm, str) and perm == "identity"):
            recs.extend(check_scattering_stability(pair, J, kind, x, layers, mu, perm=perm))
    return report
