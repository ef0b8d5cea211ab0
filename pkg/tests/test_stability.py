import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphscat import (
    BudgetExceeded,
    GraphPair,
    HypothesisViolated,
    ShapeMismatch,
    WaveletFrame,
    WeightMatrix,
    alignment_metrics,
    build_frame,
    check_partial_invariance,
    check_scattering_stability,
    check_transfer,
    check_wavelet_stability_poly,
    check_wavelet_stability_tight,
    diffusion_distances,
    diffusion_system,
    frame_distance,
    frame_gain,
    load_graph,
    permuted_system,
    stability_report,
    weighted_norm,
    with_weight,
)
from graphscat.harness import jitter_graph, perturbed_pair, random_dense_weight, random_diagonal_weight, random_graph, symmetric_uniform
from graphscat.stability import aligned_eigenvectors, candidate_permutations, geometric_constant

from conftest import graph_from, graph_params


def _pair(rng, n=8, eps=0.05, M="identity"):
    g = random_graph(n, rng)
    return perturbed_pair(diffusion_system(g, M), eps, rng)


# ------------------------------------------------------------------ metrics


def test_alignment_same_weight(rng):
    g = random_graph(6, rng)
    M = random_dense_weight(6, rng)
    a = diffusion_system(g, M)
    b = diffusion_system(jitter_graph(g, 0.1, symmetric_uniform(6, rng)), M)
    assert alignment_metrics(GraphPair(a, b)) == pytest.approx((0.0, 1.0), abs=1e-12)


def test_alignment_equal_degrees(rng):
    # two different 4-cycles with the same degree vector
    g1 = load_graph([(0, 1), (1, 2), (2, 3), (3, 0)])
    g2 = load_graph([(0, 2), (2, 1), (1, 3), (3, 0)])
    for M in ("d_sqrt", "d_inv_sqrt"):
        kappa, big_r = alignment_metrics(GraphPair(diffusion_system(g1, M), diffusion_system(g2, M)))
        assert kappa == pytest.approx(0.0, abs=1e-12) and big_r == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(graph_params, st.sampled_from(["d_sqrt", "d_inv_sqrt", "random"]))
def test_alignment_consistency(params, kind):
    g, rng = graph_from(params)
    M = random_dense_weight(g.n, rng) if kind == "random" else kind
    pair = perturbed_pair(diffusion_system(g, M), 0.2, rng)
    kappa, big_r = alignment_metrics(pair)
    assert 1.0 - 1e-12 <= big_r <= kappa + 1.0 + 1e-9


def test_diffusion_distances_examples(rng):
    g = random_graph(7, rng)
    sys = diffusion_system(g)
    assert diffusion_distances(GraphPair(sys, sys)) == (0.0, 0.0)
    pair = perturbed_pair(sys, 0.1, rng)
    dT, dK = diffusion_distances(pair)
    assert dT == pytest.approx(dK, abs=1e-15)


def test_shape_mismatch(p3, k2):
    with pytest.raises(ShapeMismatch):
        GraphPair(diffusion_system(p3), diffusion_system(k2))
    with pytest.raises(ShapeMismatch):
        frame_distance(build_frame(diffusion_system(p3), 1, "poly"), build_frame(diffusion_system(p3), 2, "poly"), WeightMatrix.identity(3))
    with pytest.raises(ShapeMismatch):
        frame_distance(build_frame(diffusion_system(p3), 1, "poly"), build_frame(diffusion_system(p3), 1, "tight"), WeightMatrix.identity(3))


# --------------------------------------------------- frame distance and gain


def test_frame_distance_trivial_cases(rng):
    sys = diffusion_system(random_graph(6, rng), random_dense_weight(6, rng))
    f = build_frame(sys, 2, "tight")
    assert frame_distance(f, f, sys.M) == 0.0
    sigma = rng.permutation(6)
    inverse = np.argsort(sigma)
    # f.permuted(sigma) relabelled back by the inverse permutation is f again
    assert frame_distance(f, f.permuted(sigma), sys.M, perm=inverse) <= 1e-24


def test_frame_distance_against_random_probes(rng):
    pair = _pair(rng, 7, 0.3, random_dense_weight(7, rng))
    fa, fb = build_frame(pair.sysA, 2, "poly"), build_frame(pair.sysB, 2, "poly")
    M = pair.sysA.M
    value = frame_distance(fa, fb, M)
    best = 0.0
    for _ in range(10_000):
        v = rng.standard_normal(7)
        v /= weighted_norm(v, M)
        best = max(best, sum(weighted_norm((F - G) @ v, M) ** 2 for F, G in zip(fa.matrices, fb.matrices)))
    assert best <= value * (1 + 1e-12)
    assert best >= 0.9 * value


def test_frame_gain_examples(rng):
    pair = _pair(rng, 8, 0.1, "d_sqrt")
    fb = build_frame(pair.sysB, 3, "poly")
    assert frame_gain(fb, pair.sysB.M) <= 1 + 1e-9
    _, big_r = alignment_metrics(pair)
    assert frame_gain(fb, pair.sysA.M) <= big_r**4 + 1e-9
    zero = WaveletFrame.from_matrices([np.zeros((8, 8))] * 4, np.zeros((8, 8)))
    assert frame_gain(zero, pair.sysA.M) == 0.0


# --------------------------------------------------------- wavelet stability


def test_wavelet_stability_requires_identity(rng):
    pair = _pair(rng, 5, 0.1, "d_sqrt")
    with pytest.raises(HypothesisViolated):
        check_wavelet_stability_tight(pair, 2)
    with pytest.raises(HypothesisViolated):
        check_wavelet_stability_poly(pair, 2)


def test_wavelet_stability_identical(rng):
    sys = diffusion_system(random_graph(6, rng))
    pair = GraphPair(sys, sys)
    rec = check_wavelet_stability_tight(pair, 3)
    assert rec.lhs == 0.0 and rec.details["structured_rhs"] == 0.0
    for r in check_wavelet_stability_poly(pair, 3):
        assert r.lhs <= 1e-15 and r.passed


@pytest.mark.parametrize("kind", ["tight", "poly"])
def test_wavelet_distance_vanishes_with_perturbation(kind, rng):
    g = random_graph(9, rng)
    sys = diffusion_system(g)
    u = symmetric_uniform(9, rng)
    lhs = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        pair = GraphPair(sys, diffusion_system(jitter_graph(g, eps, u)))
        rec = check_wavelet_stability_tight(pair, 2) if kind == "tight" else check_wavelet_stability_poly(pair, 2)[0]
        assert rec.passed
        lhs.append(rec.lhs)
    assert all(b < a for a, b in zip(lhs, lhs[1:]))
    assert lhs[-1] < 1e-4 * lhs[0]


def test_single_edge_perturbation(rng):
    g = random_graph(8, rng)
    i, k = np.argwhere(np.triu(g.adjacency) > 0)[0]
    prev = np.inf
    for eps in (1e-1, 1e-2, 1e-3):
        A = np.array(g.adjacency)
        A[i, k] = A[k, i] = A[i, k] * (1 + eps)
        pair = GraphPair(diffusion_system(g), diffusion_system(type(g)(A)))
        lhs = check_wavelet_stability_tight(pair, 2).lhs
        assert lhs < prev
        prev = lhs


@settings(max_examples=25, deadline=None)
@given(graph_params, st.integers(0, 4), st.floats(1e-4, 0.3))
def test_poly_lemmas(params, J, eps):
    g, rng = graph_from(params)
    pair = perturbed_pair(diffusion_system(g), eps, rng)
    for rec in check_wavelet_stability_poly(pair, J):
        assert rec.lhs <= rec.rhs + 1e-9, rec.name
    assert check_wavelet_stability_tight(pair, J).passed


def test_lead_eigenvector_lemma_on_weighted_k2():
    # a single edge of any weight has the same normalized Laplacian
    a = diffusion_system(load_graph([(0, 1, 1.0)]))
    b = diffusion_system(load_graph([(0, 1, 3.0)]))
    lead = check_wavelet_stability_poly(GraphPair(a, b), 1)[2]
    assert lead.name == "lead_eigenvector" and lead.lhs <= 1e-30 and lead.slack >= 0


def test_deflation_kills_lead_vector(rng):
    from graphscat.stability import deflated

    sys = diffusion_system(random_graph(7, rng))
    v = sys.V[:, 0]
    assert np.max(np.abs(deflated(sys) @ v)) <= 1e-12
    assert np.linalg.norm(deflated(sys), 2) == pytest.approx(sys.lambda1, abs=1e-12)


def test_geometric_constant():
    assert geometric_constant(0.5, 0) == 1.0
    assert geometric_constant(0.5, 1) == pytest.approx(1.0 + 4 * 0.5**2)


def test_aligned_eigenvectors_fix_signs(p3):
    a = diffusion_system(p3)
    b = diffusion_system(load_graph([(0, 1, 1.2), (1, 2, 0.8)]))
    assert np.linalg.norm(a.V - b.V, 2) > 1.0  # sign conventions disagree
    Vb = aligned_eigenvectors(a, b)
    assert np.linalg.norm(a.V - Vb, 2) < 0.2
    np.testing.assert_allclose((Vb * b.lambdas) @ Vb.T, b.T, atol=1e-12)


# -------------------------------------------------------------- transfer etc.


def test_transfer_identity_weights(rng):
    pair = _pair(rng, 7, 0.1)
    transfer, cross = check_transfer(pair, 2, "poly")
    assert transfer.details["kappa"] == 0.0
    assert transfer.lhs == pytest.approx(transfer.details["T_distance"], abs=1e-15)
    assert transfer.passed and cross.passed


def test_transfer_lazy_walk_same_graph(rng):
    sys = diffusion_system(random_graph(7, rng), "d_inv_sqrt")
    transfer, _ = check_transfer(GraphPair(sys, sys), 2, "tight")
    assert transfer.details["kappa"] <= 1e-15 and transfer.lhs <= 1e-15


@settings(max_examples=25, deadline=None)
@given(graph_params, st.integers(0, 3), st.sampled_from(["tight", "poly"]), st.sampled_from(["d_sqrt", "d_inv_sqrt", "random"]))
def test_transfer_and_distance_random(params, J, kind, kind_M):
    from graphscat.stability import check_diffusion_distance

    g, rng = graph_from(params)
    M = random_dense_weight(g.n, rng) if kind_M == "random" else kind_M
    pair = perturbed_pair(diffusion_system(g, M), 0.1, rng)
    for rec in check_transfer(pair, J, kind):
        assert rec.passed, rec.as_dict()
    assert check_diffusion_distance(pair).passed


# ------------------------------------------------------- scattering stability


def test_scattering_stability_identical(rng):
    sys = diffusion_system(random_graph(6, rng), "d_sqrt")
    for rec in check_scattering_stability(GraphPair(sys, sys), 2, "tight", rng.standard_normal(6)):
        assert rec.lhs == 0.0 and rec.rhs == 0.0


def test_scattering_stability_needs_diagonal_weight(rng):
    pair = _pair(rng, 5, 0.1, random_dense_weight(5, rng))
    with pytest.raises(HypothesisViolated):
        check_scattering_stability(pair, 1, "poly", np.ones(5))


@settings(max_examples=25, deadline=None)
@given(graph_params, st.integers(0, 3), st.sampled_from(["tight", "poly"]), st.sampled_from(["identity", "d_sqrt", "d_inv_sqrt", "random"]), st.sampled_from(["u0", "ones"]), st.integers(0, 3))
def test_scattering_stability_random(params, J, kind, kind_M, mu, lo):
    g, rng = graph_from(params)
    M = random_diagonal_weight(g.n, rng) if kind_M == "random" else kind_M
    pair = perturbed_pair(diffusion_system(g, M), 0.1, rng)
    x = rng.standard_normal(g.n)
    for rec in check_scattering_stability(pair, J, kind, x, (lo, 3), mu):
        assert rec.lhs <= rec.rhs + 1e-9, rec.as_dict()


def test_permutation_search_finds_copy(rng):
    g = random_graph(6, rng)
    sys = diffusion_system(g, "d_sqrt")
    sigma = rng.permutation(6)
    pair = GraphPair(sys, permuted_system(sys, sigma))
    w, nw = check_scattering_stability(pair, 2, "poly", rng.standard_normal(6), perm="search")
    assert nw.lhs <= 1e-9 and w.lhs <= 1e-9
    assert nw.rhs <= 1e-9  # the aligned weighting vectors coincide
    assert nw.details["exhaustive"]


def test_permutation_bound_holds_for_every_candidate(rng):
    pair = _pair(rng, 5, 0.2, "d_inv_sqrt")
    for rec in check_scattering_stability(pair, 1, "tight", rng.standard_normal(5), (0, 2), perm="search", check_all=True):
        assert rec.details["max_violation"] <= 1e-9 and rec.details["candidates"] == 120


def test_permutation_budget(rng):
    pair = _pair(rng, 10, 0.1)
    with pytest.raises(BudgetExceeded):
        candidate_permutations(pair, "exhaustive")
    cands, optimal = candidate_permutations(pair, "search")
    assert len(cands) == 2 and not optimal


# ------------------------------------------------------------ partial invariance


def test_partial_invariance_identity_perm(p3, rng):
    sys = diffusion_system(p3, "d_sqrt")
    rec, fixed = check_partial_invariance(sys, 2, "poly", [0, 1, 2], rng.standard_normal(3))
    assert rec.lhs == 0.0 and fixed.lhs == 0.0


def test_partial_invariance_regular_graph(k3, rng):
    sys = diffusion_system(k3, "d_sqrt")
    x = rng.standard_normal(3)
    for sigma in ([1, 2, 0], [2, 1, 0]):
        recs = [check_partial_invariance(sys, J, "tight", sigma, x) for J in (1, 3, 5)]
        assert all(r.passed and fixed.lhs <= 1e-12 for r, fixed in recs)
        # the output is equivariant, so the difference only fades as the window widens
        assert recs[0][0].lhs > recs[1][0].lhs > recs[2][0].lhs


def test_partial_invariance_p3_end_swap(p3):
    sys = diffusion_system(p3, "d_sqrt")
    x = np.array([1.0, -0.5, 2.0])
    recs = [check_partial_invariance(sys, J, "tight", [2, 1, 0], x)[0] for J in (1, 2, 3)]
    assert all(r.passed for r in recs)
    # the bound scales with lambda_1^(2^(J-1)) and lambda_1 = 1/2
    assert recs[1].rhs == pytest.approx(recs[0].rhs * 0.5, rel=1e-12)
    assert recs[2].rhs == pytest.approx(recs[1].rhs * 0.25, rel=1e-12)
    assert recs[0].lhs > recs[1].lhs > recs[2].lhs


def test_partial_invariance_needs_sqrt_degree(p3):
    with pytest.raises(HypothesisViolated):
        check_partial_invariance(diffusion_system(p3), 1, "poly", [2, 1, 0], np.ones(3))


# ------------------------------------------------------------------- report


def test_report_fields_and_dict(rng):
    pair = _pair(rng, 6, 0.05, "d_sqrt")
    rep = stability_report(pair, 2, "poly", rng.standard_normal(6), perm="search")
    d = rep.as_dict()
    assert d["metadata"]["pass"] is True
    names = [r["name"] for r in d["records"]]
    assert {"transfer", "diffusion_distance", "permuted_stability_nonwindowed"} <= set(names)
    for r in d["records"]:
        assert set(r) >= {"lhs", "rhs", "slack", "pass"}
    assert 1.0 <= rep.bigR <= rep.kappa + 1 + 1e-9
    assert rep.lambda1_star == max(rep.lambda1, rep.lambda1_prime)
