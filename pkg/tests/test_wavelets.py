import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphscat import DimensionMismatch, FilterBank, apply_frame, build_frame, diffusion_system, frame_bounds, lower_bound_constant, weighted_norm
from graphscat.harness import random_dense_weight
from graphscat.wavelets import dyadic_polynomial, frame_energy

from conftest import graph_from, graph_params

# Frozen minima of (1 - t)^2 + t^(2^(J+1)).  J = 0 is calculus (t = 1/2);
# J = 1 comes from the stationary point 2t^3 + t - 1 = 0 (see test below).
C0 = 0.5
C1 = 0.28927342393777794


def test_filter_definitions():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(dyadic_polynomial(0, 3, t), 1 - t)
    np.testing.assert_allclose(dyadic_polynomial(2, 3, t), t**2 - t**4)
    np.testing.assert_allclose(dyadic_polynomial(4, 3, t), t**8)
    with pytest.raises(ValueError):
        dyadic_polynomial(5, 3, t)


@pytest.mark.parametrize("J", range(0, 9))
def test_partition_of_unity(J):
    t = np.linspace(0.0, 1.0, 10_000)
    poly, tight = FilterBank(J, "poly"), FilterBank(J, "tight")
    assert np.max(np.abs(sum(f(t) for f in poly.filters) - 1.0)) <= 1e-12
    assert np.max(np.abs(tight.energy(t) - 1.0)) <= 1e-12


def test_filter_bank_validation():
    with pytest.raises(ValueError):
        FilterBank(-1, "poly")
    with pytest.raises(ValueError):
        FilterBank(2, "chebyshev")


def test_lowpass_exponent():
    assert FilterBank(3, "tight").lowpass_exponent == 4
    assert FilterBank(3, "poly").lowpass_exponent == 8
    assert FilterBank(0, "tight").lowpass_exponent == 0.5


def test_k2_poly_frame(k2):
    frame = build_frame(diffusion_system(k2), 0, "poly")
    np.testing.assert_allclose(frame.psi[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
    np.testing.assert_allclose(frame.phi, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    out = apply_frame(frame, [1.0, 0.0])
    np.testing.assert_allclose(out[0], [0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(out[1], [0.5, 0.5], atol=1e-15)


def test_k2_tight_frame(k2):
    # q_0(lambda) = sqrt(1 - lambda) maps eigenvalues (1, 0) to (0, 1)
    frame = build_frame(diffusion_system(k2), 0, "tight")
    np.testing.assert_allclose(frame.psi[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_apply_frame_zero_and_shape(p3):
    frame = build_frame(diffusion_system(p3), 2, "poly")
    assert all(np.all(v == 0) for v in apply_frame(frame, np.zeros(3)))
    assert len(apply_frame(frame, np.ones(3))) == 4
    with pytest.raises(DimensionMismatch):
        apply_frame(frame, np.ones(4))


@settings(max_examples=30, deadline=None)
@given(graph_params, st.integers(0, 4), st.sampled_from(["identity", "d_sqrt", "d_inv_sqrt", "dense"]))
def test_poly_filters_sum_to_identity_and_match_horner(params, J, kind):
    g, rng = graph_from(params)
    M = random_dense_weight(g.n, rng) if kind == "dense" else kind
    sys = diffusion_system(g, M)
    frame = build_frame(sys, J, "poly")
    np.testing.assert_allclose(sum(frame.matrices), np.eye(g.n), atol=1e-9)
    # independent evaluation of p_j(K) by repeated squaring of K
    powers = [sys.K]
    for _ in range(J):
        powers.append(powers[-1] @ powers[-1])
    expected = [np.eye(g.n) - sys.K] + [powers[j - 1] - powers[j] for j in range(1, J + 1)] + [powers[J]]
    for got, want in zip(frame.matrices, expected):
        assert np.max(np.abs(got - want)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(graph_params, st.integers(0, 4), st.sampled_from(["identity", "d_sqrt", "d_inv_sqrt", "dense"]))
def test_tight_isometry_and_poly_sandwich(params, J, kind):
    g, rng = graph_from(params)
    M = random_dense_weight(g.n, rng) if kind == "dense" else kind
    sys = diffusion_system(g, M)
    x = rng.standard_normal(g.n)
    nx = weighted_norm(x, sys.M) ** 2
    assert abs(frame_energy(build_frame(sys, J, "tight"), x) - nx) <= 1e-9 * nx
    e = frame_energy(build_frame(sys, J, "poly"), x)
    assert lower_bound_constant(J) * nx - 1e-9 <= e <= (1 + 1e-9) * nx


def test_frame_bounds(k2, rng):
    from graphscat.harness import random_graph

    sys = diffusion_system(random_graph(10, rng), "d_sqrt")
    A, B = frame_bounds(build_frame(sys, 2, "tight"))
    assert A == pytest.approx(1.0, abs=1e-12) and B == pytest.approx(1.0, abs=1e-12)
    A, B = frame_bounds(build_frame(sys, 2, "poly"))
    assert lower_bound_constant(2) - 1e-12 <= A <= B <= 1.0 + 1e-12
    # on K2 the spectrum is {0, 1} where the poly energy equals 1
    assert frame_bounds(build_frame(diffusion_system(k2), 3, "poly")) == pytest.approx((1.0, 1.0))


def test_lower_bound_constant_values():
    assert lower_bound_constant(0) == pytest.approx(C0, abs=1e-12)
    assert lower_bound_constant(1) == pytest.approx(C1, abs=1e-12)


def test_c1_oracle_from_cubic():
    roots = np.roots([2.0, 0.0, 1.0, -1.0])
    t = float(roots[np.abs(roots.imag) < 1e-12].real[0])
    assert (1 - t) ** 2 + t**4 == pytest.approx(C1, abs=1e-14)


def test_c1_dense_grid():
    t = np.linspace(0, 1, 2_000_001)
    assert np.min((1 - t) ** 2 + t**4) == pytest.approx(lower_bound_constant(1), abs=1e-10)


def test_lower_bound_constant_decreasing_positive():
    vals = [lower_bound_constant(J) for J in range(10)]
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_permuted_frame_convention(p3):
    frame = build_frame(diffusion_system(p3), 1, "poly")
    sigma = [2, 0, 1]
    Pi = np.eye(3)[sigma]
    for A, B in zip(frame.permuted(sigma).matrices, frame.matrices):
        np.testing.assert_allclose(A, Pi @ B @ Pi.T, atol=0)
