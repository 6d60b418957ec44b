import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_jacobi

from biangle.errors import DomainError, ParameterDomainError
from biangle.opoly1d import (
    JacobiPair,
    WeightSpec1D,
    cd_kernel,
    envelope_bound,
    eval_all,
    eval_all_with_derivative,
    eval_jacobi_classical,
    gauss_rule,
    jacobi_gauss_rule,
    jacobi_norm_sq,
    kernel_ij,
    lebesgue_1d,
    partial_sum_1d,
    partial_sum_ij,
    recurrence_jacobi,
    recurrence_stieltjes,
    shifted_table,
    weight_eval_gj,
)

PAIRS = [(0.0, 0.0), (0.5, 0.5), (0.5, -0.5), (-0.5, -0.5), (1.0, 2.5)]


def test_legendre_oracles():
    t = recurrence_jacobi(JacobiPair(0, 0), 6)
    assert t.h[0] == 1.0
    # orthonormal Legendre under dx/2: p_1 = √3 x, p_2 = √5 (3x²-1)/2
    p = eval_all(t, 2, np.array([0.3]))[:, 0]
    assert p[1] == pytest.approx(math.sqrt(3) * 0.3, abs=1e-15)
    assert p[2] == pytest.approx(math.sqrt(5) * (3 * 0.09 - 1) / 2, abs=1e-15)


def test_monic_norms_legendre():
    t = recurrence_jacobi(JacobiPair(0, 0), 6)
    assert t.h[1] == pytest.approx(1 / 3, rel=1e-14)
    assert jacobi_norm_sq(0, 0, 1) == pytest.approx(1 / 3, rel=1e-14)
    assert jacobi_norm_sq(0, 0, 2) == pytest.approx(1 / 5, rel=1e-14)


@pytest.mark.parametrize("a,b", PAIRS)
def test_classical_values_match_scipy(a, b):
    x = np.linspace(-0.99, 0.99, 37)
    for n in range(13):
        mine = eval_jacobi_classical(JacobiPair(a, b), n, x)
        assert np.allclose(mine, eval_jacobi(n, a, b, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("a,b", PAIRS)
def test_table_invariants(a, b):
    t = recurrence_jacobi(JacobiPair(a, b), 30)
    assert np.all(t.b[1:] > 0)
    assert np.all(t.lead > 0)
    assert t.h[0] == 1.0
    x = np.linspace(-1, 1, 11)
    P = eval_all(t, 29, x)
    for n in range(1, 28):
        lhs = x * P[n]
        rhs = t.b[n + 1] * P[n + 1] + t.a[n] * P[n] + t.b[n] * P[n - 1]
        assert np.allclose(lhs, rhs, atol=1e-11)


@pytest.mark.parametrize("a,b", PAIRS)
def test_gram_identity(a, b):
    N = 20
    t = recurrence_jacobi(JacobiPair(a, b), 2 * N + 2)
    rule = gauss_rule(t, N + 1)
    assert rule.exact_degree >= 2 * N
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    P = eval_all(t, N, rule.nodes)
    G = (P * rule.weights) @ P.T
    assert np.abs(G - np.eye(N + 1)).max() < 1e-10


def test_stieltjes_matches_jacobi_and_is_resolution_stable():
    w = WeightSpec1D.jacobi(0.5, -0.5)
    s1 = recurrence_stieltjes(w, 12)
    t = recurrence_jacobi(JacobiPair(0.5, -0.5), 12)
    assert np.abs(s1.a[:12] - t.a[:12]).max() < 1e-10
    assert np.abs(s1.b[:12] - t.b[:12]).max() < 1e-10
    res = 200
    a1 = recurrence_stieltjes(w, 10, resolution=res)
    a2 = recurrence_stieltjes(w, 10, resolution=2 * res)
    assert np.abs(a1.a - a2.a).max() < 1e-10
    assert np.abs(a1.b - a2.b).max() < 1e-10


def test_stieltjes_interior_node_gram():
    w = WeightSpec1D(0.0, 0.0, ((0.2, -0.3),))
    t = recurrence_stieltjes(w, 10)
    # independent check by adaptive quadrature against the weight itself
    from scipy.integrate import quad

    mass = sum(quad(lambda x: weight_eval_gj(w, x), lo, hi, limit=200)[0] for lo, hi in ((-1, 0.2), (0.2, 1)))

    def ip(m, k):
        f = lambda x: float(weight_eval_gj(w, x)) * eval_all(t, 10, np.array([x]))[m, 0] * eval_all(t, 10, np.array([x]))[k, 0]
        return sum(quad(f, lo, hi, limit=200)[0] for lo, hi in ((-1, 0.2), (0.2, 1))) / mass

    for m, k in [(0, 0), (1, 1), (3, 3), (1, 2), (0, 4)]:
        assert ip(m, k) == pytest.approx(float(m == k), abs=1e-7)


def test_cd_forms_agree():
    for a, b in PAIRS:
        t = recurrence_jacobi(JacobiPair(a, b), 25)
        rng = np.random.default_rng(1)
        x, y = rng.uniform(-1, 1, (2, 200))
        keep = np.abs(x - y) >= 1e-3
        x, y = x[keep], y[keep]
        for n in (0, 3, 10, 20):
            s = cd_kernel(t, n, x, y, form="sum")
            r = cd_kernel(t, n, x, y, form="ratio")
            assert np.allclose(s, r, atol=1e-12 * max(1, np.abs(s).max()))


def test_cd_confluent_limit():
    t = recurrence_jacobi(JacobiPair(0.5, 0.0), 20)
    x = np.array([0.3, -0.7])
    d = cd_kernel(t, 10, x, x, form="ratio")
    s = cd_kernel(t, 10, x, x, form="sum")
    assert np.allclose(d, s, rtol=1e-12)


def test_derivative_matches_finite_difference():
    t = recurrence_jacobi(JacobiPair(0.5, 0.5), 10)
    x = np.array([0.1, 0.6])
    _, D = eval_all_with_derivative(t, 8, x)
    h = 1e-6
    fd = (eval_all(t, 8, x + h) - eval_all(t, 8, x - h)) / (2 * h)
    assert np.allclose(D, fd, atol=1e-7)


def test_gauss_rule_exactness():
    rule = jacobi_gauss_rule(0.0, 0.0, 5)
    assert rule.exact_degree == 9
    for k in range(10):
        exact = 0.0 if k % 2 else 1 / (k + 1)
        assert np.dot(rule.weights, rule.nodes**k) == pytest.approx(exact, abs=1e-14)


def test_partial_sum_reproduces_and_means():
    t = recurrence_jacobi(JacobiPair(0.5, -0.5), 20)
    rule = gauss_rule(t, 16)
    rng = np.random.default_rng(3)
    c = rng.normal(size=6)
    f = lambda x: np.polyval(c, x)
    x = rng.uniform(-1, 1, 20)
    assert np.abs(partial_sum_1d(t, rule, f, 5, x) - f(x)).max() < 1e-10
    mean = np.dot(rule.weights, f(rule.nodes))
    assert np.allclose(partial_sum_1d(t, rule, f, 0, x), mean)
    g = lambda x: np.cos(3 * x)
    lhs = partial_sum_1d(t, rule, lambda x: 2 * f(x) - 3 * g(x), 7, x)
    rhs = 2 * partial_sum_1d(t, rule, f, 7, x) - 3 * partial_sum_1d(t, rule, g, 7, x)
    assert np.allclose(lhs, rhs, atol=1e-13)


@pytest.mark.parametrize("i,j", [(0, 0), (1, 0), (0, 1), (1, 1)])
def test_partial_sum_ij_reproduces_weighted_polynomials(i, j):
    p = JacobiPair(0.0, 0.5)
    rng = np.random.default_rng(4)
    c = rng.normal(size=5)
    J = lambda x: (1 - x) ** (i / 2) * (1 + x) ** (j / 2)
    f = lambda x: J(x) * np.polyval(c, x)
    x = rng.uniform(-0.99, 0.99, 20)
    assert np.abs(partial_sum_ij(p, i, j, f, 4, x) - f(x)).max() < 1e-10


def test_partial_sum_ij_reduces_to_plain():
    p = JacobiPair(0.5, 0.5)
    t = recurrence_jacobi(p, 20)
    rule = gauss_rule(t, 15)
    f = lambda x: np.exp(x)
    x = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(partial_sum_ij(p, 0, 0, f, 6, x, m=15), partial_sum_1d(t, rule, f, 6, x), atol=1e-13)


def test_kernel_ij_reductions():
    p = JacobiPair(0.0, 0.0)
    t = recurrence_jacobi(p, 10)
    th, ph = 1.0, 0.5
    assert kernel_ij(p, 0, 0, 5, th, ph) == pytest.approx(cd_kernel(t, 5, math.cos(th), math.cos(ph)), rel=1e-13)
    assert kernel_ij(p, 1, 1, 3, th, ph) == pytest.approx(kernel_ij(p, 1, 1, 3, ph, th), rel=1e-13)
    t11 = recurrence_jacobi(JacobiPair(1, 1), 10)
    pref = math.sin(th / 2) * math.sin(ph / 2) * math.cos(th / 2) * math.cos(ph / 2)
    assert kernel_ij(p, 1, 1, 3, th, ph) == pytest.approx(pref * cd_kernel(t11, 3, math.cos(th), math.cos(ph)), abs=1e-12)


def test_lebesgue_1d_basics():
    for a, b in PAIRS[:4]:
        assert lebesgue_1d(JacobiPair(a, b), 0, 0, 0) == pytest.approx(1.0, abs=1e-12)
    p = JacobiPair(0.5, 0.5)
    coarse = lebesgue_1d(p, 0, 0, 8, gridsize=32, refine=False)
    fine = lebesgue_1d(p, 0, 0, 8, gridsize=64, refine=False)
    assert fine >= coarse >= 1.0


def test_envelope_values():
    assert envelope_bound(JacobiPair(-0.5, -0.5), 10, 0.0, math.pi / 2) == pytest.approx(1 / (math.pi / 2 + 0.1), rel=1e-14)
    p = JacobiPair(0.5, 0.5)
    assert envelope_bound(p, 12, 0.3, 1.1) == pytest.approx(envelope_bound(p, 12, 1.1, 0.3), rel=1e-15)


def test_weight_eval_gj():
    assert weight_eval_gj(WeightSpec1D(), 0.3) == 1.0
    assert weight_eval_gj(WeightSpec1D(0, 0, ((0.0, 1.0),)), 0.5) == pytest.approx(0.5)
    assert weight_eval_gj(WeightSpec1D.jacobi(-0.5, -0.5), 0.0) == pytest.approx(1.0)
    assert weight_eval_gj(WeightSpec1D(0, 0, ((0.0, -0.5),)), 0.0) == math.inf
    with pytest.raises(DomainError):
        weight_eval_gj(WeightSpec1D(), 1.0)


def test_parameter_domain():
    with pytest.raises(ParameterDomainError):
        JacobiPair(-1.0, 0.0)
    with pytest.raises(ParameterDomainError):
        WeightSpec1D(0.0, 0.0, ((0.5, -1.2),))


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-0.9, 3.0), b=st.floats(-0.9, 3.0), n=st.integers(0, 12),
    x=st.floats(-1, 1), y=st.floats(-1, 1),
)
def test_cd_kernel_symmetric(a, b, n, x, y):
    t = recurrence_jacobi(JacobiPair(a, b), n + 2)
    assert cd_kernel(t, n, x, y) == pytest.approx(cd_kernel(t, n, y, x), rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-0.9, 2.0), b=st.floats(-0.9, 2.0), i=st.integers(0, 2), j=st.integers(0, 2))
def test_shifted_table_gram(a, b, i, j):
    t = shifted_table(recurrence_jacobi(JacobiPair(a, b), 12), i, j, 12)
    ref = recurrence_jacobi(JacobiPair(a + i, b + j), 12)
    assert np.allclose(t.a[:10], ref.a[:10], atol=1e-12)
    assert np.allclose(t.b[:10], ref.b[:10], atol=1e-12)
