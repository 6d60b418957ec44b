import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biangle.errors import DomainError, IndexRangeError, ParameterDomainError
from biangle.geometry import sym_map
from biangle.koornwinder import (
    BasisIndex,
    BiangleParams,
    apply_lowering,
    basis_minus,
    basis_orthonormal,
    basis_plus,
    check_quadratic_transform,
    kernel_minus,
    kernel_plus,
    lowering_deviation,
    monic_basis,
    monomial_index,
    product_form_deviation,
    selberg_constant,
    shifted_weight,
    weight_W,
)
from biangle.opoly1d import JacobiPair, recurrence_jacobi
from biangle.quadrature import adaptive_integrate, integrate, omega_rule_jacobi, omega_weight_integral

PAIRS = [(0.0, 0.0), (0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)]


def interior_points(rng, m):
    x, y = rng.uniform(-0.95, 0.95, (2, m))
    x, y = np.minimum(x, y), np.maximum(x, y)
    keep = y - x > 0.05
    return sym_map(x[keep], y[keep])


def gram(p, N):
    rule = omega_rule_jacobi(p.alpha, p.beta, p.gamma, 2 * N)
    V = np.array([basis_orthonormal(p, k, n, *rule.points) for k, n in monomial_index(N)])
    return (V * rule.weights) @ V.T


def test_selberg_values():
    assert selberg_constant(0, 0, -0.5) == pytest.approx(0.25, rel=1e-14)
    assert selberg_constant(0, 0, 0.5) == pytest.approx(0.375, rel=1e-14)
    assert selberg_constant(0.3, 1.2, 0.7) == pytest.approx(selberg_constant(1.2, 0.3, 0.7), rel=1e-14)


@pytest.mark.parametrize("a,b,g", [(0, 0, -0.5), (0, 0, 0.5), (0.5, -0.5, 0.5), (1.3, 0.2, 0.1)])
def test_selberg_against_normalization_oracle(a, b, g):
    raw = omega_weight_integral(a, b, g)
    assert 2 * selberg_constant(a, b, g) * raw == pytest.approx(1.0, abs=1e-9)


def test_weight_values():
    p = BiangleParams(0, 0, -0.5)
    assert weight_W(p, 0.0, -0.25) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(DomainError):
        weight_W(p, 0.0, 0.0)


def test_parameter_domain():
    for bad in [(-1.0, 0, 0), (0, 0, -1.0), (-0.9, 0, -0.7)]:
        with pytest.raises(ParameterDomainError):
            BiangleParams(*bad)
    with pytest.raises(IndexRangeError):
        BasisIndex(3, 2, "minus")
    with pytest.raises(IndexRangeError):
        basis_minus(recurrence_jacobi(JacobiPair(0, 0), 4), 3, 2, 0.0, -0.5)


def test_shifted_weight_ratio():
    p = BiangleParams(0.5, -0.5, -0.5)
    assert shifted_weight(p, 0, 0) == p
    q = shifted_weight(p, 1, 1)
    u, v = interior_points(np.random.default_rng(0), 30)
    ratio = weight_W(q, u, v) / ((1 - u + v) * (1 + u + v) * weight_W(p, u, v))
    assert np.ptp(ratio) < 1e-12 * ratio.max()
    assert ratio[0] == pytest.approx(p.d(1, 1), rel=1e-12)
    # independent route to d^{(1,1)}: ratio of adaptive normalizations
    raw = omega_weight_integral(0.5, -0.5, -0.5) / omega_weight_integral(1.5, 0.5, -0.5)
    assert p.d(1, 1) == pytest.approx(raw, rel=1e-8)


def test_basis_values():
    t = recurrence_jacobi(JacobiPair(0, 0), 6)
    assert basis_minus(t, 0, 0, 0.3, -0.5) == pytest.approx(1.0)
    # p_1 = √3 x, so P_{0,1} = (p_1(x) + p_1(y))/√2 = √(3/2) u
    assert basis_minus(t, 0, 1, 1.0, 0.0) == pytest.approx(math.sqrt(1.5), rel=1e-14)
    assert basis_plus(t, 0, 0, 0.3, -0.2) == pytest.approx(1.0, rel=1e-14)


def test_plus_basis_continuous_at_parabola():
    t = recurrence_jacobi(JacobiPair(0.5, 0.0), 10)
    x = 0.3
    on = basis_plus(t, 2, 4, 2 * x, x * x)
    for eps in (1e-4, 1e-5, 1e-6):
        near = basis_plus(t, 2, 4, *sym_map(x - eps, x + eps))
        assert near == pytest.approx(on, abs=1e-6)
    assert basis_plus(t, 2, 4, *sym_map(x - 1e-9, x + 1e-9)) == pytest.approx(on, abs=1e-8)


@pytest.mark.parametrize("a,b", PAIRS)
@pytest.mark.parametrize("g", [-0.5, 0.5])
def test_gram_identity(a, b, g):
    G = gram(BiangleParams(a, b, g), 8)
    assert np.abs(G - np.eye(len(G))).max() < 1e-10


def test_monic_basis():
    p = BiangleParams(0.5, -0.5, -0.5)
    mb = monic_basis(p, 4)
    rng = np.random.default_rng(1)
    u, v = interior_points(rng, 20)
    assert np.allclose(mb(0, 0, u, v), 1.0)
    m1 = integrate(omega_rule_jacobi(0.5, -0.5, -0.5, 2), lambda u, v: u)
    assert np.allclose(mb(0, 1, u, v), u - m1, atol=1e-13)
    for k, n in [(0, 2), (1, 3), (4, 4)]:
        r = mb(k, n, u, v) / basis_orthonormal(p, k, n, u, v)
        assert np.ptp(r) < 1e-9 * abs(r[0])


def test_monic_general_gamma_orthogonal():
    p = BiangleParams(0.0, 0.5, 1.5)
    mb = monic_basis(p, 3)
    rule = omega_rule_jacobi(0.0, 0.5, 1.5, 6)
    V = np.array([mb(k, n, *rule.points) for k, n in monomial_index(3)])
    G = (V * rule.weights) @ V.T
    assert np.abs(G - np.diag(np.diag(G))).max() < 1e-12
    assert np.allclose(np.diag(G), mb.norms_sq, rtol=1e-10)


def test_monic_non_half_integer_gamma_by_adaptive_moments():
    p = BiangleParams(0.3, -0.2, 0.2)
    mb = monic_basis(p, 2)
    for (k1, n1), (k2, n2) in [((0, 1), (0, 0)), ((1, 2), (0, 1)), ((0, 2), (1, 2))]:
        ip = adaptive_integrate(p, "omega", lambda u, v: mb(k1, n1, u, v) * mb(k2, n2, u, v), 1e-10)
        assert abs(ip) < 1e-8


@pytest.mark.parametrize("kernel,g", [(kernel_minus, -0.5), (kernel_plus, 0.5)])
def test_kernels(kernel, g):
    rng = np.random.default_rng(2)
    for a, b in PAIRS:
        p = BiangleParams(a, b, g)
        t = p.table(12)
        z = tuple(c[0] for c in interior_points(rng, 5))
        assert kernel(t, 0, z, z) == pytest.approx(1.0, rel=1e-13)
        for n in (3, 8):
            rule = omega_rule_jacobi(a, b, g, 2 * n)
            c = rng.normal(size=(n + 1, n + 1))
            q = lambda u, v: sum(c[i, j] * u**i * v**j for i in range(n + 1) for j in range(n + 1 - i))
            zz = tuple(np.full_like(rule.points[0], s) for s in z)
            val = np.dot(rule.weights, kernel(t, n, zz, rule.points) * q(*rule.points))
            assert val == pytest.approx(q(*z), abs=1e-8)
            w = tuple(c[1] for c in interior_points(rng, 5))
            brute = sum(basis_orthonormal(p, k, m, *z) * basis_orthonormal(p, k, m, *w) for k, m in monomial_index(n))
            assert kernel(t, n, z, w) == pytest.approx(brute, abs=1e-10)
            assert kernel(t, n, z, w) == pytest.approx(kernel(t, n, w, z), abs=1e-12)


def test_lowering_operator():
    p = BiangleParams(0.0, 0.0, -0.5)
    for n in range(1, 5):
        assert lowering_deviation(p, n, n) < 1e-6
    assert lowering_deviation(p, 0, 1, samples=10) < 1e-4
    assert lowering_deviation(p, 1, 3) < 1e-4
    with pytest.raises(DomainError):
        apply_lowering(p, 1, 2, (1.999, 0.999))


def test_quadratic_transform_examples():
    assert check_quadratic_transform(0.5, -0.5, 0, 1) < 1e-9
    assert check_quadratic_transform(0.5, -0.5, 2, 2) < 1e-9
    for a in (-0.5, 0.5):
        for b in (-0.5, 0.5):
            for n in range(4):
                for k in range(n + 1):
                    assert product_form_deviation(a, b, -0.5, k, n) < 1e-9


@settings(max_examples=20, deadline=None)
@given(
    a=st.sampled_from([-0.5, 0.0, 0.5, 1.0]),
    b=st.sampled_from([-0.5, 0.0, 0.5]),
    g=st.sampled_from([-0.5, 0.5]),
    n=st.integers(0, 6),
    seed=st.integers(0, 1000),
)
def test_kernel_symmetry_property(a, b, g, n, seed):
    p = BiangleParams(a, b, g)
    kern = kernel_minus if g == -0.5 else kernel_plus
    u, v = interior_points(np.random.default_rng(seed), 10)
    z, w = (u[0], v[0]), (u[1], v[1])
    t = p.table(n + 3)
    assert kern(t, n, z, w) == pytest.approx(kern(t, n, w, z), rel=1e-11, abs=1e-11)
    assert kern(t, n, z, z) > 0
