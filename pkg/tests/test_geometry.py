import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biangle.errors import DomainError
from biangle.geometry import (
    cos_pair,
    in_omega,
    jacobian_quad,
    jacobian_sym,
    orbit4,
    quad_map,
    quad_preimage,
    sym_map,
    sym_preimage,
)

unit = st.floats(-1, 1, allow_nan=False)


def test_membership_examples():
    assert in_omega(0, -0.5)
    assert not in_omega(0, 0)
    assert not in_omega(2, 1)


def test_sym_map_examples():
    assert sym_map(-0.5, 0.5) == (0, -0.25)
    x, y = sym_preimage(0, -0.25)
    assert (x, y) == pytest.approx((-0.5, 0.5), abs=1e-15)
    with pytest.raises(DomainError):
        sym_preimage(0.0, 0.5)


def test_quad_map_examples():
    u, v = quad_map(0.5, 0.0)
    assert (u, v) == pytest.approx((0.0, -0.75), abs=1e-15)
    a, b = math.cos(math.pi / 3 - math.pi / 2), math.cos(math.pi / 3 + math.pi / 2)
    assert (a + b, a * b) == pytest.approx((u, v), abs=1e-15)
    assert quad_preimage(0.0, -0.75) == pytest.approx((0.0, 0.5), abs=1e-15)
    with pytest.raises(DomainError):
        quad_preimage(0.0, 0.1)


@settings(max_examples=100, deadline=None)
@given(t=unit)
def test_boundary_images(t):
    # diagonals go to the two lines, the square's edges to the parabola
    u, v = quad_map(t, t)
    assert 1 - u + v == pytest.approx(0.0, abs=1e-15)
    u, v = quad_map(t, -t)
    assert 1 + u + v == pytest.approx(0.0, abs=1e-15)
    u, v = quad_map(1.0, t)
    assert u * u - 4 * v == pytest.approx(0.0, abs=1e-14)


def test_orbit_degenerates():
    pts = {tuple(map(float, p)) for p in orbit4(0.4, 0.4)}
    assert len(pts) == 2
    pts = {tuple(map(float, p)) for p in orbit4(0.4, -0.4)}
    assert len(pts) == 2


@settings(max_examples=100, deadline=None)
@given(x=unit, y=unit)
def test_sym_round_trip(x, y):
    u, v = sym_map(x, y)
    a, b = sym_preimage(u, v)
    assert a <= b
    assert sorted((x, y)) == pytest.approx([a, b], abs=1e-7)  # root conditioning near x = y
    assert sym_map(a, b) == pytest.approx((u, v), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(x=unit, y=unit)
def test_quad_right_inverse_and_orbit(x, y):
    u, v = quad_map(x, y)
    a, b = quad_preimage(u, v)
    assert a <= b
    assert quad_map(a, b) == pytest.approx((u, v), abs=1e-13)
    for p in orbit4(x, y):
        assert quad_map(*p) == pytest.approx((u, v), abs=1e-15)
    assert (1 + u + v) >= -1e-15 and (1 - u + v) >= -1e-15 and u * u - 4 * v >= -1e-15


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-0.95, 0.95), y=st.floats(-0.95, 0.95))
def test_cos_pair_is_sym_preimage(x, y):
    a, b = cos_pair(x, y)
    assert sym_map(a, b) == pytest.approx(quad_map(x, y), abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-0.9, 0.9), y=st.floats(-0.9, 0.9))
def test_jacobians_by_finite_difference(x, y):
    h = 1e-6
    for f, jac in ((sym_map, jacobian_sym), (quad_map, jacobian_quad)):
        dx = (np.array(f(x + h, y)) - np.array(f(x - h, y))) / (2 * h)
        dy = (np.array(f(x, y + h)) - np.array(f(x, y - h))) / (2 * h)
        det = abs(dx[0] * dy[1] - dx[1] * dy[0])
        assert det == pytest.approx(float(jac(x, y)), abs=1e-8)
    assert float(jacobian_sym(x, y)) == pytest.approx(abs(x - y), abs=1e-15)
    assert float(jacobian_quad(x, y)) == pytest.approx(4 * abs(x * x - y * y), abs=1e-15)


def test_interior_maps_to_interior():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-1, 1, (2, 1000))
    x, y = np.minimum(x, y), np.maximum(x, y)
    keep = (y - x > 1e-6) & (np.abs(x + y) > 1e-6)
    assert np.all(in_omega(*quad_map(x[keep], y[keep])))
