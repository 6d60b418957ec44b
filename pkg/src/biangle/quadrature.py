"""Integration on Ω and on the square.

Exact rules come from one-variable Gauss rules: an integral over Ω against
W_γ equals an integral over [-1,1]^2 against w(x)w(y)|x-y|^{2γ+1}, which
is a product measure (times a polynomial factor when 2γ+1 is an even
integer). Square rules reuse the Ω nodes through the quadratic map and
average the integrand over the four-point fiber.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _spi
from scipy.special import betaln

from .errors import (
    EvaluationError,
    ToleranceError,
    UnsupportedParameterError,
)
from .geometry import in_omega, orbit4, quad_preimage
from .opoly1d import (
    QuadRule1D,
    RecurrenceTable,
    gauss_rule,
    jacobi_gauss_rule,
    shifted_table,
)

__all__ = [
    "QuadRule2D",
    "factor_power",
    "rule_size",
    "omega_rule",
    "omega_rule_jacobi",
    "square_rule",
    "integrate",
    "adaptive_integrate",
    "omega_weight_integral",
]


@dataclass(frozen=True, eq=False)
class QuadRule2D:
    """Nodes ``points = (p1, p2)`` with unit-mass positive ``weights``.

    ``pairs`` holds the sym-preimage pair (z1 <= z2) of each Ω node, i.e.
    p1 = z1 + z2, p2 = z1 z2 for Ω rules; for square rules the pair is the
    one of quad_map(p1, p2). Square rules are ``symmetrized``: integrands
    are averaged over orbit4 before weighting.
    """

    points: tuple[np.ndarray, np.ndarray]
    weights: np.ndarray
    exact_degree: int
    domain_tag: str
    symmetrized: bool
    pairs: tuple[np.ndarray, np.ndarray]


def factor_power(gamma: float) -> int:
    """2γ+1 when it is an even nonnegative integer, else raise."""
    power = 2 * gamma + 1
    if power >= 0 and float(power).is_integer() and int(power) % 2 == 0:
        return int(power)
    raise UnsupportedParameterError(
        f"no exact rule for gamma={gamma}; use adaptive_integrate"
    )


def rule_size(degree: int, power: int = 0) -> int:
    """Nodes per axis so that per-variable degree ``degree + power`` is exact."""
    return math.ceil((degree + power + 1) / 2) + 1


def _product_pairs(rule: QuadRule1D, power: int, fold: bool = True):
    s = rule.nodes
    lam = rule.weights
    if fold:
        i, j = np.triu_indices(len(s))
        wt = lam[i] * lam[j] * np.where(i == j, 1.0, 2.0)
    else:
        i, j = np.meshgrid(np.arange(len(s)), np.arange(len(s)), indexing="ij")
        i, j = i.ravel(), j.ravel()
        wt = lam[i] * lam[j]
    z1, z2 = s[i], s[j]
    if power:
        wt = wt * np.abs(z1 - z2) ** power
        keep = wt > 0
        z1, z2, wt = z1[keep], z2[keep], wt[keep]
    wt = wt / wt.sum()
    return z1, z2, wt


def omega_rule(base: RecurrenceTable, gamma: float, degree: int) -> QuadRule2D:
    """Product rule on Ω for W_γ built from the one-variable measure of ``base``.

    Exact for polynomials in (u, v) of total degree <= ``degree``.
    """
    power = factor_power(gamma)
    m = rule_size(degree, power)
    table = base if base.length >= m else shifted_table(base, 0, 0, m)
    z1, z2, wt = _product_pairs(gauss_rule(table, m), power)
    _freeze(z1, z2, wt)
    return QuadRule2D((z1 + z2, z1 * z2), wt, int(degree), "omega", False, (z1, z2))


def omega_rule_jacobi(alpha: float, beta: float, gamma: float, degree: int) -> QuadRule2D:
    """omega_rule for W_{α,β,γ}, using the cached Jacobi Gauss rules."""
    power = factor_power(gamma)
    m = rule_size(degree, power)
    z1, z2, wt = _product_pairs(jacobi_gauss_rule(alpha, beta, m), power)
    _freeze(z1, z2, wt)
    return QuadRule2D((z1 + z2, z1 * z2), wt, int(degree), "omega", False, (z1, z2))


def square_rule(p, degree: int) -> QuadRule2D:
    """Symmetrized rule on [-1,1]^2 for the square weight with parameters ``p``.

    ``p`` needs attributes alpha, beta, gamma. The orbit average of a square
    polynomial of degree d is a polynomial of degree <= d/2 in
    quad_map(x, y); the Ω rule is sized for degree d to keep a margin.
    """
    om = omega_rule_jacobi(p.alpha, p.beta, p.gamma, degree)
    x, y = quad_preimage(*om.points)
    _freeze(x, y)
    return QuadRule2D((x, y), om.weights, int(degree), "square", True, om.pairs)


def _freeze(*arrays) -> None:
    for a in arrays:
        a.setflags(write=False)


def integrate(rule: QuadRule2D, f: Callable) -> float:
    """Weighted sum of f over the rule (orbit-averaged for square rules)."""
    if rule.symmetrized:
        vals = sum(np.asarray(f(a, b), dtype=float) for a, b in orbit4(*rule.points)) / 4
    else:
        vals = np.asarray(f(*rule.points), dtype=float)
    vals = np.broadcast_to(vals, rule.weights.shape)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("integrand is not finite at a quadrature node")
    return float(np.dot(rule.weights, vals))


def _quad(func, a, b, tol, epsabs=0.0, strict=True, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            val, err = _spi.quad(func, a, b, epsabs=epsabs, epsrel=tol, limit=200, **kw)
        except _spi.IntegrationWarning as exc:
            warnings.simplefilter("ignore", _spi.IntegrationWarning)
            val, err = _spi.quad(func, a, b, epsabs=epsabs, epsrel=tol, limit=200, **kw)
            if strict:
                raise ToleranceError(f"adaptive integration did not converge: {exc}", val, err)
    return val, err


def _quad_ends(func, lo, hi, tol, strict=True):
    """∫_lo^hi func with x = mid - half cos τ, which turns an end point factor
    s^γ into τ^(2γ+1) and keeps nodes off the end points."""
    half = (hi - lo) / 2
    floor = 8 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi))

    def g(tau):
        # distance to the nearer end, kept a few ulps away so rounding never
        # lands a node on a singular end point
        d_lo, d_hi = 2 * half * math.sin(tau / 2) ** 2, 2 * half * math.cos(tau / 2) ** 2
        x = lo + max(d_lo, floor) if d_lo <= d_hi else hi - max(d_hi, floor)
        return func(x) * half * math.sin(tau)

    return _quad(g, 0.0, math.pi, tol, epsabs=tol * 1e-3, strict=strict)


def adaptive_integrate(
    weight, domain_tag: str, f: Callable, tol: float = 1e-8
) -> float:
    """Nested adaptive Gauss-Kronrod integration of f * weight.

    ``weight`` is a callable of the domain point, or, on Ω, parameters with
    attributes alpha, beta, gamma, a_norm (the normalized W_{α,β,γ}).

    The square is split along the lines x = ±y, Ω along u = 0 with the
    inner variable running between the lines and the parabola, so every
    weight singularity sits on a subinterval end point, where a cosine
    substitution softens it. Inner integrals return their best
    estimate (near corners they are tiny and rounding-limited); exhaustion
    of the outer budget raises ToleranceError carrying the best estimate.
    A callable weight on Ω is rounding-limited near the corners, where
    1 ± u + v is formed by cancellation; parameter weights are integrated
    over the triangle x < y of the sym-preimage instead, with the exact
    factors (1 ∓ x)(1 ∓ y) and (y - x)^2.
    """
    if domain_tag == "omega" and not callable(weight):
        return _adaptive_omega_params(weight, f, tol)
    inner_tol = tol / 10

    def g(a, b):
        return float(weight(a, b)) * float(f(a, b))

    if domain_tag == "square":
        def inner(x):
            brk = sorted({t for t in (-x, x) if -1 < t < 1})
            edges = [-1.0] + brk + [1.0]
            return sum(
                _quad_ends(lambda y: g(x, y), lo, hi, inner_tol, strict=False)[0]
                for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo
            )

        parts = [_quad_ends(inner, lo, hi, tol) for lo, hi in ((-1.0, 0.0), (0.0, 1.0))]
    elif domain_tag == "omega":
        def h(u, v):
            # rounding near the corners can push a node just outside Ω
            return g(u, v) if in_omega(u, v) else 0.0

        def inner(u):
            lo, hi = abs(u) - 1, u * u / 4
            if hi <= lo:
                return 0.0
            # the other line passes 2|u| below the lower end; geometric
            # breakpoints resolve it when u is small
            edges = [lo]
            step = 2 * abs(u)
            while 0 < step < (hi - lo) / 2:
                edges.append(lo + step)
                step *= 4
            edges.append(hi)
            return sum(
                _quad_ends(lambda v: h(u, v), a, b, inner_tol, strict=False)[0]
                for a, b in zip(edges[:-1], edges[1:])
            )

        parts = [_quad_ends(inner, lo, hi, tol) for lo, hi in ((-2.0, 0.0), (0.0, 2.0))]
    else:
        raise ValueError(f"unknown domain {domain_tag!r}")
    return float(sum(v for v, _ in parts))


def _adaptive_omega_params(p, f: Callable, tol: float) -> float:
    al, be, ga = p.alpha, p.beta, p.gamma
    c = 2.0 * p.a_norm
    inner_tol = tol / 10

    def h(x, y):
        w = (1 - x) ** al * (1 - y) ** al * (1 + x) ** be * (1 + y) ** be * (y - x) ** (2 * ga + 1)
        return c * w * float(f(x + y, x * y))

    def inner(x):
        if x >= 1.0:
            return 0.0
        # (1 + y)^β is singular 1 + x below the lower end
        edges = [x]
        step = 1 + x
        while 0 < step < (1 - x) / 2:
            edges.append(x + step)
            step *= 4
        edges.append(1.0)
        return sum(
            _quad_ends(lambda y: h(x, y), a, b, inner_tol, strict=False)[0]
            for a, b in zip(edges[:-1], edges[1:])
        )

    return float(_quad_ends(inner, -1.0, 1.0, tol)[0])


def omega_weight_integral(alpha: float, beta: float, gamma: float, tol: float = 1e-11) -> float:
    """∫_Ω (1-u+v)^α (1+u+v)^β (u^2-4v)^γ du dv by algebraic-weight quadrature.

    For u >= 0 write v = u - 1 + s with s in [0, L], L = (1 - u/2)^2. The
    integrand is s^α (s+2u)^β (4(L-s))^γ: the end point powers are carried
    by algebraic quadrature weights, and geometric breakpoints 2u, 8u, ...
    resolve the nearby factor (s+2u)^β when u is small. The outer integrand
    vanishes like (2-u)^{2(α+γ+1)} near u = 2, which is again carried by the
    weight. u < 0 follows by the symmetry u -> -u, α <-> β.
    """
    inner_tol = tol / 10

    def inner(u, a, b):
        length = (1 - u / 2) ** 2
        if u == 0.0:
            val = _quad(lambda s: 1.0, 0.0, length, inner_tol, weight="alg", wvar=(a + b, gamma))[0]
            return val * 4.0**gamma
        edges = [0.0]
        step = 2 * u
        while step < length / 2:
            edges.append(step)
            step *= 4
        edges.append(length / 2)
        edges.append(length)
        total = 0.0
        for k, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            if k == 0:
                total += _quad(lambda s: (s + 2 * u) ** b * (length - s) ** gamma,
                               lo, hi, inner_tol, weight="alg", wvar=(a, 0.0))[0]
            elif hi == length:
                total += _quad(lambda s: s**a * (s + 2 * u) ** b,
                               lo, hi, inner_tol, weight="alg", wvar=(0.0, gamma))[0]
            else:
                total += _quad(lambda s: s**a * (s + 2 * u) ** b * (length - s) ** gamma,
                               lo, hi, inner_tol)[0]
        return total * 4.0**gamma

    def half(a, b):
        c_out = 2 * (a + gamma + 1)

        def scaled(u):
            if u >= 2.0:
                # limit of inner / (2-u)^c_out at the corner (2, 1)
                return math.exp(betaln(a + 1, gamma + 1)) * 4.0 ** (gamma + b) / 2.0**c_out
            return inner(u, a, b) / (2 - u) ** c_out

        near = _quad(lambda u: inner(u, a, b), 0.0, 1.0, tol)[0]
        far = _quad(scaled, 1.0, 2.0, tol, weight="alg", wvar=(0.0, c_out))[0]
        return near + far

    return half(alpha, beta) + half(beta, alpha)
