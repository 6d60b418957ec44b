"""One-variable orthonormal polynomials.

Every measure is normalized to unit mass, so ``p_0 == 1`` for every table.
Tables are immutable and all functions are pure, which makes them safe to
share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln, gammaln

from .errors import (
    ContractError,
    DomainError,
    IndexRangeError,
    NumericError,
    ParameterDomainError,
    ResolutionError,
)

__all__ = [
    "JacobiPair",
    "WeightSpec1D",
    "RecurrenceTable",
    "QuadRule1D",
    "jacobi_mass_constant",
    "jacobi_norm_sq",
    "recurrence_jacobi",
    "recurrence_stieltjes",
    "shifted_table",
    "eval_all",
    "eval_orthonormal",
    "eval_all_with_derivative",
    "divided_differences",
    "eval_jacobi_classical",
    "cd_kernel",
    "gauss_rule",
    "jacobi_gauss_rule",
    "partial_sum_1d",
    "partial_sum_ij",
    "kernel_ij",
    "lebesgue_1d",
    "envelope_bound",
    "weight_eval_gj",
]

CONFLUENT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class JacobiPair:
    """Exponents of the Jacobi weight (1-x)^alpha (1+x)^beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ParameterDomainError(
                f"Jacobi exponents must exceed -1, got ({self.alpha}, {self.beta})"
            )

    def shifted(self, i: int = 0, j: int = 0) -> "JacobiPair":
        return JacobiPair(self.alpha + i, self.beta + j)


@dataclass(frozen=True)
class WeightSpec1D:
    """Generalized Jacobi weight

        psi(x) (1-x)^gamma0 (1+x)^gamma_end prod_i |x - x_i|^gamma_i

    ``interior`` holds ``(x_i, gamma_i)`` pairs with strictly increasing nodes
    inside (-1, 1). ``psi=None`` means psi == 1. The Dini condition on psi is
    the caller's responsibility.
    """

    gamma0: float = 0.0
    gamma_end: float = 0.0
    interior: tuple = ()
    psi: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "interior", tuple((float(t), g) for t, g in self.interior)
        )
        exps = [self.gamma0, self.gamma_end] + [g for _, g in self.interior]
        if any(not (e > -1) for e in exps):
            raise ParameterDomainError(f"GJ exponents must exceed -1, got {exps}")
        nodes = [t for t, _ in self.interior]
        if any(not (-1 < t < 1) for t in nodes):
            raise ParameterDomainError("interior nodes must lie in (-1, 1)")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ParameterDomainError("interior nodes must be strictly increasing")

    @classmethod
    def jacobi(cls, alpha: float, beta: float) -> "WeightSpec1D":
        return cls(gamma0=alpha, gamma_end=beta)

    def shifted(self, i: int = 0, j: int = 0) -> "WeightSpec1D":
        return WeightSpec1D(self.gamma0 + i, self.gamma_end + j, self.interior, self.psi)

    def psi_value(self, x):
        if self.psi is None:
            return np.ones_like(np.asarray(x, dtype=float))
        return np.asarray(self.psi(x), dtype=float)

    def singular_points(self) -> list[tuple[float, float]]:
        """(location, exponent) for both endpoints and every interior node."""
        pts = [(-1.0, self.gamma_end)]
        pts += list(self.interior)
        pts.append((1.0, self.gamma0))
        return pts


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Orthonormal three-term recurrence

        x p_n = b[n+1] p_{n+1} + a[n] p_n + b[n] p_{n-1}

    ``a`` has length N, ``b`` has length N+1 with ``b[0] = 0``, so p_0..p_N
    can be evaluated. ``lead[n]`` is the leading coefficient of p_n. ``h[n]``
    is the squared norm of the reference polynomial of degree n under the
    unit-mass measure: the classical P_n^{(alpha,beta)} for Jacobi tables and
    the monic polynomial otherwise. ``mass`` is the total mass of the
    unnormalized weight (1/c_{alpha,beta} in the Jacobi case).
    """

    a: np.ndarray
    b: np.ndarray
    h: np.ndarray
    lead: np.ndarray
    mass: float
    source: object = None

    @property
    def length(self) -> int:
        return len(self.a)

    def check_degree(self, n: int) -> None:
        if n < 0 or n > self.length:
            raise IndexRangeError(f"degree {n} outside table range 0..{self.length}")


@dataclass(frozen=True, eq=False)
class QuadRule1D:
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def jacobi_mass_constant(alpha: float, beta: float) -> float:
    """c_{alpha,beta}, the reciprocal of the integral of (1-x)^alpha (1+x)^beta."""
    return math.exp(-((alpha + beta + 1) * math.log(2.0) + betaln(alpha + 1, beta + 1)))


def jacobi_norm_sq(alpha: float, beta: float, n: int) -> float:
    """Squared norm of the classical P_n^{(alpha,beta)} under c w dx."""
    if n == 0:
        return 1.0
    s = alpha + beta
    log_h = (
        gammaln(alpha + 1 + n) - gammaln(alpha + 1)
        + gammaln(beta + 1 + n) - gammaln(beta + 1)
        - gammaln(n + 1)
        - (gammaln(s + 2 + n) - gammaln(s + 2))
    )
    return math.exp(log_h) * (s + n + 1) / (s + 2 * n + 1)


def _lead_from_b(b: np.ndarray) -> np.ndarray:
    """Leading coefficients 1/(b_1...b_k); they grow like 2^k and saturate at inf."""
    lead = np.ones(len(b))
    with np.errstate(over="ignore"):
        for k in range(1, len(b)):
            lead[k] = lead[k - 1] / b[k]
    return lead


@lru_cache(maxsize=256)
def _jacobi_table_cached(alpha: float, beta: float, N: int) -> RecurrenceTable:
    s = alpha + beta
    a = np.empty(N)
    b = np.zeros(N + 1)
    for n in range(N):
        if n == 0:
            a[n] = (beta - alpha) / (s + 2)
        else:
            a[n] = (beta**2 - alpha**2) / ((2 * n + s) * (2 * n + s + 2))
    for n in range(1, N + 1):
        if n == 1:
            b2 = 4 * (alpha + 1) * (beta + 1) / ((s + 2) ** 2 * (s + 3))
        else:
            m = 2 * n + s
            b2 = 4 * n * (n + alpha) * (n + beta) * (n + s) / (m * m * (m + 1) * (m - 1))
        b[n] = math.sqrt(b2)
    h = [jacobi_norm_sq(alpha, beta, n) for n in range(N + 1)]
    mass = 1.0 / jacobi_mass_constant(alpha, beta)
    return RecurrenceTable(
        _frozen(a), _frozen(b), _frozen(h), _frozen(_lead_from_b(b)), mass,
        JacobiPair(alpha, beta),
    )


def recurrence_jacobi(p: JacobiPair, N: int) -> RecurrenceTable:
    """Orthonormal Jacobi recurrence for c_{alpha,beta} w_{alpha,beta} dx."""
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    if N < 1:
        raise ParameterDomainError("table length must be at least 1")
    return _jacobi_table_cached(float(p.alpha), float(p.beta), int(N))


def _composite_rule(w: WeightSpec1D, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Jacobi discretization of the GJ measure (not normalized).

    The interval is cut at every interior node; on each piece the two
    endpoint singularities are absorbed by a Gauss-Jacobi rule and the
    remaining factors are evaluated at the nodes.
    """
    pts = w.singular_points()
    xs, ws = [], []
    for (lo, e_lo), (hi, e_hi) in zip(pts[:-1], pts[1:]):
        rule = jacobi_gauss_rule(e_hi, e_lo, resolution)
        half = 0.5 * (hi - lo)
        x = lo + half * (1 + rule.nodes)
        log_scale = (e_lo + e_hi + 1) * math.log(half) + (e_lo + e_hi + 1) * math.log(2.0)
        log_scale += betaln(e_hi + 1, e_lo + 1)
        lam = rule.weights * math.exp(log_scale)
        other = w.psi_value(x)
        if hi != 1.0:
            other = other * (1 - x) ** w.gamma0
        if lo != -1.0:
            other = other * (1 + x) ** w.gamma_end
        for t, g in w.interior:
            if t != lo and t != hi:
                other = other * np.abs(x - t) ** g
        xs.append(x)
        ws.append(lam * other)
    return np.concatenate(xs), np.concatenate(ws)


def _stieltjes(x: np.ndarray, wt: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Discretized Stieltjes procedure on normalized vectors, with reorthogonalization."""
    wt = wt / wt.sum()
    a = np.empty(N)
    b = np.zeros(N + 1)
    basis = [np.ones_like(x)]
    q_prev = np.zeros_like(x)
    for k in range(N):
        q = basis[-1]
        a[k] = np.sum(wt * x * q * q)
        r = (x - a[k]) * q - b[k] * q_prev
        for v in basis:
            r = r - np.sum(wt * r * v) * v
        nrm = math.sqrt(np.sum(wt * r * r))
        if not nrm > 0:
            raise NumericError("Stieltjes procedure broke down (discrete measure too small)")
        b[k + 1] = nrm
        q_prev = q
        basis.append(r / nrm)
    return a, b


def recurrence_stieltjes(
    w: WeightSpec1D, N: int, resolution: int | None = None, tol: float = 1e-10
) -> RecurrenceTable:
    """Recurrence coefficients of a GJ weight by the discretized Stieltjes procedure.

    The discretization is accepted only if doubling ``resolution`` (nodes per
    sub-interval) changes no coefficient by more than ``tol``.
    """
    if N < 1:
        raise ParameterDomainError("table length must be at least 1")
    if resolution is None:
        resolution = 2 * N + 32
    x1, w1 = _composite_rule(w, resolution)
    a1, b1 = _stieltjes(x1, w1, N)
    x2, w2 = _composite_rule(w, 2 * resolution)
    a2, b2 = _stieltjes(x2, w2, N)
    drift = max(np.max(np.abs(a1 - a2)), np.max(np.abs(b1 - b2)))
    if not drift < tol:
        raise ResolutionError(
            f"Stieltjes coefficients drift by {drift:.3e} under doubling of resolution {resolution}"
        )
    lead = _lead_from_b(b2)
    with np.errstate(over="ignore"):
        h = 1.0 / lead**2
    return RecurrenceTable(
        _frozen(a2), _frozen(b2), _frozen(h), _frozen(lead), float(w2.sum()), w
    )


def shifted_table(t: RecurrenceTable, i: int, j: int, N: int | None = None) -> RecurrenceTable:
    """Table for (1-x)^i (1+x)^j times the weight of ``t``."""
    N = t.length if N is None else N
    src = t.source
    if isinstance(src, JacobiPair):
        return recurrence_jacobi(src.shifted(i, j), N)
    if isinstance(src, WeightSpec1D):
        return recurrence_stieltjes(src.shifted(i, j), N)
    raise ParameterDomainError("table has no weight description to shift")


def eval_all(t: RecurrenceTable, n: int, x) -> np.ndarray:
    """Values p_0..p_n at x; result has shape (n+1,) + shape(x).

    Extended-precision input (np.longdouble) is kept as such.
    """
    t.check_degree(n)
    x = np.asarray(x)
    x = x.astype(np.result_type(x.dtype, float), copy=False)
    P = np.empty((n + 1,) + x.shape, dtype=x.dtype)
    P[0] = 1.0
    if n >= 1:
        P[1] = (x - t.a[0]) / t.b[1]
    for k in range(1, n):
        P[k + 1] = ((x - t.a[k]) * P[k] - t.b[k] * P[k - 1]) / t.b[k + 1]
    return P


def eval_orthonormal(t: RecurrenceTable, n: int, x) -> np.ndarray:
    return eval_all(t, n, x)[n]


def eval_all_with_derivative(t: RecurrenceTable, n: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of p_0..p_n (second forward recurrence)."""
    P = eval_all(t, n, x)
    x = np.asarray(x, dtype=float)
    dP = np.zeros_like(P)
    if n >= 1:
        dP[1] = 1.0 / t.b[1]
    for k in range(1, n):
        dP[k + 1] = ((x - t.a[k]) * dP[k] + P[k] - t.b[k] * dP[k - 1]) / t.b[k + 1]
    return P, dP


def divided_differences(t: RecurrenceTable, n: int, x, y) -> np.ndarray:
    """D_k = (p_k(x) - p_k(y)) / (x - y) for k = 0..n, with the derivative at x = y.

    Computed by its own recurrence, so no cancellation occurs when x is
    close to y.
    """
    t.check_degree(n)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    Py = eval_all(t, n, y)
    D = np.zeros((n + 1,) + x.shape)
    if n >= 1:
        D[1] = 1.0 / t.b[1]
    for k in range(1, n):
        D[k + 1] = (Py[k] + (x - t.a[k]) * D[k] - t.b[k] * D[k - 1]) / t.b[k + 1]
    return D


def eval_jacobi_classical(p: JacobiPair, n: int, x) -> np.ndarray:
    """Classical P_n^{(alpha,beta)}(x), normalized by P_n(1) = (alpha+1)_n / n!."""
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    al, be = p.alpha, p.beta
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = (al + 1) + 0.5 * (al + be + 2) * (x - 1)
    for k in range(2, n + 1):
        s = 2 * k + al + be
        c1 = 2 * k * (k + al + be) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + al * al - be * be)
        c3 = 2 * (k + al - 1) * (k + be - 1) * s
        prev, cur = cur, (c2 * cur - c3 * prev) / c1
    return cur


def cd_kernel(t: RecurrenceTable, n: int, x, y, form: str = "sum") -> np.ndarray:
    """Christoffel-Darboux kernel k_n(x, y) = sum_{k<=n} p_k(x) p_k(y).

    ``form="ratio"`` uses the closed ratio form, switching to the confluent
    form when |x - y| < 1e-8.
    """
    if n < 0:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    if form == "sum":
        return np.einsum("k...,k...->...", eval_all(t, n, x), eval_all(t, n, y))
    if form != "ratio":
        raise ValueError(f"unknown form {form!r}")
    if n + 1 > t.length:
        raise IndexRangeError("ratio form needs p_{n+1}")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    Px, dPx = eval_all_with_derivative(t, n + 1, x)
    Py = eval_all(t, n + 1, y)
    diff = x - y
    near = np.abs(diff) < CONFLUENT_THRESHOLD
    safe = np.where(near, 1.0, diff)
    ratio = (Px[n + 1] * Py[n] - Px[n] * Py[n + 1]) / safe
    confluent = dPx[n + 1] * Px[n] - dPx[n] * Px[n + 1]
    return t.b[n + 1] * np.where(near, confluent, ratio)


def gauss_rule(t: RecurrenceTable, m: int) -> QuadRule1D:
    """Golub-Welsch rule with m nodes, exact to degree 2m-1, weights summing to 1."""
    if m < 1 or m > t.length:
        raise IndexRangeError(f"rule size {m} outside 1..{t.length}")
    if m == 1:
        return QuadRule1D(_frozen([t.a[0]]), _frozen([1.0]), 1)
    try:
        nodes, vecs = eigh_tridiagonal(t.a[:m], t.b[1:m])
    except np.linalg.LinAlgError as exc:  # pragma: no cover - solver failure
        raise NumericError(f"tridiagonal eigen-solver failed: {exc}") from exc
    weights = vecs[0] ** 2
    weights = weights / weights.sum()
    return QuadRule1D(_frozen(nodes), _frozen(weights), 2 * m - 1)


@lru_cache(maxsize=512)
def _jacobi_gauss_cached(alpha: float, beta: float, m: int) -> QuadRule1D:
    return gauss_rule(recurrence_jacobi(JacobiPair(alpha, beta), m), m)


def jacobi_gauss_rule(alpha: float, beta: float, m: int) -> QuadRule1D:
    """Cached Gauss rule for the unit-mass Jacobi measure."""
    return _jacobi_gauss_cached(float(alpha), float(beta), int(m))


def partial_sum_1d(t: RecurrenceTable, rule: QuadRule1D, f: Callable, n: int, x) -> np.ndarray:
    """s_n f(x) = integral of f(y) k_n(x, y) dmu(y), coefficients from ``rule``."""
    if rule.exact_degree < 2 * n:
        raise ContractError(f"rule degree {rule.exact_degree} < 2n = {2 * n}")
    fy = np.asarray(f(rule.nodes), dtype=float)
    coef = eval_all(t, n, rule.nodes) @ (rule.weights * fy)
    return np.tensordot(coef, eval_all(t, n, x), axes=(0, 0))


def _half_factor(i: int, j: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (1 - x) ** (0.5 * i) * (1 + x) ** (0.5 * j)


def _check_shift(i, j):
    if int(i) != i or int(j) != j or i < 0 or j < 0:
        raise ParameterDomainError("shifts i, j must be nonnegative integers")


def partial_sum_ij(
    p: JacobiPair, i: int, j: int, f: Callable, n: int, x, m: int | None = None
) -> np.ndarray:
    """Shifted partial sum J(x) s_n(J_{i,j} w; f / J, x) with J = (1-x)^{i/2}(1+x)^{j/2}.

    The Gauss nodes of the shifted measure lie strictly inside (-1, 1), so
    f / J is never evaluated at an endpoint.
    """
    _check_shift(i, j)
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    m = n + 1 if m is None else m
    t = recurrence_jacobi(p.shifted(i, j), max(m, n + 1))
    rule = gauss_rule(t, m)

    def g(y):
        return np.asarray(f(y), dtype=float) / _half_factor(i, j, y)

    return _half_factor(i, j, x) * partial_sum_1d(t, rule, g, n, x)


def kernel_ij(p: JacobiPair, i: int, j: int, n: int, theta, phi) -> np.ndarray:
    """(sin θ/2 sin φ/2)^i (cos θ/2 cos φ/2)^j k_n^{(alpha+i, beta+j)}(cos θ, cos φ)."""
    _check_shift(i, j)
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    t = recurrence_jacobi(p.shifted(i, j), n + 1)
    pre = (np.sin(theta / 2) * np.sin(phi / 2)) ** i * (np.cos(theta / 2) * np.cos(phi / 2)) ** j
    return pre * cd_kernel(t, n, np.cos(theta), np.cos(phi))


def _lebesgue_values(t: RecurrenceTable, i: int, j: int, n: int, xs: np.ndarray, m: int) -> np.ndarray:
    rule = gauss_rule(t, m)
    K = eval_all(t, n, xs).T @ eval_all(t, n, rule.nodes)
    ratio = np.outer(_half_factor(i, j, xs), 1.0 / _half_factor(i, j, rule.nodes))
    return np.abs(K * ratio) @ rule.weights


def lebesgue_1d(
    p: JacobiPair, i: int, j: int, n: int, gridsize: int | None = None,
    refine: bool = True, return_info: bool = False,
):
    """Estimate of the uniform norm of s_n^{i,j} for the Jacobi weight.

    The Lebesgue function x -> ∫ |J(x)/J(y)| |k_n(x,y)| dmu_{ij}(y) is
    maximized over a uniform θ-grid (``gridsize`` intervals, endpoints
    included). The integral uses a Gauss rule of degree at least 4n+16;
    with ``refine`` it is recomputed with twice the nodes and the finer
    value is returned.
    """
    _check_shift(i, j)
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    gridsize = 4 * max(n, 1) if gridsize is None else gridsize
    if gridsize < 4 * n:
        raise ContractError("gridsize must be at least 4n")
    m = 2 * n + 9
    t = recurrence_jacobi(p.shifted(i, j), 2 * m)
    theta = np.linspace(0.0, math.pi, gridsize + 1)
    xs = np.cos(theta)
    vals = _lebesgue_values(t, i, j, n, xs, m)
    change = 0.0
    if refine:
        fine = _lebesgue_values(t, i, j, n, xs, 2 * m)
        change = abs(fine.max() - vals.max()) / fine.max()
        vals = fine
    k = int(np.argmax(vals))
    if return_info:
        return float(vals[k]), {"theta": float(theta[k]), "refine_change": float(change)}
    return float(vals[k])


def envelope_bound(p: JacobiPair, n: int, theta, phi) -> np.ndarray:
    """Right-hand side of the kernel estimate with constant 1."""
    if not isinstance(p, JacobiPair):
        p = JacobiPair(*p)
    if p.alpha < -0.5 or p.beta < -0.5:
        raise ParameterDomainError("envelope requires alpha, beta >= -1/2")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    gap = np.abs(theta - phi)
    s = np.sin(theta / 2) * np.sin(phi / 2) + gap / n + 1.0 / n**2
    c = np.cos(theta / 2) * np.cos(phi / 2) + gap / n + 1.0 / n**2
    return s ** (-p.alpha - 0.5) * c ** (-p.beta - 0.5) / (gap + 1.0 / n)


def weight_eval_gj(w: WeightSpec1D, x) -> np.ndarray:
    """Value of the GJ weight; +inf at a node carrying a negative exponent."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise DomainError("GJ weight is evaluated on the open interval (-1, 1)")
    with np.errstate(divide="ignore"):
        val = w.psi_value(x) * (1 - x) ** w.gamma0 * (1 + x) ** w.gamma_end
        for t, g in w.interior:
            val = val * np.abs(x - t) ** g
    return val


def moments_from_rule(rule: QuadRule1D, degrees: Sequence[int]) -> np.ndarray:
    return np.array([np.sum(rule.weights * rule.nodes**k) for k in degrees])
