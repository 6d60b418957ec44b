"""Orthogonal polynomials and reproducing kernels on the parabolic biangle Ω.

W_{α,β,γ}(u,v) = 2 a (1-u+v)^α (1+u+v)^β (u^2-4v)^γ with the constant a
making it a unit-mass weight. For γ = ±1/2 the orthonormal bases and
kernels are explicit in the one-variable polynomials of w_{α,β}; other γ
use monic polynomials from Gram-Schmidt on monomials.

Under the unit-mass convention for w the two explicit families read

    γ = -1/2:  [p_n(x)p_k(y) + p_n(y)p_k(x)] / sqrt(2)    (p_n(x)p_n(y) if k = n)
    γ = +1/2:  b_1 [p_{n+1}(x)p_k(y) - p_{n+1}(y)p_k(x)] / (x - y)

where (x, y) = sym_preimage(u, v) and b_1 is the first off-diagonal
recurrence coefficient (b_1^2 is the variance of the one-variable measure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import (
    ConditioningError,
    DomainError,
    IndexRangeError,
    ParameterDomainError,
    UnsupportedParameterError,
)
from .geometry import in_omega, omega_margins, quad_map, sym_preimage
from .opoly1d import (
    JacobiPair,
    RecurrenceTable,
    divided_differences,
    eval_all,
    jacobi_gauss_rule,
    recurrence_jacobi,
)
from .quadrature import (
    adaptive_integrate,
    factor_power,
    omega_rule_jacobi,
    rule_size,
)

__all__ = [
    "FAMILIES",
    "BiangleParams",
    "BasisIndex",
    "selberg_constant",
    "weight_W",
    "shifted_weight",
    "basis_minus",
    "basis_plus",
    "pair_basis_minus",
    "pair_basis_plus",
    "basis_orthonormal",
    "MonicBasis",
    "monic_basis",
    "monomial_index",
    "pair_kernel_minus",
    "pair_kernel_plus",
    "kernel_minus",
    "kernel_plus",
    "lowering_operator",
    "apply_lowering",
    "lowering_deviation",
    "quadratic_transform_deviation",
    "product_form_deviation",
    "check_quadratic_transform",
]

FAMILIES = ("minus", "plus", "monic", "Q1even", "Q2even", "Q1odd", "Q2odd")
SQRT2 = math.sqrt(2.0)


def selberg_constant(alpha: float, beta: float, gamma: float) -> float:
    """The constant a_{α,β,γ} that gives W_{α,β,γ} unit mass on Ω."""
    log_a = (
        0.5 * math.log(math.pi)
        - (2 * alpha + 2 * beta + 4 * gamma + 4) * math.log(2.0)
        + gammaln(alpha + beta + gamma + 2.5)
        + gammaln(alpha + beta + 2 * gamma + 3)
        - gammaln(alpha + 1)
        - gammaln(beta + 1)
        - gammaln(gamma + 1)
        - gammaln(alpha + gamma + 1.5)
        - gammaln(beta + gamma + 1.5)
    )
    return math.exp(log_a)


@dataclass(frozen=True)
class BiangleParams:
    """Exponents (α, β, γ) of W_{α,β,γ} with its normalization data."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        a, b, g = self.alpha, self.beta, self.gamma
        if not (a > -1 and b > -1 and g > -1 and a + g + 1.5 > 0 and b + g + 1.5 > 0):
            raise ParameterDomainError(f"inadmissible exponents ({a}, {b}, {g})")

    @property
    def a_norm(self) -> float:
        return selberg_constant(self.alpha, self.beta, self.gamma)

    def shifted(self, i: int, j: int) -> "BiangleParams":
        return BiangleParams(self.alpha + i, self.beta + j, self.gamma)

    def d(self, i: int, j: int) -> float:
        """a_{α+i,β+j,γ} / a_{α,β,γ}."""
        return self.shifted(i, j).a_norm / self.a_norm

    def b(self, i: int, j: int) -> float:
        return math.sqrt(self.d(i, j))

    @property
    def pair(self) -> JacobiPair:
        return JacobiPair(self.alpha, self.beta)

    def table(self, N: int) -> RecurrenceTable:
        return recurrence_jacobi(self.pair, max(int(N), 1))

    @property
    def explicit(self) -> bool:
        return self.gamma in (-0.5, 0.5)


@dataclass(frozen=True)
class BasisIndex:
    k: int
    n: int
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.k < 0 or self.n < 0:
            raise IndexRangeError("indices must be nonnegative")
        if self.family in ("minus", "plus", "monic") and self.k > self.n:
            raise IndexRangeError("need 0 <= k <= n")
        if self.family.startswith("Q"):
            # n is the total degree; even families need n even, odd ones n odd
            if (self.n % 2 == 0) != self.family.endswith("even"):
                raise IndexRangeError(f"{self.family} needs degree of matching parity, got {self.n}")
            top = self.n // 2 - (self.family == "Q2even")
            if self.k > top:
                raise IndexRangeError(f"{self.family} of degree {self.n} needs k <= {top}")


def _check_index(k: int, n: int) -> None:
    if not (0 <= k <= n):
        raise IndexRangeError(f"need 0 <= k <= n, got ({k}, {n})")


def weight_W(p: BiangleParams, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.all(in_omega(u, v)):
        raise DomainError("W is evaluated in the interior of Ω")
    lo, hi, par = omega_margins(u, v)
    return 2 * p.a_norm * lo**p.alpha * hi**p.beta * par**p.gamma


def shifted_weight(p: BiangleParams, i: int, j: int) -> BiangleParams:
    if i not in (0, 1) or j not in (0, 1):
        raise ParameterDomainError("shifts are 0 or 1")
    return p.shifted(i, j)


# -- explicit bases on sym-preimage pairs -----------------------------------

def pair_basis_minus(t: RecurrenceTable, k: int, n: int, x, y) -> np.ndarray:
    _check_index(k, n)
    Px = eval_all(t, n, x)
    Py = eval_all(t, n, y)
    if k == n:
        return Px[n] * Py[n]
    return (Px[n] * Py[k] + Py[n] * Px[k]) / SQRT2


def pair_basis_plus(t: RecurrenceTable, k: int, n: int, x, y) -> np.ndarray:
    """b_1 [p_{n+1}(x)p_k(y) - p_{n+1}(y)p_k(x)]/(x-y), via divided differences.

    D_j = (p_j(x)-p_j(y))/(x-y) turns the quotient into
    D_{n+1} p_k(y) - p_{n+1}(y) D_k, which stays accurate on x = y.
    """
    _check_index(k, n)
    D = divided_differences(t, n + 1, x, y)
    Py = eval_all(t, n + 1, y)
    return t.b[1] * (D[n + 1] * Py[k] - Py[n + 1] * D[k])


def basis_minus(t: RecurrenceTable, k: int, n: int, u, v) -> np.ndarray:
    x, y = sym_preimage(u, v)
    return pair_basis_minus(t, k, n, x, y)


def basis_plus(t: RecurrenceTable, k: int, n: int, u, v) -> np.ndarray:
    x, y = sym_preimage(u, v)
    return pair_basis_plus(t, k, n, x, y)


def basis_orthonormal(p: BiangleParams, k: int, n: int, u, v) -> np.ndarray:
    """Orthonormal P_{k,n} for W_{α,β,±1/2}."""
    t = p.table(n + 2)
    if p.gamma == -0.5:
        return basis_minus(t, k, n, u, v)
    if p.gamma == 0.5:
        return basis_plus(t, k, n, u, v)
    raise UnsupportedParameterError("explicit orthonormal basis needs gamma = ±1/2")


# -- monic basis by Gram-Schmidt ---------------------------------------------

def monomial_index(n_max: int) -> list[tuple[int, int]]:
    """Pairs (k, n) in the order ≺: by degree n, then by k."""
    return [(k, n) for n in range(n_max + 1) for k in range(n + 1)]


def _monomials(n_max: int, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack([u ** (n - k) * v**k for k, n in monomial_index(n_max)], axis=-1)


@dataclass(frozen=True, eq=False)
class MonicBasis:
    """Monic orthogonal P_{k,n} = u^{n-k} v^k + ≺-lower terms.

    ``coef[:, i]`` holds the monomial coefficients of the i-th polynomial
    in ``index`` order; the matrix is unit upper triangular.
    """

    params: BiangleParams
    n_max: int
    index: tuple
    coef: np.ndarray
    norms_sq: np.ndarray

    def position(self, k: int, n: int) -> int:
        _check_index(k, n)
        if n > self.n_max:
            raise IndexRangeError(f"degree {n} above n_max = {self.n_max}")
        return n * (n + 1) // 2 + k

    def __call__(self, k: int, n: int, u, v) -> np.ndarray:
        i = self.position(k, n)
        size = (n + 1) * (n + 2) // 2
        return _monomials(n, u, v) @ self.coef[:size, i]


def _rule_for_monic(p: BiangleParams, degree: int):
    """Nodes (u, v) and weights integrating polynomials of degree <= ``degree``.

    Returns None when only the adaptive path is available.
    """
    try:
        factor_power(p.gamma)
        rule = omega_rule_jacobi(p.alpha, p.beta, p.gamma, degree)
        return rule.points, rule.weights
    except UnsupportedParameterError:
        pass
    if p.alpha in (-0.5, 0.5) and p.beta in (-0.5, 0.5):
        # On the square the weight is |x-y|^{2α+1}|x+y|^{2β+1}(1-x^2)^γ(1-y^2)^γ;
        # with α, β = ±1/2 the first two factors are polynomials.
        power = int(2 * p.alpha + 1) + int(2 * p.beta + 1)
        m = rule_size(2 * degree, power)
        g = jacobi_gauss_rule(p.gamma, p.gamma, m)
        x, y = np.meshgrid(g.nodes, g.nodes, indexing="ij")
        wt = np.outer(g.weights, g.weights)
        wt = wt * np.abs(x - y) ** (2 * p.alpha + 1) * np.abs(x + y) ** (2 * p.beta + 1)
        keep = wt > 0
        u, v = quad_map(x[keep], y[keep])
        wt = wt[keep]
        return (u, v), wt / wt.sum()
    return None


def _gram_adaptive(p: BiangleParams, n_max: int, tol: float) -> np.ndarray:
    idx = monomial_index(n_max)
    moments = {}
    for a in range(2 * n_max + 1):
        for b in range(2 * n_max + 1 - a):
            moments[a, b] = adaptive_integrate(p, "omega", lambda u, v: u**a * v**b, tol)
    mass = moments[0, 0]
    G = np.empty((len(idx), len(idx)))
    for i, (k1, n1) in enumerate(idx):
        for j, (k2, n2) in enumerate(idx):
            G[i, j] = moments[n1 - k1 + n2 - k2, k1 + k2] / mass
    return G


COND_LIMIT = 1e13


@lru_cache(maxsize=64)
def _monic_cached(p: BiangleParams, n_max: int, tol: float) -> MonicBasis:
    idx = monomial_index(n_max)
    rule = _rule_for_monic(p, 2 * n_max)
    if rule is not None:
        (u, v), wt = rule
        A = _monomials(n_max, u, v) * np.sqrt(wt)[:, None]
        R = np.linalg.qr(A, mode="r")
    else:
        G = _gram_adaptive(p, n_max, tol)
        try:
            R = np.linalg.cholesky(G).T
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"monomial Gram matrix not positive definite: {exc}") from exc
    cond = np.linalg.cond(R)
    if not cond < COND_LIMIT:
        raise ConditioningError(f"monomial Gram-Schmidt condition number {cond:.2e}")
    diag = np.diag(R).copy()
    coef = np.linalg.solve(R, np.diag(diag))
    coef = np.triu(coef)
    np.fill_diagonal(coef, 1.0)
    coef.setflags(write=False)
    norms = diag**2
    norms.setflags(write=False)
    return MonicBasis(p, n_max, tuple(idx), coef, norms)


def monic_basis(p: BiangleParams, n_max: int, tol: float = 1e-10) -> MonicBasis:
    """Monic orthogonal polynomials of W_{α,β,γ} up to degree ``n_max``.

    Inner products come from an exact product rule when γ is a half
    integer, from a square product Gauss-Jacobi rule when α, β = ±1/2,
    and from adaptive moments otherwise.
    """
    return _monic_cached(p, int(n_max), float(tol))


# -- reproducing kernels ---------------------------------------------------

def _cd(t: RecurrenceTable, n: int, a, b) -> np.ndarray:
    return np.einsum("k...,k...->...", eval_all(t, n, a), eval_all(t, n, b))


def pair_kernel_minus(t: RecurrenceTable, n: int, x1, x2, y1, y2) -> np.ndarray:
    """½[k_n(x1,y1)k_n(x2,y2) + k_n(x2,y1)k_n(x1,y2)]."""
    if n < 0:
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(y1)).shape)
    Px1, Px2 = eval_all(t, n, x1), eval_all(t, n, x2)
    Py1, Py2 = eval_all(t, n, y1), eval_all(t, n, y2)

    def k(a, b):
        return np.einsum("k...,k...->...", a, b)

    return 0.5 * (k(Px1, Py1) * k(Px2, Py2) + k(Px2, Py1) * k(Px1, Py2))


def pair_kernel_plus(t: RecurrenceTable, n: int, x1, x2, y1, y2) -> np.ndarray:
    """b_1^2 [k_{n+1}k_{n+1} - k_{n+1}k_{n+1}] / ((x1-x2)(y1-y2)).

    Expanding both k_{n+1} in p_j and pairing j with k gives
    b_1^2 [(D.D')(P.P') - (D.P')(P.D')] with D_j, P_j the divided
    differences and values at the second argument, finite on x1 = x2.
    """
    if n < 0:
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(y1)).shape)
    m = n + 1
    Dx, Px = divided_differences(t, m, x1, x2), eval_all(t, m, x2)
    Dy, Py = divided_differences(t, m, y1, y2), eval_all(t, m, y2)

    def dot(a, b):
        return np.einsum("k...,k...->...", a, b)

    return t.b[1] ** 2 * (dot(Dx, Dy) * dot(Px, Py) - dot(Dx, Py) * dot(Px, Dy))


def kernel_minus(t: RecurrenceTable, n: int, z, zp) -> np.ndarray:
    x1, x2 = sym_preimage(*z)
    y1, y2 = sym_preimage(*zp)
    return pair_kernel_minus(t, n, x1, x2, y1, y2)


def kernel_plus(t: RecurrenceTable, n: int, z, zp) -> np.ndarray:
    x1, x2 = sym_preimage(*z)
    y1, y2 = sym_preimage(*zp)
    return pair_kernel_plus(t, n, x1, x2, y1, y2)


# -- lowering operator -------------------------------------------------------

_D1 = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
_D2 = {-2: -1.0, -1: 16.0, 0: -30.0, 1: 16.0, 2: -1.0}


def lowering_operator(alpha: float, beta: float, F: Callable, u: float, v: float, h: float) -> float:
    """E_- F at (u, v) by fourth-order central differences with step h.

    The stencil reaches 2h from (u, v) in each variable. Stencil points and
    sums are formed in np.longdouble; F may return extended precision values,
    which keeps the cancellation error of the second differences near
    1e-19 / h^2 instead of 1e-16 / h^2.
    """
    u0, v0, hh = np.longdouble(u), np.longdouble(v), np.longdouble(h)
    f = lambda i, j: np.longdouble(F(u0 + i * hh, v0 + j * hh))  # noqa: E731
    fu = sum(c * f(i, 0) for i, c in _D1.items()) / (12 * hh)
    fv = sum(c * f(0, j) for j, c in _D1.items()) / (12 * hh)
    fuu = sum(c * f(i, 0) for i, c in _D2.items()) / (12 * hh * hh)
    fvv = sum(c * f(0, j) for j, c in _D2.items()) / (12 * hh * hh)
    fuv = sum(ci * cj * f(i, j) for i, ci in _D1.items() for j, cj in _D1.items()) / (144 * hh * hh)
    return float(
        u0 * fuu + 2 * (v0 + 1) * fuv + u0 * fvv
        + (beta - alpha) * fv + (alpha + beta + 2) * fu
    )


def _sym_preimage_extended(u, v) -> tuple[np.longdouble, np.longdouble]:
    u, v = np.longdouble(u), np.longdouble(v)
    root = np.sqrt(max(u * u - 4 * v, np.longdouble(0)))
    big = (u + root) / 2 if u >= 0 else (u - root) / 2
    small = v / big if big != 0 else np.longdouble(0)
    return min(big, small), max(big, small)


def apply_lowering(p: BiangleParams, k: int, n: int, z, h: float = 1e-4) -> float:
    """E_-^{α,β} applied to the orthonormal γ = -1/2 polynomial P_{k,n} at z."""
    if p.gamma != -0.5:
        raise UnsupportedParameterError("apply_lowering acts on the gamma = -1/2 basis")
    u, v = float(z[0]), float(z[1])
    if min(omega_margins(u, v)) <= 2 * h:
        raise DomainError("point too close to the boundary of Ω for the difference step")
    t = p.table(n + 2)

    def F(a, b):
        return pair_basis_minus(t, k, n, *_sym_preimage_extended(a, b))

    return lowering_operator(p.alpha, p.beta, F, u, v, h)


def lowering_deviation(
    p: BiangleParams, k: int, n: int, samples: int = 20, seed: int = 0, h: float = 1e-4,
) -> float:
    """Check E_- P_{k,n} ∝ P^{γ+1}_{k,n-1} at random interior points of Ω.

    For k < n returns the max relative spread of the ratio E_- P / P^{γ+1};
    for k = n returns max |E_- P_{n,n}|, which should vanish.
    """
    _check_index(k, n)
    rng = np.random.default_rng(seed)
    target = BiangleParams(p.alpha, p.beta, p.gamma + 1)
    t_up = target.table(n + 2)
    vals: list[float] = []
    tries = 0
    while len(vals) < samples:
        tries += 1
        if tries > 50 * samples:
            raise DomainError("too many degenerate samples")
        x, y = np.sort(rng.uniform(-0.95, 0.95, 2))
        if y - x < 0.05:
            continue
        z = (x + y, x * y)
        lhs = apply_lowering(p, k, n, z, h)
        if k == n:
            vals.append(abs(lhs))
            continue
        rhs = float(basis_plus(t_up, k, n - 1, *z))
        if abs(rhs) < 1e-6:
            continue
        vals.append(lhs / rhs)
    r = np.array(vals)
    if k == n:
        return float(r.max())
    return float(np.max(np.abs(r / r[0] - 1)))


# -- quadratic transforms ----------------------------------------------------

def _basis_any(p: BiangleParams, k: int, n: int, u, v) -> np.ndarray:
    """Orthonormal basis when explicit, else monic."""
    if p.explicit:
        return basis_orthonormal(p, k, n, u, v)
    return monic_basis(p, n)(k, n, u, v)


def _random_square_points(rng: np.random.Generator, count: int, margin: float = 1e-3):
    x = rng.uniform(-1 + margin, 1 - margin, count)
    y = rng.uniform(-1 + margin, 1 - margin, count)
    return x, y


def _proportionality(lhs: Callable, rhs: Callable, samples: int, rng, floor: float = 1e-8) -> float:
    ratios: list[float] = []
    tries = 0
    while len(ratios) < samples:
        tries += 1
        if tries > 50 * samples:
            raise DomainError("too many degenerate samples")
        x, y = _random_square_points(rng, 1)
        if abs(abs(x[0]) - abs(y[0])) < 1e-3:
            continue
        a = float(lhs(x, y)[0])
        b = float(rhs(x, y)[0])
        if abs(a) < floor or abs(b) < floor:
            continue
        ratios.append(a / b)
    r = np.array(ratios)
    return float(np.max(np.abs(r / r[0] - 1)))


def quadratic_transform_deviation(
    alpha: float, gamma: float, k: int, n: int, odd: bool = False,
    samples: int = 20, rng: np.random.Generator | None = None,
) -> float:
    """Proportionality defect of the quadratic transform between W_{α,α,γ} and
    W_{γ,∓1/2,α}.

    even:  P^{α,α,γ}_{n-k,n+k}(u,v)          ∝ P^{γ,-1/2,α}_{k,n}(2v, u^2-2v-1)
    odd:   u^{-1} P^{α,α,γ}_{n-k,n+k+1}(u,v) ∝ P^{γ,+1/2,α}_{k,n}(2v, u^2-2v-1)

    Points are (u, v) = (x+y, xy) for random (x, y) in the square, so both
    arguments stay inside Ω.
    """
    _check_index(k, n)
    rng = np.random.default_rng(0) if rng is None else rng
    left = BiangleParams(alpha, alpha, gamma)
    right = BiangleParams(gamma, 0.5 if odd else -0.5, alpha)

    def lhs(x, y):
        u, v = x + y, x * y
        if odd:
            return _basis_any(left, n - k, n + k + 1, u, v) / u
        return _basis_any(left, n - k, n + k, u, v)

    def rhs(x, y):
        u, v = x + y, x * y
        return _basis_any(right, k, n, 2 * v, u * u - 2 * v - 1)

    return _proportionality(lhs, rhs, samples, rng)


def product_form_deviation(
    a: float, b: float, gamma: float, k: int, n: int,
    samples: int = 20, rng: np.random.Generator | None = None,
) -> float:
    """Proportionality defect of P^{a,b,γ}_{k,n}(2xy, x^2+y^2-1), a, b = ±1/2,
    against its product form in the orthonormal p_m = p_m^{(γ,γ)}:

        (-,-):  p_{n+k}(x)p_{n-k}(y) + p_{n-k}(x)p_{n+k}(y)
        (+,-): [p_{n+k+1}(x)p_{n-k}(y) - p_{n-k}(x)p_{n+k+1}(y)] / (x-y)
        (-,+): [p_{n+k+1}(x)p_{n-k}(y) + p_{n-k}(x)p_{n+k+1}(y)] / (x+y)
        (+,+): [p_{n+k+2}(x)p_{n-k}(y) - p_{n-k}(x)p_{n+k+2}(y)] / (x^2-y^2)
    """
    _check_index(k, n)
    if a not in (-0.5, 0.5) or b not in (-0.5, 0.5):
        raise ParameterDomainError("product forms need a, b = ±1/2")
    rng = np.random.default_rng(0) if rng is None else rng
    left = BiangleParams(a, b, gamma)
    shift = (a == 0.5) + (b == 0.5)
    top = n + k + shift
    t = recurrence_jacobi(JacobiPair(gamma, gamma), top + 1)
    sign = -1.0 if a == 0.5 else 1.0

    def lhs(x, y):
        return _basis_any(left, k, n, *quad_map(x, y))

    def rhs(x, y):
        Px, Py = eval_all(t, top, x), eval_all(t, top, y)
        val = Px[top] * Py[n - k] + sign * Px[n - k] * Py[top]
        if a == 0.5:
            val = val / (x - y)
        if b == 0.5:
            val = val / (x + y)
        return val

    return _proportionality(lhs, rhs, samples, rng)


def check_quadratic_transform(
    alpha: float, gamma: float, k: int, n: int, samples: int = 20,
    seed: int = 0, odd: bool = False,
) -> float:
    """Max relative deviation of the quadratic-transform proportionality."""
    return quadratic_transform_deviation(
        alpha, gamma, k, n, odd=odd, samples=samples, rng=np.random.default_rng(seed)
    )
