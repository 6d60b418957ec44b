"""Orthogonal structure on the square [-1,1]^2 lifted from Ω.

The square weight is 𝒲(x,y) = W(quad_map(x,y)) |x^2-y^2|; for Jacobi data

    𝒲_{α,β,γ}(x,y) = 2 a 4^γ |x-y|^{2α+1} |x+y|^{2β+1} (1-x^2)^γ (1-y^2)^γ.

Degree-m orthogonal polynomials come in four families built from Ω
polynomials of the weight and its three shifts:

    Q1even(k,2n) = P_{k,n}(quad_map)
    Q2even(k,2n) = b11 (x^2-y^2) P^{α+1,β+1}_{k,n-1}(quad_map)
    Q1odd(k,2n+1) = b01 (x+y) P^{α,β+1}_{k,n}(quad_map)
    Q2odd(k,2n+1) = b10 (x-y) P^{α+1,β}_{k,n}(quad_map)

with b_ij = sqrt(a_{α+i,β+j,γ}/a_{α,β,γ}). The Ω polynomials are evaluated
on the pair (cos(θ-φ), cos(θ+φ)) for x = cos θ, y = cos φ, which is the
sym-preimage of quad_map(x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, IndexRangeError, UnsupportedParameterError
from .geometry import CLOSURE_TOL, cos_pair, quad_map
from .koornwinder import (
    BasisIndex,
    BiangleParams,
    monic_basis,
    pair_basis_minus,
    pair_basis_plus,
    pair_kernel_minus,
    pair_kernel_plus,
)
from .opoly1d import (
    RecurrenceTable,
    WeightSpec1D,
    eval_all,
    recurrence_jacobi,
    recurrence_stieltjes,
    weight_eval_gj,
)

__all__ = [
    "Q_FAMILIES",
    "SquareWeightParams",
    "QEvaluation",
    "weight_CW",
    "weight_W_gj",
    "weight_CW_gj",
    "gj_scale",
    "q_basis_list",
    "basis_Q",
    "evaluate_Q",
    "basis_Q_trig",
    "gegenbauer_alt_basis",
    "gegenbauer_alt_list",
    "kernel_CK",
    "kernel_CK_trig",
    "kernel_CK_sum",
    "q_transform_sides",
    "check_Q_transform",
    "q_transform_ratio",
    "E_minus_square",
    "check_E_minus",
    "E_minus_constant",
]

Q_FAMILIES = ("Q1even", "Q2even", "Q1odd", "Q2odd")
SQRT2 = math.sqrt(2.0)

# family -> (shift i, shift j)
_SHIFT = {"Q1even": (0, 0), "Q2even": (1, 1), "Q1odd": (0, 1), "Q2odd": (1, 0)}


@dataclass(frozen=True)
class SquareWeightParams:
    """𝒲_{α,β,γ} on the square; ``c_front`` = 2 a_{α,β,γ} 4^γ."""

    base: BiangleParams
    c_front: float

    def __post_init__(self):
        if not self.c_front > 0:
            raise ValueError("c_front must be positive")

    @classmethod
    def of(cls, p: BiangleParams) -> "SquareWeightParams":
        return cls(p, 2 * p.a_norm * 4.0**p.gamma)


def _require_square(x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(np.abs(x) > 1 + CLOSURE_TOL) or np.any(np.abs(y) > 1 + CLOSURE_TOL):
        raise DomainError("point outside [-1,1]^2")
    return x, y


def _power(base: np.ndarray, e: float) -> np.ndarray:
    """base^e for base >= 0, with 0^e = inf for e < 0."""
    with np.errstate(divide="ignore"):
        return np.where(base == 0, np.inf if e < 0 else (1.0 if e == 0 else 0.0), base**e)


def weight_CW(p: SquareWeightParams, x, y) -> np.ndarray:
    """𝒲_{α,β,γ}(x,y); infinite on a singular line with a negative exponent."""
    x, y = _require_square(x, y)
    b = p.base
    return (
        p.c_front
        * _power(np.abs(x - y), 2 * b.alpha + 1)
        * _power(np.abs(x + y), 2 * b.beta + 1)
        * _power(1 - x * x, b.gamma)
        * _power(1 - y * y, b.gamma)
    )


# -- generalized Jacobi base weights -------------------------------------------

def gj_scale(w: WeightSpec1D, gamma: float) -> float:
    """2 a_w^γ, making W_γ(u,v) = 2 a w(x) w(y) (u^2-4v)^γ a unit-mass weight on Ω.

    ∫_Ω W_γ = a ∫∫ w(x)w(y)|x-y|^{2γ+1} dx dy, which for γ = -1/2 is
    a M^2 and for γ = 1/2 is 2 a M^2 b_1^2 (M the mass of w, b_1^2 the
    variance of the normalized measure).
    """
    t = recurrence_stieltjes(w, 2)
    if gamma == -0.5:
        return 2.0 / t.mass**2
    if gamma == 0.5:
        return 2.0 / (2 * t.mass**2 * t.b[1] ** 2)
    raise UnsupportedParameterError("gj_scale needs gamma = ±1/2")


def weight_W_gj(w: WeightSpec1D, gamma: float, u, v, scale: float | None = None) -> np.ndarray:
    """W_γ(u,v) = scale · w(x) w(y) (u^2-4v)^γ with (x, y) the sym-preimage."""
    from .geometry import in_omega, sym_preimage

    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if not np.all(in_omega(u, v)):
        raise DomainError("W is evaluated in the interior of Ω")
    scale = gj_scale(w, gamma) if scale is None else scale
    x, y = sym_preimage(u, v)
    return scale * weight_eval_gj(w, x) * weight_eval_gj(w, y) * (u * u - 4 * v) ** gamma


def weight_CW_gj(
    w: WeightSpec1D, gamma: float, x, y, scale: float | None = None, form: str = "product"
) -> np.ndarray:
    """𝒲_γ for a generalized Jacobi base weight w.

    ``form="product"`` uses the factored expression

        scale 4^γ Ψ |x-y|^{2γ0+1} |x+y|^{2γ_end+1} (1-x^2)^γ (1-y^2)^γ
            × Π_k |x^2 + y^2 - 1 - 2 t_k x y + t_k^2|^{γ_k},

    where Ψ(cos θ, cos φ) = ψ(cos(θ-φ)) ψ(cos(θ+φ)) and t_k, γ_k are the
    interior nodes. The interior factor is (X-t)(Y-t) for the pair
    X, Y = cos(θ∓φ). ``form="composed"`` evaluates W_γ(quad_map) |x^2-y^2|.
    """
    x, y = _require_square(x, y)
    scale = gj_scale(w, gamma) if scale is None else scale
    if form == "composed":
        return weight_W_gj(w, gamma, *quad_map(x, y), scale=scale) * np.abs(x * x - y * y)
    if form != "product":
        raise ValueError(f"unknown form {form!r}")
    X, Y = cos_pair(x, y)
    val = scale * 4.0**gamma * w.psi_value(X) * w.psi_value(Y)
    val = val * _power(np.abs(x - y), 2 * w.gamma0 + 1) * _power(np.abs(x + y), 2 * w.gamma_end + 1)
    for t, g in w.interior:
        val = val * _power(np.abs(x * x + y * y - 1 - 2 * t * x * y + t * t), g)
    return val * _power(1 - x * x, gamma) * _power(1 - y * y, gamma)


# -- Q bases ------------------------------------------------------------------

class QEvaluation(NamedTuple):
    values: np.ndarray
    orthonormal: bool


def q_basis_list(m_max: int) -> list[BasisIndex]:
    """All Q indices of degree <= m_max, by degree, family and k."""
    out = []
    for m in range(m_max + 1):
        n = m // 2
        if m % 2 == 0:
            out += [BasisIndex(k, m, "Q1even") for k in range(n + 1)]
            out += [BasisIndex(k, m, "Q2even") for k in range(n)]
        else:
            out += [BasisIndex(k, m, "Q1odd") for k in range(n + 1)]
            out += [BasisIndex(k, m, "Q2odd") for k in range(n + 1)]
    return out


def _inner_degree(idx: BasisIndex) -> int:
    """Degree of the Ω polynomial inside Q, after validating the index."""
    if idx.family not in Q_FAMILIES:
        raise IndexRangeError(f"{idx.family} is not a Q family")
    m, k = idx.n, idx.k
    if idx.family in ("Q1even", "Q2even"):
        if m % 2:
            raise IndexRangeError(f"{idx.family} needs even degree, got {m}")
        n = m // 2 - (idx.family == "Q2even")
    else:
        if m % 2 == 0:
            raise IndexRangeError(f"{idx.family} needs odd degree, got {m}")
        n = m // 2
    if not (0 <= k <= n):
        raise IndexRangeError(f"k = {k} out of range for {idx.family} of degree {m}")
    return n


def _prefactor(family: str, x, y) -> np.ndarray:
    if family == "Q1even":
        return np.ones_like(x)
    if family == "Q2even":
        return x * x - y * y
    if family == "Q1odd":
        return x + y
    return x - y


def evaluate_Q(p: BiangleParams, idx: BasisIndex, x, y, monic: bool = False) -> QEvaluation:
    """Q basis value with a flag telling whether it is orthonormal.

    For γ = ±1/2 (and ``monic`` False) the inner polynomials are the
    explicit orthonormal ones and the result is orthonormal. Otherwise the
    inner polynomials are monic, the b constants are dropped, and the
    result is only orthogonal.
    """
    n = _inner_degree(idx)
    x, y = _require_square(x, y)
    i, j = _SHIFT[idx.family]
    inner = p.shifted(i, j)
    pre = _prefactor(idx.family, x, y)
    if p.explicit and not monic:
        t = inner.table(n + 2)
        cm, cp = cos_pair(x, y)
        basis = pair_basis_minus if p.gamma == -0.5 else pair_basis_plus
        b = 1.0 if idx.family == "Q1even" else p.b(i, j)
        return QEvaluation(b * pre * basis(t, idx.k, n, cm, cp), True)
    val = monic_basis(inner, n)(idx.k, n, *quad_map(x, y))
    return QEvaluation(pre * val, False)


def basis_Q(p: BiangleParams, idx: BasisIndex, x, y, monic: bool = False) -> np.ndarray:
    """Values of the Q polynomial ``idx``; see evaluate_Q for normalization."""
    return evaluate_Q(p, idx, x, y, monic).values


def basis_Q_trig(t: RecurrenceTable, family: str, k: int, n: int, theta, phi) -> np.ndarray:
    """P_{k,n}(quad_map(cos θ, cos φ)) for γ = -1/2 ("minus") or +1/2 ("plus").

    minus: [p_n(c-)p_k(c+) + p_k(c-)p_n(c+)]/sqrt(2), p_n(c-)p_n(c+) for k = n;
    plus:  b_1 [p_{n+1}(c-)p_k(c+) - p_k(c-)p_{n+1}(c+)] / (2 sin θ sin φ),
    with c∓ = cos(θ∓φ). The plus quotient is formed by divided differences,
    so it is finite on sin θ sin φ = 0.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    cm, cp = np.cos(theta - phi), np.cos(theta + phi)
    if family == "minus":
        return pair_basis_minus(t, k, n, cm, cp)
    if family == "plus":
        return pair_basis_plus(t, k, n, cm, cp)
    raise ValueError(f"unknown family {family!r}")


def gegenbauer_alt_basis(gamma: float, parity: str, kind: int, k: int, n: int, x, y) -> np.ndarray:
    """Symmetric / antisymmetric product basis for (1-x^2)^γ (1-y^2)^γ.

    With p_j the orthonormal polynomials of (1-x^2)^γ and S_{a,b} = p_a(x)p_b(y):

        even, kind 1 (0 <= k <= n):     [S_{n+k,n-k} + S_{n-k,n+k}]/sqrt(2), p_n(x)p_n(y) for k = 0
        even, kind 2 (0 <= k <= n-1):   [S_{n+k+1,n-k-1} - S_{n-k-1,n+k+1}]/sqrt(2)
        odd, kind 1/2 (0 <= k <= n):    [S_{n+k+1,n-k} ± S_{n-k,n+k+1}]/sqrt(2)

    Degrees are 2n (even) and 2n+1 (odd).
    """
    if parity not in ("even", "odd") or kind not in (1, 2):
        raise ValueError("parity is 'even' or 'odd', kind is 1 or 2")
    top = n - 1 if (parity == "even" and kind == 2) else n
    if not (0 <= k <= top):
        raise IndexRangeError(f"k = {k} out of range")
    if parity == "even":
        a, b = (n + k, n - k) if kind == 1 else (n + k + 1, n - k - 1)
    else:
        a, b = n + k + 1, n - k
    sign = 1.0 if kind == 1 else -1.0
    t = recurrence_jacobi_gamma(gamma, a + 1)
    Px, Py = eval_all(t, a, x), eval_all(t, a, y)
    if a == b:
        return Px[a] * Py[a]
    return (Px[a] * Py[b] + sign * Px[b] * Py[a]) / SQRT2


def recurrence_jacobi_gamma(gamma: float, N: int) -> RecurrenceTable:
    from .opoly1d import JacobiPair

    return recurrence_jacobi(JacobiPair(gamma, gamma), N)


def gegenbauer_alt_list(m_max: int) -> list[tuple[str, int, int, int]]:
    """(parity, kind, k, n) for every element of degree <= m_max."""
    out = []
    for m in range(m_max + 1):
        n = m // 2
        if m % 2 == 0:
            out += [("even", 1, k, n) for k in range(n + 1)]
            out += [("even", 2, k, n) for k in range(n)]
        else:
            out += [("odd", kind, k, n) for kind in (1, 2) for k in range(n + 1)]
    return out


# -- reproducing kernel ---------------------------------------------------------

def _inner_kernel(p: BiangleParams, i: int, j: int, m: int, pair_x, pair_y) -> np.ndarray:
    if m < 0:
        return np.zeros(np.broadcast(pair_x[0], pair_y[0]).shape)
    t = p.shifted(i, j).table(m + 3)
    kern = pair_kernel_minus if p.gamma == -0.5 else pair_kernel_plus
    return kern(t, m, pair_x[0], pair_x[1], pair_y[0], pair_y[1])


def _require_explicit(p: BiangleParams) -> None:
    if not p.explicit:
        raise UnsupportedParameterError("closed-form kernels need gamma = ±1/2")


def _kernel_from_parts(p, n, pair_x, pair_y, fx, fy) -> np.ndarray:
    """Sum of the four terms given pairs and the prefactors (x1^2-x2^2, x1+x2, x1-x2)."""
    h, g = n // 2, (n - 1) // 2
    out = _inner_kernel(p, 0, 0, h, pair_x, pair_y)
    out = out + p.d(1, 1) * fx[0] * fy[0] * _inner_kernel(p, 1, 1, h - 1, pair_x, pair_y)
    out = out + p.d(0, 1) * fx[1] * fy[1] * _inner_kernel(p, 0, 1, g, pair_x, pair_y)
    out = out + p.d(1, 0) * fx[2] * fy[2] * _inner_kernel(p, 1, 0, g, pair_x, pair_y)
    return out


def kernel_CK(p: BiangleParams, n: int, x, y) -> np.ndarray:
    """Reproducing kernel 𝒦_n of 𝒲_{α,β,±1/2} at x = (x1, x2), y = (y1, y2).

    𝒦_n = K_{⌊n/2⌋}(s,t) + d11 (x1^2-x2^2)(y1^2-y2^2) K^{α+1,β+1}_{⌊n/2⌋-1}(s,t)
          + d01 (x1+x2)(y1+y2) K^{α,β+1}_{⌊(n-1)/2⌋}(s,t)
          + d10 (x1-x2)(y1-y2) K^{α+1,β}_{⌊(n-1)/2⌋}(s,t)

    with s = quad_map(x), t = quad_map(y) and d_ij = a_{α+i,β+j,γ}/a_{α,β,γ}.
    """
    _require_explicit(p)
    x1, x2 = _require_square(*x)
    y1, y2 = _require_square(*y)
    fx = (x1 * x1 - x2 * x2, x1 + x2, x1 - x2)
    fy = (y1 * y1 - y2 * y2, y1 + y2, y1 - y2)
    return _kernel_from_parts(p, n, cos_pair(x1, x2), cos_pair(y1, y2), fx, fy)


def kernel_CK_trig(p: BiangleParams, n: int, theta, phi) -> np.ndarray:
    """kernel_CK at x = (cos θ1, cos θ2), y = (cos φ1, cos φ2), from the angles.

    Pairs are cos(θ1∓θ2) and the prefactors use
    x1^2-x2^2 = -sin(θ1-θ2) sin(θ1+θ2),
    x1+x2 = 2 cos((θ1+θ2)/2) cos((θ1-θ2)/2),
    x1-x2 = -2 sin((θ1+θ2)/2) sin((θ1-θ2)/2),
    which keeps relative accuracy near the singular lines.
    """
    _require_explicit(p)

    def parts(a1, a2):
        a1 = np.asarray(a1, dtype=float)
        a2 = np.asarray(a2, dtype=float)
        d, s = a1 - a2, a1 + a2
        pair = (np.cos(d), np.cos(s))
        f = (
            -np.sin(d) * np.sin(s),
            2 * np.cos(s / 2) * np.cos(d / 2),
            -2 * np.sin(s / 2) * np.sin(d / 2),
        )
        return pair, f

    pair_x, fx = parts(*theta)
    pair_y, fy = parts(*phi)
    return _kernel_from_parts(p, n, pair_x, pair_y, fx, fy)


def kernel_CK_sum(p: BiangleParams, n: int, x, y) -> np.ndarray:
    """Σ Q(x)Q(y) over the orthonormal Q basis of degree <= n (reference path)."""
    _require_explicit(p)
    total = 0.0
    for idx in q_basis_list(n):
        total = total + basis_Q(p, idx, *x) * basis_Q(p, idx, *y)
    return np.asarray(total)


# -- quadratic transforms at the square level ------------------------------------

def _monic_value(alpha, beta, gamma, k, n, u, v) -> np.ndarray:
    return monic_basis(BiangleParams(alpha, beta, gamma), n)(k, n, u, v)


def q_transform_sides(alpha: float, gamma: float, k: int, n: int, identity: str) -> tuple[Callable, Callable]:
    """Both sides of a square-level quadratic transform as functions of (θ, φ).

    Q polynomials here carry monic inner polynomials and no b constants.
    With x, y = cos θ, cos φ and X, Y = cos((θ-φ)/2), cos((θ+φ)/2):

    "first", 0 <= k <= ⌊n/2⌋:
        1Q^{γ,-1/2,α}_{k,n}(x,y)  vs  2^{⌊n/2⌋-k} P^{α,α,γ}_{⌊n/2⌋-k, n-⌊n/2⌋+k}(quad_map(X,Y))
    "second", 0 <= k <= ⌊(n-1)/2⌋:
        sin θ sin φ · 2Q^{γ,-1/2,α}_{k,n}(x,y)  vs
        2^{⌊(n+1)/2⌋-k} sin((θ-φ)/2) sin((θ+φ)/2) (X^2-Y^2)
            · P^{α,α,γ+1}_{⌊(n-1)/2⌋-k, ⌊n/2⌋+k}(quad_map(X,Y))

    The first pair is equal; the second pair differs by the factor -1.
    """
    h = n // 2
    if identity == "first":
        if not (0 <= k <= h):
            raise IndexRangeError("need 0 <= k <= n/2")
        fam = "Q1even" if n % 2 == 0 else "Q1odd"
        right = (alpha, alpha, gamma, h - k, n - h + k)
        scale = 2.0 ** (h - k)
    elif identity == "second":
        g = (n - 1) // 2
        if not (0 <= k <= g):
            raise IndexRangeError("need 0 <= k <= (n-1)/2")
        fam = "Q2even" if n % 2 == 0 else "Q2odd"
        right = (alpha, alpha, gamma + 1, g - k, h + k)
        scale = 2.0 ** ((n + 1) // 2 - k)
    else:
        raise ValueError("identity is 'first' or 'second'")
    left_p = BiangleParams(gamma, -0.5, alpha)
    idx = BasisIndex(k, n, fam)

    def lhs(theta, phi):
        x, y = np.cos(theta), np.cos(phi)
        val = basis_Q(left_p, idx, x, y, monic=True)
        if identity == "second":
            val = np.sin(theta) * np.sin(phi) * val
        return val

    def rhs(theta, phi):
        X, Y = np.cos((theta - phi) / 2), np.cos((theta + phi) / 2)
        val = scale * _monic_value(*right[:3], right[3], right[4], *quad_map(X, Y))
        if identity == "second":
            val = val * np.sin((theta - phi) / 2) * np.sin((theta + phi) / 2) * (X * X - Y * Y)
        return val

    return lhs, rhs


def _ratios(lhs: Callable, rhs: Callable, samples: int, seed: int, floor: float = 1e-8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out: list[float] = []
    tries = 0
    while len(out) < samples:
        tries += 1
        if tries > 50 * samples:
            raise DomainError("too many degenerate samples")
        theta, phi = rng.uniform(0.0, math.pi, 2)
        a, b = float(lhs(theta, phi)), float(rhs(theta, phi))
        if abs(a) < floor or abs(b) < floor:
            continue
        out.append(a / b)
    return np.array(out)


def check_Q_transform(
    alpha: float, gamma: float, k: int, n: int, samples: int = 20, seed: int = 0,
    identity: str = "both",
) -> float:
    """Max relative spread of LHS/RHS of the square-level quadratic transforms."""
    names = ("first", "second") if identity == "both" else (identity,)
    worst = 0.0
    for name in names:
        if name == "second" and k > (n - 1) // 2:
            continue
        r = _ratios(*q_transform_sides(alpha, gamma, k, n, name), samples, seed)
        worst = max(worst, float(np.max(np.abs(r / r[0] - 1))))
    return worst


def q_transform_ratio(alpha: float, gamma: float, k: int, n: int, identity: str, samples: int = 5, seed: int = 0) -> float:
    """Mean of LHS/RHS; 1 for the first transform and -1 for the second."""
    return float(np.mean(_ratios(*q_transform_sides(alpha, gamma, k, n, identity), samples, seed)))


# -- the operator ℰ_- -------------------------------------------------------------

_D1 = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}


def E_minus_square(alpha: float, beta: float, F: Callable, x: float, y: float, h: float = 1e-4) -> float:
    """ℰ_- F at (x, y), the operator E_- rewritten in x, y for u = 2xy, v = x^2+y^2-1:

        ½ F_xy + [((α+β+1)x + (α-β)y) F_y - ((α-β)x + (α+β+1)y) F_x] / (2(x^2-y^2)).

    Derivatives are fourth-order central differences in extended precision.
    """
    x0, y0, hh = np.longdouble(x), np.longdouble(y), np.longdouble(h)
    f = lambda i, j: np.longdouble(F(x0 + i * hh, y0 + j * hh))  # noqa: E731
    fx = sum(c * f(i, 0) for i, c in _D1.items()) / (12 * hh)
    fy = sum(c * f(0, j) for j, c in _D1.items()) / (12 * hh)
    fxy = sum(ci * cj * f(i, j) for i, ci in _D1.items() for j, cj in _D1.items()) / (144 * hh * hh)
    a1 = alpha + beta + 1
    a2 = alpha - beta
    first = (a1 * x0 + a2 * y0) * fy - (a2 * x0 + a1 * y0) * fx
    return float(fxy / 2 + first / (2 * (x0 * x0 - y0 * y0)))


def _cos_pair_extended(x, y):
    x, y = np.longdouble(x), np.longdouble(y)
    ss = np.sqrt(1 - x * x) * np.sqrt(1 - y * y)
    return x * y + ss, x * y - ss


def check_E_minus(
    alpha: float, beta: float, k: int, n: int, samples: int = 20, seed: int = 0, h: float = 1e-4,
) -> float:
    """ℰ_- applied to Q1even(k, 2n) at γ = -1/2 against Q1even(k, 2n-2) at γ = +1/2.

    Returns the relative spread of the ratio for k < n and max |ℰ_- Q| for
    k = n. Sample points keep 2h away from the edges and from |x| = |y|.
    """
    if not (0 <= k <= n) or n < 1:
        raise IndexRangeError("need 0 <= k <= n and n >= 1")
    p = BiangleParams(alpha, beta, -0.5)
    t = p.table(n + 2)
    target = BiangleParams(alpha, beta, 0.5)
    idx = BasisIndex(k, 2 * n - 2, "Q1even") if k < n else None
    rng = np.random.default_rng(seed)
    vals: list[float] = []
    tries = 0
    while len(vals) < samples:
        tries += 1
        if tries > 50 * samples:
            raise DomainError("too many degenerate samples")
        x, y = rng.uniform(-0.95, 0.95, 2)
        if abs(abs(x) - abs(y)) < 0.05:
            continue
        lhs = E_minus_square(
            alpha, beta, lambda a, b: pair_basis_minus(t, k, n, *_cos_pair_extended(a, b)), x, y, h
        )
        if idx is None:
            vals.append(abs(lhs))
            continue
        rhs = float(basis_Q(target, idx, x, y))
        if abs(rhs) < 1e-6:
            continue
        vals.append(lhs / rhs)
    r = np.array(vals)
    if idx is None:
        return float(r.max())
    return float(np.max(np.abs(r / r[0] - 1)))


def E_minus_constant(alpha: float, beta: float, k: int, n: int, samples: int = 5, seed: int = 0, h: float = 1e-3) -> float:
    """Mean of ℰ_- Q1even(k,2n) / Q1even(k,2n-2) with monic inner polynomials.

    The leading-coefficient count gives (n-k)(n+k+α+β+1).
    """
    if not (0 <= k < n):
        raise IndexRangeError("need 0 <= k < n")
    src = monic_basis(BiangleParams(alpha, beta, -0.5), n)
    dst = monic_basis(BiangleParams(alpha, beta, 0.5), n - 1)
    rng = np.random.default_rng(seed)
    out: list[float] = []
    while len(out) < samples:
        x, y = rng.uniform(-0.9, 0.9, 2)
        if abs(abs(x) - abs(y)) < 0.05:
            continue
        lhs = E_minus_square(alpha, beta, lambda a, b: src(k, n, *quad_map(float(a), float(b))), x, y, h)
        rhs = float(dst(k, n - 1, *quad_map(x, y)))
        if abs(rhs) < 1e-6:
            continue
        out.append(lhs / rhs)
    return float(np.mean(out))

