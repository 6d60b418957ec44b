"""Partial sums on Ω and on the square, their Lebesgue constants, and
mean-convergence conditions.

Notation: J(z) = (1-z)^{i/2} (1+z)^{j/2} in one variable and
J*(u,v) = (1-u+v)^{i/2} (1+u+v)^{j/2} = J(z1) J(z2) for (u,v) = (z1+z2, z1 z2).
The shifted partial sum on Ω is

    S^{i,j}_n(f)(x) = J*(x) S_n(W^{i,j}; f / J*, x),

where W^{i,j} is the unit-mass weight proportional to J*^2 W_{-1/2}.

Grid scans run on a thread pool; OPX_THREADS caps the number of workers.
Results are assembled in input order, so they do not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, ParameterDomainError, UnsupportedParameterError
from .geometry import cos_pair, orbit4, quad_map, quad_preimage, sym_preimage
from .koornwinder import BiangleParams, pair_kernel_minus
from .opoly1d import (
    JacobiPair,
    RecurrenceTable,
    WeightSpec1D,
    eval_all,
    gauss_rule,
    jacobi_gauss_rule,
    recurrence_jacobi,
    shifted_table,
    weight_eval_gj,
)
from .quadrature import omega_rule, square_rule
from .squarefam import basis_Q, kernel_CK, q_basis_list

__all__ = [
    "worker_count",
    "partial_sum_omega_ij",
    "partial_sum_square",
    "square_coefficients",
    "character_parts",
    "check_decomposition",
    "lebesgue_2d",
    "WeightTriple",
    "ConditionResult",
    "MeanConvergenceReport",
    "mean_convergence_check",
    "mean_convergence_interval",
    "ConvergenceReport",
    "convergence_table",
]


def worker_count() -> int:
    env = os.environ.get("OPX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ParameterDomainError(f"OPX_THREADS must be an integer, got {env!r}") from exc
    return min(8, os.cpu_count() or 1)


def _pmap(fn: Callable, items: Sequence) -> list:
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _half(i: int, j: int, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.sqrt(np.maximum(1 - z, 0.0)) ** i * np.sqrt(np.maximum(1 + z, 0.0)) ** j


def _check_ij(i: int, j: int) -> None:
    if i not in (0, 1) or j not in (0, 1):
        raise ParameterDomainError("shifts i, j are 0 or 1")


# -- partial sums ------------------------------------------------------------------

def partial_sum_omega_ij(
    w: RecurrenceTable, i: int, j: int, f: Callable, n: int, z, degree: int | None = None,
) -> np.ndarray:
    """S^{i,j}_n(W_{-1/2}; f, z) for the base weight of ``w``, at z = (u, v).

    The integral uses the exact product rule of W^{i,j}_{-1/2} with the
    given polynomial ``degree`` (default 2n + 10). f / J* must then be a
    polynomial of degree <= degree - n for the result to be exact.
    """
    _check_ij(i, j)
    degree = 2 * n + 10 if degree is None else int(degree)
    if degree < 2 * n:
        raise ContractError(f"rule degree {degree} < 2n = {2 * n}")
    t_ij = shifted_table(w, i, j, max(n + 2, degree // 2 + 4))
    rule = omega_rule(t_ij, -0.5, degree)
    z1, z2 = rule.pairs
    g = np.asarray(f(*rule.points), dtype=float) / (_half(i, j, z1) * _half(i, j, z2))
    x1, x2 = sym_preimage(*z)
    shape = x1.shape
    x1, x2 = x1.ravel(), x2.ravel()
    K = pair_kernel_minus(t_ij, n, x1[:, None], x2[:, None], z1[None, :], z2[None, :])
    out = (_half(i, j, x1) * _half(i, j, x2)) * (K @ (rule.weights * g))
    return out.reshape(shape)


def _check_minus(p: BiangleParams) -> None:
    if p.gamma != -0.5:
        raise UnsupportedParameterError("expansions are implemented for gamma = -1/2")


def partial_sum_square(p: BiangleParams, f: Callable, n: int, x, degree: int | None = None) -> np.ndarray:
    """𝒮_n(𝒲; f, x) = ∫ f(y) 𝒦_n(x, y) 𝒲(y) dy, x = (x1, x2).

    The symmetrized square rule of Ω-degree ``degree`` (default 2n + 8) is
    exact when f is a polynomial of degree <= degree - n.
    """
    _check_minus(p)
    degree = 2 * n + 8 if degree is None else int(degree)
    if degree < n:
        raise ContractError(f"rule degree {degree} < n = {n}")
    rule = square_rule(p, degree)
    x1, x2 = np.broadcast_arrays(np.asarray(x[0], dtype=float), np.asarray(x[1], dtype=float))
    shape = x1.shape
    x1, x2 = x1.ravel()[:, None], x2.ravel()[:, None]
    total = np.zeros(x1.shape[0])
    for a, b in orbit4(*rule.points):
        fy = np.asarray(f(a, b), dtype=float)
        K = kernel_CK(p, n, (x1, x2), (a[None, :], b[None, :]))
        total += K @ (rule.weights * fy)
    return (total / 4).reshape(shape)


def square_coefficients(p: BiangleParams, f: Callable, n: int, degree: int) -> tuple[list, np.ndarray]:
    """Q-basis indices of degree <= n and the coefficients <f, Q>_𝒲."""
    _check_minus(p)
    rule = square_rule(p, degree)
    idx = q_basis_list(n)
    coef = np.zeros(len(idx))
    for a, b in orbit4(*rule.points):
        fy = np.asarray(f(a, b), dtype=float) * rule.weights
        coef += np.array([basis_Q(p, q, a, b) @ fy for q in idx])
    return idx, coef / 4


# -- decomposition into Ω partial sums -------------------------------------------------

def character_parts(f: Callable) -> dict[str, Callable]:
    """Projections of f onto the four characters of the orbit group.

    With σ(x,y) = (y,x) and ν(x,y) = (-x,-y), the part keyed (s_σ, s_ν)
    transforms by the signs s_σ under σ and s_ν under ν.
    """
    signs = {"++": (1, 1), "+-": (1, -1), "--": (-1, -1), "-+": (-1, 1)}

    def make(ss, sn):
        def part(x, y):
            return 0.25 * (f(x, y) + ss * f(y, x) + sn * f(-x, -y) + ss * sn * f(-y, -x))
        return part

    return {k: make(*v) for k, v in signs.items()}


def _on_omega(g: Callable) -> Callable:
    """g ∘ quad_preimage, a function on Ω."""
    def h(u, v):
        return g(*quad_preimage(u, v))
    return h


def check_decomposition(
    p: BiangleParams, f: Callable, n: int, samples: int = 20, seed: int = 0,
    odd: bool = False, return_parts: bool = False,
):
    """Max |𝒮_m f(x) - RHS(x)| over random x, m = 2n (or 2n+1 with ``odd``).

    RHS = S_n(f_{++}*) + sgn(x1+x2) S^{0,1}_{n'}(f_{+-}*)
          + sgn(x2-x1) S^{1,0}_{n'}(f_{--}*) + sgn(x2^2-x1^2) S^{1,1}_{n-1}(f_{-+}*)

    with n' = n-1 for m = 2n and n' = n for m = 2n+1. Here f_{ab} are the
    character parts of f and g* = g ∘ quad_preimage. For f invariant under
    the orbit group only the first term survives.
    """
    _check_minus(p)
    rng = np.random.default_rng(seed)
    x1, x2 = rng.uniform(-1, 1, (2, samples))
    m = 2 * n + (1 if odd else 0)
    mixed = n if odd else n - 1
    deg = 2 * m + 8
    lhs = partial_sum_square(p, f, m, (x1, x2), degree=deg)
    s = quad_map(x1, x2)
    parts = character_parts(f)
    t = p.table(deg + 4)
    terms = {
        "++": partial_sum_omega_ij(t, 0, 0, _on_omega(parts["++"]), n, s, deg),
        "+-": np.sign(x1 + x2) * _omega_or_zero(t, 0, 1, parts["+-"], mixed, s, deg),
        "--": np.sign(x2 - x1) * _omega_or_zero(t, 1, 0, parts["--"], mixed, s, deg),
        "-+": np.sign(x2 * x2 - x1 * x1) * _omega_or_zero(t, 1, 1, parts["-+"], n - 1, s, deg),
    }
    rhs = sum(terms.values())
    resid = float(np.max(np.abs(lhs - rhs)))
    if return_parts:
        return resid, lhs, terms
    return resid


def _omega_or_zero(t, i, j, g, n, s, deg) -> np.ndarray:
    if n < 0:
        return np.zeros_like(s[0])
    return partial_sum_omega_ij(t, i, j, _on_omega(g), n, s, deg)


# -- Lebesgue constants ------------------------------------------------------------------

@dataclass
class LebesgueInfo:
    value: float
    argmax: tuple
    coarse_nodes: int
    fine_nodes: int
    refine_change: float


def _theta_grid(gridsize: int) -> np.ndarray:
    return np.linspace(0.0, math.pi, gridsize + 1)


def _omega_lebesgue_values(tab, i, j, n, xs, m, pairs) -> np.ndarray:
    rule = gauss_rule(tab, m)
    z, lam = rule.nodes, rule.weights
    K = eval_all(tab, n, xs).T @ eval_all(tab, n, z)
    K = K * np.outer(_half(i, j, xs), 1.0 / _half(i, j, z))
    W = np.outer(lam, lam)

    def one(pair):
        a, b = pair
        A, B = K[a], K[b]
        M = 0.5 * (A[:, None] * B[None, :] + B[:, None] * A[None, :])
        return float(np.sum(np.abs(M) * W))

    return np.array(_pmap(one, pairs))


def _square_lebesgue_values(p, n, theta, m, cells) -> np.ndarray:
    """Lebesgue function of 𝒮_n at (cos θ[a1], cos θ[a2]) for (a1, a2) in cells."""
    rule = jacobi_gauss_rule(p.alpha, p.beta, m)
    z, lam = rule.nodes, rule.weights
    h, g = n // 2, (n - 1) // 2
    terms = [((0, 0), h, 1.0), ((1, 1), h - 1, p.d(1, 1)), ((0, 1), g, p.d(0, 1)), ((1, 0), g, p.d(1, 0))]
    X = np.cos(theta)
    kern = {}
    for (i, j), deg, _ in terms:
        if deg < 0:
            kern[i, j] = None
            continue
        t = recurrence_jacobi(JacobiPair(p.alpha + i, p.beta + j), deg + 1)
        kern[i, j] = eval_all(t, deg, X).T @ eval_all(t, deg, z)
    sp = np.sqrt((1 + z)[:, None] * (1 + z)[None, :])
    sm = np.sqrt((1 - z)[:, None] * (1 - z)[None, :])
    ypre = {(1, 1): -sp * sm, (0, 1): sp, (1, 0): -sm}
    patterns = ((1, 1, 1), (-1, 1, -1), (1, -1, -1), (-1, -1, 1))
    W = np.outer(lam, lam)

    def one(cell):
        a1, a2 = cell
        d, s = a1 - a2, a1 + a2
        th1, th2 = theta[a1], theta[a2]
        xpre = {
            (1, 1): math.cos(th1) ** 2 - math.cos(th2) ** 2,
            (0, 1): math.cos(th1) + math.cos(th2),
            (1, 0): math.cos(th1) - math.cos(th2),
        }
        parts = {}
        for (i, j), deg, c in terms:
            Kt = kern[i, j]
            if Kt is None:
                parts[i, j] = 0.0
                continue
            val = 0.5 * (Kt[d][:, None] * Kt[s][None, :] + Kt[s][:, None] * Kt[d][None, :])
            if (i, j) != (0, 0):
                val = c * xpre[i, j] * ypre[i, j] * val
            parts[i, j] = val
        acc = 0.0
        for e11, e01, e10 in patterns:
            tot = parts[0, 0] + e11 * parts[1, 1] + e01 * parts[0, 1] + e10 * parts[1, 0]
            acc += float(np.sum(np.abs(tot) * W))
        return acc / 4

    return np.array(_pmap(one, cells))


def lebesgue_2d(
    domain_tag: str, p: BiangleParams, i: int, j: int, n: int,
    grid: int | None = None, refine: bool = True, return_info: bool = False,
):
    """Estimate of the uniform norm of S^{i,j}_n on Ω or of 𝒮_n on the square.

    The Lebesgue function is the integral of |kernel| against the weight,
    computed with product Gauss rules of the one-variable measure (m nodes
    per variable) and maximized over a θ-grid with ``grid`` intervals
    (default 4n), restricted to a fundamental region of the symmetry group
    and including the diagonal and its half-step neighbours. With
    ``refine`` the best grid points are recomputed with 2m nodes and the
    refined maximum is returned.
    """
    _check_minus(p)
    _check_ij(i, j)
    if n == 0:
        val = 1.0
        info = LebesgueInfo(val, (0.0, 0.0), 0, 0, 0.0)
        return (val, info) if return_info else val
    grid = 4 * n if grid is None else int(grid)
    if grid < 2 * n:
        raise ContractError("grid must have at least 2n intervals")
    top = 16
    if domain_tag == "omega":
        m = 2 * n + 9
        theta = _theta_grid(2 * grid)  # even indices form the grid, odd ones the half steps
        pairs = [(a, b) for a in range(0, 2 * grid + 1, 2) for b in range(0, a + 1, 2)]
        pairs += [(a + 1, a) for a in range(0, 2 * grid, 2)]
        xs = np.cos(theta)
        tab = recurrence_jacobi(JacobiPair(p.alpha + i, p.beta + j), 4 * m + 2)
        vals = _omega_lebesgue_values(tab, i, j, n, xs, m, pairs)
        order = np.argsort(vals)[::-1][:top]
        best = [pairs[k] for k in order]
        fine = _omega_lebesgue_values(tab, i, j, n, xs, 2 * m, best) if refine else vals[order]
        coords = [(float(theta[a]), float(theta[b])) for a, b in best]
    elif domain_tag == "square":
        if (i, j) != (0, 0):
            raise ParameterDomainError("square Lebesgue constants have no shifts")
        m = n + 9
        theta = _theta_grid(grid)
        cells = [(a1, a2) for a1 in range(grid + 1) for a2 in range(a1 + 1) if a1 + a2 <= grid]
        vals = _square_lebesgue_values(p, n, theta, m, cells)
        order = np.argsort(vals)[::-1][:top]
        best = [cells[k] for k in order]
        fine = _square_lebesgue_values(p, n, theta, 2 * m, best) if refine else vals[order]
        coords = [(float(theta[a]), float(theta[b])) for a, b in best]
    else:
        raise ValueError(f"unknown domain {domain_tag!r}")
    k = int(np.argmax(fine))
    val = float(fine[k])
    coarse = float(vals[order[0]])
    info = LebesgueInfo(val, coords[k], m, 2 * m if refine else m, abs(val - coarse) / val)
    return (val, info) if return_info else val


# -- mean convergence conditions ----------------------------------------------------------

def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class WeightTriple:
    """Base weight w with the outer weights u and v, all generalized Jacobi."""

    w: WeightSpec1D
    u: WeightSpec1D = field(default_factory=WeightSpec1D)
    v: WeightSpec1D = field(default_factory=WeightSpec1D)

    def nodes(self) -> list[float]:
        pts = {t for spec in (self.w, self.u, self.v) for t, _ in spec.interior}
        return [-1.0] + sorted(pts) + [1.0]

    @staticmethod
    def exponent(spec: WeightSpec1D, point: float):
        if point == 1.0:
            return spec.gamma0
        if point == -1.0:
            return spec.gamma_end
        for t, g in spec.interior:
            if t == point:
                return g
        return 0

    def U(self, a, b) -> np.ndarray:
        """U(u,v) = u(x)u(y) on Ω."""
        x, y = sym_preimage(a, b)
        return weight_eval_gj(self.u, x) * weight_eval_gj(self.u, y)

    def V(self, a, b) -> np.ndarray:
        x, y = sym_preimage(a, b)
        return weight_eval_gj(self.v, x) * weight_eval_gj(self.v, y)

    def U_square(self, x, y) -> np.ndarray:
        """𝒰(cos θ, cos φ) = u(cos(θ-φ)) u(cos(θ+φ))."""
        c1, c2 = cos_pair(x, y)
        return weight_eval_gj(self.u, c1) * weight_eval_gj(self.u, c2)

    def V_square(self, x, y) -> np.ndarray:
        c1, c2 = cos_pair(x, y)
        return weight_eval_gj(self.v, c1) * weight_eval_gj(self.v, c2)


@dataclass(frozen=True)
class ConditionResult:
    name: str
    point: float
    exponent: Fraction
    passed: bool


@dataclass(frozen=True)
class MeanConvergenceReport:
    """``verdict`` is "sufficient" when every condition holds, else "unknown"."""

    p: Fraction
    conditions: tuple
    dominated: bool
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "sufficient"


def _linear_conditions(t: WeightTriple, point: float):
    """(name, A, B, variable): the condition is A·var + B > -1, var = p or q."""
    ew = _exact(t.exponent(t.w, point))
    eu = _exact(t.exponent(t.u, point))
    ev = _exact(t.exponent(t.v, point))
    delta = Fraction(1, 2) if abs(point) == 1.0 else Fraction(0)
    return [
        ("u^p w", eu, ew, "p"),
        ("u^p (w J)^(-p/2) w", eu - (ew + delta) / 2, ew, "p"),
        ("v^-q w", -ev, ew, "q"),
        ("v^-q (w J)^(-q/2) w", -ev - (ew + delta) / 2, ew, "q"),
    ]


def _dominated(t: WeightTriple, samples: int = 2001) -> bool:
    """u <= v: exponent comparison at each singular point plus a sampled ratio."""
    for pt in t.nodes():
        if _exact(t.exponent(t.u, pt)) < _exact(t.exponent(t.v, pt)):
            return False
    x = np.cos(np.linspace(0, math.pi, samples + 2)[1:-1])
    x = x[~np.isin(x, [pt for pt in t.nodes()])]
    ratio = weight_eval_gj(t.u, x) / weight_eval_gj(t.v, x)
    return bool(np.all(ratio <= 1 + 1e-12))


def mean_convergence_check(t: WeightTriple, p) -> MeanConvergenceReport:
    """Integrability conditions for L^p convergence with weights u, v.

    Each condition asks that a product of generalized Jacobi factors be
    integrable, i.e. that its exponent at every singular point exceed -1.
    Exponents are exact fractions; q = p/(p-1).
    """
    p = _exact(p)
    if not p > 1:
        raise ParameterDomainError("need 1 < p < inf")
    q = p / (p - 1)
    results = []
    for pt in t.nodes():
        for name, A, B, var in _linear_conditions(t, pt):
            e = A * (p if var == "p" else q) + B
            results.append(ConditionResult(name, pt, e, e > -1))
    dom = _dominated(t)
    ok = dom and all(r.passed for r in results)
    return MeanConvergenceReport(p, tuple(results), dom, "sufficient" if ok else "unknown")


def mean_convergence_interval(t: WeightTriple) -> tuple[Fraction, Fraction | float]:
    """Open interval (lo, hi) of p in (1, inf) on which every condition holds.

    Returns float('inf') for an unbounded upper end; (1, 1) when empty or
    when u <= v fails.
    """
    lo, hi = Fraction(1), math.inf
    for pt in t.nodes():
        for _, A, B, var in _linear_conditions(t, pt):
            # A·var > -1 - B, with -1 - B < 0 since B > -1
            if A >= 0:
                continue
            bound = (-1 - B) / A
            if var == "p":
                hi = min(hi, bound) if hi != math.inf else bound
            else:
                # q < bound with q = p/(p-1) > 1
                if bound <= 1:
                    return Fraction(1), Fraction(1)
                lo = max(lo, bound / (bound - 1))
    if not _dominated(t) or (hi != math.inf and hi <= lo):
        return Fraction(1), Fraction(1)
    return lo, hi


# -- convergence experiments ---------------------------------------------------------------

@dataclass
class ConvergenceReport:
    degrees: list
    errors: list
    lebesgue: list
    fit_slope: float
    p_norm: float
    fit: str = "loglog"


def _fit(degrees, errors, kind: str) -> float:
    n = np.asarray(degrees, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0
    if keep.sum() < 2:
        return float("nan")
    xs = np.log(n[keep]) if kind == "loglog" else n[keep]
    return float(np.polyfit(xs, np.log(e[keep]), 1)[0])


def convergence_table(
    p: BiangleParams, f: Callable, p_norm: float, degrees: Sequence[int],
    fit: str = "loglog", with_lebesgue: bool = False, degree: int | None = None,
) -> ConvergenceReport:
    """L^p(𝒲) errors of 𝒮_n f for each n in ``degrees``.

    Coefficients and norms use one symmetrized square rule of Ω-degree
    ``degree`` (default 4 max(degrees) + 40), so the projections are the
    discrete ones of that rule. The slope is a least-squares fit of log
    error against log n ("loglog") or n ("loglinear").
    """
    _check_minus(p)
    degrees = [int(d) for d in degrees]
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ParameterDomainError("degrees must be increasing")
    if fit not in ("loglog", "loglinear"):
        raise ValueError("fit is 'loglog' or 'loglinear'")
    top = max(degrees)
    degree = 4 * top + 40 if degree is None else int(degree)
    rule = square_rule(p, degree)
    idx = q_basis_list(top)
    pts = orbit4(*rule.points)
    fvals = np.concatenate([np.asarray(f(a, b), dtype=float) * np.ones_like(a) for a, b in pts])
    wts = np.concatenate([rule.weights / 4] * 4)
    Q = np.array([np.concatenate([basis_Q(p, q, a, b) for a, b in pts]) for q in idx])
    coef = Q @ (wts * fvals)
    qdeg = np.array([q.n for q in idx])
    errors = []
    for n in degrees:
        sel = qdeg <= n
        approx = coef[sel] @ Q[sel]
        diff = np.abs(approx - fvals)
        if math.isinf(p_norm):
            errors.append(float(diff.max()))
        else:
            errors.append(float(np.sum(wts * diff**p_norm) ** (1.0 / p_norm)))
    if with_lebesgue:
        leb = _pmap(lambda n: lebesgue_2d("square", p, 0, 0, n), degrees)
    else:
        leb = [float("nan")] * len(degrees)
    return ConvergenceReport(degrees, errors, leb, _fit(degrees, errors, fit), float(p_norm), fit)
