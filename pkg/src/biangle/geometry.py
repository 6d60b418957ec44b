"""Coordinate maps between the square, the triangle below the diagonal and Ω.

Ω = {(u, v): 1+u+v > 0, 1-u+v > 0, u^2 > 4v}. Two maps land on it:

* ``sym_map(x, y) = (x+y, xy)``, a bijection from {-1 < x < y < 1};
* ``quad_map(x, y) = (2xy, x^2+y^2-1)``, four-to-one from the square, with
  fibers given by ``orbit4``.

All functions accept scalars or arrays and broadcast.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "CLOSURE_TOL",
    "omega_margins",
    "in_omega",
    "in_omega_closure",
    "sym_map",
    "sym_preimage",
    "quad_map",
    "quad_preimage",
    "cos_pair",
    "orbit4",
    "jacobian_sym",
    "jacobian_quad",
]

CLOSURE_TOL = 1e-12


def omega_margins(u, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three defining quantities 1-u+v, 1+u+v and u^2-4v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return 1 - u + v, 1 + u + v, u * u - 4 * v


def in_omega(u, v):
    a, b, c = omega_margins(u, v)
    return (a > 0) & (b > 0) & (c > 0)


def in_omega_closure(u, v, tol: float = CLOSURE_TOL):
    a, b, c = omega_margins(u, v)
    return (a >= -tol) & (b >= -tol) & (c >= -tol)


def _require_closure(u, v) -> None:
    if not np.all(in_omega_closure(u, v)):
        raise DomainError("point outside the closure of Ω")


def sym_map(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x + y, x * y


def sym_preimage(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Roots x <= y of z^2 - u z + v, computed without cancellation."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    disc = u * u - 4 * v
    if np.any(disc < -CLOSURE_TOL):
        raise DomainError("u^2 < 4v: no real preimage")
    root = np.sqrt(np.maximum(disc, 0.0))
    sgn = np.where(u >= 0, 1.0, -1.0)
    big = 0.5 * (u + sgn * root)
    safe = np.where(big == 0, 1.0, big)
    small = np.where(big == 0, 0.0, v / safe)
    return np.minimum(big, small), np.maximum(big, small)


def quad_map(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2 * x * y, x * x + y * y - 1


def quad_preimage(u, v) -> tuple[np.ndarray, np.ndarray]:
    """The fiber point with x <= y and x + y >= 0."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    _require_closure(u, v)
    plus = np.sqrt(np.maximum(1 + u + v, 0.0))
    minus = np.sqrt(np.maximum(1 - u + v, 0.0))
    return 0.5 * (plus - minus), 0.5 * (plus + minus)


def cos_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    """(cos(θ-φ), cos(θ+φ)) for x = cos θ, y = cos φ.

    This is the sym-preimage pair of quad_map(x, y), larger entry first,
    computed without square roots of differences.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    prod = x * y
    ss = np.sqrt(np.maximum(1 - x * x, 0.0)) * np.sqrt(np.maximum(1 - y * y, 0.0))
    return prod + ss, prod - ss


def orbit4(x, y) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Fiber of quad_map: (x,y), (y,x), (-x,-y), (-y,-x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return ((x, y), (y, x), (-x, -y), (-y, -x))


def jacobian_sym(x, y) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def jacobian_quad(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 4 * np.abs(x * x - y * y)
