"""Heisenberg group arithmetic and the standard symplectic structure.

The group H^d is R^{2d} x R with product

    (x, t) * (x', t') = (x + x', t + t' + sigma(x, x')),

where sigma(x, y) = x^T J y and J is the standard symplectic form on R^{2d}
(J = [[0, I], [-I, 0]] in d-by-d blocks).  Everything here is plain float
arithmetic on small vectors; the heavy lifting happens elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HeisPoint",
    "heis_mul",
    "heis_inv",
    "heis_identity",
    "sigma",
    "standard_symplectic_form",
    "is_symplectic",
]

_COND_LIMIT = 1e12


def standard_symplectic_form(d: int) -> np.ndarray:
    """Return the 2d-by-2d matrix J with J = [[0, I], [-I, 0]]."""
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


@dataclass(frozen=True)
class HeisPoint:
    """A point (x, t) of H^d with x in R^{2d} and t real."""

    x: np.ndarray
    t: float
    d: int = field(init=False)

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.ndim != 1 or x.size % 2 != 0 or x.size == 0:
            raise ValueError(f"x must be a vector of even positive length, got shape {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "d", x.size // 2)

    def __eq__(self, other):
        if not isinstance(other, HeisPoint):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.x, other.x) and self.t == other.t


def heis_identity(d: int) -> HeisPoint:
    return HeisPoint(np.zeros(2 * d), 0.0)


def _check_same_d(a: HeisPoint, b: HeisPoint) -> None:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: points live in H^{a.d} and H^{b.d}")


def heis_mul(a: HeisPoint, b: HeisPoint) -> HeisPoint:
    """Group product a * b."""
    _check_same_d(a, b)
    return HeisPoint(a.x + b.x, a.t + b.t + sigma(a.x, b.x))


def heis_inv(a: HeisPoint) -> HeisPoint:
    """Group inverse (-x, -t); sigma(x, x) = 0 makes this exact."""
    return HeisPoint(-a.x, -a.t)


def sigma(x: np.ndarray, y: np.ndarray, L: np.ndarray | None = None) -> float:
    """Symplectic form sigma(x, y) = x^T J y, or its pullback sigma_L.

    With ``L`` given, returns sigma_L(x, y) = sigma(L^{-1} x, L^{-1} y).

    Parameters
    ----------
    x, y : vectors of equal even length 2d.
    L : optional invertible 2d-by-2d matrix.  A condition-number estimate
        beyond 1e12 raises ``ValueError``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length vectors, got {x.shape} and {y.shape}")
    if x.size % 2 != 0 or x.size == 0:
        raise ValueError(f"vectors must have even positive length, got {x.size}")
    d = x.size // 2
    if L is not None:
        L = np.asarray(L, dtype=float)
        if L.shape != (2 * d, 2 * d):
            raise ValueError(f"L must be {2*d}x{2*d}, got {L.shape}")
        if np.linalg.cond(L) > _COND_LIMIT:
            raise ValueError("L is numerically singular (condition estimate beyond 1e12)")
        x = np.linalg.solve(L, x)
        y = np.linalg.solve(L, y)
    # x^T J y = <x_q, y_p> - <x_p, y_q>
    return float(x[:d] @ y[d:] - x[d:] @ y[:d])


def is_symplectic(S: np.ndarray, tol: float | None = None) -> bool:
    """Check S^T J S = J in Frobenius norm.

    Default tolerance is 1e-10 * (1 + ||S||_2^2), so the check is scale-aware.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"S must be square, got shape {S.shape}")
    n = S.shape[0]
    if n % 2 != 0:
        raise ValueError(f"S must be even-sized, got {n}x{n}")
    J = standard_symplectic_form(n // 2)
    if tol is None:
        tol = 1e-10 * (1.0 + np.linalg.norm(S, 2) ** 2)
    return float(np.linalg.norm(S.T @ J @ S - J)) <= tol
