"""Admissible exponent triples and the sharp trilinear constant.

A triple p = (p1, p2, p3) with each p_j in [1, inf] is *admissible* when
sum_j 1/p_j = 2.  The associated sharp constant for the trilinear convolution
form on R is

    A_p = prod_j p_j^{1/(2 p_j)} * q_j^{-1/(2 q_j)},    q_j = p_j / (p_j - 1),

with the convention inf^{±1/inf} = 1 at the endpoints.  On R^m the constant is
A_p^m.  For interior triples (all p_j in (1, inf)) the optimal Gaussian width
ratios are gamma_j = p'_j / p'_1 (conjugate-exponent ratios, gamma_1 = 1);
endpoint triples carry A_p only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "ExponentProfile",
    "exponent_profile",
    "conjugate_exponent",
    "sharp_constant",
    "gamma_ratios",
    "gamma_stationarity_residual",
    "parse_exponent",
]

_ADMISSIBILITY_TOL = 1e-12


def parse_exponent(text) -> float:
    """Parse an exponent given as 'inf', a rational like '3/2', or a float."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s in {"inf", "infinity", "oo"}:
        return math.inf
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def conjugate_exponent(p: float) -> float:
    """Holder conjugate q = p/(p-1), with conjugate(1) = inf and conjugate(inf) = 1."""
    if p == math.inf:
        return 1.0
    if p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def _half_power(p: float) -> float:
    """p^{1/(2p)} with the endpoint convention inf^{1/inf} = 1."""
    if p == math.inf:
        return 1.0
    return p ** (1.0 / (2.0 * p))


def _inv_weight(p: float) -> float:
    """1/p with 1/inf = 0."""
    return 0.0 if p == math.inf else 1.0 / p


def sharp_constant(p_triple) -> float:
    """A_p = prod_j p_j^{1/2p_j} q_j^{-1/2q_j} for an admissible triple."""
    return math.prod(_half_power(p) / _half_power(conjugate_exponent(p)) for p in p_triple)


def gamma_ratios(p_triple) -> np.ndarray:
    """Optimal Gaussian width ratios gamma_j = p'_j / p'_1 for interior triples."""
    qs = [conjugate_exponent(p) for p in p_triple]
    if any(q == math.inf or q == 1.0 for q in qs):
        raise ValueError("gamma is undefined for endpoint triples (some p_j in {1, inf})")
    return np.array([q / qs[0] for q in qs])


@dataclass(frozen=True)
class ExponentProfile:
    """An admissible exponent triple with its derived quantities.

    Attributes
    ----------
    p : tuple of three floats in [1, inf], sum of reciprocals equal to 2.
    q : the Holder conjugates.
    sharp : A_p.
    gamma : width ratios (gamma_1 = 1), or None for endpoint triples.
    """

    p: tuple
    q: tuple
    sharp: float
    gamma: np.ndarray | None

    @property
    def is_interior(self) -> bool:
        return self.gamma is not None

    def sharp_power(self, m: int) -> float:
        """The sharp constant A_p^m for the form on R^m."""
        return self.sharp**m

    def gamma_or_raise(self) -> np.ndarray:
        if self.gamma is None:
            raise ValueError("endpoint profile carries A_p only; gamma is undefined")
        return self.gamma


def exponent_profile(p_triple) -> ExponentProfile:
    """Validate admissibility and build an :class:`ExponentProfile`.

    Raises ``ValueError`` when some p_j < 1 or sum_j 1/p_j differs from 2 by
    more than 1e-12.
    """
    p = tuple(parse_exponent(v) for v in p_triple)
    if len(p) != 3:
        raise ValueError(f"expected three exponents, got {len(p)}")
    for v in p:
        if not (v >= 1.0):  # catches NaN as well
            raise ValueError(f"exponent must lie in [1, inf], got {v}")
    total = sum(_inv_weight(v) for v in p)
    if abs(total - 2.0) > _ADMISSIBILITY_TOL:
        raise ValueError(f"inadmissible triple: sum of reciprocals is {total!r}, expected 2")
    q = tuple(conjugate_exponent(v) for v in p)
    interior = all(1.0 < v < math.inf for v in p)
    gamma = gamma_ratios(p) if interior else None
    return ExponentProfile(p=p, q=q, sharp=sharp_constant(p), gamma=gamma)


def gamma_stationarity_residual(p_triple, gamma) -> float:
    """Residual of the stationarity system tying gamma to p.

    For interior admissible p, the optimal Gaussian widths satisfy

        gamma_j * (gamma_k + gamma_l) / D = 1 / p_j,
        D = gamma_1 gamma_2 + gamma_1 gamma_3 + gamma_2 gamma_3,

    for each j with {k, l} the complementary indices.  Returns the max
    absolute violation; the exact gamma(p) gives 0 up to round-off.
    """
    p = tuple(parse_exponent(v) for v in p_triple)
    g = np.asarray(gamma, dtype=float)
    if g.shape != (3,) or np.any(g <= 0):
        raise ValueError("gamma must be three positive numbers")
    D = g[0] * g[1] + g[0] * g[2] + g[1] * g[2]
    residual = 0.0
    for j in range(3):
        k, l = (j + 1) % 3, (j + 2) % 3
        residual = max(residual, abs(g[j] * (g[k] + g[l]) / D - 1.0 / p[j]))
    return residual
