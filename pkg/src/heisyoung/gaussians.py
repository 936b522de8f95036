"""Gaussian data types, L^p norms, and quadrature/triple specifications.

A Gaussian here is G(x) = c * exp(-(x-a)^T Q (x-a) + i b.x) with Q real
symmetric positive definite, a and b real vectors, and c a complex amplitude.
On the Heisenberg group the same object lives on R^{2d+1} with coordinates
(x_1..x_{2d}, t); the last axis is the central direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import ExponentProfile

__all__ = [
    "GaussianR",
    "GaussianH",
    "QuadratureSpec",
    "CompatibleTripleSpec",
    "lp_norm",
    "compatible_euclid_triple",
]

_SYM_TOL = 1e-12
_EIG_FLOOR = 1e-12


def _validated_form(Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"Q must be a square matrix, got shape {Q.shape}")
    scale = np.linalg.norm(Q)
    if np.linalg.norm(Q - Q.T) > _SYM_TOL * max(scale, 1.0):
        raise ValueError("Q must be symmetric (within 1e-12, scale-relative)")
    Q = 0.5 * (Q + Q.T)
    eigmin = float(np.linalg.eigvalsh(Q)[0])
    if eigmin <= _EIG_FLOOR * max(scale, 1.0):
        raise ValueError(f"Q must be positive definite; min eigenvalue {eigmin:.3e} is degenerate")
    return Q


@dataclass(frozen=True)
class GaussianR:
    """Gaussian c * exp(-(x-a)^T Q (x-a) + i b.x) on R^m."""

    Q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: complex = 1.0 + 0.0j

    def __post_init__(self):
        Q = _validated_form(self.Q)
        m = Q.shape[0]
        a = np.zeros(m) if self.a is None else np.asarray(self.a, dtype=float).reshape(-1)
        b = np.zeros(m) if self.b is None else np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape != (m,) or b.shape != (m,):
            raise ValueError(f"a and b must be length-{m} vectors")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at one point (m,) or a batch (N, m)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        z = pts - self.a
        expo = -np.einsum("ni,ij,nj->n", z, self.Q, z) + 1j * (pts @ self.b)
        out = self.c * np.exp(expo)
        return out[0] if single else out

    def lp_norm(self, p: float) -> float:
        return lp_norm(self, p)


@dataclass(frozen=True)
class GaussianH(GaussianR):
    """Gaussian on H^d, i.e. on R^{2d+1} with the t-axis last."""

    d: int = field(init=False, default=0)

    def __post_init__(self):
        super().__post_init__()
        if self.m % 2 != 1 or self.m < 3:
            raise ValueError(f"a Heisenberg Gaussian needs odd dimension 2d+1 >= 3, got {self.m}")
        object.__setattr__(self, "d", (self.m - 1) // 2)


def lp_norm(g: GaussianR, p: float) -> float:
    """||G||_p = |c| pi^{m/2p} det(p Q)^{-1/2p}; for p = inf, the sup |c|.

    The frequency b never enters (it only rotates the phase).
    """
    if p == math.inf:
        return abs(g.c)
    if p < 1.0:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    sign, logdet = np.linalg.slogdet(p * g.Q)
    if sign <= 0:  # unreachable for validated Q; defensive
        raise ValueError("p*Q must have positive determinant")
    m = g.m
    return float(abs(g.c) * math.exp((m / (2.0 * p)) * math.log(math.pi) - logdet / (2.0 * p)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the numeric integration routines.

    scheme : 'tensor-hermite' (Gauss-Hermite per whitened axis) or
        'truncated-trapezoid' (uniform nodes on a truncated box).
    nodes : nodes per axis for the tensor-product oracle (>= 8).
    radius_multiplier : half-width of the truncated box in whitened standard
        deviations (>= 4); used by the trapezoid scheme.
    aux_nodes : nodes for the auxiliary 1-D integral of the fast Heisenberg
        evaluator (>= 8).
    """

    scheme: str = "tensor-hermite"
    nodes: int = 24
    radius_multiplier: float = 8.0
    aux_nodes: int = 64

    def __post_init__(self):
        if self.scheme not in ("tensor-hermite", "truncated-trapezoid"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.nodes < 8:
            raise ValueError(f"nodes must be >= 8, got {self.nodes}")
        if self.radius_multiplier < 4.0:
            raise ValueError(f"radius_multiplier must be >= 4, got {self.radius_multiplier}")
        if self.aux_nodes < 8:
            raise ValueError(f"aux_nodes must be >= 8, got {self.aux_nodes}")


@dataclass(frozen=True)
class CompatibleTripleSpec:
    """Canonical compatible Gaussian triple on H^d.

    G_j(x, t) = c_j * exp(-gamma_j |L x|^2 - gamma_j a t^2 + i b t)

    with gamma = gamma(p).  The diffuseness measure is
    max(a^{1/2}, a, |b|) * ||L^{-1}||_2^2; small values mean the triple is
    spread along the central direction relative to the horizontal scale.
    """

    profile: ExponentProfile
    L: np.ndarray
    a: float
    b: float = 0.0
    amplitudes: tuple = (1.0 + 0j, 1.0 + 0j, 1.0 + 0j)

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] % 2 != 0:
            raise ValueError(f"L must be square of even size, got shape {L.shape}")
        if np.linalg.cond(L) > 1e12:
            raise ValueError("L is numerically singular")
        if not (self.a > 0):
            raise ValueError(f"a must be positive, got {self.a}")
        self.profile.gamma_or_raise()
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "amplitudes", tuple(complex(c) for c in self.amplitudes))

    @property
    def d(self) -> int:
        return self.L.shape[0] // 2

    def diffuseness(self) -> float:
        Linv_norm = float(np.linalg.norm(np.linalg.inv(self.L), 2))
        return max(math.sqrt(self.a), self.a, abs(self.b)) * Linv_norm**2

    def to_gaussians(self) -> tuple:
        """The three analytic Gaussians on R^{2d+1}."""
        gamma = self.profile.gamma_or_raise()
        n = 2 * self.d + 1
        LtL = self.L.T @ self.L
        out = []
        for j in range(3):
            Q = np.zeros((n, n))
            Q[:-1, :-1] = gamma[j] * LtL
            Q[-1, -1] = gamma[j] * self.a
            b = np.zeros(n)
            b[-1] = self.b
            out.append(GaussianH(Q=Q, a=np.zeros(n), b=b, c=self.amplitudes[j]))
        return tuple(out)


def compatible_euclid_triple(
    profile: ExponentProfile,
    L: np.ndarray,
    centers: np.ndarray | None = None,
    freq: np.ndarray | None = None,
    amplitudes=(1.0, 1.0, 1.0),
) -> tuple:
    """Extremizing Euclidean triple G_j = c_j exp(-gamma_j |L(x-a_j)|^2 + i b.x).

    ``centers`` is a (3, m) array summing to zero along axis 0 (default zeros)
    and ``freq`` a shared frequency vector.  Such triples attain A_p^m.
    """
    gamma = profile.gamma_or_raise()
    L = np.asarray(L, dtype=float)
    m = L.shape[0]
    centers = np.zeros((3, m)) if centers is None else np.asarray(centers, dtype=float)
    if centers.shape != (3, m):
        raise ValueError(f"centers must have shape (3, {m})")
    if np.linalg.norm(centers.sum(axis=0)) > 1e-9 * (1.0 + np.linalg.norm(centers)):
        raise ValueError("centers must sum to zero")
    freq = np.zeros(m) if freq is None else np.asarray(freq, dtype=float)
    LtL = L.T @ L
    return tuple(
        GaussianR(Q=gamma[j] * LtL, a=centers[j], b=freq, c=amplitudes[j]) for j in range(3)
    )
