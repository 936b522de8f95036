"""Factor an invertible matrix as L = S M with S symplectic, ||M|| minimal.

The minimal value is ||L^T J L||^{1/2}, attained constructively: K = L^T J L is
antisymmetric and nonsingular, so it splits into orthogonal invariant planes
on which it acts as [[0, t_j], [-t_j, 0]] with t_j > 0.  Rescaling each plane
by sqrt(t_j) and permuting into the standard symplectic layout turns K into J
exactly, which is the statement that S = L M^{-1} is symplectic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heisenberg import standard_symplectic_form

__all__ = [
    "FactorizationResult",
    "antisymmetric_canonical",
    "canonical_blocks",
    "symplectic_factor",
    "random_symplectic",
]

_SING_TOL = 1e-12
_COND_LIMIT = 1e10


@dataclass(frozen=True)
class FactorizationResult:
    """L = S @ M with S symplectic; t are the invariant-plane scalars."""

    S: np.ndarray
    M: np.ndarray
    t: np.ndarray
    residual: float

    @property
    def operator_norm(self) -> float:
        """||M||_2, equal to max_j sqrt(t_j)."""
        return float(np.sqrt(self.t[0]))


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Make the first nonzero coordinate positive (deterministic output)."""
    nz = np.nonzero(np.abs(v) > 1e-12 * np.max(np.abs(v)))[0]
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def canonical_blocks(t) -> np.ndarray:
    """Block-diagonal matrix with blocks [[0, t_j], [-t_j, 0]]."""
    t = np.asarray(t, dtype=float)
    n = 2 * t.size
    K = np.zeros((n, n))
    for j, tj in enumerate(t):
        K[2 * j, 2 * j + 1] = tj
        K[2 * j + 1, 2 * j] = -tj
    return K


def antisymmetric_canonical(K: np.ndarray):
    """Orthogonal reduction of a nonsingular antisymmetric matrix.

    Returns (O1, t) with K = O1^T K' O1, where K' = canonical_blocks(t) and
    t is descending.  Planes are built from the SPD matrix K^T K = -K^2: for a
    unit eigenvector v with eigenvalue t^2, the partner w = -K v / t completes
    an orthonormal pair on which K acts as the 2x2 block exactly; repeated
    eigenvalues are handled by deflating the already-paired directions.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    n = K.shape[0]
    if n % 2 != 0:
        raise ValueError(f"antisymmetric canonical form needs even size, got {n}")
    scale = np.linalg.norm(K)
    if scale == 0.0 or np.linalg.norm(K + K.T) > 1e-12 * scale:
        raise ValueError("matrix is not antisymmetric within tolerance")
    d = n // 2

    mu, vecs = np.linalg.eigh(K.T @ K)
    order = np.argsort(-mu)
    t_top = np.sqrt(max(mu[order[0]], 0.0))
    if t_top == 0.0 or np.sqrt(max(mu[order[-1]], 0.0)) <= _SING_TOL * t_top:
        raise ValueError("singular input: smallest invariant-plane scalar below threshold")

    used: list[np.ndarray] = []
    vs, ws, ts = [], [], []
    for idx in order:
        v = vecs[:, idx].copy()
        for u in used:
            v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv < 0.5:
            continue  # direction already consumed as a partner
        v = _fix_sign(v / nv)
        Kv = K @ v
        tj = float(np.linalg.norm(Kv))
        w = -Kv / tj
        for u in used:
            w -= (u @ w) * u
        w -= (v @ w) * v
        w /= np.linalg.norm(w)
        vs.append(v)
        ws.append(w)
        ts.append(tj)
        used.extend([v, w])
    if len(ts) != d:
        raise RuntimeError(f"canonicalization failure: found {len(ts)} planes, expected {d}")

    U = np.empty((n, n))
    U[:, 0::2] = np.column_stack(vs)
    U[:, 1::2] = np.column_stack(ws)
    return U.T, np.array(ts)


def _perfect_shuffle(d: int) -> np.ndarray:
    """Permutation O2 with O2^T J O2 block-diagonal in interleaved order.

    Column 2k is e_k and column 2k+1 is e_{d+k}: the k-th plane's (v, w) slots
    map to the k-th (position, momentum) slots of the standard J layout.
    """
    O2 = np.zeros((2 * d, 2 * d))
    for k in range(d):
        O2[k, 2 * k] = 1.0
        O2[d + k, 2 * k + 1] = 1.0
    return O2


def symplectic_factor(L: np.ndarray) -> FactorizationResult:
    """Factor invertible L as S M with S symplectic and ||M|| = ||L^T J L||^{1/2}."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] % 2 != 0:
        raise ValueError(f"expected a square even-size matrix, got shape {L.shape}")
    d = L.shape[0] // 2
    sv = np.linalg.svd(L, compute_uv=False)
    if sv[-1] <= 0.0 or sv[0] / sv[-1] > _COND_LIMIT:
        raise ValueError("matrix is singular or too ill-conditioned to factor")
    J = standard_symplectic_form(d)
    K = L.T @ J @ L
    K = 0.5 * (K - K.T)
    O1, t = antisymmetric_canonical(K)
    T = np.diag(np.sqrt(np.repeat(t, 2)))
    M = _perfect_shuffle(d) @ T @ O1
    S = np.linalg.solve(M.T, L.T).T  # S = L M^{-1}
    residual = float(np.linalg.norm(S.T @ J @ S - J))
    return FactorizationResult(S=S, M=M, t=t, residual=residual)


def random_symplectic(d: int, rng, scale: float = 1.0) -> np.ndarray:
    """Random symplectic matrix exp(J H) with H symmetric Gaussian."""
    from scipy.linalg import expm

    A = rng.standard_normal((2 * d, 2 * d)) * scale
    H = 0.5 * (A + A.T)
    return expm(standard_symplectic_form(d) @ H)
