"""Trilinear convolution-type forms for Gaussian inputs.

Three settings share the constraint "arguments multiply to the identity":

* Euclidean:  T(f) = iint f1(x1) f2(x2) f3(-x1-x2) dx1 dx2 on R^m,
* twisted:    the same on R^{2d} with an extra oscillation e^{i lam sigma(x1,x2)},
* Heisenberg: T(f) = iint f1(z1) f2(z2) f3(z2^{-1} z1^{-1}) dz1 dz2 on H^d,
  where z3 = (-x1-x2, -t1-t2-sigma(x1,x2)).

For Gaussian inputs the first two are single closed-form complex Gaussian
integrals.  The Heisenberg form has a quartic exponent through sigma(x1,x2)^2;
completing the square in s = sigma(x1,x2) and writing exp(-C w^2) as a
Gaussian average of characters exp(i xi w) reduces it to a 1-D integral of
closed forms, evaluated by Gauss-Hermite quadrature in xi.

``oracle_tensor_quadrature`` is a deliberately independent check: it evaluates
the integrand pointwise from the Gaussian definitions and the group law, and
integrates on a tensor-product grid (whitened so that moderately conditioned
inputs stay resolvable).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .gaussians import GaussianH, GaussianR, QuadratureSpec, lp_norm
from .heisenberg import standard_symplectic_form

__all__ = [
    "trilinear_euclid",
    "trilinear_twisted",
    "trilinear_heis",
    "oracle_tensor_quadrature",
    "phi_ratio",
    "QuadratureConvergenceError",
]


class QuadratureConvergenceError(RuntimeError):
    """Raised when successive quadrature refinements disagree beyond tolerance."""


@lru_cache(maxsize=32)
def _hermgauss(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w


def _check_triple(gs, cls, name):
    if len(gs) != 3:
        raise ValueError(f"{name} expects three Gaussians, got {len(gs)}")
    for g in gs:
        if not isinstance(g, cls):
            raise TypeError(f"{name} expects {cls.__name__} inputs, got {type(g).__name__}")
    if not (gs[0].m == gs[1].m == gs[2].m):
        raise ValueError(f"dimension mismatch: {[g.m for g in gs]}")


def _sqrt_det_inv(M: np.ndarray) -> complex:
    """det(M)^{-1/2} on the branch continuous from real SPD matrices.

    Valid for complex symmetric M whose real part is positive definite: every
    eigenvalue then has positive real part, so the product of principal
    inverse square roots is the analytic continuation from the SPD case.
    """
    lam = np.linalg.eigvals(M)
    if np.any(lam.real <= 0):
        raise RuntimeError("matrix left the right half-plane; branch tracking is invalid")
    return complex(np.exp(-0.5 * np.sum(np.log(lam))))


def _assemble_euclid(g1, g2, g3):
    """Quadratic data of the Euclidean integrand in v = (x1, x2).

    Returns (A, w, const) with exponent = -v^T A v + w.v + const (before the
    amplitudes c_j), A real 2m x 2m.
    """
    m = g1.m
    A = np.zeros((2 * m, 2 * m))
    A[:m, :m] = g1.Q + g3.Q
    A[m:, m:] = g2.Q + g3.Q
    A[:m, m:] = g3.Q
    A[m:, :m] = g3.Q
    w = np.zeros(2 * m, dtype=complex)
    w[:m] = 2.0 * (g1.Q @ g1.a) - 2.0 * (g3.Q @ g3.a) + 1j * (g1.b - g3.b)
    w[m:] = 2.0 * (g2.Q @ g2.a) - 2.0 * (g3.Q @ g3.a) + 1j * (g2.b - g3.b)
    const = -(g1.a @ g1.Q @ g1.a) - (g2.a @ g2.Q @ g2.a) - (g3.a @ g3.Q @ g3.a)
    return A, w, const


def trilinear_euclid(g1: GaussianR, g2: GaussianR, g3: GaussianR) -> complex:
    """Closed form of the Euclidean trilinear form for Gaussian inputs."""
    _check_triple((g1, g2, g3), GaussianR, "trilinear_euclid")
    m = g1.m
    A, w, const = _assemble_euclid(g1, g2, g3)
    try:
        R = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:  # impossible for valid inputs
        raise RuntimeError("assembled quadratic form is not positive definite") from exc
    half = np.linalg.solve(R, w)  # R R^T = A;  w^T A^{-1} w = |R^{-1} w|^2
    quad = 0.25 * (half @ half)
    log_detinv_sqrt = -np.sum(np.log(np.diag(R)))
    amp = g1.c * g2.c * g3.c
    return complex(amp * np.exp(m * math.log(math.pi) + log_detinv_sqrt + quad + const))


def trilinear_twisted(g1: GaussianR, g2: GaussianR, g3: GaussianR, lam: float) -> complex:
    """Twisted form on R^{2d}: Euclidean form with phase e^{i lam sigma(x1, x2)}."""
    _check_triple((g1, g2, g3), GaussianR, "trilinear_twisted")
    m = g1.m
    if m % 2 != 0:
        raise ValueError(f"twisted form needs even dimension 2d, got {m}")
    A, w, const = _assemble_euclid(g1, g2, g3)
    J = standard_symplectic_form(m // 2)
    B = np.zeros((2 * m, 2 * m))
    B[:m, m:] = 0.5 * J
    B[m:, :m] = -0.5 * J
    Ac = A - 1j * lam * B
    quad = 0.25 * (w @ np.linalg.solve(Ac, w))
    amp = g1.c * g2.c * g3.c
    return complex(amp * math.pi**m * _sqrt_det_inv(Ac) * np.exp(quad + const))


def _assemble_heis(g1, g2, g3):
    """Completed-square data for the Heisenberg integrand.

    Layout v = (x1, t1, x2, t2) in R^{2n}, n = 2d+1.  Returns a dict with the
    xi-independent pieces: exponent = -v^T(A_re - i xi B_s)v + (w0 - i xi g/2C).v
    + const0 - i xi beta0/2C, integrated against the weight exp(-xi^2 / 4C).
    """
    n = g1.m
    d = (n - 1) // 2
    nv = 2 * n
    P1 = np.zeros((n, nv))
    P1[:, :n] = np.eye(n)
    P2 = np.zeros((n, nv))
    P2[:, n:] = np.eye(n)
    M3 = -P1 - P2  # x3 = -x1-x2, t3(linear part) = -t1-t2
    e_t = np.zeros(n)
    e_t[-1] = 1.0

    J = standard_symplectic_form(d)
    Bs = np.zeros((nv, nv))
    Bs[: 2 * d, n : n + 2 * d] = 0.5 * J
    Bs[n : n + 2 * d, : 2 * d] = -0.5 * J

    C = float(g3.Q[-1, -1])
    g_vec = 2.0 * (M3.T @ (g3.Q @ e_t))
    beta0 = -2.0 * (e_t @ g3.Q @ g3.a) - 1j * g3.b[-1]

    A_re = P1.T @ g1.Q @ P1 + P2.T @ g2.Q @ P2 + M3.T @ g3.Q @ M3 - np.outer(g_vec, g_vec) / (4.0 * C)
    w0 = (
        2.0 * (P1.T @ (g1.Q @ g1.a))
        + 2.0 * (P2.T @ (g2.Q @ g2.a))
        + 2.0 * (M3.T @ (g3.Q @ g3.a))
        + 1j * (P1.T @ g1.b + P2.T @ g2.b + M3.T @ g3.b)
        + beta0 * g_vec / (2.0 * C)
    )
    const0 = (
        -(g1.a @ g1.Q @ g1.a)
        - (g2.a @ g2.Q @ g2.a)
        - (g3.a @ g3.Q @ g3.a)
        + beta0**2 / (4.0 * C)
    )
    return {"n": n, "C": C, "A_re": A_re, "Bs": Bs, "w0": w0, "g": g_vec, "beta0": beta0, "const0": const0}


def _heis_value(data, amp, aux_nodes):
    n, C = data["n"], data["C"]
    eta, wts = _hermgauss(aux_nodes)
    xi = 2.0 * math.sqrt(C) * eta
    total = 0.0 + 0.0j
    for k in range(aux_nodes):
        A = data["A_re"] - 1j * xi[k] * data["Bs"]
        w = data["w0"] - 1j * xi[k] * data["g"] / (2.0 * C)
        quad = 0.25 * (w @ np.linalg.solve(A, w))
        expo = quad + data["const0"] - 1j * xi[k] * data["beta0"] / (2.0 * C)
        total += wts[k] * _sqrt_det_inv(A) * np.exp(expo)
    return complex(amp * math.pi ** (n - 0.5) * total)


def trilinear_heis(
    g1: GaussianH,
    g2: GaussianH,
    g3: GaussianH,
    spec: QuadratureSpec | None = None,
    check_convergence: bool = False,
    convergence_tol: float = 1e-9,
) -> complex:
    """Heisenberg trilinear form via the xi-reduction (closed forms + 1-D quadrature).

    With ``check_convergence`` the auxiliary integral is re-evaluated at 3/2
    the node count and a relative disagreement above ``convergence_tol``
    raises :class:`QuadratureConvergenceError`.
    """
    _check_triple((g1, g2, g3), GaussianH, "trilinear_heis")
    spec = spec or QuadratureSpec()
    data = _assemble_heis(g1, g2, g3)
    amp = g1.c * g2.c * g3.c
    value = _heis_value(data, amp, spec.aux_nodes)
    if check_convergence:
        refined = _heis_value(data, amp, spec.aux_nodes + spec.aux_nodes // 2)
        scale = max(abs(value), abs(refined))
        if scale > 0 and abs(value - refined) > convergence_tol * scale:
            raise QuadratureConvergenceError(
                f"auxiliary quadrature moved by {abs(value - refined) / scale:.3e} "
                f"relative under refinement (tol {convergence_tol:g})"
            )
        value = refined
    return value


# ---------------------------------------------------------------------------
# brute-force oracle


def _heis_exponent(g1, g2, g3, V):
    """Exponent of the Heisenberg integrand at rows of V = (x1, t1, x2, t2).

    Returns (re, im) with integrand = c1 c2 c3 * exp(re + i im); assembled
    factor by factor from the Gaussian definitions and the group law.
    """
    n = g1.m
    d = (n - 1) // 2
    z1 = V[:, :n]
    z2 = V[:, n:]
    x1 = z1[:, : 2 * d]
    x2 = z2[:, : 2 * d]
    J = standard_symplectic_form(d)
    s = np.sum((x1 @ J) * x2, axis=1)
    z3 = np.empty_like(z1)
    z3[:, : 2 * d] = -x1 - x2
    z3[:, -1] = -z1[:, -1] - z2[:, -1] - s
    re = np.zeros(V.shape[0])
    im = np.zeros(V.shape[0])
    for g, Z in ((g1, z1), (g2, z2), (g3, z3)):
        D = Z - g.a
        re -= np.sum((D @ g.Q) * D, axis=1)
        im += Z @ g.b
    return re, im


_INNER_BLOCK_LIMIT = 150_000


def _oracle_once(g1, g2, g3, nodes, scheme, mult, threads):
    n = g1.m
    d = (n - 1) // 2
    nv = 2 * n
    data = _assemble_heis(g1, g2, g3)
    A_pr = data["A_re"]
    w_re = data["w0"].real
    center = np.linalg.solve(A_pr, 0.5 * w_re)

    mu, E = np.linalg.eigh(A_pr)
    W = E * (mu ** -0.5)  # columns scaled; W^T A_pr W = I
    log_detW = -0.5 * float(np.sum(np.log(mu)))

    if scheme == "tensor-hermite":
        z1d, w1d = _hermgauss(nodes)
        restore = True  # integrand must be multiplied by exp(+|z|^2)
    else:
        half = mult / math.sqrt(2.0)  # exp(-z^2) has std 1/sqrt(2)
        z1d = np.linspace(-half, half, nodes)
        h = z1d[1] - z1d[0]
        w1d = np.full(nodes, h)
        w1d[0] *= 0.5
        w1d[-1] *= 0.5
        restore = False

    # split axes so the vectorized inner block stays around <= ~1e6 points
    inner = 0
    while inner < nv and nodes ** (inner + 1) <= _INNER_BLOCK_LIMIT:
        inner += 1
    outer = nv - inner
    if inner:
        inner_grids = np.meshgrid(*([z1d] * inner), indexing="ij")
        Zin = np.stack([g.ravel() for g in inner_grids], axis=1)
        wgrids = np.meshgrid(*([w1d] * inner), indexing="ij")
        win = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    else:
        Zin = np.zeros((1, 0))
        win = np.ones(1)

    if outer:
        outer_idx = np.stack(
            np.meshgrid(*([np.arange(nodes)] * outer), indexing="ij"), axis=-1
        ).reshape(-1, outer)
    else:
        outer_idx = np.zeros((1, 0), dtype=int)

    # The grid point for (idx, row) is V = center + c + Vb_row with the chunk
    # offset c = W[:, :outer] @ z1d[idx] constant across the inner block.  The
    # exponent is evaluated by expanding each factor's quadratic form around
    # the precomputed base value exactly (the integrand itself is unchanged;
    # only constant-offset cross terms are added per chunk).
    Vb = center + Zin @ W[:, outer:].T
    Z1b, Z2b = Vb[:, :n], Vb[:, n:]
    X1b, X2b = Z1b[:, : 2 * d], Z2b[:, : 2 * d]
    J = standard_symplectic_form(d)
    sb = np.sum((X1b @ J) * X2b, axis=1)
    Z3b = np.empty_like(Z1b)
    Z3b[:, : 2 * d] = -X1b - X2b
    Z3b[:, -1] = -Z1b[:, -1] - Z2b[:, -1] - sb

    base_re = np.zeros(Vb.shape[0])
    base_im = np.zeros(Vb.shape[0])
    grads = []  # per factor: D_base @ Q, for the linear term of the expansion
    for g, Zb in ((g1, Z1b), (g2, Z2b), (g3, Z3b)):
        D = Zb - g.a
        G = D @ g.Q
        grads.append(G)
        base_re -= np.sum(G * D, axis=1)
        base_im += Zb @ g.b
    G1, G2, G3 = grads
    G3x, G3t = G3[:, : 2 * d], G3[:, -1]
    if restore:
        base_re += np.sum(Zin * Zin, axis=1)
    Q3 = g3.Q
    Q3xx, Q3xt, Q3tt = Q3[: 2 * d, : 2 * d], Q3[: 2 * d, -1], Q3[-1, -1]
    b3x, b3t = g3.b[: 2 * d], g3.b[-1]
    Wout = W[:, :outer]

    def chunk_sum(rows):
        acc = 0.0 + 0.0j
        for idx in rows:
            c = Wout @ z1d[idx]
            wout = float(np.prod(w1d[idx])) if outer else 1.0
            c1, c2 = c[:n], c[n:]
            cx1, cx2 = c1[: 2 * d], c2[: 2 * d]
            # sigma(x1+cx1, x2+cx2) = sb + ds with ds linear over the block
            ds = X1b @ (J @ cx2) + X2b @ (J.T @ cx1) + cx1 @ J @ cx2
            dx3 = -cx1 - cx2
            dt3 = -(c1[-1] + c2[-1]) - ds
            re = (
                base_re
                - 2.0 * (G1 @ c1)
                - 2.0 * (G2 @ c2)
                - 2.0 * (G3x @ dx3 + G3t * dt3)
                - (c1 @ g1.Q @ c1 + c2 @ g2.Q @ c2 + dx3 @ Q3xx @ dx3)
                - dt3 * (2.0 * (Q3xt @ dx3) + Q3tt * dt3)
            )
            im = base_im + (g1.b @ c1 + g2.b @ c2 + b3x @ dx3) + b3t * dt3
            if restore:
                re += float(np.sum(z1d[idx] ** 2))
            acc += wout * (win @ np.exp(re + 1j * im))
        return acc

    if threads > 1 and len(outer_idx) > 1:
        blocks = np.array_split(outer_idx, threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk_sum, blocks))
        total = complex(sum(parts))  # deterministic: ordered reduction
    else:
        total = chunk_sum(outer_idx)
    return g1.c * g2.c * g3.c * total * math.exp(log_detW)


def oracle_tensor_quadrature(
    g1: GaussianH,
    g2: GaussianH,
    g3: GaussianH,
    spec: QuadratureSpec | None = None,
    point_budget: float = 5e8,
):
    """Direct tensor-product quadrature of the Heisenberg integrand.

    Whitens by the real quadratic part of the exponent (otherwise anisotropy
    at condition number ~100 is unresolvable), then integrates the pointwise
    integrand on a tensor grid per ``spec.scheme``.  Returns ``(value, err)``
    where ``err`` is the change under one node-count refinement step.
    """
    _check_triple((g1, g2, g3), GaussianH, "oracle_tensor_quadrature")
    spec = spec or QuadratureSpec()
    nv = 2 * g1.m
    if float(spec.nodes) ** nv > point_budget:
        raise ValueError(
            f"grid of {spec.nodes}^{nv} points exceeds the budget of {point_budget:.0e}; "
            "reduce d or the node count"
        )
    threads = max(1, int(os.environ.get("HEISYOUNG_THREADS", "1")))
    coarse_nodes = max(8, spec.nodes - max(4, spec.nodes // 4))
    value = _oracle_once(g1, g2, g3, spec.nodes, spec.scheme, spec.radius_multiplier, threads)
    coarse = _oracle_once(g1, g2, g3, coarse_nodes, spec.scheme, spec.radius_multiplier, threads)
    return value, abs(value - coarse)


# ---------------------------------------------------------------------------
# normalized ratio


def phi_ratio(
    triple,
    profile,
    setting: str = "euclid",
    lam: float = 0.0,
    spec: QuadratureSpec | None = None,
) -> float:
    """Phi(f) = |T(f)| / prod_j ||f_j||_{p_j} for Gaussian triples.

    ``setting`` selects the form: 'euclid', 'twisted' (uses ``lam``), or
    'heis' (uses ``spec``).  Raises ``ValueError`` on a zero norm.
    """
    g1, g2, g3 = triple
    norms = [lp_norm(g, p) for g, p in zip(triple, profile.p)]
    if any(v == 0.0 for v in norms):
        raise ValueError("phi_ratio is undefined for a zero-norm factor")
    if setting == "euclid":
        value = trilinear_euclid(g1, g2, g3)
    elif setting == "twisted":
        value = trilinear_twisted(g1, g2, g3, lam)
    elif setting == "heis":
        value = trilinear_heis(g1, g2, g3, spec)
    else:
        raise ValueError(f"unknown setting {setting!r}")
    return abs(value) / math.prod(norms)
