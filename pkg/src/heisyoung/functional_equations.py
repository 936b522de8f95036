"""Robust solvers for approximate additive functional equations.

Data comes as noisy (and partly corrupted) samples of unknown functions that
nearly satisfy an additive relation, or as sampled finite differences of a
single unknown function.  Each solver recovers the structured part (affine
functions, a polynomial, or linear phases), reports residuals recomputed from
the raw samples, and — for the Heisenberg variant — certifies the size of the
symplectic term against the declared noise level.

Conventions
-----------
* ``solve_additive_fe`` fits ``h1(x) + h2(y) + h3(x + y) = 0`` with affine
  ``h_j``; the identity forces a shared gradient ``g`` on ``h1, h2`` and
  gradient ``-g`` on ``h3``, with constants summing to zero.
* ``solve_heis_fe`` works with data for ``a1(x) + a2(y) + a3(x+y) +
  sigma_L(x, y) ~ 0`` where ``sigma_L(x, y) = sigma(L^{-1}x, L^{-1}y)``.
  The returned functions ``psi_j`` satisfy the three-point identity
  ``psi1(x1) + psi2(x2) + psi3(x3) = 0`` on ``x1 + x2 + x3 = 0``, i.e.
  ``psi3(w) = h3(-w)`` relative to the sum convention of the data.
* ``integrate_difference`` consumes rows ``(x, h, f(x+h) - f(x))`` and
  returns polynomial coefficients with zero constant term (the constant is
  invisible to differences).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heisenberg import standard_symplectic_form
from .robust import lad_fit, residual_stats
from .symplectic_factorization import symplectic_factor

__all__ = [
    "FESampleSet",
    "DifferenceDataset",
    "FESolution",
    "multi_indices",
    "poly_eval",
    "solve_additive_fe",
    "solve_heis_fe",
    "recover_linear_phase",
    "estimate_bilinear_phase",
    "integrate_difference",
    "curl_project",
]

# Quantile standing in for an essential supremum in the presence of a small
# corrupted fraction.
_ROBUST_SUP_Q = 0.94


# ----------------------------------------------------------------------
# polynomial bookkeeping


def multi_indices(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All multi-indices alpha of length ``dim`` with |alpha| == degree."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(dim - 1, degree - first):
            out.append((first,) + rest)
    return out


def _monomial_basis(dim: int, max_degree: int) -> list[tuple[int, ...]]:
    basis = []
    for deg in range(max_degree + 1):
        basis.extend(multi_indices(dim, deg))
    return basis


def _monomial_matrix(X: np.ndarray, alphas) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cols = []
    for alpha in alphas:
        col = np.ones(X.shape[0])
        for i, power in enumerate(alpha):
            if power:
                col = col * X[:, i] ** power
        cols.append(col)
    return np.column_stack(cols)


def poly_eval(coeffs: dict, X: np.ndarray) -> np.ndarray:
    """Evaluate sum_gamma c_gamma x^gamma at rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    total = np.zeros(X.shape[0])
    for gamma, c in coeffs.items():
        term = np.full(X.shape[0], float(c))
        for i, power in enumerate(gamma):
            if power:
                term = term * X[:, i] ** power
        total += term
    return total


# ----------------------------------------------------------------------
# data containers


@dataclass(frozen=True)
class FESampleSet:
    """Samples of the unknown functions entering an additive relation.

    ``points[j]`` holds the sample locations of the j-th function (rows in
    R^dimension) and ``values[j]`` its sampled values.  ``noise`` is the
    declared sup bound A on the relation residual and ``corruption`` the
    declared fraction of arbitrarily bad rows.
    """

    dimension: int
    center: np.ndarray
    radius: float
    points: tuple
    values: tuple
    noise: float = 0.0
    corruption: float = 0.0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not 0.0 <= self.corruption < 0.5:
            raise ValueError("corruption fraction must lie in [0, 1/2)")
        if self.noise < 0.0:
            raise ValueError("noise level must be nonnegative")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if center.shape != (self.dimension,):
            raise ValueError("center has the wrong dimension")
        object.__setattr__(self, "center", center)
        if len(self.points) != len(self.values):
            raise ValueError("points/values length mismatch")
        pts, vals = [], []
        for P, v in zip(self.points, self.values):
            P = np.atleast_2d(np.asarray(P, dtype=float))
            v = np.asarray(v)
            if P.shape[1] != self.dimension or P.shape[0] != v.shape[0]:
                raise ValueError("sample array shapes are inconsistent")
            pts.append(P)
            vals.append(v)
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "values", tuple(vals))


@dataclass(frozen=True)
class DifferenceDataset:
    """Rows (x, h, f(x+h) - f(x)) for an unknown f of degree <= degree + 1.

    ``radius`` bounds the base points around ``center``; ``offset_radius``
    bounds the offsets.  Distinct offsets must repeat exactly (bitwise) for
    rows to be grouped.
    """

    points: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    degree: int
    center: np.ndarray
    radius: float
    offset_radius: float

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        H = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if P.shape != H.shape or P.shape[0] != v.shape[0]:
            raise ValueError("points/offsets/values shapes are inconsistent")
        if self.degree < 0:
            raise ValueError("degree bound must be >= 0")
        if self.radius <= 0.0 or self.offset_radius <= 0.0:
            raise ValueError("ball radii must be positive")
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if center.shape != (P.shape[1],):
            raise ValueError("center has the wrong dimension")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "offsets", H)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "center", center)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class FESolution:
    """Recovered structure, with residual statistics recomputed from data.

    ``functions`` is a kind-specific payload: affine data (gradient +
    constants), polynomial coefficients, or phase-linear forms.
    ``sup_residual`` is the largest residual over the declared inliers and
    ``inlier_fraction`` the fraction of rows kept by the 3x-median rule.
    ``certificate`` (Heisenberg solver only) reports the symplectic-term
    bound check and the certified matrix.
    """

    kind: str
    functions: dict
    inlier_fraction: float
    sup_residual: float
    certificate: dict | None = None


# ----------------------------------------------------------------------
# affine additive equations


def _require_three(data: FESampleSet, what: str):
    if len(data.points) != 3:
        raise ValueError(f"{what} expects samples of exactly three functions")


def solve_additive_fe(data: FESampleSet) -> FESolution:
    """Fit affine h1, h2, h3 with h1(x) + h2(y) + h3(x + y) identically 0.

    The structural identity leaves parameters (g, c1, c2): h1 = g.x + c1,
    h2 = g.y + c2, h3 = -g.z - c1 - c2.  They are fit jointly to the three
    sample sets by least absolute deviations, so a corrupted fraction below
    one half does not move the fit.
    """
    _require_three(data, "solve_additive_fe")
    d = data.dimension
    X, Y, Z = data.points
    f1, f2, f3 = (np.asarray(v, dtype=float) for v in data.values)
    total = X.shape[0] + Y.shape[0] + Z.shape[0]
    if total < d + 4:
        raise ValueError("too few samples for an affine fit")

    rows = np.vstack([
        np.column_stack([X, np.ones(len(X)), np.zeros(len(X))]),
        np.column_stack([Y, np.zeros(len(Y)), np.ones(len(Y))]),
        np.column_stack([-Z, -np.ones(len(Z)), -np.ones(len(Z))]),
    ])
    target = np.concatenate([f1, f2, f3])
    coef = lad_fit(rows, target)
    g, c1, c2 = coef[:d], float(coef[d]), float(coef[d + 1])

    residuals = target - rows @ coef
    _, sup, frac = residual_stats(residuals)
    return FESolution(
        kind="additive",
        functions={"gradient": g, "constants": (c1, c2, -c1 - c2)},
        inlier_fraction=frac,
        sup_residual=sup,
    )


def _sup_symplectic_term(L: np.ndarray, center: np.ndarray, radius: float):
    """Upper bound for sup |sigma(L^-1 x, L^-1 y)| over the sample ball squared.

    Exact (R^2 times the spectral norm of B = L^-T J L^-1) for a centered
    ball; for an off-center ball the cross terms add 2 R |B center|.
    """
    n = L.shape[0]
    J = standard_symplectic_form(n // 2)
    Li = np.linalg.solve(L, np.eye(n))
    B = Li.T @ J @ Li
    norm = float(np.linalg.norm(B, 2))
    cross = float(np.linalg.norm(B @ center))
    return radius**2 * norm + 2.0 * radius * cross, Li


def solve_heis_fe(data: FESampleSet, L: np.ndarray, C: float = 5.0) -> FESolution:
    """Solve a1(x) + a2(y) + a3(x+y) + sigma(L^-1 x, L^-1 y) ~ 0 robustly.

    Averaging the relation over (x, y) and (y, x) kills the antisymmetric
    sigma term, so abar = (a1 + a2)/2 satisfies the plain additive equation
    with a3 and is fit by :func:`solve_additive_fe`.  The antisymmetric part
    (a1 - a2)/2 is then constant up to the noise level; its robust median
    splits the shared affine fit back into psi1 and psi2.

    The symplectic term itself cannot be absorbed: the solver certifies
    sup |sigma_L| <= C * A over the sample ball (A = declared noise level)
    and returns, via :func:`symplectic_factor` applied to L^-1, a symplectic
    S achieving the minimal operator norm |S L^-1| together with that value.
    A failed certificate is reported in the result, not raised.

    Returned psi3 uses the zero-sum convention (see module docstring).
    """
    _require_three(data, "solve_heis_fe")
    L = np.asarray(L, dtype=float)
    n = 2 * (L.shape[0] // 2)
    if L.shape != (data.dimension, data.dimension) or n != data.dimension:
        raise ValueError("L must be an invertible matrix of the even sample dimension")
    X1, X2, Z = data.points
    if not np.array_equal(X1, X2):
        raise ValueError("a1 and a2 must be sampled on the same grid")
    f1, f2, f3 = (np.asarray(v, dtype=float) for v in data.values)

    abar = 0.5 * (f1 + f2)
    sym = FESampleSet(
        dimension=data.dimension, center=data.center, radius=data.radius,
        points=(X1, X1, Z), values=(abar, abar, f3),
        noise=data.noise, corruption=data.corruption,
    )
    base = solve_additive_fe(sym)
    g = base.functions["gradient"]
    c1, c2, _ = base.functions["constants"]

    e0 = float(np.median(0.5 * (f1 - f2)))
    k1, k2 = c1 + e0, c2 - e0

    r1 = f1 - (X1 @ g + k1)
    r2 = f2 - (X1 @ g + k2)
    r3 = f3 - (-(Z @ g) - c1 - c2)
    _, sup, frac = residual_stats(np.concatenate([r1, r2, r3]))

    sup_sigma, Li = _sup_symplectic_term(L, data.center, data.radius)
    threshold = C * data.noise
    fact = symplectic_factor(Li)
    J = standard_symplectic_form(n // 2)
    S_cert = -J @ fact.S.T @ J  # symplectic inverse; S_cert @ L^-1 = M
    certificate = {
        "ok": bool(sup_sigma <= threshold),
        "sup_sigma": float(sup_sigma),
        "threshold": float(threshold),
        "constant": float(C),
        "S": S_cert,
        "operator_bound": fact.operator_norm,
    }
    return FESolution(
        kind="heisenberg",
        functions={
            "gradient": g,
            "constants": (k1, k2, -k1 - k2),
            "antisymmetric_offset": e0,
        },
        inlier_fraction=frac,
        sup_residual=sup,
        certificate=certificate,
    )


# ----------------------------------------------------------------------
# multiplicative (phase) equations


def _unit_values(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    mag = np.abs(v)
    if np.max(np.abs(mag - 1.0)) > 0.5:
        raise ValueError("sample values are not unimodular")
    return v / np.maximum(mag, 1e-300)

def _neighbor_pairs(P: np.ndarray):
    """Index pairs (i, j) linking each point to its nearest neighbors.

    Several neighbors per point are kept so the offset directions span the
    space even on axis-aligned grids.
    """
    N, d = P.shape
    if N < d + 1:
        raise ValueError("too few points to form phase differences")
    k = min(2 * d, N - 1)
    d2 = np.sum((P[:, None, :] - P[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    nbrs = np.argsort(d2, axis=1)[:, :k]
    i = np.repeat(np.arange(N), k)
    return i, nbrs.reshape(-1)


def _fit_linear_phase(P: np.ndarray, f: np.ndarray):
    i, j = _neighbor_pairs(P)
    dx = P[j] - P[i]
    dphi = np.angle(f[j] * np.conj(f[i]))
    v = lad_fit(dx, dphi)
    if np.max(np.abs(dx @ v)) >= 0.95 * np.pi:
        raise ValueError("phase gradient exceeds the aliasing limit of the sample spacing")
    w = f * np.exp(-1j * (P @ v))
    theta = float(np.angle(np.sum(w)))
    resid = np.abs(w * np.exp(-1j * theta) - 1.0)
    keep, _, _ = residual_stats(resid)
    if np.any(keep):
        theta = float(np.angle(np.sum(w[keep])))
        resid = np.abs(w * np.exp(-1j * theta) - 1.0)
    _, sup, frac = residual_stats(resid)
    return v, theta, sup, frac


def recover_linear_phase(data: FESampleSet) -> FESolution:
    """Recover linear phases from unimodular samples f_j ~ e^{i(v.x + theta)}.

    Wrapped phase differences between nearby sample points are linear in the
    point offsets (below the aliasing limit of the spacing), so each v_j is a
    robust linear fit of those differences; the constant theta_j follows from
    the rotation-averaged residual.  Raises when the residual spread is too
    large (>= 1/2) for phases to be meaningful.
    """
    _require_three(data, "recover_linear_phase")
    vs, thetas, sups, fracs = [], [], [], []
    for P, raw in zip(data.points, data.values):
        f = _unit_values(raw)
        v, theta, sup, frac = _fit_linear_phase(P, f)
        vs.append(v)
        thetas.append(theta)
        sups.append(sup)
        fracs.append(frac)
    sup = max(sups)
    if sup >= 0.5:
        raise ValueError("phase residual too large to define phases stably")
    return FESolution(
        kind="phase",
        functions={"v": tuple(vs), "theta": tuple(thetas)},
        inlier_fraction=min(fracs),
        sup_residual=sup,
    )


def estimate_bilinear_phase(values: np.ndarray, axes=None):
    """Estimate (v1, v2) from samples of e^{i(u1 v1 - u2 v2)} on a grid.

    ``values`` is a 2-D complex array sampled on the product of two uniform
    axes (default: both linspace(0, 1, n)).  Returns ``(v1, v2, eta)`` where
    eta is a robust sup of |value - 1| over the grid.  Medians of wrapped
    phase differences along each axis make the slopes immune to a small
    corrupted fraction; slopes beyond the aliasing limit of the grid spacing
    raise.
    """
    V = np.asarray(values, dtype=complex)
    if V.ndim != 2 or min(V.shape) < 2:
        raise ValueError("values must be a 2-D array with at least two nodes per axis")
    if axes is None:
        axes = (np.linspace(0.0, 1.0, V.shape[0]), np.linspace(0.0, 1.0, V.shape[1]))
    a1, a2 = (np.asarray(a, dtype=float) for a in axes)
    if a1.shape != (V.shape[0],) or a2.shape != (V.shape[1],):
        raise ValueError("axes do not match the value grid")
    s1, s2 = np.diff(a1), np.diff(a2)
    if np.max(np.abs(s1 - s1[0])) > 1e-9 * abs(s1[0]) or np.max(np.abs(s2 - s2[0])) > 1e-9 * abs(s2[0]):
        raise ValueError("axes must be uniformly spaced")

    U = _unit_values(V)
    d1 = np.angle(U[1:, :] * np.conj(U[:-1, :]))
    d2 = np.angle(U[:, 1:] * np.conj(U[:, :-1]))
    m1 = float(np.median(d1))
    m2 = float(np.median(d2))
    if abs(m1) >= 0.95 * np.pi or abs(m2) >= 0.95 * np.pi:
        raise ValueError("phase slope exceeds the aliasing limit of the grid spacing")
    v1 = m1 / float(s1[0])
    v2 = -m2 / float(s2[0])
    eta = float(np.quantile(np.abs(V - 1.0), _ROBUST_SUP_Q))
    return v1, v2, eta


# ----------------------------------------------------------------------
# polynomial integration of difference data


def curl_project(u: dict, dim: int, degree: int):
    """Project leading difference coefficients onto the integrable cone.

    ``u`` maps each multi-index alpha with |alpha| == degree to the vector
    (u_{alpha,1},...,u_{alpha,dim}) multiplying the offset coordinates in the
    leading term of the difference.  Integrability means the polynomial
    vector field sum_alpha u_alpha x^alpha is a gradient, i.e. for every
    |beta| == degree - 1 and i < j

        u_{beta+e_i, j} (beta_i + 1) == u_{beta+e_j, i} (beta_j + 1).

    The least-squares projection utilde onto that subspace is returned along
    with the integrated homogeneous polynomial q of degree ``degree + 1``
    whose coefficients are c_gamma = utilde_{gamma - e_j, j} / gamma_j.
    """
    alphas = multi_indices(dim, degree)
    index = {a: k for k, a in enumerate(alphas)}
    vec = np.zeros(len(alphas) * dim)
    for a, ua in u.items():
        if a not in index:
            raise ValueError(f"unexpected multi-index {a}")
        vec[index[a] * dim:(index[a] + 1) * dim] = np.asarray(ua, dtype=float)

    rows = []
    if degree >= 1:
        for beta in multi_indices(dim, degree - 1):
            for i in range(dim):
                for j in range(i + 1, dim):
                    ai = tuple(b + (1 if k == i else 0) for k, b in enumerate(beta))
                    aj = tuple(b + (1 if k == j else 0) for k, b in enumerate(beta))
                    row = np.zeros(len(vec))
                    row[index[ai] * dim + j] = beta[i] + 1
                    row[index[aj] * dim + i] = -(beta[j] + 1)
                    rows.append(row)
    if rows:
        E = np.array(rows)
        correction, *_ = np.linalg.lstsq(E.T @ E, E.T @ (E @ vec), rcond=None)
        proj = vec - correction
        # re-symmetrize tiny violations
        proj[np.abs(proj) < 1e-14 * (1.0 + np.max(np.abs(proj)))] = 0.0
    else:
        proj = vec

    utilde = {a: proj[k * dim:(k + 1) * dim].copy() for a, k in index.items()}
    q = {}
    for gamma in multi_indices(dim, degree + 1):
        vals = []
        for j in range(dim):
            if gamma[j] > 0:
                a = tuple(gj - (1 if k == j else 0) for k, gj in enumerate(gamma))
                vals.append(utilde[a][j] / gamma[j])
        q[gamma] = float(np.mean(vals))
    return utilde, q


def _group_by_offset(offsets: np.ndarray):
    groups: dict[bytes, list[int]] = {}
    order: list[bytes] = []
    for idx in range(offsets.shape[0]):
        key = offsets[idx].tobytes()
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(idx)
    return [(offsets[groups[key][0]], np.array(groups[key])) for key in order]


def _paired_rows(points, offsets, values):
    """Second differences against the first offset in the dataset.

    Rows (x, h, D) and (x, h0, D0) sharing a base point combine into
    (x + h0, h - h0, D - D0) = (x', tau, f(x' + tau) - f(x')): the parts of
    the per-offset coefficients that do not depend on the offset cancel, so
    the leading coefficients of the new rows are linear in tau with no
    constant term.
    """
    groups = _group_by_offset(offsets)
    if len(groups) < 2:
        raise ValueError("need at least two distinct offsets")
    h0, idx0 = groups[0]
    ref = {points[i].tobytes(): values[i] for i in idx0}
    Xp, Tau, Vp = [], [], []
    for h, idx in groups[1:]:
        tau = h - h0
        for i in idx:
            v0 = ref.get(points[i].tobytes())
            if v0 is None:
                continue
            Xp.append(points[i] + h0)
            Tau.append(tau)
            Vp.append(values[i] - v0)
    if not Xp:
        raise ValueError("offsets never share base points; cannot pair rows")
    return np.array(Xp), np.array(Tau), np.array(Vp)


def _leading_coefficients(Xp, Tau, Vp, dim, degree):
    """Per-offset polynomial fits, keeping the degree-``degree`` part."""
    basis = _monomial_basis(dim, degree)
    leading = multi_indices(dim, degree)
    lead_pos = [basis.index(a) for a in leading]
    taus, rows = [], []
    for tau, idx in _group_by_offset(Tau):
        if len(idx) < len(basis) + 2:
            continue
        design = _monomial_matrix(Xp[idx], basis)
        if np.linalg.matrix_rank(design) < len(basis):
            continue
        coef = lad_fit(design, Vp[idx])
        taus.append(tau)
        rows.append(coef[lead_pos])
    if len(taus) < dim:
        raise ValueError("degenerate offset sampling: too few usable offsets")
    T = np.array(taus)
    if np.linalg.matrix_rank(T) < dim:
        raise ValueError("degenerate offset sampling: offsets do not span the space")
    A = np.array(rows)
    u = {}
    for pos, alpha in enumerate(leading):
        u[alpha] = lad_fit(T, A[:, pos])
    return u


def _integrate(points, offsets, values, dim, degree):
    if degree == 0:
        taus, meds = [], []
        for tau, idx in _group_by_offset(offsets):
            taus.append(tau)
            meds.append(float(np.median(values[idx])))
        T = np.array(taus)
        if len(taus) < dim or np.linalg.matrix_rank(T) < dim:
            raise ValueError("degenerate offset sampling: offsets do not span the space")
        g = lad_fit(T, np.array(meds))
        return {tuple(int(k == j) for k in range(dim)): float(g[j]) for j in range(dim)}

    Xp, Tau, Vp = _paired_rows(points, offsets, values)
    u = _leading_coefficients(Xp, Tau, Vp, dim, degree)
    _, q = curl_project(u, dim, degree)
    reduced = values - (poly_eval(q, points + offsets) - poly_eval(q, points))
    rest = _integrate(points, offsets, reduced, dim, degree - 1)
    total = dict(rest)
    for gamma, c in q.items():
        total[gamma] = total.get(gamma, 0.0) + c
    return total


def integrate_difference(data: DifferenceDataset) -> FESolution:
    """Recover a polynomial Q (zero constant term) from difference samples.

    Rows are (x, h, f(x+h) - f(x)) with f within noise of a polynomial of
    degree <= data.degree + 1.  At each level the leading coefficients of the
    paired second differences are extracted offset-by-offset, projected onto
    the integrable cone by :func:`curl_project`, integrated into the
    top-degree part q, and the data re-differenced by q before recursing one
    degree down; the base level fits the linear part from per-offset medians.
    The reported residual is |value - (Q(x+h) - Q(x))| recomputed on every
    original row.
    """
    coeffs = _integrate(data.points, data.offsets, data.values, data.dimension, data.degree)
    coeffs = {g: float(c) for g, c in coeffs.items() if c != 0.0}
    fitted = poly_eval(coeffs, data.points + data.offsets) - poly_eval(coeffs, data.points)
    _, sup, frac = residual_stats(data.values - fitted)
    return FESolution(
        kind="difference",
        functions={"degree": data.degree + 1, "coefficients": coeffs},
        inlier_fraction=frac,
        sup_residual=sup,
    )
