"""Robust recovery for the additive, phase, difference, and certified solvers."""

import math

import numpy as np
import pytest

from heisyoung import (
    DifferenceDataset,
    FESampleSet,
    curl_project,
    estimate_bilinear_phase,
    integrate_difference,
    multi_indices,
    poly_eval,
    recover_linear_phase,
    solve_additive_fe,
    solve_heis_fe,
)
from heisyoung.robust import residual_stats


def _ball_grid(n, dim, radius=1.0):
    axes = [np.linspace(-radius, radius, n)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return pts[np.linalg.norm(pts, axis=1) <= radius]


# ----------------------------------------------------------------------
# polynomial helpers


def test_multi_indices():
    assert multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert multi_indices(1, 3) == [(3,)]
    assert multi_indices(3, 0) == [(0, 0, 0)]
    assert len(multi_indices(3, 2)) == 6


def test_poly_eval():
    X = np.array([[1.0, 2.0], [0.5, -1.0]])
    coeffs = {(2, 0): 1.0, (0, 1): 2.0}
    expected = X[:, 0] ** 2 + 2.0 * X[:, 1]
    assert np.allclose(poly_eval(coeffs, X), expected)


# ----------------------------------------------------------------------
# additive relation


def _additive_plant(n=41, noise=0.0, rng=None, corrupt=0.0):
    x = np.linspace(-1.0, 1.0, n).reshape(-1, 1)
    z = 2.0 * x
    f1 = 2.0 * x[:, 0] + 1.0
    f2 = 2.0 * x[:, 0] - 1.0
    f3 = -2.0 * z[:, 0]
    if noise > 0.0:
        f1 = f1 + rng.uniform(-noise, noise, size=n)
        f2 = f2 + rng.uniform(-noise, noise, size=n)
        f3 = f3 + rng.uniform(-noise, noise, size=n)
    if corrupt > 0.0:
        bad = rng.choice(n, size=int(corrupt * n), replace=False)
        f1 = f1.copy()
        f1[bad] += rng.normal(size=bad.size) * 1e3
    return FESampleSet(
        dimension=1,
        center=[0.0],
        radius=1.0,
        points=(x, x, z),
        values=(f1, f2, f3),
        noise=noise,
        corruption=corrupt,
    )


def test_additive_exact_plant():
    sol = solve_additive_fe(_additive_plant())
    assert np.allclose(sol.functions["gradient"], [2.0], atol=1e-10)
    assert np.allclose(sol.functions["constants"], (1.0, -1.0, 0.0), atol=1e-10)
    assert sol.sup_residual <= 1e-12
    assert sol.inlier_fraction == pytest.approx(1.0)


def test_additive_bounded_noise():
    rng = np.random.default_rng(71)
    A = 0.05
    sol = solve_additive_fe(_additive_plant(n=101, noise=A, rng=rng))
    assert sol.sup_residual <= 3.0 * A
    assert np.allclose(sol.functions["gradient"], [2.0], atol=3.0 * A)


def test_additive_survives_gross_corruption():
    rng = np.random.default_rng(72)
    A = 0.01
    sol = solve_additive_fe(_additive_plant(n=201, noise=A, rng=rng, corrupt=0.10))
    assert np.allclose(sol.functions["gradient"], [2.0], atol=3.0 * A)
    assert np.allclose(sol.functions["constants"][0], 1.0, atol=3.0 * A)
    assert sol.sup_residual <= 3.0 * A


def test_additive_self_audit():
    rng = np.random.default_rng(73)
    data = _additive_plant(n=81, noise=0.02, rng=rng)
    sol = solve_additive_fe(data)
    g = sol.functions["gradient"]
    c1, c2, c3 = sol.functions["constants"]
    r = np.concatenate(
        [
            data.values[0] - (data.points[0] @ g + c1),
            data.values[1] - (data.points[1] @ g + c2),
            data.values[2] - (-(data.points[2] @ g) + c3),
        ]
    )
    _, sup, frac = residual_stats(r)
    assert sol.sup_residual == pytest.approx(sup, abs=1e-14)
    assert sol.inlier_fraction == pytest.approx(frac, abs=1e-14)


def test_additive_noise_monotonicity():
    rng = np.random.default_rng(74)
    x = np.linspace(-1.0, 1.0, 101).reshape(-1, 1)
    eta = rng.uniform(-1.0, 1.0, size=(3, 101))

    def solve(A):
        vals = (
            2.0 * x[:, 0] + 1.0 + A * eta[0],
            2.0 * x[:, 0] - 1.0 + A * eta[1],
            -2.0 * (2.0 * x[:, 0]) + A * eta[2],
        )
        return solve_additive_fe(
            FESampleSet(
                dimension=1, center=[0.0], radius=1.0,
                points=(x, x, 2.0 * x), values=vals, noise=A,
            )
        )

    A = 0.02
    assert solve(2.0 * A).sup_residual <= 2.0 * solve(A).sup_residual + 1e-12


def test_additive_rejects_degenerate_sampling():
    x = np.zeros((20, 1))  # all samples at one point: rank-deficient design
    vals = (np.ones(20), np.ones(20), np.ones(20))
    data = FESampleSet(
        dimension=1, center=[0.0], radius=1.0, points=(x, x, x), values=vals
    )
    with pytest.raises(ValueError):
        solve_additive_fe(data)


def test_sample_set_validation():
    x = np.zeros((4, 1))
    with pytest.raises(ValueError):
        FESampleSet(dimension=1, center=[0.0], radius=1.0,
                    points=(x, x, x), values=(np.ones(4),) * 3, corruption=0.6)
    with pytest.raises(ValueError):
        FESampleSet(dimension=1, center=[0.0], radius=-1.0,
                    points=(x, x, x), values=(np.ones(4),) * 3)
    with pytest.raises(ValueError):
        FESampleSet(dimension=2, center=[0.0], radius=1.0,
                    points=(x, x, x), values=(np.ones(4),) * 3)


# ----------------------------------------------------------------------
# linear phases


def _phase_plant(vs, n=81, noise=0.0, rng=None):
    x = np.linspace(-1.0, 1.0, n).reshape(-1, 1)
    points, values = [], []
    for v in vs:
        f = np.exp(1j * v * x[:, 0])
        if noise > 0.0:
            f = f * np.exp(1j * noise * rng.uniform(-1.0, 1.0, size=n))
        points.append(x)
        values.append(f)
    return FESampleSet(
        dimension=1, center=[0.0], radius=1.0,
        points=tuple(points), values=tuple(values), noise=noise,
    )


def test_phase_exact_plant():
    vs = (0.7, -1.3, 0.6)
    sol = recover_linear_phase(_phase_plant(vs))
    for v_hat, v in zip(sol.functions["v"], vs):
        assert np.allclose(v_hat, [v], atol=1e-9)
    assert sol.sup_residual <= 1e-9


def test_phase_noisy_plant():
    rng = np.random.default_rng(75)
    eta = 0.01
    vs = (0.7, -1.3, 0.6)
    sol = recover_linear_phase(_phase_plant(vs, n=161, noise=eta, rng=rng))
    for v_hat, v in zip(sol.functions["v"], vs):
        assert np.allclose(v_hat, [v], atol=0.05)
    assert sol.sup_residual <= 3.0 * eta


def test_phase_handles_wrapping():
    # total phase sweep of ~24 rad wraps several times across the ball
    vs = (12.0, -9.0, 3.0)
    sol = recover_linear_phase(_phase_plant(vs, n=161))
    for v_hat, v in zip(sol.functions["v"], vs):
        assert np.allclose(v_hat, [v], atol=1e-8)


def test_phase_rejects_unstable_data():
    rng = np.random.default_rng(76)
    x = np.linspace(-1.0, 1.0, 41).reshape(-1, 1)
    f = np.exp(2j * np.pi * rng.uniform(size=41))  # pure noise
    data = FESampleSet(
        dimension=1, center=[0.0], radius=1.0,
        points=(x, x, x), values=(f, f, f),
    )
    with pytest.raises(ValueError):
        recover_linear_phase(data)


# ----------------------------------------------------------------------
# difference relations


def _difference_plant(q, dim, degree, offsets, n_base, rng, noise=0.0, corrupt=0.0):
    base = _ball_grid(n_base, dim)
    X = np.repeat(base, len(offsets), axis=0)
    H = np.tile(offsets, (len(base), 1))
    vals = poly_eval(q, X + H) - poly_eval(q, X)
    if noise > 0.0:
        vals = vals + rng.uniform(-noise, noise, size=vals.shape)
    if corrupt > 0.0:
        bad = rng.choice(vals.size, size=int(corrupt * vals.size), replace=False)
        vals[bad] += rng.normal(size=bad.size) * 50.0
    return DifferenceDataset(
        points=X, offsets=H, values=vals, degree=degree,
        center=np.zeros(dim), radius=1.0, offset_radius=0.5,
    )


def _sup_error_quantile(sol, q_true, dim, frac=0.90):
    pts = _ball_grid(41 if dim == 1 else 21, dim)
    diff = poly_eval(sol.functions["coefficients"], pts) - poly_eval(q_true, pts)
    diff = diff - np.median(diff)  # constants are not identifiable
    return float(np.quantile(np.abs(diff), frac))


def test_difference_base_case_affine():
    rng = np.random.default_rng(81)
    q = {(1,): 2.0}
    offs = np.array([[0.3], [-0.2], [0.45], [0.1], [-0.4]])
    sol = integrate_difference(_difference_plant(q, 1, 0, offs, 60, rng))
    assert sol.functions["degree"] == 1
    assert _sup_error_quantile(sol, q, 1) <= 1e-9


def test_difference_cubic_plant_with_noise():
    rng = np.random.default_rng(82)
    A = 0.01
    q = {(3,): 1.0}
    offs = np.array([[0.35], [-0.2], [0.5], [-0.45], [0.15], [0.25]])
    sol = integrate_difference(_difference_plant(q, 1, 2, offs, 60, rng, noise=A))
    assert sol.functions["degree"] == 3
    assert _sup_error_quantile(sol, q, 1) <= 5.0 * A


def test_difference_2d_with_corruption():
    rng = np.random.default_rng(83)
    A = 0.01
    q = {(1, 1): 1.0, (2, 0): 1.0}
    offs = np.array(
        [[0.3, 0.1], [-0.2, 0.25], [0.4, -0.3], [0.05, -0.45], [-0.35, -0.1], [0.2, 0.4]]
    )
    sol = integrate_difference(
        _difference_plant(q, 2, 1, offs, 13, rng, noise=A, corrupt=0.05)
    )
    assert sol.functions["degree"] == 2
    assert _sup_error_quantile(sol, q, 2) <= 5.0 * A


def test_difference_exact_recovery_all_degrees():
    rng = np.random.default_rng(84)
    cases = [
        (1, 1, {(2,): 0.7, (1,): -0.3}),
        (1, 3, {(4,): 0.25, (2,): 1.0}),
        (2, 2, {(2, 1): 1.0, (1, 0): 0.5}),
    ]
    for dim, D, q in cases:
        offs = 0.5 * rng.uniform(-1.0, 1.0, size=(2 * (D + 2), dim))
        sol = integrate_difference(
            _difference_plant(q, dim, D, offs, 30 if dim == 1 else 11, rng)
        )
        for alpha, coeff in q.items():
            if sum(alpha) == 0:
                continue
            assert sol.functions["coefficients"].get(alpha, 0.0) == pytest.approx(
                coeff, abs=1e-9
            )


def test_dataset_validation():
    with pytest.raises(ValueError):
        DifferenceDataset(
            points=np.zeros((3, 1)), offsets=np.zeros((4, 1)), values=np.zeros(3),
            degree=1, center=[0.0], radius=1.0, offset_radius=0.5,
        )
    with pytest.raises(ValueError):
        DifferenceDataset(
            points=np.zeros((3, 1)), offsets=np.zeros((3, 1)), values=np.zeros(3),
            degree=-1, center=[0.0], radius=1.0, offset_radius=0.5,
        )


# ----------------------------------------------------------------------
# curl projection


def test_curl_project_compatible_input():
    # leading coefficients of q* = x1^2 x2
    u = {(1, 1): np.array([2.0, 0.0]), (2, 0): np.array([0.0, 1.0]),
         (0, 2): np.array([0.0, 0.0])}
    utilde, q = curl_project(u, dim=2, degree=2)
    for alpha, vec in u.items():
        assert np.allclose(utilde[alpha], vec, atol=1e-12)
    assert q[(2, 1)] == pytest.approx(1.0, abs=1e-12)
    assert q[(3, 0)] == pytest.approx(0.0, abs=1e-12)


def test_curl_project_bounds_the_correction():
    u = {(1, 1): np.array([2.0, 0.0]), (2, 0): np.array([0.0, 1.0]),
         (0, 2): np.array([0.0, 0.0])}
    rho = 0.1
    bad = {k: v.copy() for k, v in u.items()}
    bad[(2, 0)] = bad[(2, 0)] + np.array([0.0, rho])  # breaks compatibility
    utilde, _ = curl_project(bad, dim=2, degree=2)
    moved = math.sqrt(
        sum(float(np.sum((utilde[k] - bad[k]) ** 2)) for k in bad)
    )
    assert moved <= rho + 1e-12


def test_curl_project_identity_in_1d():
    u = {(2,): np.array([3.0])}
    utilde, q = curl_project(u, dim=1, degree=2)
    assert np.allclose(utilde[(2,)], [3.0])
    assert q[(3,)] == pytest.approx(1.0)


def test_curl_project_output_is_integrable():
    rng = np.random.default_rng(85)
    u = {a: rng.normal(size=2) for a in multi_indices(2, 2)}
    utilde, q = curl_project(u, dim=2, degree=2)
    # compatibility equations hold
    for beta in multi_indices(2, 1):
        ai = (beta[0] + 1, beta[1])
        aj = (beta[0], beta[1] + 1)
        lhs = utilde[ai][1] * (beta[0] + 1)
        rhs = utilde[aj][0] * (beta[1] + 1)
        assert lhs == pytest.approx(rhs, abs=1e-12)
    # gradient of q reproduces utilde
    for alpha in multi_indices(2, 2):
        for j in range(2):
            gamma = tuple(a + (1 if k == j else 0) for k, a in enumerate(alpha))
            assert q[gamma] * gamma[j] == pytest.approx(utilde[alpha][j], abs=1e-12)


# ----------------------------------------------------------------------
# certified solver


def test_certified_solver_zero_functions():
    R = 10.0
    pts = _ball_grid(9, 2)
    zeros = np.zeros(len(pts))
    data = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, pts, pts), values=(zeros, zeros, zeros), noise=R**-2,
    )
    sol = solve_heis_fe(data, L=R * np.eye(2))
    cert = sol.certificate
    assert cert["ok"]
    assert cert["sup_sigma"] == pytest.approx(R**-2, rel=1e-12)
    assert cert["threshold"] == pytest.approx(5.0 * R**-2, rel=1e-12)
    assert cert["operator_bound"] == pytest.approx(1.0 / R, rel=1e-10)
    assert np.allclose(sol.functions["gradient"], 0.0, atol=1e-10)


def test_certified_solver_recovers_affine_plant():
    rng = np.random.default_rng(86)
    A = 0.02
    pts = _ball_grid(9, 2)
    g = np.array([0.8, -0.5])
    k1, k2 = 0.4, -0.1
    f1 = pts @ g + k1 + A * rng.uniform(-1, 1, size=len(pts))
    f2 = pts @ g + k2 + A * rng.uniform(-1, 1, size=len(pts))
    f3 = -(pts @ g) - k1 - k2 + A * rng.uniform(-1, 1, size=len(pts))
    data = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, pts, pts), values=(f1, f2, f3), noise=A,
    )
    sol = solve_heis_fe(data, L=20.0 * np.eye(2))
    assert np.allclose(sol.functions["gradient"], g, atol=3.0 * A)
    ks = sol.functions["constants"]
    assert ks[0] == pytest.approx(k1, abs=3.0 * A)
    assert ks[1] == pytest.approx(k2, abs=3.0 * A)
    assert sum(ks) == pytest.approx(0.0, abs=1e-12)
    assert sol.sup_residual <= 3.0 * A
    assert sol.certificate["ok"]


def test_certified_solver_reports_failure_without_raising():
    pts = _ball_grid(9, 2)
    zeros = np.zeros(len(pts))
    data = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, pts, pts), values=(zeros, zeros, zeros), noise=1e-6,
    )
    sol = solve_heis_fe(data, L=np.eye(2))
    assert not sol.certificate["ok"]
    assert sol.certificate["sup_sigma"] > sol.certificate["threshold"]


def test_certified_solver_cancels_antisymmetric_contamination():
    """Swapping-average kills any contamination with opposite signs."""
    pts = _ball_grid(11, 2)
    g = np.array([1.0, 2.0])
    bump = 0.3 * np.sin(3.0 * pts[:, 0]) * pts[:, 1]
    f1 = pts @ g + 0.5 + bump
    f2 = pts @ g - 0.2 - bump
    f3 = -(pts @ g) - 0.3
    data = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, pts, pts), values=(f1, f2, f3), noise=0.5,
    )
    sol = solve_heis_fe(data, L=10.0 * np.eye(2))
    assert np.allclose(sol.functions["gradient"], g, atol=1e-9)

    # symmetrized residuals are exactly the average of the oriented residuals
    k1, k2, _ = sol.functions["constants"]
    e0 = sol.functions["antisymmetric_offset"]
    c1, c2 = k1 - e0, k2 + e0
    r1 = f1 - (pts @ g + c1)
    r2 = f2 - (pts @ g + c2)
    r_sym = 0.5 * (f1 + f2) - (pts @ g + 0.5 * (c1 + c2))
    assert np.allclose(0.5 * (r1 + r2), r_sym, atol=1e-12)


def test_certified_solver_validates_input():
    pts = _ball_grid(5, 2)
    other = pts + 0.1
    zeros = np.zeros(len(pts))
    data = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, other, pts), values=(zeros, zeros, zeros), noise=1.0,
    )
    with pytest.raises(ValueError):
        solve_heis_fe(data, L=np.eye(2))
    good = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts, pts, pts), values=(zeros, zeros, zeros), noise=1.0,
    )
    with pytest.raises(ValueError):
        solve_heis_fe(good, L=np.eye(4))


# ----------------------------------------------------------------------
# bilinear phases


def _bilinear_grid(v1, v2, n=33):
    u1 = np.linspace(0.0, 1.0, n)
    u2 = np.linspace(0.0, 1.0, n)
    U1, U2 = np.meshgrid(u1, u2, indexing="ij")
    return np.exp(1j * (U1 * v1 - U2 * v2)), (u1, u2)


def test_bilinear_zero_plant():
    V, axes = _bilinear_grid(0.0, 0.0)
    v1, v2, eta = estimate_bilinear_phase(V, axes=axes)
    assert v1 == pytest.approx(0.0, abs=1e-12)
    assert v2 == pytest.approx(0.0, abs=1e-12)
    assert eta <= 1e-12


def test_bilinear_planted_slopes():
    rng = np.random.default_rng(91)
    V, axes = _bilinear_grid(0.3, -0.2)
    noisy = V * np.exp(1j * 0.01 * rng.uniform(-1, 1, size=V.shape))
    v1, v2, eta = estimate_bilinear_phase(noisy, axes=axes)
    assert abs(v1 - 0.3) <= 0.05
    assert abs(v2 + 0.2) <= 0.05
    assert abs(v1) + abs(v2) <= 5.0 * eta


def test_bilinear_survives_corruption():
    rng = np.random.default_rng(92)
    V, axes = _bilinear_grid(0.3, -0.2)
    V = V.copy()
    flat = V.ravel()
    bad = rng.choice(flat.size, size=int(0.05 * flat.size), replace=False)
    flat[bad] = np.exp(2j * np.pi * rng.uniform(size=bad.size))
    v1, v2, _ = estimate_bilinear_phase(flat.reshape(V.shape), axes=axes)
    assert abs(v1 - 0.3) <= 0.05
    assert abs(v2 + 0.2) <= 0.05


def test_bilinear_default_axes():
    V, _ = _bilinear_grid(0.15, 0.1)
    v1, v2, _ = estimate_bilinear_phase(V)
    assert v1 == pytest.approx(0.15, abs=1e-9)
    assert v2 == pytest.approx(0.1, abs=1e-9)


def test_bilinear_aliasing_guard():
    # phase step of 100/32 ~ 3.13 rad per node sits at the aliasing limit
    V, axes = _bilinear_grid(100.0, 0.0)
    with pytest.raises(ValueError):
        estimate_bilinear_phase(V, axes=axes)
