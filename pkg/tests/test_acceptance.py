"""Acceptance checks: ten end-to-end criteria with pinned tolerances.

Each test is one criterion; conftest.py prints a one-line PASS/FAIL verdict
per criterion with its runtime.  Criteria with a runtime budget assert it.
"""

import math
import time

import numpy as np
import pytest
from scipy import optimize

from heisyoung import (
    AffineMap,
    BiTranslation,
    CompatibleTripleSpec,
    DifferenceDataset,
    Dilation,
    FESampleSet,
    GaussianH,
    GaussianR,
    HeisPoint,
    Modulation,
    QuadratureSpec,
    Symplectic,
    SymmetryWord,
    VerticalShear,
    analyze_near_extremizer,
    apply_symmetry,
    compatible_euclid_triple,
    exponent_profile,
    integrate_difference,
    lp_norm,
    make_diffuse_triple,
    phi_ratio,
    poly_eval,
    recover_linear_phase,
    sample_triple,
    solve_additive_fe,
    solve_heis_fe,
    standard_symplectic_form,
    symplectic_factor,
    trilinear_euclid,
    trilinear_heis,
    trilinear_twisted,
)
from heisyoung.symplectic_factorization import random_symplectic
from heisyoung.trilinear import _assemble_heis, oracle_tensor_quadrature

HOMOG = exponent_profile((1.5, 1.5, 1.5))


def _interior_grid(n_points, lo=0.45, hi=0.9, n_axis=7):
    """Admissible interior exponent triples off a reciprocal grid."""
    profs = []
    for u1 in np.linspace(lo, hi, n_axis):
        for u2 in np.linspace(lo, hi, n_axis):
            u3 = 2.0 - u1 - u2
            if 1e-9 < u3 < 1.0 - 1e-9 and u1 < 1.0 - 1e-9 and u2 < 1.0 - 1e-9:
                profs.append(exponent_profile((1.0 / u1, 1.0 / u2, 1.0 / u3)))
    assert len(profs) >= n_points
    return profs[:n_points]


def _random_heis_triple(rng, kappa_decades=1.0):
    """Random d=1 Gaussian triple with mild per-factor condition numbers."""
    gs = []
    for _ in range(3):
        kappa = 10.0 ** rng.uniform(0.0, kappa_decades)
        O, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        ev = np.exp(rng.uniform(-0.5 * np.log(kappa), 0.5 * np.log(kappa), 3))
        ev /= np.prod(ev) ** (1.0 / 3.0)
        gs.append(
            GaussianH(
                Q=O @ np.diag(ev) @ O.T,
                a=rng.normal(0.0, 0.3, 3),
                b=rng.normal(0.0, 0.3, 3),
                c=complex(rng.normal(), rng.normal()),
            )
        )
    return tuple(gs)


def _richardson(values):
    """Extrapolate a geometrically converging sequence to its limit."""
    d2 = values[-2] - values[-3]
    d3 = values[-1] - values[-2]
    rho = d3 / d2
    assert 0.0 < rho < 1.0
    return values[-1] + d3 * rho / (1.0 - rho)


# ----------------------------------------------------------------------
# 1. sharp-constant exactness on a 20-triple grid, every dimension 1..3


def test_01_sharp_constant_exact_on_compatible_triples():
    t0 = time.perf_counter()
    for prof in _interior_grid(20):
        for m in (1, 2, 3):
            gs = compatible_euclid_triple(prof, np.eye(m))
            assert phi_ratio(gs, prof) == pytest.approx(prof.sharp**m, abs=1e-9)
    assert time.perf_counter() - t0 < 1.0


# ----------------------------------------------------------------------
# 2. the weight formula maximizes the Gaussian ratio, 10 triples


def _phi_of_weights(g2, g3, prof):
    gs = [
        GaussianR(Q=np.array([[g]]), a=np.zeros(1), b=np.zeros(1))
        for g in (1.0, g2, g3)
    ]
    val = abs(trilinear_euclid(*gs))
    return val / math.prod(lp_norm(g, p) for g, p in zip(gs, prof.p))


def test_02_weight_formula_is_the_argmax():
    t0 = time.perf_counter()
    profs = _interior_grid(10, lo=0.5, hi=0.85, n_axis=5)
    for prof in profs:
        res = optimize.minimize(
            lambda v: -_phi_of_weights(math.exp(v[0]), math.exp(v[1]), prof),
            x0=np.array([0.3, -0.4]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
        )
        g2, g3 = math.exp(res.x[0]), math.exp(res.x[1])
        assert abs(g2 - prof.gamma[1]) <= 1e-6
        assert abs(g3 - prof.gamma[2]) <= 1e-6
        assert -res.fun == pytest.approx(prof.sharp, abs=1e-9)
    assert time.perf_counter() - t0 < 10.0


# ----------------------------------------------------------------------
# 3. group bound holds on random triples; concentrated plants leave a gap


def test_03_group_bound_and_nonexistence_gap():
    rng = np.random.default_rng(33)
    for _ in range(50):
        u1, u2 = rng.uniform(0.55, 0.80, size=2)
        prof = exponent_profile((1.0 / u1, 1.0 / u2, 1.0 / (2.0 - u1 - u2)))
        gs = _random_heis_triple(rng)
        assert phi_ratio(gs, prof, setting="heis") <= prof.sharp**3 * (1.0 + 1e-6)

    # concentrated compatible plants sit strictly below the bound
    for p in ((1.5, 1.5, 1.5), (4.0 / 3.0, 4.0 / 3.0, 2.0), (1.25, 2.0, 10.0 / 7.0)):
        prof = exponent_profile(p)
        plant = CompatibleTripleSpec(profile=prof, L=np.eye(2), a=1.0)
        gap = prof.sharp**3 - phi_ratio(plant.to_gaussians(), prof, setting="heis")
        assert gap > 1e-4


# ----------------------------------------------------------------------
# 4. diffuse sweep increases monotonically and extrapolates to the bound


def test_04_diffuse_sweep_extrapolates_to_the_sharp_bound():
    t0 = time.perf_counter()
    phis = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        gs, _ = make_diffuse_triple(HOMOG, eps)
        phis.append(phi_ratio(gs, HOMOG, setting="heis"))
    bound = HOMOG.sharp**3
    assert all(a < b for a, b in zip(phis, phis[1:]))
    assert all(phi < bound for phi in phis)
    assert abs(_richardson(phis) - bound) <= 1e-3
    assert time.perf_counter() - t0 < 60.0


# ----------------------------------------------------------------------
# 5. fast evaluator agrees with the brute-force quadrature oracle


def _whitened_quartic_scale(gs, R=4.0):
    """A-priori resolvability prescreen for the oracle's tensor grid."""
    data = _assemble_heis(*gs)
    A, Bs, C, g = data["A_re"], data["Bs"], data["C"], data["g"]
    center = np.linalg.solve(A, 0.5 * data["w0"].real)
    mu, E = np.linalg.eigh(A)
    W = E * (mu**-0.5)
    curv = np.linalg.norm(W.T @ (2 * Bs) @ W, 2)
    grad = W.T @ (2 * Bs @ center - g / (2 * C))
    return math.sqrt(C) * (0.5 * curv * R * R + float(np.linalg.norm(grad)) * R)


def test_05_evaluator_matches_oracle_on_50_instances():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260815)
    kept = 0
    worst = 0.0
    while kept < 50:
        gs = _random_heis_triple(rng, kappa_decades=2.0)
        if _whitened_quartic_scale(gs) > 13.0:
            continue
        val, err = oracle_tensor_quadrature(*gs, QuadratureSpec(nodes=20))
        if err > 3e-6 * abs(val):
            continue
        fast = trilinear_heis(*gs, check_convergence=True, convergence_tol=1e-7)
        worst = max(worst, abs(fast - val) / abs(val))
        kept += 1
    assert kept == 50
    assert worst <= 1e-6
    assert time.perf_counter() - t0 < 300.0


# ----------------------------------------------------------------------
# 6. the five symmetry families leave the ratio invariant


def _random_element(rng, d=1):
    kind = rng.integers(5)
    if kind == 0:
        return Dilation(r=float(np.exp(0.4 * rng.normal())))
    if kind == 1:
        def pt():
            return HeisPoint(x=rng.normal(size=2 * d), t=float(rng.normal()))

        return BiTranslation(u1=pt(), u2=pt(), u3=pt())
    if kind == 2:
        return Symplectic(S=random_symplectic(d, rng))
    if kind == 3:
        g = rng.normal(size=2 * d)
        c1, c2 = rng.normal(size=2)
        return VerticalShear(
            phi1=AffineMap(g=g, c=c1),
            phi2=AffineMap(g=g, c=c2),
            phi3=AffineMap(g=g, c=-c1 - c2),
        )
    return Modulation(u=rng.normal(size=2 * d))


def test_06_symmetry_words_preserve_the_ratio():
    rng = np.random.default_rng(66)
    kinds_seen = set()
    for _ in range(100):
        gs = _random_heis_triple(rng)
        word = SymmetryWord(
            elements=tuple(
                _random_element(rng) for _ in range(int(rng.integers(1, 6)))
            )
        )
        kinds_seen.update(type(e).__name__ for e in word)
        phi0 = phi_ratio(gs, HOMOG, setting="heis")
        phi1 = phi_ratio(apply_symmetry(word, gs), HOMOG, setting="heis")
        assert abs(phi1 - phi0) / phi0 <= 1e-6
    assert len(kinds_seen) == 5


# ----------------------------------------------------------------------
# 7. symplectic factorization: invariants and near-optimality


def test_07_symplectic_factorization_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        n = 2 * d
        L = rng.normal(size=(n, n))
        if abs(np.linalg.det(L)) < 1e-6:
            L = L + np.eye(n)
        res = symplectic_factor(L)
        J = standard_symplectic_form(d)
        assert np.linalg.norm(res.S.T @ J @ res.S - J, "fro") <= 1e-9
        achieved = np.linalg.norm(np.linalg.solve(res.S, L), 2)
        target = np.linalg.norm(L.T @ J @ L, 2) ** 0.5
        assert abs(achieved - target) <= 1e-9 * target
        best_competitor = min(
            np.linalg.norm(np.linalg.solve(random_symplectic(d, rng), L), 2)
            for _ in range(100)
        )
        assert best_competitor >= achieved - 1e-9
    assert time.perf_counter() - t0 < 30.0


# ----------------------------------------------------------------------
# 8. robust recovery from planted functional-equation corpora


def _ball_grid(n, dim, radius=1.0):
    axes = [np.linspace(-radius, radius, n)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return pts[np.linalg.norm(pts, axis=1) <= radius]


def _difference_plant(q, dim, degree, offsets, n_base, rng, noise, corrupt):
    base = _ball_grid(n_base, dim)
    X = np.repeat(base, len(offsets), axis=0)
    H = np.tile(offsets, (len(base), 1))
    vals = poly_eval(q, X + H) - poly_eval(q, X)
    vals = vals + rng.uniform(-noise, noise, size=vals.shape)
    if corrupt > 0.0:
        bad = rng.choice(vals.size, size=int(corrupt * vals.size), replace=False)
        vals[bad] += rng.normal(size=bad.size) * 50.0
    return DifferenceDataset(
        points=X, offsets=H, values=vals, degree=degree,
        center=np.zeros(dim), radius=1.0, offset_radius=0.5,
    )


def test_08_functional_equation_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(88)
    A = 0.01

    # polynomial integration from noisy, partially corrupted differences
    cases = [
        (1, 0, {(1,): 2.0}),
        (1, 3, {(4,): 0.25, (2,): 1.0}),
        (2, 1, {(1, 1): 1.0, (2, 0): 1.0}),
        (2, 3, {(2, 2): 0.4, (1, 0): 0.5}),
    ]
    for dim, D, q in cases:
        offs = 0.5 * rng.uniform(-1.0, 1.0, size=(2 * (D + 2), dim))
        data = _difference_plant(
            q, dim, D, offs, 41 if dim == 1 else 11, rng, noise=A, corrupt=0.10
        )
        sol = integrate_difference(data)
        pts = _ball_grid(41 if dim == 1 else 21, dim)
        diff = poly_eval(sol.functions["coefficients"], pts) - poly_eval(q, pts)
        diff = diff - np.median(diff)  # additive gauge: constants drop out
        assert float(np.quantile(np.abs(diff), 0.90)) <= 5.0 * A

    # additive solver under the same noise plus 10% gross corruption
    x = np.linspace(-1.0, 1.0, 81).reshape(-1, 1)
    f1 = 2.0 * x[:, 0] + 1.0 + rng.uniform(-A, A, size=81)
    f2 = 2.0 * x[:, 0] - 1.0 + rng.uniform(-A, A, size=81)
    f3 = -4.0 * x[:, 0] + rng.uniform(-A, A, size=81)
    bad = rng.choice(81, size=8, replace=False)
    f2[bad] += 1e3
    adata = FESampleSet(
        dimension=1, center=[0.0], radius=1.0,
        points=(x, x, 2.0 * x), values=(f1, f2, f3), noise=A, corruption=0.10,
    )
    asol = solve_additive_fe(adata)
    assert np.allclose(asol.functions["gradient"], [2.0], atol=3.0 * A)
    assert asol.sup_residual <= 3.0 * A

    # unimodular phase recovery: exact plant, then phase noise
    vs = (0.7, -1.3, 0.6)
    xs = np.linspace(-1.0, 1.0, 161).reshape(-1, 1)
    exact = FESampleSet(
        dimension=1, center=[0.0], radius=1.0,
        points=(xs, xs, xs),
        values=tuple(np.exp(1j * v * xs[:, 0]) for v in vs),
    )
    esol = recover_linear_phase(exact)
    for v_hat, v in zip(esol.functions["v"], vs):
        assert np.allclose(v_hat, [v], atol=1e-9)
    assert esol.sup_residual <= 1e-9

    eta = 0.0025
    pdata = FESampleSet(
        dimension=1, center=[0.0], radius=1.0,
        points=(xs, xs, xs),
        values=tuple(
            np.exp(1j * (v * xs[:, 0] + eta * rng.uniform(-1, 1, size=161)))
            for v in vs
        ),
        noise=eta,
    )
    psol = recover_linear_phase(pdata)
    for v_hat, v in zip(psol.functions["v"], vs):
        assert np.allclose(v_hat, [v], atol=0.05)
    assert psol.sup_residual <= 0.05

    # certified solver: passes across the scaled-frame family, fails at scale 1
    pts2 = _ball_grid(9, 2)
    g = np.array([0.8, -0.5])
    for R in (2.0, 5.0, 10.0):
        noise = R**-2
        h1 = pts2 @ g + 0.4 + noise * rng.uniform(-1, 1, size=len(pts2))
        h2 = pts2 @ g - 0.1 + noise * rng.uniform(-1, 1, size=len(pts2))
        h3 = -(pts2 @ g) - 0.3 + noise * rng.uniform(-1, 1, size=len(pts2))
        hdata = FESampleSet(
            dimension=2, center=np.zeros(2), radius=1.0,
            points=(pts2, pts2, pts2), values=(h1, h2, h3), noise=noise,
        )
        hsol = solve_heis_fe(hdata, L=R * np.eye(2))
        assert hsol.certificate["ok"]
        assert hsol.certificate["sup_sigma"] == pytest.approx(R**-2, rel=1e-12)
        assert np.allclose(hsol.functions["gradient"], g, atol=3.0 * noise)

    zeros = np.zeros(len(pts2))
    tight = FESampleSet(
        dimension=2, center=np.zeros(2), radius=1.0,
        points=(pts2, pts2, pts2), values=(zeros, zeros, zeros), noise=1e-6,
    )
    fail = solve_heis_fe(tight, L=np.eye(2))
    assert not fail.certificate["ok"]
    assert fail.certificate["sup_sigma"] > fail.certificate["threshold"]

    assert time.perf_counter() - t0 < 300.0


# ----------------------------------------------------------------------
# 9. sampled-data pipeline round trip and equivariance


def _mild_word(rng, length):
    elements = []
    for _ in range(length):
        kind = rng.integers(5)
        if kind == 0:
            elements.append(Dilation(r=float(np.exp(0.1 * rng.normal()))))
        elif kind == 1:
            def pt():
                return HeisPoint(x=0.3 * rng.normal(size=2), t=0.3 * rng.normal())

            elements.append(BiTranslation(u1=pt(), u2=pt(), u3=pt()))
        elif kind == 2:
            th = rng.uniform(0.0, 2.0 * np.pi)
            S = np.array(
                [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]]
            )
            elements.append(Symplectic(S=S))
        elif kind == 3:
            g = 0.15 * rng.normal(size=2)
            c1, c2 = 0.2 * rng.normal(size=2)
            elements.append(
                VerticalShear(
                    phi1=AffineMap(g=g, c=c1),
                    phi2=AffineMap(g=g, c=c2),
                    phi3=AffineMap(g=g, c=-c1 - c2),
                )
            )
        else:
            elements.append(Modulation(u=0.3 * rng.normal(size=2)))
    return SymmetryWord(elements=tuple(elements))


def test_09_pipeline_round_trip_and_equivariance():
    t0 = time.perf_counter()
    for p in ((1.5, 1.5, 1.5), (4.0 / 3.0, 4.0 / 3.0, 2.0)):
        prof = exponent_profile(p)
        gs, _ = make_diffuse_triple(prof, 0.01)
        rep = analyze_near_extremizer(sample_triple(gs, prof))
        assert max(rep.distances) <= 0.02
        model = apply_symmetry(rep.word, rep.spec.to_gaussians())
        assert phi_ratio(model, prof, setting="heis") == pytest.approx(
            rep.phi, abs=1e-4
        )

    # equivariance: a random pre-applied word barely moves the report
    gs, _ = make_diffuse_triple(HOMOG, 0.01)
    base = analyze_near_extremizer(sample_triple(gs, HOMOG))
    rng = np.random.default_rng(99)
    word = _mild_word(rng, int(rng.integers(3, 6)))
    moved = apply_symmetry(word, gs)
    rep = analyze_near_extremizer(sample_triple(moved, HOMOG))
    assert max(abs(a - b) for a, b in zip(rep.distances, base.distances)) <= 1e-3
    assert abs(rep.gap - base.gap) <= 1e-3
    assert time.perf_counter() - t0 < 300.0


# ----------------------------------------------------------------------
# 10. oscillatory form: zero-parameter reduction and concentration limit


def test_10_oscillatory_reduction_and_concentration_limit():
    rng = np.random.default_rng(10)
    for _ in range(20):
        gs = []
        for _ in range(3):
            B = 0.4 * rng.normal(size=(2, 2))
            gs.append(
                GaussianR(
                    Q=B @ B.T + np.eye(2),
                    a=0.3 * rng.normal(size=2),
                    b=0.3 * rng.normal(size=2),
                    c=rng.normal() + 1j * rng.normal(),
                )
            )
        e = trilinear_euclid(*gs)
        t = trilinear_twisted(*gs, 0.0)
        assert abs(t - e) <= 1e-12 * abs(e)

    # concentration: the oscillation dies and Phi climbs to the planar bound
    phis = [
        phi_ratio(
            compatible_euclid_triple(HOMOG, np.eye(2) / r),
            HOMOG,
            setting="twisted",
            lam=1.0,
        )
        for r in (0.5, 0.25, 0.125, 0.0625)
    ]
    bound = HOMOG.sharp**2
    assert all(a < b for a, b in zip(phis, phis[1:]))
    assert abs(_richardson(phis) - bound) <= 1e-3
