"""Group arithmetic, the symplectic form, and the Sp(2d) membership test."""

import numpy as np
import pytest

from heisyoung import (
    HeisPoint,
    heis_identity,
    heis_inv,
    heis_mul,
    is_symplectic,
    sigma,
    standard_symplectic_form,
)
from heisyoung.symplectic_factorization import random_symplectic


def test_identity_element():
    z = HeisPoint(x=np.array([1.0, -2.0]), t=0.7)
    e = heis_identity(1)
    for w in (heis_mul(e, z), heis_mul(z, e)):
        assert np.allclose(w.x, z.x)
        assert w.t == pytest.approx(z.t)


def test_mul_picks_up_area_term():
    z1 = HeisPoint(x=np.array([1.0, 0.0]), t=0.0)
    z2 = HeisPoint(x=np.array([0.0, 1.0]), t=0.0)
    w = heis_mul(z1, z2)
    assert np.allclose(w.x, [1.0, 1.0])
    assert w.t == pytest.approx(1.0)
    # reversed order flips the sign of the area term
    wr = heis_mul(z2, z1)
    assert wr.t == pytest.approx(-1.0)


def test_inverse_law():
    rng = np.random.default_rng(3)
    for d in (1, 2, 3):
        z = HeisPoint(x=rng.normal(size=2 * d), t=float(rng.normal()))
        w = heis_mul(z, heis_inv(z))
        assert np.allclose(w.x, 0.0, atol=1e-14)
        assert w.t == pytest.approx(0.0, abs=1e-14)


def test_inverse_negates_coordinates():
    z = HeisPoint(x=np.array([1.0, 2.0]), t=3.0)
    w = heis_inv(z)
    assert np.allclose(w.x, [-1.0, -2.0])
    assert w.t == pytest.approx(-3.0)
    e = heis_inv(heis_identity(1))
    assert np.allclose(e.x, 0.0) and e.t == 0.0


def test_inverse_is_involutive():
    rng = np.random.default_rng(4)
    z = HeisPoint(x=rng.normal(size=4), t=float(rng.normal()))
    w = heis_inv(heis_inv(z))
    assert np.allclose(w.x, z.x)
    assert w.t == pytest.approx(z.t)


def test_mul_is_associative():
    rng = np.random.default_rng(5)
    for d in (1, 2, 3):
        zs = [HeisPoint(x=rng.normal(size=2 * d), t=float(rng.normal())) for _ in range(3)]
        left = heis_mul(heis_mul(zs[0], zs[1]), zs[2])
        right = heis_mul(zs[0], heis_mul(zs[1], zs[2]))
        assert np.allclose(left.x, right.x, atol=1e-12)
        assert left.t == pytest.approx(right.t, abs=1e-12)


def test_mul_rejects_dimension_mismatch():
    z1 = HeisPoint(x=np.zeros(2), t=0.0)
    z2 = HeisPoint(x=np.zeros(4), t=0.0)
    with pytest.raises(ValueError):
        heis_mul(z1, z2)


def test_point_needs_even_x():
    with pytest.raises(ValueError):
        HeisPoint(x=np.zeros(3), t=0.0)


def test_sigma_basic_values():
    assert sigma(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(0.0)
    assert sigma(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)


def test_sigma_is_antisymmetric():
    rng = np.random.default_rng(6)
    for d in (1, 2):
        x, y = rng.normal(size=(2, 2 * d))
        assert sigma(x, y) == pytest.approx(-sigma(y, x), abs=1e-12)
        assert sigma(x, x) == pytest.approx(0.0, abs=1e-12)


def test_sigma_scaled_frame():
    rng = np.random.default_rng(7)
    x, y = rng.normal(size=(2, 4))
    R = 2.5
    scaled = sigma(x, y, L=R * np.eye(4))
    assert scaled == pytest.approx(sigma(x, y) / R**2, rel=1e-12)


def test_sigma_invariant_under_symplectic_maps():
    rng = np.random.default_rng(8)
    for d in (1, 2):
        S = random_symplectic(d, rng)
        x, y = rng.normal(size=(2, 2 * d))
        assert sigma(S @ x, S @ y) == pytest.approx(sigma(x, y), rel=1e-10, abs=1e-12)


def test_sigma_rejects_singular_frame():
    L = np.diag([1.0, 0.0])
    with pytest.raises((ValueError, np.linalg.LinAlgError)):
        sigma(np.array([1.0, 0.0]), np.array([0.0, 1.0]), L=L)


def test_standard_form_structure():
    for d in (1, 2, 3):
        J = standard_symplectic_form(d)
        assert np.allclose(J, -J.T)
        assert np.allclose(J @ J, -np.eye(2 * d))
        assert np.allclose(J[:d, d:], np.eye(d))


def test_is_symplectic_accepts_known_members():
    J = standard_symplectic_form(1)
    assert is_symplectic(np.eye(2))
    assert is_symplectic(J)
    assert is_symplectic(np.diag([2.0, 0.5]))
    rng = np.random.default_rng(9)
    for d in (1, 2, 3):
        assert is_symplectic(random_symplectic(d, rng))


def test_is_symplectic_rejects_non_members():
    assert not is_symplectic(2.0 * np.eye(2))
    assert not is_symplectic(np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_is_symplectic_rejects_odd_size():
    with pytest.raises(ValueError):
        is_symplectic(np.eye(3))
