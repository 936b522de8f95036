"""Symmetries of the normalized trilinear functional on Heisenberg groups.

Five families act on Gaussian triples and leave Phi = |T| / prod ||f_j||_{p_j}
unchanged:

* dilation        (x, t) -> (r x, r^2 t), the same for all three factors;
* bi-translation  z -> u_j z w_j with w_1 = u_2^{-1}, w_2 = u_3^{-1},
                  w_3 = u_1^{-1} (only the u_j are stored);
* symplectic      (x, t) -> (S x, t) with S^T J S = J, shared by the factors;
* vertical shear  (x, t) -> (x, t + phi_j(x)) with affine phi_j satisfying
                  phi_1(x_1) + phi_2(x_2) + phi_3(-x_1 - x_2) = 0 identically;
* modulation      multiply every factor by e^{i u.x}.

Gaussians are closed under all five, so the action is computed exactly on the
(Q, a, b, c) data: substituting z -> M z + m_0 into c e^{-(z-a)^T Q (z-a)+ib.z}
gives Q' = M^T Q M, a' = M^{-1}(a - m_0), b' = M^T b, c' = c e^{i b.m_0}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussians import GaussianH
from .heisenberg import HeisPoint, heis_inv, heis_mul, is_symplectic, standard_symplectic_form

__all__ = [
    "AffineMap",
    "Dilation",
    "BiTranslation",
    "Symplectic",
    "VerticalShear",
    "Modulation",
    "SymmetryWord",
    "apply_symmetry",
    "element_inverse",
    "word_inverse",
]

_COEFF_TOL = 1e-12


@dataclass(frozen=True)
class AffineMap:
    """x -> g.x + c on R^{2d}."""

    g: np.ndarray
    c: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 1 or g.size == 0 or g.size % 2 != 0:
            raise ValueError(f"affine gradient must have even positive length, got shape {g.shape}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", float(self.c))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.g + self.c


@dataclass(frozen=True)
class Dilation:
    r: float

    def __post_init__(self):
        r = float(self.r)
        if not (r > 0.0) or not np.isfinite(r):
            raise ValueError(f"dilation parameter must be a positive real, got {self.r}")
        object.__setattr__(self, "r", r)

    @property
    def d(self):
        return None  # acts in any dimension


@dataclass(frozen=True)
class BiTranslation:
    """f_j -> f_j(u_j z w_j); the w_j are implied by the constraint."""

    u1: HeisPoint
    u2: HeisPoint
    u3: HeisPoint

    def __post_init__(self):
        for u in (self.u1, self.u2, self.u3):
            if not isinstance(u, HeisPoint):
                raise TypeError(f"bi-translation expects HeisPoint entries, got {type(u).__name__}")
        if not (self.u1.d == self.u2.d == self.u3.d):
            raise ValueError("bi-translation points must share d")

    @property
    def d(self):
        return self.u1.d

    def pairs(self):
        """The (u_j, w_j) pairs with w_1 = u_2^{-1}, w_2 = u_3^{-1}, w_3 = u_1^{-1}."""
        return (
            (self.u1, heis_inv(self.u2)),
            (self.u2, heis_inv(self.u3)),
            (self.u3, heis_inv(self.u1)),
        )


@dataclass(frozen=True)
class Symplectic:
    S: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if not is_symplectic(S):
            raise ValueError("matrix fails the symplectic criterion S^T J S = J")
        object.__setattr__(self, "S", S)

    @property
    def d(self):
        return self.S.shape[0] // 2


@dataclass(frozen=True)
class VerticalShear:
    """(x,t) -> (x, t + phi_j(x)); phi_1(x1)+phi_2(x2)+phi_3(-x1-x2) = 0.

    Expanding the identity in coefficients: all three gradients are equal and
    the constants sum to zero.  This is checked on the coefficients, not by
    sampling.
    """

    phi1: AffineMap
    phi2: AffineMap
    phi3: AffineMap

    def __post_init__(self):
        phis = (self.phi1, self.phi2, self.phi3)
        if len({phi.g.size for phi in phis}) != 1:
            raise ValueError("shear maps must share the x-dimension")
        scale = 1.0 + max(float(np.max(np.abs(phi.g))) for phi in phis)
        if (
            np.max(np.abs(self.phi1.g - self.phi3.g)) > _COEFF_TOL * scale
            or np.max(np.abs(self.phi2.g - self.phi3.g)) > _COEFF_TOL * scale
        ):
            raise ValueError("shear gradients must be equal for the affine-sum identity")
        cscale = 1.0 + max(abs(phi.c) for phi in phis)
        if abs(self.phi1.c + self.phi2.c + self.phi3.c) > _COEFF_TOL * cscale:
            raise ValueError("shear constants must sum to zero")

    @property
    def d(self):
        return self.phi1.g.size // 2


@dataclass(frozen=True)
class Modulation:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size == 0 or u.size % 2 != 0:
            raise ValueError(f"modulation vector must have even positive length, got shape {u.shape}")
        object.__setattr__(self, "u", u)

    @property
    def d(self):
        return self.u.size // 2


_ELEMENT_TYPES = (Dilation, BiTranslation, Symplectic, VerticalShear, Modulation)


@dataclass(frozen=True)
class SymmetryWord:
    """Ordered composition of symmetry elements (applied left to right)."""

    elements: tuple

    def __post_init__(self):
        elems = tuple(self.elements)
        dims = set()
        for e in elems:
            if not isinstance(e, _ELEMENT_TYPES):
                raise TypeError(f"not a symmetry element: {type(e).__name__}")
            if e.d is not None:
                dims.add(e.d)
        if len(dims) > 1:
            raise ValueError(f"word mixes dimensions {sorted(dims)}")
        object.__setattr__(self, "elements", elems)

    @property
    def d(self):
        for e in self.elements:
            if e.d is not None:
                return e.d
        return None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _substitute(g: GaussianH, M: np.ndarray, m0: np.ndarray) -> GaussianH:
    """G -> G(M z + m_0), exact on the Gaussian data."""
    Q = M.T @ g.Q @ M
    Q = 0.5 * (Q + Q.T)
    a = np.linalg.solve(M, g.a - m0)
    b = M.T @ g.b
    c = g.c * np.exp(1j * float(g.b @ m0))
    return GaussianH(Q=Q, a=a, b=b, c=c)


def _shear_matrix(n: int, grad: np.ndarray) -> np.ndarray:
    M = np.eye(n)
    M[-1, : n - 1] = grad
    return M


def _element_maps(elem, d: int):
    """Three (M, m_0) affine substitutions, or None for a modulation."""
    n = 2 * d + 1
    if isinstance(elem, Dilation):
        M = np.diag(np.concatenate([np.full(2 * d, elem.r), [elem.r**2]]))
        return [(M, np.zeros(n))] * 3
    if isinstance(elem, Symplectic):
        M = np.eye(n)
        M[: 2 * d, : 2 * d] = elem.S
        return [(M, np.zeros(n))] * 3
    if isinstance(elem, VerticalShear):
        maps = []
        for phi in (elem.phi1, elem.phi2, elem.phi3):
            m0 = np.zeros(n)
            m0[-1] = phi.c
            maps.append((_shear_matrix(n, phi.g), m0))
        return maps
    if isinstance(elem, BiTranslation):
        # z -> u z w is affine: x gains u_x + w_x, t gains sigma(x, w_x)
        # - sigma(x, u_x) plus the constant u_t + w_t + sigma(u_x, w_x).
        J = standard_symplectic_form(d)
        maps = []
        for u, w in elem.pairs():
            M = _shear_matrix(n, J @ (w.x - u.x))
            shift = heis_mul(u, w)
            m0 = np.concatenate([shift.x, [shift.t]])
            maps.append((M, m0))
        return maps
    raise TypeError(f"not an affine symmetry element: {type(elem).__name__}")


def _apply_element(elem, triple):
    g1 = triple[0]
    d = (g1.m - 1) // 2
    if elem.d is not None and elem.d != d:
        raise ValueError(f"element acts on d={elem.d}, triple has d={d}")
    if isinstance(elem, Modulation):
        out = []
        for g in triple:
            b = g.b.copy()
            b[: 2 * d] += elem.u
            out.append(GaussianH(Q=g.Q, a=g.a, b=b, c=g.c))
        return tuple(out)
    maps = _element_maps(elem, d)
    return tuple(_substitute(g, M, m0) for g, (M, m0) in zip(triple, maps))


def apply_symmetry(word, triple):
    """Apply a SymmetryWord (or iterable of elements) to a Gaussian triple.

    Elements act in order: the first element is applied first.  Returns the
    transformed triple; Phi of the result equals Phi of the input.
    """
    if not isinstance(word, SymmetryWord):
        word = SymmetryWord(tuple(word))
    triple = tuple(triple)
    if len(triple) != 3:
        raise ValueError(f"expected a triple, got {len(triple)} functions")
    for g in triple:
        if not isinstance(g, GaussianH):
            raise TypeError(f"apply_symmetry expects GaussianH inputs, got {type(g).__name__}")
    if not (triple[0].m == triple[1].m == triple[2].m):
        raise ValueError(f"dimension mismatch: {[g.m for g in triple]}")
    for elem in word:
        triple = _apply_element(elem, triple)
    return triple


def element_inverse(elem):
    """The inverse symmetry element (each family is closed under inverses)."""
    if isinstance(elem, Dilation):
        return Dilation(1.0 / elem.r)
    if isinstance(elem, BiTranslation):
        return BiTranslation(heis_inv(elem.u1), heis_inv(elem.u2), heis_inv(elem.u3))
    if isinstance(elem, Symplectic):
        J = standard_symplectic_form(elem.d)
        return Symplectic(-J @ elem.S.T @ J)  # S^{-1} = -J S^T J
    if isinstance(elem, VerticalShear):
        return VerticalShear(
            AffineMap(-elem.phi1.g, -elem.phi1.c),
            AffineMap(-elem.phi2.g, -elem.phi2.c),
            AffineMap(-elem.phi3.g, -elem.phi3.c),
        )
    if isinstance(elem, Modulation):
        return Modulation(-elem.u)
    raise TypeError(f"not a symmetry element: {type(elem).__name__}")


def word_inverse(word):
    if not isinstance(word, SymmetryWord):
        word = SymmetryWord(tuple(word))
    return SymmetryWord(tuple(element_inverse(e) for e in reversed(word.elements)))
