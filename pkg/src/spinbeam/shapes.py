"""Polynomial shape functions of the flexible beam and their exact integrals.

The lateral deflection in each bending plane is interpolated with four
fifth-order polynomials whose generalized coordinates are the root
curvature, the tip deflection, the tip slope and the tip curvature.
Traction and torsion each use the single linear mode x/l.  Every matrix
integrand downstream is a polynomial (degree <= 11), so all integrals here
are evaluated by exact monomial antidifferentiation: there is no quadrature
tolerance anywhere in the model build.

Coefficients are stored in ascending powers of x (``numpy.polynomial``
convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidParameterError

__all__ = [
    "Polynomial",
    "ShapeBasis",
    "GeometricIntegrals",
    "make_shape_basis",
    "integrate_product",
    "stiffness_integral_matrix",
    "geometric_integral_family",
]


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in the monomial basis, ascending powers of x."""

    coef: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coef", np.atleast_1d(np.asarray(self.coef, dtype=float)))

    def __call__(self, x):
        return npoly.polyval(x, self.coef)

    def deriv(self, m: int = 1) -> "Polynomial":
        return Polynomial(npoly.polyder(self.coef, m))

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.coef, other.coef))
        return Polynomial(self.coef * float(other))

    __rmul__ = __mul__

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polyadd(self.coef, other.coef))
        return Polynomial(npoly.polyadd(self.coef, [float(other)]))

    def integral(self, a: float, b: float) -> float:
        """Exact definite integral over [a, b]."""
        anti = npoly.polyint(self.coef)
        return npoly.polyval(b, anti) - npoly.polyval(a, anti)

    def antiderivative(self) -> "Polynomial":
        """Antiderivative vanishing at x = 0."""
        return Polynomial(npoly.polyint(self.coef))

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coef)[0]
        return int(nz[-1]) if nz.size else 0


ZERO = Polynomial([0.0])


def integrate_product(p: Polynomial, q: Polynomial, weight_power: int = 0,
                      a: float = 0.0, b: float = 1.0) -> float:
    """Exact value of the weighted product integral ``int_a^b x^w p q dx``."""
    if b < a:
        raise InvalidParameterError(f"integration bounds reversed: [{a}, {b}]")
    prod = npoly.polymul(p.coef, q.coef)
    if weight_power:
        prod = np.concatenate([np.zeros(weight_power), prod])
    anti = npoly.polyint(prod)
    return float(npoly.polyval(b, anti) - npoly.polyval(a, anti))


@dataclass(frozen=True)
class ShapeBasis:
    """Shape-function set of one beam element of length ``l``.

    ``phi_y``/``phi_z`` hold the four bending polynomials (identical in the
    two planes); ``tau`` and ``sigma`` are the traction and torsion modes.
    """

    l: float
    phi_y: tuple = field(repr=False)
    phi_z: tuple = field(repr=False)
    tau: Polynomial = field(repr=False)
    sigma: Polynomial = field(repr=False)

    @property
    def n_bending(self) -> int:
        return len(self.phi_y)

    def phi_vec(self, plane: str, x: float) -> np.ndarray:
        polys = self.phi_y if plane == "y" else self.phi_z
        return np.array([p(x) for p in polys])

    def dphi_vec(self, plane: str, x: float) -> np.ndarray:
        polys = self.phi_y if plane == "y" else self.phi_z
        return np.array([p.deriv()(x) for p in polys])


def make_shape_basis(l: float) -> ShapeBasis:
    """Build the quintic bending / linear traction / linear torsion basis.

    The four bending polynomials interpolate, in order, the root curvature,
    the tip deflection, the tip slope and the tip curvature; they are
    clamped at the root (zero value and slope at x = 0).
    """
    if not (l > 0.0):
        raise InvalidParameterError(f"beam length must be positive, got {l}")
    phi = (
        Polynomial([0, 0, 0.5, -1.5 / l, 1.5 / l**2, -0.5 / l**3]),
        Polynomial([0, 0, 0, 10 / l**3, -15 / l**4, 6 / l**5]),
        Polynomial([0, 0, 0, -4 / l**2, 7 / l**3, -3 / l**4]),
        Polynomial([0, 0, 0, 0.5 / l, -1 / l**2, 0.5 / l**3]),
    )
    lin = Polynomial([0, 1 / l])
    return ShapeBasis(l=l, phi_y=phi, phi_z=phi, tau=lin, sigma=lin)


def stiffness_integral_matrix(basis: ShapeBasis, EJ: float) -> np.ndarray:
    """Bending stiffness Gram matrix ``int_0^l EJ phi'' phi''^T dx`` (4x4)."""
    if not (EJ > 0.0):
        raise InvalidParameterError(f"flexural rigidity must be positive, got {EJ}")
    dd = [p.deriv(2) for p in basis.phi_y]
    n = len(dd)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            K[i, j] = K[j, i] = EJ * integrate_product(dd[i], dd[j], 0, 0.0, basis.l)
    return K


@dataclass(frozen=True)
class GeometricIntegrals:
    """Cumulative slope Gram matrices used by the foreshortening terms.

    ``e_cum`` holds the 4x4 antiderivative polynomials of phi' phi'^T, so
    ``E_y(x)`` / ``E_z(x)`` are exact polynomial evaluations.  The constant
    matrices are returned unscaled (the mass-per-length factor is applied by
    the caller): ``int_e = int_0^l Ebar(x) dx``, ``int_xe = int_0^l x Ebar(x)
    dx`` and ``e_end = Ebar(l)``, where Ebar(x) is the 10x10 zero-padded
    block-diagonal of E_y(x) and E_z(x).
    """

    basis: ShapeBasis
    e_cum: np.ndarray = field(repr=False)   # 4x4 object array of Polynomial
    int_e: np.ndarray = field(repr=False)   # 10x10
    int_xe: np.ndarray = field(repr=False)  # 10x10
    e_end: np.ndarray = field(repr=False)   # 10x10

    def e_plane(self, x: float) -> np.ndarray:
        """E(x) = int_0^x phi' phi'^T dr for one bending plane (4x4)."""
        n = self.e_cum.shape[0]
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = self.e_cum[i, j](x)
        return out

    def e_padded(self, x: float) -> np.ndarray:
        """Block-diagonal E(x) for both planes, padded to 10x10 with zero
        traction/torsion rows."""
        e = self.e_plane(x)
        out = np.zeros((10, 10))
        out[:4, :4] = e
        out[4:8, 4:8] = e
        return out


def geometric_integral_family(basis: ShapeBasis) -> GeometricIntegrals:
    """Exact cumulative and integrated slope Gram matrices of the basis."""
    n = basis.n_bending
    l = basis.l
    d = [p.deriv() for p in basis.phi_y]
    e_cum = np.empty((n, n), dtype=object)
    int_e4 = np.empty((n, n))
    int_xe4 = np.empty((n, n))
    e_end4 = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            cum = (d[i] * d[j]).antiderivative()
            e_cum[i, j] = cum
            e_end4[i, j] = cum(l)
            # int_0^l E(x) dx and int_0^l x E(x) dx, both exact
            int_e4[i, j] = cum.integral(0.0, l)
            int_xe4[i, j] = integrate_product(cum, Polynomial([0, 1]), 0, 0.0, l)

    def pad(m4):
        out = np.zeros((10, 10))
        out[:4, :4] = m4
        out[4:8, 4:8] = m4
        return out

    return GeometricIntegrals(basis=basis, e_cum=e_cum, int_e=pad(int_e4),
                              int_xe=pad(int_xe4), e_end=pad(e_end4))
