"""Geometry of the Siegel upper half space.

Points are ``Z = X + iY`` with ``X`` real symmetric and ``Y`` symmetric
positive definite.  The symplectic group acts by fractional linear maps
``Z -> (AZ + B)(CZ + D)^{-1}``; the invariant distance is read off from the
eigenvalues of the matrix cross-ratio.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import matkit
from .errors import DimensionError, NotSymplecticError, SpectralValidityError
from .matkit import TOL


def standard_form(g):
    """The alternating form ``J = (0 -Id; Id 0)`` of size ``2g``."""
    eye = np.eye(g, dtype=int)
    zero = np.zeros((g, g), dtype=int)
    return np.block([[zero, -eye], [eye, zero]])


def _symmetrized(m, name):
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > TOL.symmetry_repair * scale:
        raise DimensionError(f"{name} is not symmetric")
    return (a + a.T) / 2


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """A point ``X + iY`` of the Siegel upper half space of genus ``g``.

    Small asymmetries (round-off accumulated along long orbits) are repaired
    by symmetrization on construction; ``Y`` must be positive definite.
    """

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        x = _symmetrized(self.X, "X")
        y = _symmetrized(self.Y, "Y")
        if x.shape != y.shape:
            raise DimensionError("X and Y must have the same shape")
        matkit.as_spd(y)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z, dtype=complex)
        return cls(z.real, z.imag)

    @classmethod
    def scalar(cls, y, g=2, x=0.0):
        """``x*Id + i*y*Id``; handy for hand-checked examples."""
        return cls(x * np.eye(g), y * np.eye(g))

    @property
    def g(self):
        return self.X.shape[0]

    @property
    def Z(self):
        return self.X + 1j * self.Y

    def allclose(self, other, atol=1e-9):
        return self.g == other.g and np.allclose(self.Z, other.Z, rtol=0.0, atol=atol)

    def __repr__(self):
        return f"SiegelPoint(g={self.g}, Z={self.Z.tolist()!r})"


class _Blocks:
    """Block accessors shared by real and integer symplectic matrices."""

    matrix: np.ndarray

    @property
    def g(self):
        return self.matrix.shape[0] // 2

    @property
    def A(self):
        g = self.g
        return self.matrix[:g, :g]

    @property
    def B(self):
        g = self.g
        return self.matrix[:g, g:]

    @property
    def C(self):
        g = self.g
        return self.matrix[g:, :g]

    @property
    def D(self):
        g = self.g
        return self.matrix[g:, g:]


@dataclass(frozen=True, eq=False)
class SymplecticReal(_Blocks):
    """Real ``2g x 2g`` matrix with ``M^T J M = J``.

    The relation is checked to ``TOL.symplectic`` scaled by ``max(1, |M|^2)``
    so that well-conditioned but large normalizers are not rejected.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionError(f"symplectic matrix must be 2g x 2g, got {m.shape}")
        j = standard_form(m.shape[0] // 2)
        defect = np.abs(m.T @ j @ m - j)
        scale = max(1.0, float(np.abs(m).max()) ** 2)
        if defect.max() > TOL.symplectic * scale:
            i, k = np.unravel_index(int(np.argmax(defect)), defect.shape)
            raise NotSymplecticError(
                f"M^T J M differs from J by {defect[i, k]:.3e} at ({i}, {k})", (int(i), int(k))
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_blocks(cls, a, b, c, d):
        return cls(np.block([[a, b], [c, d]]))


def det_real(m):
    return matkit.det_complex(m).real


def automorphy_det(gamma, z):
    """``det(CZ + D)`` for a symplectic ``gamma`` (real or integer)."""
    return matkit.det_complex(gamma.C @ z.Z + gamma.D)


def act(gamma, z):
    """Fractional linear action ``(AZ + B)(CZ + D)^{-1}``."""
    if gamma.g != z.g:
        raise DimensionError(f"genus mismatch: gamma has g={gamma.g}, point has g={z.g}")
    zz = z.Z
    num = gamma.A @ zz + gamma.B
    den = gamma.C @ zz + gamma.D
    w = num @ matkit.inverse(den)
    return SiegelPoint.from_complex((w + w.T) / 2)


def sigma_normalizer(z):
    """Symplectic ``sigma`` with ``sigma Z = i Id``.

    ``sigma = (Y^{-1/2}, -Y^{-1/2} X; 0, Y^{1/2})``.
    """
    half = matkit.spd_sqrt(z.Y)
    inv_half = matkit.spd_inv_sqrt(z.Y)
    zero = np.zeros_like(half)
    return SymplecticReal.from_blocks(inv_half, -inv_half @ z.X, zero, half)


def cross_ratio(z, w):
    """Matrix cross-ratio ``(Z-W)(Zb-W)^{-1}(Zb-Wb)(Z-Wb)^{-1}``."""
    if z.g != w.g:
        raise DimensionError("points of different genus")
    zz, ww = z.Z, w.Z
    zb, wb = zz.conj(), ww.conj()
    return (zz - ww) @ matkit.inverse(zb - ww) @ (zb - wb) @ matkit.inverse(zz - wb)


@dataclass(frozen=True)
class CrossRatioSpectrum:
    rho: np.ndarray
    radii: np.ndarray

    @property
    def sech2_product(self):
        """``prod 1/cosh^2(r_j) = prod (1 - rho_j)``."""
        return float(np.prod(1.0 - self.rho))


def spectrum(z, w):
    """Sorted cross-ratio eigenvalues and the radii ``artanh(sqrt(rho))``."""
    lam = matkit.eigenvalues_complex(cross_ratio(z, w))
    if np.any(np.abs(lam.imag) >= TOL.spectrum_imag):
        raise SpectralValidityError(f"cross-ratio eigenvalues not real: {lam}")
    rho = lam.real.copy()
    if np.any(rho < -TOL.spectrum_clamp) or np.any(rho >= 1.0):
        raise SpectralValidityError(f"cross-ratio eigenvalues outside [0, 1): {rho}")
    rho = np.sort(np.clip(rho, 0.0, None))
    return CrossRatioSpectrum(rho, np.arctanh(np.sqrt(rho)))


def distance_from_spectrum(spec):
    if np.all(spec.rho < TOL.coincident_rho):
        return 0.0
    return math.sqrt(8.0 * float(np.sum(spec.radii ** 2)))


def distance(z, w):
    """Siegel distance ``sqrt(8 * sum r_j^2)``.

    Equal to ``sqrt(2) * (sum log^2((1+sqrt(rho))/(1-sqrt(rho))))^(1/2)``.
    """
    return distance_from_spectrum(spectrum(z, w))


def volume_density(z):
    """Invariant volume density ``det(Y)^{-(g+1)}`` w.r.t. Lebesgue measure."""
    return det_real(z.Y) ** (-(z.g + 1))


def petersson_factor(z, weight):
    """``det(Y)^weight``: the factor turning ``|f(Z)|^2`` into the Petersson norm."""
    if weight < 1:
        raise ValueError("weight must be positive")
    return det_real(z.Y) ** weight


def petersson_kernel_norm(z, w, value, weight):
    """Point-wise Petersson norm ``det(YV)^{weight/2} |value|`` of a kernel value."""
    return math.sqrt(petersson_factor(z, weight) * petersson_factor(w, weight)) * abs(value)


def identity_residual(z, w):
    """Relative residual of ``det(4YV)/|det(Z - Wb)|^2 = prod 1/cosh^2(r_j)``."""
    lhs = det_real(4.0 * z.Y @ w.Y) / abs(matkit.det_complex(z.Z - w.Z.conj())) ** 2
    rhs = float(np.prod(1.0 / np.cosh(spectrum(z, w).radii) ** 2))
    return abs(lhs - rhs) / rhs


def random_point(g, rng, x_scale=0.5, y_spread=0.5):
    """A random point with ``|x_jk| <= x_scale`` and moderately conditioned ``Y``."""
    x = rng.uniform(-x_scale, x_scale, size=(g, g))
    a = rng.normal(scale=y_spread, size=(g, g))
    y = a @ a.T + np.diag(rng.uniform(0.5, 1.5, size=g))
    return SiegelPoint((x + x.T) / 2, y)
