"""Bergman kernel series: terms, truncated sums, majorants and bound evaluators.

The ``gamma`` term of the kernel series at weight ``w = k(g+1)`` is

    4^{gw/2} C / (det(Z - conj(gamma W))^w * conj(det(CW + D))^w).

Writing ``gamma W = (AW+B)(CW+D)^{-1}`` the two determinants combine into
``det(Z conj(CW+D) - conj(AW+B))``, so no inverse is needed.  Everything is
evaluated in log space because ``w`` reaches the hundreds.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from . import matkit
from .errors import KernelRangeError, ParameterError, PreconditionError
from .siegel import det_real, distance, spectrum
from .summation import summed
from .volumes import SQRT8, QuadratureSpec, polydisk_volume

_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class KernelParams:
    """Genus ``g``, tensor power ``k`` and the normalizing constant ``C``."""

    g: int
    k: int
    constant: float = 1.0

    def __post_init__(self):
        if self.g < 1 or self.k < 1:
            raise ParameterError("need g >= 1 and k >= 1")
        if not self.constant > 0:
            raise ParameterError("normalizing constant must be positive")

    @property
    def weight(self):
        return self.k * (self.g + 1)

    @property
    def decay_exponent(self):
        """``k(g+1) - g^2 - g``, the exponent in the off-diagonal decay."""
        return self.weight - self.g * self.g - self.g


def log_cosh(x):
    """``log cosh x`` without cancellation at either end."""
    x = abs(x)
    if x < 1.0:
        return math.log1p(2.0 * math.sinh(x / 2) ** 2)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


# --- series terms ----------------------------------------------------------------

def _combined_matrices(z, w, mats):
    """``Z conj(CW+D) - conj(AW+B)`` for a stack of ``2g x 2g`` matrices."""
    g = z.g
    mats = np.asarray(mats)
    a, b = mats[:, :g, :g], mats[:, :g, g:]
    c, d = mats[:, g:, :g], mats[:, g:, g:]
    ww = w.Z
    return z.Z @ np.conj(c @ ww + d) - np.conj(a @ ww + b)


def log_terms(params, z, w, mats):
    """Complex logs of the series terms (``C`` excluded) for a stack of elements."""
    if z.g != params.g or w.g != params.g:
        raise ParameterError("points and parameters disagree on g")
    wt = params.weight
    return (params.g * wt / 2) * math.log(4.0) - wt * matkit.logdet_batch(
        _combined_matrices(z, w, mats))


def _check_range(logs):
    worst = float(np.max(logs.real)) if len(logs) else -math.inf
    if worst > _LOG_MAX:
        raise KernelRangeError("series term overflows double precision", worst)


def series_term(params, z, w, gamma):
    """The ``gamma`` term of the kernel series."""
    lt = log_terms(params, z, w, gamma.matrix[None])
    _check_range(lt)
    return params.constant * complex(np.exp(lt[0]))


def _log_petersson(params, z, w):
    return params.weight / 2 * math.log(det_real(z.Y) * det_real(w.Y))


def _elements(cache):
    mats = cache.stack() if hasattr(cache, "stack") else np.stack([e.matrix for e in cache])
    return mats


def normalized_terms(params, z, w, cache):
    """Series terms times ``det(YV)^{w/2}``; their moduli equal ``C prod cosh^{-w} r_j``."""
    lt = log_terms(params, z, w, _elements(cache)) + _log_petersson(params, z, w)
    _check_range(lt)
    return params.constant * np.exp(lt)


def truncated_norm(params, z, w, cache, mode="kahan"):
    """``det(YV)^{w/2} |sum of series terms over the cache|``."""
    return abs(summed(normalized_terms(params, z, w, cache).tolist(), mode))


def majorant_terms(params, z, w, cache):
    return np.abs(normalized_terms(params, z, w, cache))


def majorant_sum(params, z, w, cache, mode="kahan"):
    """``C sum_gamma prod_j cosh^{-w}(r_j(Z, gamma W))`` over the cache.

    Each term is ``C (det(4 Y Im(gamma W)) / |det(Z - conj(gamma W))|^2)^{w/2}``,
    which is the cross-ratio product by the determinant identity.
    """
    return float(summed(majorant_terms(params, z, w, cache).tolist(), mode))


def identity_coset_value(params, z, w):
    """``C prod_j cosh^{-w}(r_j(Z, W))`` from the cross-ratio spectrum."""
    radii = spectrum(z, w).radii
    return params.constant * math.exp(-params.weight * sum(log_cosh(r) for r in radii))


# --- bound right-hand sides ------------------------------------------------------

def log_thm1_rhs(params, d):
    e = params.decay_exponent
    if e <= 0:
        raise ParameterError(f"decay exponent k(g+1) - g^2 - g = {e} must be positive")
    g = params.g
    return g * (g + 1) / 2 * math.log(params.k) - e * log_cosh(d / SQRT8)


def thm1_rhs(params, d):
    """``k^{g(g+1)/2} / cosh^{k(g+1)-g^2-g}(d / 2 sqrt 2)`` (implied constant 1).

    Direct powers keep the diagonal value ``k^{g(g+1)/2}`` exact; the log
    form is the fallback when they overflow.
    """
    log_val = log_thm1_rhs(params, d)
    g = params.g
    try:
        return params.k ** (g * (g + 1) // 2) / math.cosh(d / SQRT8) ** params.decay_exponent
    except OverflowError:
        return math.exp(log_val)


def log_thm2_first_term(params, det_y, det_v):
    g, wt = params.g, params.weight
    if wt - g - 1 <= 0:
        raise ParameterError("need k(g+1) > g + 1")
    return (g * (g + 1) / 4 * math.log(params.k) + wt / 2 * math.log(4.0 ** g * det_y)
            - (wt - g - 1) / 2 * math.log(det_v))


def thm2_first_term(params, det_y, det_v):
    """``k^{g(g+1)/4} det(4Y)^{w/2} / det(V)^{(w-g-1)/2}``."""
    return math.exp(log_thm2_first_term(params, det_y, det_v))


def thm2_rhs(params, z, w):
    """Two-term bound for ``det V > det Y``; raises otherwise."""
    det_y, det_v = det_real(z.Y), det_real(w.Y)
    if not det_v > det_y:
        raise PreconditionError(
            f"the cusp bound assumes det(V) > det(Y); got det Y = {det_y:.6g}, det V = {det_v:.6g}")
    return thm2_first_term(params, det_y, det_v) + thm1_rhs(params, distance(z, w))


def thm2_rhs_ordered(params, z, w):
    """:func:`thm2_rhs` with the arguments swapped when ``det V < det Y``.

    The point-wise kernel norm is symmetric in its arguments, so the swap
    does not change what is being bounded.
    """
    if det_real(w.Y) < det_real(z.Y):
        z, w = w, z
    return thm2_rhs(params, z, w)


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    d: float
    det_y: float
    det_v: float
    params: KernelParams

    @property
    def ratio(self):
        return self.lhs / self.rhs


def thm1_report(params, z, w, cache):
    d = distance(z, w)
    return BoundReport(majorant_sum(params, z, w, cache), thm1_rhs(params, d), d,
                       det_real(z.Y), det_real(w.Y), params)


# --- integral estimate -------------------------------------------------------------

@dataclass
class JLBound:
    """The three-term group-sum bound and its pieces."""

    near: float
    shell: float
    tail: float
    tail_integral: float

    @property
    def total(self):
        return self.near + self.shell + self.tail


def _log_tail_integrand(rho, K, g, r_gamma):
    u = (rho + r_gamma) / SQRT8
    return (-K * np.logaddexp(rho / SQRT8, -rho / SQRT8) + K * math.log(2.0)
            + (g * g - 1) * (np.logaddexp(u, -u) - math.log(2.0))
            + (g + 1) * np.log(np.sinh(u)))


def tail_integral(g, K, rho0, r_gamma, panel=1.0, nodes=32, rel_stop=1e-16, max_panels=10_000):
    """``int_{rho0}^inf cosh^{-K}(rho/2 sqrt 2) cosh^{g^2-1}(u) sinh^{g+1}(u) drho``
    with ``u = (rho + r_gamma)/2 sqrt 2``.

    Unit panels of Gauss-Legendre nodes are added until a panel contributes
    less than ``rel_stop`` of the accumulated mass.
    """
    if K <= g * g + g:
        raise ParameterError(f"the tail integral diverges unless K > g^2 + g (got K={K})")
    x, wq = np.polynomial.legendre.leggauss(nodes)
    shift = float(_log_tail_integrand(np.array([rho0]), K, g, r_gamma)[0])
    total = 0.0
    a = rho0
    for _ in range(max_panels):
        pts = a + 0.5 * panel * (x + 1.0)
        part = 0.5 * panel * float(np.dot(wq, np.exp(_log_tail_integrand(pts, K, g, r_gamma) - shift)))
        total += part
        a += panel
        if part < rel_stop * total:
            break
    return total * math.exp(shift)


def tail_closed_form(g, K, rho0):
    """``1 / ((K - g^2 - g + 2) cosh^{K-g^2-g+2}(rho0 / 2 sqrt 2))``."""
    e = K - g * g - g + 2
    return math.exp(-math.log(e) - e * log_cosh(rho0 / SQRT8))


def reduced_tail_integral(g, K, rho0, r_gamma):
    """``int_{rho0}^inf sinh((rho + r)/2 sqrt 2) cosh^{-(K-g^2-g+1)}(rho/2 sqrt 2) drho``."""
    n = K - g * g - g + 1
    f = lambda rho: math.sinh((rho + r_gamma) / SQRT8) * math.exp(-n * log_cosh(rho / SQRT8))
    val, _ = integrate.quad(f, rho0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def jl_bound(params, K, rho0, r_gamma, vol_ball, quad=QuadratureSpec(), near_distances=(),
             c_g=1.0):
    """Three-term bound for ``sum_gamma f(d(Z, gamma W))`` with ``f = cosh^{-K}(./2 sqrt 2)``.

    ``near_distances`` are the orbit distances below ``rho0`` (the counting
    measure part); ``c_g`` multiplies the tail term.
    """
    g = params.g
    if not rho0 > r_gamma:
        raise ParameterError("need rho0 > r_gamma")
    if not vol_ball > 0:
        raise ParameterError("ball volume must be positive")
    f = lambda rho: math.exp(-K * log_cosh(rho / SQRT8))
    near = float(sum(f(d) for d in near_distances if d < rho0))
    shell = f(rho0) * polydisk_volume(g, rho0 / SQRT8, quad) / vol_ball
    tail_int = tail_integral(g, K, rho0, r_gamma)
    return JLBound(near, shell, c_g * tail_int / vol_ball, tail_int)

