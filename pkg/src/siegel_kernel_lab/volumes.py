"""Polar-coordinate volumes, their closed forms and bounds, and special functions.

"Volumes" here are radial integrals of the polar density; the Haar factor
over the maximal compact subgroup is dropped throughout, so only ratios of
volumes are meaningful.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate

from . import matkit
from .errors import ConvergenceError, DegenerateEstimateError, ParameterError

SQRT8 = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre tensor rule; convergence is judged by node doubling."""

    nodes: int = 64
    rel_tol: float = 1e-8
    max_doublings: int = 3

    def __post_init__(self):
        if self.nodes < 8:
            raise ParameterError("quadrature needs at least 8 nodes per axis")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be positive")


def polar_density(r):
    """``prod sinh^2 r_j * prod_{j<k} sinh^2((r_j-r_k)/2) sinh^2((r_j+r_k)/2)``.

    Accepts a vector of radii or an array whose last axis holds them.  The
    pair factor is evaluated as ``(cosh r_j - cosh r_k)^2 / 4``.
    """
    r = np.asarray(r, dtype=float)
    g = r.shape[-1]
    out = np.prod(np.sinh(r) ** 2, axis=-1)
    ch = np.cosh(r)
    for j in range(g):
        for k in range(j + 1, g):
            out = out * (ch[..., j] - ch[..., k]) ** 2 / 4.0
    return out


def _tensor_integral(g, radii, n, chunk=1 << 18):
    x, w = np.polynomial.legendre.leggauss(n)
    axes = [(0.5 * rj * (x + 1.0), 0.5 * rj * w) for rj in radii]
    total = 0.0
    # Loop over the first axis to bound memory at large g * n.
    rest_pts = np.stack(np.meshgrid(*[a[0] for a in axes[1:]], indexing="ij"), -1).reshape(-1, g - 1) \
        if g > 1 else np.zeros((1, 0))
    rest_w = np.prod(np.stack(np.meshgrid(*[a[1] for a in axes[1:]], indexing="ij"), -1)
                     .reshape(-1, g - 1), axis=1) if g > 1 else np.ones(1)
    for x0, w0 in zip(*axes[0]):
        for s in range(0, len(rest_pts), chunk):
            pts = np.concatenate(
                [np.full((min(chunk, len(rest_pts) - s), 1), x0), rest_pts[s:s + chunk]], axis=1
            )
            total += w0 * float(np.dot(polar_density(pts), rest_w[s:s + chunk]))
    return total


def polydisk_volume(g, r, quad=QuadratureSpec()):
    """Volume of the polydisk ``D_g(Z, r)``: ``2^g * int_{[0,r]^g} polar_density``.

    ``r`` may be a scalar (equal radii) or a length-``g`` vector.  The
    factor ``2^g`` folds the even integrand over ``[-r, r]^g``.
    """
    radii = np.broadcast_to(np.asarray(r, dtype=float), (g,))
    if np.any(radii <= 0):
        raise ParameterError("polydisk radii must be positive")
    if g > 4:
        raise ParameterError("tensor quadrature supports g <= 4")
    n = quad.nodes
    prev = (2 ** g) * _tensor_integral(g, radii, n)
    for _ in range(quad.max_doublings):
        n *= 2
        cur = (2 ** g) * _tensor_integral(g, radii, n)
        if abs(cur - prev) <= quad.rel_tol * abs(cur):
            return cur
        prev_pair = (prev, cur)
        prev = cur
    raise ConvergenceError("polydisk quadrature did not converge", prev_pair)


class Vol2ClosedForm(NamedTuple):
    I1: float
    I2: float
    I3: float
    total: float


def closed_form_vol2(r, i1_coefficient=6):
    """Closed forms for the genus-2 polydisk volume.

    ``I1 = I2 = (sinh r cosh r - r)(c sinh^3 r cosh r + 3 sinh r cosh r - 3r)/48``
    and ``I3 = sinh^6 r / 9``; the volume is ``I1 + I2 - 2 I3``.  Expanding
    the integral gives ``c = 6``.  Pass ``i1_coefficient=7`` to reproduce
    the variant with 7 that appears in print.
    """
    if r <= 0:
        raise ParameterError("r must be positive")
    s, c = math.sinh(r), math.cosh(r)
    i1 = (s * c - r) * (i1_coefficient * s ** 3 * c + 3 * s * c - 3 * r) / 48.0
    i3 = s ** 6 / 9.0
    return Vol2ClosedForm(i1, i1, i3, 2 * i1 - 2 * i3)


def prop1_bound(r):
    """``32 cosh^2 r sinh^4 r``, an upper bound for the genus-2 polydisk volume."""
    return 32.0 * math.cosh(r) ** 2 * math.sinh(r) ** 4


def prop2_bound(g, r):
    """Bound shape ``cosh^{g^2-2} r * sinh^{g+2} r`` (constant fitted separately)."""
    if g < 2:
        raise ParameterError("prop2_bound needs g >= 2")
    if r <= 0:
        raise ParameterError("r must be positive")
    return math.cosh(r) ** (g * g - 2) * math.sinh(r) ** (g + 2)


@dataclass
class ConstantFit:
    """``sup`` of volume / bound over a grid, with the per-point ratios."""

    constant: float
    radii: list
    ratios: list

    @property
    def drift(self):
        """max / min of the ratios: 1 means the bound has exactly the right shape."""
        return max(self.ratios) / min(self.ratios)


def fit_prop2_constant(g, radii, quad=QuadratureSpec()):
    ratios = [polydisk_volume(g, r, quad) / prop2_bound(g, r) for r in radii]
    return ConstantFit(max(ratios), list(radii), ratios)


def prop2_derivative_ratio(g, r):
    """``d/dr[cosh^{g^2-2} sinh^{g+2}] / (cosh^{g^2-1} sinh^{g+1})``.

    Equals ``(g^2-2) tanh^2 r + (g+2)``, hence at most ``g^2 + g``.
    """
    t = math.tanh(r)
    return (g * g - 2) * t * t + (g + 2)


@dataclass
class BallVolume:
    value: float
    stderr: float
    hits: int
    samples: int


def ball_volume(g, r, samples=100_000, seed=42, batch=1 << 16):
    """Monte Carlo volume of the geodesic ball ``{sqrt(8 sum r_j^2) < r}``.

    Samples the cube ``[0, r/(2 sqrt 2)]^g`` (which contains the ball in
    polar radii) and folds by ``2^g`` like :func:`polydisk_volume`.  Batch
    ``b`` draws from ``default_rng([seed, b])`` so results are reproducible.
    """
    if r <= 0:
        raise ParameterError("r must be positive")
    if samples < 10_000:
        raise ParameterError("ball_volume needs at least 1e4 samples")
    a = r / SQRT8
    cube = (2.0 * a) ** g
    s1 = s2 = 0.0
    hits = 0
    done = 0
    b = 0
    while done < samples:
        m = min(batch, samples - done)
        pts = np.random.default_rng([seed, b]).uniform(0.0, a, size=(m, g))
        inside = np.sqrt(8.0 * np.sum(pts ** 2, axis=1)) < r
        vals = np.where(inside, polar_density(pts), 0.0)
        s1 += float(vals.sum())
        s2 += float((vals ** 2).sum())
        hits += int(inside.sum())
        done += m
        b += 1
    if hits == 0:
        raise DegenerateEstimateError("no Monte Carlo sample landed in the ball")
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return BallVolume(cube * mean, cube * math.sqrt(var / samples), hits, samples)


def elem_sym(values, k):
    """Elementary symmetric polynomial ``e_k`` of ``values``."""
    vals = list(values)
    m = len(vals)
    if not 0 <= k <= m:
        raise ParameterError(f"k must lie in [0, {m}], got {k}")
    e = [1.0] + [0.0] * k
    for x in vals:
        for j in range(k, 0, -1):
            e[j] += x * e[j - 1]
    return e[k]


@dataclass
class IntegralCheck:
    value: float
    bound: float
    holds: bool


def sinh2_cosh2k_integral(r, k):
    """``2 int_0^r sinh^2 t cosh^{2k} t dt`` against ``sinh^3 r cosh^{2k-1} r + sinh r cosh r``."""
    if r <= 0 or k < 0:
        raise ParameterError("need r > 0 and k >= 0")
    val, _ = integrate.quad(lambda t: math.sinh(t) ** 2 * math.cosh(t) ** (2 * k), 0.0, r,
                            epsabs=0.0, epsrel=1e-13)
    val *= 2.0
    bound = math.sinh(r) ** 3 * math.cosh(r) ** (2 * k - 1) + math.sinh(r) * math.cosh(r)
    return IntegralCheck(val, bound, val <= bound)


# --- special functions ---------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x):
    """``log Gamma(x)`` for ``x > 0`` by the Lanczos approximation (g=7, 9 terms)."""
    x = float(x)
    if not x > 0:
        raise ParameterError(f"log_gamma needs x > 0, got {x}")
    if x < 0.5:
        # Shift up so the series is used where it is accurate.
        return log_gamma(x + 1.0) - math.log(x)
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (x + i)
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(a)


def log_hua_beta(g, k):
    """Logarithm of Hua's matrix beta integral at weight ``w = k(g+1)``.

    ``pi^{g(g+1)/4} Gamma(w/2 - g/2)/Gamma(w/2) prod_{j=1}^{g-1} Gamma(w - (g+j)/2)/Gamma(w - j)``.
    """
    w = k * (g + 1)
    terms = [("Gamma(w/2 - g/2)", w / 2 - g / 2, 1), ("Gamma(w/2)", w / 2, -1)]
    for j in range(1, g):
        terms.append((f"Gamma(w - (g+{j})/2)", w - (g + j) / 2, 1))
        terms.append((f"Gamma(w - {j})", w - j, -1))
    out = g * (g + 1) / 4 * math.log(math.pi)
    for name, arg, sgn in terms:
        if arg <= 0:
            raise ParameterError(f"nonpositive argument {arg} in factor {name}")
        out += sgn * log_gamma(arg)
    return out


def hua_beta(g, k):
    return math.exp(log_hua_beta(g, k))


def hua_asymptotic_ratio(g, k_list: Sequence[int]):
    """``hua_beta(g, k) * k^{g(g+1)/4}`` for each ``k``."""
    ks = list(k_list)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ParameterError("k_list must be increasing")
    return [math.exp(log_hua_beta(g, k) + g * (g + 1) / 4 * math.log(k)) for k in ks]


def hua_integral_quadrature_g1(k):
    """``int_R (1 + t^2)^{-k} dt`` by adaptive quadrature."""
    val, _ = integrate.quad(lambda t: (1.0 + t * t) ** (-k), -np.inf, np.inf,
                            epsabs=0.0, epsrel=1e-12)
    return val


def hua_integral_monte_carlo(g, k, samples=1_000_000, seed=42, scale=0.6):
    """Importance-sampled ``int det(T^2 + Id)^{-w/2} dT`` over real symmetric ``T``.

    Each free entry ``t_ij`` (``i <= j``) is drawn from a Cauchy law of the
    given scale; ``det(T^2 + Id) = |det(T + i Id)|^2``.  Returns
    ``(estimate, stderr)``.
    """
    w = k * (g + 1)
    n = g * (g + 1) // 2
    rng = np.random.default_rng(seed)
    u = scale * rng.standard_cauchy(size=(samples, n))
    log_q = np.sum(-np.log(math.pi * scale) - np.log1p((u / scale) ** 2), axis=1)
    t = np.zeros((samples, g, g))
    iu = np.triu_indices(g)
    t[:, iu[0], iu[1]] = u
    t[:, iu[1], iu[0]] = u
    log_det = 2.0 * matkit.logdet_batch(t + 1j * np.eye(g)).real
    ratio = np.exp(-0.5 * w * log_det - log_q)
    return float(ratio.mean()), float(ratio.std() / math.sqrt(samples))
