"""Property checks at desk scale, grouped into named suites.

Each check returns a :class:`CheckResult` with the measured quantities, so
the command line can report residuals and the test-suite can assert on the
verdict.  All randomness is seeded.
"""

from dataclasses import dataclass, field
import math
import tempfile
import time
from pathlib import Path

import numpy as np

from . import arithmetic as ar
from . import enumeration as en
from . import kernel as kn
from . import volumes as vol
from .siegel import (
    SiegelPoint,
    act,
    distance,
    identity_residual,
    random_point,
    spectrum,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.number:>2} {self.name}: {shown} ({self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(number, name, fn, **kwargs):
    t0 = time.perf_counter()
    passed, measured = fn(**kwargs)
    return CheckResult(number, name, bool(passed), measured, time.perf_counter() - t0)


def random_word_elements(g, count, rng, max_len=6):
    """``count`` products of random standard generators (word length 1..max_len)."""
    gens = en.standard_generators(g)
    out = []
    for _ in range(count):
        m = ar.identity(g)
        for _ in range(int(rng.integers(1, max_len + 1))):
            m = m @ gens[int(rng.integers(len(gens)))]
        out.append(m)
    return out


def diagonal_ray_point(g, d):
    """``e^s i Id`` with ``s = d / sqrt(2g)``, at distance ``d`` from ``i Id``."""
    return SiegelPoint.scalar(math.exp(d / math.sqrt(2 * g)), g)


# --- the individual checks ------------------------------------------------------

def check_identity(seed=42, pairs=1000):
    rng = np.random.default_rng(seed)
    worst = {}
    for g in (2, 3):
        worst[g] = max(identity_residual(random_point(g, rng), random_point(g, rng))
                       for _ in range(pairs))
    hand = identity_residual(SiegelPoint.scalar(1.0), SiegelPoint.scalar(2.0))
    ok = max(worst.values()) < 1e-9 and hand < 1e-12
    return ok, {"max_residual_g2": worst[2], "max_residual_g3": worst[3], "hand_case": hand}


def check_metric(seed=42, triples=500, words=50):
    rng = np.random.default_rng(seed)
    sym = tri = 0.0
    for _ in range(triples):
        z, w, p = (random_point(2, rng) for _ in range(3))
        dzw = distance(z, w)
        sym = max(sym, abs(dzw - distance(w, z)))
        tri = max(tri, dzw - distance(z, p) - distance(p, w))
    inv_d = inv_s = 0.0
    for gamma in random_word_elements(2, words, rng):
        z, w = random_point(2, rng), random_point(2, rng)
        gz, gw = act(gamma, z), act(gamma, w)
        inv_d = max(inv_d, abs(distance(gz, gw) - distance(z, w)))
        inv_s = max(inv_s, float(np.max(np.abs(spectrum(gz, gw).rho - spectrum(z, w).rho))))
    ok = sym < 1e-10 and tri <= 1e-8 and inv_d < 1e-8 and inv_s < 1e-8
    return ok, {"symmetry": sym, "triangle_excess": tri, "distance_drift": inv_d,
                "spectrum_drift": inv_s}


def check_prop1(radii=(0.25, 0.5, 1.0, 2.0), quad=vol.QuadratureSpec()):
    rel, margin = [], []
    for r in radii:
        q = vol.polydisk_volume(2, r, quad)
        rel.append(abs(q - vol.closed_form_vol2(r).total) / abs(q))
        margin.append(vol.prop1_bound(r) - q)
    ok = max(rel) < 1e-8 and min(margin) >= 0
    return ok, {"max_rel_gap": max(rel), "min_bound_margin": min(margin)}


def check_prop2(g=3, radii=(0.5, 1.0, 1.5, 2.0, 2.5), quad=vol.QuadratureSpec()):
    fit = vol.fit_prop2_constant(g, radii, quad)
    return fit.drift < 2.0, {"C_g": fit.constant, "drift": fit.drift, "ratios": fit.ratios}


def check_hua(seed=42, samples=1_000_000):
    g1 = max(abs(vol.hua_beta(1, k) - vol.hua_integral_quadrature_g1(k)) / vol.hua_beta(1, k)
             for k in (2, 3, 5))
    mc, err = vol.hua_integral_monte_carlo(2, 2, samples, seed)
    mc_gap = abs(mc - vol.hua_beta(2, 2)) / vol.hua_beta(2, 2)
    drift = {}
    for g in (1, 2):
        r160, r320 = vol.hua_asymptotic_ratio(g, [160, 320])
        drift[g] = abs(r320 / r160 - 1.0)
    ok = g1 < 1e-8 and mc_gap < 0.02 and max(drift.values()) < 0.05
    return ok, {"g1_rel_gap": g1, "g2_mc_rel_gap": mc_gap, "mc_stderr_rel": err / mc,
                "ratio_drift_g1": drift[1], "ratio_drift_g2": drift[2]}


def cosh_product_violations(g, vectors):
    """Count rows violating ``cosh|x| <= prod cosh x_j <= cosh^g(|x|/sqrt g)`` (in logs)."""
    x = np.linalg.norm(vectors, axis=1)
    def lc(t):
        small = np.log1p(2.0 * np.sinh(np.minimum(t, 1.0) / 2) ** 2)
        return np.where(t < 1.0, small, t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0))

    mid = np.sum(lc(vectors), axis=1)
    lower = lc(x)
    upper = g * lc(x / math.sqrt(g))
    return int(np.sum(lower > mid)), int(np.sum(mid > upper))


def check_cosh(seed=42, samples=100_000):
    rng = np.random.default_rng(seed)
    counts = {}
    for g in (2, 3, 4):
        vecs = rng.uniform(0.0, 1.0, size=(samples, g)) * rng.exponential(3.0, size=(samples, 1))
        vecs = np.maximum(vecs, np.finfo(float).tiny)
        counts[g] = cosh_product_violations(g, vecs)
    total = sum(a + b for a, b in counts.values())
    return total == 0, {"violations": total, **{f"g{g}": c for g, c in counts.items()}}


def check_majorant(seed=42, configs=200, L=3):
    rng = np.random.default_rng(seed)
    cache = en.bfs_enumerate(2, L=L)
    ident = [ar.identity(2)]
    worst_excess = -math.inf
    worst_ident = 0.0
    for i in range(configs):
        params = kn.KernelParams(2, 5 if i % 2 == 0 else 10)
        z, w = random_point(2, rng), random_point(2, rng)
        tn = kn.truncated_norm(params, z, w, cache)
        mj = kn.majorant_sum(params, z, w, cache)
        worst_excess = max(worst_excess, (tn - mj) / mj)
        exact = kn.identity_coset_value(params, z, w)
        worst_ident = max(worst_ident, abs(kn.truncated_norm(params, z, w, ident) - exact) / exact)
    ok = worst_excess <= 1e-12 and worst_ident < 1e-12
    return ok, {"max_rel_excess": worst_excess, "identity_coset_rel_gap": worst_ident,
                "cache_size": len(cache)}


def decay_slope(params, cache, ds):
    z = SiegelPoint.scalar(1.0, params.g)
    logs = [math.log(kn.majorant_sum(params, z, diagonal_ray_point(params.g, d), cache))
            for d in ds]
    xs = [kn.log_cosh(d / vol.SQRT8) for d in ds]
    return float(np.polyfit(xs, logs, 1)[0])


def check_decay(g=2, k=10, L=3):
    params = kn.KernelParams(g, k)
    cache = en.bfs_enumerate(g, L=L)
    slope = decay_slope(params, cache, np.linspace(2.0, 6.0, 9))
    threshold = -params.decay_exponent + 0.5
    diag = kn.thm1_rhs(params, 0.0)
    exact = k ** (g * (g + 1) // 2)
    return slope <= threshold and diag == exact, {"slope": slope, "threshold": threshold,
                                                  "thm1_rhs_at_0": diag}


def cusp_partial_ratios(params, z, w, bounds=range(1, 6)):
    """Majorant over ``Id`` plus the translation stratum with ``|S_ij| <= b``,
    divided by the cusp term of the two-term bound."""
    first = kn.thm2_first_term(params, np.linalg.det(z.Y), np.linalg.det(w.Y))
    out = []
    for b in bounds:
        elems = [ar.identity(params.g)] + list(ar.gamma_inf_stream(ar.GammaInfFamily(params.g, 0, b)))
        out.append(kn.majorant_sum(params, z, w, elems) / first)
    return out


def check_cusp(g=2, k=10):
    params = kn.KernelParams(g, k)
    z = SiegelPoint(np.zeros((2, 2)), np.eye(2))
    w = SiegelPoint(np.array([[0.2, 0.1], [0.1, -0.3]]), np.diag([1.5, 2.0]))
    ratios = cusp_partial_ratios(params, z, w)
    fitted = max(ratios)
    drift = abs(ratios[4] / ratios[2] - 1.0)
    below = all(r <= fitted for r in ratios)
    return below and drift < 0.10, {"fitted_constant": fitted, "drift_b3_b5": drift}


def check_counting(seed=42, L=3, K_values=(100, 200)):
    rng = np.random.default_rng(seed)
    g = 2
    cache = en.bfs_enumerate(g, L=L)
    samples = [random_point(g, rng) for _ in range(3)]
    est = en.injectivity_radius_estimate(cache, samples)
    r_hat = est.value
    vb_r = vol.ball_volume(g, r_hat, seed=seed).value
    count_fail = 0
    count_checked = 0
    sum_fail = 0
    fit = vol.fit_prop2_constant(g, [0.5, 1.0, 1.5, 2.0, 2.5])
    c_g = fit.constant * (g * g + g)
    for _ in range(4):
        z, w = random_point(g, rng), random_point(g, rng)
        dists = [d for _, d in en.orbit_distances(cache, z, w)]
        for rho0 in (1.5 * r_hat, 3.0 * r_hat):
            vb0 = vol.ball_volume(g, rho0 - r_hat, seed=seed).value if rho0 > r_hat else 0.0
            n0 = sum(1 for d in dists if d < rho0)
            for rho in (rho0, 2.0 * rho0, 4.0 * rho0):
                n = sum(1 for d in dists if d < rho)
                rhs = n0 + (vol.polydisk_volume(g, (rho + r_hat) / vol.SQRT8) - vb0) / vb_r
                count_checked += 1
                count_fail += n > rhs
            for K in K_values:
                lhs = sum(math.exp(-K * kn.log_cosh(d / vol.SQRT8)) for d in dists)
                bound = kn.jl_bound(kn.KernelParams(g, 1), K, rho0, r_hat, vb_r,
                                    near_distances=dists, c_g=c_g)
                sum_fail += lhs > bound.total * (1 + 1e-12)
    shape = [kn.reduced_tail_integral(g, K, 3.0, r_hat) / kn.tail_closed_form(g, K, 3.0)
             for K in K_values]
    shape_drift = abs(shape[1] / shape[0] - 1.0)
    ok = count_fail == 0 and sum_fail == 0 and shape_drift < 0.05
    return ok, {"r_hat": r_hat, "count_checked": count_checked, "count_failures": count_fail,
                "sum_bound_failures": sum_fail, "tail_shape_drift": shape_drift}


def _deterministic_snapshot(seed):
    rng = np.random.default_rng(seed)
    cache = en.bfs_enumerate(2, L=2)
    z, w = random_point(2, rng), random_point(2, rng)
    params = kn.KernelParams(2, 5)
    return (
        vol.ball_volume(2, 1.5, seed=seed).value,
        kn.truncated_norm(params, z, w, cache),
        kn.majorant_sum(params, z, w, cache),
        vol.hua_integral_monte_carlo(2, 2, 20_000, seed)[0],
        distance(z, w),
    )


def check_infrastructure(seed=42, L=3):
    cache = en.bfs_enumerate(2, L=L)
    with tempfile.TemporaryDirectory() as tmp:
        p1, p2 = Path(tmp, "a.spgz"), Path(tmp, "b.spgz")
        en.save_cache(cache, p1)
        loaded = en.load_cache(p1)
        en.save_cache(loaded, p2)
        bit_exact = p1.read_bytes() == p2.read_bytes() and loaded.same_elements(cache)
    certified = 0
    for e in cache:
        ar.certify_symplectic(e.matrix)
        certified += 1
    deterministic = _deterministic_snapshot(seed) == _deterministic_snapshot(seed)
    ok = bit_exact and certified == len(cache) and deterministic
    return ok, {"round_trip": bit_exact, "certified": certified, "deterministic": deterministic}


CHECKS = {
    "identity": (1, "determinant identity", check_identity),
    "metric": (2, "metric axioms and invariance", check_metric),
    "prop1": (3, "genus-2 polydisk closed form and bound", check_prop1),
    "prop2": (4, "genus-3 bound-shape constant", check_prop2),
    "hua": (5, "Hua beta integral", check_hua),
    "cosh": (6, "cosh product inequality", check_cosh),
    "majorant": (7, "kernel majorant chain", check_majorant),
    "decay": (8, "off-diagonal decay shape", check_decay),
    "cusp": (9, "cusp stabilizer tail", check_cusp),
    "counting": (10, "counting and integral bounds", check_counting),
    "infra": (11, "cache and determinism", check_infrastructure),
}


def run_check(name, **kwargs):
    number, title, fn = CHECKS[name]
    return _timed(number, title, fn, **kwargs)


def run_suite(selector="all"):
    names = list(CHECKS) if selector == "all" else [s.strip() for s in selector.split(",")]
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    return [run_check(n) for n in names]
