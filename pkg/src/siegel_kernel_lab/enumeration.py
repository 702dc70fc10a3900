"""Finite windows into Sp(2g, Z): BFS enumeration, caching and orbit counting."""

from dataclasses import dataclass, field
import math
from pathlib import Path

import numpy as np

from .arithmetic import (
    SymplecticInt,
    certify_symplectic,
    identity,
    in_gamma_inf,
    inversion,
    translation,
)
from .errors import AbsenceError, CacheFormatError, DimensionError, NotSymplecticError
from .siegel import act, distance

DEFAULT_CAP = 2_000_000
STANDARD_DESCRIPTOR = "J+T"
COCOMPACT = "cocompact"
ARITHMETIC = "arithmetic"


def standard_generators(g):
    """``J``, its inverse, and the elementary translations with their inverses."""
    gens = [inversion(g), inversion(g).inverse()]
    for i in range(g):
        for j in range(i, g):
            e = np.zeros((g, g), dtype=np.int64)
            e[i, j] = e[j, i] = 1
            gens.append(translation(e))
            gens.append(translation(-e))
    return gens


@dataclass
class GroupCache:
    """Deduplicated group elements in BFS insertion order.

    ``elements[0]`` is always the identity.  ``truncated`` is set when the
    element cap stopped the enumeration early; it is not stored on disk.
    """

    g: int
    descriptor: str
    L: int
    elements: list
    truncated: bool = False
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, gamma):
        return gamma in self._index

    def index(self, gamma):
        return self._index[gamma]

    def stack(self):
        """All elements as one ``(N, 2g, 2g)`` integer array."""
        return np.stack([e.matrix for e in self.elements])

    def same_elements(self, other):
        return self.g == other.g and self.elements == other.elements


def bfs_enumerate(g, generators=None, L=1, cap=DEFAULT_CAP, descriptor=None):
    """All products of at most ``L`` generators, deduplicated, in BFS order.

    Words are extended on the right.  If the cache would exceed ``cap``
    elements the enumeration stops and the result is flagged truncated.
    """
    if L < 0:
        raise ValueError("word length must be nonnegative")
    if generators is None:
        generators = standard_generators(g)
        descriptor = descriptor or STANDARD_DESCRIPTOR
    gens = [gen if isinstance(gen, SymplecticInt) else certify_symplectic(gen) for gen in generators]
    if any(gen.g != g for gen in gens):
        raise DimensionError("generator genus does not match g")
    elements = [identity(g)]
    seen = {elements[0]}
    frontier = list(elements)
    truncated = False
    for _ in range(L):
        nxt = []
        for x in frontier:
            for s in gens:
                y = x @ s
                if y in seen:
                    continue
                if len(elements) >= cap:
                    truncated = True
                    break
                seen.add(y)
                elements.append(y)
                nxt.append(y)
            if truncated:
                break
        frontier = nxt
        if truncated or not frontier:
            break
    return GroupCache(g, descriptor or "custom", L, elements, truncated)


# --- persistence -------------------------------------------------------------

_MAGIC = "SPGZ"
_VERSION = "1"


def save_cache(cache, path):
    lines = [f"{_MAGIC} {_VERSION} g={cache.g} L={cache.L} gens={cache.descriptor}"]
    lines += [" ".join(str(v) for v in e.entries()) for e in cache.elements]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line):
    parts = line.split()
    if len(parts) != 5 or parts[0] != _MAGIC:
        raise CacheFormatError("missing SPGZ header", 1)
    if parts[1] != _VERSION:
        raise CacheFormatError(f"unsupported cache version {parts[1]}", 1)
    fields = {}
    for tok in parts[2:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise CacheFormatError(f"malformed header field {tok!r}", 1)
        fields[key] = val
    try:
        return int(fields["g"]), int(fields["L"]), fields["gens"]
    except (KeyError, ValueError) as exc:
        raise CacheFormatError(f"bad header: {exc}", 1) from None


def load_cache(path):
    """Read a cache file, re-certifying every row.

    Row numbers in errors are file line numbers (the header is line 1).
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise CacheFormatError("empty cache file", 1)
    g, L, descriptor = _parse_header(lines[0])
    n = 2 * g
    elements = []
    seen = set()
    for row, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != n * n:
            raise CacheFormatError(f"expected {n * n} integers, found {len(toks)}", row)
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise CacheFormatError("non-integer entry", row) from None
        blocks = [np.array(vals[i * g * g:(i + 1) * g * g]).reshape(g, g) for i in range(4)]
        m = np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])
        try:
            elem = certify_symplectic(m)
        except NotSymplecticError as exc:
            raise CacheFormatError(f"not symplectic: {exc}", row) from None
        if elem in seen:
            raise CacheFormatError("duplicate element", row)
        seen.add(elem)
        elements.append(elem)
    if not elements or not elements[0].is_identity():
        raise CacheFormatError("first element must be the identity", 2)
    return GroupCache(g, descriptor, L, elements)


# --- counting ------------------------------------------------------------------

def _admissible(mode):
    if mode == COCOMPACT:
        return lambda gamma: not gamma.acts_trivially()
    if mode == ARITHMETIC:
        return lambda gamma: not gamma.acts_trivially() and not in_gamma_inf(gamma)
    raise ValueError(f"unknown counting mode {mode!r}")


@dataclass(frozen=True)
class CountQuery:
    z: object
    w: object
    radius: float
    mode: str = COCOMPACT

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("radius must be finite and nonnegative")
        _admissible(self.mode)

    @property
    def g(self):
        return self.z.g


def orbit_distances(cache, z, w, mode=COCOMPACT):
    """``[(gamma, d(Z, gamma W))]`` over admissible cached elements."""
    if cache.g != z.g or z.g != w.g:
        raise DimensionError("cache and points must share the genus")
    ok = _admissible(mode)
    return [(gamma, distance(z, act(gamma, w))) for gamma in cache if ok(gamma)]


def count_gamma(cache, q):
    """Number of admissible cached ``gamma`` with ``d(Z, gamma W) < radius``.

    ``-Id`` acts trivially and is excluded in both modes along with ``Id``.
    """
    if q.radius == 0:
        return 0
    return sum(1 for _, d in orbit_distances(cache, q.z, q.w, q.mode) if d < q.radius)


@dataclass
class InjectivityEstimate:
    """Half the smallest orbit displacement seen in the cache window.

    This is an upper bound for the injectivity radius restricted to the
    window.  ``fixed`` counts (sample, gamma) pairs skipped because gamma
    fixes the sample point (elliptic elements).
    """

    value: float
    witness: SymplecticInt
    sample_index: int
    fixed: int = 0
    upper_bound: bool = True


def injectivity_radius_estimate(cache, sample_points, mode=COCOMPACT, fixed_tol=1e-9):
    samples = list(sample_points)
    if not samples:
        raise ValueError("need at least one sample point")
    best = (math.inf, None, -1)
    fixed = 0
    for i, z in enumerate(samples):
        for gamma, d in orbit_distances(cache, z, z, mode):
            if d < fixed_tol:
                fixed += 1
                continue
            if d < best[0]:
                best = (d, gamma, i)
    if best[1] is None:
        raise AbsenceError("no admissible element moves any sample point")
    return InjectivityEstimate(best[0] / 2, best[1], best[2], fixed)
