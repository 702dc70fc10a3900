"""Integer symplectic matrices and reduction theory.

Covers exact symplecticity checks, Minkowski reduction of positive definite
forms, membership in (and a heuristic reduction into) the Siegel fundamental
domain relative to a finite set of group elements, and streams of the
parabolic elements stabilizing the cusp.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import matkit
from .errors import ConvergenceError, DimensionError, NotSymplecticError
from .siegel import SiegelPoint, act, automorphy_det, standard_form


@dataclass(frozen=True, eq=False)
class SymplecticInt:
    """Integer ``2g x 2g`` matrix with ``M^T J M = J`` exactly.

    Instances are immutable and hashable on their entries.  Build them with
    :func:`certify_symplectic`; the constructor itself does not check.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_key", m.tobytes())

    g = property(lambda self: self.matrix.shape[0] // 2)
    A = property(lambda self: self.matrix[: self.g, : self.g])
    B = property(lambda self: self.matrix[: self.g, self.g:])
    C = property(lambda self: self.matrix[self.g:, : self.g])
    D = property(lambda self: self.matrix[self.g:, self.g:])

    def __eq__(self, other):
        if not isinstance(other, SymplecticInt):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and self._key == other._key

    def __hash__(self):
        return hash((self.matrix.shape[0], self._key))

    def __matmul__(self, other):
        return SymplecticInt(self.matrix @ other.matrix)

    def inverse(self):
        """``M^{-1} = (D^T, -B^T; -C^T, A^T)``."""
        return SymplecticInt(np.block([[self.D.T, -self.B.T], [-self.C.T, self.A.T]]))

    def is_identity(self):
        return bool(np.array_equal(self.matrix, np.eye(2 * self.g, dtype=np.int64)))

    def acts_trivially(self):
        """True for ``+-Id``, the elements fixing every point."""
        eye = np.eye(2 * self.g, dtype=np.int64)
        return bool(np.array_equal(self.matrix, eye) or np.array_equal(self.matrix, -eye))

    def entries(self):
        """Row-major entries of the blocks A, B, C, D in that order."""
        return [int(v) for blk in (self.A, self.B, self.C, self.D) for v in blk.ravel()]

    def __repr__(self):
        return f"SymplecticInt({self.matrix.tolist()})"


def certify_symplectic(m):
    """Return ``m`` as a :class:`SymplecticInt` or raise.

    The check ``M^T J M = J`` is done in exact integer arithmetic; the
    error carries the first violated entry ``(i, j, value)`` of
    ``M^T J M - J`` in row-major order.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 or a.shape[0] == 0:
        raise DimensionError(f"expected a 2g x 2g matrix, got shape {a.shape}")
    if a.dtype.kind == "f":
        if not np.all(np.isfinite(a)) or np.any(a != np.round(a)):
            raise NotSymplecticError("matrix has non-integer entries")
    ai = np.array(a, dtype=object).astype(np.int64) if a.dtype == object else a.astype(np.int64)
    j = standard_form(a.shape[0] // 2).astype(np.int64)
    defect = ai.T @ j @ ai - j
    bad = np.argwhere(defect != 0)
    if len(bad):
        i, k = (int(v) for v in bad[0])
        raise NotSymplecticError(
            f"M^T J M - J is {int(defect[i, k])} at ({i}, {k})", (i, k, int(defect[i, k]))
        )
    return SymplecticInt(ai)


def identity(g):
    return SymplecticInt(np.eye(2 * g, dtype=np.int64))


def inversion(g):
    """The element ``J = (0 -Id; Id 0)``, acting by ``Z -> -Z^{-1}``."""
    return SymplecticInt(standard_form(g))


def translation(s):
    """``(Id, S; 0, Id)`` for an integer symmetric ``S``."""
    s = np.asarray(s, dtype=np.int64)
    g = s.shape[0]
    if not np.array_equal(s, s.T):
        raise DimensionError("translation matrix must be symmetric")
    eye = np.eye(g, dtype=np.int64)
    return SymplecticInt(np.block([[eye, s], [np.zeros_like(eye), eye]]))


def block_diagonal(u):
    """``(U^T, 0; 0, U^{-1})`` for unimodular ``U``; acts by ``Z -> U^T Z U``."""
    u = np.asarray(u, dtype=np.int64)
    uinv = np.rint(matkit.inverse(u.astype(float))).astype(np.int64)
    if not np.array_equal(u @ uinv, np.eye(u.shape[0], dtype=np.int64)):
        raise DimensionError("matrix is not unimodular")
    zero = np.zeros_like(u)
    return SymplecticInt(np.block([[u.T, zero], [zero, uinv]]))


# --- Minkowski reduction ---------------------------------------------------

DEFAULT_SCAN_BOUND = {1: 2, 2: 2, 3: 2, 4: 3}

_TAIL = "tail"          # gcd(h_k, ..., h_g) = 1 for every k
_STANDARD = "standard"  # gcd(h_k, ..., h_g) = 1 for the k being tested


def _scan_vectors(g, bound):
    pts = np.array(list(itertools.product(range(-bound, bound + 1), repeat=g)), dtype=np.int64)
    pts = pts[np.any(pts != 0, axis=1)]
    tail_gcd = np.stack([np.gcd.reduce(np.abs(pts[:, k:]), axis=1) for k in range(g)], axis=1)
    return pts, tail_gcd


@dataclass
class MinkowskiCertificate:
    """Outcome of a Minkowski-reducedness scan.

    ``violations`` lists ``("sign", k, y_k_k+1)`` or ``("short", h, k, value)``
    entries (``k`` is 1-based).  ``alternative_reduced`` is the verdict under
    the other primitivity convention, recorded so callers can see when the
    two disagree.
    """

    reduced: bool
    scan_bound: int
    convention: str
    violations: list = field(default_factory=list)
    alternative_reduced: bool = True

    def __bool__(self):
        return self.reduced


def _minkowski_violations(y, bound, convention, rtol=1e-12):
    g = y.shape[0]
    scale = float(np.abs(y).max())
    out = []
    for k in range(g - 1):
        if y[k, k + 1] < -rtol * scale:
            out.append(("sign", k + 1, float(y[k, k + 1])))
    pts, tail_gcd = _scan_vectors(g, bound)
    vals = np.einsum("ni,ij,nj->n", pts, y, pts)
    if convention == _TAIL:
        primitive = np.all(tail_gcd == 1, axis=1)
    for k in range(g):
        if convention == _STANDARD:
            primitive = tail_gcd[:, k] == 1
        bad = primitive & (vals < y[k, k] - rtol * scale)
        for idx in np.flatnonzero(bad):
            out.append(("short", tuple(int(v) for v in pts[idx]), k + 1, float(vals[idx])))
    return out


def is_minkowski_reduced(y, scan_bound=None, convention=_TAIL):
    """Check Minkowski reducedness of ``y`` by scanning small integer vectors.

    Requires ``y_{k,k+1} >= 0`` and ``h^T y h >= y_kk`` for primitive ``h``
    with ``max|h_i| <= scan_bound``.  Under the default ``"tail"`` convention
    ``h`` is primitive when ``gcd(h_k, ..., h_g) = 1`` for every ``k``; the
    ``"standard"`` convention imposes the gcd condition only for the index
    ``k`` being tested.
    """
    y = matkit.as_spd(y)
    g = y.shape[0]
    if g > 4:
        raise DimensionError("Minkowski scan supports g <= 4")
    if scan_bound is None:
        scan_bound = DEFAULT_SCAN_BOUND[g]
    if scan_bound < 1:
        raise ValueError("scan_bound must be >= 1")
    if convention not in (_TAIL, _STANDARD):
        raise ValueError(f"unknown primitivity convention {convention!r}")
    other = _STANDARD if convention == _TAIL else _TAIL
    violations = _minkowski_violations(y, scan_bound, convention)
    alt = not _minkowski_violations(y, scan_bound, other)
    return MinkowskiCertificate(not violations, scan_bound, convention, violations, alt)


def _complete_primitive(t):
    """Unimodular matrix whose first column is the primitive vector ``t``."""
    v = [int(x) for x in t]
    m = len(v)
    vmat = np.eye(m, dtype=np.int64)
    while sum(1 for x in v if x != 0) > 1:
        p = min((i for i in range(m) if v[i] != 0), key=lambda i: abs(v[i]))
        for j in range(m):
            if j != p and v[j] != 0:
                q = v[j] // v[p]
                v[j] -= q * v[p]
                vmat[:, p] += q * vmat[:, j]
    p = next(i for i in range(m) if v[i] != 0)
    if abs(v[p]) != 1:
        raise ValueError("vector is not primitive")
    if p != 0:
        v[0], v[p] = v[p], v[0]
        vmat[:, [0, p]] = vmat[:, [p, 0]]
    if v[0] < 0:
        vmat[:, 0] *= -1
    return vmat


def _exchange_matrix(h, k):
    g = len(h)
    m = np.eye(g, dtype=np.int64)
    m[:k, k] = h[:k]
    m[k:, k:] = _complete_primitive(h[k:])
    return m


def minkowski_reduce(y, scan_bound=None, max_iter=1000):
    """Minkowski-reduce a positive definite form.

    Returns ``(U, Y')`` with ``U`` unimodular and ``Y' = U^T y U``.  The
    procedure alternates pairwise (Lagrange) size reduction, sorting of the
    diagonal, and an exchange step that replaces basis vector ``k`` by the
    shortest admissible scan vector when that is shorter.
    """
    y = matkit.as_spd(y)
    g = y.shape[0]
    if scan_bound is None:
        scan_bound = DEFAULT_SCAN_BOUND.get(g, 2)
    u = np.eye(g, dtype=np.int64)
    if is_minkowski_reduced(y, scan_bound, _STANDARD):
        return u, y
    pts, tail_gcd = _scan_vectors(g, scan_bound)
    for _ in range(max_iter):
        cur = u.T @ y @ u
        changed = False
        for i in range(g):
            for j in range(g):
                if i == j or cur[i, i] > cur[j, j]:
                    continue
                q = round(cur[i, j] / cur[i, i])
                if q:
                    u[:, j] -= q * u[:, i]
                    cur = u.T @ y @ u
                    changed = True
        order = np.argsort(np.diag(cur), kind="stable")
        if not np.array_equal(order, np.arange(g)):
            u = u[:, order]
            cur = u.T @ y @ u
            changed = True
        if changed:
            continue
        vals = np.einsum("ni,ij,nj->n", pts, cur, pts)
        for k in range(g):
            ok = tail_gcd[:, k] == 1
            idx = np.flatnonzero(ok)[np.argmin(vals[ok])]
            if vals[idx] < cur[k, k] * (1 - 1e-12):
                u = u @ _exchange_matrix(pts[idx], k)
                changed = True
                break
        if not changed:
            break
    else:
        raise ConvergenceError(f"Minkowski reduction did not converge in {max_iter} iterations")
    cur = u.T @ y @ u
    for k in range(g - 1):
        if cur[k, k + 1] < 0:
            u[:, k + 1] *= -1
            cur = u.T @ y @ u
    return u, (cur + cur.T) / 2


# --- Siegel fundamental domain --------------------------------------------

@dataclass
class SiegelDiagnostics:
    """Verdict on the three Siegel-domain properties.

    Property (i) is only checked against the supplied candidate elements,
    so ``reduced`` means "reduced relative to that window".
    """

    reduced: bool
    det_condition: bool
    minkowski: bool
    real_part: bool
    witness: object = None
    min_abs_det: float = math.inf
    relative_to: int = 0
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.reduced


def _elements(candidates):
    return getattr(candidates, "elements", candidates)


def is_siegel_reduced(z, candidates, scan_bound=None):
    """Check ``|det(CZ+D)| >= 1`` over ``candidates``, Minkowski-reduced ``Y``
    and ``|x_jk| <= 1/2``."""
    elems = _elements(candidates)
    worst, witness = math.inf, None
    for gamma in elems:
        if gamma.g != z.g:
            raise DimensionError("candidate genus does not match the point")
        val = abs(automorphy_det(gamma, z))
        if val < worst:
            worst, witness = val, gamma
    det_ok = worst >= 1 - 1e-9
    mink = is_minkowski_reduced(z.Y, scan_bound)
    real_ok = bool(np.all(np.abs(z.X) <= 0.5 + 1e-12))
    notes = [f"property (i) checked against {len(elems)} candidate elements only"]
    if not det_ok:
        notes.append(f"(i) fails: |det(CZ+D)| = {worst:.6g} < 1")
    if not mink:
        notes.append(f"(ii) fails: {mink.violations[:3]}")
    if not real_ok:
        notes.append(f"(iii) fails: max |x_jk| = {np.abs(z.X).max():.6g}")
    return SiegelDiagnostics(
        det_ok and bool(mink) and real_ok, det_ok, bool(mink), real_ok,
        witness if not det_ok else None, worst, len(elems), notes,
    )


@dataclass
class SiegelReduction:
    gamma: SymplecticInt
    point: SiegelPoint
    complete: bool
    iterations: int


def siegel_reduce(z, candidates, max_iter=50):
    """Move ``z`` towards the Siegel fundamental domain.

    Each round Minkowski-reduces ``Y`` (block-diagonal element), translates
    ``X`` into ``[-1/2, 1/2]`` and then applies the candidate with the
    smallest ``|det(CZ+D)| < 1``, which strictly increases ``det Y``.  When
    ``max_iter`` rounds do not settle property (i) the result is returned
    with ``complete=False``.
    """
    elems = _elements(candidates)
    if not elems:
        raise ValueError("candidate set is empty")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    g = z.g
    gamma = identity(g)
    complete = False
    it = 0
    for it in range(1, max_iter + 1):
        u, _ = minkowski_reduce(z.Y)
        if not np.array_equal(u, np.eye(g, dtype=np.int64)):
            step = block_diagonal(u)
            z = act(step, z)
            gamma = step @ gamma
        shift = np.where(np.abs(z.X) > 0.5 + 1e-12, np.round(z.X), 0.0).astype(np.int64)
        if np.any(shift):
            step = translation(-shift)
            z = act(step, z)
            gamma = step @ gamma
        best, best_val = None, 1 - 1e-9
        for cand in elems:
            val = abs(automorphy_det(cand, z))
            if val < best_val:
                best, best_val = cand, val
        if best is None:
            complete = True
            break
        z = act(best, z)
        gamma = best @ gamma
    return SiegelReduction(gamma, z, complete, it)


# --- cusp stabilizer ---------------------------------------------------------

@dataclass(frozen=True)
class GammaInfFamily:
    """Parameter box for one stratum of the cusp stabilizer.

    ``j = 0`` gives translations ``(Id, S; 0, Id)``; ``1 <= j <= g-1`` gives
    ``(A, AS; 0, A^{-T})`` with ``A = (Id_j, 0; L, Id_{g-j})`` and
    ``S = (0, H^T; H, M)``.  All free entries range over ``[-bound, bound]``.
    """

    g: int
    j: int
    bound: int

    def __post_init__(self):
        if not 0 <= self.j <= self.g - 1:
            raise ValueError(f"stratum index must lie in [0, {self.g - 1}]")
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")

    @property
    def n_parameters(self):
        g, j = self.g, self.j
        if j == 0:
            return g * (g + 1) // 2
        m = g - j
        return 2 * m * j + m * (m + 1) // 2

    def size(self):
        return (2 * self.bound + 1) ** self.n_parameters - 1


def _sym_from(vals, n):
    s = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n)
    s[iu] = vals
    return s + np.triu(s, 1).T


def gamma_inf_stream(family):
    """Yield the non-identity elements of a cusp-stabilizer family."""
    g, j, b = family.g, family.j, family.bound
    rng = range(-b, b + 1)
    eye = np.eye(g, dtype=np.int64)
    for vals in itertools.product(rng, repeat=family.n_parameters):
        if not any(vals):
            continue
        if j == 0:
            s = _sym_from(vals, g)
            yield certify_symplectic(np.block([[eye, s], [np.zeros_like(eye), eye]]))
            continue
        m = g - j
        nl = m * j
        lmat = np.array(vals[:nl], dtype=np.int64).reshape(m, j)
        hmat = np.array(vals[nl:2 * nl], dtype=np.int64).reshape(m, j)
        mmat = _sym_from(vals[2 * nl:], m)
        a = eye.copy()
        a[j:, :j] = lmat
        s = np.zeros((g, g), dtype=np.int64)
        s[j:, :j] = hmat
        s[:j, j:] = hmat.T
        s[j:, j:] = mmat
        a_inv_t = eye.copy()
        a_inv_t[:j, j:] = -lmat.T
        yield certify_symplectic(np.block([[a, a @ s], [np.zeros_like(eye), a_inv_t]]))


def gamma_inf_stratum(gamma):
    """Smallest ``j`` whose stratum pattern ``gamma`` matches, else ``None``."""
    g = gamma.g
    if np.any(gamma.C):
        return None
    eye = np.eye(g, dtype=np.int64)
    a, b, d = gamma.A, gamma.B, gamma.D
    if np.array_equal(a, eye) and np.array_equal(d, eye) and np.array_equal(b, b.T):
        return 0
    for j in range(1, g):
        if not (np.array_equal(a[:j, :j], eye[:j, :j]) and not np.any(a[:j, j:])
                and np.array_equal(a[j:, j:], eye[j:, j:])):
            continue
        a_inv = eye.copy()
        a_inv[j:, :j] = -a[j:, :j]
        s = a_inv @ b
        if np.array_equal(s, s.T) and not np.any(s[:j, :j]) and np.array_equal(a.T @ d, eye):
            return j
    return None


def in_gamma_inf(gamma):
    return gamma_inf_stratum(gamma) is not None
