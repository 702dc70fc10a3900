"""Small dense linear algebra kernel used by the geometry layer.

Everything here works on plain ``numpy`` arrays of shape ``(n, n)`` with
``n <= 12``.  The routines are deliberately simple textbook algorithms
(pivoted LU, cyclic Jacobi, Hessenberg + shifted QR); speed is not a goal,
robustness at the tiny sizes used by the package is.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    NotPositiveDefiniteError,
    SingularMatrixError,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Central record of numerical tolerances."""

    symmetry: float = 1e-12
    symmetry_repair: float = 1e-9
    jacobi_offdiag: float = 1e-13
    jacobi_max_sweeps: int = 100
    qr_iterations_per_dim: int = 30
    singular_det: float = 1e-300
    symplectic: float = 1e-9
    spectrum_imag: float = 1e-7
    spectrum_clamp: float = 1e-9
    coincident_rho: float = 1e-18
    max_dim: int = 12


TOL = Tolerances()


def _square(m, name="matrix"):
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > TOL.max_dim:
        raise DimensionError(f"{name} larger than {TOL.max_dim}x{TOL.max_dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def is_symmetric(m, tol=TOL.symmetry):
    a = np.asarray(m)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.all(np.abs(a - a.T) <= tol))


def _is_triangular(a):
    return not np.any(np.tril(a, -1)) or not np.any(np.triu(a, 1))


def lu_decompose(m):
    """LU factorization with partial pivoting.

    Returns ``(lu, perm, sign)`` where ``lu`` packs the unit-lower factor
    below the diagonal and the upper factor on and above it, ``perm`` is the
    row permutation and ``sign`` its parity.  Zero pivots are left in place;
    callers decide whether that is an error.
    """
    a = np.array(_square(m), dtype=complex)
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1
    for j in range(n):
        p = j + int(np.argmax(np.abs(a[j:, j])))
        if p != j:
            a[[j, p]] = a[[p, j]]
            perm[[j, p]] = perm[[p, j]]
            sign = -sign
        if a[j, j] == 0:
            continue
        if j + 1 < n:
            a[j + 1:, j] /= a[j, j]
            a[j + 1:, j + 1:] -= np.outer(a[j + 1:, j], a[j, j + 1:])
    return a, perm, sign


def det_complex(m):
    """Determinant of a square real or complex matrix."""
    a = _square(m)
    if _is_triangular(a):
        return complex(np.prod(np.diag(a).astype(complex)))
    lu, _, sign = lu_decompose(a)
    return complex(sign * np.prod(np.diag(lu)))


def logdet_complex(m):
    """Principal-branch-free complex logarithm of ``det(m)``.

    The imaginary part is the accumulated argument of the pivots, so it is
    only meaningful modulo ``2*pi``; that is all the kernel series needs,
    because it always exponentiates ``weight * logdet`` with integer weight.
    """
    a = _square(m)
    if _is_triangular(a):
        diag = np.diag(a).astype(complex)
        sign = 1
    else:
        lu, _, sign = lu_decompose(a)
        diag = np.diag(lu)
    if np.any(diag == 0):
        raise SingularMatrixError("log-determinant of a singular matrix", 0.0)
    out = complex(np.sum(np.log(diag)))
    if sign < 0:
        out += 1j * math.pi
    return out


def logdet_batch(ms):
    """``logdet_complex`` over a stack of shape ``(N, n, n)``.

    Same pivoted elimination, vectorized over the leading axis.
    """
    a = np.array(ms, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {a.shape}")
    count, n = a.shape[0], a.shape[1]
    rows = np.arange(count)
    out = np.zeros(count, dtype=complex)
    for j in range(n):
        p = j + np.argmax(np.abs(a[:, j:, j]), axis=1)
        swap = p != j
        if np.any(swap):
            idx = rows[swap]
            top = a[idx, j, :].copy()
            a[idx, j, :] = a[idx, p[swap], :]
            a[idx, p[swap], :] = top
            out[swap] += 1j * math.pi
        piv = a[:, j, j]
        if np.any(piv == 0):
            raise SingularMatrixError("log-determinant of a singular matrix", 0.0)
        out += np.log(piv)
        if j + 1 < n:
            f = a[:, j + 1:, j] / piv[:, None]
            a[:, j + 1:, j + 1:] -= f[:, :, None] * a[:, None, j, j + 1:]
    return out


def inverse(m):
    """Inverse through the pivoted LU factorization."""
    a = _square(m)
    lu, perm, sign = lu_decompose(a)
    det_abs = float(abs(np.prod(np.diag(lu))))
    if det_abs <= TOL.singular_det or not np.all(np.diag(lu) != 0):
        raise SingularMatrixError("matrix is numerically singular", det_abs)
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)[perm]
    # forward substitution with unit lower factor
    y = eye.copy()
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    x = y
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    if not np.iscomplexobj(a):
        return x.real.copy()
    return x


def eigen_sym(m):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Returns ``(w, Q)`` with ascending eigenvalues ``w`` and orthogonal ``Q``
    such that ``Q @ diag(w) @ Q.T`` reproduces ``m``.
    """
    a = np.array(_square(m), dtype=float)
    if not is_symmetric(a, TOL.symmetry_repair * max(1.0, np.abs(a).max())):
        raise DimensionError("eigen_sym requires a symmetric matrix")
    a = (a + a.T) / 2
    n = a.shape[0]
    q = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(TOL.jacobi_max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < TOL.jacobi_offdiag * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) < _EPS * 1e-3 * scale:
                    a[p, r] = a[r, p] = 0.0
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                ar = a[:, r].copy()
                a[:, p] = c * ap - s * ar
                a[:, r] = s * ap + c * ar
                ap = a[p, :].copy()
                ar = a[r, :].copy()
                a[p, :] = c * ap - s * ar
                a[r, :] = s * ap + c * ar
                qp = q[:, p].copy()
                qr = q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], q[:, order]


def cholesky(m):
    """Lower Cholesky factor; raises if ``m`` is not positive definite."""
    a = np.array(_square(m), dtype=float)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:
            w, _ = eigen_sym(a)
            raise NotPositiveDefiniteError("matrix is not positive definite", float(w[0]))
        low[j, j] = math.sqrt(d)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def as_spd(m):
    """Validate and return a symmetric positive definite real matrix.

    Asymmetry up to ``TOL.symmetry_repair`` (relative to the largest entry)
    is repaired by symmetrization; larger asymmetry is an error.
    """
    a = np.array(_square(m, "SPD matrix"), dtype=float)
    scale = max(1.0, float(np.abs(a).max()))
    if not is_symmetric(a, TOL.symmetry_repair * scale):
        raise DimensionError("SPD matrix is not symmetric")
    a = (a + a.T) / 2
    cholesky(a)
    return a


def spd_sqrt(m):
    """Symmetric positive definite square root."""
    a = np.array(_square(m), dtype=float)
    w, q = eigen_sym(a)
    if not w[0] > 0.0:
        raise NotPositiveDefiniteError("spd_sqrt of a non positive definite matrix", float(w[0]))
    root = (q * np.sqrt(w)) @ q.T
    return (root + root.T) / 2


def spd_inv_sqrt(m):
    a = np.array(_square(m), dtype=float)
    w, q = eigen_sym(a)
    if not w[0] > 0.0:
        raise NotPositiveDefiniteError("inverse square root of a non positive definite matrix", float(w[0]))
    root = (q / np.sqrt(w)) @ q.T
    return (root + root.T) / 2


def hessenberg(m):
    """Householder reduction to upper Hessenberg form (similarity)."""
    h = np.array(_square(m), dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * norm
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _eig2(a, b, c, d):
    half = (a + d) / 2
    disc = cmath.sqrt(((a - d) / 2) ** 2 + b * c)
    if (half.conjugate() * disc).real >= 0:
        l1 = half + disc
    else:
        l1 = half - disc
    if l1 != 0:
        l2 = (a * d - b * c) / l1
    else:
        l2 = 2 * half - l1
    return l1, l2


def _givens(a, b):
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, b.conjugate() / abs(b)
    n = math.hypot(abs(a), abs(b))
    return abs(a) / n, (a / abs(a)) * b.conjugate() / n


def eigenvalues_complex(m):
    """All eigenvalues of a general square matrix.

    Hessenberg reduction followed by single-shift QR with Wilkinson shifts
    and deflation; trailing 2x2 blocks are solved directly.  The total number
    of QR sweeps is capped at ``30 * n``.
    """
    h = hessenberg(m)
    n = h.shape[0]
    eigs = []
    hi = n - 1
    sweeps = 0
    cap = TOL.qr_iterations_per_dim * max(n, 1)
    hnorm = max(float(np.abs(h).max()), np.finfo(float).tiny)
    since_deflation = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(h[0, 0])
            break
        lo = hi
        while lo > 0:
            scale = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if scale == 0.0:
                scale = hnorm
            if abs(h[lo, lo - 1]) <= _EPS * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(h[hi, hi])
            hi -= 1
            since_deflation = 0
            continue
        if lo == hi - 1:
            eigs.extend(_eig2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]))
            hi -= 2
            since_deflation = 0
            continue
        sweeps += 1
        since_deflation += 1
        if sweeps > cap:
            raise ConvergenceError(f"shifted QR did not converge in {cap} sweeps")
        if since_deflation % 11 == 10:
            mu = h[hi, hi] + abs(h[hi, hi - 1])  # exceptional shift
        else:
            l1, l2 = _eig2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
            mu = l1 if abs(l1 - h[hi, hi]) < abs(l2 - h[hi, hi]) else l2
        blk = h[lo:hi + 1, lo:hi + 1] - mu * np.eye(hi - lo + 1)
        rots = []
        for k in range(hi - lo):
            c, s = _givens(blk[k, k], blk[k + 1, k])
            g = np.array([[c, s], [-s.conjugate(), c]])
            blk[k:k + 2, k:] = g @ blk[k:k + 2, k:]
            rots.append(g)
        for k, g in enumerate(rots):
            blk[:k + 2, k:k + 2] = blk[:k + 2, k:k + 2] @ g.conj().T
        h[lo:hi + 1, lo:hi + 1] = blk + mu * np.eye(hi - lo + 1)
    return np.array(eigs[::-1], dtype=complex)
