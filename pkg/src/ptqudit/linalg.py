"""
Dense complex matrix kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
routines here are small and self-contained: a scaling-and-squaring Pade
matrix exponential that stays exact for defective inputs, a Hessenberg/QR
eigensolver for non-Hermitian matrices, and singular values obtained from
the spectrum of ``A^H A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidValueError, NumericalFailure

__all__ = [
    "EigenDecomposition",
    "as_matrix",
    "eig",
    "eigenvalues",
    "mat_exp",
    "norm1",
    "singular_values",
]

# Deflation tolerance on the QR subdiagonal, relative to neighbouring diagonal.
DEFLATION_TOL = 1e-13
# QR sweeps allowed per matrix dimension.
SWEEPS_PER_DIM = 30
# Eigenvector matrices with a larger 2-norm condition number are flagged.
CONDITION_LIMIT = 1e10

_EPS = np.finfo(float).eps


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return a complex copy."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidValueError("matrix contains NaN or Inf entries")
    return m


def norm1(a: np.ndarray) -> float:
    """Maximum absolute column sum."""
    return float(np.max(np.sum(np.abs(a), axis=0)))


# ---------------------------------------------------------------------------
# Matrix exponential
# ---------------------------------------------------------------------------

# Pade coefficients for degrees 3, 5, 7, 9, 13 (Higham 2005).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}

# Largest 1-norm for which each degree meets unit roundoff in double precision.
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_low(a: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE[m]
    ident = np.eye(a.shape[0], dtype=complex)
    a2 = a @ a
    powers = [ident, a2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ a2)
    u_inner = sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
    v = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    return a @ u_inner, v


def _pade13(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE[13]
    ident = np.eye(a.shape[0], dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return u, v


def mat_exp(a, scale: complex = 1.0) -> np.ndarray:
    """
    Matrix exponential ``exp(scale * a)``.

    Uses scaling and squaring with a diagonal Pade approximant whose degree
    is picked from the 1-norm of the scaled matrix. No eigendecomposition is
    involved, so defective (non-diagonalizable) inputs are handled exactly
    like any other matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Square matrix with finite entries.
    scale : complex
        Scalar multiplying ``a`` before exponentiation.

    Returns
    -------
    numpy.ndarray
        Complex ``(n, n)`` array.
    """
    m = as_matrix(a)
    if not np.isfinite(scale):
        raise InvalidValueError("scale must be finite")
    m = m * scale
    if not np.all(np.isfinite(m)):
        raise InvalidValueError("scale * a overflows")
    nrm = norm1(m)
    for degree in (3, 5, 7, 9):
        if nrm <= _THETA[degree]:
            u, v = _pade_low(m, degree)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(math.ceil(math.log2(nrm / _THETA[13]))))
    u, v = _pade13(m / 2.0**s)
    r = np.linalg.solve(v - u, v + u)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            r = r @ r
    if not np.all(np.isfinite(r)):
        raise NumericalFailure(f"matrix exponential overflowed (1-norm of argument {nrm:.3g})")
    return r


# ---------------------------------------------------------------------------
# Eigensolver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenDecomposition:
    """
    Eigenvalues with unit-norm right eigenvectors.

    ``vectors[:, k]`` pairs with ``values[k]``. Near an exceptional point the
    columns become nearly parallel; ``ill_conditioned`` is then raised instead
    of the solver pretending a full basis exists.
    """

    values: np.ndarray
    vectors: np.ndarray
    ill_conditioned: bool
    condition: float
    residuals: np.ndarray

    @property
    def right_vectors(self) -> list[np.ndarray]:
        return [self.vectors[:, k] for k in range(self.vectors.shape[1])]


def _hessenberg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction ``a = q h q^H`` with ``h`` upper Hessenberg."""
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    """Return (c, s) so that [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = math.hypot(abs(a), abs(b))
    return abs(a) / r, (a / abs(a)) * np.conj(b) / r


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _schur(a: np.ndarray, want_vectors: bool) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``a = z t z^H`` by shifted QR on the Hessenberg form."""
    n = a.shape[0]
    h, z = _hessenberg(a)
    if not want_vectors:
        z = None
    scale = max(norm1(a), np.finfo(float).tiny)
    cap = SWEEPS_PER_DIM * n
    sweeps = 0
    hi = n - 1
    stalled = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            ref = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if ref == 0.0:
                ref = scale
            if abs(h[lo, lo - 1]) <= DEFLATION_TOL * ref or abs(h[lo, lo - 1]) <= _EPS * _EPS * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        if sweeps >= cap:
            raise NumericalFailure(
                f"QR iteration did not converge after {sweeps} sweeps "
                f"(matrix 1-norm {scale:.6g})"
            )
        sweeps += 1
        stalled += 1
        if stalled % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            c, s = _givens(h[k, k], h[k + 1, k])
            rots.append((c, s))
            rk = h[k, k:].copy()
            rk1 = h[k + 1, k:].copy()
            h[k, k:] = c * rk + s * rk1
            h[k + 1, k:] = -np.conj(s) * rk + c * rk1
            h[k + 1, k] = 0.0
        for k, (c, s) in zip(range(lo, hi), rots):
            top = min(k + 2, hi) + 1
            ck = h[:top, k].copy()
            ck1 = h[:top, k + 1].copy()
            h[:top, k] = c * ck + np.conj(s) * ck1
            h[:top, k + 1] = -s * ck + c * ck1
            if z is not None:
                zk = z[:, k].copy()
                zk1 = z[:, k + 1].copy()
                z[:, k] = c * zk + np.conj(s) * zk1
                z[:, k + 1] = -s * zk + c * zk1
        h[idx, idx] += mu
    return np.triu(h), z


def _check_power_sums(a: np.ndarray, values: np.ndarray) -> None:
    """Compare sum(lambda^k) with trace(a^k) for k = 1..n (Newton identities)."""
    n = a.shape[0]
    nrm = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
    ak = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        ak = ak @ a
        lhs = np.sum(values**k)
        rhs = np.trace(ak)
        if abs(lhs - rhs) > 1e-8 * n * nrm**k:
            raise NumericalFailure(
                f"eigenvalue power sum {k} disagrees with trace(A^{k}) by "
                f"{abs(lhs - rhs):.3g} (matrix norm {nrm:.6g})"
            )


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues of ``a`` with multiplicity, in Schur order."""
    m = as_matrix(a)
    t, _ = _schur(m, want_vectors=False)
    values = np.diag(t).copy()
    if m.shape[0] <= 4:
        _check_power_sums(m, values)
    return values


def _triangular_eigvecs(t: np.ndarray) -> np.ndarray:
    """Right eigenvectors of upper triangular ``t`` by back substitution."""
    n = t.shape[0]
    small = max(_EPS * np.linalg.norm(t, 1), np.finfo(float).tiny)
    x = np.zeros((n, n), dtype=complex)
    for k in range(n):
        lam = t[k, k]
        x[k, k] = 1.0
        for i in range(k - 1, -1, -1):
            rhs = -(t[i, i + 1:k + 1] @ x[i + 1:k + 1, k])
            piv = t[i, i] - lam
            if abs(piv) < small:
                piv = small
            x[i, k] = rhs / piv
        x[:, k] /= np.linalg.norm(x[:, k])
    return x


def eig(a) -> EigenDecomposition:
    """
    Eigenvalues and right eigenvectors of a general complex matrix.

    Hessenberg reduction followed by single-shift QR gives the Schur form;
    eigenvectors come from back substitution on the triangular factor. When
    eigenvalues coalesce the vectors are not made independent artificially:
    ``ill_conditioned`` is set when ``cond(V) > 1e10``.
    """
    m = as_matrix(a)
    t, z = _schur(m, want_vectors=True)
    values = np.diag(t).copy()
    if m.shape[0] <= 4:
        _check_power_sums(m, values)
    vectors = z @ _triangular_eigvecs(t)
    vectors /= np.linalg.norm(vectors, axis=0)
    residuals = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    with np.errstate(over="ignore", divide="ignore"):
        cond = float(np.linalg.cond(vectors))
    if not np.isfinite(cond):
        cond = math.inf
    flag = cond > CONDITION_LIMIT
    nrm = np.linalg.norm(m, 2)
    if not flag and np.any(residuals > 1e-8 * max(nrm, 1e-300)):
        raise NumericalFailure(
            f"eigenpair residual {residuals.max():.3g} too large (matrix norm {nrm:.6g})"
        )
    return EigenDecomposition(values, vectors, flag, cond, residuals)


def singular_values(a) -> np.ndarray:
    """Singular values in descending order, from the eigenvalues of ``a^H a``."""
    m = as_matrix(a)
    gram = m.conj().T @ m
    gram = 0.5 * (gram + gram.conj().T)
    w = eigenvalues(gram).real
    w = np.clip(w, 0.0, None)
    return np.sort(np.sqrt(w))[::-1]
