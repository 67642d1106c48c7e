"""Dense matrix and polynomial helpers.

Everything here is a thin, validated layer over numpy/LAPACK. Polynomials are
1-D coefficient arrays, highest degree first (the ``numpy.poly1d`` convention).
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError

RANK_TOL = 1e-9


def as_matrix(M, name="matrix", dtype=float):
    """Coerce ``M`` to a finite 2-D array."""
    arr = np.array(M, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _square(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def kron(A, B):
    """Kronecker product; block (i, j) of the result is ``A[i, j] * B``."""
    return np.kron(np.asarray(A), np.asarray(B))


def eigenvalues(M):
    """All eigenvalues of a square matrix, with multiplicity (LAPACK geev)."""
    M = _square(M)
    if M.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    return np.linalg.eigvals(M).astype(complex)


def spectral_abscissa(M):
    """Largest real part over the spectrum of ``M``."""
    return float(np.max(eigenvalues(M).real))


def is_hurwitz(M, margin=0.0):
    """True iff every eigenvalue of ``M`` has real part below ``-margin``."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    return spectral_abscissa(M) < -margin


def numerical_rank(M, tol=RANK_TOL):
    """Count singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def krylov_basis(A, B, tol=RANK_TOL):
    """Orthonormal basis of the span of ``[B, AB, A^2 B, ...]``.

    Built by the orthogonal staircase: each new block ``A Q_k`` is
    orthogonalized against the basis so far and only directions with singular
    value above ``tol`` times the block scale are kept. This spans the same
    space as the Kalman matrix without forming its badly scaled powers.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    n = A.shape[0]
    Q = np.zeros((n, 0), dtype=np.result_type(A, B, float))
    scale_A = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    V = B
    ref = np.linalg.norm(B, 2) if B.size else 0.0
    while Q.shape[1] < n and ref > 0:
        for _ in range(2):
            V = V - Q @ (Q.conj().T @ V)
        U, sv, _ = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(sv > tol * ref))
        r = min(r, n - Q.shape[1])
        if r == 0:
            break
        Q = np.hstack([Q, U[:, :r]])
        V = A @ U[:, :r]
        ref = scale_A
    return Q


def poly_trim(p):
    """Drop leading zero coefficients; the zero polynomial becomes ``[0]``."""
    p = np.atleast_1d(np.asarray(p))
    nz = np.flatnonzero(p != 0)
    if nz.size == 0:
        return np.zeros(1, dtype=p.dtype)
    return p[nz[0]:]


def poly_mul(p, q):
    """Product of two polynomials (coefficient convolution)."""
    return poly_trim(np.convolve(poly_trim(p), poly_trim(q)))


def poly_eval(p, s):
    """Evaluate ``p`` at (possibly complex, possibly array) ``s`` by Horner."""
    return np.polyval(np.asarray(p), s)


def companion(p):
    """Top-row companion matrix of a polynomial of degree >= 1."""
    p = poly_trim(p)
    deg = len(p) - 1
    if deg < 1:
        raise ValueError("companion matrix needs degree >= 1")
    C = np.zeros((deg, deg), dtype=np.result_type(p, float))
    C[0, :] = -p[1:] / p[0]
    C[1:, :-1] = np.eye(deg - 1)
    return C


def poly_roots(p):
    """Roots of ``p`` as the eigenvalues of its companion matrix."""
    p = poly_trim(p)
    if len(p) < 2:
        raise ValueError("constant or zero polynomial has no finite root set")
    return eigenvalues(companion(p))


def poly_from_roots(roots):
    """Monic polynomial with the given roots; real when roots are conjugate-closed."""
    roots = np.asarray(roots, dtype=complex)
    p = np.array([1.0 + 0j])
    for r in roots:
        p = np.convolve(p, [1.0, -r])
    if is_conjugate_closed(roots):
        p = p.real.copy()
    return p


def is_conjugate_closed(values, tol=1e-9):
    """True if the multiset ``values`` equals its own complex conjugate."""
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return True
    return matched_distance(values, values.conj()) <= tol * max(1.0, np.max(np.abs(values)))


def matched_distance(a, b):
    """Largest pairwise gap after optimally matching two equal-size multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise DimensionError(f"multisets differ in size: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
