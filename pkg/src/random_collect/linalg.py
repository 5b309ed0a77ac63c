"""Small dense solvers: Gaussian elimination and cyclic Jacobi eigenvalues.

Both work on copies of their inputs and are meant for matrices of at most a
few hundred rows.
"""
from __future__ import annotations

import numpy as np

from .errors import SingularSystemError


def gauss_solve(a, b, tol: float = 1e-13) -> np.ndarray:
    """Solve ``a @ x = b`` by elimination with partial pivoting.

    ``b`` may be a vector or an ``(n, m)`` block of right-hand sides. Raises
    :class:`SingularSystemError` if a pivot falls below ``tol`` times the
    largest absolute entry of ``a``.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"shape mismatch: a {a.shape}, b {b.shape}")
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        raise SingularSystemError("zero matrix")
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tol * scale:
            raise SingularSystemError(f"pivot {a[p, k]:.3e} at column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
        b[k + 1 :] -= np.outer(factors, b[k])
    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x[:, 0] if vector else x


def solve_checked(a, b, residual_tol: float) -> np.ndarray:
    """:func:`gauss_solve` followed by a max-norm residual check."""
    x = gauss_solve(a, b)
    resid = np.max(np.abs(np.asarray(a) @ x - np.asarray(b)))
    if not resid <= residual_tol:
        raise SingularSystemError(f"residual {resid:.3e} exceeds {residual_tol:.1e}")
    return x


def jacobi_eigenvalues(s, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted in descending order.

    Cyclic Jacobi: sweep every off-diagonal pair with a plane rotation until
    the off-diagonal Frobenius norm is below ``tol`` times the matrix norm.
    """
    a = np.array(s, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - sn * col_q
                a[:, q] = sn * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - sn * row_q
                a[q, :] = sn * row_p + c * row_q
    else:
        raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))[::-1]
