"""Rank-revealing factorization and accurate singular values.

The compiled backend is used when it imports; set ``TORSIONLAB_PURE=1`` to
force the numpy fallback.  ``BACKEND`` names the active one.

Singular values are computed by the rank-revealing-decomposition route:
complete-pivoting elimination ``P A Q = L diag(p) U``, column-pivoted QR of
``L diag(p)``, then one-sided Jacobi on the resulting graded factor.  This
keeps every singular value to high relative accuracy, including ones far
below ``eps * ||A||``, for matrices on which pivoted elimination is accurate
(e.g. diagonally scaled sparse differentials).  The rank of such a matrix is
not decidable from its entries alone, so callers that know it (a rescaled
copy of a matrix whose rank was measured) pass it in.
"""
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import _kernels_py

_impl = _kernels_py
if os.environ.get("TORSIONLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.NAME

RANK_TOL = 1e-10
EPS = np.finfo(float).eps


def available_backends():
    """Return a dict ``name -> module`` of the kernel backends importable here."""
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out


@dataclass
class LDU:
    rows: np.ndarray
    cols: np.ndarray
    L: np.ndarray
    pivots: np.ndarray
    U: np.ndarray
    rank: int


def gecp(A, tol=RANK_TOL, impl=None, rank=None) -> LDU:
    """Complete-pivoting LDU factorization ``A[rows][:, cols] = L diag(pivots) U``.

    Without ``rank``, elimination stops at the first pivot below
    ``tol * max|A|`` (relative pivot threshold).  With ``rank``, exactly that
    many pivots are taken, which is how graded matrices of known rank keep
    pivots far below the threshold.
    """
    impl = impl or _impl
    W = np.array(A, dtype=float, order="C")
    m, n = W.shape
    rows = np.arange(m, dtype=np.intp)
    cols = np.arange(n, dtype=np.intp)
    if m and n:
        if rank is None:
            abs_tol, cap = tol * float(np.abs(W).max()), min(m, n)
        else:
            abs_tol, cap = 0.0, int(rank)
        got = impl.gecp_inplace(W, rows, cols, abs_tol, cap)
        if rank is not None and got < rank:
            raise np.linalg.LinAlgError(f"matrix has exact rank {got} < requested {rank}")
    else:
        got = 0
    L = np.tril(W[:, :got], -1) + np.eye(m, got)
    U = np.triu(W[:got])
    piv = np.diag(U).copy()
    if got:
        U = U / piv[:, None]
    return LDU(rows, cols, L, piv, U, int(got))


def jacobi_singular_values(X, impl=None, max_sweeps=60):
    """Singular values (``min(m, n)`` of them, unsorted) by one-sided Jacobi.

    The shorter side is orthogonalized; the row norms of the result are the
    singular values.
    """
    impl = impl or _impl
    X = np.asarray(X, dtype=float)
    X = np.array(X.T if X.shape[0] > X.shape[1] else X, dtype=float, order="C")
    if X.size == 0:
        return np.zeros(X.shape[0])
    tol = EPS * max(X.shape[0], 1)
    sweeps = impl.jacobi_rows_inplace(X, tol, int(max_sweeps))
    if sweeps < 0:
        raise np.linalg.LinAlgError("one-sided Jacobi did not converge")
    return np.sqrt(np.einsum("ij,ij->i", X, X))


def numerical_rank(A, tol=RANK_TOL):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    return gecp(A, tol).rank


def singular_values(A, tol=RANK_TOL, impl=None, rank=None):
    """Nonzero singular values of ``A`` (descending) with relative accuracy.

    Returns ``(sigma, rank)``; ``len(sigma) == rank``.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros(0), 0
    f = gecp(A, tol, impl, rank)
    if f.rank == 0:
        return np.zeros(0), 0
    _, R, perm = sla.qr(f.L * f.pivots[None, :], mode="economic", pivoting=True)
    W = R @ f.U[perm]
    s = jacobi_singular_values(W, impl)
    return np.sort(s)[::-1], f.rank
