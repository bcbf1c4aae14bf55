"""Dense symmetric-matrix primitives and the Gaussian likelihood.

Matrices are plain ``numpy.ndarray`` objects; the helpers here check and
enforce symmetry instead of wrapping arrays in a custom class.  The scatter
matrix is always stored unnormalised, ``nS = Y^T Y``.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
import scipy.linalg

from .exceptions import DomainError, InputError

PSD_RTOL = 1e-10


def as_symmetric(m, *, check=True, atol=1e-12):
    """Return ``m`` as a float array, mirroring the upper triangle.

    Parameters
    ----------
    m : array-like, shape (q, q)
    check : bool
        If True, raise when ``m`` is visibly asymmetric (beyond ``atol``
        relative to its largest entry).
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InputError("dimension must be at least 2")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    if check:
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > atol * scale:
            raise InputError("matrix is not symmetric")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def check_dataset(y):
    """Validate an ``n x q`` data matrix and return it as a float array."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise InputError(f"data must be 2-D (n x q), got {y.ndim}-D")
    n, q = y.shape
    if n < 1 or q < 2:
        raise InputError(f"need n >= 1 rows and q >= 2 columns, got {n}x{q}")
    if not np.all(np.isfinite(y)):
        raise InputError("data contains non-finite entries")
    return y


def sample_scatter(y):
    """Unnormalised scatter matrix ``Y^T Y`` (i.e. ``n`` times the sample covariance)."""
    y = check_dataset(y)
    s = y.T @ y
    # exact symmetry; BLAS may differ in the last bit between triangles
    return np.triu(s) + np.triu(s, 1).T


def is_psd_scatter(s):
    """Check a scatter matrix is PSD up to ``1e-10 * trace(s)``."""
    s = np.asarray(s, dtype=float)
    if np.any(np.diag(s) < 0):
        return False
    eps = PSD_RTOL * max(float(np.trace(s)), np.finfo(float).tiny)
    return bool(np.linalg.eigvalsh(s)[0] >= -eps)


def is_positive_definite(m):
    """True iff a Cholesky factorisation of ``m`` succeeds with positive pivots."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.all(np.isfinite(m)):
        return False
    try:
        l = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.diag(l) > 0))


def cholesky(m, what="matrix"):
    """Lower Cholesky factor, raising :class:`DomainError` if ``m`` is not PD."""
    try:
        l = np.linalg.cholesky(np.asarray(m, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"{what} is not positive definite") from exc
    if not np.all(np.diag(l) > 0):
        raise DomainError(f"{what} is not positive definite")
    return l


def logdet_pd(m, what="matrix"):
    l = cholesky(m, what)
    return 2.0 * float(np.sum(np.log(np.diag(l))))


def inv_pd(m, what="matrix"):
    """Inverse of a PD matrix through its Cholesky factor (result symmetrised)."""
    l = cholesky(m, what)
    linv = scipy.linalg.solve_triangular(l, np.eye(l.shape[0]), lower=True)
    w = linv.T @ linv
    return np.triu(w) + np.triu(w, 1).T


def gaussian_nll(omega, scatter, n):
    r"""Gaussian negative log-likelihood of a precision matrix.

    Computes ``-(n/2) log det(omega) + (1/2) tr(nS omega)`` where ``scatter``
    is the unnormalised ``nS``.  Constants in ``2 \pi`` are dropped.
    """
    omega = np.asarray(omega, dtype=float)
    scatter = np.asarray(scatter, dtype=float)
    if omega.shape != scatter.shape:
        raise InputError(f"shape mismatch {omega.shape} vs {scatter.shape}")
    ld = logdet_pd(omega, "omega")
    return -0.5 * n * ld + 0.5 * float(np.sum(scatter * omega))


def swap_rowcol(m, i, j):
    """Return a copy of ``m`` with rows and columns ``i`` and ``j`` exchanged.

    Indices are zero-based.  This is ``P m P^T`` for the transposition ``P``.
    """
    m = np.asarray(m)
    q = m.shape[0]
    for k in (i, j):
        if not (0 <= k < q):
            raise InputError(f"index {k} out of range for dimension {q}")
    out = m.copy()
    if i == j:
        return out
    out[[i, j], :] = out[[j, i], :]
    out[:, [i, j]] = out[:, [j, i]]
    return out


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_csv_matrix(path):
    """Read a numeric CSV file, skipping a header row if the first line is not numeric.

    Returns
    -------
    values : ndarray, shape (rows, cols)
    header : list of str or None
    """
    text = Path(path).read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty file")
    header = None
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no numeric rows")
    width = len(rows[0])
    try:
        values = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if any(len(r) != width for r in rows):
        raise InputError(f"{path}: ragged rows")
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: non-finite entries")
    return values, header


def write_csv_matrix(path, m, header=None):
    """Write a 2-D array as CSV with ``repr``-exact floats."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in m:
            w.writerow([repr(float(v)) for v in row])
