"""Dense Gaussian elimination with scaled partial pivoting.

Works on a single system or a stack of them; the leading axes of ``A`` are
batch axes. Kept separate from LAPACK so the direct sideband oracle does not
share a code path with anything it is compared against.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularityError

PIVOT_TOL = 1e-30


def solve_partial_pivot(A, b):
    """Solve ``A x = b`` for ``A`` of shape (..., n, n) and ``b`` of shape (..., n).

    Rows are equilibrated by their largest magnitude before pivot selection.
    Raises :class:`SingularityError` when a pivot falls below ``PIVOT_TOL``
    relative to its equilibrated row.
    """
    A = np.array(A, dtype=np.result_type(A, b, np.float64), copy=True)
    b = np.array(b, dtype=A.dtype, copy=True)
    if A.shape[-1] != A.shape[-2] or b.shape != A.shape[:-1]:
        raise ValueError(f"incompatible shapes {A.shape} and {b.shape}")
    batch_shape = A.shape[:-2]
    n = A.shape[-1]
    A = A.reshape(-1, n, n)
    b = b.reshape(-1, n)
    m = A.shape[0]
    rows = np.arange(m)

    scale = np.abs(A).max(axis=2)
    if np.any(scale == 0.0):
        bad = int(np.argmax(np.any(scale == 0.0, axis=1)))
        raise SingularityError("matrix row", 0.0, bad)
    A /= scale[:, :, None]
    b /= scale

    for k in range(n):
        col = np.abs(A[:, k:, k])
        p = k + np.argmax(col, axis=1)
        pivmag = col[rows, p - k]
        if np.any(pivmag < PIVOT_TOL):
            bad = int(np.argmin(pivmag))
            raise SingularityError(f"pivot in column {k}", float(pivmag[bad]), bad)
        swap = p != k
        if np.any(swap):
            idx = rows[swap]
            pk = p[swap]
            A[idx, k], A[idx, pk] = A[idx, pk].copy(), A[idx, k].copy()
            b[idx, k], b[idx, pk] = b[idx, pk].copy(), b[idx, k].copy()
        f = A[:, k + 1:, k] / A[:, k, k][:, None]
        A[:, k + 1:, k:] -= f[:, :, None] * A[:, k, k:][:, None, :]
        b[:, k + 1:] -= f * b[:, k][:, None]

    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        acc = b[:, k] - np.einsum("ij,ij->i", A[:, k, k + 1:], x[:, k + 1:])
        x[:, k] = acc / A[:, k, k]
    return x.reshape(*batch_shape, n)
