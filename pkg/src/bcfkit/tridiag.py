"""Eigenvalues of real symmetric tridiagonal matrices by implicit-shift QL."""

import math

import numpy as np

from .errors import EigenSolverError


def tridiagonal_eigvalsh(diag, offdiag, max_iter=None):
    """Eigenvalues of the symmetric tridiagonal matrix ``T(diag, offdiag)``.

    Parameters
    ----------
    diag : array_like, shape (n,)
        Main diagonal.
    offdiag : array_like, shape (n-1,)
        Sub/super diagonal.
    max_iter : int, optional
        Cap on the total number of QL sweeps; defaults to ``30 * n``.

    Returns
    -------
    ndarray
        Eigenvalues in ascending order.

    Raises
    ------
    EigenSolverError
        If the iteration cap is exceeded.
    """
    d = np.array(diag, dtype=float)
    n = d.size
    if n == 0:
        return d
    off = np.asarray(offdiag, dtype=float)
    if off.size != n - 1:
        raise ValueError("offdiag must have length len(diag) - 1")
    e = np.zeros(n)
    e[: n - 1] = off
    if max_iter is None:
        max_iter = 30 * n
    eps = np.finfo(float).eps
    floor = math.sqrt(np.finfo(float).tiny)
    # exact power-of-two scaling keeps the rotations clear of under/overflow
    anorm = max(np.max(np.abs(d)), np.max(np.abs(e)))
    scale = math.ldexp(1.0, -math.frexp(anorm)[1]) if anorm > 0 else 1.0
    d *= scale
    e *= scale
    sweeps = 0

    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                # the matrix is scaled to norm ~1, so couplings below
                # sqrt(tiny) are negligible (LAPACK uses the same floor)
                if abs(e[m]) <= eps * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            if sweeps >= max_iter:
                raise EigenSolverError(
                    f"tridiagonal QL did not converge within {max_iter} sweeps"
                )
            sweeps += 1
            # Wilkinson-type shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0

    return np.sort(d) / scale
