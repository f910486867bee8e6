"""Hermitian eigendecomposition by cyclic Jacobi rotations.

For the graded positive-semidefinite matrices produced by reduced density
operators (eigenvalues spread over many orders of magnitude) Jacobi with a
relative rotation threshold resolves the small eigenvalues to high relative
accuracy, which plain QR-based solvers do not guarantee.  Intended for the
small dimensions of this package (d <= 64).
"""
from __future__ import annotations

import math

import numpy as np

_REL_TOL = 1e-15
_MAX_SWEEPS = 64
# below the smallest normal double a rotation cannot improve anything
_ABS_FLOOR = 2.3e-308


def jacobi_eigh(a: np.ndarray, rel_tol: float = _REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of a Hermitian matrix.

    Returns ``(lams, v)`` with ``a @ v[:, i] = lams[i] * v[:, i]``; columns of
    ``v`` are orthonormal.  Rotations are skipped once the off-diagonal entry
    is below ``rel_tol * sqrt(|a_pp * a_qq|)``, the Demmel-Veselic criterion
    that preserves relative accuracy for graded matrices.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    complex_input = np.iscomplexobj(a)
    if complex_input and np.max(np.abs(a.imag)) == 0.0:
        a = a.real
        complex_input = False
    dtype = complex if complex_input else float
    w = np.array(a, dtype=dtype)
    v = np.eye(n, dtype=dtype)

    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = w[p, q]
                absg = abs(g)
                if absg < _ABS_FLOOR:
                    continue
                if absg <= rel_tol * math.sqrt(abs(w[p, p].real * w[q, q].real)):
                    continue
                rotated = True
                phase = g / absg
                tau = (w[q, q].real - w[p, p].real) / (2.0 * absg)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # A <- J^dag A J with J = [[c, s*phase], [-s*conj(phase), c]]
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * col_p - s * np.conj(phase) * col_q
                w[:, q] = s * phase * col_p + c * col_q
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * row_p - s * phase * row_q
                w[q, :] = s * np.conj(phase) * row_p + c * row_q
                w[p, q] = 0.0
                w[q, p] = 0.0
                w[p, p] = w[p, p].real
                w[q, q] = w[q, q].real
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * np.conj(phase) * vec_q
                v[:, q] = s * phase * vec_p + c * vec_q
        if not rotated:
            break

    lams = np.real(np.diag(w)).copy()
    order = np.argsort(lams, kind="stable")[::-1]
    return lams[order], v[:, order]
