"""Real chart on conjugate-symmetric coefficient vectors.

A real field's coefficients satisfy a_{ell,-m} = (-1)^m conj(a_{ell,m}), so
they carry exactly L^2 real degrees of freedom.  The chart stacks, per ell:

    z[ell^2]          = Re(a_{ell,0})
    z[ell^2 + 2m - 1] = Re(a_{ell,m})   m = 1..ell
    z[ell^2 + 2m]     = Im(a_{ell,m})

`to_chart` reads only the m >= 0 slots (after validating symmetry), so
`to_chart(from_chart(z)) == z` bit-exactly.  `chart_linear_map` and
`synthesis_matrix` give the real matrices T and M with

    T x = to_chart(U x),    M z = Y from_chart(z)   (real),    T M = I.
"""

from __future__ import annotations

import numpy as np

from . import indexing
from .transform import ConstraintViolation, OperatorSet, mirror_residual


def to_chart(a: np.ndarray, L: int, *, tol: float = 1e-8) -> np.ndarray:
    """Real chart vector of conjugate-symmetric coefficients."""
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] != L * L:
        raise ValueError(f"expected {L * L} coefficients, got {a.shape[-1]}")
    resid = mirror_residual(a, L)
    if resid > tol:
        raise ConstraintViolation(
            f"coefficients break conjugate symmetry by {resid:.3e} (tol {tol:.1e})"
        )
    z = np.empty(L * L)
    for ell in range(L):
        z[ell * ell] = a[indexing.spectral_index(ell, 0)].real
        for m in range(1, ell + 1):
            c = a[indexing.spectral_index(ell, m)]
            z[ell * ell + 2 * m - 1] = c.real
            z[ell * ell + 2 * m] = c.imag
    return z


def from_chart(z: np.ndarray, L: int) -> np.ndarray:
    """Coefficient vector of a chart point; symmetric by construction."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != L * L:
        raise ValueError(f"expected {L * L} chart entries, got {z.shape[-1]}")
    a = np.empty(L * L, dtype=complex)
    for ell in range(L):
        a[indexing.spectral_index(ell, 0)] = z[ell * ell]
        for m in range(1, ell + 1):
            c = complex(z[ell * ell + 2 * m - 1], z[ell * ell + 2 * m])
            a[indexing.spectral_index(ell, m)] = c
            sign = -1.0 if m % 2 else 1.0
            a[indexing.spectral_index(ell, -m)] = sign * np.conj(c)
    return a


def chart_linear_map(ops: OperatorSet) -> np.ndarray:
    """Real matrix T (L^2 x d_X) with T x = to_chart(analysis(x))."""
    L = ops.L
    T = np.empty((L * L, ops.d_spatial))
    for ell in range(L):
        T[ell * ell] = ops.U[indexing.spectral_index(ell, 0)].real
        for m in range(1, ell + 1):
            row = ops.U[indexing.spectral_index(ell, m)]
            T[ell * ell + 2 * m - 1] = row.real
            T[ell * ell + 2 * m] = row.imag
    return T


def synthesis_matrix(ops: OperatorSet) -> np.ndarray:
    """Real matrix M (d_X x L^2) with M z = synthesis(from_chart(z))."""
    L = ops.L
    M = np.empty((ops.d_spatial, L * L))
    for ell in range(L):
        M[:, ell * ell] = ops.Y[:, indexing.spectral_index(ell, 0)].real
        for m in range(1, ell + 1):
            col = ops.Y[:, indexing.spectral_index(ell, m)]
            M[:, ell * ell + 2 * m - 1] = 2.0 * col.real
            M[:, ell * ell + 2 * m] = -2.0 * col.imag
    return M


def chart_weights(L: int) -> np.ndarray:
    """Multiplicity weights: 1 on m=0 slots, 2 elsewhere.

    For symmetric coefficients a = from_chart(z), the complex squared norm
    sum_{ell,m} |a_{ell,m}|^2 equals sum_i w_i z_i^2 with these weights.
    """
    w = np.full(L * L, 2.0)
    for ell in range(L):
        w[ell * ell] = 1.0
    return w
