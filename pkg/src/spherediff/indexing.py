"""Canonical index layouts for spectral coefficients and chart coordinates.

Two flat orderings are used everywhere in this package and must agree
bit-for-bit across modules, so they are defined once here.

Spectral ordering (complex coefficient vector, length L^2): degrees ascend,
and within degree ell the orders run m = 0, +1, -1, +2, -2, ..., +ell, -ell.
The coefficient (ell, m) therefore sits at

    ell^2 + (0 if m == 0 else 2m - 1 if m > 0 else -2m).

Chart ordering (real vector, length L^2): per degree, Re(a_{ell,0}) at ell^2,
then Re(a_{ell,m}) at ell^2 + 2m - 1 and Im(a_{ell,m}) at ell^2 + 2m for
m = 1..ell.  Note the convenient coincidence: the chart slot of Re(a_{ell,m})
equals the spectral slot of (ell, m), and the chart slot of Im(a_{ell,m})
equals the spectral slot of (ell, -m).
"""

from __future__ import annotations

import numpy as np

RE = "re"
IM = "im"


def spectral_index(ell: int, m: int) -> int:
    """Flat position of coefficient (ell, m) in the canonical ordering."""
    if abs(m) > ell:
        raise ValueError(f"order m={m} exceeds degree ell={ell}")
    if m == 0:
        return ell * ell
    if m > 0:
        return ell * ell + 2 * m - 1
    return ell * ell - 2 * m


def spectral_entries(L: int) -> list[tuple[int, int]]:
    """(ell, m) pairs in flat order, length L^2."""
    out = []
    for ell in range(L):
        out.append((ell, 0))
        for m in range(1, ell + 1):
            out.append((ell, m))
            out.append((ell, -m))
    return out


def chart_index(ell: int, m: int, part: str = RE) -> int:
    """Flat chart position of the given real degree of freedom (m >= 0)."""
    if m < 0 or m > ell:
        raise ValueError(f"chart slots are indexed by 0 <= m <= ell, got m={m}, ell={ell}")
    if part not in (RE, IM):
        raise ValueError(f"part must be {RE!r} or {IM!r}, got {part!r}")
    if m == 0:
        if part != RE:
            raise ValueError("a_{ell,0} has no imaginary chart slot")
        return ell * ell
    return ell * ell + 2 * m - (1 if part == RE else 0)


def chart_entries(L: int) -> list[tuple[int, int, str]]:
    """(ell, m, part) labels of the chart coordinates in flat order."""
    out = []
    for ell in range(L):
        out.append((ell, 0, RE))
        for m in range(1, ell + 1):
            out.append((ell, m, RE))
            out.append((ell, m, IM))
    return out


def spectral_ells(L: int) -> np.ndarray:
    """Degree of each spectral slot, shape (L^2,)."""
    return np.array([ell for ell, _ in spectral_entries(L)], dtype=np.int64)


def spectral_ms(L: int) -> np.ndarray:
    """Signed order of each spectral slot, shape (L^2,)."""
    return np.array([m for _, m in spectral_entries(L)], dtype=np.int64)


def chart_ms(L: int) -> np.ndarray:
    """Order m (>= 0) of each chart slot, shape (L^2,)."""
    return np.array([m for _, m, _ in chart_entries(L)], dtype=np.int64)


def chart_is_im(L: int) -> np.ndarray:
    """Boolean mask of imaginary-part chart slots, shape (L^2,)."""
    return np.array([part == IM for _, _, part in chart_entries(L)], dtype=bool)


def mirror_permutation(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Index map and sign implementing a -> (-1)^m conj(a) slot swaps.

    Returns (perm, sign) such that a vector a in the canonical spectral
    ordering is conjugate-symmetric iff a[i] == sign[i] * conj(a[perm[i]])
    for every slot i, where perm swaps (ell, m) with (ell, -m).
    """
    entries = spectral_entries(L)
    perm = np.array([spectral_index(ell, -m) for ell, m in entries], dtype=np.int64)
    sign = np.array([(-1.0) ** m for _, m in entries])
    return perm, sign
