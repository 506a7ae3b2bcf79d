"""Chart covariance of spherical mirrored Brownian motion, and samplers.

The image v = U w of spatial Brownian motion has per-order covariance

    C_m[ell, ell'] = (2L-1)/2 * sum_j q_j^2 Pbar_{ell,m}(cos theta_j)
                                          Pbar_{ell',m}(cos theta_j)

(q_j the absorbed ring weights, Pbar the fully normalized Legendre values);
cross-m and Re/Im cross-covariances vanish.  In chart coordinates the
covariance assembles into Sigma with the m = 0 block doubled, and the
normative identity Sigma = T T^T ties the convention to the actual operators
(the prefactor above makes the match exact; no rescaling is applied).

Lambda is a fixed symmetric-eigendecomposition factor with Lambda Lambda^T =
Sigma, so sqrt(t) * Lambda g, g ~ N(0, I), samples the time-t marginal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import indexing
from .chart import from_chart
from .grid import build_grid
from .harmonics import norm_legendre_table
from .transform import FMT, OperatorSet


class IndefiniteCovariance(ValueError):
    """Sigma has an eigenvalue below the indefiniteness threshold."""


@dataclass(frozen=True)
class CovarianceSet:
    """Covariance data for one band limit: C blocks, Sigma, and its factor."""

    L: int
    blocks: tuple = field(repr=False)        # blocks[m]: (L-m, L-m), index ell-m
    Sigma: np.ndarray = field(repr=False)    # real symmetric, L^2 x L^2
    Lambda: np.ndarray = field(repr=False)   # Lambda @ Lambda.T == Sigma

    def __post_init__(self):
        for b in self.blocks:
            b.setflags(write=False)
        self.Sigma.setflags(write=False)
        self.Lambda.setflags(write=False)

    def C(self, ell: int, m: int, ellp: int) -> float:
        """Covariance coefficient C[(ell,m),(ellp,m)]; m must not exceed ell, ellp."""
        if not (0 <= m <= min(ell, ellp) and max(ell, ellp) < self.L):
            raise ValueError(f"invalid C index (ell={ell}, m={m}, ell'={ellp})")
        return float(self.blocks[m][ell - m, ellp - m])


def covariance_blocks(L: int) -> tuple:
    """Per-order covariance blocks C_m, m = 0..L-1."""
    grid = build_grid(L)
    plm = norm_legendre_table(L, np.cos(grid.theta))  # (L, L, 2L)
    w2 = grid.weights ** 2
    pref = (2 * L - 1) / 2.0
    blocks = []
    for m in range(L):
        V = plm[m:, m, :]  # rows ell = m..L-1, cols theta rings
        B = pref * ((V * w2) @ V.T)
        blocks.append(0.5 * (B + B.T))  # exactly symmetric (B is up to round-off)
    return tuple(blocks)


def build_sigma(blocks: tuple, L: int) -> np.ndarray:
    """Chart-coordinate covariance; entries off the (m, part) blocks exactly zero."""
    Sigma = np.zeros((L * L, L * L))
    for m in range(L):
        B = blocks[m]
        for ell in range(m, L):
            for ellp in range(m, L):
                c = B[ell - m, ellp - m]
                if m == 0:
                    Sigma[ell * ell, ellp * ellp] = 2.0 * c
                else:
                    i_re = indexing.chart_index(ell, m, "re")
                    j_re = indexing.chart_index(ellp, m, "re")
                    Sigma[i_re, j_re] = c
                    Sigma[i_re + 1, j_re + 1] = c
    return Sigma


def factor_sigma(Sigma: np.ndarray, *, clip: float = 1e-12, indefinite_tol: float = -1e-8):
    """Fixed factor Lambda = V sqrt(diag(w)) with Lambda Lambda^T = Sigma.

    Eigenvalues sorted descending with clipping of small negatives; each
    eigenvector's sign is fixed so its largest-magnitude entry is positive.
    Returns (Lambda, min_eigenvalue).
    """
    Sigma = np.asarray(Sigma, dtype=float)
    sym_err = float(np.max(np.abs(Sigma - Sigma.T)))
    if sym_err > 1e-12:
        raise ValueError(f"Sigma asymmetric by {sym_err:.3e}")
    w, V = np.linalg.eigh(Sigma)
    min_eig = float(w.min())
    if min_eig < indefinite_tol:
        raise IndefiniteCovariance(f"Sigma indefinite: min eigenvalue {min_eig:.3e}")
    order = np.argsort(-w, kind="stable")  # descending, ties keep eigh's order
    w, V = w[order], V[:, order]
    w = np.where(w < clip, 0.0, w)
    for i in range(V.shape[1]):
        col = V[:, i]
        if col[np.argmax(np.abs(col))] < 0:
            V[:, i] = -col
    return V * np.sqrt(w), min_eig


def build_covariance(L: int) -> CovarianceSet:
    """Compute C blocks, Sigma, and Lambda for one band limit."""
    blocks = covariance_blocks(L)
    Sigma = build_sigma(blocks, L)
    Lambda, _ = factor_sigma(Sigma)
    return CovarianceSet(L=L, blocks=blocks, Sigma=Sigma, Lambda=Lambda)


def sample_mirrored_bm(Lambda: np.ndarray, t: float, n: int, seed) -> np.ndarray:
    """n chart samples of the time-t mirrored-BM marginal: sqrt(t) Lambda g."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = Lambda.shape[0]
    g = np.random.default_rng(seed).standard_normal((n, d))
    return np.sqrt(t) * (g @ Lambda.T)


def lift_samples(Z: np.ndarray, L: int) -> np.ndarray:
    """Chart samples (n, L^2) -> constrained coefficient samples (n, L^2) complex."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    return np.stack([from_chart(z, L) for z in Z])


def mirrored_bm_via_spatial(ops: OperatorSet, t: float, n: int, seed) -> np.ndarray:
    """n coefficient samples U w with spatial Brownian w ~ N(0, t I)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    g = np.random.default_rng(seed).standard_normal((n, ops.d_spatial))
    return np.sqrt(t) * (g @ ops.U.T)


def empirical_covariance(X: np.ndarray) -> np.ndarray:
    """Sample covariance with a thread-count-independent reduction.

    einsum (non-BLAS path) keeps the summation order fixed, so repeated runs
    give bit-identical results regardless of BLAS threading.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples to estimate a covariance")
    R = X - X.mean(axis=0)
    return np.einsum("ni,nj->ij", R, R) / (X.shape[0] - 1)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def chart_labels(L: int):
    """Row/column annotations '(ell,m,part)' in chart order."""
    labels = []
    for ell, m, part in indexing.chart_entries(L):
        labels.append(f"({ell},{m},{part})")
    return labels


def sigma_to_csv(mat: np.ndarray, L: int) -> str:
    """Chart-indexed matrix as annotated CSV."""
    labels = chart_labels(L)
    lines = ["index," + ",".join(f'"{c}"' for c in labels)]
    for lab, row in zip(labels, np.asarray(mat, dtype=float)):
        lines.append(f'"{lab}",' + ",".join(FMT % v for v in row))
    return "\n".join(lines) + "\n"


def save_samples(path, X: np.ndarray, meta: dict, *, raw: bool = False) -> None:
    """Write an n x d sample matrix (CSV rows or raw little-endian float64)
    plus a JSON sidecar `<path>.json` with at least {"L", "t", "n", "seed"}."""
    path = Path(path)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if raw:
        path.write_bytes(np.ascontiguousarray(X, dtype="<f8").tobytes())
    else:
        lines = [",".join(FMT % v for v in row) for row in X]
        path.write_text("\n".join(lines) + "\n")
    sidecar = dict(meta)
    sidecar.setdefault("n", int(X.shape[0]))
    sidecar["raw"] = bool(raw)
    sidecar["d"] = int(X.shape[1])
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    )


def load_samples(path):
    """Read a sample matrix and its sidecar; returns (X, meta)."""
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    if meta.get("raw"):
        X = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(-1, meta["d"])
        X = X.copy()
    else:
        X = np.loadtxt(path, delimiter=",", ndmin=2)
    if "n" in meta and X.shape[0] != meta["n"]:
        raise ValueError(f"sample file has {X.shape[0]} rows, sidecar says {meta['n']}")
    return X, meta
