"""Sliced Wasserstein distance between empirical sample sets.

Projects both sets onto random unit directions (normalized Gaussian draws)
and averages the exact 1-D order-p Wasserstein distance over projections.
Equal sample counts pair sorted samples directly; unequal counts use the
exact merged-CDF segment walk over the union of quantile breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlicedWassersteinResult:
    value: float          # mean over projections
    se: float             # standard error of that mean
    n_proj: int
    p: float
    per_projection: np.ndarray | None = None

    @property
    def ci2se(self) -> tuple:
        """(low, high) of the mean +/- 2 standard errors interval."""
        return (self.value - 2.0 * self.se, self.value + 2.0 * self.se)


def _as_samples(name: str, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty n x d matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def wasserstein_1d(a: np.ndarray, b: np.ndarray, p: float = 2.0) -> float:
    """Exact order-p Wasserstein distance between 1-D empirical measures."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ValueError("empty sample set")
    if n == m:
        return float(np.mean(np.abs(a - b) ** p) ** (1.0 / p))
    edges = np.concatenate(
        [[0.0], np.union1d(np.arange(1, n) / n, np.arange(1, m) / m), [1.0]]
    )
    mids = 0.5 * (edges[:-1] + edges[1:])
    ia = np.minimum((mids * n).astype(np.intp), n - 1)
    ib = np.minimum((mids * m).astype(np.intp), m - 1)
    return float((np.diff(edges) @ np.abs(a[ia] - b[ib]) ** p) ** (1.0 / p))


def sliced_wasserstein(A, B, p: float = 2.0, n_proj: int = 1000, seed=None,
                       *, keep_per_projection: bool = False) -> SlicedWassersteinResult:
    """Monte Carlo sliced Wasserstein distance between sample sets A and B."""
    A = _as_samples("A", A)
    B = _as_samples("B", B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"dimension mismatch: A has d={A.shape[1]}, B has d={B.shape[1]}"
        )
    if p < 1:
        raise ValueError("order p must be >= 1")
    if n_proj < 1:
        raise ValueError("need at least one projection")

    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_proj, A.shape[1]))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    PA = A @ dirs.T  # (n, n_proj)
    PB = B @ dirs.T
    if A.shape[0] == B.shape[0]:
        PA.sort(axis=0)
        PB.sort(axis=0)
        per = np.mean(np.abs(PA - PB) ** p, axis=0) ** (1.0 / p)
    else:
        per = np.array(
            [wasserstein_1d(PA[:, i], PB[:, i], p) for i in range(n_proj)]
        )

    se = float(per.std(ddof=1) / np.sqrt(n_proj)) if n_proj > 1 else 0.0
    return SlicedWassersteinResult(
        value=float(per.mean()),
        se=se,
        n_proj=n_proj,
        p=p,
        per_projection=per if keep_per_projection else None,
    )
