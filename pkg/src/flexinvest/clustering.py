"""k-medoids selection of representative days."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySeries, KExceedsN, ValidationError


@dataclass(frozen=True)
class ClusterResult:
    medoids: np.ndarray      # indices into the input series, one per cluster
    assignments: np.ndarray  # cluster index per input row
    weights: np.ndarray      # cluster size fractions
    cost: float              # total squared distance to assigned medoids


def squared_distances(X: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def _plusplus_init(D, k, rng):
    n = D.shape[0]
    medoids = [int(rng.integers(n))]
    nearest = D[medoids[0]].copy()
    while len(medoids) < k:
        total = nearest.sum()
        if total <= 0.0:
            # remaining points coincide with chosen medoids; take the lowest unused index
            medoids.append(next(i for i in range(n) if i not in medoids))
        else:
            medoids.append(int(rng.choice(n, p=nearest / total)))
        nearest = np.minimum(nearest, D[medoids[-1]])
    return medoids


def _swap_phase(D, medoids):
    medoids = list(medoids)
    n = D.shape[0]
    while True:
        Dm = D[:, medoids]
        cost = Dm.min(axis=1).sum()
        best = (0.0, None, None)
        for slot in range(len(medoids)):
            if len(medoids) > 1:
                others = np.delete(Dm, slot, axis=1).min(axis=1)
            else:
                others = np.full(n, np.inf)
            cand = np.minimum(others[:, None], D).sum(axis=0)
            cand[medoids] = np.inf
            h = int(np.argmin(cand))
            gain = cost - cand[h]
            if gain > best[0] + 1e-12 * max(cost, 1.0):
                best = (gain, slot, h)
        if best[1] is None:
            return medoids
        medoids[best[1]] = best[2]


def cluster_representatives(series, k: int, seed: int = 0) -> ClusterResult:
    """Pick ``k`` medoid rows of ``series`` under squared-Euclidean distance.

    Medoids are seeded with k-medoids++ from ``np.random.default_rng(seed)`` and
    refined by PAM swaps until no swap lowers the total distance. Clusters are
    reported in ascending medoid-index order.
    """
    X = np.asarray(series, dtype=float)
    if X.size == 0 or X.ndim != 2 or X.shape[0] == 0:
        raise EmptySeries("no feature vectors to cluster")
    n = X.shape[0]
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > n:
        raise KExceedsN(f"k={k} exceeds number of series n={n}")
    D = squared_distances(X)
    if k == n:
        medoids = list(range(n))
    else:
        rng = np.random.default_rng(seed)
        medoids = _swap_phase(D, _plusplus_init(D, k, rng))
    medoids = np.array(sorted(medoids), dtype=int)
    Dm = D[:, medoids]
    assignments = np.argmin(Dm, axis=1)
    # a medoid always belongs to its own cluster, even when tied with another
    assignments[medoids] = np.arange(len(medoids))
    counts = np.bincount(assignments, minlength=len(medoids)).astype(float)
    weights = counts / counts.sum()
    cost = float(Dm[np.arange(n), assignments].sum())
    return ClusterResult(medoids, assignments, weights, cost)


def standardize_blocks(blocks) -> np.ndarray:
    """Concatenate feature blocks (rows = days), each divided by its global std."""
    out = []
    for b in blocks:
        b = np.asarray(b, dtype=float)
        s = b.std()
        out.append(b / s if s > 0 else b)
    return np.hstack(out)
