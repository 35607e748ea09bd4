"""Distance matrices, agglomerative clustering and correlation matrices.

UPGMA (unweighted average linkage) drives the row/column ordering of the
series x feature heatmap and the top-feature correlation plot. Merging is
deterministic: among all minimal-distance pairs the lexicographically lowest
(node id, node id) pair merges first, and a cluster's node id is its position
in the merge tree (leaves 0..n-1, internal nodes n..2n-2 in merge order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, NaNInput, TooFewItems, ZeroVarianceColumn
from .features import FeatureTable
from .normalize import NormalizationMethod, normalize_matrix

LINKAGES = ("average", "single", "complete")


def euclidean_distance_matrix(rows: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances between the rows of a matrix."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise NaNInput("expected a 2-D matrix")
    if not np.all(np.isfinite(rows)):
        raise NaNInput("distance input contains non-finite values; filter first")
    n = rows.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        diff = rows - rows[i]
        out[i] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return out


@dataclass(frozen=True)
class Dendrogram:
    """Merge list in merge order plus the induced left-to-right leaf order.

    ``merges[k] = (left, right, height)`` creates node ``n_leaves + k``; the
    child whose lowest founding leaf index is smaller sits on the left.
    """

    n_leaves: int
    merges: list[tuple[int, int, float]]
    leaf_order: list[int]

    def merges_json(self) -> list[list[float]]:
        return [[int(a), int(b), float(h)] for a, b, h in self.merges]


def upgma(dist: np.ndarray, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering of a symmetric distance matrix.

    Average linkage (the default) uses the unweighted mean of all cross-pair
    distances; ``single`` and ``complete`` are available behind the same
    interface. Nearest-neighbor distances are cached per node, which keeps
    the whole run near O(n^2) for the reducible linkages used here.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if dist.ndim != 2 or dist.shape[1] != n:
        raise TooFewItems("distance matrix must be square")
    if n < 2:
        raise TooFewItems("need at least 2 items to cluster")
    if not np.all(np.isfinite(dist)):
        raise NaNInput("distance matrix contains non-finite values")

    total = 2 * n - 1
    big = np.full((total, total), np.inf)
    big[:n, :n] = dist
    np.fill_diagonal(big, np.inf)

    size = np.zeros(total, dtype=np.int64)
    size[:n] = 1
    founder = np.full(total, -1, dtype=np.int64)  # lowest original leaf in the cluster
    founder[:n] = np.arange(n)
    children: dict[int, tuple[int, int]] = {}

    nn = np.full(total, -1, dtype=np.int64)
    nn_dist = np.full(total, np.inf)
    limit = n
    for i in range(n):
        nn[i] = int(np.argmin(big[i, :limit]))
        nn_dist[i] = big[i, nn[i]]

    merges: list[tuple[int, int, float]] = []
    for _ in range(n - 1):
        a = int(np.argmin(nn_dist[:limit]))
        b = int(nn[a])
        height = float(nn_dist[a])
        if b < a:
            a, b = b, a

        c = limit
        limit += 1
        others = np.flatnonzero(np.isfinite(nn_dist[:c]))
        others = others[(others != a) & (others != b)]
        if linkage == "average":
            new_row = (size[a] * big[a, others] + size[b] * big[b, others]) / (size[a] + size[b])
        elif linkage == "single":
            new_row = np.minimum(big[a, others], big[b, others])
        else:
            new_row = np.maximum(big[a, others], big[b, others])
        big[c, others] = new_row
        big[others, c] = new_row

        for dead in (a, b):
            big[dead, :limit] = np.inf
            big[:limit, dead] = np.inf
            nn_dist[dead] = np.inf
            nn[dead] = -1

        size[c] = size[a] + size[b]
        founder[c] = min(founder[a], founder[b])
        left, right = (a, b) if founder[a] <= founder[b] else (b, a)
        children[c] = (left, right)
        merges.append((left, right, height))

        # rows whose cached neighbor just merged need a rescan; a fresh
        # cluster can never undercut an intact cached minimum (distances
        # under these linkages only grow), and on exact ties the lower
        # node id (the cached one) wins anyway.
        stale = [int(k) for k in others if nn[k] in (a, b)]
        stale.append(c)
        for k in stale:
            j = int(np.argmin(big[k, :limit]))
            nn[k] = j
            nn_dist[k] = big[k, j]

    order: list[int] = []
    stack = [limit - 1]
    while stack:
        node = stack.pop()
        if node < n:
            order.append(node)
        else:
            left, right = children[node]
            stack.append(right)
            stack.append(left)
    return Dendrogram(n_leaves=n, merges=merges, leaf_order=order)


@dataclass(frozen=True)
class ClusteredMatrix:
    """Normalized series x feature matrix plus the UPGMA orderings.

    ``values`` is unpermuted; consumers apply ``row_order``/``col_order``
    themselves, so reordering stays a pure permutation of the data.
    """

    values: np.ndarray
    row_ids: list[str]
    col_names: list[str]
    row_order: list[int]
    col_order: list[int]
    row_dendrogram: Dendrogram
    col_dendrogram: Dendrogram
    dropped_nonfinite: list[str]
    dropped_degenerate: list[str]

    def to_json_dict(self) -> dict:
        return {
            "values": [[float(v) for v in row] for row in self.values],
            "row_ids": self.row_ids,
            "col_names": self.col_names,
            "row_order": [int(i) for i in self.row_order],
            "col_order": [int(j) for j in self.col_order],
            "merges_rows": self.row_dendrogram.merges_json(),
            "merges_cols": self.col_dendrogram.merges_json(),
            "dropped": {
                "nonfinite": self.dropped_nonfinite,
                "degenerate": self.dropped_degenerate,
            },
        }


def cluster_matrix(
    ft: FeatureTable,
    method: NormalizationMethod = NormalizationMethod.ZSCORE,
    linkage: str = "average",
) -> ClusteredMatrix:
    """Normalize the feature matrix and cluster its rows and columns.

    Features containing any NaN/Inf and features with a degenerate scale
    are dropped (and reported); at least 2 rows and 2 columns must survive.
    """
    row_ids, col_names, matrix = ft.pivot()
    finite_cols = np.all(np.isfinite(matrix), axis=0)
    dropped_nonfinite = [c for c, ok in zip(col_names, finite_cols) if not ok]
    matrix = matrix[:, finite_cols]
    col_names = [c for c, ok in zip(col_names, finite_cols) if ok]

    normalized, kept_idx, dropped_idx = normalize_matrix(matrix, method)
    dropped_degenerate = [col_names[j] for j in dropped_idx]
    col_names = [col_names[j] for j in kept_idx]

    if normalized.shape[0] < 2 or normalized.shape[1] < 2:
        raise InsufficientData(
            f"need >= 2 series and >= 2 surviving features, have "
            f"{normalized.shape[0]} x {normalized.shape[1]}"
        )

    row_dend = upgma(euclidean_distance_matrix(normalized), linkage)
    col_dend = upgma(euclidean_distance_matrix(normalized.T), linkage)
    return ClusteredMatrix(
        values=normalized,
        row_ids=row_ids,
        col_names=col_names,
        row_order=row_dend.leaf_order,
        col_order=col_dend.leaf_order,
        row_dendrogram=row_dend,
        col_dendrogram=col_dend,
        dropped_nonfinite=dropped_nonfinite,
        dropped_degenerate=dropped_degenerate,
    )


def average_ranks(v: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average of their rank positions."""
    v = np.asarray(v, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def correlation_matrix(
    cols: np.ndarray, kind: str = "pearson", absolute: bool = False
) -> np.ndarray:
    """Column-by-column Pearson or Spearman correlation matrix.

    Spearman is Pearson on average ranks. The result is exactly symmetric
    with a unit diagonal; ``absolute`` takes |rho| entrywise.
    """
    cols = np.asarray(cols, dtype=np.float64)
    if cols.ndim != 2 or cols.shape[0] < 3:
        raise InsufficientData("need a 2-D matrix with at least 3 rows")
    if kind not in ("pearson", "spearman"):
        raise ValueError(f"unknown correlation kind {kind!r}")
    bad = [j for j in range(cols.shape[1]) if float(np.std(cols[:, j])) == 0.0]
    if bad:
        raise ZeroVarianceColumn(f"zero-variance column(s) at indices {bad}")

    work = cols
    if kind == "spearman":
        work = np.column_stack([average_ranks(cols[:, j]) for j in range(cols.shape[1])])
    centered = work - work.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    z = centered / norms
    corr = z.T @ z
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    corr = np.clip(corr, -1.0, 1.0)
    return np.abs(corr) if absolute else corr
