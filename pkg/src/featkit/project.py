"""Two-dimensional embeddings of the feature matrix: PCA and exact t-SNE.

t-SNE uses the canonical dense formulation: per-row Gaussian bandwidths
found by binary search against the requested perplexity, symmetrized joint
probabilities, Student-t similarities in the plane, and plain momentum
gradient descent with early exaggeration. Everything is deterministic; the
embedding is initialized from the PCA projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster import euclidean_distance_matrix
from .errors import InsufficientData, PerplexityInfeasible
from .features import FeatureTable
from .normalize import NormalizationMethod, normalize_matrix
from .rng import master_rng

EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
LEARNING_RATE = 200.0
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MIN_GAIN = 0.01
INIT_SCALE = 1e-4
_EPS = 1e-12


@dataclass(frozen=True)
class ProjectionConfig:
    method: str = "pca"  # "pca" | "tsne"
    normalization: NormalizationMethod = NormalizationMethod.ZSCORE
    perplexity: float = 15.0
    seed: int = 0
    iterations: int = 1000


@dataclass
class Embedding:
    method: str
    coords: np.ndarray
    ids: list[str]
    groups: list[str] | None = None
    variance_explained: tuple[float, float] | None = None
    ellipses: list[dict] | None = None
    # optimization diagnostics, not part of the wire format
    kl_initial: float | None = None
    kl_final: float | None = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "method": self.method,
            "coords": [[float(a), float(b)] for a, b in self.coords],
            "ids": self.ids,
            "groups": self.groups,
        }
        if self.variance_explained is not None:
            out["variance_explained"] = [float(v) for v in self.variance_explained]
        if self.ellipses is not None:
            out["ellipses"] = self.ellipses
        return out


def _check_matrix(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 3 or matrix.shape[1] < 2:
        raise InsufficientData("need >= 3 rows and >= 2 columns to embed")
    if not np.all(np.isfinite(matrix)):
        raise InsufficientData("embedding input contains non-finite values; filter first")
    return matrix


def pca_2d(matrix: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    """Project rows onto the top-2 principal axes.

    Returns (n x 2 coords, variance explained by each axis as a fraction of
    the total). Component signs are fixed by making each axis' largest-
    magnitude loading positive, so results are reproducible.
    """
    matrix = _check_matrix(matrix)
    centered = matrix - matrix.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    total = float(np.sum(svals**2))
    if total <= 0.0:
        raise InsufficientData("matrix has no variance")
    axes = vt[:2].copy()
    for j in range(2):
        k = int(np.argmax(np.abs(axes[j])))
        if axes[j, k] < 0:
            axes[j] = -axes[j]
    coords = centered @ axes.T
    explained = (float(svals[0] ** 2 / total), float(svals[1] ** 2 / total))
    return coords, explained


def conditional_neighbor_probabilities(
    sq_dists: np.ndarray, perplexity: float, max_iter: int = 50, tol: float = 1e-5
) -> np.ndarray:
    """Per-row Gaussian neighbor distributions calibrated to a perplexity.

    Each row's bandwidth is found by binary search until the row entropy
    (nats) is within ``tol`` of ln(perplexity) or ``max_iter`` halvings are
    exhausted. Diagonal entries are zero and every row sums to one.
    """
    n = sq_dists.shape[0]
    target = math.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        d = np.delete(sq_dists[i], i)
        d = d - d.min()  # shift for numerical stability; cancels on normalize
        beta, beta_min, beta_max = 1.0, -math.inf, math.inf
        row = np.exp(-beta * d)
        for _ in range(max_iter):
            total = row.sum()
            prob = row / total
            nz = prob[prob > 0]
            entropy = -float(np.sum(nz * np.log(nz)))
            diff = entropy - target
            if abs(diff) <= tol:
                break
            if diff > 0:  # too spread out -> narrow the kernel
                beta_min = beta
                beta = beta * 2.0 if beta_max == math.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -math.inf else (beta + beta_min) / 2.0
            row = np.exp(-beta * d)
        prob = row / row.sum()
        p[i, :i] = prob[:i]
        p[i, i + 1 :] = prob[i:]
    return p


def _kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], _EPS))))


def _student_t_q(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diff = y[:, None, :] - y[None, :, :]
    w = 1.0 / (1.0 + np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(w, 0.0)
    return w, w / w.sum()


def tsne_2d(matrix: np.ndarray, config: ProjectionConfig) -> tuple[np.ndarray, float, float]:
    """Exact t-SNE to 2 dimensions; returns (coords, initial KL, final KL)."""
    matrix = _check_matrix(matrix)
    n = matrix.shape[0]
    if not config.perplexity > 0:
        raise PerplexityInfeasible("perplexity must be positive")
    if config.perplexity >= (n - 1) / 3:
        raise PerplexityInfeasible(
            f"perplexity {config.perplexity:g} infeasible for {n} series "
            f"(needs perplexity < (n-1)/3 = {(n - 1) / 3:g})"
        )

    d2 = euclidean_distance_matrix(matrix) ** 2
    cond = conditional_neighbor_probabilities(d2, config.perplexity)
    p = (cond + cond.T) / (2.0 * n)

    try:
        init, _ = pca_2d(matrix)
        spread = float(np.std(init))
    except InsufficientData:
        spread = 0.0
    if spread > 0:
        y = init / spread * INIT_SCALE
    else:
        y = master_rng(config.seed).normal(scale=INIT_SCALE, size=(n, 2))

    _, q = _student_t_q(y)
    kl_initial = _kl_divergence(p, q)

    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(config.iterations):
        p_eff = p * EXAGGERATION if it < EXAGGERATION_ITERS else p
        w, q = _student_t_q(y)
        m = (p_eff - q) * w
        grad = 4.0 * (m.sum(axis=1)[:, None] * y - m @ y)
        momentum = MOMENTUM_EARLY if it < EXAGGERATION_ITERS else MOMENTUM_LATE
        # per-coordinate gain adaptation from the canonical recipe
        against = (velocity * grad) < 0.0
        gains = np.where(against, gains + 0.2, gains * 0.8)
        gains = np.maximum(gains, MIN_GAIN)
        velocity = momentum * velocity - LEARNING_RATE * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    _, q = _student_t_q(y)
    kl_final = _kl_divergence(p, q)
    return y, kl_initial, kl_final


def group_ellipses(coords: np.ndarray, groups: list[str]) -> list[dict]:
    """Per-group mean and 2x2 sample covariance for drawing 95% ellipses."""
    out = []
    for g in sorted(set(groups)):
        idx = [i for i, gi in enumerate(groups) if gi == g]
        pts = coords[idx]
        mean = pts.mean(axis=0)
        if len(idx) >= 2:
            cov = np.cov(pts, rowvar=False, ddof=1)
        else:
            cov = np.zeros((2, 2))
        out.append(
            {
                "group": g,
                "mean": [float(mean[0]), float(mean[1])],
                "cov": [[float(cov[0, 0]), float(cov[0, 1])],
                        [float(cov[1, 0]), float(cov[1, 1])]],
                "n": len(idx),
            }
        )
    return out


def project_table(ft: FeatureTable, config: ProjectionConfig) -> Embedding:
    """Pipeline entry point: filter, normalize and embed a feature table."""
    row_ids, col_names, matrix = ft.pivot()
    finite_cols = np.all(np.isfinite(matrix), axis=0)
    matrix = matrix[:, finite_cols]
    normalized, _, _ = normalize_matrix(matrix, config.normalization)
    groups = ft.labels_for(row_ids)

    if config.method == "pca":
        coords, explained = pca_2d(normalized)
        emb = Embedding("pca", coords, row_ids, groups, variance_explained=explained)
    elif config.method == "tsne":
        coords, kl0, kl1 = tsne_2d(normalized, config)
        emb = Embedding("tsne", coords, row_ids, groups, kl_initial=kl0, kl_final=kl1)
    else:
        raise ValueError(f"unknown projection method {config.method!r}")
    if groups is not None:
        emb.ellipses = group_ellipses(emb.coords, groups)
    return emb
