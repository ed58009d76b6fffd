"""K-means color clustering with HSL candidate filtering and cluster-size
gating for the K-mean_12 / K-mean_6 / K-mean_14 sky mask variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import rgb_to_hsl

MAX_ITERATIONS = 100
CENTROID_MOVE_TOL = 1e-3

KMEANS_PARAM_SETS = {
    "K-mean_12": (12, 0.7, 0.75, 0.3, 0.95, 0.75, 0.2),
    "K-mean_6": (6, 0.6, 0.75, 0.3, 0.95, 0.75, 0.2),
    "K-mean_14": (14, 0.4, 0.75, 0.3, 0.95, 0.65, 0.2),
}


@dataclass(frozen=True)
class KMeansHslParams:
    clusters: int
    skyreq: float
    h_high: float
    h_low: float
    l_lightness: float
    l_grey: float
    s_grey: float

    def __post_init__(self):
        if self.clusters < 2 or not self.h_low < self.h_high:
            raise ValueError("invalid K-means/HSL parameters")
        if not 0.0 < self.skyreq <= 1.0:
            raise ValueError("skyreq must lie in (0, 1]")


@dataclass(frozen=True)
class Clustering:
    labels: np.ndarray     # HxW cluster ids in [0, K)
    centroids: np.ndarray  # K x 3 mean RGB
    sizes: np.ndarray      # K pixel counts


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((k, 3))
    centers[0] = points[rng.integers(len(points))]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i:] = points[rng.integers(len(points), size=k - i)]
            break
        probs = d2 / total
        centers[i] = points[rng.choice(len(points), p=probs)]
        d2 = np.minimum(d2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def kmeans_cluster(img: np.ndarray, k: int, seed: int) -> Clustering:
    """Lloyd's algorithm on RGB triples with k-means++ seeding.

    K is reduced to the number of distinct pixel colors when smaller;
    iteration stops at 100 rounds or when no centroid moves more than 1e-3.
    """
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("empty image")
    h, w = img.shape[:2]
    points = img.reshape(-1, 3).astype(np.float64)
    distinct = len(np.unique(points, axis=0))
    k = min(k, distinct)

    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(points, k, rng)
    labels = np.zeros(len(points), dtype=int)
    for _ in range(MAX_ITERATIONS):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for i in range(k):
            sel = labels == i
            if sel.any():
                new_centers[i] = points[sel].mean(axis=0)
        move = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1)).max()
        centers = new_centers
        if move < CENTROID_MOVE_TOL:
            break
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    sizes = np.bincount(labels, minlength=k)
    return Clustering(labels=labels.reshape(h, w), centroids=centers, sizes=sizes)


def hsl_is_candidate(centroid, params: KMeansHslParams) -> bool:
    """Sky-candidate test on a centroid's HSL: blue-hue band, very bright,
    or bright-and-desaturated grey."""
    h, s, l = rgb_to_hsl(np.asarray(centroid, dtype=np.float64))
    return bool(
        (params.h_low < h < params.h_high)
        or (l > params.l_lightness)
        or (l > params.l_grey and s < params.s_grey)
    )


def select_sky_clusters(clustering: Clustering, candidates, skyreq: float) -> set[int]:
    """Among candidate clusters, keep those at least skyreq times the size
    of the largest candidate."""
    candidates = np.asarray(candidates, dtype=bool)
    ids = np.where(candidates)[0]
    if ids.size == 0:
        return set()
    largest = clustering.sizes[ids].max()
    keep = ids[clustering.sizes[ids] >= skyreq * largest]
    return set(int(i) for i in keep)


def kmeans_hsl_mask(img: np.ndarray, params: KMeansHslParams, seed: int) -> np.ndarray:
    """Full K-means/HSL sky mask: cluster, filter centroids, gate by size."""
    clustering = kmeans_cluster(img, params.clusters, seed)
    candidates = [hsl_is_candidate(c, params) for c in clustering.centroids]
    selected = select_sky_clusters(clustering, candidates, params.skyreq)
    return np.isin(clustering.labels, sorted(selected))


def clustered_rgb(clustering: Clustering) -> np.ndarray:
    """Pixels replaced by centroid colors, for debug dumps."""
    return np.rint(clustering.centroids[clustering.labels]).astype(np.uint8)
