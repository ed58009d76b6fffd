"""Mean-shift sky segmentation: joint spatial-range filtering in CIE Luv,
region fusion, minimum-density pruning, and most-common-color sky marking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .raster import luv_to_rgb, rgb_to_luv

CONVERGENCE_EPS = 0.01
MAX_ITERATIONS = 100
_COLOR_BUCKET_DECIMALS = 3

MEANSHIFT_PARAM_SETS = {
    "Mean_7_8_300": (7, 8.0, 300),
    "Mean_3_6_100": (3, 6.0, 100),
    "Mean_5_7_210": (5, 7.0, 210),
    "Mean_7_6_100": (7, 6.0, 100),
}


@dataclass(frozen=True)
class MeanShiftParams:
    spatial_radius: int
    range_radius: float
    min_density: int

    def __post_init__(self):
        if self.spatial_radius < 1 or self.range_radius <= 0 or self.min_density < 1:
            raise ValueError("invalid mean-shift parameters")


@dataclass(frozen=True)
class SegmentedImage:
    labels: np.ndarray        # HxW int region ids
    region_colors: np.ndarray  # n_regions x 3 mean Luv
    region_sizes: np.ndarray   # n_regions pixel counts

    @property
    def region_colors_rgb(self) -> np.ndarray:
        return luv_to_rgb(self.region_colors)


@njit(cache=True)
def _filter_kernel(luv, hs, hr, eps, max_iter):  # pragma: no cover - numba
    h, w = luv.shape[0], luv.shape[1]
    out = np.empty((h, w, 3), dtype=np.float64)
    hr2 = hr * hr
    hs2 = hs * hs
    for py in range(h):
        for px in range(w):
            cy = float(py)
            cx = float(px)
            cl = luv[py, px, 0]
            cu = luv[py, px, 1]
            cv = luv[py, px, 2]
            for _ in range(max_iter):
                y0 = max(int(cy - hs), 0)
                y1 = min(int(cy + hs) + 1, h)
                x0 = max(int(cx - hs), 0)
                x1 = min(int(cx + hs) + 1, w)
                sy = 0.0
                sx = 0.0
                sl = 0.0
                su = 0.0
                sv = 0.0
                n = 0
                for qy in range(y0, y1):
                    dy = qy - cy
                    for qx in range(x0, x1):
                        dx = qx - cx
                        if dy * dy + dx * dx > hs2:
                            continue
                        dl = luv[qy, qx, 0] - cl
                        du = luv[qy, qx, 1] - cu
                        dv = luv[qy, qx, 2] - cv
                        if dl * dl + du * du + dv * dv > hr2:
                            continue
                        sy += qy
                        sx += qx
                        sl += luv[qy, qx, 0]
                        su += luv[qy, qx, 1]
                        sv += luv[qy, qx, 2]
                        n += 1
                ny = sy / n
                nx = sx / n
                nl = sl / n
                nu = su / n
                nv = sv / n
                shift2 = (
                    (ny - cy) ** 2
                    + (nx - cx) ** 2
                    + (nl - cl) ** 2
                    + (nu - cu) ** 2
                    + (nv - cv) ** 2
                )
                cy, cx, cl, cu, cv = ny, nx, nl, nu, nv
                if shift2 < eps * eps:
                    break
            out[py, px, 0] = cl
            out[py, px, 1] = cu
            out[py, px, 2] = cv
    return out


def meanshift_filter(img: np.ndarray, params: MeanShiftParams) -> np.ndarray:
    """Per-pixel joint spatial-range mean shift with a flat kernel.

    The window is a spatial disc of the spatial radius crossed with a Luv
    ball of the range radius; iteration stops when the joint displacement
    drops below 0.01 or after 100 iterations. Returns the HxWx3 converged
    mode color (Luv) per pixel.
    """
    luv = np.ascontiguousarray(rgb_to_luv(np.asarray(img)))
    return _filter_kernel(
        luv,
        float(params.spatial_radius),
        float(params.range_radius),
        CONVERGENCE_EPS,
        MAX_ITERATIONS,
    )


def _fuse_regions(modes: np.ndarray, hr: float) -> np.ndarray:
    """8-connected union of pixels whose mode colors differ by < hr."""
    h, w = modes.shape[:2]
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows = []
    cols = []
    # right, down, down-right, down-left neighbor pairs
    offsets = [
        (slice(None), slice(None, -1), slice(None), slice(1, None)),
        (slice(None, -1), slice(None), slice(1, None), slice(None)),
        (slice(None, -1), slice(None, -1), slice(1, None), slice(1, None)),
        (slice(None, -1), slice(1, None), slice(1, None), slice(None, -1)),
    ]
    for ay, ax, by, bx in offsets:
        a = idx[ay, ax].ravel()
        b = idx[by, bx].ravel()
        da = modes[ay, ax].reshape(-1, 3)
        db = modes[by, bx].reshape(-1, 3)
        near = np.sum((da - db) ** 2, axis=1) < hr * hr
        rows.append(a[near])
        cols.append(b[near])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels.reshape(h, w)


def fuse_and_prune(modes: np.ndarray, params: MeanShiftParams) -> SegmentedImage:
    """Fuse filtered modes into regions, then iteratively merge regions
    smaller than the minimum density (smallest first) into the adjacent
    region with the closest mean color."""
    modes = np.asarray(modes, dtype=np.float64)
    h, w = modes.shape[:2]
    labels = _fuse_regions(modes, params.range_radius)

    flat = modes.reshape(-1, 3)
    lab = labels.ravel()

    def region_stats(lab):
        n_regions = lab.max() + 1
        sizes = np.bincount(lab, minlength=n_regions)
        colors = np.zeros((n_regions, 3))
        for c in range(3):
            colors[:, c] = np.bincount(lab, weights=flat[:, c], minlength=n_regions) / sizes
        return sizes, colors

    def adjacency_pairs(lab2d):
        pairs = set()
        a = lab2d
        for shift in ((0, 1), (1, 0), (1, 1), (1, -1)):
            sy, sx = shift
            if sx >= 0:
                p = a[: h - sy if sy else h, : w - sx if sx else w]
                q = a[sy:, sx:]
            else:
                p = a[: h - sy, -sx:]
                q = a[sy:, :sx]
            diff = p != q
            pairs.update(zip(p[diff].tolist(), q[diff].tolist()))
        adj: dict[int, set[int]] = {}
        for x, y in pairs:
            adj.setdefault(x, set()).add(y)
            adj.setdefault(y, set()).add(x)
        return adj

    sizes, colors = region_stats(lab)
    while True:
        n_regions = len(sizes)
        if n_regions <= 1:
            break
        small = np.where(sizes < params.min_density)[0]
        if small.size == 0:
            break
        victim = small[np.argmin(sizes[small])]
        adj = adjacency_pairs(lab.reshape(h, w))
        neighbors = sorted(adj.get(victim, ()))
        if not neighbors:
            break
        dists = np.sum((colors[neighbors] - colors[victim]) ** 2, axis=1)
        target = neighbors[int(np.argmin(dists))]
        lab[lab == victim] = target
        # compact ids so bincount stays dense
        _, lab = np.unique(lab, return_inverse=True)
        sizes, colors = region_stats(lab)

    return SegmentedImage(labels=lab.reshape(h, w), region_colors=colors, region_sizes=sizes)


def mark_sky_most_common(seg: SegmentedImage) -> np.ndarray:
    """Mark every pixel whose region carries the color that is most common
    in the top half of the image.

    Regions with identical (rounded) mean colors share a bucket; ties go to
    the color whose member pixels sit higher in the frame.
    """
    h, w = seg.labels.shape
    keys = np.round(seg.region_colors, _COLOR_BUCKET_DECIMALS)
    _, bucket_of_region = np.unique(keys, axis=0, return_inverse=True)
    bucket = bucket_of_region[seg.labels]

    top = bucket[: h // 2]
    n_buckets = bucket_of_region.max() + 1
    top_counts = np.bincount(top.ravel(), minlength=n_buckets)

    rows = np.broadcast_to(np.arange(h)[:, None], (h, w))
    row_sum = np.bincount(bucket.ravel(), weights=rows.ravel(), minlength=n_buckets)
    all_counts = np.bincount(bucket.ravel(), minlength=n_buckets)
    mean_row = np.where(all_counts > 0, row_sum / np.maximum(all_counts, 1), np.inf)

    best = top_counts.max()
    tied = np.where(top_counts == best)[0]
    winner = tied[np.argmin(mean_row[tied])]
    return bucket == winner


def meanshift_mask(img: np.ndarray, params: MeanShiftParams) -> np.ndarray:
    """Full mean-shift sky mask: filter, fuse/prune, mark most common."""
    modes = meanshift_filter(img, params)
    seg = fuse_and_prune(modes, params)
    return mark_sky_most_common(seg)


def segmented_rgb(seg: SegmentedImage) -> np.ndarray:
    """Region-mean-colored rendering for debug dumps."""
    return np.rint(seg.region_colors_rgb[seg.labels]).astype(np.uint8)
