"""Benchmark sky detector: rescale to 512x512, Sobel edge mask, flood fill
from the top row, then upscale the mask back to the input size.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .raster import resize_bilinear, resize_nearest_mask, rgb_to_gray
from .sobel_prob import sobel_gradient

SIZE = 512
EDGE_REL_THRESHOLD = 0.1
EDGE_THRESHOLD_FLOOR = 1.0

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def resize_512(img: np.ndarray) -> np.ndarray:
    """Bilinear resample to exactly 512x512 (aspect not preserved).

    Returns float64 so downstream gradients are not quantized.
    """
    return resize_bilinear(np.asarray(img, dtype=np.float64), SIZE, SIZE)


def edge_mask(img: np.ndarray) -> np.ndarray:
    """Edges: Sobel magnitude of the grayscale image at or above one tenth
    of the image's maximum magnitude (floored at 1.0)."""
    img = np.asarray(img)
    if img.shape[:2] != (SIZE, SIZE):
        raise ValueError(f"expected {SIZE}x{SIZE} image, got {img.shape[:2]}")
    mag = sobel_gradient(rgb_to_gray(img))
    threshold = max(EDGE_REL_THRESHOLD * float(mag.max()), EDGE_THRESHOLD_FLOOR)
    return mag >= threshold


def floodfill_sky(edges: np.ndarray) -> np.ndarray:
    """4-connected flood fill of non-edge pixels seeded from every non-edge
    pixel of the top row; filled pixels are sky."""
    edges = np.asarray(edges, dtype=bool)
    open_px = ~edges
    labels, _ = ndimage.label(open_px, structure=_FOUR_CONNECTED)
    seeds = np.unique(labels[0][open_px[0]])
    return np.isin(labels, seeds[seeds > 0])


def floodfill_mask(img: np.ndarray) -> np.ndarray:
    """Benchmark mask at the original image resolution."""
    img = np.asarray(img)
    small = resize_512(img)
    sky = floodfill_sky(edge_mask(small))
    h, w = img.shape[:2]
    return resize_nearest_mask(sky, w, h)
