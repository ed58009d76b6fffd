"""Sobel gradient / hybrid probability sky detection.

Pipeline: grayscale Sobel gradient magnitude, energy-optimized sky/ground
boundary search over a fixed schedule of gradient thresholds, then a
three-factor probability map (color, gradient, vertical position) that is
thresholded into the Sobel_50 ... Sobel_95 mask variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import rgb_to_gray

# Boundary search and probability-model constants. The published method does
# not pin these down; they are fixed here so results are reproducible.
N_THRESHOLDS = 64          # geometric candidate schedule size
GAMMA = 2.0                # sky-term weight in the boundary energy
MAHALANOBIS_REG = 1e-3     # +eps*I on the sky color covariance
GRAD_MEAN_FLOOR = 1e-6
FALLBACK_DET_BOUND = 100.0  # whole-image homogeneity gate for the no-boundary case

SOBEL_THRESHOLDS = {
    "Sobel_50": 0.50,
    "Sobel_60": 0.60,
    "Sobel_70": 0.70,
    "Sobel_80": 0.80,
    "Sobel_90": 0.90,
    "Sobel_95": 0.95,
}


class NoBoundaryError(Exception):
    """No sky/ground boundary candidate produced two non-empty regions."""


@dataclass(frozen=True)
class SobelVariant:
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


def sobel_gradient(gray: np.ndarray) -> np.ndarray:
    """Gradient magnitude sqrt(Gx^2 + Gy^2) with 3x3 Sobel kernels and
    replicate border padding."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or gray.shape[0] < 3 or gray.shape[1] < 3:
        raise ValueError("image must be at least 3x3")
    p = np.pad(gray, 1, mode="edge")
    # Gx kernel [[-1,0,1],[-2,0,2],[-1,0,1]], Gy its transpose
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    return np.hypot(gx, gy)


def _region_energy_terms(pixels: np.ndarray) -> tuple[float, float]:
    """det and largest eigenvalue of the 3x3 RGB covariance of a region."""
    cov = np.cov(pixels.reshape(-1, 3).T, bias=True)
    cov = np.atleast_2d(cov)
    det = float(np.linalg.det(cov))
    lam = float(np.linalg.eigvalsh(cov)[-1])
    return det, lam


def boundary_energy(img: np.ndarray, boundary: np.ndarray) -> float:
    """Energy J of a per-column boundary: higher when the sky and ground
    regions it induces are each color-homogeneous."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    rows = np.arange(h)[:, None]
    sky = rows < boundary[None, :]
    if not sky.any() or sky.all():
        raise NoBoundaryError("boundary leaves an empty region")
    det_s, lam_s = _region_energy_terms(img[sky])
    det_g, lam_g = _region_energy_terms(img[~sky])
    denom = GAMMA * det_s + det_g + GAMMA * lam_s + lam_g
    return 1.0 / max(denom, 1e-12)


def _first_crossing_boundary(mag: np.ndarray, t: float) -> np.ndarray:
    """Per-column boundary: one row below the first top-down gradient
    crossing, so the edge pixel itself stays with the sky region; height
    when a column never crosses."""
    h, w = mag.shape
    hit = mag >= t
    first = np.argmax(hit, axis=0)
    none = ~hit.any(axis=0)
    b = np.minimum(first + 1, h)
    b[none] = h
    return b


def optimize_boundary(grad: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Pick the first-crossing boundary that maximizes the energy J over a
    geometric schedule of gradient thresholds.

    Raises NoBoundaryError when every candidate leaves an empty region
    (e.g. a constant image with no positive gradients).
    """
    mag = np.asarray(grad, dtype=np.float64)
    if mag.shape[0] < 3:
        raise ValueError("image must have at least 3 rows")
    positive = mag[mag > 0]
    if positive.size == 0:
        raise NoBoundaryError("image has no positive gradient")
    thresholds = np.geomspace(positive.min(), mag.max(), N_THRESHOLDS)

    best_b = None
    best_j = -np.inf
    for t in thresholds:
        b = _first_crossing_boundary(mag, t)
        try:
            j = boundary_energy(img, b)
        except NoBoundaryError:
            continue
        if j > best_j:
            best_j = j
            best_b = b
    if best_b is None:
        raise NoBoundaryError("all boundary candidates left an empty region")
    return best_b


def build_probability_map(img: np.ndarray, grad: np.ndarray, boundary: np.ndarray) -> np.ndarray:
    """Per-pixel sky probability: geometric mean of a color model
    (Mahalanobis distance to the sky region's color distribution), a
    gradient model, and a vertical position prior."""
    img = np.asarray(img, dtype=np.float64)
    mag = np.asarray(grad, dtype=np.float64)
    h, w = img.shape[:2]
    rows = np.arange(h)[:, None]
    sky = rows < np.asarray(boundary)[None, :]

    sky_px = img[sky].reshape(-1, 3)
    mean = sky_px.mean(axis=0)
    cov = np.atleast_2d(np.cov(sky_px.T, bias=True)) + MAHALANOBIS_REG * np.eye(3)
    inv = np.linalg.inv(cov)
    delta = img.reshape(-1, 3) - mean
    d2 = np.einsum("ij,jk,ik->i", delta, inv, delta).reshape(h, w)
    p_color = np.exp(-0.5 * d2)

    grad_mean = max(float(mag[sky].mean()), GRAD_MEAN_FLOOR)
    p_grad = np.exp(-mag / grad_mean)

    p_pos = 1.0 - rows / (h - 1.0)
    p_pos = np.broadcast_to(p_pos, (h, w))

    p = (p_color * p_grad * p_pos) ** (1.0 / 3.0)
    return np.clip(p, 0.0, 1.0)


def sky_probability_map(img: np.ndarray) -> np.ndarray:
    """Full chain from an RGB image to its sky probability map.

    Raises NoBoundaryError for boundary-free images; callers decide the
    whole-image fallback.
    """
    gray = rgb_to_gray(img)
    grad = sobel_gradient(gray)
    boundary = optimize_boundary(grad, img)
    return build_probability_map(img, grad, boundary)


def _homogeneous_fallback(img: np.ndarray) -> bool:
    cov = np.atleast_2d(np.cov(np.asarray(img, dtype=np.float64).reshape(-1, 3).T, bias=True))
    return float(np.linalg.det(cov)) < FALLBACK_DET_BOUND


def sobel_prob_mask(img: np.ndarray, variant: SobelVariant) -> np.ndarray:
    """Threshold the probability map at the variant's threshold.

    Boundary-free images fall back to all-sky when the whole image passes
    the color homogeneity check, else all-ground.
    """
    img = np.asarray(img)
    try:
        p = sky_probability_map(img)
    except NoBoundaryError:
        value = _homogeneous_fallback(img)
        return np.full(img.shape[:2], value, dtype=bool)
    return p > variant.threshold


def mask_from_probability(p: np.ndarray, variant: SobelVariant) -> np.ndarray:
    """Threshold an already-built probability map (shared across variants)."""
    return np.asarray(p) > variant.threshold


def probability_map_to_png_array(p: np.ndarray) -> np.ndarray:
    """8-bit grayscale rendering of a probability map for debugging."""
    return np.rint(np.asarray(p) * 255.0).astype(np.uint8)
