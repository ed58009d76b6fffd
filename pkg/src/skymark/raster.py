"""Image and mask representation, color conversions, and mask encoding.

Images are HxWx3 uint8 numpy arrays (RGB). Sky masks are HxW boolean
arrays (True = sky). All functions here are pure.
"""

from __future__ import annotations

import enum

import numpy as np
from PIL import Image

# BT.601 luma weights
GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])

# D65 reference white for CIE L*u*v*
_XN, _YN, _ZN = 0.95047, 1.0, 1.08883
_UN = 4.0 * _XN / (_XN + 15.0 * _YN + 3.0 * _ZN)
_VN = 9.0 * _YN / (_XN + 15.0 * _YN + 3.0 * _ZN)

_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)


class MaskConvention(enum.Enum):
    """Marker colors used to encode sky pixels in validation imagery."""

    BLUE_MARKED = (0, 0, 255)
    WHITE_MASKED = (255, 255, 255)

    @classmethod
    def from_name(cls, name: str) -> "MaskConvention":
        key = name.strip().lower()
        if key in ("blue", "blue_marked", "bluemarked"):
            return cls.BLUE_MARKED
        if key in ("white", "white_masked", "whitemasked"):
            return cls.WHITE_MASKED
        raise ValueError(f"unknown mask convention: {name!r} (use 'blue' or 'white')")


def _as_float(rgb) -> np.ndarray:
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.shape[-1] != 3:
        raise ValueError("expected trailing dimension of 3 (RGB)")
    return arr


def rgb_to_hsl(rgb) -> np.ndarray:
    """Convert RGB in [0,255] to HSL with h in [0,1), s and l in [0,1].

    Standard bi-hexcone model; h is 0 for achromatic input.
    Accepts any (..., 3) array or a single triple.
    """
    arr = _as_float(rgb) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    cmax = np.max(arr, axis=-1)
    cmin = np.min(arr, axis=-1)
    delta = cmax - cmin

    lit = (cmax + cmin) / 2.0
    denom = 1.0 - np.abs(2.0 * lit - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(delta > 0, delta / np.where(denom > 0, denom, 1.0), 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(delta > 0, delta, 1.0)
        hr = ((g - b) / safe) % 6.0
        hg = (b - r) / safe + 2.0
        hb = (r - g) / safe + 4.0
    hue = np.where(cmax == r, hr, np.where(cmax == g, hg, hb)) / 6.0
    hue = np.where(delta > 0, hue % 1.0, 0.0)

    return np.stack([hue, sat, lit], axis=-1)


def hsl_to_rgb(hsl) -> np.ndarray:
    """Inverse of rgb_to_hsl; returns float RGB in [0,255]."""
    arr = np.asarray(hsl, dtype=np.float64)
    h, s, lit = arr[..., 0] % 1.0, arr[..., 1], arr[..., 2]
    c = (1.0 - np.abs(2.0 * lit - 1.0)) * s
    hp = h * 6.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    zeros = np.zeros_like(c)
    conds = [hp < 1, hp < 2, hp < 3, hp < 4, hp < 5, hp >= 5]
    r1 = np.select(conds, [c, x, zeros, zeros, x, c])
    g1 = np.select(conds, [x, c, c, x, zeros, zeros])
    b1 = np.select(conds, [zeros, zeros, x, c, c, x])
    m = lit - c / 2.0
    return np.stack([r1 + m, g1 + m, b1 + m], axis=-1) * 255.0


def rgb_to_gray(rgb) -> np.ndarray:
    """BT.601 luminance in [0,255], real-valued (not rounded)."""
    return _as_float(rgb) @ GRAY_WEIGHTS


def rgb_to_luv(rgb) -> np.ndarray:
    """Convert RGB in [0,255] to CIE 1976 L*u*v* under D65."""
    arr = _as_float(rgb) / 255.0
    lin = np.where(arr <= 0.04045, arr / 12.92, ((arr + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _SRGB_TO_XYZ.T
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]

    yr = y / _YN
    lstar = np.where(yr > (6.0 / 29.0) ** 3, 116.0 * np.cbrt(yr) - 16.0, (29.0 / 3.0) ** 3 * yr)

    denom = x + 15.0 * y + 3.0 * z
    safe = np.where(denom > 0, denom, 1.0)
    up = np.where(denom > 0, 4.0 * x / safe, _UN)
    vp = np.where(denom > 0, 9.0 * y / safe, _VN)
    ustar = 13.0 * lstar * (up - _UN)
    vstar = 13.0 * lstar * (vp - _VN)
    return np.stack([lstar, ustar, vstar], axis=-1)


def luv_to_rgb(luv) -> np.ndarray:
    """Approximate inverse of rgb_to_luv; returns float RGB clipped to [0,255]."""
    arr = np.asarray(luv, dtype=np.float64)
    lstar, ustar, vstar = arr[..., 0], arr[..., 1], arr[..., 2]
    safe_l = np.where(lstar > 0, lstar, 1.0)
    up = np.where(lstar > 0, ustar / (13.0 * safe_l) + _UN, _UN)
    vp = np.where(lstar > 0, vstar / (13.0 * safe_l) + _VN, _VN)
    y = np.where(lstar > 8.0, _YN * ((lstar + 16.0) / 116.0) ** 3, _YN * lstar * (3.0 / 29.0) ** 3)
    safe_vp = np.where(vp > 0, vp, 1.0)
    x = np.where(vp > 0, y * 9.0 * up / (4.0 * safe_vp), 0.0)
    z = np.where(vp > 0, y * (12.0 - 3.0 * up - 20.0 * vp) / (4.0 * safe_vp), 0.0)
    xyz = np.stack([x, y, z], axis=-1)
    lin = xyz @ np.linalg.inv(_SRGB_TO_XYZ).T
    lin = np.clip(lin, 0.0, 1.0)
    srgb = np.where(lin <= 0.0031308, lin * 12.92, 1.055 * lin ** (1.0 / 2.4) - 0.055)
    return np.clip(srgb * 255.0, 0.0, 255.0)


def decode_mask(img: np.ndarray, conv: MaskConvention) -> np.ndarray:
    """True exactly where a pixel equals the convention's marker color."""
    marker = np.array(conv.value, dtype=np.uint8)
    return np.all(np.asarray(img) == marker, axis=-1)


def encode_mask(img: np.ndarray, mask: np.ndarray, conv: MaskConvention) -> np.ndarray:
    """Replace sky pixels with the marker color, leaving others unchanged."""
    img = np.asarray(img)
    mask = np.asarray(mask, dtype=bool)
    if img.shape[:2] != mask.shape:
        raise ValueError(f"image {img.shape[:2]} and mask {mask.shape} dimensions differ")
    out = img.copy()
    out[mask] = np.array(conv.value, dtype=img.dtype)
    return out


def sky_fraction(mask: np.ndarray) -> float:
    """Fraction of mask bits that are sky."""
    mask = np.asarray(mask, dtype=bool)
    return float(np.count_nonzero(mask)) / mask.size


def _sample_coords(dst: int, src: int) -> np.ndarray:
    # pixel-center mapping: d -> (d + 0.5) * src/dst - 0.5
    return (np.arange(dst) + 0.5) * (src / dst) - 0.5


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resample to width x height (aspect not preserved).

    Works on HxW or HxWxC arrays; returns float64.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    ys = np.clip(_sample_coords(height, h), 0.0, h - 1.0)
    xs = np.clip(_sample_coords(width, w), 0.0, w - 1.0)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    if img.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def resize_nearest_mask(mask: np.ndarray, width: int, height: int) -> np.ndarray:
    """Nearest-neighbor mask resample; preserves binarity."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    ys = np.clip(np.rint(_sample_coords(height, h)).astype(int), 0, h - 1)
    xs = np.clip(np.rint(_sample_coords(width, w)).astype(int), 0, w - 1)
    return mask[np.ix_(ys, xs)]


def load_image(path) -> np.ndarray:
    """Load a PNG/JPEG file as an HxWx3 uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image(img: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="RGB").save(path)


def load_mask(path, conv: MaskConvention) -> np.ndarray:
    return decode_mask(load_image(path), conv)


def save_mask(mask: np.ndarray, path, conv: MaskConvention = MaskConvention.WHITE_MASKED) -> None:
    """Store a mask as a marker-colored PNG on a black background."""
    mask = np.asarray(mask, dtype=bool)
    canvas = np.zeros(mask.shape + (3,), dtype=np.uint8)
    save_image(encode_mask(canvas, mask, conv), path)
