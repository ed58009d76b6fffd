"""Stitch six 640x640 cube-face tiles into a single 1280x960 panorama.

The output is an equirectangular rendering (360 degrees horizontal, 180
vertical, anisotropic pixels): each output pixel's view direction is
inverse-mapped onto the dominant cube face and sampled bilinearly.
"""

from __future__ import annotations

import numpy as np

TILE_SIZE = 640
OUT_WIDTH = 1280
OUT_HEIGHT = 960

FACE_NAMES = ("up", "down", "left", "right", "front", "back")


def _face_coords(dx, dy, dz):
    """Per-pixel face index and in-face coordinates s,t in [-1, 1].

    Convention: +z front, +x right, +y up; s grows rightward and t downward
    on every face when viewed from the cube center.
    """
    ax, ay, az = np.abs(dx), np.abs(dy), np.abs(dz)
    face = np.full(dx.shape, -1, dtype=np.int8)
    s = np.zeros(dx.shape)
    t = np.zeros(dx.shape)

    sel = (ay >= ax) & (ay >= az) & (dy > 0)  # up
    face[sel] = 0
    s[sel] = dx[sel] / ay[sel]
    t[sel] = dz[sel] / ay[sel]

    sel = (ay >= ax) & (ay >= az) & (dy <= 0) & (ay > 0)  # down
    face[sel] = 1
    s[sel] = dx[sel] / ay[sel]
    t[sel] = -dz[sel] / ay[sel]

    sel = (face < 0) & (ax >= az) & (dx <= 0)  # left
    face[sel] = 2
    s[sel] = dz[sel] / ax[sel]
    t[sel] = -dy[sel] / ax[sel]

    sel = (face < 0) & (ax >= az) & (dx > 0)  # right
    face[sel] = 3
    s[sel] = -dz[sel] / ax[sel]
    t[sel] = -dy[sel] / ax[sel]

    sel = (face < 0) & (dz > 0)  # front
    face[sel] = 4
    s[sel] = dx[sel] / az[sel]
    t[sel] = -dy[sel] / az[sel]

    sel = face < 0  # back
    face[sel] = 5
    s[sel] = -dx[sel] / np.maximum(az[sel], 1e-12)
    t[sel] = -dy[sel] / np.maximum(az[sel], 1e-12)

    return face, s, t


def _bilinear_gather(tile: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    n = TILE_SIZE
    px = np.clip(px, 0.0, n - 1.0)
    py = np.clip(py, 0.0, n - 1.0)
    x0 = np.floor(px).astype(int)
    y0 = np.floor(py).astype(int)
    x1 = np.minimum(x0 + 1, n - 1)
    y1 = np.minimum(y0 + 1, n - 1)
    wx = (px - x0)[..., None]
    wy = (py - y0)[..., None]
    tile = tile.astype(np.float64)
    top = tile[y0, x0] * (1 - wx) + tile[y0, x1] * wx
    bot = tile[y1, x0] * (1 - wx) + tile[y1, x1] * wx
    return top * (1 - wy) + bot * wy


def stitch_cube(tiles: dict) -> np.ndarray:
    """Equirectangular 1280x960 uint8 image from six named 640x640 tiles."""
    if set(tiles) != set(FACE_NAMES):
        raise ValueError(f"need exactly the six tiles {FACE_NAMES}, got {sorted(tiles)}")
    stack = []
    for name in FACE_NAMES:
        tile = np.asarray(tiles[name])
        if tile.shape != (TILE_SIZE, TILE_SIZE, 3):
            raise ValueError(f"tile {name!r} must be {TILE_SIZE}x{TILE_SIZE}x3, got {tile.shape}")
        stack.append(tile)
    stack = np.stack(stack)

    xs = (np.arange(OUT_WIDTH) + 0.5) / OUT_WIDTH * 2.0 * np.pi - np.pi
    ys = np.pi / 2.0 - (np.arange(OUT_HEIGHT) + 0.5) / OUT_HEIGHT * np.pi
    lon = xs[None, :]
    lat = ys[:, None]
    dx = np.cos(lat) * np.sin(lon)
    dy = np.sin(lat) * np.ones_like(lon)
    dz = np.cos(lat) * np.cos(lon)

    face, s, t = _face_coords(dx, dy, dz)
    px = (s + 1.0) / 2.0 * TILE_SIZE - 0.5
    py = (t + 1.0) / 2.0 * TILE_SIZE - 0.5

    out = np.zeros((OUT_HEIGHT, OUT_WIDTH, 3))
    for i in range(6):
        sel = face == i
        if sel.any():
            out[sel] = _bilinear_gather(stack[i], px[sel], py[sel])
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
