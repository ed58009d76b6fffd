"""Parametric synthetic outdoor scenes with exact analytic ground truth.

Five scene classes cover the qualitative regimes outdoor imagery presents
(clear gradient sky, patchy clouds, overcast haze, tree canopies, building
skylines). Parameters are tuned so that no single detection technique wins
every class. Truth masks are set during rendering from the geometry alone,
never by running a detector.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .raster import save_image, save_mask, MaskConvention

SCENE_CLASSES = (
    "ClearGradient",
    "PatchyClouds",
    "Overcast",
    "TreeOcclusion",
    "SkylineBlocks",
)

DEFAULT_WIDTH = 96
DEFAULT_HEIGHT = 72


@dataclass(frozen=True)
class SceneSpec:
    scene_class: str
    width: int
    height: int
    horizon_row: int
    palette_seed: int
    noise_amplitude: float
    rng_seed: int

    def __post_init__(self):
        if self.scene_class not in SCENE_CLASSES:
            raise ValueError(f"unknown scene class {self.scene_class!r}")
        if not 0 < self.horizon_row < self.height:
            raise ValueError("horizon_row must lie strictly inside the image")


@dataclass(frozen=True)
class LabeledScene:
    image: np.ndarray  # HxWx3 uint8
    truth: np.ndarray  # HxW bool
    spec: SceneSpec


def _finish(img: np.ndarray, noise_mask: np.ndarray, amp: float, rng) -> np.ndarray:
    if amp > 0:
        noise = rng.uniform(-amp, amp, size=img.shape)
        img = img + noise * noise_mask[..., None]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _jitter(pal, base, amp=6.0):
    return np.clip(np.asarray(base, dtype=np.float64) + pal.uniform(-amp, amp, size=3), 0, 255)


def _render_clear_gradient(spec: SceneSpec, pal, rng):
    w, h, r = spec.width, spec.height, spec.horizon_row
    sky_top = _jitter(pal, (70, 110, 200))
    sky_bot = _jitter(pal, (130, 165, 225))
    ground = _jitter(pal, (75, 60, 50))

    img = np.empty((h, w, 3))
    t = (np.arange(r) / max(r - 1, 1))[:, None]
    img[:r] = (sky_top[None, :] * (1 - t) + sky_bot[None, :] * t)[:, None, :]
    img[r:] = ground

    # the truth mask is exactly the rows above the horizon, so
    # sky_fraction(truth) == horizon_row / height
    truth = np.zeros((h, w), dtype=bool)
    truth[:r] = True

    return _finish(img, np.ones((h, w)), spec.noise_amplitude, rng), truth


def _render_patchy_clouds(spec: SceneSpec, pal, rng):
    w, h, r = spec.width, spec.height, spec.horizon_row
    sky = _jitter(pal, (110, 150, 210), amp=5.0)
    ground = _jitter(pal, (70, 55, 45))
    water = _jitter(pal, (60, 75, 105), amp=4.0)
    # bright bluish-white cumulus, far from the sky color in Luv so no
    # range radius fuses it; the winning variant absorbs it by pruning
    bluish_cloud = np.clip(sky + np.asarray((50.0, 35.0, 15.0)), 0, 255)
    # warm sunset cloud: fails every HSL candidate branch, so hue-based
    # marking misses it no matter the cluster-size gate
    warm_cloud = _jitter(pal, (235, 200, 170), amp=3.0)

    img = np.empty((h, w, 3))
    img[:r] = sky
    img[r:] = ground

    truth = np.zeros((h, w), dtype=bool)
    truth[:r] = True

    # cloud areas sit strictly between the two largest pruning densities
    # (210, 300): only the 300 variant merges clouds back into the sky
    yy, xx = np.mgrid[0:h, 0:w]
    for i, cx0 in enumerate((16, 48, 80)):
        cy = rng.integers(10, max(11, r - 9))
        cx = cx0 + int(rng.integers(-3, 4))
        a = float(rng.integers(10, 13))
        b = rng.uniform(235.0, 275.0) / (np.pi * a)
        blob = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 < 1.0
        blob &= yy < r
        img[blob] = warm_cloud if i == 1 else bluish_cloud

    # blue-hued water strip on the ground as a hue-band distractor
    img[h - 8 : h - 3, 20:80] = water

    return _finish(img, np.ones((h, w)), spec.noise_amplitude, rng), truth


def _render_overcast(spec: SceneSpec, pal, rng):
    # edge-free by construction: uniform warm-grey sky and a ramp whose
    # post-resize Sobel magnitude stays below the flood-fill edge floor
    w, h, r = spec.width, spec.height, spec.horizon_row
    shift = round(pal.uniform(-5.0, 5.0))
    sky = np.clip(np.asarray((200.0, 185.0, 160.0)) + shift, 0, 255)

    img = np.empty((h, w, 3))
    img[:r] = sky
    # dusk ramp: exactly one channel steps down by one level per row, so
    # the post-rescale gradient magnitude stays under the flood-fill edge
    # floor (the worst single-channel luma weight is 0.587)
    color = sky.copy()
    for row in range(r, h):
        color = color.copy()
        color[(row - r) % 3] -= 1.0
        img[row] = color

    truth = np.zeros((h, w), dtype=bool)
    truth[:r] = True
    return _finish(img, np.ones((h, w)), 0.0, rng), truth


def _contrast_strip(w: int, pal) -> np.ndarray:
    """Two rows of single-pixel-period dark/bright warm alternation.

    The profile's extrema sit exactly on source pixel centers, so after the
    512x512 rescale every sampled top-row pixel lands at least 1/32 source
    pixel away from an extremum and keeps a Sobel response above the
    relative edge threshold, sealing the flood fill along the whole top.
    """
    dark = np.asarray((20.0, 10.0, 5.0))
    bright = np.asarray((255.0, 210.0, 130.0)) + pal.uniform(-4.0, 0.0)
    phase = (np.arange(w) % 2).astype(np.float64)
    row = dark[None, :] * (1 - phase[:, None]) + bright[None, :] * phase[:, None]
    return np.broadcast_to(row[None, :, :], (2, w, 3)).copy()


def _render_tree_occlusion(spec: SceneSpec, pal, rng):
    w, h, r = spec.width, spec.height, spec.horizon_row
    sky = _jitter(pal, (110, 150, 210), amp=5.0)
    canopy = _jitter(pal, (85, 90, 40), amp=5.0)
    ground = _jitter(pal, (55, 45, 40))
    # dull haze pockets: only K-mean_14's lower grey-lightness bound admits them
    haze = _jitter(pal, (190, 182, 172), amp=2.0)

    img = np.empty((h, w, 3))
    img[:r] = sky
    img[r:] = ground
    truth = np.zeros((h, w), dtype=bool)
    truth[:r] = True

    # canopy blobs hanging from the top, with dithered edges
    yy, xx = np.mgrid[0:h, 0:w]
    canopy_mask = np.zeros((h, w), dtype=bool)
    for _ in range(7):
        cy = rng.integers(0, max(1, int(r * 0.45)))
        cx = rng.integers(5, w - 5)
        a = rng.integers(10, 16)
        b = rng.integers(7, 11)
        d2 = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2
        canopy_mask |= d2 < 1.0
        ring = (d2 >= 1.0) & (d2 < 1.35)
        canopy_mask |= ring & (rng.random((h, w)) < 0.5)
    canopy_mask[r:] = False
    img[canopy_mask] = canopy
    truth[canopy_mask] = False

    # haze pockets (true sky) in the lower sky; drawn over the canopy so
    # their area is fixed, and large enough to clear any cluster-size gate
    for cx in (int(w * 0.22), int(w * 0.65)):
        hy = int(rng.integers(int(r * 0.5), max(int(r * 0.5) + 1, r - 21)))
        hx = cx + int(rng.integers(-4, 5))
        img[hy : hy + 20, hx : hx + 22] = haze
        truth[hy : hy + 20, hx : hx + 22] = True

    img[:2] = _contrast_strip(w, pal)
    truth[:2] = False

    return _finish(img, truth.astype(float), spec.noise_amplitude, rng), truth


def _render_skyline_blocks(spec: SceneSpec, pal, rng):
    w, h, r = spec.width, spec.height, spec.horizon_row
    sky = _jitter(pal, (110, 150, 210), amp=5.0)
    ground = _jitter(pal, (70, 60, 50))

    img = np.empty((h, w, 3))
    img[:r] = sky
    img[r:] = ground
    truth = np.zeros((h, w), dtype=bool)
    truth[:r] = True

    tallest_top, tallest_span = r, (0, 0)
    x = 6
    for _ in range(3):
        bw = int(rng.integers(10, 17))
        top = int(r - rng.integers(12, min(27, r - 4)))
        x = x + int(rng.integers(0, 10))
        if x + bw >= w - 4:
            break
        facade = _jitter(pal, (60, 70, 95), amp=5.0)  # blue-grey: hue-band bait
        img[top:r, x : x + bw] = facade
        truth[top:r, x : x + bw] = False
        if top < tallest_top:
            tallest_top, tallest_span = top, (x, x + bw)
        x += bw + 8

    # rooftop haze box (not sky): 120 px sits between the pruning densities
    # 100 and 210, so only the coarser mean-shift variants absorb it
    box = np.clip(sky + np.asarray((40.0, 28.0, 12.0)), 0, 255)
    bx0, bx1 = tallest_span
    if bx1 - bx0 >= 10:
        cx0 = (bx0 + bx1) // 2 - 5
        by0 = max(2, tallest_top - 12)
        img[by0:tallest_top, cx0 : cx0 + 10] = box
        truth[by0:tallest_top, cx0 : cx0 + 10] = False

    # small warm glow (true sky, under every pruning density): mean-shift
    # merges it back into the sky but no HSL branch admits it
    glow = _jitter(pal, (200, 170, 150), amp=3.0)
    for _ in range(30):
        gy = int(rng.integers(int(r * 0.4), r - 8))
        gx = int(rng.integers(8, w - 24))
        if truth[gy - 1 : gy + 7, gx - 1 : gx + 16].all():
            img[gy : gy + 6, gx : gx + 15] = glow
            break

    return _finish(img, np.ones((h, w)), spec.noise_amplitude, rng), truth


_RENDERERS = {
    "ClearGradient": _render_clear_gradient,
    "PatchyClouds": _render_patchy_clouds,
    "Overcast": _render_overcast,
    "TreeOcclusion": _render_tree_occlusion,
    "SkylineBlocks": _render_skyline_blocks,
}

# per-class horizon fraction range and pixel noise amplitude
_CLASS_PROFILES = {
    "ClearGradient": ((0.45, 0.60), 4.0),
    "PatchyClouds": ((0.50, 0.62), 2.0),
    "Overcast": ((0.20, 0.28), 0.0),
    "TreeOcclusion": ((0.50, 0.60), 3.0),
    "SkylineBlocks": ((0.52, 0.62), 2.0),
}


def render(spec: SceneSpec) -> LabeledScene:
    """Render a scene and its analytic truth mask; bit-identical per spec."""
    pal = np.random.default_rng(spec.palette_seed)
    rng = np.random.default_rng(spec.rng_seed)
    img, truth = _RENDERERS[spec.scene_class](spec, pal, rng)
    return LabeledScene(image=img, truth=truth, spec=spec)


def make_corpus(
    counts,
    seed: int,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> list[LabeledScene]:
    """Deterministic corpus; `counts` maps scene class to scene count (or is
    a sequence in SCENE_CLASSES order). Per-scene jitter comes from the
    corpus seed."""
    if not isinstance(counts, dict):
        counts = dict(zip(SCENE_CLASSES, counts))
    rng = np.random.default_rng(seed)
    scenes = []
    for cls in SCENE_CLASSES:
        (frac_lo, frac_hi), noise = _CLASS_PROFILES[cls]
        for _ in range(int(counts.get(cls, 0))):
            horizon = int(rng.uniform(frac_lo, frac_hi) * height)
            spec = SceneSpec(
                scene_class=cls,
                width=width,
                height=height,
                horizon_row=horizon,
                palette_seed=int(rng.integers(2**31)),
                noise_amplitude=noise,
                rng_seed=int(rng.integers(2**31)),
            )
            scenes.append(render(spec))
    return scenes


def save_scene(scene: LabeledScene, directory, stem: str) -> dict:
    """Write image PNG, white-marker mask PNG, and spec JSON; returns the
    manifest-ready paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    img_path = directory / f"{stem}.png"
    mask_path = directory / f"{stem}_mask.png"
    spec_path = directory / f"{stem}_spec.json"
    save_image(scene.image, img_path)
    save_mask(scene.truth, mask_path, MaskConvention.WHITE_MASKED)
    spec_path.write_text(json.dumps(asdict(scene.spec), indent=2) + "\n")
    return {"image_path": str(img_path), "mask_path": str(mask_path), "spec_path": str(spec_path)}
