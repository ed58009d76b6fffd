"""Registry of the 13 selectable sky-detection technique variants plus the
Sobel/flood-fill benchmark, keyed by their published designations.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import floodfill, kmeans_hsl, meanshift, sobel_prob

# Fixed seed for the K-means variants so every route to the same technique
# produces bit-identical masks.
KMEANS_TECHNIQUE_SEED = 0

BENCHMARK = "Sobel/flood-fill"
_BENCHMARK_ALIASES = {"sobel/flood-fill", "sobel-floodfill", "sobel_floodfill"}

# Table-order designations of the 13 selectable variants. The benchmark is
# deliberately excluded from selector training.
TECHNIQUES: tuple[str, ...] = (
    "Sobel_50",
    "Sobel_60",
    "Sobel_70",
    "Sobel_80",
    "Sobel_90",
    "Sobel_95",
    "Mean_7_8_300",
    "Mean_3_6_100",
    "Mean_5_7_210",
    "Mean_7_6_100",
    "K-mean_12",
    "K-mean_6",
    "K-mean_14",
)

ALL_NAMES: tuple[str, ...] = TECHNIQUES + (BENCHMARK,)

MaskFn = Callable[[np.ndarray], np.ndarray]


def _sobel_fn(name: str) -> MaskFn:
    variant = sobel_prob.SobelVariant(sobel_prob.SOBEL_THRESHOLDS[name])
    return lambda img: sobel_prob.sobel_prob_mask(img, variant)


def _meanshift_fn(name: str) -> MaskFn:
    params = meanshift.MeanShiftParams(*meanshift.MEANSHIFT_PARAM_SETS[name])
    return lambda img: meanshift.meanshift_mask(img, params)


def _kmeans_fn(name: str) -> MaskFn:
    params = kmeans_hsl.KMeansHslParams(*kmeans_hsl.KMEANS_PARAM_SETS[name])
    return lambda img: kmeans_hsl.kmeans_hsl_mask(img, params, KMEANS_TECHNIQUE_SEED)


_REGISTRY: dict[str, MaskFn] = {}
for _name in sobel_prob.SOBEL_THRESHOLDS:
    _REGISTRY[_name] = _sobel_fn(_name)
for _name in meanshift.MEANSHIFT_PARAM_SETS:
    _REGISTRY[_name] = _meanshift_fn(_name)
for _name in kmeans_hsl.KMEANS_PARAM_SETS:
    _REGISTRY[_name] = _kmeans_fn(_name)
_REGISTRY[BENCHMARK] = floodfill.floodfill_mask


def resolve_name(name: str) -> str:
    """Map a user-supplied technique name to its canonical designation."""
    if name in _REGISTRY:
        return name
    if name.lower() in _BENCHMARK_ALIASES:
        return BENCHMARK
    raise KeyError(
        f"unknown technique {name!r}; valid names: {', '.join(ALL_NAMES)}"
    )


def get_technique(name: str) -> MaskFn:
    return _REGISTRY[resolve_name(name)]


def run_technique(name: str, img: np.ndarray) -> np.ndarray:
    return get_technique(name)(img)


def run_all_selectable(img: np.ndarray) -> dict[str, np.ndarray]:
    """Masks from all 13 selectable variants, sharing one Sobel probability
    map across the six threshold variants."""
    out: dict[str, np.ndarray] = {}
    try:
        prob = sobel_prob.sky_probability_map(img)
        for name, theta in sobel_prob.SOBEL_THRESHOLDS.items():
            out[name] = sobel_prob.mask_from_probability(prob, sobel_prob.SobelVariant(theta))
    except sobel_prob.NoBoundaryError:
        for name in sobel_prob.SOBEL_THRESHOLDS:
            out[name] = _REGISTRY[name](img)
    for name in meanshift.MEANSHIFT_PARAM_SETS:
        out[name] = _REGISTRY[name](img)
    for name in kmeans_hsl.KMEANS_PARAM_SETS:
        out[name] = _REGISTRY[name](img)
    return out
