import json

import numpy as np
import pytest

from skymark.floodfill import floodfill_mask
from skymark.kmeans_hsl import KMEANS_PARAM_SETS, KMeansHslParams, kmeans_hsl_mask
from skymark.meanshift import MEANSHIFT_PARAM_SETS, MeanShiftParams, meanshift_mask
from skymark.raster import MaskConvention, load_image, load_mask, sky_fraction
from skymark.synth import (
    DEFAULT_HEIGHT,
    DEFAULT_WIDTH,
    SCENE_CLASSES,
    LabeledScene,
    SceneSpec,
    make_corpus,
    render,
    save_scene,
)


def _spec(cls, horizon=36, palette_seed=5, rng_seed=9, noise=2.0, w=DEFAULT_WIDTH, h=DEFAULT_HEIGHT):
    return SceneSpec(
        scene_class=cls,
        width=w,
        height=h,
        horizon_row=horizon,
        palette_seed=palette_seed,
        noise_amplitude=noise,
        rng_seed=rng_seed,
    )


def _accuracy(mask, truth):
    return float(np.mean(mask == truth))


class TestSceneSpec:
    def test_unknown_class_rejected(self):
        with pytest.raises(ValueError):
            _spec("Nebula")

    def test_horizon_must_be_interior(self):
        with pytest.raises(ValueError):
            _spec("ClearGradient", horizon=0)
        with pytest.raises(ValueError):
            _spec("ClearGradient", horizon=DEFAULT_HEIGHT)


class TestRender:
    @pytest.mark.parametrize("cls", SCENE_CLASSES)
    def test_shapes_and_dtypes(self, cls):
        scene = render(_spec(cls))
        assert scene.image.shape == (DEFAULT_HEIGHT, DEFAULT_WIDTH, 3)
        assert scene.image.dtype == np.uint8
        assert scene.truth.shape == (DEFAULT_HEIGHT, DEFAULT_WIDTH)
        assert scene.truth.dtype == bool

    def test_clear_gradient_fraction_is_exactly_horizon_ratio(self):
        for horizon in (20, 36, 43):
            scene = render(_spec("ClearGradient", horizon=horizon))
            assert sky_fraction(scene.truth) == horizon / DEFAULT_HEIGHT

    @pytest.mark.parametrize("cls", SCENE_CLASSES)
    def test_deterministic(self, cls):
        a = render(_spec(cls))
        b = render(_spec(cls))
        assert np.array_equal(a.image, b.image)
        assert np.array_equal(a.truth, b.truth)

    def test_seeds_change_pixels(self):
        a = render(_spec("PatchyClouds", rng_seed=1))
        b = render(_spec("PatchyClouds", rng_seed=2))
        assert not np.array_equal(a.image, b.image)

    def test_palette_seed_changes_colors(self):
        a = render(_spec("ClearGradient", palette_seed=1, noise=0.0))
        b = render(_spec("ClearGradient", palette_seed=2, noise=0.0))
        assert not np.array_equal(a.image, b.image)

    @pytest.mark.parametrize("cls", SCENE_CLASSES)
    def test_truth_has_both_classes(self, cls):
        scene = render(_spec(cls))
        assert scene.truth.any() and not scene.truth.all()


class TestMakeCorpus:
    def test_counts_by_dict(self):
        scenes = make_corpus({"ClearGradient": 2, "Overcast": 3}, seed=7)
        classes = [s.spec.scene_class for s in scenes]
        assert classes == ["ClearGradient"] * 2 + ["Overcast"] * 3

    def test_counts_by_sequence(self):
        scenes = make_corpus([1, 1, 1, 1, 1], seed=7)
        assert [s.spec.scene_class for s in scenes] == list(SCENE_CLASSES)

    def test_same_seed_is_identical(self):
        a = make_corpus([1, 0, 1, 0, 0], seed=3)
        b = make_corpus([1, 0, 1, 0, 0], seed=3)
        for x, y in zip(a, b):
            assert x.spec == y.spec
            assert np.array_equal(x.image, y.image)

    def test_scenes_within_a_class_differ(self):
        a, b = make_corpus({"SkylineBlocks": 2}, seed=11)
        assert not np.array_equal(a.image, b.image)


class TestSaveScene:
    def test_round_trip(self, tmp_path):
        scene = render(_spec("TreeOcclusion"))
        paths = save_scene(scene, tmp_path, "s0")
        assert np.array_equal(load_image(paths["image_path"]), scene.image)
        mask = load_mask(paths["mask_path"], MaskConvention.WHITE_MASKED)
        assert np.array_equal(mask, scene.truth)
        spec_doc = json.loads((tmp_path / "s0_spec.json").read_text())
        assert spec_doc["scene_class"] == "TreeOcclusion"
        assert spec_doc["horizon_row"] == scene.spec.horizon_row


class TestClassTechniqueAffinity:
    """Each scene class is calibrated so a different technique family wins."""

    def _scenes(self, cls, n=2):
        return make_corpus({cls: n}, seed=17)

    def test_clear_gradient_suits_meanshift(self):
        for scene in self._scenes("ClearGradient"):
            for name, p in MEANSHIFT_PARAM_SETS.items():
                mask = meanshift_mask(scene.image, MeanShiftParams(*p))
                assert _accuracy(mask, scene.truth) >= 0.99, name

    def test_patchy_clouds_need_the_coarse_pruning_density(self):
        coarse = MeanShiftParams(*MEANSHIFT_PARAM_SETS["Mean_7_8_300"])
        fine = MeanShiftParams(*MEANSHIFT_PARAM_SETS["Mean_3_6_100"])
        for scene in self._scenes("PatchyClouds"):
            acc_coarse = _accuracy(meanshift_mask(scene.image, coarse), scene.truth)
            acc_fine = _accuracy(meanshift_mask(scene.image, fine), scene.truth)
            assert acc_coarse > 0.99
            assert acc_coarse > acc_fine

    def test_tree_occlusion_suits_kmeans_14(self):
        k14 = KMeansHslParams(*KMEANS_PARAM_SETS["K-mean_14"])
        for scene in self._scenes("TreeOcclusion"):
            acc_k = _accuracy(kmeans_hsl_mask(scene.image, k14, seed=0), scene.truth)
            for name, p in MEANSHIFT_PARAM_SETS.items():
                acc_m = _accuracy(meanshift_mask(scene.image, MeanShiftParams(*p)), scene.truth)
                assert acc_k > acc_m, name

    def test_overcast_defeats_floodfill_entirely(self):
        for scene in self._scenes("Overcast", n=1):
            assert floodfill_mask(scene.image).all()

    def test_tree_occlusion_seals_floodfill(self):
        for scene in self._scenes("TreeOcclusion", n=1):
            assert not floodfill_mask(scene.image).any()
