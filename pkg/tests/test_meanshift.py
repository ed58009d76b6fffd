import numpy as np
import pytest

from skymark.meanshift import (
    MEANSHIFT_PARAM_SETS,
    MeanShiftParams,
    SegmentedImage,
    fuse_and_prune,
    mark_sky_most_common,
    meanshift_filter,
    meanshift_mask,
)
from skymark.raster import rgb_to_luv


def _params(hs=3, hr=6.0, m=1):
    return MeanShiftParams(spatial_radius=hs, range_radius=hr, min_density=m)


class TestFilter:
    def test_flat_image_modes_equal_input(self):
        img = np.full((10, 10, 3), 120, dtype=np.uint8)
        modes = meanshift_filter(img, _params())
        assert np.allclose(modes, rgb_to_luv((120, 120, 120)), atol=1e-9)

    def test_well_separated_halves_keep_their_colors(self):
        # Luv distance far beyond the range radius: no window ever mixes
        img = np.zeros((12, 16, 3), dtype=np.uint8)
        img[:, :8] = (100, 140, 220)
        img[:, 8:] = (50, 40, 30)
        modes = meanshift_filter(img, _params(hs=3, hr=6.0))
        assert np.allclose(modes[:, :8], rgb_to_luv((100, 140, 220)), atol=1e-9)
        assert np.allclose(modes[:, 8:], rgb_to_luv((50, 40, 30)), atol=1e-9)

    def test_noisy_flat_modes_concentrate(self, rng):
        base = np.array([140, 150, 160], dtype=float)
        img = np.clip(base + rng.integers(-2, 3, (12, 12, 3)), 0, 255).astype(np.uint8)
        modes = meanshift_filter(img, _params(hs=4, hr=8.0))
        center = rgb_to_luv(base)
        dist = np.sqrt(np.sum((modes - center) ** 2, axis=-1))
        assert dist.max() < 8.0

    def test_deterministic(self):
        img = np.zeros((8, 8, 3), dtype=np.uint8)
        img[:4] = (90, 120, 200)
        img[4:] = (60, 50, 40)
        a = meanshift_filter(img, _params())
        b = meanshift_filter(img, _params())
        assert np.array_equal(a, b)


class TestFuseAndPrune:
    def test_two_far_colors_make_two_regions(self):
        modes = np.zeros((6, 8, 3))
        modes[:, :4] = (80.0, 10.0, 20.0)
        modes[:, 4:] = (20.0, -5.0, -30.0)
        seg = fuse_and_prune(modes, _params(hr=6.0, m=1))
        assert len(seg.region_sizes) == 2
        assert sorted(seg.region_sizes.tolist()) == [24, 24]

    def test_near_colors_fuse_to_one_region(self):
        modes = np.zeros((6, 8, 3))
        modes[:, :4] = (50.0, 0.0, 0.0)
        modes[:, 4:] = (52.0, 1.0, 0.0)
        seg = fuse_and_prune(modes, _params(hr=6.0, m=1))
        assert len(seg.region_sizes) == 1
        assert seg.region_sizes[0] == 48

    def test_small_region_merges_into_closest_color_neighbor(self):
        modes = np.zeros((8, 8, 3))
        modes[:, :4] = (50.0, 0.0, 0.0)
        modes[:, 4:] = (10.0, 0.0, 0.0)
        modes[0, 3] = (48.0, 0.0, 0.0)  # lone pixel, closest to the left region
        seg = fuse_and_prune(modes, _params(hr=1.0, m=4))
        assert len(seg.region_sizes) == 2
        left = seg.labels[0, 0]
        assert seg.labels[0, 3] == left
        assert seg.region_sizes[left] == 32

    def test_min_density_property(self, rng):
        modes = rng.integers(0, 4, (10, 10, 1)) * np.array([20.0, 0.0, 0.0])
        params = _params(hr=5.0, m=12)
        seg = fuse_and_prune(modes, params)
        if len(seg.region_sizes) > 1:
            assert seg.region_sizes.min() >= params.min_density

    def test_region_sizes_sum_to_pixels(self, rng):
        modes = rng.random((9, 7, 3)) * 100
        seg = fuse_and_prune(modes, _params(hr=3.0, m=5))
        assert seg.region_sizes.sum() == 63
        assert np.array_equal(np.bincount(seg.labels.ravel()), seg.region_sizes)


class TestMarkSky:
    def _seg(self, labels, colors):
        labels = np.asarray(labels)
        colors = np.asarray(colors, dtype=float)
        sizes = np.bincount(labels.ravel(), minlength=len(colors))
        return SegmentedImage(labels=labels, region_colors=colors, region_sizes=sizes)

    def test_top_half_majority_wins(self):
        labels = np.array([[0, 0], [0, 0], [1, 1], [1, 1]])
        seg = self._seg(labels, [(80, 5, 5), (20, 0, 0)])
        assert np.array_equal(mark_sky_most_common(seg), labels == 0)

    def test_tie_goes_to_higher_region(self):
        # both colors cover half of the top half; color of region 0 sits higher
        labels = np.array([[0, 1], [0, 1], [0, 1], [1, 1]])
        seg = self._seg(labels, [(80, 0, 0), (20, 0, 0)])
        assert np.array_equal(mark_sky_most_common(seg), labels == 0)

    def test_same_color_regions_marked_together(self):
        # regions 0 and 2 share a color; marking is image-wide by color
        labels = np.array([[0, 0, 0, 0], [1, 1, 1, 1], [2, 2, 1, 1], [1, 1, 1, 1]])
        seg = self._seg(labels, [(70, 3, 3), (30, 0, 0), (70, 3, 3)])
        expected = (labels == 0) | (labels == 2)
        assert np.array_equal(mark_sky_most_common(seg), expected)


class TestFullMask:
    @pytest.mark.parametrize("name", sorted(MEANSHIFT_PARAM_SETS))
    def test_clean_step_equals_truth(self, name, step_image):
        img, truth = step_image
        params = MeanShiftParams(*MEANSHIFT_PARAM_SETS[name])
        assert np.array_equal(meanshift_mask(img, params), truth)

    def test_flat_image_is_all_sky(self):
        img = np.full((10, 10, 3), 175, dtype=np.uint8)
        params = MeanShiftParams(*MEANSHIFT_PARAM_SETS["Mean_3_6_100"])
        assert meanshift_mask(img, params).all()

    def test_deterministic(self, step_image):
        img, _ = step_image
        params = MeanShiftParams(*MEANSHIFT_PARAM_SETS["Mean_7_6_100"])
        assert np.array_equal(meanshift_mask(img, params), meanshift_mask(img, params))

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            MeanShiftParams(0, 6.0, 100)
        with pytest.raises(ValueError):
            MeanShiftParams(3, 0.0, 100)
        with pytest.raises(ValueError):
            MeanShiftParams(3, 6.0, 0)
