import numpy as np
import pytest

from skymark.kmeans_hsl import (
    KMEANS_PARAM_SETS,
    Clustering,
    KMeansHslParams,
    _kmeanspp_init,
    hsl_is_candidate,
    kmeans_cluster,
    kmeans_hsl_mask,
    select_sky_clusters,
)
from skymark.raster import hsl_to_rgb


def _params(name="K-mean_6"):
    return KMeansHslParams(*KMEANS_PARAM_SETS[name])


def _sse(points, centers):
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return float(d2.min(axis=1).sum())


class TestKmeansCluster:
    def test_two_colors_recovered_exactly(self, step_image):
        img, truth = step_image
        c = kmeans_cluster(img, 2, seed=0)
        got = sorted(map(tuple, np.rint(c.centroids).astype(int).tolist()))
        assert got == [(50, 40, 30), (100, 140, 220)]
        sky_label = c.labels[0, 0]
        assert np.array_equal(c.labels == sky_label, truth)

    def test_k_reduced_to_distinct_colors(self):
        img = np.full((6, 6, 3), 99, dtype=np.uint8)
        c = kmeans_cluster(img, 6, seed=0)
        assert len(c.centroids) == 1
        assert np.allclose(c.centroids[0], 99.0)
        assert c.sizes.tolist() == [36]

    def test_objective_never_worse_than_init(self, rng):
        # Lloyd iterations cannot increase the within-cluster SSE, so the
        # final clustering must score at least as well as its own seeding
        img = rng.integers(0, 256, (16, 16, 3)).astype(np.uint8)
        points = img.reshape(-1, 3).astype(np.float64)
        for seed in (0, 1, 7):
            init = _kmeanspp_init(points, 5, np.random.default_rng(seed))
            final = kmeans_cluster(img, 5, seed=seed)
            assert _sse(points, final.centroids) <= _sse(points, init) + 1e-6

    def test_labels_are_nearest_centroid(self, rng):
        img = rng.integers(0, 256, (10, 10, 3)).astype(np.uint8)
        c = kmeans_cluster(img, 4, seed=3)
        points = img.reshape(-1, 3).astype(float)
        d2 = np.sum((points[:, None, :] - c.centroids[None, :, :]) ** 2, axis=2)
        assert np.array_equal(d2.argmin(axis=1), c.labels.ravel())

    def test_deterministic_for_fixed_seed(self, rng):
        img = rng.integers(0, 256, (12, 12, 3)).astype(np.uint8)
        a = kmeans_cluster(img, 5, seed=11)
        b = kmeans_cluster(img, 5, seed=11)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.centroids, b.centroids)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            kmeans_cluster(np.zeros((0, 0, 3), dtype=np.uint8), 3, seed=0)


class TestHslCandidate:
    def test_blue_hue_band(self):
        assert hsl_is_candidate((100, 140, 220), _params())

    def test_very_bright_near_white(self):
        assert hsl_is_candidate((250, 250, 250), _params())

    def test_bright_desaturated_grey(self):
        rgb = hsl_to_rgb((0.1, 0.1, 0.8))
        assert hsl_is_candidate(rgb, _params())

    def test_dark_warm_color_rejected(self):
        assert not hsl_is_candidate((120, 60, 30), _params())

    def test_saturated_grey_level_rejected(self):
        rgb = hsl_to_rgb((0.05, 0.6, 0.8))  # bright but saturated warm
        assert not hsl_is_candidate(rgb, _params())


class TestSelectSkyClusters:
    def _clustering(self, sizes):
        sizes = np.asarray(sizes)
        return Clustering(
            labels=np.zeros((1, 1), dtype=int),
            centroids=np.zeros((len(sizes), 3)),
            sizes=sizes,
        )

    def test_small_candidate_dropped(self):
        c = self._clustering([1000, 300])
        assert select_sky_clusters(c, [True, True], skyreq=0.4) == {0}

    def test_large_enough_candidates_kept(self):
        c = self._clustering([1000, 700])
        assert select_sky_clusters(c, [True, True], skyreq=0.6) == {0, 1}

    def test_non_candidates_ignored_even_if_huge(self):
        c = self._clustering([5000, 400])
        assert select_sky_clusters(c, [False, True], skyreq=0.4) == {1}

    def test_no_candidates(self):
        c = self._clustering([10, 20])
        assert select_sky_clusters(c, [False, False], skyreq=0.5) == set()


class TestFullMask:
    def test_clean_step_equals_truth(self, step_image):
        img, truth = step_image
        assert np.array_equal(kmeans_hsl_mask(img, _params("K-mean_6"), seed=0), truth)

    def test_all_dark_image_is_all_ground(self):
        img = np.zeros((10, 10, 3), dtype=np.uint8)
        img[:5] = (80, 50, 20)
        img[5:] = (30, 20, 10)
        assert not kmeans_hsl_mask(img, _params("K-mean_12"), seed=0).any()

    def test_uniform_grey_is_all_sky(self):
        rgb = np.rint(hsl_to_rgb((0.1, 0.1, 0.8))).astype(np.uint8)
        img = np.broadcast_to(rgb, (8, 8, 3)).copy()
        assert kmeans_hsl_mask(img, _params("K-mean_6"), seed=0).all()

    def test_deterministic(self, step_image):
        img, _ = step_image
        a = kmeans_hsl_mask(img, _params("K-mean_14"), seed=0)
        b = kmeans_hsl_mask(img, _params("K-mean_14"), seed=0)
        assert np.array_equal(a, b)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            KMeansHslParams(1, 0.5, 0.75, 0.3, 0.95, 0.75, 0.2)
        with pytest.raises(ValueError):
            KMeansHslParams(6, 0.0, 0.75, 0.3, 0.95, 0.75, 0.2)
        with pytest.raises(ValueError):
            KMeansHslParams(6, 0.5, 0.3, 0.75, 0.95, 0.75, 0.2)
