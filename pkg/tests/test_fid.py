import numpy as np
import pytest

from oracles import fid_oracle, mean_cov_oracle
from survx.errors import DimMismatch, NotSymmetric, TooFewSamples
from survx.metrics import (
    GaussianStats,
    fid,
    fid_between_sets,
    gaussian_stats,
    pooled_feature_vector,
    random_extractor,
    sqrtm_psd,
)
from survx.image import ImageTensor


def random_spd(rng, d):
    b = rng.normal(size=(d, d))
    return b @ b.T + 0.1 * np.eye(d)


class TestGaussianStats:
    def test_identical_pair(self):
        v = np.array([1.0, 2.0, 3.0])
        stats = gaussian_stats([v, v])
        assert np.array_equal(stats.mean, v)
        assert np.array_equal(stats.cov, np.zeros((3, 3)))
        assert stats.n == 2

    def test_unbiased_1d(self):
        stats = gaussian_stats([[0.0], [2.0]])
        assert stats.mean[0] == 1.0
        assert stats.cov[0, 0] == 2.0

    def test_matches_two_pass_oracle(self, rng):
        rows = rng.normal(size=(9, 4))
        stats = gaussian_stats(rows)
        mean, cov = mean_cov_oracle(rows)
        assert stats.mean == pytest.approx(mean, abs=1e-12)
        assert stats.cov == pytest.approx(cov, abs=1e-12)

    def test_symmetric(self, rng):
        stats = gaussian_stats(rng.normal(size=(30, 5)))
        assert np.abs(stats.cov - stats.cov.T).max() < 1e-12

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            gaussian_stats([[1.0, 2.0]])


class TestSqrtm:
    def test_identity(self):
        assert sqrtm_psd(np.eye(3)) == pytest.approx(np.eye(3), abs=1e-12)

    def test_diagonal(self):
        got = sqrtm_psd(np.diag([4.0, 9.0]))
        assert got == pytest.approx(np.diag([2.0, 3.0]), abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_reconstruction(self, seed):
        rng = np.random.default_rng(seed)
        m = random_spd(rng, 3)
        root = sqrtm_psd(m)
        assert root @ root == pytest.approx(m, abs=1e-8)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            sqrtm_psd(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestFid:
    def test_self_distance_zero(self, rng):
        stats = gaussian_stats(rng.normal(size=(12, 3)))
        assert fid(stats, stats) == pytest.approx(0.0, abs=1e-9)

    def test_1d_closed_form(self):
        for mu1, s1, mu2, s2 in [(0.0, 1.0, 1.0, 2.0), (3.0, 0.5, -1.0, 0.1), (2.0, 1.0, 2.0, 1.0)]:
            a = GaussianStats(np.array([mu1]), np.array([[s1**2]]), 10)
            b = GaussianStats(np.array([mu2]), np.array([[s2**2]]), 10)
            expected = (mu1 - mu2) ** 2 + (s1 - s2) ** 2
            assert fid(a, b) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_jacobi_oracle(self, seed):
        rng = np.random.default_rng(seed + 50)
        a = GaussianStats(rng.normal(size=3), random_spd(rng, 3), 10)
        b = GaussianStats(rng.normal(size=3), random_spd(rng, 3), 10)
        assert fid(a, b) == pytest.approx(fid_oracle(a.mean, a.cov, b.mean, b.cov), abs=1e-6)

    def test_symmetric(self, rng):
        a = GaussianStats(rng.normal(size=4), random_spd(rng, 4), 10)
        b = GaussianStats(rng.normal(size=4), random_spd(rng, 4), 10)
        assert fid(a, b) == pytest.approx(fid(b, a), abs=1e-9)

    def test_dim_mismatch(self, rng):
        a = GaussianStats(np.zeros(2), np.eye(2), 5)
        b = GaussianStats(np.zeros(3), np.eye(3), 5)
        with pytest.raises(DimMismatch):
            fid(a, b)

    def test_between_image_sets(self, rng):
        fx, weights = random_extractor(seed=0, in_channels=1, stage_channels=(4, 8))
        set_a = [ImageTensor(rng.random((1, 16, 16))) for _ in range(4)]
        set_b = [ImageTensor(np.clip(im.data + rng.normal(0, 0.2, im.data.shape), 0, 1))
                 for im in set_a]
        same = fid_between_sets(set_a, set_a, fx, weights)
        cross = fid_between_sets(set_a, set_b, fx, weights)
        assert same == pytest.approx(0.0, abs=1e-9)
        assert cross > same

    def test_pooled_vector_dims(self, rng):
        fx, weights = random_extractor(seed=0, in_channels=1, stage_channels=(4, 8))
        v = pooled_feature_vector(ImageTensor(rng.random((1, 16, 16))), fx, weights)
        assert v.shape == (8,)
