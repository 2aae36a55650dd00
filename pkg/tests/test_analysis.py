import numpy as np
import pytest

from fpgm.analysis import dataset_signature, specificity_study, subset_consistency
from fpgm.errors import NoUsableSamples
from fpgm.prior import edge_signature, learn_prior
from synthetic import edge_textured_dataset, ellipse_mask, texture_dataset


class TestDatasetSignature:
    def test_single_sample_zero_std(self):
        data = texture_dataset(1, 16, seed=0)
        summary = dataset_signature(data, "one")
        assert summary.n == 1
        assert np.all(summary.std == 0.0)
        assert np.array_equal(summary.mean, edge_signature(*data[0]))

    def test_two_sample_closed_form(self):
        data = texture_dataset(2, 16, seed=1)
        p = edge_signature(*data[0])
        q = edge_signature(*data[1])
        summary = dataset_signature(data, "two")
        assert np.abs(summary.mean - (p + q) / 2).max() < 1e-12
        assert np.abs(summary.std - np.abs(p - q) / 2).max() < 1e-12

    def test_matches_two_pass_oracle(self):
        data = texture_dataset(8, 16, seed=2)
        sigs = [edge_signature(i, m) for i, m in data]
        mean = sum(sigs) / len(sigs)
        var = sum((s - mean) ** 2 for s in sigs) / len(sigs)
        summary = dataset_signature(data, "oracle")
        assert np.abs(summary.mean - mean).max() < 1e-9
        assert np.abs(summary.std - np.sqrt(var)).max() < 1e-9

    def test_mean_equals_mean_mode_prior(self):
        data = texture_dataset(10, 16, seed=3)
        summary = dataset_signature(data, "x")
        prior = learn_prior(data, mode="mean")
        assert np.abs(summary.mean - prior.profile).max() < 1e-12

    def test_no_usable_samples(self):
        with pytest.raises(NoUsableSamples):
            dataset_signature([(np.ones((8, 8)), np.zeros((8, 8), np.uint8))], "x")


class TestSubsetConsistency:
    def test_identical_samples_give_identical_summaries(self):
        img, mask = texture_dataset(1, 16, seed=4)[0]
        a, b = subset_consistency([(img, mask)] * 2, seed=0)
        assert np.array_equal(a.mean, b.mean)

    def test_seeded_determinism(self):
        data = texture_dataset(10, 16, seed=5)
        a1, b1 = subset_consistency(data, seed=7)
        a2, b2 = subset_consistency(data, seed=7)
        assert np.array_equal(a1.mean, a2.mean)
        assert np.array_equal(b1.std, b2.std)

    def test_synthetic_halves_agree_within_5_percent(self):
        data = texture_dataset(200, 32, seed=4)
        a, b = subset_consistency(data, seed=0)
        gap = np.abs(a.mean - b.mean) / (0.5 * (a.mean + b.mean) + 1e-12)
        assert gap.max() < 0.05

    def test_too_few_samples(self):
        with pytest.raises(NoUsableSamples):
            subset_consistency(texture_dataset(1, 16, seed=7), seed=0)


class TestSpecificityStudy:
    def test_edge_dominates_flat_background(self):
        data = edge_textured_dataset(30, 32, seed=8)
        edge, background = specificity_study(data, n_images=30, seed=0)
        r_upper = len(edge.mean) // 4
        for r in range(2, r_upper + 1):
            assert edge.mean[r] > background.mean[r]
        # background spectrum is noise-like: far below its own DC bin
        assert background.mean[2:].max() < 0.2 * background.mean[0]

    def test_all_empty_edges_raise(self):
        data = [(np.ones((16, 16)), np.zeros((16, 16), np.uint8))] * 3
        with pytest.raises(NoUsableSamples):
            specificity_study(data, n_images=3, seed=0)

    def test_seeded_reproducibility(self):
        data = edge_textured_dataset(10, 32, seed=9)
        e1, b1 = specificity_study(data, n_images=10, seed=3)
        e2, b2 = specificity_study(data, n_images=10, seed=3)
        assert np.array_equal(e1.mean, e2.mean)
        assert np.array_equal(b1.mean, b2.mean)

    def test_skips_images_with_small_background(self):
        # a mask covering nearly everything leaves too few background pixels
        rng = np.random.default_rng(10)
        big = np.ones((24, 24), dtype=np.uint8)
        big[0, 0] = 0
        small = ellipse_mask(24, rng, min_axis=3, max_axis=4)
        img = rng.random((24, 24))
        edge, background = specificity_study(
            [(img, big), (img, small)], n_images=2, seed=0
        )
        assert edge.n == 1
