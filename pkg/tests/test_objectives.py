import math
import unittest
from unittest import TestCase

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from resto.dsp import StftConfig, stft
from resto.exceptions import ConfigError, ShapeMismatchError, SilentSignalError
from resto.objectives import (
    CompositeParts,
    LossWeights,
    MrStftConfig,
    codec_composite_loss,
    commitment_loss,
    dn_loss,
    feature_match_loss,
    hinge_adv_loss,
    log_magnitude_l1,
    log_spectral_distance,
    mr_stft_loss,
    si_sdr,
    spectral_convergence,
    weight_map,
    weighted_dn_loss,
)
from resto.utils import Waveform

FS = 16000


def _noise(length=FS, seed=0):
    return Waveform(np.random.default_rng(seed).standard_normal(length), FS)


class TestSiSdr(TestCase):
    def test_identical_signals_hit_the_cap(self):
        x = _noise()
        self.assertEqual(si_sdr(x, x), 120.0)

    def test_orthogonal_error_is_zero_db(self):
        rng = np.random.default_rng(1)
        ref = rng.standard_normal(1000)
        n = rng.standard_normal(1000)
        n -= np.dot(n, ref) / np.dot(ref, ref) * ref
        n *= np.linalg.norm(ref) / np.linalg.norm(n)

        self.assertAlmostEqual(si_sdr(ref + n, ref), 0.0, delta=1e-6)

    def test_orthogonal_estimate_hits_the_floor(self):
        self.assertEqual(si_sdr([0.0, 1.0], [1.0, 0.0]), -120.0)

    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=0.1, max_value=10.0),
        st.integers(0, 1000),
    )
    def test_scale_invariance(self, a, b, seed):
        rng = np.random.default_rng(seed)
        ref = rng.standard_normal(1000)
        est = ref + 0.5 * rng.standard_normal(1000)

        self.assertAlmostEqual(si_sdr(a * est, b * ref), si_sdr(est, ref), delta=1e-9)

    def test_silent_reference(self):
        with self.assertRaises(SilentSignalError):
            si_sdr(np.ones(10), np.zeros(10))

    def test_length_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            si_sdr(np.ones(10), np.ones(11))


class TestSpectralMetrics(TestCase):
    def test_spectral_convergence(self):
        self.assertEqual(spectral_convergence(np.zeros(3), np.zeros(3)), 0.0)
        self.assertEqual(spectral_convergence(np.ones(3), np.zeros(3)), 1.0)
        self.assertAlmostEqual(
            spectral_convergence(np.array([1.0, 2.0]), np.array([2.0, 4.0])), 0.5
        )

    def test_log_magnitude_floor(self):
        self.assertEqual(log_magnitude_l1(np.zeros(4), np.zeros(4)), 0.0)
        self.assertAlmostEqual(
            log_magnitude_l1(np.full(4, math.e), np.ones(4)), 1.0, places=12
        )

    def test_log_spectral_distance(self):
        x = _noise()
        self.assertEqual(log_spectral_distance(x, x), 0.0)
        self.assertAlmostEqual(
            log_spectral_distance(x.with_samples(2.0 * x.samples), x),
            20.0 * math.log10(2.0),
            places=9,
        )


class TestDenoisingLoss(TestCase):
    def setUp(self):
        self.x = _noise(4000, 3)
        self.half = self.x.with_samples(0.5 * self.x.samples)
        self.mag = stft(self.x, StftConfig()).magnitude()

    def test_perfect_estimate(self):
        self.assertEqual(dn_loss(self.x, self.x), -120.0)
        self.assertEqual(weighted_dn_loss(self.x, self.x), -120.0)

    def test_scaled_estimate(self):
        expected = -120.0 + 1000.0 * np.mean(0.5 * self.mag)
        self.assertAlmostEqual(dn_loss(self.half, self.x), expected, places=6)

    def test_lambda(self):
        self.assertEqual(dn_loss(self.half, self.x, lam=0.0), -120.0)

    def test_weighted_scaled_estimate(self):
        alpha = 1.0 + self.mag / self.mag.max()
        expected = -120.0 + 1000.0 * np.mean(alpha * 0.5 * self.mag)
        self.assertAlmostEqual(weighted_dn_loss(self.half, self.x), expected, places=6)
        self.assertGreater(weighted_dn_loss(self.half, self.x), dn_loss(self.half, self.x))

    def test_mirrored_uniform_perturbations_weigh_the_same(self):
        # the masked peak doubles along with every cell
        under = weighted_dn_loss(self.x.with_samples(0.8 * self.x.samples), self.x)
        over = weighted_dn_loss(self.x.with_samples(1.2 * self.x.samples), self.x)
        np.testing.assert_allclose(under, over, rtol=1e-9)


class TestWeightMap(TestCase):
    def test_hand_computed_weights(self):
        reference = np.array([[2.0, 2.0], [2.0, 3.0]])
        denoised = np.array([[1.0, 2.5], [4.0, 1.0]])

        weights = weight_map(denoised, reference)
        np.testing.assert_allclose(weights.alpha, [[1.5, 1.125], [1.5, 2.0]])
        self.assertTrue(weights.mask.all())

    def test_equal_magnitudes(self):
        mag = np.abs(np.random.default_rng(0).standard_normal((5, 4)))
        np.testing.assert_array_equal(weight_map(mag, mag).alpha, 1.0)

    def test_silent_reference_cells(self):
        weights = weight_map(np.array([[5.0, 1.5]]), np.array([[0.0, 1.0]]))
        np.testing.assert_array_equal(weights.mask, [[False, True]])
        np.testing.assert_allclose(weights.alpha, [[1.0, 2.0]])

    def test_weights_in_range(self):
        rng = np.random.default_rng(2)
        weights = weight_map(np.abs(rng.standard_normal(100)), np.abs(rng.standard_normal(100)))
        self.assertTrue((weights.alpha >= 1.0).all())
        self.assertTrue((weights.alpha <= 2.0).all())

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            weight_map(np.ones(3), np.ones(4))

    def test_negative_direction_weighs_more(self):
        reference = np.full((2, 2), 2.0)
        delta = np.array([[-1.0, 1.0], [0.5, -0.5]])

        weights = weight_map(reference + delta, reference)
        np.testing.assert_allclose(weights.alpha, [[2.0, 1.5], [1.25, 1.5]])

        weighted = weights.alpha * np.abs(delta)
        self.assertGreater(weighted[0, 0], weighted[0, 1])
        self.assertGreater(weighted[1, 1], weighted[1, 0])

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=12, max_size=12),
        st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=12, max_size=12),
    )
    def test_weight_map_properties(self, denoised, reference):
        denoised = np.reshape(denoised, (3, 4))
        reference = np.reshape(reference, (3, 4))
        weights = weight_map(denoised, reference)

        self.assertTrue((weights.alpha >= 1.0).all())
        self.assertTrue((weights.alpha <= 2.0).all())
        np.testing.assert_array_equal(weights.alpha[~weights.mask], 1.0)

        delta = denoised - reference
        emphasized = np.where(delta < 0, -2.0 * delta, delta)
        masked = np.where(weights.mask, emphasized, -1.0)
        if masked.max() > 0:
            self.assertEqual(weights.alpha.flat[np.argmax(masked)], 2.0)


class TestCodecLosses(TestCase):
    def test_mr_stft_identical(self):
        x = _noise()
        self.assertEqual(mr_stft_loss(x, x), 0.0)

    def test_mr_stft_doubled(self):
        x = _noise()
        loss = mr_stft_loss(x.with_samples(2.0 * x.samples), x)
        self.assertAlmostEqual(loss, 1.0 + math.log(2.0), places=9)

    def test_mr_stft_ignores_sign(self):
        x = _noise()
        self.assertEqual(mr_stft_loss(x.with_samples(-x.samples), x), 0.0)

    def test_mr_stft_silent_estimate(self):
        x = _noise()
        silent = x.with_samples(np.zeros(len(x)))

        loss = mr_stft_loss(silent, x)
        self.assertTrue(math.isfinite(loss))
        self.assertGreater(loss, 1.0)
        for cfg in MrStftConfig().stft_configs():
            mag_ref = stft(x, cfg).magnitude()
            self.assertEqual(spectral_convergence(np.zeros_like(mag_ref), mag_ref), 1.0)

    def test_mr_stft_positive_for_other_magnitudes(self):
        self.assertGreater(mr_stft_loss(_noise(seed=5), _noise(seed=6)), 0.0)

    def test_mr_stft_config(self):
        with self.assertRaises(ConfigError):
            MrStftConfig(subbands=0)
        with self.assertRaises(ConfigError):
            MrStftConfig(resolutions=())
        self.assertEqual(len(MrStftConfig().stft_configs()), 3)

    def test_commitment(self):
        self.assertEqual(commitment_loss(np.zeros((2, 2)), np.full((2, 2), 2.0)), 4.0)
        with self.assertRaises(ShapeMismatchError):
            commitment_loss(np.zeros(2), np.zeros(3))

    def test_hinge(self):
        scores = [2.0, 0.5, -1.0]
        self.assertAlmostEqual(hinge_adv_loss(scores, "generator"), 2.5 / 3)
        self.assertAlmostEqual(hinge_adv_loss(scores, "discriminator_real"), 2.5 / 3)
        self.assertAlmostEqual(hinge_adv_loss(scores, "discriminator_fake"), 1.5)

        with self.assertRaises(ValueError):
            hinge_adv_loss(scores, "critic")
        with self.assertRaises(ValueError):
            hinge_adv_loss([], "generator")

    def test_feature_matching(self):
        loss = feature_match_loss([[1.0, 2.0], [3.0]], [[0.0, 0.0], [1.0]])
        self.assertAlmostEqual(loss, 1.75)

        with self.assertRaises(ShapeMismatchError):
            feature_match_loss([[1.0]], [[1.0], [2.0]])

    def test_composite_default_weights(self):
        self.assertEqual(codec_composite_loss(CompositeParts(1.0, 1.0, 1.0, 1.0)), 32.0)
        self.assertEqual(codec_composite_loss((0.0, 0.0, 0.5, 0.0)), 10.0)

    def test_composite_custom_weights(self):
        weights = LossWeights(w_rec=2.0, w_adv=0.0, w_feat=0.0, w_com=1.0)
        self.assertEqual(codec_composite_loss((1.0, 5.0, 5.0, 3.0), weights), 5.0)

    def test_composite_validation(self):
        with self.assertRaises(ConfigError):
            LossWeights(w_feat=-1.0)
        with self.assertRaises(ValueError):
            codec_composite_loss((1.0, float("nan"), 0.0, 0.0))


if __name__ == "__main__":
    unittest.main()
