import os
import tempfile
import unittest
from unittest import TestCase

import numpy as np
from scipy.io import wavfile

from resto._container import load_arrays, save_arrays
from resto.exceptions import FormatError, SampleRateMismatchError
from resto.utils import Waveform, atomic_write, check_same_rate, read_wav, write_wav


class TestWaveform(TestCase):
    def test_read_only_samples(self):
        x = Waveform([0.0, 0.5], 8000)
        with self.assertRaises(ValueError):
            x.samples[0] = 1.0
        self.assertEqual(x.duration, 2 / 8000)

    def test_invalid(self):
        for samples, rate in (([], 8000), ([[0.0]], 8000), ([np.nan], 8000), ([0.0], 0)):
            with self.subTest(samples=samples, rate=rate):
                with self.assertRaises(ValueError):
                    Waveform(samples, rate)

    def test_rates_must_match(self):
        with self.assertRaises(SampleRateMismatchError):
            check_same_rate(Waveform([0.0], 8000), Waveform([0.0], 16000))


class TestWav(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "x.wav")
        self.x = Waveform(np.linspace(-0.5, 0.5, 1000), 16000)

    def tearDown(self):
        self.tmp.cleanup()

    def test_float32(self):
        write_wav(self.path, self.x)
        y = read_wav(self.path)
        self.assertEqual(y.sample_rate, 16000)
        np.testing.assert_array_equal(y.samples, self.x.samples.astype(np.float32))

    def test_pcm16(self):
        write_wav(self.path, self.x, "pcm16")
        y = read_wav(self.path)
        np.testing.assert_allclose(y.samples, self.x.samples, atol=1.0 / 32768)

    def test_pcm16_clips(self):
        write_wav(self.path, self.x.with_samples([2.0, -2.0]), "pcm16")
        np.testing.assert_array_equal(read_wav(self.path).samples, [32767 / 32768, -1.0])

    def test_stereo_rejected(self):
        wavfile.write(self.path, 16000, np.zeros((10, 2), dtype=np.float32))
        with self.assertRaises(FormatError):
            read_wav(self.path)

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            write_wav(self.path, self.x, "pcm24")
        self.assertEqual(os.listdir(self.tmp.name), [])


class TestContainer(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "x.blob")

    def tearDown(self):
        self.tmp.cleanup()

    def test_arrays_keep_type_and_shape(self):
        arrays = [
            np.arange(6, dtype=np.int64).reshape(2, 3),
            np.array([1.5 - 2j]),
            np.float32([0.25]),
            np.float64(3.0),
        ]
        save_arrays(self.path, "features", arrays)
        kind, loaded = load_arrays(self.path)

        self.assertEqual(kind, "features")
        for a, b in zip(arrays, loaded):
            self.assertEqual(a.dtype, b.dtype)
            self.assertEqual(np.shape(a), b.shape)
            np.testing.assert_array_equal(a, b)

    def test_kind_mismatch(self):
        save_arrays(self.path, "codes", [np.zeros(3, dtype=np.int64)])
        with self.assertRaises(FormatError):
            load_arrays(self.path, kind="mask")

    def test_unsupported_dtype(self):
        with self.assertRaises(ValueError):
            save_arrays(self.path, "codes", [np.zeros(3, dtype=np.int32)])
        with self.assertRaises(ValueError):
            save_arrays(self.path, "weights", [])

    def test_failed_write_leaves_nothing(self):
        with self.assertRaises(RuntimeError):
            with atomic_write(self.path) as f:
                f.write(b"partial")
                raise RuntimeError("interrupted")
        self.assertEqual(os.listdir(self.tmp.name), [])


if __name__ == "__main__":
    unittest.main()
