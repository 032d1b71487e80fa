import os
import tempfile
import unittest
from collections import OrderedDict
from unittest import TestCase

import numpy as np

from resto import __version__
from resto.dsp import ComplexMask, FusionConfig, StftConfig, stft
from resto.exceptions import ConfigError, FormatError, ShapeMismatchError
from resto.objectives import si_sdr
from resto.pipeline import (
    CodecAdapterConfig,
    MaskSource,
    PipelineConfig,
    PipelineOutput,
    decode_features,
    encode_features,
    evaluate,
    load_mask,
    load_waveform,
    read_report,
    run_dn,
    run_dr,
    run_many,
    run_pipeline,
    save_mask,
    save_waveform,
    summarize,
    write_report,
)
from resto.quantize import create_stack
from resto.simulate import RoomSpec, apply_rir, generate_rir, mix_at_snr, pseudo_speech
from resto.utils import Waveform

FS = 16000
LENGTH = 8000


def _record(snr_db=0.0, seed=0):
    rng = np.random.default_rng(seed)
    dry = Waveform(pseudo_speech(LENGTH, FS, rng), FS)
    noise = Waveform(rng.standard_normal(2 * LENGTH), FS)

    room = RoomSpec((6, 5, 3), (2.0, 1.5, 1.2), (4.0, 3.5, 1.6), rt60_target=0.3)
    rir = generate_rir(room, FS)
    reverberant = apply_rir(dry, rir)

    return mix_at_snr(reverberant, noise, snr_db, seed, dry=dry, rir=rir)


def _exact_stack(features):
    # code 0 stays the reserved zero, every other code is one feature row
    stack = create_stack("rvq", dim=features.shape[1], n_q=1, codebook_size=len(features) + 1)
    stack.stages()[0].codebook.set_vectors(np.vstack([np.zeros(features.shape[1]), features]))
    return stack


class TestDenoising(TestCase):
    def test_oracle_mask_recovers_target(self):
        for snr_db in (-5.0, 0.0, 5.0):
            with self.subTest(snr_db=snr_db):
                rec = _record(snr_db)
                denoised = run_dn(rec.mixture, MaskSource.oracle(), x=rec.reverberant)
                self.assertEqual(len(denoised), LENGTH)
                self.assertGreaterEqual(si_sdr(denoised, rec.reverberant), 40.0)

    def test_passthrough_keeps_mixture(self):
        rec = _record()
        out = run_dn(rec.mixture, MaskSource.passthrough())
        self.assertGreaterEqual(si_sdr(out, rec.mixture), 60.0)

    def test_zero_mask_silences(self):
        rec = _record()
        shape = stft(rec.mixture).shape
        out = run_dn(rec.mixture, MaskSource("file", mask=ComplexMask.zeros(shape)))
        np.testing.assert_array_equal(out.samples, 0.0)

    def test_oracle_needs_reference(self):
        with self.assertRaises(ValueError):
            run_dn(_record().mixture, MaskSource.oracle())

    def test_file_mask_shape(self):
        src = MaskSource("file", mask=ComplexMask.ones((3, 257)))
        with self.assertRaises(ShapeMismatchError):
            run_dn(_record().mixture, src)

    def test_mask_source_validation(self):
        with self.assertRaises(ConfigError):
            MaskSource("learned")
        with self.assertRaises(ConfigError):
            MaskSource("file")
        with self.assertRaises(ConfigError):
            MaskSource.oracle(bound=0.0)

    def test_mask_file(self):
        rec = _record()
        shape = stft(rec.mixture).shape
        mask = ComplexMask(np.full(shape, 0.5 + 0.5j))

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "rec.mask")
            save_mask(path, mask)
            src = MaskSource.from_file(path)

            wav_path = os.path.join(tmp, "rec.blob")
            save_waveform(wav_path, rec.mixture)
            with self.assertRaises(FormatError):
                load_mask(wav_path)

        np.testing.assert_array_equal(src.mask.data, mask.data)


class TestAdapter(TestCase):
    def setUp(self):
        self.x = _record().reverberant

    def test_round_trip(self):
        for cfg in (
            CodecAdapterConfig(),
            CodecAdapterConfig(feature_domain="magnitude"),
            CodecAdapterConfig(dim=64),
            CodecAdapterConfig(dim=300),
        ):
            with self.subTest(cfg=cfg):
                features, sidecar = encode_features(self.x, cfg)
                self.assertEqual(features.shape[1], cfg.dim)
                y = decode_features(features, sidecar, cfg)
                self.assertEqual(len(y), len(self.x))
                self.assertGreaterEqual(si_sdr(y, self.x), 40.0)

    def test_deterministic(self):
        a, _ = encode_features(self.x)
        b, _ = encode_features(self.x)
        np.testing.assert_array_equal(a, b)

    def test_projection_columns_are_orthonormal(self):
        P = CodecAdapterConfig().projection_matrix()
        self.assertEqual(P.shape, (257, 256))
        np.testing.assert_allclose(P.T @ P, np.eye(256), atol=1e-12)
        self.assertFalse(P.flags.writeable)

    def test_silent_input_features(self):
        cfg = CodecAdapterConfig(dim=257, projection="identity")
        silent = self.x.with_samples(np.zeros(len(self.x)))
        features, sidecar = encode_features(silent, cfg)

        np.testing.assert_allclose(features, np.log(1e-7) / 16.0, rtol=1e-12)
        np.testing.assert_array_equal(sidecar.complement, 0.0)

    def test_magnitudes_need_phase(self):
        with self.assertRaises(ValueError):
            encode_features(np.ones((10, 257)))

    def test_identity_dimension(self):
        with self.assertRaises(ConfigError):
            CodecAdapterConfig(dim=256, projection="identity")

    def test_feature_width_mismatch(self):
        features, sidecar = encode_features(self.x)
        with self.assertRaises(ShapeMismatchError):
            decode_features(features[:, :10], sidecar)


class TestRestoration(TestCase):
    def setUp(self):
        self.rec = _record(5.0, 1)

    def test_without_fusion_codec_sees_denoised(self):
        out = run_dr(self.rec.reverberant)
        np.testing.assert_array_equal(
            out.codec_input, stft(self.rec.reverberant).magnitude()
        )
        self.assertIsNone(out.codes)

    def test_beta_zero_codec_sees_mixture(self):
        cfg = PipelineConfig(fusion=FusionConfig(beta=0.0))
        out = run_dr(self.rec.reverberant, self.rec.mixture, cfg)
        np.testing.assert_array_equal(out.codec_input, stft(self.rec.mixture).magnitude())

    def test_fusion_needs_mixture(self):
        with self.assertRaises(ValueError):
            run_dr(self.rec.reverberant, cfg=PipelineConfig(fusion=FusionConfig()))
        adapter = CodecAdapterConfig(phase_source="from_mixture")
        with self.assertRaises(ValueError):
            run_dr(self.rec.reverberant, cfg=PipelineConfig(adapter=adapter))

    def test_stack_dimension_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            PipelineConfig(stack=create_stack("sq", dim=64))

    def test_exact_codes(self):
        cfg = PipelineConfig(mask=MaskSource.passthrough())
        unquantized = run_pipeline(self.rec.mixture, cfg)

        cfg = PipelineConfig(
            mask=MaskSource.passthrough(), stack=_exact_stack(unquantized.features)
        )
        quantized = run_pipeline(self.rec.mixture, cfg)

        self.assertLessEqual(quantized.metrics["feature_mse"], 1e-6)
        self.assertEqual(list(quantized.metrics), ["feature_mse", "residual_energy_1"])
        np.testing.assert_array_equal(
            quantized.restored.samples, unquantized.restored.samples
        )

    def test_stages_run_separately(self):
        cfg = PipelineConfig(mask=MaskSource.oracle(), stack=create_stack("sq", dim=256))
        together = run_pipeline(self.rec, cfg)

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "denoised.blob")
            save_waveform(path, run_dn(self.rec.mixture, cfg.mask, x=self.rec.reverberant))
            denoised = load_waveform(path)

        restored = run_dr(denoised, self.rec.mixture, cfg).restored
        np.testing.assert_array_equal(restored.samples, together.restored.samples)


class TestPipeline(TestCase):
    def test_metrics_of_a_record(self):
        cfg = PipelineConfig(mask=MaskSource.oracle(), stack=create_stack("rsq", dim=256, n_q=2))
        out = run_pipeline(_record(), cfg)

        self.assertEqual(
            list(out.metrics),
            [
                "si_sdr_dry",
                "si_sdr_reverb",
                "lsd",
                "feature_mse",
                "residual_energy_1",
                "residual_energy_2",
            ],
        )
        self.assertGreaterEqual(
            out.metrics["residual_energy_1"], out.metrics["residual_energy_2"]
        )
        self.assertGreater(out.metrics["feature_mse"], 0.0)

    def test_run_many_keeps_order(self):
        records = [_record(snr_db, seed) for seed, snr_db in enumerate((-5.0, 5.0))]
        cfg = PipelineConfig(mask=MaskSource.oracle())

        outputs = run_many(records, cfg)
        for rec, out in zip(records, outputs):
            np.testing.assert_array_equal(
                out.restored.samples, run_pipeline(rec, cfg).restored.samples
            )

    def test_evaluate_caps(self):
        rec = _record()
        out = PipelineOutput(
            denoised=rec.dry,
            restored=rec.dry,
            codes=None,
            metrics=OrderedDict(),
            codec_input=np.zeros((1, 257)),
            features=np.zeros((1, 256)),
        )

        metrics = evaluate(out, rec)
        self.assertEqual(metrics["si_sdr_dry"], 120.0)
        self.assertEqual(metrics["lsd"], 0.0)
        self.assertEqual(metrics["feature_mse"], 0.0)

    def test_evaluate_length_mismatch(self):
        rec = _record()
        out = PipelineOutput(
            rec.dry, rec.dry.with_samples(rec.dry.samples[:-1]), None, {}, None, None
        )
        with self.assertRaises(ShapeMismatchError):
            evaluate(out, rec, StftConfig())

    def test_waveform_blob(self):
        x = _record().mixture
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "mix.blob")
            save_waveform(path, x)
            y = load_waveform(path)

        self.assertEqual(y.sample_rate, FS)
        np.testing.assert_array_equal(y.samples, x.samples)


class TestReport(TestCase):
    def setUp(self):
        self.rows = [
            OrderedDict([("id", f"rec{i:05d}"), ("snr_db", snr), ("si_sdr_dry", value)])
            for i, (snr, value) in enumerate([(-5.0, 1.0), (0.0, 2.0), (5.0, 3.0), (0.0, 4.0)])
        ]

    def test_round_trip(self):
        config = {"quantizer.scheme": "sq_rvq", "seed": 0}
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.tsv")
            write_report(path, self.rows + [OrderedDict(id="x", snr_db=0.1, si_sdr_dry=1 / 3)], config)
            report = read_report(path)

        self.assertEqual(report.version, __version__)
        self.assertEqual(report.config, config)
        self.assertEqual(report.columns, ["id", "snr_db", "si_sdr_dry"])
        self.assertEqual(report.rows[:4], self.rows)
        self.assertEqual(report.rows[4]["si_sdr_dry"], 1 / 3)

    def test_summary(self):
        summary = summarize(self.rows)
        self.assertEqual(
            [row["id"] for row in summary],
            ["mean", "median", "snr=-5.0", "snr=0.0", "snr=5.0"],
        )
        self.assertEqual(
            [row["si_sdr_dry"] for row in summary], [2.5, 2.5, 1.0, 3.0, 3.0]
        )

    def test_id_must_come_first(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValueError):
                write_report(os.path.join(tmp, "r.tsv"), [OrderedDict(snr_db=1.0, id="a")])
            with self.assertRaises(ValueError):
                write_report(os.path.join(tmp, "r.tsv"), [])

    def test_malformed_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "r.tsv")
            with open(path, "w") as f:
                f.write("# resto 0\n# config {}\nid\tsi_sdr_dry\nrec0\tabc\n")
            with self.assertRaises(FormatError):
                read_report(path)


if __name__ == "__main__":
    unittest.main()
