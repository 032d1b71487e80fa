import contextlib
import filecmp
import io
import os
import shutil
import tempfile
import unittest
from os import path
from unittest import TestCase

import numpy as np

from resto._container import load_arrays
from resto.experiments import RunConfig
from resto.pipeline import read_report
from resto.quantize import load_codebooks
from resto.simulate import load_manifest
from resto.tools import restoration_tool as tool
from resto.utils import read_wav

CONFIG = path.join(path.dirname(__file__), "data", "config.json")


def _main(*argv):
    """Run the tool quietly and return its exit code and error output."""
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = tool.main(list(argv))
    return code, stderr.getvalue()


class ToolTestCase(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.data_dir = path.join(cls.tmp.name, "data")
        cls.codebook = path.join(cls.tmp.name, "stack.rseq")

        code, _ = _main("simulate", "-c", CONFIG, "-od", cls.data_dir)
        assert code == tool.EXIT_OK
        cls.manifest = path.join(cls.data_dir, "manifest.tsv")

        code, _ = _main(
            "train-codebook", "-c", CONFIG, "-m", cls.manifest, "-cb", cls.codebook
        )
        assert code == tool.EXIT_OK

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def setUp(self):
        self.work = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.work.cleanup()

    def out(self, *names):
        return path.join(self.work.name, *names)


class TestSimulate(ToolTestCase):
    def test_manifest(self):
        entries = load_manifest(self.manifest)
        self.assertEqual(len(entries), 3)
        self.assertEqual([e.snr_db for e in entries], [-5.0, 0.0, 5.0])
        for entry in entries:
            self.assertEqual(len(read_wav(path.join(self.data_dir, entry.mix_path))), 8000)

    def test_invalid_rt60_level(self):
        code, _ = _main(
            "simulate",
            "-c",
            CONFIG,
            "--set",
            "simulate.rt60_levels=[-0.1]",
            "-od",
            self.out("data"),
        )
        self.assertEqual(code, tool.EXIT_CONFIG)

    def test_unknown_key(self):
        code, err = _main(
            "simulate", "-c", CONFIG, "--set", "simulate.speakers=2", "-od", self.out()
        )
        self.assertEqual(code, tool.EXIT_CONFIG)
        self.assertIn("simulate.speakers", err)

    def test_missing_config_file(self):
        code, _ = _main("simulate", "-c", self.out("nope.json"), "-od", self.out())
        self.assertEqual(code, tool.EXIT_CONFIG)

    def test_missing_output_dir(self):
        code, _ = _main("simulate", "-c", CONFIG)
        self.assertEqual(code, tool.EXIT_CONFIG)


class TestTrainCodebook(ToolTestCase):
    def test_trained_stack(self):
        stack = load_codebooks(self.codebook)
        self.assertEqual(stack.scheme.value, "sq_rvq")
        self.assertEqual(stack.dim, 32)
        self.assertEqual(stack.n_q, 2)
        self.assertTrue(path.isfile(f"{self.codebook}.stats.tsv"))

    def test_training_is_deterministic(self):
        again = self.out("again.rseq")
        code, _ = _main("train-codebook", "-c", CONFIG, "-m", self.manifest, "-cb", again)

        self.assertEqual(code, tool.EXIT_OK)
        self.assertTrue(filecmp.cmp(self.codebook, again, shallow=False))
        self.assertTrue(
            filecmp.cmp(f"{self.codebook}.stats.tsv", f"{again}.stats.tsv", shallow=False)
        )

    def test_empty_manifest(self):
        manifest = self.out("manifest.tsv")
        with open(self.manifest, "r") as src, open(manifest, "w") as dst:
            dst.write(src.readline())

        code, _ = _main(
            "train-codebook", "-c", CONFIG, "-m", manifest, "-cb", self.out("x.rseq")
        )
        self.assertEqual(code, tool.EXIT_FAILURE)
        self.assertFalse(path.exists(self.out("x.rseq")))

    def test_missing_manifest(self):
        code, _ = _main(
            "train-codebook", "-c", CONFIG, "-m", self.out("none.tsv"), "-cb", self.out("x")
        )
        self.assertEqual(code, tool.EXIT_CONFIG)


class TestRun(ToolTestCase):
    def test_manifest_run(self):
        code, _ = _main(
            "run", "-c", CONFIG, "-i", self.manifest, "-cb", self.codebook, "-od", self.out()
        )
        self.assertEqual(code, tool.EXIT_OK)

        report = read_report(self.out("report.tsv"))
        self.assertEqual([row["id"] for row in report.rows], ["rec00000", "rec00001", "rec00002"])
        self.assertEqual(
            report.columns[:6],
            ["id", "snr_db", "si_sdr_dry", "si_sdr_reverb", "lsd", "feature_mse"],
        )
        self.assertIn("residual_energy_2", report.columns)
        self.assertEqual(report.config["quantizer.D"], 32)

        for row in report.rows:
            restored = read_wav(self.out(f"{row['id']}_restored.wav"))
            self.assertEqual(len(restored), 8000)

    def test_single_file(self):
        mixture = path.join(self.data_dir, load_manifest(self.manifest)[0].mix_path)
        code, _ = _main(
            "run",
            "-c",
            CONFIG,
            "--set",
            "mask.kind=passthrough",
            "-i",
            mixture,
            "-cb",
            self.codebook,
            "-od",
            self.out(),
        )
        self.assertEqual(code, tool.EXIT_OK)

        stem = path.splitext(path.basename(mixture))[0]
        self.assertTrue(path.isfile(self.out(f"{stem}_restored.wav")))
        report = read_report(self.out("report.tsv"))
        self.assertEqual(len(report.rows), 1)
        self.assertEqual(report.columns[:2], ["id", "feature_mse"])

    def test_single_file_needs_mask(self):
        mixture = path.join(self.data_dir, load_manifest(self.manifest)[0].mix_path)
        code, _ = _main("run", "-c", CONFIG, "-i", mixture, "-od", self.out())
        self.assertEqual(code, tool.EXIT_CONFIG)

    def test_missing_codebook(self):
        missing = self.out("missing.rseq")
        code, err = _main(
            "run", "-c", CONFIG, "-i", self.manifest, "-cb", missing, "-od", self.out()
        )
        self.assertEqual(code, tool.EXIT_CONFIG)
        self.assertIn(missing, err)

    def test_corrupted_codebook(self):
        corrupted = self.out("corrupted.rseq")
        with open(self.codebook, "rb") as f:
            data = bytearray(f.read())
        data[10] ^= 0x01
        with open(corrupted, "wb") as f:
            f.write(bytes(data))

        code, _ = _main(
            "run", "-c", CONFIG, "-i", self.manifest, "-cb", corrupted, "-od", self.out()
        )
        self.assertEqual(code, tool.EXIT_FAILURE)

    def test_codebook_dimension_mismatch(self):
        out_dir = self.out("never")
        code, err = _main(
            "run",
            "-c",
            CONFIG,
            "--set",
            "quantizer.D=64",
            "-i",
            self.manifest,
            "-cb",
            self.codebook,
            "-od",
            out_dir,
        )
        self.assertEqual(code, tool.EXIT_CONFIG)
        self.assertIn("quantizer.D", err)
        self.assertFalse(path.exists(out_dir))

    def test_end_to_end_determinism(self):
        outputs = []
        for name in ("a", "b"):
            out_dir = self.out(name)
            codebook = self.out(f"{name}.rseq")
            _main("simulate", "-c", CONFIG, "-od", path.join(out_dir, "data"))
            manifest = path.join(out_dir, "data", "manifest.tsv")
            _main("train-codebook", "-c", CONFIG, "-m", manifest, "-cb", codebook)
            code, _ = _main(
                "run", "-c", CONFIG, "-i", manifest, "-cb", codebook, "-od", out_dir
            )
            self.assertEqual(code, tool.EXIT_OK)
            outputs.append(out_dir)

        a, b = outputs
        self.assertTrue(filecmp.cmp(self.out("a.rseq"), self.out("b.rseq"), shallow=False))
        names = [f"rec{i:05d}_restored.wav" for i in range(3)]
        _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        self.assertEqual(mismatch, [])
        self.assertEqual(errors, [])
        self.assertEqual(
            read_report(path.join(a, "report.tsv")).rows,
            read_report(path.join(b, "report.tsv")).rows,
        )


class TestEval(ToolTestCase):
    def test_dry_estimates(self):
        estimates = self.out("estimates")
        os.makedirs(estimates)
        for entry in load_manifest(self.manifest):
            shutil.copy(
                path.join(self.data_dir, entry.dry_path),
                path.join(estimates, f"{entry.id}.wav"),
            )

        report_path = self.out("eval.tsv")
        code, _ = _main(
            "eval", "-c", CONFIG, "-e", estimates, "-m", self.manifest, "-r", report_path
        )
        self.assertEqual(code, tool.EXIT_OK)

        rows = {row["id"]: row for row in read_report(report_path).rows}
        self.assertEqual(
            sorted(rows),
            sorted(
                ["rec00000", "rec00001", "rec00002", "mean", "median"]
                + ["snr=-5.0", "snr=0.0", "snr=5.0"]
            ),
        )
        self.assertEqual(rows["mean"]["si_sdr_dry"], 120.0)
        self.assertEqual(rows["rec00001"]["lsd"], 0.0)

    def test_missing_estimate(self):
        code, _ = _main(
            "eval", "-c", CONFIG, "-e", self.work.name, "-m", self.manifest,
            "-r", self.out("eval.tsv"),
        )
        self.assertEqual(code, tool.EXIT_FAILURE)


class TestRir(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.output = path.join(self.tmp.name, "rir.wav")
        self.room = ["--room", "6", "5", "3", "--source", "2", "1.5", "1.2"]
        self.room += ["--mic", "4", "3.5", "1.6"]

    def tearDown(self):
        self.tmp.cleanup()

    def test_writes_response(self):
        code, _ = _main("rir", *self.room, "--rt60", "0.3", "-o", self.output)
        self.assertEqual(code, tool.EXIT_OK)
        rir = read_wav(self.output)
        self.assertEqual(rir.sample_rate, 16000)
        self.assertGreater(len(rir), int(0.3 * 16000))

    def test_negative_rt60(self):
        code, _ = _main("rir", *self.room, "--rt60", "-0.2", "-o", self.output)
        self.assertEqual(code, tool.EXIT_CONFIG)
        self.assertFalse(path.exists(self.output))

    def test_source_outside_room(self):
        room = ["--room", "6", "5", "3", "--source", "7", "1", "1", "--mic", "4", "3", "1"]
        code, _ = _main("rir", *room, "-o", self.output)
        self.assertEqual(code, tool.EXIT_FAILURE)

    def test_config_sample_rate_and_order(self):
        code, _ = _main(
            "rir",
            *self.room,
            "--set",
            "sample_rate=8000",
            "--set",
            "simulate.max_reflection_order=0",
            "-o",
            self.output,
        )
        self.assertEqual(code, tool.EXIT_OK)

        rir = read_wav(self.output)
        self.assertEqual(rir.sample_rate, 8000)
        self.assertEqual(np.count_nonzero(rir.samples), 1)

    def test_flags_override_config(self):
        code, _ = _main(
            "rir", *self.room, "--set", "sample_rate=8000", "-sr", "16000", "-o", self.output
        )
        self.assertEqual(code, tool.EXIT_OK)
        self.assertEqual(read_wav(self.output).sample_rate, 16000)

    def test_seed_is_not_an_option(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                tool.get_arguments(["rir", *self.room, "--seed", "3", "-o", self.output])

    def test_anechoic_estimate(self):
        with contextlib.redirect_stdout(io.StringIO()):
            estimate = tool.cmd_rir(
                tool.RoomSpec((6, 5, 3), (2, 1.5, 1.2), (4, 3.5, 1.6)), 16000, self.output
            )
        self.assertIsNone(estimate)


class TestQuantize(ToolTestCase):
    def test_quantize_npy(self):
        features = np.random.default_rng(0).standard_normal((20, 32)) * 0.2
        features_path = self.out("features.npy")
        np.save(features_path, features)

        code, _ = _main(
            "quantize",
            "-c",
            CONFIG,
            "-f",
            features_path,
            "-cb",
            self.codebook,
            "-o",
            self.out("codes.blob"),
        )
        self.assertEqual(code, tool.EXIT_OK)

        kind, codes = load_arrays(self.out("codes.blob"))
        self.assertEqual(kind, "codes")
        self.assertEqual([c.shape for c in codes], [(20, 32), (20,)])

    def test_quantize_needs_codebook(self):
        np.save(self.out("features.npy"), np.zeros((2, 32)))
        code, _ = _main(
            "quantize", "-c", CONFIG, "-f", self.out("features.npy"), "-o", self.out("c")
        )
        self.assertEqual(code, tool.EXIT_CONFIG)


class TestRunConfig(TestCase):
    def test_overrides(self):
        cfg = RunConfig.from_file(CONFIG).with_overrides(
            ["quantizer.scheme=rvq", "mask.bound=1.5"], seed=3
        )
        self.assertEqual(cfg["quantizer.scheme"], "rvq")
        self.assertEqual(cfg["mask.bound"], 1.5)
        self.assertEqual(cfg["seed"], 3)
        self.assertEqual(cfg["quantizer.D"], 32)

    def test_wrong_type(self):
        with self.assertRaises(tool.ConfigError):
            RunConfig({"quantizer.n_q": "two"})

    def test_section(self):
        cfg = RunConfig.from_file(CONFIG)
        self.assertEqual(cfg.section("train")["epochs"], 2)


if __name__ == "__main__":
    unittest.main()
