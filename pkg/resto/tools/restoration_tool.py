import argparse
import logging
import os
import sys

import numpy as np
from joblib import Parallel, delayed
from termcolor import colored

from .._container import load_arrays, save_arrays
from ..exceptions import (
    ConfigError,
    InsufficientDecayError,
    RestoError,
    SampleRateMismatchError,
)
from ..experiments import RunConfig, utils
from ..objectives import log_spectral_distance, si_sdr
from ..pipeline import read_report, run_pipeline, summarize, write_report
from ..quantize import (
    TrainRow,
    load_codebooks,
    quantize,
    save_codebooks,
    train_codebooks,
)
from ..simulate import (
    RoomSpec,
    estimate_rt60,
    generate_rir,
    load_manifest,
    load_record,
    synthesize_dataset,
)
from ..utils import atomic_write, read_wav, write_wav

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _manifest_root(manifest):
    return os.path.dirname(os.path.abspath(manifest))


def _print_summary(row, keys=("si_sdr_dry", "si_sdr_reverb", "lsd", "feature_mse")):
    print("#" * 50)
    for key in keys:
        if key in row:
            print(
                colored(key, "yellow"),
                f': {colored(f"{row[key]:.6f}", "blue", attrs=["bold"])}',
            )
    print("#" * 50)


def cmd_simulate(cfg, out_dir):
    """Synthesize a dataset and return its manifest path."""
    dataset_cfg = utils.build_dataset_config(cfg)
    manifest = synthesize_dataset(dataset_cfg, cfg["seed"], out_dir)
    print(f"Wrote {dataset_cfg.count} records to {manifest}")
    return manifest


def _write_stats(path, stats):
    with atomic_write(path, "w") as f:
        f.write("\t".join(TrainRow._fields) + "\n")
        for row in stats.rows:
            f.write("\t".join(repr(v) for v in row) + "\n")
        f.write(f"final\t\t\t{stats.final_mse!r}\t\n")


def cmd_train_codebook(cfg, manifest, codebook):
    """Train the configured stack on the reverberant signals of a manifest.

    The codebook file is written to `codebook` and the per-epoch statistics
    to ``<codebook>.stats.tsv``.

    """
    stack = utils.build_stack(cfg)
    train_cfg = utils.build_train_config(cfg)
    adapter = utils.build_adapter_config(cfg)

    entries = load_manifest(manifest)
    features = utils.load_training_features(
        entries, _manifest_root(manifest), adapter, jobs=cfg["run.jobs"]
    )

    stats = train_codebooks(stack, features, train_cfg)
    save_codebooks(stack, codebook)
    _write_stats(f"{codebook}.stats.tsv", stats)

    print(
        colored("Final feature MSE", "yellow"),
        f': {colored(f"{stats.final_mse:.6f}", "blue", attrs=["bold"])}',
    )
    return stats


def _load_stack(cfg):
    if cfg["paths.codebook"] is None:
        _logger.info("No codebook configured, features stay unquantized.")
        return None

    stack = load_codebooks(cfg["paths.codebook"])
    if stack.dim != cfg["quantizer.D"]:
        raise ConfigError(
            f"Codebook {cfg['paths.codebook']} holds {stack.dim}-dimensional codes, "
            f"quantizer.D is {cfg['quantizer.D']}."
        )
    return stack


def _check_rate(waveform, cfg, name):
    if waveform.sample_rate != cfg["sample_rate"]:
        raise SampleRateMismatchError(
            f"{name} is sampled at {waveform.sample_rate} Hz, "
            f"the configuration expects {cfg['sample_rate']} Hz."
        )


def _run_entry(entry, root, cfg, stack, out_dir, wav_format):
    record = load_record(entry, root)
    _check_rate(record.mixture, cfg, entry.id)

    mask = utils.build_mask_source(cfg, entry.id)
    out = run_pipeline(record, utils.build_pipeline_config(cfg, stack, mask))
    write_wav(os.path.join(out_dir, f"{entry.id}_restored.wav"), out.restored, wav_format)

    row = {"id": entry.id, "snr_db": entry.snr_db}
    row.update(out.metrics)
    return row


def cmd_run(cfg, inputs, out_dir):
    """Run the pipeline on a manifest or on a single WAV file.

    Restored signals go to ``<out_dir>/<id>_restored.wav`` and the report to
    ``<out_dir>/report.tsv``, whose path is returned.

    """
    stack = _load_stack(cfg)
    wav_format = cfg["simulate.wav_format"]
    os.makedirs(out_dir, exist_ok=True)

    if inputs.lower().endswith(".wav"):
        mixture = read_wav(inputs)
        _check_rate(mixture, cfg, inputs)

        utterance = os.path.splitext(os.path.basename(inputs))[0]
        mask = utils.build_mask_source(cfg, utterance)
        out = run_pipeline(mixture, utils.build_pipeline_config(cfg, stack, mask))
        write_wav(
            os.path.join(out_dir, f"{utterance}_restored.wav"), out.restored, wav_format
        )

        row = {"id": utterance}
        row.update(out.metrics)
        rows = [row]
    else:
        entries = load_manifest(inputs)
        if len(entries) == 0:
            raise ValueError(f"{inputs} has no records.")
        root = _manifest_root(inputs)
        rows = Parallel(n_jobs=cfg["run.jobs"])(
            delayed(_run_entry)(entry, root, cfg, stack, out_dir, wav_format)
            for entry in entries
        )

    report = os.path.join(out_dir, "report.tsv")
    write_report(report, rows, cfg.to_dict())

    if len(rows) > 1:
        _print_summary(summarize(rows)[0])
    else:
        _print_summary(rows[0])

    return report


def _estimate_path(estimates_dir, entry):
    for name in (f"{entry.id}_restored.wav", f"{entry.id}.wav"):
        path = os.path.join(estimates_dir, name)
        if os.path.isfile(path):
            return path
    raise FileNotFoundError(f"No estimate of {entry.id} in {estimates_dir}.")


def _eval_entry(entry, root, estimates_dir, stft_cfg):
    record = load_record(entry, root)
    estimate = read_wav(_estimate_path(estimates_dir, entry))

    return {
        "id": entry.id,
        "snr_db": entry.snr_db,
        "si_sdr_dry": si_sdr(estimate, record.dry),
        "si_sdr_reverb": si_sdr(estimate, record.reverberant),
        "lsd": log_spectral_distance(estimate, record.dry, stft_cfg),
    }


def cmd_eval(cfg, estimates_dir, manifest, report):
    """Score estimates against a manifest and append aggregate rows.

    Estimates are looked up as ``<id>_restored.wav`` then ``<id>.wav``. After
    the per-record rows come ``mean``, ``median`` and one ``snr=<level>`` row
    per SNR level.

    """
    entries = load_manifest(manifest)
    if len(entries) == 0:
        raise ValueError(f"{manifest} has no records.")

    stft_cfg = utils.build_stft_config(cfg)
    root = _manifest_root(manifest)
    rows = Parallel(n_jobs=cfg["run.jobs"])(
        delayed(_eval_entry)(entry, root, estimates_dir, stft_cfg) for entry in entries
    )

    summary = summarize(rows)
    write_report(report, rows + summary, cfg.to_dict())
    _print_summary(summary[0])

    return read_report(report)


def cmd_rir(room, sample_rate, output):
    """Simulate one impulse response, write it and return its RT60 estimate."""
    rir = generate_rir(room, sample_rate)
    write_wav(output, rir.to_waveform())

    try:
        estimate = estimate_rt60(rir)
    except InsufficientDecayError:
        estimate = None

    print(f"{len(rir)} taps, direct path at sample {rir.direct_path_index}")
    if estimate is not None:
        print(
            colored("Estimated RT60", "yellow"),
            f': {colored(f"{estimate:.3f} s", "blue", attrs=["bold"])}',
        )
    return estimate


def cmd_quantize(cfg, features_path, output):
    """Quantize a feature matrix (``.npy`` or features blob) into a codes blob."""
    cfg.require_existing("paths.codebook")
    stack = load_codebooks(cfg["paths.codebook"])

    if features_path.endswith(".npy"):
        features = np.load(features_path)
    else:
        _, arrays = load_arrays(features_path, kind="features")
        features = arrays[0]

    result = quantize(stack, features)
    save_arrays(output, "codes", [np.asarray(c, dtype=np.int64) for c in result.codes])

    print(f"Quantized {features.shape[0]} frames with {len(result.codes)} stages")
    return result


def _load_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(args.set or (), seed=getattr(args, "seed", None))
    utils.validate(cfg)
    return cfg


def _output_dir(args, cfg):
    out_dir = args.output_dir or cfg["paths.output_dir"]
    if out_dir is None:
        raise ConfigError("An output directory is needed (--output-dir).")
    return out_dir


def _handle_simulate(args):
    cfg = _load_config(args)
    cmd_simulate(cfg, _output_dir(args, cfg))


def _handle_train_codebook(args):
    cfg = _load_config(args)
    manifest = args.manifest or cfg["paths.manifest"]
    codebook = args.codebook or cfg["paths.codebook"]
    if manifest is None or codebook is None:
        raise ConfigError("A manifest and a codebook path are needed.")
    if not os.path.isfile(manifest):
        raise ConfigError(f"Manifest {manifest} does not exist.")
    cmd_train_codebook(cfg, manifest, codebook)


def _handle_run(args):
    cfg = _load_config(args)
    if args.codebook is not None:
        cfg = cfg.with_overrides([f"paths.codebook={args.codebook}"])
    if cfg["paths.codebook"] is not None and not os.path.isfile(cfg["paths.codebook"]):
        raise ConfigError(f"Codebook {cfg['paths.codebook']} does not exist.")

    inputs = args.input or cfg["paths.manifest"]
    if inputs is None or not os.path.isfile(inputs):
        raise ConfigError(f"Input {inputs} does not exist.")
    if inputs.lower().endswith(".wav") and cfg["mask.kind"] == "oracle":
        raise ConfigError("The oracle mask needs the references of a manifest.")

    cmd_run(cfg, inputs, _output_dir(args, cfg))


def _handle_eval(args):
    cfg = _load_config(args)
    manifest = args.manifest or cfg["paths.manifest"]
    if manifest is None or not os.path.isfile(manifest):
        raise ConfigError(f"Manifest {manifest} does not exist.")
    if not os.path.isdir(args.estimates_dir):
        raise ConfigError(f"Estimates directory {args.estimates_dir} does not exist.")
    cmd_eval(cfg, args.estimates_dir, manifest, args.report)


def _handle_rir(args):
    cfg = _load_config(args)
    order = args.order if args.order is not None else cfg["simulate.max_reflection_order"]
    sample_rate = args.sample_rate or cfg["sample_rate"]

    if args.rt60 < 0:
        raise ConfigError(f"RT60 must be non-negative, got {args.rt60}.")
    room = RoomSpec(
        args.room,
        args.source,
        args.mic,
        rt60_target=args.rt60,
        max_reflection_order=order,
    )
    cmd_rir(room, sample_rate, args.output)


def _handle_quantize(args):
    cfg = _load_config(args)
    if args.codebook is not None:
        cfg = cfg.with_overrides([f"paths.codebook={args.codebook}"])
    if not os.path.isfile(args.features):
        raise ConfigError(f"Features {args.features} do not exist.")
    cmd_quantize(cfg, args.features, args.output)


def get_arguments(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="JSON configuration file.")
    common.add_argument(
        "--set",
        help="Override a configuration key, e.g. --set quantizer.scheme=rvq.",
        action="append",
        metavar="KEY=VALUE",
    )
    common.add_argument(
        "-v", "--verbose", help="Log progress messages.", action="store_true"
    )

    seeded = argparse.ArgumentParser(add_help=False, parents=[common])
    seeded.add_argument("--seed", help="Override the configured seed.", type=int)

    parser = argparse.ArgumentParser(
        prog="resto", description="Speech denoising and restoration experiments."
    )
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    parser_simulate = subparsers.add_parser(
        "simulate", help="Synthesize noisy-reverberant mixtures.", parents=[seeded]
    )
    parser_simulate.add_argument(
        "-od", "--output-dir", help="Dataset directory, receives manifest.tsv."
    )
    parser_simulate.set_defaults(func=_handle_simulate)

    parser_train = subparsers.add_parser(
        "train-codebook", help="Train quantizer codebooks.", parents=[seeded]
    )
    parser_train.add_argument("-m", "--manifest", help="Training manifest.")
    parser_train.add_argument("-cb", "--codebook", help="Output codebook file.")
    parser_train.set_defaults(func=_handle_train_codebook)

    parser_run = subparsers.add_parser(
        "run", help="Denoise and restore a manifest or a WAV file.", parents=[seeded]
    )
    parser_run.add_argument("-i", "--input", help="Manifest or mono WAV file.")
    parser_run.add_argument("-cb", "--codebook", help="Codebook file.")
    parser_run.add_argument("-od", "--output-dir", help="Output directory.")
    parser_run.set_defaults(func=_handle_run)

    parser_eval = subparsers.add_parser(
        "eval", help="Score estimates against a manifest.", parents=[seeded]
    )
    parser_eval.add_argument(
        "-e", "--estimates-dir", help="Directory of estimates.", required=True
    )
    parser_eval.add_argument("-m", "--manifest", help="Reference manifest.")
    parser_eval.add_argument(
        "-r", "--report", help="Output report.", default="eval_report.tsv"
    )
    parser_eval.set_defaults(func=_handle_eval)

    parser_rir = subparsers.add_parser(
        "rir", help="Simulate a room impulse response.", parents=[common]
    )
    parser_rir.add_argument(
        "--room", help="Room size in meters.", nargs=3, type=float, required=True
    )
    parser_rir.add_argument(
        "--source", help="Source position.", nargs=3, type=float, required=True
    )
    parser_rir.add_argument(
        "--mic", help="Microphone position.", nargs=3, type=float, required=True
    )
    parser_rir.add_argument("--rt60", help="RT60 in seconds.", type=float, default=0.3)
    parser_rir.add_argument(
        "--order",
        help="Maximum reflection order, simulate.max_reflection_order by default.",
        type=int,
    )
    parser_rir.add_argument(
        "-sr", "--sample-rate", help="Sample rate, sample_rate by default.", type=int
    )
    parser_rir.add_argument("-o", "--output", help="Output WAV file.", required=True)
    parser_rir.set_defaults(func=_handle_rir)

    parser_quantize = subparsers.add_parser(
        "quantize", help="Quantize a feature matrix.", parents=[seeded]
    )
    parser_quantize.add_argument(
        "-f", "--features", help=".npy file or features blob.", required=True
    )
    parser_quantize.add_argument("-cb", "--codebook", help="Codebook file.")
    parser_quantize.add_argument("-o", "--output", help="Codes blob.", required=True)
    parser_quantize.set_defaults(func=_handle_quantize)

    return parser.parse_args(argv)


def main(argv=None):
    args = get_arguments(argv)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        args.func(args)
    except ConfigError as e:
        print(colored(f"Configuration error: {e}", "red"), file=sys.stderr)
        return EXIT_CONFIG
    except (RestoError, OSError, ValueError) as e:
        print(colored(f"Error: {e}", "red"), file=sys.stderr)
        return EXIT_FAILURE

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
