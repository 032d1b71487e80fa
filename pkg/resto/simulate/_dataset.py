# noqa: D100

import glob
import logging
import math
import os
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from torch.utils.data import Dataset

from .._constants import DEFAULT_SAMPLE_RATE, SPEED_OF_SOUND
from ..exceptions import ConfigError, FormatError, SampleRateMismatchError
from ..utils import Waveform, atomic_write, read_wav, write_wav
from ._mixing import MixtureRecord, apply_rir, mix_at_snr
from ._room import RoomSpec, generate_rir, minimum_rt60

__all__ = [
    "DatasetConfig",
    "ManifestEntry",
    "MANIFEST_COLUMNS",
    "synthesize_dataset",
    "pseudo_speech",
    "write_manifest",
    "load_manifest",
    "load_record",
    "MixtureDataset",
]

_logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = (
    "id",
    "dry_path",
    "reverb_path",
    "noise_path",
    "mix_path",
    "snr_db",
    "rt60_s",
    "seed",
    "noise_gain",
)

_MAX_POSITION_DRAWS = 1000


@dataclass(frozen=True)
class DatasetConfig:

    """Recipe of a synthetic noisy-reverberant dataset.

    SNR and RT60 are taken from `snr_levels` / `rt60_levels` in round-robin
    order (record ``i`` gets ``levels[i % len(levels)]``) when given, and
    drawn uniformly from `snr_range` / `rt60_range` otherwise.

    Room size ranges are in meters; sources and microphones keep
    `wall_margin` from the walls and `min_distance` from each other.

    """

    count: int = 10
    segment_seconds: float = 6.0
    sample_rate: int = DEFAULT_SAMPLE_RATE
    snr_levels: Optional[Tuple[float, ...]] = None
    snr_range: Tuple[float, float] = (-6.0, 6.0)
    rt60_levels: Optional[Tuple[float, ...]] = None
    rt60_range: Tuple[float, float] = (0.0, 0.6)
    room_length_range: Tuple[float, float] = (3.0, 10.0)
    room_width_range: Tuple[float, float] = (3.0, 8.0)
    room_height_range: Tuple[float, float] = (2.5, 4.0)
    wall_margin: float = 0.5
    min_distance: float = 0.5
    max_reflection_order: int = 30
    speed_of_sound: float = SPEED_OF_SOUND
    speech_dir: Optional[str] = None
    noise_dir: Optional[str] = None
    wav_format: str = "float32"
    jobs: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"count must be at least 1, got {self.count}.")
        if self.segment_seconds <= 0:
            raise ConfigError("segment_seconds must be positive.")
        if self.sample_rate <= 0:
            raise ConfigError(f"Invalid sample rate {self.sample_rate}.")

        for name in ("snr_levels", "rt60_levels"):
            levels = getattr(self, name)
            if levels is not None:
                if len(levels) == 0:
                    raise ConfigError(f"{name} must not be empty.")
                object.__setattr__(self, name, tuple(float(v) for v in levels))

        for name in (
            "snr_range",
            "rt60_range",
            "room_length_range",
            "room_width_range",
            "room_height_range",
        ):
            low, high = getattr(self, name)
            if low > high:
                raise ConfigError(f"{name} has low > high: {(low, high)}.")
            object.__setattr__(self, name, (float(low), float(high)))

        rt60_values = self.rt60_levels or self.rt60_range
        if min(rt60_values) < 0:
            raise ConfigError(f"RT60 values must be non-negative, got {rt60_values}.")

        smallest = min(
            self.room_length_range[0],
            self.room_width_range[0],
            self.room_height_range[0],
        )
        if smallest <= 2 * self.wall_margin:
            raise ConfigError("Rooms are too small for the configured wall margin.")

        if self.wav_format not in ("float32", "pcm16"):
            raise ConfigError(f"Unknown WAV format {self.wav_format}.")
        if self.jobs == 0:
            raise ConfigError("jobs must be non-zero.")

        for name in ("speech_dir", "noise_dir"):
            directory = getattr(self, name)
            if directory is not None and not os.path.isdir(directory):
                raise ConfigError(f"{name} {directory} is not a directory.")

    @property
    def segment_length(self):
        return int(round(self.segment_seconds * self.sample_rate))


class ManifestEntry(NamedTuple):
    id: str
    dry_path: str
    reverb_path: str
    noise_path: str
    mix_path: str
    snr_db: float
    rt60_s: float
    seed: int
    noise_gain: float = 1.0


def pseudo_speech(length, sample_rate, rng):
    """Harmonic-plus-noise signal with a speech-like spectrum and rhythm.

    The fundamental glides between 100 and 250 Hz, harmonics roll off as
    :math:`1/h`, and a gate at about 4 syllables per second shapes the
    envelope over a low aspiration-noise floor.

    """
    t = np.arange(length) / sample_rate

    glide_rate = rng.uniform(0.2, 0.6)
    f0 = 175.0 + 75.0 * np.sin(2 * np.pi * glide_rate * t + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate

    n_harmonics = max(1, min(32, int(sample_rate / 2 // 250)))
    harmonics = np.arange(1, n_harmonics + 1)
    voiced = (np.sin(np.outer(phase, harmonics)) / harmonics).sum(axis=1)

    syllable_rate = rng.uniform(3.0, 5.0)
    gate = 0.5 * (1 - np.cos(2 * np.pi * syllable_rate * t + rng.uniform(0, 2 * np.pi)))
    envelope = gate ** 2

    aspiration = 0.02 * rng.standard_normal(length)
    signal = envelope * voiced + aspiration

    return 0.5 * signal / np.max(np.abs(signal))


def _list_wavs(directory, kind):
    files = sorted(glob.glob(os.path.join(directory, "**", "*.wav"), recursive=True))
    if len(files) == 0:
        raise ConfigError(f"No {kind} WAV files found in {directory}.")
    return files


def _take_segment(files, length, sample_rate, rng):
    path = files[int(rng.integers(0, len(files)))]
    waveform = read_wav(path)
    if waveform.sample_rate != sample_rate:
        raise SampleRateMismatchError(
            f"{path} is sampled at {waveform.sample_rate} Hz, expected {sample_rate} Hz."
        )

    samples = waveform.samples
    if samples.size >= length:
        offset = int(rng.integers(0, samples.size - length + 1))
        return samples[offset : offset + length]
    return np.resize(samples, length)


def _draw_room(cfg, rt60, rng):
    dimensions = tuple(
        rng.uniform(low, high)
        for low, high in (
            cfg.room_length_range,
            cfg.room_width_range,
            cfg.room_height_range,
        )
    )

    def position():
        return tuple(
            rng.uniform(cfg.wall_margin, d - cfg.wall_margin) for d in dimensions
        )

    for _ in range(_MAX_POSITION_DRAWS):
        source, mic = position(), position()
        if math.dist(source, mic) >= cfg.min_distance:
            break
    else:
        raise ConfigError("Could not place source and microphone apart.")

    floor = minimum_rt60(dimensions, cfg.speed_of_sound)
    if 0 < rt60 < floor:
        _logger.debug("Raising RT60 %.3f s to the room minimum %.3f s.", rt60, floor)
        rt60 = floor

    return RoomSpec(
        dimensions,
        source,
        mic,
        rt60_target=rt60,
        max_reflection_order=cfg.max_reflection_order,
        speed_of_sound=cfg.speed_of_sound,
    )


def _pick(levels, value_range, index, rng):
    if levels is not None:
        return levels[index % len(levels)]
    return float(rng.uniform(*value_range))


def _synthesize_record(cfg, seed, index, out_dir, speech_files, noise_files):
    sequence = np.random.SeedSequence([seed, index])
    rng = np.random.default_rng(sequence)
    mix_seed = int(sequence.generate_state(1)[0])

    snr_db = _pick(cfg.snr_levels, cfg.snr_range, index, rng)
    rt60 = _pick(cfg.rt60_levels, cfg.rt60_range, index, rng)
    room = _draw_room(cfg, rt60, rng)

    length = cfg.segment_length
    if speech_files:
        dry = _take_segment(speech_files, length, cfg.sample_rate, rng)
    else:
        dry = pseudo_speech(length, cfg.sample_rate, rng)

    if noise_files:
        noise = _take_segment(noise_files, length, cfg.sample_rate, rng)
    else:
        noise = rng.standard_normal(length)

    dry = Waveform(dry, cfg.sample_rate)
    rir = generate_rir(room, cfg.sample_rate)
    record = mix_at_snr(
        apply_rir(dry, rir),
        Waveform(noise, cfg.sample_rate),
        snr_db,
        mix_seed,
        dry=dry,
        rir=rir,
    )

    record_id = f"rec{index:05d}"
    paths = {}
    for column, waveform in (
        ("dry_path", record.dry),
        ("reverb_path", record.reverberant),
        ("noise_path", record.noise),
        ("mix_path", record.mixture),
    ):
        relative = os.path.join("wav", f"{record_id}_{column.split('_')[0]}.wav")
        write_wav(os.path.join(out_dir, relative), waveform, cfg.wav_format)
        paths[column] = relative

    _logger.info("Synthesized record %d/%d.", index + 1, cfg.count)

    return ManifestEntry(
        id=record_id,
        snr_db=float(snr_db),
        rt60_s=float(room.rt60_target),
        seed=mix_seed,
        noise_gain=float(record.noise_gain),
        **paths,
    )


def synthesize_dataset(cfg, seed, out_dir):
    """Synthesize noisy-reverberant mixtures and their manifest.

    Every record depends only on `(cfg, seed, index)`, so the output is the
    same whatever `cfg.jobs` is.

    Parameters
    ----------
    cfg : DatasetConfig
        Dataset recipe.
    seed : int
        Master seed.
    out_dir : str
        Output directory. WAV files go to ``out_dir/wav``.

    Returns
    -------
    str
        Path of the written manifest.

    """
    speech_files = _list_wavs(cfg.speech_dir, "speech") if cfg.speech_dir else []
    noise_files = _list_wavs(cfg.noise_dir, "noise") if cfg.noise_dir else []

    os.makedirs(os.path.join(out_dir, "wav"), exist_ok=True)

    entries = Parallel(n_jobs=cfg.jobs)(
        delayed(_synthesize_record)(
            cfg, seed, index, out_dir, speech_files, noise_files
        )
        for index in range(cfg.count)
    )

    manifest_path = os.path.join(out_dir, "manifest.tsv")
    write_manifest(manifest_path, entries)

    return manifest_path


def write_manifest(path, entries):
    with atomic_write(path, "w") as f:
        f.write("\t".join(MANIFEST_COLUMNS) + "\n")
        for entry in entries:
            f.write(
                "\t".join(
                    repr(value) if isinstance(value, float) else str(value)
                    for value in entry
                )
                + "\n"
            )


def load_manifest(path):
    """Read a manifest written by :func:`synthesize_dataset`.

    Returns
    -------
    list of ManifestEntry
        Rows in file order.

    """
    with open(path, "r") as f:
        lines = [line.rstrip("\n") for line in f if line.strip()]

    if not lines or tuple(lines[0].split("\t")) != MANIFEST_COLUMNS:
        raise FormatError(f"{path} does not start with the manifest header.")

    entries = []
    for number, line in enumerate(lines[1:], start=2):
        values = line.split("\t")
        if len(values) != len(MANIFEST_COLUMNS):
            raise FormatError(f"{path}:{number} has {len(values)} columns.")
        try:
            entries.append(
                ManifestEntry(
                    *values[:5],
                    snr_db=float(values[5]),
                    rt60_s=float(values[6]),
                    seed=int(values[7]),
                    noise_gain=float(values[8]),
                )
            )
        except ValueError as e:
            raise FormatError(f"{path}:{number} is malformed: {e}") from e

    return entries


def load_record(entry, root):
    """Rebuild a :class:`MixtureRecord` from the WAV files of a manifest row.

    The impulse response is not stored, so the record's `rir` is None. The
    components are read back at the precision of their WAV files, so with
    float32 files the mixture equals reverberant plus noise to about 1e-7
    rather than to double precision.

    """
    waveforms = [
        read_wav(os.path.join(root, p))
        for p in (entry.dry_path, entry.reverb_path, entry.noise_path, entry.mix_path)
    ]
    dry, reverberant, noise, mixture = waveforms

    return MixtureRecord(
        dry=dry,
        reverberant=reverberant,
        noise=noise,
        mixture=mixture,
        snr_db=entry.snr_db,
        rir=None,
        seed=entry.seed,
        noise_gain=entry.noise_gain,
    )


class MixtureDataset(Dataset):
    """Records of a manifest, loaded lazily."""

    def __init__(self, manifest_path, transform=None):
        self.manifest_path = manifest_path
        self.root_dir = os.path.dirname(os.path.abspath(manifest_path))
        self.entries = load_manifest(manifest_path)
        self.transform = transform

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        record = load_record(self.entries[idx], self.root_dir)

        if self.transform:
            record = self.transform(record)

        return record
