# noqa: D100

import logging
import math

import numpy as np
from numba import jit
from scipy.stats import linregress

from .._constants import DEFAULT_SAMPLE_RATE, SPEED_OF_SOUND
from ..exceptions import GeometryError, InfeasibleRoomError, InsufficientDecayError
from ..utils import Waveform

__all__ = [
    "RoomSpec",
    "RIR",
    "generate_rir",
    "estimate_rt60",
    "wall_absorption",
    "minimum_rt60",
]

_logger = logging.getLogger(__name__)

# absorbs rounding in floor() of delays and in the Sabine ratio
_TOLERANCE = 1e-9

_MAX_RT60 = 0.6


class RoomSpec:

    """Shoebox room with one source and one microphone.

    Attributes
    ----------
    dimensions : tuple of float
        Room size along x, y and z in meters.
    source_position, mic_position : tuple of float
        Positions in meters, strictly inside the room.
    rt60_target : float
        Reverberation time in seconds, 0 means anechoic.
    max_reflection_order : int
        Highest number of wall reflections of an image source.
    speed_of_sound : float
        In m/s.

    """

    __slots__ = (
        "dimensions",
        "source_position",
        "mic_position",
        "rt60_target",
        "max_reflection_order",
        "speed_of_sound",
    )

    def __init__(
        self,
        dimensions,
        source_position,
        mic_position,
        rt60_target=0.0,
        max_reflection_order=30,
        speed_of_sound=SPEED_OF_SOUND,
    ):
        dimensions = tuple(float(v) for v in dimensions)
        source_position = tuple(float(v) for v in source_position)
        mic_position = tuple(float(v) for v in mic_position)

        if not (len(dimensions) == len(source_position) == len(mic_position) == 3):
            raise GeometryError("Room dimensions and positions need 3 coordinates.")
        if any(v <= 0 for v in dimensions):
            raise GeometryError(f"Room dimensions must be positive, got {dimensions}.")

        for name, position in (("source", source_position), ("mic", mic_position)):
            if not all(0.0 < p < d for p, d in zip(position, dimensions)):
                raise GeometryError(
                    f"The {name} at {position} is not strictly inside "
                    f"the room {dimensions}."
                )

        if source_position == mic_position:
            raise GeometryError("Source and microphone are at the same position.")
        if rt60_target < 0:
            raise ValueError(f"rt60_target must be non-negative, got {rt60_target}.")
        if max_reflection_order < 0 or int(max_reflection_order) != max_reflection_order:
            raise ValueError("max_reflection_order must be a non-negative integer.")
        if speed_of_sound <= 0:
            raise ValueError("speed_of_sound must be positive.")

        self.dimensions = dimensions
        self.source_position = source_position
        self.mic_position = mic_position
        self.rt60_target = float(rt60_target)
        self.max_reflection_order = int(max_reflection_order)
        self.speed_of_sound = float(speed_of_sound)

    @property
    def distance(self):
        return math.dist(self.source_position, self.mic_position)

    @property
    def volume(self):
        x, y, z = self.dimensions
        return x * y * z

    @property
    def surface(self):
        x, y, z = self.dimensions
        return 2.0 * (x * y + y * z + x * z)

    def __repr__(self):
        return (
            f"RoomSpec(dimensions={self.dimensions}, source={self.source_position}, "
            f"mic={self.mic_position}, rt60={self.rt60_target}, "
            f"order={self.max_reflection_order})"
        )


class RIR:

    """Room impulse response.

    Attributes
    ----------
    taps : ndarray
        Impulse response samples.
    sample_rate : int
        In Hz.
    room : RoomSpec or None
        Room the response was simulated for, None for external responses.
    direct_path_index : int
        Index of the direct-path tap.

    """

    __slots__ = ("taps", "sample_rate", "room", "direct_path_index")

    def __init__(self, taps, sample_rate, room=None, direct_path_index=None):
        taps = np.array(taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size == 0:
            raise ValueError("RIR taps must be a non-empty 1-D array.")
        if not np.all(np.isfinite(taps)):
            raise ValueError("RIR taps must be finite.")

        if direct_path_index is None:
            nonzero = np.flatnonzero(taps)
            direct_path_index = int(nonzero[0]) if nonzero.size else 0

        taps.setflags(write=False)
        self.taps = taps
        self.sample_rate = int(sample_rate)
        self.room = room
        self.direct_path_index = int(direct_path_index)

    def energy(self):
        return float(np.sum(np.square(self.taps)))

    def to_waveform(self):
        return Waveform(self.taps, self.sample_rate)

    def __len__(self):
        return self.taps.size


def minimum_rt60(dimensions, speed_of_sound=SPEED_OF_SOUND):
    """Shortest reverberation time Sabine's formula allows for fully absorbing walls."""
    x, y, z = dimensions
    volume = x * y * z
    surface = 2.0 * (x * y + y * z + x * z)
    return 24.0 * math.log(10.0) * volume / (speed_of_sound * surface)


def wall_absorption(room):
    """Uniform wall absorption giving `room.rt60_target` by Sabine's formula.

    Raises
    ------
    InfeasibleRoomError
        If the target is shorter than the room can achieve.

    """
    if room.rt60_target == 0:
        return 1.0

    absorption = (
        24.0
        * math.log(10.0)
        * room.volume
        / (room.speed_of_sound * room.surface * room.rt60_target)
    )
    if absorption > 1.0 + _TOLERANCE:
        raise InfeasibleRoomError(
            f"RT60 of {room.rt60_target} s needs absorption {absorption:.3f} > 1 "
            f"in a room of {room.dimensions} m."
        )
    return min(absorption, 1.0)


@jit(nopython=True)
def _image_sources(source, mic, dimensions, beta, order, c, sample_rate, tolerance):
    side = 2 * order + 1
    capacity = side * side * side * 8
    delays = np.empty(capacity, dtype=np.int64)
    gains = np.empty(capacity, dtype=np.float64)
    n = 0

    for rx in range(-order, order + 1):
        for ry in range(-order, order + 1):
            for rz in range(-order, order + 1):
                for p in range(8):
                    px = p & 1
                    py = (p >> 1) & 1
                    pz = (p >> 2) & 1

                    reflections = (
                        abs(rx - px) + abs(rx) + abs(ry - py) + abs(ry) + abs(rz - pz)
                        + abs(rz)
                    )
                    if reflections > order:
                        continue

                    dx = (1 - 2 * px) * source[0] + 2 * rx * dimensions[0] - mic[0]
                    dy = (1 - 2 * py) * source[1] + 2 * ry * dimensions[1] - mic[1]
                    dz = (1 - 2 * pz) * source[2] + 2 * rz * dimensions[2] - mic[2]
                    distance = math.sqrt(dx * dx + dy * dy + dz * dz)

                    delays[n] = int(math.floor(distance / c * sample_rate + tolerance))
                    gains[n] = beta ** reflections / (4.0 * math.pi * distance)
                    n += 1

    return delays[:n], gains[:n]


def generate_rir(room, sample_rate=DEFAULT_SAMPLE_RATE):
    """Simulate the impulse response of a shoebox room with the image method.

    Walls share one absorption coefficient derived from the target RT60 by
    Sabine's formula; the reflection coefficient is its complement's square
    root. Each image contributes a single tap at the floor of its delay in
    samples with amplitude :math:`\\beta^k / (4 \\pi d)`.

    Parameters
    ----------
    room : RoomSpec
        Room geometry and reverberation target.
    sample_rate : int, optional
        In Hz, by default 16000.

    Returns
    -------
    RIR
        The response, as long as the latest included image.

    """
    if sample_rate <= 0:
        raise ValueError(f"Invalid sample rate {sample_rate}.")

    absorption = wall_absorption(room)
    order = room.max_reflection_order if room.rt60_target > 0 else 0
    beta = math.sqrt(1.0 - absorption)

    if room.rt60_target > _MAX_RT60:
        _logger.warning("RT60 of %.2f s is beyond the tested range.", room.rt60_target)

    delays, gains = _image_sources(
        np.asarray(room.source_position),
        np.asarray(room.mic_position),
        np.asarray(room.dimensions),
        beta,
        order,
        room.speed_of_sound,
        float(sample_rate),
        _TOLERANCE,
    )

    keep = gains > 0
    delays, gains = delays[keep], gains[keep]

    taps = np.bincount(delays, weights=gains, minlength=int(delays.max()) + 1)
    direct_path_index = int(
        math.floor(room.distance / room.speed_of_sound * sample_rate + _TOLERANCE)
    )

    _logger.debug(
        "Generated RIR with %d image sources, %d taps.", delays.size, taps.size
    )

    return RIR(taps, sample_rate, room=room, direct_path_index=direct_path_index)


def estimate_rt60(rir, decay_start_db=-5.0, decay_end_db=-35.0):
    """Estimate the reverberation time with Schroeder backward integration.

    A line is fitted to the energy decay curve between `decay_start_db` and
    `decay_end_db` and extrapolated to a 60 dB decay.

    Raises
    ------
    InsufficientDecayError
        If the decay curve does not cover the fitting range with at least
        two samples.

    """
    energy = np.square(rir.taps)
    total = energy.sum()
    if total <= 0:
        raise ValueError("Cannot estimate the RT60 of a silent RIR.")

    remaining = np.cumsum(energy[::-1])[::-1]
    with np.errstate(divide="ignore"):
        decay_db = 10.0 * np.log10(remaining / total)

    in_range = (decay_db <= decay_start_db) & (decay_db >= decay_end_db)
    if in_range.sum() < 2 or decay_db.min() > decay_end_db:
        raise InsufficientDecayError(
            f"The decay curve does not span {decay_start_db} to {decay_end_db} dB."
        )

    times = np.flatnonzero(in_range) / rir.sample_rate
    fit = linregress(times, decay_db[in_range])
    if fit.slope >= 0:
        raise InsufficientDecayError("The decay curve is not decreasing.")

    return float(-60.0 / fit.slope)
