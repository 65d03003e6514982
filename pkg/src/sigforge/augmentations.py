"""Training-time transforms: the signals RandAugment set, the extra
channel/receiver effects, two-example mixes, and feature representations.

Every transform is a pure function of (frame, parameters, rng draws) and
preserves frame length. Parameter defaults not fixed by the waveform
model are collected in AUGMENT_APPLIERS / DEFAULT_RAND_AUGMENT_OPS and
documented in the README defaults table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from sigforge.frame import mean_power
from sigforge.measurement import spectrogram as _spectrogram
from sigforge.rng import RngStream

# --- involutions and other parameter-free ops -------------------------------

def time_reversal(frame: np.ndarray, undo_inversion: bool = True) -> np.ndarray:
    """Reverse time; reversing also inverts the spectrum, which the
    conjugate undoes when asked (the default in pipelines)."""
    rev = frame[::-1]
    return np.conj(rev) if undo_inversion else rev.copy()


def spectral_inversion(frame: np.ndarray) -> np.ndarray:
    return np.conj(frame)


def channel_swap(frame: np.ndarray) -> np.ndarray:
    """Swap I and Q; algebraically j*conj(x)."""
    return 1j * np.conj(frame)


def amplitude_reversal(frame: np.ndarray) -> np.ndarray:
    return -frame


# --- local-corruption ops ----------------------------------------------------

def drop_samples(frame: np.ndarray, rng: RngStream, drop_rate: float = 0.03,
                 region_len_range: tuple[int, int] = (1, 7),
                 fill: str = "zero") -> np.ndarray:
    """Replace disjoint regions (~drop_rate of the frame in total) with a
    fill value: the last sample before the region (front), the first
    after it (back), the frame mean, or zero."""
    if fill not in ("front", "back", "mean", "zero"):
        raise ValueError(f"unknown fill {fill!r}")
    n = len(frame)
    out = frame.copy()
    target = int(round(drop_rate * n))
    dropped = np.zeros(n, dtype=bool)
    budget = target
    attempts = 0
    while budget > 0 and attempts < 8 * max(1, target):
        attempts += 1
        length = int(rng.integers(region_len_range[0], region_len_range[1] + 1))
        length = min(length, budget)
        start = int(rng.integers(0, n - length + 1))
        if dropped[start:start + length].any():
            continue
        dropped[start:start + length] = True
        budget -= length
        if fill == "zero":
            value = 0.0
        elif fill == "mean":
            value = np.mean(frame)
        elif fill == "front":
            value = frame[start - 1] if start > 0 else frame[min(start + length, n - 1)]
        else:  # back
            end = start + length
            value = frame[end] if end < n else frame[start - 1] if start > 0 else frame[0]
        out[start:start + length] = value
    return out


def quantize(frame: np.ndarray, num_levels: int, rounding: str = "floor",
             max_amplitude: float | None = None) -> np.ndarray:
    """Uniform quantizer over [-m, +m] applied to re and im independently;
    m defaults to the frame's max absolute component. ``rounding`` picks
    the emitted value inside each bin: its lower edge, middle, or upper
    edge."""
    if rounding not in ("floor", "middle", "ceiling"):
        raise ValueError(f"unknown rounding {rounding!r}")
    if num_levels < 1:
        raise ValueError("num_levels must be >= 1")
    m = max_amplitude
    if m is None:
        m = float(max(np.max(np.abs(frame.real)), np.max(np.abs(frame.imag))))
    if m == 0.0:
        return frame.copy()
    width = 2.0 * m / num_levels
    offset = {"floor": 0.0, "middle": 0.5, "ceiling": 1.0}[rounding] * width

    def q(v: np.ndarray) -> np.ndarray:
        idx = np.clip(np.floor((v + m) / width), 0, num_levels - 1)
        return -m + idx * width + offset

    return q(frame.real) + 1j * q(frame.imag)


def magnitude_rescale(frame: np.ndarray, rng: RngStream | None = None,
                      start_index: int | None = None,
                      scale: float | None = None) -> np.ndarray:
    """Gain step: samples from start_index onward are scaled. Unset
    parameters are drawn (start uniform over the frame, scale U(0.5, 2))."""
    n = len(frame)
    if start_index is None:
        start_index = int(rng.integers(0, n))
    if scale is None:
        scale = rng.uniform(0.5, 2.0)
    out = frame.copy()
    out[start_index:] *= scale
    return out


CUTOUT_FILLS = ("zeros", "ones", "low_noise", "avg_noise", "high_noise")
_CUTOUT_NOISE_POWER = {"low_noise": 0.01, "avg_noise": 1.0, "high_noise": 100.0}


def cutout(frame: np.ndarray, rng: RngStream, duration_frac: float = 0.1,
           fill: str = "zeros") -> np.ndarray:
    """Replace one contiguous region of duration_frac of the frame."""
    if fill not in CUTOUT_FILLS:
        raise ValueError(f"unknown fill {fill!r}")
    n = len(frame)
    length = int(round(duration_frac * n))
    if length <= 0:
        return frame.copy()
    length = min(length, n)
    start = int(rng.integers(0, n - length + 1))
    out = frame.copy()
    if fill == "zeros":
        out[start:start + length] = 0.0
    elif fill == "ones":
        out[start:start + length] = 1.0 + 0.0j
    else:
        power = _CUTOUT_NOISE_POWER[fill] * mean_power(frame)
        out[start:start + length] = rng.cnormal(length) * math.sqrt(power)
    return out


def patch_shuffle(frame: np.ndarray, rng: RngStream,
                  patch_len_range: tuple[int, int] = (2, 16),
                  shuffle_ratio: float = 0.5) -> np.ndarray:
    """Partition into equal patches (length drawn once) and permute the
    samples inside a shuffle_ratio fraction of them."""
    n = len(frame)
    patch_len = int(rng.integers(patch_len_range[0], patch_len_range[1] + 1))
    patch_len = max(2, min(patch_len, n))
    out = frame.copy()
    for start in range(0, n - patch_len + 1, patch_len):
        if rng.bernoulli(shuffle_ratio):
            perm = np.argsort(rng.unit(patch_len))
            out[start:start + patch_len] = out[start:start + patch_len][perm]
    return out


# --- channel/receiver effects -------------------------------------------------

def signal_rolloff(frame: np.ndarray, side: str = "both",
                   edge_frac: float = 0.1) -> np.ndarray:
    """Raised-cosine attenuation over the outer edge_frac of the chosen
    spectrum edge(s); models band-edge filter roll-off.

    The gain depends on |frequency| so that a two-sided taper treats
    mirrored bins identically (a real input stays real). The midpoint of
    the taper band sits at exactly half amplitude (-6.02 dB)."""
    if side not in ("lower", "upper", "both"):
        raise ValueError(f"unknown side {side!r}")
    if not 0.0 <= edge_frac <= 0.5:
        raise ValueError(f"edge_frac must be in [0, 0.5], got {edge_frac}")
    n = len(frame)
    num_edge = int(round(edge_frac * n))
    if num_edge <= 0:
        return frame.copy()
    freqs = np.arange(n) - n // 2  # bin index, fftshifted layout
    depth = n // 2 - np.abs(freqs)  # 0 at the outermost bin
    gain = np.where(depth < num_edge,
                    0.5 * (1.0 - np.cos(np.pi * depth / num_edge)), 1.0)
    if side == "lower":
        gain = np.where(freqs < 0, gain, 1.0)
    elif side == "upper":
        gain = np.where(freqs > 0, gain, 1.0)
    spectrum = np.fft.fftshift(np.fft.fft(frame)) * gain
    return np.fft.ifft(np.fft.ifftshift(spectrum))


def _bounded_walk(rng: RngStream, n: int, step: float, bound: float) -> np.ndarray:
    """Random walk from 0 with U(-step, step) increments, reset to 0
    whenever the next value would leave [-bound, +bound]."""
    steps = rng.uniform(-step, step, n)
    walk = np.empty(n)
    value = 0.0
    for i in range(n):
        value += steps[i]
        if abs(value) > bound:
            value = 0.0
        walk[i] = value
    return walk


def lo_drift(frame: np.ndarray, rng: RngStream, drift_rate: float = 1e-4,
             max_drift: float = 0.01) -> np.ndarray:
    """Oscillator frequency random walk (reset at the drift bound),
    integrated into phase."""
    if drift_rate == 0.0:
        return frame.copy()
    freq = _bounded_walk(rng, len(frame), drift_rate, max_drift)
    theta = 2.0 * np.pi * np.cumsum(freq)
    return frame * np.exp(1j * theta)


def gain_drift(frame: np.ndarray, rng: RngStream, drift_rate: float = 1e-4,
               max_drift: float = 0.1) -> np.ndarray:
    """Per-sample linear gain 1 + d[n], d random-walking within
    [-max_drift, +max_drift] with reset at the bound."""
    if drift_rate == 0.0:
        return frame.copy()
    return frame * (1.0 + _bounded_walk(rng, len(frame), drift_rate, max_drift))


def time_varying_noise(frame: np.ndarray, rng: RngStream, snr_low_db: float,
                       snr_high_db: float, inflections: int = 0) -> np.ndarray:
    """Additive complex noise whose per-sample power follows a piecewise
    linear dB trajectory from snr_low to snr_high (per-sample SNR, i.e.
    sps = 1), reversing slope at each of ``inflections`` evenly spaced
    points."""
    if inflections < 0:
        raise ValueError("inflections must be >= 0")
    n = len(frame)
    nodes = np.linspace(0, n - 1, inflections + 2)
    node_snrs = np.where(np.arange(inflections + 2) % 2 == 0, snr_low_db, snr_high_db)
    snr = np.interp(np.arange(n), nodes, node_snrs)
    sigma2 = mean_power(frame) * 10.0 ** (-snr / 10.0)
    return frame + rng.cnormal(n) * np.sqrt(sigma2)


def clip(frame: np.ndarray, percentage: float = 0.9,
         max_amplitude: float | None = None) -> np.ndarray:
    """Clamp re and im independently to +-(percentage * m); m defaults to
    the frame's max absolute component (pass it explicitly for an
    idempotent bound)."""
    m = max_amplitude
    if m is None:
        m = float(max(np.max(np.abs(frame.real)), np.max(np.abs(frame.imag))))
    bound = percentage * m
    return np.clip(frame.real, -bound, bound) + 1j * np.clip(frame.imag, -bound, bound)


def add_slope(frame: np.ndarray) -> np.ndarray:
    """y[n] = x[n] + (x[n] - x[n-1]); accentuates high frequencies."""
    out = frame.copy()
    out[1:] += frame[1:] - frame[:-1]
    return out


def random_convolve(frame: np.ndarray, rng: RngStream,
                    num_taps_range: tuple[int, int] = (2, 5),
                    alpha: float = 0.5) -> np.ndarray:
    """Blend the frame with a random-FIR-filtered copy:
    y = alpha*(x conv h) + (1-alpha)*x, h ~ U(0,1)^taps scaled to unit L2."""
    num_taps = int(rng.integers(num_taps_range[0], num_taps_range[1] + 1))
    taps = rng.unit(num_taps)
    norm = np.sqrt(np.sum(taps**2))
    taps = np.full(num_taps, 1.0 / math.sqrt(num_taps)) if norm == 0.0 else taps / norm
    return alpha * np.convolve(frame, taps, mode="same") + (1.0 - alpha) * frame


@dataclass(frozen=True)
class AgcConfig:
    """Log-domain AGC loop constants. No waveform model fixes these;
    the defaults are chosen for stable convergence and documented in
    the README."""

    initial_gain: float = 0.0  # natural-log gain
    level_alpha: float = 0.25  # smoothing of the log-magnitude estimate
    track_alpha: float = 0.004  # small corrections near the reference
    acquire_alpha: float = 0.04  # fast pull-in when far from reference
    overflow_alpha: float = 0.1  # fastest path when the input is hot
    reference_level: float = 0.0  # target ln|y|
    track_range: float = 0.2  # |error| boundary between track and acquire
    low_level: float = math.log(1e-3)  # below this the gain freezes
    high_level: float = math.log(10.0)  # above this the overflow rate kicks in


def agc(frame: np.ndarray, config: AgcConfig = AgcConfig()) -> np.ndarray:
    """Sample-sequential automatic gain control in the log domain."""
    out = np.empty_like(frame)
    gain = config.initial_gain
    level = 0.0
    have_level = False
    for i, sample in enumerate(frame):
        mag = abs(sample)
        inst = math.log(mag) if mag > 0.0 else config.low_level - 1.0
        if not have_level:
            level, have_level = inst, True
        else:
            level += config.level_alpha * (inst - level)
        if level >= config.low_level:
            error = config.reference_level - level - gain
            if level > config.high_level:
                alpha = config.overflow_alpha
            elif abs(error) > config.track_range:
                alpha = config.acquire_alpha
            else:
                alpha = config.track_alpha
            gain += alpha * error
        out[i] = sample * math.exp(gain)
    return out


# --- two-example mixes --------------------------------------------------------

@dataclass(frozen=True)
class LabelInfo:
    primary: int
    secondary: int | None = None
    secondary_weight: float | None = None  # power weight (MixUp) or extent (CutMix)


def mixup(frame: np.ndarray, label: int, other_frame: np.ndarray, other_label: int,
          alpha_db: float | None = None, rng: RngStream | None = None
          ) -> tuple[np.ndarray, LabelInfo]:
    """Additive mix with the second signal alpha_db below the first:
    y = x + 10^(-alpha/20)*other. alpha defaults to a U(3, 23) dB draw.
    The secondary label weight is the mixed-in share of total power."""
    if alpha_db is None:
        alpha_db = rng.uniform(3.0, 23.0)
    if math.isinf(alpha_db) and alpha_db > 0:
        return frame.copy(), LabelInfo(primary=label)
    scale = 10.0 ** (-alpha_db / 20.0)
    mixed = frame + scale * other_frame
    p_main = mean_power(frame)
    p_other = scale**2 * mean_power(other_frame)
    weight = p_other / (p_main + p_other) if p_main + p_other > 0 else 0.0
    return mixed, LabelInfo(primary=label, secondary=other_label, secondary_weight=weight)


def cutmix(frame: np.ndarray, label: int, other_frame: np.ndarray, other_label: int,
           alpha_frac: float, rng: RngStream | None = None,
           start: int | None = None) -> tuple[np.ndarray, LabelInfo]:
    """Replace a contiguous alpha_frac of the frame with the other
    signal's samples (same region). The region start is drawn when an
    rng is supplied, else 0."""
    if not 0.0 <= alpha_frac <= 1.0:
        raise ValueError(f"alpha_frac must be in [0, 1], got {alpha_frac}")
    n = len(frame)
    length = int(round(alpha_frac * n))
    if length >= n:
        return other_frame.copy(), LabelInfo(primary=other_label)
    if length == 0:
        return frame.copy(), LabelInfo(primary=label)
    if start is None:
        start = int(rng.integers(0, n - length + 1)) if rng is not None else 0
    out = frame.copy()
    out[start:start + length] = other_frame[start:start + length]
    return out, LabelInfo(primary=label, secondary=other_label, secondary_weight=alpha_frac)


# --- feature representations ---------------------------------------------------

def to_features(frame: np.ndarray, repr_kind: str) -> np.ndarray:
    """Terminal real-valued views of a frame for model input."""
    if repr_kind == "iq_2channel":
        return np.stack([frame.real, frame.imag])
    if repr_kind == "interleaved":
        out = np.empty(2 * len(frame))
        out[0::2] = frame.real
        out[1::2] = frame.imag
        return out
    if repr_kind == "magnitude":
        return np.abs(frame)
    if repr_kind == "wrapped_phase":
        return np.angle(frame)
    if repr_kind == "dft":
        spectrum = np.fft.fft(frame)
        return np.stack([spectrum.real, spectrum.imag])
    if repr_kind == "spectrogram":
        return _spectrogram(frame, nfft=256, hop=128)
    raise ValueError(f"unknown representation {repr_kind!r}")


# --- RandAugment and pipelines ---------------------------------------------------

@dataclass(frozen=True)
class AugmentSpec:
    kind: str
    probability: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")
        if self.kind not in AUGMENT_APPLIERS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")


def _apply_identity(frame, rng, **_):
    return frame.copy()


def _apply_cutout(frame, rng, duration_frac=None, fill=None):
    if duration_frac is None:
        duration_frac = rng.uniform(0.01, 0.2)
    if fill is None:
        fill = CUTOUT_FILLS[rng.integers(0, len(CUTOUT_FILLS))]
    return cutout(frame, rng, duration_frac, fill)


def _apply_drop_samples(frame, rng, drop_rate=None, region_len_range=(1, 7), fill=None):
    if drop_rate is None:
        drop_rate = rng.uniform(0.01, 0.05)
    if fill is None:
        fill = ("front", "back", "mean", "zero")[rng.integers(0, 4)]
    return drop_samples(frame, rng, drop_rate, tuple(region_len_range), fill)


def _apply_quantize(frame, rng, num_levels=None, rounding=None):
    if num_levels is None:
        num_levels = int(rng.integers(8, 65))
    if rounding is None:
        rounding = ("floor", "middle", "ceiling")[rng.integers(0, 3)]
    return quantize(frame, num_levels, rounding)


def _apply_magnitude_rescale(frame, rng, start_index=None, scale=None):
    return magnitude_rescale(frame, rng, start_index, scale)


def _apply_patch_shuffle(frame, rng, patch_len_range=(2, 16), shuffle_ratio=None):
    if shuffle_ratio is None:
        shuffle_ratio = rng.uniform(0.1, 0.5)
    return patch_shuffle(frame, rng, tuple(patch_len_range), shuffle_ratio)


AUGMENT_APPLIERS = {
    "identity": _apply_identity,
    "spectral_inversion": lambda frame, rng, **_: spectral_inversion(frame),
    "channel_swap": lambda frame, rng, **_: channel_swap(frame),
    "amplitude_reversal": lambda frame, rng, **_: amplitude_reversal(frame),
    "cutout": _apply_cutout,
    "drop_samples": _apply_drop_samples,
    "quantize": _apply_quantize,
    "magnitude_rescale": _apply_magnitude_rescale,
    "patch_shuffle": _apply_patch_shuffle,
    "time_reversal": lambda frame, rng, undo_inversion=True, **_: time_reversal(frame, undo_inversion),
    "signal_rolloff": lambda frame, rng, side="both", edge_frac=0.1, **_: signal_rolloff(frame, side, edge_frac),
    "lo_drift": lambda frame, rng, **p: lo_drift(frame, rng, **p),
    "gain_drift": lambda frame, rng, **p: gain_drift(frame, rng, **p),
    "time_varying_noise": lambda frame, rng, **p: time_varying_noise(frame, rng, **p),
    "clip": lambda frame, rng, percentage=0.9, **_: clip(frame, percentage),
    "add_slope": lambda frame, rng, **_: add_slope(frame),
    "random_convolve": lambda frame, rng, **p: random_convolve(frame, rng, **p),
    "agc": lambda frame, rng, **p: agc(frame, AgcConfig(**p)),
}

# The RandAugment menu: 9 kinds, identity included.
RAND_AUGMENT_KINDS = (
    "spectral_inversion",
    "channel_swap",
    "amplitude_reversal",
    "cutout",
    "drop_samples",
    "quantize",
    "magnitude_rescale",
    "patch_shuffle",
    "identity",
)

DEFAULT_RAND_AUGMENT_OPS = tuple(AugmentSpec(kind=k) for k in RAND_AUGMENT_KINDS)


def apply_augment(frame: np.ndarray, rng: RngStream, spec: AugmentSpec) -> np.ndarray:
    return AUGMENT_APPLIERS[spec.kind](frame, rng, **spec.params)


def rand_augment(frame: np.ndarray, rng: RngStream,
                 ops: tuple[AugmentSpec, ...] = DEFAULT_RAND_AUGMENT_OPS,
                 n: int = 2) -> np.ndarray:
    """Pick n ops uniformly with replacement and apply them in draw
    order, each with its own random parameters."""
    out = frame
    for _ in range(n):
        spec = ops[rng.integers(0, len(ops))]
        out = apply_augment(out, rng, spec)
    return out if out is not frame else frame.copy()


class Pipeline:
    """Ordered, probability-gated transform chain (two-example mixes are
    applied by the training loop, not here)."""

    def __init__(self, specs: tuple[AugmentSpec, ...]):
        self.specs = tuple(specs)

    def __call__(self, frame: np.ndarray, rng: RngStream) -> np.ndarray:
        out = frame
        for spec in self.specs:
            if rng.bernoulli(spec.probability):
                out = apply_augment(out, rng, spec)
        return out if out is not frame else frame.copy()


def build_pipeline(config) -> Pipeline:
    """Build from a declarative description: a JSON file path, a JSON
    string, or a list of {kind, probability, params} mappings."""
    if isinstance(config, str):
        try:
            entries = json.loads(config)
        except json.JSONDecodeError:
            with open(config, "r", encoding="utf-8") as fh:
                entries = json.load(fh)
    else:
        entries = config
    specs = []
    for entry in entries:
        specs.append(AugmentSpec(
            kind=entry["kind"],
            probability=float(entry.get("probability", 1.0)),
            params=dict(entry.get("params", {})),
        ))
    return Pipeline(tuple(specs))
