"""Dataset assembly and shard I/O.

A dataset is a directory of fixed-size shards plus a manifest:

    manifest.json            UTF-8 JSON: format version, config echo,
                             shard table, per-class counts, digests
    shard-NNNNN.iq           little-endian float32, interleaved re/im,
                             frame-major, no header
    shard-NNNNN.meta.jsonl   one JSON object per example, same order

Generation is deterministic: example ``index`` gets class ``index mod 53``
and the RNG stream ``derive_stream(dataset_seed, index)``, so the on-disk
bytes depend only on the config — not on worker count, scheduling, or
platform (for equal float widths). Frames are computed in float64 and
stored as float32; the determinism contract covers the stored values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from sigforge.clean import gen_clean
from sigforge.frame import FRAME_LEN
from sigforge.impairments import (
    DEFAULT_PROFILE,
    ImpairmentProfile,
    ImpairmentRecord,
    apply_impairment_chain,
    replay_impairments,
    synthesize_impaired_source,
)
from sigforge.registry import CLASS_LIST, NUM_CLASSES
from sigforge.rng import RngStream, derive_stream

FORMAT_VERSION = 1
DEFAULT_SHARD_SIZE = 4096

VARIANTS = ("clean-train", "clean-val", "impaired-train", "impaired-val")

# Published-scale example counts, for reference; any size can be generated.
REFERENCE_TOTALS = {
    "clean-train": 1_000_000,
    "clean-val": 106_000,
    "impaired-train": 5_300_000,
    "impaired-val": 106_000,
}


class DigestMismatchError(ValueError):
    """A shard's bytes do not match the manifest digest."""


@dataclass(frozen=True)
class DatasetConfig:
    variant: str
    examples_per_class: int
    dataset_seed: int
    frame_len: int = FRAME_LEN
    profile: ImpairmentProfile = DEFAULT_PROFILE

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.examples_per_class < 1:
            raise ValueError("examples_per_class must be >= 1")
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")

    @property
    def is_impaired(self) -> bool:
        return self.variant.startswith("impaired")

    @property
    def total_examples(self) -> int:
        return self.examples_per_class * NUM_CLASSES


def plan(config: DatasetConfig) -> Iterator[tuple[int, int, RngStream]]:
    """Round-robin class assignment: example i is class i mod 53, with an
    independent counter-mode stream per example."""
    for index in range(config.total_examples):
        yield index, index % NUM_CLASSES, derive_stream(config.dataset_seed, index)


def generate_example(index: int, class_index: int, rng: RngStream,
                     config: DatasetConfig) -> tuple[np.ndarray, dict]:
    """Produce one frame and its metadata. Pure function of the plan item:
    clean variants synthesize the fixed-shaping waveform only; impaired
    variants draw randomized pulse shaping, then the impairment chain."""
    if config.is_impaired:
        source, descriptor, shaping = synthesize_impaired_source(
            class_index, rng, config.frame_len)
        frame, record = apply_impairment_chain(
            source, descriptor, config.profile, rng)
    else:
        frame, descriptor = gen_clean(class_index, rng, config.frame_len)
        shaping, record = {}, None
    cls = CLASS_LIST[class_index]
    meta = {
        "index": index,
        "class_index": class_index,
        "class_name": cls.name,
        "family": cls.family,
        "samples_per_symbol": descriptor.samples_per_symbol,
        "rng_key": rng.key,
    }
    if record is not None:
        meta["snr_db"] = record.target_esn0_db
        meta["shaping"] = shaping
        meta["record"] = record.to_dict()
    return frame, meta


def replay_example(meta: dict, frame_len: int = FRAME_LEN) -> np.ndarray:
    """Regenerate a stored example (float64) from its metadata alone."""
    rng = RngStream(int(meta["rng_key"]))
    class_index = int(meta["class_index"])
    if "record" in meta:
        source, _descriptor, _shaping = synthesize_impaired_source(
            class_index, rng, frame_len)
        return replay_impairments(source, ImpairmentRecord.from_dict(meta["record"]))
    frame, _descriptor = gen_clean(class_index, rng, frame_len)
    return frame


def frame_to_bytes(frame: np.ndarray) -> bytes:
    """Interleaved little-endian float32 serialization of a complex frame."""
    out = np.empty(2 * len(frame), dtype="<f4")
    out[0::2] = frame.real
    out[1::2] = frame.imag
    # exact zeros reach the file (e.g. OFDM window-taper endpoints) and
    # the sign numpy's complex multiply leaves on them varies with the
    # kernel/alignment it happened to use; fold -0.0 to +0.0 so the
    # bytes are a pure function of the draw sequence
    out[out == 0.0] = 0.0
    return out.tobytes()


def bytes_to_frames(raw: bytes, frame_len: int) -> np.ndarray:
    """Inverse of frame_to_bytes over a whole shard: [n_frames, frame_len]
    complex64."""
    flat = np.frombuffer(raw, dtype="<f4")
    if flat.size % (2 * frame_len) != 0:
        raise ValueError(f"shard size {flat.size} floats is not a multiple "
                         f"of frame length {frame_len}")
    pairs = flat.reshape(-1, frame_len, 2)
    return (pairs[..., 0] + 1j * pairs[..., 1]).astype(np.complex64)


def meta_to_line(meta: dict) -> bytes:
    return (json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


_POOL_CONFIG: DatasetConfig | None = None


def _pool_init(config: DatasetConfig) -> None:
    global _POOL_CONFIG
    _POOL_CONFIG = config


def _pool_generate(index: int) -> tuple[bytes, bytes]:
    config = _POOL_CONFIG
    frame, meta = generate_example(
        index, index % NUM_CLASSES, derive_stream(config.dataset_seed, index), config)
    return frame_to_bytes(frame), meta_to_line(meta)


def _payload_iter(config: DatasetConfig, workers: int) -> Iterator[tuple[bytes, bytes]]:
    if workers <= 1:
        for index, class_index, rng in plan(config):
            frame, meta = generate_example(index, class_index, rng, config)
            yield frame_to_bytes(frame), meta_to_line(meta)
        return
    with multiprocessing.Pool(workers, initializer=_pool_init, initargs=(config,)) as pool:
        # imap preserves index order, which keeps the output bytes
        # independent of scheduling.
        yield from pool.imap(_pool_generate, range(config.total_examples), chunksize=8)


def _shard_name(shard_index: int) -> str:
    return f"shard-{shard_index:05d}"


def write_shards(config: DatasetConfig, out_dir: str | Path, workers: int = 1,
                 force: bool = False, shard_size: int = DEFAULT_SHARD_SIZE) -> dict:
    """Generate the configured dataset into out_dir and return the manifest
    (also written as manifest.json). Refuses a non-empty directory unless
    force is set."""
    if shard_size < 1:
        raise ValueError("shard_size must be >= 1")
    out_path = Path(out_dir)
    if out_path.exists() and any(out_path.iterdir()) and not force:
        raise FileExistsError(f"{out_path} is not empty (pass force to overwrite)")
    out_path.mkdir(parents=True, exist_ok=True)

    overall = hashlib.sha256()
    shard_entries = []
    shard_index = 0
    start_index = 0
    iq_chunks: list[bytes] = []
    meta_chunks: list[bytes] = []

    def flush() -> None:
        nonlocal shard_index, start_index, iq_chunks, meta_chunks
        if not iq_chunks:
            return
        name = _shard_name(shard_index)
        iq_bytes = b"".join(iq_chunks)
        meta_bytes = b"".join(meta_chunks)
        (out_path / f"{name}.iq").write_bytes(iq_bytes)
        (out_path / f"{name}.meta.jsonl").write_bytes(meta_bytes)
        overall.update(iq_bytes)
        shard_entries.append({
            "name": name,
            "start_index": start_index,
            "count": len(iq_chunks),
            "iq_sha256": hashlib.sha256(iq_bytes).hexdigest(),
            "meta_sha256": hashlib.sha256(meta_bytes).hexdigest(),
        })
        start_index += len(iq_chunks)
        shard_index += 1
        iq_chunks, meta_chunks = [], []

    for iq, meta_line in _payload_iter(config, workers):
        iq_chunks.append(iq)
        meta_chunks.append(meta_line)
        if len(iq_chunks) == shard_size:
            flush()
    flush()

    # json round trip normalizes tuples to lists so the returned manifest
    # compares equal to the reloaded one
    profile_echo = (json.loads(json.dumps(dataclasses.asdict(config.profile)))
                    if config.is_impaired else None)
    config_echo = {
        "variant": config.variant,
        "examples_per_class": config.examples_per_class,
        "dataset_seed": config.dataset_seed,
        "frame_len": config.frame_len,
        "profile": profile_echo,
    }
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": config_echo,
        "num_examples": config.total_examples,
        "num_classes": NUM_CLASSES,
        "per_class_counts": {cls.name: config.examples_per_class for cls in CLASS_LIST},
        "shards": shard_entries,
        "digest_sha256": overall.hexdigest(),
    }
    (out_path / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return manifest


def load_manifest(dataset_dir: str | Path) -> dict:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.json in {dataset_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


def verify_digests(dataset_dir: str | Path, manifest: dict | None = None) -> None:
    """Recompute all shard digests; raise DigestMismatchError on any
    difference from the manifest."""
    root = Path(dataset_dir)
    manifest = manifest if manifest is not None else load_manifest(root)
    overall = hashlib.sha256()
    for entry in manifest["shards"]:
        iq_bytes = (root / f"{entry['name']}.iq").read_bytes()
        meta_bytes = (root / f"{entry['name']}.meta.jsonl").read_bytes()
        overall.update(iq_bytes)
        if hashlib.sha256(iq_bytes).hexdigest() != entry["iq_sha256"]:
            raise DigestMismatchError(f"{entry['name']}.iq digest mismatch")
        if hashlib.sha256(meta_bytes).hexdigest() != entry["meta_sha256"]:
            raise DigestMismatchError(f"{entry['name']}.meta.jsonl digest mismatch")
    if overall.hexdigest() != manifest["digest_sha256"]:
        raise DigestMismatchError("overall digest mismatch")


def read_example(dataset_dir: str | Path, index: int,
                 manifest: dict | None = None) -> tuple[np.ndarray, dict]:
    """Fetch one (complex64 frame, meta) by example index, touching only
    the shard that holds it."""
    root = Path(dataset_dir)
    manifest = manifest if manifest is not None else load_manifest(root)
    frame_len = manifest["config"]["frame_len"]
    for entry in manifest["shards"]:
        offset = index - entry["start_index"]
        if 0 <= offset < entry["count"]:
            bytes_per_frame = 8 * frame_len
            with open(root / f"{entry['name']}.iq", "rb") as fh:
                fh.seek(offset * bytes_per_frame)
                frame = bytes_to_frames(fh.read(bytes_per_frame), frame_len)[0]
            with open(root / f"{entry['name']}.meta.jsonl", "r", encoding="utf-8") as fh:
                for line_no, line in enumerate(fh):
                    if line_no == offset:
                        return frame, json.loads(line)
            raise ValueError(f"{entry['name']}.meta.jsonl shorter than expected")
    raise IndexError(f"example index {index} out of range "
                     f"(dataset has {manifest['num_examples']})")


def read(dataset_dir: str | Path, validate_digest: bool = False
         ) -> Iterator[tuple[np.ndarray, dict]]:
    """Yield (complex64 frame, meta) in index order."""
    root = Path(dataset_dir)
    manifest = load_manifest(root)
    if validate_digest:
        verify_digests(root, manifest)
    frame_len = manifest["config"]["frame_len"]
    for entry in manifest["shards"]:
        frames = bytes_to_frames((root / f"{entry['name']}.iq").read_bytes(), frame_len)
        with open(root / f"{entry['name']}.meta.jsonl", "r", encoding="utf-8") as fh:
            metas = [json.loads(line) for line in fh]
        if len(metas) != len(frames):
            raise ValueError(f"{entry['name']}: {len(frames)} frames but "
                             f"{len(metas)} meta lines")
        yield from zip(frames, metas)
