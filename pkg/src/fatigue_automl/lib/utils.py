"""Utility functions for the fatigue_automl module."""

import hashlib
import json
import logging
import math
import zlib
from pathlib import Path
from typing import Any

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.errors import OutputDirNotEmpty

logger = logging.getLogger(__name__)


@typechecked
def stable_key(text: str) -> int:
    """Process-independent integer key for a string, for seeding RNG streams."""
    return zlib.crc32(text.encode("utf-8"))


@typechecked
def derive_rng(seed: int | np.integer, *keys: int | np.integer | str) -> np.random.Generator:
    """Make a generator for the stream identified by (seed, *keys).

    Streams for different keys are statistically independent, and the same keys always
    give the same stream, regardless of process or worker count.

    Args:
        seed: The root seed. Negative seeds are folded into the unsigned range.
        keys: Integers or strings identifying the stream.

    Returns:
        A numpy Generator.
    """
    entropy = [int(seed) % 2**63]
    for key in keys:
        entropy.append(stable_key(key) if isinstance(key, str) else int(key) % 2**63)
    return np.random.default_rng(entropy)


@typechecked
def resolve_jobs(jobs: int | None) -> int:
    """Resolve a worker count: None or 0 means 1, negative means joblib's convention."""
    if not jobs:
        return 1
    return jobs


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars and arrays, and non-finite floats, to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(key): to_jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def from_json_float(value: float | int | str) -> float:
    """Invert the non-finite float encoding of `to_jsonable`."""
    return float(value)


@typechecked
def dump_json(obj: Any, path: Path) -> Path:
    """Write an object as deterministic JSON (sorted keys, fixed indent, UTF-8)."""
    path.write_text(
        json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return path


@typechecked
def load_json(path: Path) -> Any:
    """Read a JSON file."""
    return json.loads(path.read_text(encoding="utf-8"))


@typechecked
def file_sha256(path: Path) -> str:
    """Content hash of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@typechecked
def prepare_output_dir(output_dir: Path) -> Path:
    """Create an output directory, requiring it to be empty or absent.

    Raises:
        OutputDirNotEmpty: If the directory exists and holds files.
    """
    if output_dir.exists():
        if not output_dir.is_dir() or any(output_dir.iterdir()):
            raise OutputDirNotEmpty(f"Output directory is not empty: {output_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir
