"""
Maze datasets: generation, the binary file format and path segments.
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np

from ..models.exceptions import DatasetError, FormatError
from .maze import MazeConfig, PathLabel, junction_indices_from_labels, plan_route
from .render import render_frame

logger = logging.getLogger(__name__)

MAGIC = b"CGDS"
VERSION = 1
CHANNELS = 3
_HEADER = struct.Struct("<4sIIIIIQ")
POSE_DTYPE = np.dtype([("x", "<f4"), ("y", "<f4"), ("heading", "<f4"), ("label", "u1")])


@dataclass
class MazeDataset:
    """Rendered frames with per-frame pose and path label."""

    frames: np.ndarray                  # (n, H, W, 3) uint8
    poses: np.ndarray                   # (n, 3) float32: x, y, heading
    labels: np.ndarray                  # (n,) uint8 PathLabel values
    seed: int
    junction_indices: List[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.junction_indices:
            self.junction_indices = junction_indices_from_labels(self.labels)

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def size(self) -> int:
        return int(self.frames.shape[1])

    def images(self, indices: Union[np.ndarray, List[int], None] = None) -> np.ndarray:
        """Frames as float32 NCHW in [−1, 1]."""
        frames = self.frames if indices is None else self.frames[np.asarray(indices)]
        return (frames.astype(np.float32) / 127.5 - 1.0).transpose(0, 3, 1, 2)

    def equals(self, other: "MazeDataset") -> bool:
        return (self.seed == other.seed
                and np.array_equal(self.frames, other.frames)
                and np.array_equal(self.poses, other.poses)
                and np.array_equal(self.labels, other.labels)
                and self.junction_indices == other.junction_indices)


@dataclass(frozen=True)
class PathSegments:
    """Start frames of one left and one right traversal plus their common length."""

    t_left: int
    t_right: int
    t_path: int


def generate(config: MazeConfig) -> MazeDataset:
    """
    Render a walk through the figure-8 maze.

    Raises:
        DatasetError: If the frame count is shorter than one lap or the size is unsupported
    """
    plan = plan_route(config)
    n = len(plan.labels)
    frames = np.empty((n, config.size, config.size, CHANNELS), dtype=np.uint8)
    for i in range(n):
        frames[i] = render_frame(plan.positions[i, 0], plan.positions[i, 1], plan.headings[i],
                                 config.size, config.fov_degrees)
    poses = np.column_stack([plan.positions, plan.headings]).astype(np.float32)
    logger.info("Generated maze dataset", extra={'context': {
        'frames': n, 'size': config.size, 'seed': config.seed,
        'junctions': plan.junction_indices}})
    return MazeDataset(frames=frames, poses=poses, labels=plan.labels.copy(), seed=config.seed,
                       junction_indices=list(plan.junction_indices))


def save(dataset: MazeDataset, path: Union[str, Path]) -> Path:
    """Write ``dataset`` in the CGDS binary format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, height, width, channels = dataset.frames.shape
    records = np.zeros(n, dtype=POSE_DTYPE)
    records["x"] = dataset.poses[:, 0]
    records["y"] = dataset.poses[:, 1]
    records["heading"] = dataset.poses[:, 2]
    records["label"] = dataset.labels
    with open(path, "wb") as handle:
        handle.write(_HEADER.pack(MAGIC, VERSION, n, height, width, channels, int(dataset.seed)))
        handle.write(records.tobytes())
        handle.write(np.ascontiguousarray(dataset.frames, dtype=np.uint8).tobytes())
    logger.debug("Saved dataset", extra={'context': {'path': str(path), 'frames': n}})
    return path


def load(path: Union[str, Path]) -> MazeDataset:
    """
    Read a CGDS dataset file.

    Raises:
        DatasetError: If the file does not exist
        FormatError: On bad magic, unsupported version or a payload whose
            length disagrees with the header
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"Dataset file not found: {path}", error_code="NOT_FOUND",
                           context={"path": str(path)})
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError("Dataset header is truncated", error_code="TRUNCATED",
                          context={"path": str(path), "bytes": len(blob)})
    magic, version, n, height, width, channels, seed = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"Not a dataset file (magic {magic!r})", error_code="BAD_MAGIC",
                          context={"path": str(path), "magic": magic.hex()})
    if version != VERSION:
        raise FormatError(f"Unsupported dataset version {version}", error_code="VERSION_MISMATCH",
                          context={"path": str(path), "version": version, "expected": VERSION})

    pose_bytes = n * POSE_DTYPE.itemsize
    frame_bytes = n * height * width * channels
    expected = _HEADER.size + pose_bytes + frame_bytes
    if len(blob) != expected:
        raise FormatError(
            f"Dataset payload has {len(blob)} bytes, header implies {expected}",
            error_code="TRUNCATED" if len(blob) < expected else "LENGTH_MISMATCH",
            context={"path": str(path), "bytes": len(blob), "expected": expected, "frames": n},
        )

    records = np.frombuffer(blob, dtype=POSE_DTYPE, count=n, offset=_HEADER.size)
    frames = np.frombuffer(blob, dtype=np.uint8, count=frame_bytes,
                           offset=_HEADER.size + pose_bytes).reshape(n, height, width, channels)
    poses = np.column_stack([records["x"], records["y"], records["heading"]]).astype(np.float32)
    return MazeDataset(frames=frames.copy(), poses=poses, labels=records["label"].copy(),
                       seed=int(seed))


def _traversals(labels: np.ndarray, junctions: List[int], side: PathLabel) -> List[tuple]:
    runs = []
    for j in junctions:
        if labels[j + 1] != side:
            continue
        start = j + 1
        end = start
        while end < len(labels) and labels[end] == side:
            end += 1
        runs.append((start, end - start))
    return runs


def segments(dataset: MazeDataset) -> PathSegments:
    """
    Aligned left and right traversals of equal length.

    The longest traversal of each side is used (earliest on ties); the
    common length is that of the shorter one.

    Raises:
        DatasetError: If either side is never traversed
    """
    found = {}
    for side in (PathLabel.LEFT, PathLabel.RIGHT):
        runs = _traversals(dataset.labels, dataset.junction_indices, side)
        if not runs:
            raise DatasetError(
                f"Dataset contains no {side.name.lower()} traversal",
                error_code="MISSING_TRAVERSAL",
                context={"side": side.name.lower(), "junctions": dataset.junction_indices},
            )
        found[side] = max(runs, key=lambda run: (run[1], -run[0]))
    (t_left, len_left), (t_right, len_right) = found[PathLabel.LEFT], found[PathLabel.RIGHT]
    return PathSegments(t_left=t_left, t_right=t_right, t_path=min(len_left, len_right))
