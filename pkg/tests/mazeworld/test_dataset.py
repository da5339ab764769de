"""Tests for dataset generation, the CGDS file format and path segments."""

import struct

import numpy as np
import pytest

from cogmap.mazeworld import MazeConfig, PathLabel, generate, load, save, segments
from cogmap.mazeworld.dataset import MAGIC
from cogmap.models.exceptions import DatasetError, FormatError


@pytest.fixture(scope="module")
def generated():
    return generate(MazeConfig(size=16, frames=240, seed=5))


@pytest.mark.unit
class TestGenerate:

    def test_shapes(self, generated):
        assert len(generated) == 240
        assert generated.size == 16
        assert generated.frames.shape == (240, 16, 16, 3)
        assert generated.poses.shape == (240, 3)
        assert generated.junction_indices == [80]

    def test_deterministic(self, generated):
        assert generated.equals(generate(MazeConfig(size=16, frames=240, seed=5)))

    def test_too_few_frames(self):
        with pytest.raises(DatasetError) as excinfo:
            generate(MazeConfig(size=16, frames=80))
        assert excinfo.value.error_code == "TOO_FEW_FRAMES"

    def test_images_are_scaled_nchw(self, generated):
        images = generated.images([0, 1])
        assert images.shape == (2, 3, 16, 16)
        assert images.dtype == np.float32
        assert images.min() >= -1.0 and images.max() <= 1.0


@pytest.mark.unit
class TestFileFormat:

    def test_round_trip(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        assert load(path).equals(generated)

    def test_header_layout(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        magic, version, n, height, width, channels, seed = struct.unpack_from(
            "<4sIIIIIQ", path.read_bytes())
        assert (magic, version, n, height, width, channels, seed) == (MAGIC, 1, 240, 16, 16, 3, 5)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError) as excinfo:
            load(tmp_path / "absent.cgds")
        assert excinfo.value.error_code == "NOT_FOUND"

    def test_bad_magic(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as excinfo:
            load(path)
        assert excinfo.value.error_code == "BAD_MAGIC"

    def test_version_mismatch(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        blob = bytearray(path.read_bytes())
        blob[4:8] = struct.pack("<I", 2)
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as excinfo:
            load(path)
        assert excinfo.value.error_code == "VERSION_MISMATCH"

    def test_truncated_payload(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(FormatError) as excinfo:
            load(path)
        assert excinfo.value.error_code == "TRUNCATED"

    def test_trailing_bytes(self, generated, tmp_path):
        path = save(generated, tmp_path / "maze.cgds")
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError) as excinfo:
            load(path)
        assert excinfo.value.error_code == "LENGTH_MISMATCH"

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.cgds"
        path.write_bytes(b"CGDS")
        with pytest.raises(FormatError) as excinfo:
            load(path)
        assert excinfo.value.error_code == "TRUNCATED"


@pytest.mark.unit
class TestSegments:

    def test_left_then_right_laps(self, two_lap_dataset):
        assert two_lap_dataset.junction_indices == [80, 320]
        found = segments(two_lap_dataset)
        assert (found.t_left, found.t_right, found.t_path) == (81, 321, 159)
        labels = two_lap_dataset.labels
        assert np.all(labels[81:81 + 159] == PathLabel.LEFT)
        assert np.all(labels[321:321 + 159] == PathLabel.RIGHT)

    def test_single_side_is_missing_traversal(self, one_lap_dataset):
        with pytest.raises(DatasetError) as excinfo:
            segments(one_lap_dataset)
        assert excinfo.value.error_code == "MISSING_TRAVERSAL"
