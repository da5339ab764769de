"""Tests for the checkpoint file format."""

import struct

import numpy as np
import pytest

from cogmap.models.config import Variant
from cogmap.models.exceptions import FormatError
from cogmap.nets import checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint


@pytest.mark.unit
class TestCheckpointFormat:

    def test_bytes_identical_after_round_trip(self, make_bundle):
        bundle = make_bundle(variant=Variant.VAEGAN_PIXEL, tau=5, alpha=0.5, seed=2)
        blob = checkpoint_bytes(bundle)
        assert checkpoint_bytes(parse_checkpoint(blob)) == blob

    def test_restores_condition_and_parameters(self, make_bundle, tmp_path):
        bundle = make_bundle(variant=Variant.VAEGAN_LAYER, tau=3, seed=7)
        bundle.iteration = 42
        bundle.optim["enc"].step = 42
        restored = load_checkpoint(save_checkpoint(bundle, tmp_path / "ckpt.cgmp"))
        assert restored.variant is Variant.VAEGAN_LAYER
        assert (restored.tau, restored.seed, restored.iteration, restored.zdim) == (3, 7, 42, 3)
        assert restored.arch == bundle.arch
        assert restored.optim["enc"].step == 42
        original, copy = bundle.snapshot(), restored.snapshot()
        assert original.keys() == copy.keys()
        assert all(np.array_equal(original[k], copy[k]) for k in original)

    def test_header_magic(self, make_bundle):
        assert checkpoint_bytes(make_bundle())[:4] == b"CGMP"

    def test_bad_magic(self, make_bundle):
        blob = b"XXXX" + checkpoint_bytes(make_bundle())[4:]
        with pytest.raises(FormatError) as excinfo:
            parse_checkpoint(blob)
        assert excinfo.value.error_code == "BAD_MAGIC"

    def test_version_mismatch(self, make_bundle):
        blob = bytearray(checkpoint_bytes(make_bundle()))
        blob[4:8] = struct.pack("<I", 99)
        with pytest.raises(FormatError) as excinfo:
            parse_checkpoint(bytes(blob))
        assert excinfo.value.error_code == "VERSION_MISMATCH"

    def test_truncated(self, make_bundle):
        blob = checkpoint_bytes(make_bundle())
        with pytest.raises(FormatError) as excinfo:
            parse_checkpoint(blob[:-7])
        assert excinfo.value.error_code == "TRUNCATED"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError) as excinfo:
            load_checkpoint(tmp_path / "absent.cgmp")
        assert excinfo.value.error_code == "NOT_FOUND"
