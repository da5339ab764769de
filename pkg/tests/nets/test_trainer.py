"""Tests for the training loop."""

import csv

import numpy as np
import pytest

from cogmap.models.config import Variant
from cogmap.models.exceptions import ConfigurationError, NonFiniteError, TrainingError
from cogmap.nets import LOSS_FIELDS, TrainConfig, checkpoint_name, load_checkpoint, train
from cogmap.nets import trainer


def tiny_config(iterations=2, **kwargs):
    settings = dict(batch_size=4, iterations=iterations, critic_steps=1, checkpoint_interval=2,
                    log_interval=1)
    settings.update(kwargs)
    return TrainConfig(**settings)


def network_unchanged(before, bundle, prefix):
    after = bundle.snapshot()
    return all(np.array_equal(before[k], after[k]) for k in before if k.startswith(prefix))


@pytest.mark.integration
class TestTrain:

    def test_checkpoints_and_loss_rows(self, make_bundle, two_lap_dataset, tmp_path):
        bundle = make_bundle()
        run = train(two_lap_dataset, bundle, tiny_config(iterations=4),
                    checkpoint_dir=tmp_path / "checkpoints", loss_csv=tmp_path / "losses.csv")
        assert [p.name for p in run.checkpoints] == [checkpoint_name(2), checkpoint_name(4)]
        assert bundle.iteration == 4
        with open(tmp_path / "losses.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [int(r["iteration"]) for r in rows] == [1, 2, 3, 4]
        assert tuple(rows[0]) == LOSS_FIELDS
        assert all(np.isfinite(float(r["prior"])) for r in rows)

    def test_vae_leaves_critic_unchanged(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        before = bundle.snapshot()
        train(two_lap_dataset, bundle, tiny_config())
        assert network_unchanged(before, bundle, "dis/")
        assert not network_unchanged(before, bundle, "enc/")
        assert not network_unchanged(before, bundle, "gen/")

    def test_zero_gan_weight_skips_critic(self, make_bundle, two_lap_dataset):
        bundle = make_bundle(variant=Variant.VAEGAN_PIXEL, alpha=0.0)
        before = bundle.snapshot()
        run = train(two_lap_dataset, bundle, tiny_config())
        assert network_unchanged(before, bundle, "dis/")
        assert "critic_loss" not in run.losses[0]

    def test_pixel_variant_trains_critic(self, make_bundle, two_lap_dataset):
        bundle = make_bundle(variant=Variant.VAEGAN_PIXEL, alpha=1.0)
        before = bundle.snapshot()
        run = train(two_lap_dataset, bundle, tiny_config(iterations=1, checkpoint_interval=1))
        assert not network_unchanged(before, bundle, "dis/")
        assert {"critic_loss", "penalty", "adversarial"} <= set(run.losses[0])

    def test_layer_variant_runs(self, make_bundle, two_lap_dataset):
        bundle = make_bundle(variant=Variant.VAEGAN_LAYER)
        run = train(two_lap_dataset, bundle,
                    tiny_config(iterations=1, checkpoint_interval=1, gp_point="interpolate"))
        assert np.isfinite(run.losses[0]["reconstruction"])

    def test_resume_matches_uninterrupted_run(self, make_bundle, two_lap_dataset, tmp_path):
        whole = make_bundle(seed=5)
        train(two_lap_dataset, whole, tiny_config(iterations=4))

        first = make_bundle(seed=5)
        run = train(two_lap_dataset, first, tiny_config(iterations=2),
                    checkpoint_dir=tmp_path / "checkpoints")
        resumed = load_checkpoint(run.checkpoints[-1])
        train(two_lap_dataset, resumed, tiny_config(iterations=4))

        expected, actual = whole.snapshot(), resumed.snapshot()
        assert expected.keys() == actual.keys()
        for name in expected:
            np.testing.assert_array_equal(expected[name], actual[name], err_msg=name)
        assert resumed.optim["gen"].step == whole.optim["gen"].step == 4

    def test_resume_truncates_loss_file(self, make_bundle, two_lap_dataset, tmp_path):
        losses = tmp_path / "losses.csv"
        bundle = make_bundle()
        run = train(two_lap_dataset, bundle, tiny_config(iterations=4),
                    checkpoint_dir=tmp_path / "checkpoints", loss_csv=losses)
        resumed = load_checkpoint(run.checkpoints[0])
        train(two_lap_dataset, resumed, tiny_config(iterations=3), loss_csv=losses)
        with open(losses, newline="") as handle:
            assert [int(r["iteration"]) for r in csv.DictReader(handle)] == [1, 2, 3]

    def test_dataset_too_short_for_tau(self, make_bundle, one_lap_dataset):
        with pytest.raises(TrainingError) as excinfo:
            train(one_lap_dataset, make_bundle(tau=240), tiny_config())
        assert excinfo.value.error_code == "DATASET_TOO_SHORT"

    def test_non_finite_loss_is_divergence(self, make_bundle, two_lap_dataset, monkeypatch):
        def explode(*args, **kwargs):
            raise NonFiniteError("Loss is not finite", error_code="NON_FINITE")

        monkeypatch.setattr(trainer, "encoder_generator_step", explode)
        with pytest.raises(TrainingError) as excinfo:
            train(two_lap_dataset, make_bundle(), tiny_config())
        assert excinfo.value.error_code == "DIVERGED"
        assert excinfo.value.context["iteration"] == 1


@pytest.mark.unit
class TestTrainConfig:

    def test_invalid_settings(self):
        with pytest.raises(ConfigurationError) as excinfo:
            TrainConfig(batch_size=0, gp_point="elsewhere").validate()
        assert set(excinfo.value.context["fields"]) == {"batch_size", "gp_point"}
