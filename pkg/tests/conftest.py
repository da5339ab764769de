"""
Shared fixtures: tiny rendered datasets, tiny model bundles and a fast
experiment configuration.
"""

from typing import Callable, Sequence

import numpy as np
import pytest

from cogmap.mazeworld import STEM_FRAMES, MazeDataset, PathLabel, lap_poses, render_frame, save
from cogmap.models.config import LAP_FRAMES, ExperimentConfig, Variant
from cogmap.nets import Architecture, ModelBundle


def build_dataset(sides: Sequence[PathLabel], size: int = 16, seed: int = 1) -> MazeDataset:
    """Render one lap per entry of ``sides`` instead of drawing the junction choices."""
    frames, poses, labels = [], [], []
    previous = PathLabel.RIGHT
    offsets = np.arange(LAP_FRAMES)
    for side in sides:
        positions, headings = lap_poses(previous, side, offsets)
        previous = side
        for (x, y), heading in zip(positions, headings):
            frames.append(render_frame(x, y, heading, size, 60.0))
        poses.append(np.column_stack([positions, headings]))
        lap_labels = np.full(LAP_FRAMES, int(side), dtype=np.uint8)
        lap_labels[:STEM_FRAMES + 1] = PathLabel.STEM
        labels.append(lap_labels)
    return MazeDataset(frames=np.stack(frames),
                       poses=np.concatenate(poses).astype(np.float32),
                       labels=np.concatenate(labels), seed=seed)


@pytest.fixture(scope="session")
def two_lap_dataset() -> MazeDataset:
    """480 frames at 16 px: a left lap then a right lap (junctions 80 and 320)."""
    return build_dataset([PathLabel.LEFT, PathLabel.RIGHT])


@pytest.fixture(scope="session")
def one_lap_dataset() -> MazeDataset:
    return build_dataset([PathLabel.LEFT])


@pytest.fixture
def tiny_arch() -> Architecture:
    return Architecture(image_size=16, base_channels=4, zdim=3)


@pytest.fixture
def make_bundle(tiny_arch) -> Callable[..., ModelBundle]:
    def factory(variant: Variant = Variant.VAE, tau: int = 1, alpha: float = 1.0,
                seed: int = 1) -> ModelBundle:
        return ModelBundle.create(tiny_arch, variant=variant, tau=tau, alpha=alpha, seed=seed)
    return factory


@pytest.fixture
def experiment_config(tmp_path, monkeypatch, two_lap_dataset) -> ExperimentConfig:
    """A configuration small enough to run every stage in seconds."""
    monkeypatch.delenv("COGMAP_OUT", raising=False)
    dataset_path = tmp_path / "data" / "maze.cgds"
    save(two_lap_dataset, dataset_path)
    return ExperimentConfig(
        dataset=str(dataset_path), frames=480, size=16,
        variants=["VAE"], taus=[1], zdims=[3], seeds=[1],
        iters=4, batch_size=4, critic_steps=1, checkpoint_interval=2, log_interval=1,
        base_channels=4,
        analysis_window=0.5, pca_grid=2, variability_samples=2, bifurcation_window=1,
        dream_iterations=200, start_stride=160, dump_start=198, dump_end=200,
        sweep_alphas=[0.0, 1.0], sweep_tau=1,
        out=str(tmp_path / "results"), experiment="test",
        logging_file_path=str(tmp_path / "logs" / "cogmap.log"),
    )
