"""Tests for the pipeline stage services."""

import dataclasses
import math

import pytest

from cogmap.atlas import SWEEP_FIELDS, SweepRow
from cogmap.dreamer import TrajectoryType
from cogmap.mazeworld import load
from cogmap.models import StageStatus
from cogmap.models.exceptions import ExperimentError
from cogmap.nets import checkpoint_name
from cogmap.services.analysis_service import AnalysisService
from cogmap.services.artifacts import read_csv, write_csv
from cogmap.services.dataset_service import DatasetService
from cogmap.services.dream_service import DreamService
from cogmap.services.report_service import ReportService, mean_cumulative, tukey_rows
from cogmap.services.sweep_service import SUMMARY_FIELDS, SweepService, summarize_sweep
from cogmap.services.training_service import TrainingService, list_checkpoints


@pytest.fixture
def cell(experiment_config):
    return experiment_config.grid_cells()[0]


@pytest.fixture
def trained(experiment_config, two_lap_dataset, cell):
    TrainingService(experiment_config, two_lap_dataset).run(cell)
    return cell


@pytest.mark.integration
class TestDatasetService:

    def test_existing_dataset_is_skipped(self, experiment_config):
        result = DatasetService(experiment_config).run()
        assert result.status is StageStatus.SKIPPED

    def test_generates_missing_dataset(self, experiment_config, tmp_path):
        config = dataclasses.replace(experiment_config, dataset=str(tmp_path / "new.cgds"),
                                     frames=240)
        result = DatasetService(config).run()
        assert result.status is StageStatus.SUCCESS
        assert result.items_processed == 240
        dataset = load(tmp_path / "new.cgds")
        assert dataset.size == 16
        assert result.metadata["junctions"] == [80]


@pytest.mark.integration
class TestTrainingService:

    def test_writes_checkpoints_and_losses(self, experiment_config, two_lap_dataset, cell):
        service = TrainingService(experiment_config, two_lap_dataset)
        result = service.run(cell)
        assert result.status is StageStatus.SUCCESS
        assert [i for i, _ in list_checkpoints(service.checkpoint_dir(cell))] == [2, 4]
        assert len(read_csv(service.cell_dir(cell) / "losses.csv")) == 4
        assert service.cell_dir(cell).name == "VAE_tau1_z3_seed1"

    def test_finished_cell_is_skipped(self, experiment_config, two_lap_dataset, trained):
        result = TrainingService(experiment_config, two_lap_dataset).run(trained)
        assert result.status is StageStatus.SKIPPED

    def test_resumes_latest_checkpoint(self, experiment_config, two_lap_dataset, trained):
        service = TrainingService(experiment_config, two_lap_dataset)
        longer = TrainingService(dataclasses.replace(experiment_config, iters=6), two_lap_dataset)
        result = longer.run(trained)
        assert result.metadata["start_iteration"] == 4
        assert result.items_processed == 2
        assert (service.checkpoint_dir(trained) / checkpoint_name(6)).is_file()

    def test_resume_from_foreign_checkpoint(self, experiment_config, two_lap_dataset, trained):
        service = TrainingService(experiment_config, two_lap_dataset)
        other = dataclasses.replace(trained, seed=2)
        with pytest.raises(ExperimentError) as excinfo:
            service.run(other, resume_from=service.checkpoint_dir(trained) / checkpoint_name(2))
        assert excinfo.value.error_code == "RESUME_MISMATCH"
        assert excinfo.value.context["fields"] == ["seed"]

    def test_needs_a_cell(self, experiment_config, two_lap_dataset):
        with pytest.raises(ExperimentError) as excinfo:
            TrainingService(experiment_config, two_lap_dataset).run()
        assert excinfo.value.error_code == "CELL_REQUIRED"


@pytest.mark.integration
class TestAnalysisService:

    def test_needs_checkpoints(self, experiment_config, two_lap_dataset, cell):
        with pytest.raises(ExperimentError) as excinfo:
            AnalysisService(experiment_config, two_lap_dataset).run(cell)
        assert excinfo.value.error_code == "NO_CHECKPOINTS"

    def test_untrained_bundle(self, experiment_config, two_lap_dataset, cell):
        service = AnalysisService(experiment_config, two_lap_dataset)
        result = service.run(cell, allow_untrained=True)
        assert result.items_processed == 1
        out = service.cell_dir(cell)
        for name in ("metrics.csv", "metrics_average.csv", "pca_ratios.csv", "projection.csv",
                     "variability.csv", "variability_maxima.csv", "pca_grid.png",
                     "bifurcation_j0080.png", "bifurcation_j0320.png"):
            assert (out / name).is_file(), name
        assert len(read_csv(out / "projection.csv")) == 480

    def test_window_checkpoints(self, experiment_config, two_lap_dataset, trained):
        service = AnalysisService(experiment_config, two_lap_dataset)
        result = service.run(trained)
        assert result.metadata["checkpoints"] == [2, 4]
        rows = read_csv(service.cell_dir(trained) / "metrics.csv")
        assert [int(r["iteration"]) for r in rows] == [2, 4]
        average = read_csv(service.cell_dir(trained) / "metrics_average.csv")[0]
        assert int(average["checkpoints"]) == 2

    def test_probes_can_be_disabled(self, experiment_config, two_lap_dataset, cell):
        config = dataclasses.replace(experiment_config, run_pca_grid=False, run_variability=False,
                                     run_bifurcation=False)
        service = AnalysisService(config, two_lap_dataset)
        service.run(cell, allow_untrained=True)
        assert not (service.cell_dir(cell) / "pca_grid.png").exists()
        assert not (service.cell_dir(cell) / "variability.csv").exists()


@pytest.mark.integration
class TestDreamService:

    def test_classifies_and_dumps(self, experiment_config, two_lap_dataset, trained):
        service = DreamService(experiment_config, two_lap_dataset)
        result = service.run(trained)
        assert result.items_processed == 3
        records = service.load_records(trained)
        assert [r.start_index for r in records] == [0, 160, 320]
        assert all(isinstance(r.label, TrajectoryType) for r in records)
        rollouts = sorted((service.cell_dir(trained) / "rollouts").glob("*.png"))
        assert len(rollouts) == 3 * 3
        assert rollouts[0].name == "rollout_s000_i198.png"

    def test_needs_final_checkpoint(self, experiment_config, two_lap_dataset, cell):
        with pytest.raises(ExperimentError) as excinfo:
            DreamService(experiment_config, two_lap_dataset).run(cell)
        assert excinfo.value.error_code == "NO_CHECKPOINTS"


@pytest.mark.integration
class TestSweepService:

    def test_tables(self, experiment_config, two_lap_dataset):
        service = SweepService(experiment_config, two_lap_dataset)
        result = service.run()
        assert result.items_processed == 2
        assert len(read_csv(service.sweep_dir / "sweep.csv")) == 2
        assert [float(r["alpha"]) for r in read_csv(service.sweep_dir / "sweep_summary.csv")] \
            == [0.0, 1.0]
        assert (service.sweep_dir / "alpha0_seed1" / "checkpoints" / checkpoint_name(4)).is_file()


@pytest.mark.unit
class TestSummaries:

    def test_summarize_sweep(self):
        rows = [SweepRow(0.0, 1, 0.1, 0.2, 0.9, 0.5), SweepRow(0.0, 2, 0.3, 0.4, 0.7, math.nan),
                SweepRow(1.0, 1, 0.5, 0.6, 0.8, 0.25)]
        summary = summarize_sweep(rows)
        assert [s["alpha"] for s in summary] == [0.0, 1.0]
        assert summary[0]["r_target_mean"] == pytest.approx(0.3)
        assert summary[0]["r_target_std"] == pytest.approx(0.1)
        assert summary[0]["d_lr_mean"] == 0.5
        assert summary[0]["seeds"] == 2

    def test_mean_cumulative(self):
        rows = [{"component": "1", "cumulative": "0.5"}, {"component": "2", "cumulative": "1.0"},
                {"component": "1", "cumulative": "0.7"}, {"component": "2", "cumulative": "1.0"}]
        assert mean_cumulative(rows) == pytest.approx({1: 0.6, 2: 1.0})

    def test_tukey_rows_compare_variants_per_condition(self):
        averages = ([{"variant": "VAE", "tau": 5, "zdim": 10, "d_lr": v} for v in (0.1, 0.2, 0.15)]
                    + [{"variant": "VAEGAN_pixel", "tau": 5, "zdim": 10, "d_lr": v}
                       for v in (0.9, 1.0, 0.95)]
                    + [{"variant": "VAE", "tau": 0, "zdim": 10, "d_lr": 0.3}])
        rows = tukey_rows(averages, "d_lr")
        assert len(rows) == 1
        assert (rows[0]["group_a"], rows[0]["group_b"], rows[0]["tau"]) == ("VAE", "VAEGAN_pixel", 5)
        assert rows[0]["mean_difference"] == pytest.approx(-0.8)
        assert rows[0]["p_value"] < 0.001


@pytest.mark.integration
@pytest.mark.slow
class TestReportService:

    def test_collects_cells(self, experiment_config, two_lap_dataset, trained):
        AnalysisService(experiment_config, two_lap_dataset).run(trained)
        DreamService(experiment_config, two_lap_dataset).run(trained)
        service = ReportService(experiment_config)
        result = service.run()
        assert result.items_processed == 1
        out = service.report_dir
        for name in ("distance_correlation.csv", "pca_features.csv", "pca_ratios.csv",
                     "tukey_hsd.csv", "dream_runs.csv", "dream_fractions.csv",
                     "dream_summary.csv", "variability_maxima.csv"):
            assert (out / name).is_file(), name
        assert (out / "images" / "VAE_tau1_z3_seed1_pca_grid.png").is_file()
        assert read_csv(out / "tukey_hsd.csv") == []
        maxima = read_csv(out / "variability_maxima.csv")
        assert [int(row["junction"]) for row in maxima] == [80, 320]
        assert {row["variant"] for row in maxima} == {"VAE"}

    def test_missing_cell_is_an_error(self, experiment_config):
        result = ReportService(experiment_config).run()
        assert result.status is StageStatus.FAILED
        assert result.error_messages[0].startswith("VAE_tau1_z3_seed1")


@pytest.mark.unit
class TestReportTables:

    def test_sweep_tables_are_copied_unchanged(self, experiment_config):
        service = ReportService(experiment_config)
        rows = [SweepRow(0.0, 1, 0.1, 0.2, 0.9, 0.5), SweepRow(1.0, 1, 0.3, 0.4, 0.7, 0.25)]
        sweep_dir = service.experiment_dir / "sweep"
        write_csv(sweep_dir / "sweep.csv", SWEEP_FIELDS, (r.to_dict() for r in rows))
        write_csv(sweep_dir / "sweep_summary.csv", SUMMARY_FIELDS, summarize_sweep(rows))
        result = service.run()
        for name in ("sweep.csv", "sweep_summary.csv"):
            copied = service.report_dir / name
            assert copied.read_bytes() == (sweep_dir / name).read_bytes()
            assert str(copied) in result.artifacts

    def test_no_sweep_no_tables(self, experiment_config):
        service = ReportService(experiment_config)
        service.run()
        assert not (service.report_dir / "sweep.csv").exists()
