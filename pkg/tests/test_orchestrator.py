"""Tests for the experiment orchestrator."""

import dataclasses
import json

import pytest

from cogmap.models import StageStatus
from cogmap.models.exceptions import ExperimentError
from cogmap.orchestrator import ExperimentOrchestrator, run_cell_stage


@pytest.fixture
def orchestrator(experiment_config):
    instance = ExperimentOrchestrator(experiment_config)
    instance.initialize()
    yield instance
    instance.cleanup()


@pytest.mark.unit
def test_stages_need_initialization(experiment_config):
    with pytest.raises(ExperimentError) as excinfo:
        ExperimentOrchestrator(experiment_config).train()
    assert excinfo.value.error_code == "NOT_INITIALIZED"


@pytest.mark.integration
class TestOrchestrator:

    def test_failed_cell_becomes_a_result(self, orchestrator):
        results = orchestrator.dream()
        assert [r.status for r in results] == [StageStatus.FAILED]
        assert results[0].metadata["error_code"] == "NO_CHECKPOINTS"
        assert results[0].metadata["remediation"]

    def test_unknown_stage(self, experiment_config, two_lap_dataset):
        cell = experiment_config.grid_cells()[0]
        result = run_cell_stage(experiment_config, "plotting", cell, dataset=two_lap_dataset)
        assert result.status is StageStatus.FAILED
        assert result.metadata["error_code"] == "UNKNOWN_STAGE"

    def test_worker_processes_keep_cell_order(self, experiment_config):
        config = dataclasses.replace(experiment_config, seeds=[1, 2, 3], jobs=2)
        orchestrator = ExperimentOrchestrator(config)
        orchestrator.initialize()
        try:
            results = orchestrator.dream()
        finally:
            orchestrator.cleanup()
        assert [r.cell for r in results] == [c.slug for c in config.grid_cells()]
        assert all(r.status is StageStatus.FAILED for r in results)

    def test_manifest_and_summary(self, orchestrator, tmp_path):
        orchestrator.generate_dataset()
        report = orchestrator.finish()
        assert report.skipped_stages == 1
        manifest = orchestrator.generate_manifest(str(tmp_path / "runs" / "manifest.json"))
        assert manifest["experiment_summary"]["skipped_stages"] == 1
        saved = json.loads((tmp_path / "runs" / "manifest.json").read_text())
        assert saved["stage_details"][0]["stage"] == "dataset"
        orchestrator.save_summary(str(tmp_path / "runs" / "summary.txt"))
        assert "dataset [-]: skipped" in (tmp_path / "runs" / "summary.txt").read_text()

    def test_manifest_needs_a_report(self, orchestrator):
        with pytest.raises(ExperimentError) as excinfo:
            orchestrator.generate_manifest()
        assert excinfo.value.error_code == "NO_REPORT"


@pytest.mark.integration
@pytest.mark.slow
class TestPipeline:

    def test_full_pipeline_then_rerun_skips(self, experiment_config):
        first = ExperimentOrchestrator(experiment_config)
        first.initialize()
        try:
            report = first.run_pipeline()
        finally:
            first.cleanup()
        assert report.overall_status is StageStatus.SUCCESS
        assert [r.stage for r in report.results] == ["dataset", "training", "analysis", "dream",
                                                     "sweep", "report"]
        report_dir = first.experiment_dir / "report"
        for name in ("dream_summary.csv", "sweep.csv", "sweep_summary.csv",
                     "variability_maxima.csv"):
            assert (report_dir / name).is_file(), name

        second = ExperimentOrchestrator(experiment_config)
        second.initialize()
        try:
            rerun = second.run_pipeline()
        finally:
            second.cleanup()
        statuses = {r.stage: r.status for r in rerun.results}
        assert statuses["training"] is StageStatus.SKIPPED
        assert statuses["analysis"] is StageStatus.SKIPPED
        assert statuses["dream"] is StageStatus.SKIPPED
        assert statuses["sweep"] is StageStatus.SKIPPED

    def test_seeded_runs_write_identical_reports(self, experiment_config, tmp_path):
        report_dirs = []
        for root in ("first", "second"):
            config = dataclasses.replace(experiment_config, out=str(tmp_path / root))
            orchestrator = ExperimentOrchestrator(config)
            orchestrator.initialize()
            try:
                orchestrator.run_pipeline()
            finally:
                orchestrator.cleanup()
            report_dirs.append(orchestrator.experiment_dir / "report")
        first, second = report_dirs
        names = sorted(p.name for p in first.glob("*.csv"))
        assert names == sorted(p.name for p in second.glob("*.csv"))
        assert "sweep.csv" in names
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
