import shutil
from pathlib import Path

import pytest

from vmrkit.errors import DataError
from vmrkit.formats import load_dataset, load_predictions, write_predictions
from vmrkit.pipeline import (
    PipelineConfig,
    SweepSpec,
    evaluate_predictions,
    run_pipeline,
    run_pipeline_counted,
    sweep,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FEATURE_ROOT = FIXTURES / "features"

WATERSHED_CONFIG = PipelineConfig(
    proposal_method="shotdetect",
    matcher="frames",
    shot_threshold=32.0,
    merge_threshold=0.7,
    normalize="per_video",
)


@pytest.fixture(scope="module")
def dataset():
    return load_dataset(FIXTURES / "dataset.jsonl")


class TestPipelineConfig:
    def test_defaults(self):
        config = PipelineConfig()
        assert config.shot_threshold == 53.0
        assert config.merge_threshold is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"proposal_method": "maglev"},
            {"matcher": "telepathy"},
            {"shot_threshold": 0.0},
            {"merge_threshold": 1.5},
            {"max_preds": 0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PipelineConfig(**kwargs)


class TestRunPipeline:
    def test_matches_golden(self, dataset):
        preds = run_pipeline(WATERSHED_CONFIG, dataset, FEATURE_ROOT)
        golden = load_predictions(FIXTURES / "golden_predictions.jsonl")
        assert [p.qid for p in preds] == [g.qid for g in golden]
        for p, g in zip(preds, golden):
            assert len(p.moments) == len(g.moments)
            for mp, mg in zip(p.moments, g.moments):
                assert mp.interval.start_s == pytest.approx(mg.interval.start_s, abs=1e-9)
                assert mp.interval.end_s == pytest.approx(mg.interval.end_s, abs=1e-9)
                assert mp.score == pytest.approx(mg.score, abs=1e-9)

    def test_two_runs_byte_identical(self, dataset, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_predictions(run_pipeline(WATERSHED_CONFIG, dataset, FEATURE_ROOT), a)
        write_predictions(run_pipeline(WATERSHED_CONFIG, dataset, FEATURE_ROOT), b)
        assert a.read_bytes() == b.read_bytes()

    def test_no_watershed_keeps_all_segments(self, dataset):
        config = PipelineConfig(shot_threshold=32.0, merge_threshold=None)
        preds_plain, n_plain = run_pipeline_counted(config, dataset, FEATURE_ROOT)
        preds_merged, n_merged = run_pipeline_counted(WATERSHED_CONFIG, dataset, FEATURE_ROOT)
        assert n_merged <= n_plain
        assert {p.qid for p in preds_plain} == {p.qid for p in preds_merged}

    def test_missing_video_skipped(self, dataset, tmp_path, caplog):
        partial_root = tmp_path / "features"
        shutil.copytree(FEATURE_ROOT, partial_root)
        (partial_root / "frames" / "vid_b.vmrf").unlink()
        preds = run_pipeline(WATERSHED_CONFIG, dataset, partial_root)
        qids = {p.qid for p in preds}
        assert qids == {101, 102, 105, 106}  # vid_b queries dropped, others intact
        report = evaluate_predictions(preds, dataset)
        assert report.n_queries == 4

    def test_captions_matcher(self, dataset):
        config = PipelineConfig(
            proposal_method="shotdetect", matcher="captions", shot_threshold=32.0,
            normalize="per_video",
        )
        preds = run_pipeline(config, dataset, FEATURE_ROOT)
        assert len(preds) == len(dataset)
        assert all(p.moments for p in preds)

    def test_slidingwindow_proposals(self, dataset):
        config = PipelineConfig(proposal_method="slidingwindow", matcher="frames")
        preds = run_pipeline(config, dataset, FEATURE_ROOT)
        assert len(preds) == len(dataset)
        by_qid = {p.qid: p for p in preds}
        # duration 60 -> full windows at 0..40 plus clipped tail [50, 60]
        widths = {m.interval.length_s for m in by_qid[101].moments}
        assert widths <= {15.0, 10.0}

    def test_slidingwindow_with_watershed_rejected(self, dataset):
        config = PipelineConfig(
            proposal_method="slidingwindow", matcher="frames", merge_threshold=0.7
        )
        with pytest.raises(ValueError, match="partition"):
            run_pipeline(config, dataset, FEATURE_ROOT)

    def test_missing_query_embeddings_file(self, dataset, tmp_path):
        with pytest.raises(DataError):
            run_pipeline(WATERSHED_CONFIG, dataset, tmp_path)


class TestSweep:
    def test_grid_evaluated_per_value(self, dataset):
        spec = SweepSpec(
            parameter="shot_threshold",
            grid=(20.0, 32.0, 60.0),
            base=WATERSHED_CONFIG,
        )
        rows = sweep(spec, dataset, FEATURE_ROOT)
        assert [r.value for r in rows] == [20.0, 32.0, 60.0]
        assert all(r.report.n_queries == len(dataset) for r in rows)

    def test_merge_threshold_sweep_segment_counts_monotone(self, dataset):
        spec = SweepSpec(
            parameter="merge_threshold",
            grid=(0.0, 0.3, 0.6, 0.9),
            base=PipelineConfig(shot_threshold=32.0, merge_threshold=0.7),
        )
        rows = sweep(spec, dataset, FEATURE_ROOT)
        counts = [r.n_segments for r in rows]
        assert counts == sorted(counts)  # raising the threshold merges less

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(parameter="shot_threshold", grid=())

    def test_non_increasing_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(parameter="shot_threshold", grid=(3.0, 2.0))
