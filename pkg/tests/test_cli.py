import csv
import json
from pathlib import Path

import pytest

from vmrkit.cli import main
from vmrkit.formats import load_predictions

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FEATURE_ROOT = FIXTURES / "features"
DATASET = FIXTURES / "dataset.jsonl"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        code, _, err = run(["predict", "--dataset", DATASET], capsys)
        assert code == 1

    def test_data_error_is_2(self, tmp_path, capsys):
        missing = tmp_path / "missing.jsonl"
        code, _, err = run(
            ["eval", "--predictions", missing, "--dataset", DATASET], capsys
        )
        assert code == 2
        assert "not found" in err

    def test_bad_flag_value_is_1(self, tmp_path, capsys):
        code, _, _ = run(
            ["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--shot-threshold", "-5", "--out", tmp_path / "p.jsonl"],
            capsys,
        )
        assert code == 1


class TestPredictEval:
    def test_predict_writes_records(self, tmp_path, capsys):
        out = tmp_path / "preds.jsonl"
        code, stdout, _ = run(
            ["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--merge-threshold", "0.7", "--out", out],
            capsys,
        )
        assert code == 0
        assert load_predictions(out)  # parses back
        assert "6 prediction records" in stdout

    def test_predict_default_shot_threshold_follows_watershed(self, tmp_path, capsys):
        merged = tmp_path / "merged.jsonl"
        plain = tmp_path / "plain.jsonl"
        assert run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--merge-threshold", "0.7", "--out", merged], capsys)[0] == 0
        assert run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--out", plain], capsys)[0] == 0
        # watershed default cuts at 32 so it produces more, finer segments
        # before merging; without watershed the default is 53
        assert merged.read_bytes() != plain.read_bytes()

    def test_eval_renders_table_and_files(self, tmp_path, capsys):
        preds = tmp_path / "preds.jsonl"
        run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--merge-threshold", "0.7", "--out", preds], capsys)
        csv_path = tmp_path / "report.csv"
        json_path = tmp_path / "report.json"
        fig_path = tmp_path / "report.png"
        code, stdout, _ = run(
            ["eval", "--predictions", preds, "--dataset", DATASET,
             "--csv", csv_path, "--json", json_path, "--figure", fig_path],
            capsys,
        )
        assert code == 0
        assert "r1@0.5" in stdout and "map_avg" in stdout
        assert csv_path.exists() and fig_path.exists()
        payload = json.loads(json_path.read_text())
        assert set(payload) >= {"r1_at_0_5", "map_avg", "bucketed"}

    def test_config_file_flags_win(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"shot_threshold": 32.0, "merge_threshold": 0.7}))
        out_config = tmp_path / "from_config.jsonl"
        out_flag = tmp_path / "flag_wins.jsonl"
        assert run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--config", config, "--out", out_config], capsys)[0] == 0
        assert run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--config", config, "--merge-threshold", "0.0", "--out", out_flag], capsys)[0] == 0
        assert out_config.read_bytes() != out_flag.read_bytes()

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"lambda": 32.0}))
        code, _, err = run(
            ["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--config", config, "--out", tmp_path / "p.jsonl"],
            capsys,
        )
        assert code == 1

    def test_feature_root_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("VMRKIT_FEATURE_ROOT", str(FEATURE_ROOT))
        out = tmp_path / "preds.jsonl"
        code, _, _ = run(["predict", "--dataset", DATASET, "--out", out], capsys)
        assert code == 0 and out.exists()


class TestStageVerbs:
    def test_shots_lists_segments(self, capsys):
        track = FEATURE_ROOT / "frames" / "vid_a.vmrf"
        code, stdout, _ = run(["shots", "--track", track, "--shot-threshold", "32"], capsys)
        assert code == 0
        lines = stdout.strip().splitlines()
        assert lines[0].startswith("0.000")
        assert len(lines) == 4  # four solid-color blocks

    def test_propose_score_watershed_chain(self, tmp_path, capsys):
        segments = tmp_path / "segments.csv"
        scored = tmp_path / "scored.csv"
        merged = tmp_path / "merged.csv"
        track = FEATURE_ROOT / "frames" / "vid_a.vmrf"
        assert run(["propose", "--method", "shotdetect", "--track", track,
                    "--shot-threshold", "32", "--out", segments], capsys)[0] == 0
        assert run(["score", "--segments", segments,
                    "--embeddings", FEATURE_ROOT / "embeddings" / "vid_a.vmre",
                    "--query-embeddings", FEATURE_ROOT / "queries.joint.jsonl",
                    "--qid", "101", "--out", scored], capsys)[0] == 0
        assert run(["watershed", "--scored", scored, "--merge-threshold", "0.7",
                    "--out", merged], capsys)[0] == 0
        with open(merged) as f:
            rows = list(csv.DictReader(f))
        assert all(set(r) == {"start", "end", "score"} for r in rows)
        assert len(rows) <= sum(1 for _ in open(scored)) - 1

    def test_propose_slidingwindow(self, capsys):
        code, stdout, _ = run(["propose", "--method", "slidingwindow", "--duration", "35"], capsys)
        assert code == 0
        assert stdout.strip().splitlines() == [
            "0.000\t15.000", "10.000\t25.000", "20.000\t35.000", "30.000\t35.000",
        ]

    def test_score_requires_exactly_one_feature_kind(self, tmp_path, capsys):
        segments = tmp_path / "segments.csv"
        run(["propose", "--method", "slidingwindow", "--duration", "35",
             "--out", segments], capsys)
        code, _, _ = run(["score", "--segments", segments,
                          "--query-embeddings", FEATURE_ROOT / "queries.joint.jsonl",
                          "--qid", "101"], capsys)
        assert code == 1


class TestOracleVerb:
    def test_oracle_bounds_order(self, tmp_path, capsys):
        json_scores = tmp_path / "scores.json"
        json_merge = tmp_path / "merge.json"
        assert run(["oracle", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--shot-threshold", "32", "--json", json_scores], capsys)[0] == 0
        assert run(["oracle", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
                    "--shot-threshold", "32", "--merge", "--json", json_merge], capsys)[0] == 0
        plain = json.loads(json_scores.read_text())
        merged = json.loads(json_merge.read_text())
        assert merged["map_avg"] >= plain["map_avg"] - 1e-9


class TestSweepVerb:
    def test_sweep_csv_and_figure(self, tmp_path, capsys):
        out_csv = tmp_path / "sweep.csv"
        figure = tmp_path / "sweep.png"
        code, stdout, _ = run(
            ["sweep", "--param", "shot_threshold", "--grid", "20:60:20",
             "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--merge-threshold", "0.7", "--out-csv", out_csv, "--figure", figure],
            capsys,
        )
        assert code == 0
        with open(out_csv) as f:
            rows = list(csv.DictReader(f))
        assert [r["value"] for r in rows] == ["20.0", "40.0", "60.0"]
        assert figure.exists()

    def test_bad_grid_is_usage_error(self, tmp_path, capsys):
        code, _, _ = run(
            ["sweep", "--param", "shot_threshold", "--grid", "banana",
             "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--out-csv", tmp_path / "s.csv"],
            capsys,
        )
        assert code == 1


class TestReportVerb:
    def test_round_trip(self, tmp_path, capsys):
        preds = tmp_path / "preds.jsonl"
        run(["predict", "--dataset", DATASET, "--feature-root", FEATURE_ROOT,
             "--merge-threshold", "0.7", "--out", preds], capsys)
        json_path = tmp_path / "report.json"
        run(["eval", "--predictions", preds, "--dataset", DATASET, "--json", json_path], capsys)
        csv_path = tmp_path / "rendered.csv"
        code, stdout, _ = run(
            ["report", "--json", json_path, "--csv", csv_path], capsys
        )
        assert code == 0 and "map_avg" in stdout and csv_path.exists()
