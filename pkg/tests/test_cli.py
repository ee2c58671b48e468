from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from taxoforge import cli
from taxoforge.metrics import MetricsReport
from taxoforge.pipeline import run_pipeline
from taxoforge.sources import llm as llm_mod

ANSWERS = {
    "science": "None",
    "computing": "science",
    "machine learning": "artificial intelligence",
    "database": "software",
    "compiler": "software",
    "neural network": "machine learning",
    "semi-supervised clustering": "machine learning",
}


class FakeHttpChat(llm_mod.ChatClient):
    """Stands in for the remote chat endpoint during the recording pass."""

    def __init__(self, model_id, **kwargs):
        self.model_id = model_id

    def complete(self, prompt: str) -> str:
        if "Are the terms in the pair related" in prompt:
            return "1" if "machine learning" in prompt.splitlines()[-1] else "0"
        term = prompt.rsplit("What is the hypernym of ", 1)[1].rstrip("?")
        return ANSWERS.get(term, "None")


@pytest.fixture
def workspace(tmp_path, fixtures_dir, monkeypatch):
    monkeypatch.setattr(llm_mod, "HttpChatClient", FakeHttpChat)
    cache = tmp_path / "cache"
    (cache / "llm").mkdir(parents=True)
    shutil.copytree(fixtures_dir / "wikidata_cache", cache / "wikidata")

    annotations = tmp_path / "annotations.csv"
    annotations.write_text(
        "child,parent,rater,value\n"
        "neural network,machine learning,r1,1\n"
        "neural network,machine learning,r2,1\n"
        "compiler,software,r1,1\n"
        "compiler,software,r2,0\n",
        encoding="utf-8",
    )

    config = tmp_path / "run.toml"
    config.write_text(
        f"""
[run]
run_dir = "run_a"
cache_dir = "cache"
seed = "{fixtures_dir / 'seed_small.csv'}"
offline = false
workers = 2
sources = ["cso", "wikidata", "llm"]

[embeddings]
mode = "file"
[embeddings.tables]
"all-MiniLM-L6-v2" = "{fixtures_dir / 'embeddings_mini.csv'}"

[cso]
dump = "{fixtures_dir / 'cso_dump_small.csv'}"
providers = ["all-MiniLM-L6-v2"]
thresholds = [0.5, 0.8]

[wikidata]
take_all = [false]
type_threshold = [0, 3]
max_depth = [2, 3]

[llm]
models = ["gpt-4-1106-preview"]
prompts = ["WT", "NT"]

[cleaning]
cycle = [true, false]
abstract = [false]
generic_clusters = 1

[ensemble]
mode = "cascade"
sources = ["cso", "wikidata"]

[complete]
model = "gpt-4-1106-preview"

[eval]
annotations = "{annotations}"
judge_model = "gpt-4-1106-preview"
""",
        encoding="utf-8",
    )
    return tmp_path, config


def artifact_bytes(run_dir: Path) -> dict[str, bytes]:
    out = {}
    for path in sorted(run_dir.rglob("*.csv")):
        out[str(path.relative_to(run_dir))] = path.read_bytes()
    return out


class TestPipeline:
    def test_record_then_offline_replay_identical(self, workspace):
        tmp_path, config = workspace

        assert run_pipeline(config) == 0
        run_a = tmp_path / "run_a"
        baseline = artifact_bytes(run_a)
        assert "export/taxonomy_edges.csv" in baseline
        assert (run_a / "export" / "taxonomy.dot").exists()
        assert (run_a / "manifest.json").exists()

        # recordings were persisted during the first pass
        recordings = list((tmp_path / "cache" / "llm").rglob("*.json"))
        assert recordings

        # resume into the same run dir: nothing changes
        assert run_pipeline(config) == 0
        assert artifact_bytes(run_a) == baseline

        # fully offline second run reproduces the same artifacts elsewhere
        run_b = tmp_path / "run_b"
        code = cli.main(
            ["--config", str(config), "--offline", "--run-dir", str(run_b)]
        )
        assert code == 0
        replayed = artifact_bytes(run_b)
        assert replayed == baseline

    def test_interrupted_sweep_resumes_to_identical_artifacts(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config) == 0
        run_a = tmp_path / "run_a"
        baseline = artifact_bytes(run_a)
        # wipe a slice of the sweep, as if the run had stopped mid-way
        shutil.rmtree(run_a / "clean")
        (run_a / "metrics" / "metrics.csv").unlink()
        shutil.rmtree(run_a / "export")
        assert run_pipeline(config) == 0
        assert artifact_bytes(run_a) == baseline

    def test_sweep_points_unique_in_metrics_csv(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["build", "clean", "metrics"]) == 0
        metrics_csv = (tmp_path / "run_a" / "metrics" / "metrics.csv").read_text()
        lines = metrics_csv.splitlines()
        config_ids = [line.split(",", 1)[0] for line in lines[1:]]
        assert len(config_ids) == len(set(config_ids))
        # cso: 2 thresholds x cyc{0,1}; wikidata: tt{0,3} x md{2,3} x cyc;
        # llm: prompts{WT,NT} x cyc
        assert len(config_ids) == 4 + 8 + 4

    def test_metrics_stage_contract(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["build", "clean"]) == 0
        assert run_pipeline(config, stages=["metrics"]) == 0
        header = (
            (tmp_path / "run_a" / "metrics" / "metrics.csv")
            .read_text()
            .splitlines()[0]
            .split(",")
        )
        assert header == ["config_id", *MetricsReport.METRIC_FIELDS]

    def test_select_outputs_rank_one_first(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["build", "clean", "metrics", "select"]) == 0
        for source in ("cso", "wikidata", "llm"):
            lines = (
                (tmp_path / "run_a" / "select" / f"topsis_{source}.csv")
                .read_text()
                .splitlines()
            )
            assert lines[0] == "config_id,score,rank,on_pareto_front"
            first = lines[1].split(",")
            assert first[2] == "1"
            assert first[0].startswith(source)
            scores = [float(line.split(",")[1]) for line in lines[1:]]
            assert scores == sorted(scores, reverse=True)

    def test_eval_stage_writes_agreement(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["eval"]) == 0
        text = (tmp_path / "run_a" / "eval" / "agreement.csv").read_text()
        assert text.splitlines()[0] == "statistic,value"
        assert "krippendorff_alpha," in text
        assert "krippendorff_alpha_with_judge," in text
        assert "zero_share_llm-judge," in text
        assert (tmp_path / "run_a" / "eval" / "pairwise.csv").exists()

    def test_cleaning_audit_written(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["build", "clean"]) == 0
        audits = list((tmp_path / "run_a" / "clean").rglob("removed.csv"))
        assert audits
        for audit in audits:
            assert audit.read_text().splitlines()[0] == "operation,child,parent"

    def test_rejected_links_audit_written(self, workspace):
        tmp_path, config = workspace
        assert run_pipeline(config, stages=["build"]) == 0
        rejected = list((tmp_path / "run_a" / "build").rglob("rejected_links.csv"))
        assert rejected
        high = next(p for p in rejected if "t0.80" in str(p))
        assert "semi-supervised clustering" in high.read_text()


class TestConfigErrors:
    def test_missing_config_file(self, tmp_path):
        assert run_pipeline(tmp_path / "nope.toml") == 2

    def test_missing_seed(self, tmp_path):
        config = tmp_path / "c.toml"
        config.write_text('[run]\nrun_dir = "r"\nseed = "missing.csv"\n', encoding="utf-8")
        assert run_pipeline(config) == 2

    def test_empty_grid_rejected(self, tmp_path, fixtures_dir):
        config = tmp_path / "c.toml"
        config.write_text(
            f"""
[run]
run_dir = "r"
seed = "{fixtures_dir / 'seed_small.csv'}"
sources = ["wikidata"]

[wikidata]
max_depth = []
""",
            encoding="utf-8",
        )
        assert run_pipeline(config) == 2

    def test_offline_without_cache_fails_at_startup(self, tmp_path, fixtures_dir):
        config = tmp_path / "c.toml"
        config.write_text(
            f"""
[run]
run_dir = "r"
seed = "{fixtures_dir / 'seed_small.csv'}"
offline = true
sources = ["wikidata"]
""",
            encoding="utf-8",
        )
        assert run_pipeline(config) == 2
        assert not (tmp_path / "r" / "build").exists()

    def test_unknown_stage(self, workspace):
        _, config = workspace
        assert run_pipeline(config, stages=["mystery"]) == 2

    def test_cli_reports_config_error(self, tmp_path, capsys):
        code = cli.main(["--config", str(tmp_path / "nope.toml")])
        assert code == 2
        assert "configuration error" in capsys.readouterr().err
