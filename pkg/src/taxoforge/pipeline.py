"""Run orchestration: config parsing, sweep execution, stage artifacts.

Stages run in a fixed order (build, clean, metrics, select, ensemble,
complete, eval, export) under a run directory. Every sweep point writes
its own files atomically, so an interrupted run resumes by skipping the
artifacts that already exist and recomputing nothing else.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import agreement as agreement_mod
from . import cleaning as cleaning_mod
from . import ensemble as ensemble_mod
from . import metrics as metrics_mod
from . import selection as selection_mod
from .embeddings import EmbeddingProvider, FileEmbeddingProvider, HttpEmbeddingProvider
from .errors import ConfigError
from .graph import TaxonomyGraph
from .seeds import SeedList, generic_head, parse_seed
from .sources import cso as cso_mod
from .sources import llm as llm_mod
from .sources import wikidata as wd_mod

logger = logging.getLogger(__name__)

STAGES = ("build", "clean", "metrics", "select", "ensemble", "complete", "eval", "export")

LAYOUT_VERSION = 1


@dataclass
class RunConfig:
    config_path: Path
    run_dir: Path
    cache_dir: Path
    seed_path: Path
    offline: bool = False
    workers: int = 1
    sources: list[str] = field(default_factory=lambda: ["cso", "wikidata", "llm"])

    embedding_mode: str = "file"
    embedding_tables: dict[str, Path] = field(default_factory=dict)
    embedding_url: str | None = None

    cso_dump: Path | None = None
    cso_providers: list[str] = field(default_factory=lambda: ["all-MiniLM-L6-v2"])
    cso_thresholds: list[float] = field(default_factory=lambda: [0.80])

    wd_cache_dir: Path | None = None
    wd_take_all: list[bool] = field(default_factory=lambda: [False])
    wd_type_threshold: list[int] = field(default_factory=lambda: [0])
    wd_max_depth: list[int] = field(default_factory=lambda: [3])

    llm_models: list[str] = field(default_factory=lambda: ["gpt-4-1106-preview"])
    llm_prompts: list[str] = field(default_factory=lambda: ["WT"])
    llm_iterative: bool = False
    llm_recordings_dir: Path | None = None

    clean_cycle: list[bool] = field(default_factory=lambda: [True, False])
    clean_abstract: list[bool] = field(default_factory=lambda: [True, False])
    generic_clusters: int = 1

    ensemble_mode: str = "cascade"
    ensemble_sources: list[str] = field(default_factory=lambda: ["cso", "wikidata"])
    dedup_threshold: float = ensemble_mod.DEFAULT_DEDUP_THRESHOLD
    dedup_provider: str | None = None

    complete_enabled: bool = False
    complete_model: str | None = None
    complete_recordings: Path | None = None

    eval_annotations: Path | None = None
    eval_judge_model: str | None = None

    @classmethod
    def from_toml(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError("config file not found", path=str(path))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}", path=str(path))

        def need(table: dict, key: str, section: str):
            if key not in table:
                raise ConfigError("missing required key", path=str(path), key=f"{section}.{key}")
            return table[key]

        run = doc.get("run", {})
        base = path.parent

        def respath(value) -> Path:
            p = Path(value)
            return p if p.is_absolute() else base / p

        cfg = cls(
            config_path=path,
            run_dir=respath(need(run, "run_dir", "run")),
            cache_dir=respath(run.get("cache_dir", "cache")),
            seed_path=respath(need(run, "seed", "run")),
            offline=bool(run.get("offline", False)),
            workers=int(run.get("workers", 1)),
            sources=list(run.get("sources", ["cso", "wikidata", "llm"])),
        )

        emb = doc.get("embeddings", {})
        cfg.embedding_mode = emb.get("mode", "file")
        cfg.embedding_url = emb.get("url")
        cfg.embedding_tables = {
            name: respath(table_path) for name, table_path in emb.get("tables", {}).items()
        }

        cso = doc.get("cso", {})
        if "cso" in cfg.sources:
            cfg.cso_dump = respath(need(cso, "dump", "cso"))
        cfg.cso_providers = list(cso.get("providers", cfg.cso_providers))
        cfg.cso_thresholds = [float(t) for t in cso.get("thresholds", cfg.cso_thresholds)]

        wd = doc.get("wikidata", {})
        cfg.wd_cache_dir = respath(wd["cache_dir"]) if "cache_dir" in wd else cfg.cache_dir / "wikidata"
        cfg.wd_take_all = [bool(v) for v in wd.get("take_all", cfg.wd_take_all)]
        cfg.wd_type_threshold = [int(v) for v in wd.get("type_threshold", cfg.wd_type_threshold)]
        cfg.wd_max_depth = [int(v) for v in wd.get("max_depth", cfg.wd_max_depth)]

        llm = doc.get("llm", {})
        cfg.llm_models = list(llm.get("models", cfg.llm_models))
        cfg.llm_prompts = list(llm.get("prompts", cfg.llm_prompts))
        cfg.llm_iterative = bool(llm.get("iterative", False))
        cfg.llm_recordings_dir = (
            respath(llm["recordings_dir"]) if "recordings_dir" in llm else cfg.cache_dir / "llm"
        )

        cleaning = doc.get("cleaning", {})
        cfg.clean_cycle = [bool(v) for v in cleaning.get("cycle", cfg.clean_cycle)]
        cfg.clean_abstract = [bool(v) for v in cleaning.get("abstract", cfg.clean_abstract)]
        cfg.generic_clusters = int(cleaning.get("generic_clusters", 1))

        ens = doc.get("ensemble", {})
        cfg.ensemble_mode = ens.get("mode", "cascade")
        cfg.ensemble_sources = list(ens.get("sources", cfg.ensemble_sources))
        cfg.dedup_threshold = float(ens.get("dedup_threshold", cfg.dedup_threshold))
        cfg.dedup_provider = ens.get("dedup_provider")

        comp = doc.get("complete", {})
        cfg.complete_enabled = "complete" in doc
        cfg.complete_model = comp.get("model", cfg.llm_models[0] if cfg.llm_models else None)
        if "recordings_dir" in comp:
            cfg.complete_recordings = respath(comp["recordings_dir"])

        ev = doc.get("eval", {})
        if "annotations" in ev:
            cfg.eval_annotations = respath(ev["annotations"])
        cfg.eval_judge_model = ev.get("judge_model")

        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.seed_path.exists():
            raise ConfigError("seed file not found", path=str(self.seed_path))
        unknown = set(self.sources) - {"cso", "wikidata", "llm"}
        if unknown:
            raise ConfigError(f"unknown sources {sorted(unknown)}", key="run.sources")
        if self.ensemble_mode not in ("cascade", "union"):
            raise ConfigError(f"bad ensemble mode {self.ensemble_mode!r}", key="ensemble.mode")
        for name, grid in (
            ("cso.providers", self.cso_providers),
            ("cso.thresholds", self.cso_thresholds),
            ("wikidata.take_all", self.wd_take_all),
            ("wikidata.type_threshold", self.wd_type_threshold),
            ("wikidata.max_depth", self.wd_max_depth),
            ("llm.models", self.llm_models),
            ("llm.prompts", self.llm_prompts),
            ("cleaning.cycle", self.clean_cycle),
            ("cleaning.abstract", self.clean_abstract),
        ):
            if not grid:
                raise ConfigError("sweep grid must be non-empty", key=name)
        if "cso" in self.sources and (self.cso_dump is None or not self.cso_dump.exists()):
            raise ConfigError("ontology dump not found", path=str(self.cso_dump), key="cso.dump")
        if self.offline:
            self._validate_offline()

    def _validate_offline(self) -> None:
        """Offline runs must fail at startup, not mid-sweep."""
        if "cso" in self.sources or self.dedup_provider:
            if self.embedding_mode != "file":
                raise ConfigError("offline runs need file-mode embeddings", key="embeddings.mode")
            for provider in self.cso_providers:
                if provider not in self.embedding_tables:
                    raise ConfigError(
                        f"no embedding table for provider {provider!r}", key="embeddings.tables"
                    )
        if "wikidata" in self.sources:
            seed = parse_seed(self.seed_path)
            missing = [
                entry.qid
                for entry in seed.entries
                if not (self.wd_cache_dir / f"{entry.qid}.json").exists()
            ]
            if missing:
                raise ConfigError(
                    f"offline run but {len(missing)} seed entities are not cached "
                    f"(first: {missing[0]})",
                    key="wikidata.cache_dir",
                )
        if "llm" in self.sources:
            seed = parse_seed(self.seed_path)
            for model in self.llm_models:
                for prompt_mode in self.llm_prompts:
                    run_id = llm_run_id(model, prompt_mode, self.llm_iterative)
                    replay = llm_mod.ReplayClient(model, self.llm_recordings_dir / run_id)
                    term_list = (
                        sorted(e.label for e in seed.entries) if prompt_mode == llm_mod.WT else None
                    )
                    for entry in seed.entries:
                        rendered = llm_mod.render_prompt(prompt_mode, entry.label, term_list)
                        digest = llm_mod.request_hash(model, rendered)
                        if not (replay.replay_dir / f"{digest}.json").exists():
                            raise ConfigError(
                                f"offline run but no recording for {entry.label!r} "
                                f"({model}, {prompt_mode})",
                                key="llm.recordings_dir",
                            )


def llm_run_id(model: str, prompt_mode: str, iterative: bool) -> str:
    return f"{model}__{prompt_mode}__{'iter' if iterative else 'simple'}"


# ---------------------------------------------------------------------------
# Stage runner
# ---------------------------------------------------------------------------


class PipelineRun:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.run_dir = cfg.run_dir
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.seed: SeedList = parse_seed(cfg.seed_path)
        self._providers: dict[str, EmbeddingProvider] = {}
        self._write_manifest()

    # -- helpers ------------------------------------------------------------

    def _write_manifest(self) -> None:
        inputs = {"seed": _sha256(self.cfg.seed_path)}
        if self.cfg.cso_dump and self.cfg.cso_dump.exists():
            inputs["cso_dump"] = _sha256(self.cfg.cso_dump)
        manifest = {
            "layout": LAYOUT_VERSION,
            "config": str(self.cfg.config_path),
            "inputs": inputs,
        }
        _write_json_atomic(self.run_dir / "manifest.json", manifest)

    def provider(self, provider_id: str) -> EmbeddingProvider:
        if provider_id not in self._providers:
            if self.cfg.embedding_mode == "file":
                try:
                    table = self.cfg.embedding_tables[provider_id]
                except KeyError:
                    raise ConfigError(
                        f"no embedding table for {provider_id!r}", key="embeddings.tables"
                    )
                self._providers[provider_id] = FileEmbeddingProvider(provider_id, table)
            else:
                self._providers[provider_id] = HttpEmbeddingProvider(
                    provider_id, base_url=self.cfg.embedding_url
                )
        return self._providers[provider_id]

    def _graph_dir(self, stage: str, config_id: str) -> Path:
        return self.run_dir / stage / config_id

    def _save_graph(self, stage: str, config_id: str, g: TaxonomyGraph) -> None:
        # temp-then-rename so an interrupted run never leaves a partial
        # artifact that a resume would mistake for a finished one
        out = self._graph_dir(stage, config_id)
        out.mkdir(parents=True, exist_ok=True)
        g.write_edges_csv(out / "edges.csv.tmp")
        g.write_nodes_csv(out / "nodes.csv.tmp")
        (out / "edges.csv.tmp").replace(out / "edges.csv")
        (out / "nodes.csv.tmp").replace(out / "nodes.csv")

    def _load_graph(self, stage: str, config_id: str) -> TaxonomyGraph:
        out = self._graph_dir(stage, config_id)
        return TaxonomyGraph.read_csv(out / "edges.csv", out / "nodes.csv")

    def _has_graph(self, stage: str, config_id: str) -> bool:
        out = self._graph_dir(stage, config_id)
        return (out / "edges.csv").exists() and (out / "nodes.csv").exists()

    def _chat_client(self, model: str, run_id: str) -> llm_mod.ChatClient:
        recordings = (self.cfg.llm_recordings_dir or self.cfg.cache_dir / "llm") / run_id
        if self.cfg.offline:
            return llm_mod.ReplayClient(model, recordings)
        return llm_mod.RecordingClient(llm_mod.HttpChatClient(model), recordings)

    # -- build ---------------------------------------------------------------

    def build_points(self) -> list[tuple[str, str]]:
        """(source, param_id) pairs for the configured sweep grids."""
        points: list[tuple[str, str]] = []
        if "cso" in self.cfg.sources:
            for provider in self.cfg.cso_providers:
                for threshold in self.cfg.cso_thresholds:
                    points.append(("cso", f"{provider}__t{threshold:.2f}"))
        if "wikidata" in self.cfg.sources:
            for take_all in self.cfg.wd_take_all:
                for tt in self.cfg.wd_type_threshold:
                    for md in self.cfg.wd_max_depth:
                        points.append(("wikidata", f"ta{'T' if take_all else 'F'}__tt{tt}__md{md}"))
        if "llm" in self.cfg.sources:
            for model in self.cfg.llm_models:
                for prompt in self.cfg.llm_prompts:
                    points.append(("llm", llm_run_id(model, prompt, self.cfg.llm_iterative)))
        return points

    def _build_one(self, source: str, param_id: str) -> None:
        if self._has_graph("build", f"{source}__{param_id}"):
            return
        if source == "cso":
            provider_id, t_part = param_id.rsplit("__t", 1)
            cso_graph = self._cso_graph()
            link_cfg = cso_mod.CsoLinkConfig(
                sim_threshold=float(t_part), provider=self.provider(provider_id)
            )
            links, rejected = cso_mod.link_seed_to_cso(self.seed, cso_graph, link_cfg)
            g = cso_mod.build_cso_taxonomy(self.seed, links, cso_graph)
            out = self._graph_dir("build", f"{source}__{param_id}")
            out.mkdir(parents=True, exist_ok=True)
            cso_mod.write_rejected_links_csv(out / "rejected_links.csv", rejected)
        elif source == "wikidata":
            ta_part, tt_part, md_part = param_id.split("__")
            wd_cfg = wd_mod.WdConfig(
                take_all=ta_part == "taT",
                type_threshold=int(tt_part[2:]),
                max_depth=int(md_part[2:]),
            )
            store = wd_mod.WikidataStore(self.cfg.wd_cache_dir, offline=self.cfg.offline)
            g = wd_mod.build_wikidata_taxonomy(self.seed, wd_cfg, store)
        elif source == "llm":
            model, prompt_mode, _ = param_id.split("__")
            llm_cfg = llm_mod.LlmConfig(
                model_id=model, prompt_mode=prompt_mode, iterative=self.cfg.llm_iterative
            )
            client = self._chat_client(model, param_id)
            g = llm_mod.build_llm_taxonomy(self.seed, llm_cfg, client)
        else:
            raise ConfigError(f"unknown source {source!r}")
        self._save_graph("build", f"{source}__{param_id}", g)

    _cso_cache: cso_mod.CsoGraph | None = None

    def _cso_graph(self) -> cso_mod.CsoGraph:
        if self._cso_cache is None:
            self._cso_cache = cso_mod.parse_cso_dump(self.cfg.cso_dump)
        return self._cso_cache

    def stage_build(self) -> None:
        points = self.build_points()
        if any(source == "cso" for source, _ in points):
            self._cso_graph()  # parse once before the parallel fan-out
        workers = max(1, self.cfg.workers)
        if workers == 1:
            for source, param_id in points:
                self._build_one(source, param_id)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda p: self._build_one(*p), points))

    # -- clean ---------------------------------------------------------------

    def sweep_configs(self) -> list[tuple[str, str, bool, bool]]:
        """(source, param_id, cycle, abstract) for every sweep point."""
        out = []
        for source, param_id in self.build_points():
            for cycle in self.cfg.clean_cycle:
                for abstract in self.cfg.clean_abstract:
                    out.append((source, param_id, cycle, abstract))
        return out

    @staticmethod
    def config_id(source: str, param_id: str, cycle: bool, abstract: bool) -> str:
        return f"{source}__{param_id}__cyc{int(cycle)}__abs{int(abstract)}"

    def stage_clean(self) -> None:
        generic = generic_head(self.seed, self.cfg.generic_clusters)

        def clean_one(point: tuple[str, str, bool, bool]) -> None:
            source, param_id, cycle, abstract = point
            config_id = self.config_id(source, param_id, cycle, abstract)
            if self._has_graph("clean", config_id):
                return
            g = self._load_graph("build", f"{source}__{param_id}")
            cleaned, audit = cleaning_mod.clean(g, cycle=cycle, abstract=abstract, generic_set=generic)
            self._save_graph("clean", config_id, cleaned)
            audit_path = self._graph_dir("clean", config_id) / "removed.csv"
            with open(audit_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("operation,child,parent\n")
                for op, child, parent in audit:
                    fh.write(f"{op},{child},{parent}\n")

        points = self.sweep_configs()
        workers = max(1, self.cfg.workers)
        if workers == 1:
            for point in points:
                clean_one(point)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(clean_one, points))

    # -- metrics / select ------------------------------------------------------

    def stage_metrics(self) -> None:
        rows_by_source: dict[str, list[tuple[str, metrics_mod.MetricsReport]]] = {}
        for source, param_id, cycle, abstract in self.sweep_configs():
            config_id = self.config_id(source, param_id, cycle, abstract)
            g = self._load_graph("clean", config_id)
            report = metrics_mod.compute_report(g, self.seed)
            rows_by_source.setdefault(source, []).append((config_id, report))
        out = self.run_dir / "metrics"
        out.mkdir(parents=True, exist_ok=True)
        all_rows: list[tuple[str, metrics_mod.MetricsReport]] = []
        for source, rows in sorted(rows_by_source.items()):
            metrics_mod.write_metrics_csv(out / f"metrics_{source}.csv", rows)
            all_rows.extend(rows)
        metrics_mod.write_metrics_csv(out / "metrics.csv", all_rows)

    def stage_select(self) -> None:
        out = self.run_dir / "select"
        out.mkdir(parents=True, exist_ok=True)
        for source in self.cfg.sources:
            rows = metrics_mod.read_metrics_csv(self.run_dir / "metrics" / f"metrics_{source}.csv")
            if len(rows) == 1:
                # Degenerate sweep: a single configuration is trivially best.
                config_id = rows[0][0]
                with open(out / f"topsis_{source}.csv", "w", encoding="utf-8", newline="\n") as fh:
                    fh.write("config_id,score,rank,on_pareto_front\n")
                    fh.write(f"{config_id},1.000000,1,1\n")
                continue
            matrix = selection_mod.build_matrix(rows)
            selection_mod.write_matrix_csv(out / f"matrix_{source}.csv", matrix)
            result = selection_mod.topsis(matrix)
            front = selection_mod.pareto_front(matrix)
            selection_mod.write_result_csv(out / f"topsis_{source}.csv", result, front)

    def best_config(self, source: str) -> str:
        path = self.run_dir / "select" / f"topsis_{source}.csv"
        with open(path, encoding="utf-8") as fh:
            next(fh)
            return fh.readline().split(",", 1)[0]

    # -- ensemble / complete / eval / export ----------------------------------

    def stage_ensemble(self) -> None:
        graphs: list[tuple[TaxonomyGraph, str]] = []
        for source in self.cfg.ensemble_sources:
            if source not in self.cfg.sources:
                raise ConfigError(f"ensemble source {source!r} was not built", key="ensemble.sources")
            graphs.append((self._load_graph("clean", self.best_config(source)), source))
        if self.cfg.ensemble_mode == "cascade":
            merged = ensemble_mod.cascade_merge(graphs, self.seed)
        else:
            provider = self.provider(self.cfg.dedup_provider) if self.cfg.dedup_provider else None
            merged = ensemble_mod.union_merge(
                [g for g, _ in graphs], self.cfg.dedup_threshold, provider
            )
        self._save_graph("ensemble", "merged", merged)

    def stage_complete(self) -> None:
        if not self.cfg.complete_model:
            raise ConfigError("no completion model configured", key="complete.model")
        g = self._load_graph("ensemble", "merged")
        run_id = f"{self.cfg.complete_model}__WT__complete"
        recordings = self.cfg.complete_recordings
        if recordings is not None:
            client: llm_mod.ChatClient
            if self.cfg.offline:
                client = llm_mod.ReplayClient(self.cfg.complete_model, recordings)
            else:
                client = llm_mod.RecordingClient(
                    llm_mod.HttpChatClient(self.cfg.complete_model), recordings
                )
        else:
            client = self._chat_client(self.cfg.complete_model, run_id)
        llm_cfg = llm_mod.LlmConfig(model_id=self.cfg.complete_model, prompt_mode=llm_mod.WT)
        completed = ensemble_mod.llm_complete(g, self.seed, llm_cfg, client)
        self._save_graph("complete", "final", completed)

    def stage_eval(self) -> None:
        if self.cfg.eval_annotations is None:
            raise ConfigError("no annotation file configured", key="eval.annotations")
        table = agreement_mod.AnnotationTable.from_csv(self.cfg.eval_annotations)
        out = self.run_dir / "eval"
        out.mkdir(parents=True, exist_ok=True)
        lines = [("krippendorff_alpha", f"{agreement_mod.krippendorff_alpha(table):.6f}")]
        # histogram reflects the ingested campaign, before any judge column
        for bucket, count in agreement_mod.vote_histogram(table).items():
            lines.append((f"votes_{bucket}", str(count)))
        if self.cfg.eval_judge_model:
            client = self._chat_client(
                self.cfg.eval_judge_model, f"{self.cfg.eval_judge_model}__judge"
            )
            verdicts = llm_mod.judge_pairs(table.pairs, client)
            table = agreement_mod.with_rater(table, "llm-judge", verdicts)
            lines.append(
                ("krippendorff_alpha_with_judge",
                 f"{agreement_mod.krippendorff_alpha(table):.6f}")
            )
        for rater in table.raters:
            zero_share, one_share = agreement_mod.score_share(table, rater)
            lines.append((f"zero_share_{rater}", f"{zero_share:.6f}"))
            lines.append((f"one_share_{rater}", f"{one_share:.6f}"))
        with open(out / "agreement.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("statistic,value\n")
            for key, value in lines:
                fh.write(f"{key},{value}\n")
        pairwise = agreement_mod.pairwise_alpha(table)
        with open(out / "pairwise.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("rater_a,rater_b,shared,alpha\n")
            for (r1, r2), (shared, alpha) in sorted(pairwise.items()):
                fh.write(f"{r1},{r2},{shared},{'' if alpha is None else f'{alpha:.6f}'}\n")

    def stage_export(self) -> None:
        stage = "complete" if self._has_graph("complete", "final") else "ensemble"
        name = "final" if stage == "complete" else "merged"
        g = self._load_graph(stage, name)
        out = self.run_dir / "export"
        out.mkdir(parents=True, exist_ok=True)
        g.write_edges_csv(out / "taxonomy_edges.csv")
        g.write_nodes_csv(out / "taxonomy_nodes.csv")
        with open(out / "taxonomy.dot", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(g.to_dot())
        report = metrics_mod.compute_report(g, self.seed)
        metrics_mod.write_metrics_csv(out / "final_metrics.csv", [("final", report)])

    def run(self, stages: list[str] | None = None) -> None:
        todo = list(stages) if stages else list(STAGES)
        unknown = set(todo) - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stages {sorted(unknown)}")
        for stage in STAGES:
            if stage not in todo:
                continue
            if stage == "complete" and not stages and not self.cfg.complete_enabled:
                continue
            if stage == "eval" and not stages and self.cfg.eval_annotations is None:
                continue
            logger.info("stage %s", stage)
            getattr(self, f"stage_{stage}")()


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json_atomic(path: Path, doc: dict) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    tmp.replace(path)


def run_pipeline(
    config: str | Path,
    stages: list[str] | None = None,
    offline: bool | None = None,
    workers: int | None = None,
    run_dir: str | Path | None = None,
) -> int:
    """Execute the requested stages; returns a process exit status."""
    try:
        cfg = RunConfig.from_toml(config)
        if offline is not None:
            cfg.offline = offline
            cfg.validate()
        if workers is not None:
            cfg.workers = workers
        if run_dir is not None:
            cfg.run_dir = Path(run_dir)
        run = PipelineRun(cfg)
        run.run(stages)
        return 0
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
