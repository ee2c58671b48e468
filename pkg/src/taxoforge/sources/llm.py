"""Chat-model adapter: hypernym prompts, response parsing, and taxonomy
construction with exact record/replay.

Every issued request is content-addressed by a digest of the rendered
prompt plus the model id and stored as one JSON file per exchange, so a
recorded run replays to the identical graph with zero network use.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import requests

from ..errors import (
    ClientError,
    InvalidArgument,
    MalformedResponse,
    MissingTermList,
    ReplayMissingError,
)
from ..graph import LLM, SEED, TaxonomyGraph, canonicalize_label
from ..seeds import SeedList

logger = logging.getLogger(__name__)

WT = "WT"
NT = "NT"

ENV_LLM_URL = "TAXOFORGE_LLM_URL"
ENV_LLM_KEY = "TAXOFORGE_LLM_KEY"

DEFAULT_PARALLELISM = 2
DEFAULT_ITERATIVE_DEPTH = 3

PROMPT_NO_LIST = (
    "You are a helpful assistant tasked to pair terms to the hypernym to which "
    "they should belong. If it does not belong to any, answer None.\n"
    "Given a term, provide the hypernym for the term.\n"
    "Multiple answers are allowed, and should be separated by a comma. "
    "Keep the answer concise, in CSV format, without any extra.\n"
    "For example:\n"
    "parent1\n"
    "parent1,parent2,parent3\n"
    "None\n"
    "What is the hypernym of {term}?"
)

PROMPT_WITH_LIST = (
    "You are a helpful assistant tasked to pair terms to the hypernym to which "
    "they should belong. If it does not belong to any, answer None.\n"
    "Given a term, provide the hypernym for the term. The hypernym should be a "
    "term from the taxonomy.\n"
    "Multiple answers are allowed, and should be separated by a comma. "
    "Keep the answer concise, in CSV format, without any extra.\n"
    "For example:\n"
    "parent1\n"
    "parent1,parent2,parent3\n"
    "None\n"
    "This is the list of possible terms:\n"
    "{taxonomy}\n"
    "What is the hypernym of {term}?"
)

PROMPT_PAIR_JUDGE = (
    "You are an expert in domain relationships and knowledge categorization. "
    "Your task is to analyze pairs of terms and determine their relationship "
    "based on the following criteria:\n"
    "- 1 (Subdomain Relationship): One term is a specific subdomain or subset "
    "of the other.\n"
    "- 0 (No Relationship): The terms have no significant relationship.\n"
    "For each pair of terms provided, identify and categorize their "
    "relationship. Only provide the classification (0, or 1) without any "
    "explanation.\n"
    "Are the terms in the pair related as subdomain or unrelated?\n"
    "{pair}"
)


def render_prompt(mode: str, term: str, term_list: list[str] | None = None) -> str:
    """Byte-exact instantiation of the hypernym prompt templates."""
    if mode == NT:
        return PROMPT_NO_LIST.format(term=term)
    if mode == WT:
        if not term_list:
            raise MissingTermList("list-constrained prompts need a non-empty term list")
        return PROMPT_WITH_LIST.format(taxonomy="\n".join(term_list), term=term)
    raise InvalidArgument(f"unknown prompt mode {mode!r}")


def render_pair_prompt(child: str, parent: str) -> str:
    return PROMPT_PAIR_JUDGE.format(pair=f"({child}, {parent})")


def parse_hypernyms(response: str) -> list[str]:
    """Single CSV line -> canonical labels; 'None' means no hypernym."""
    body = response.strip()
    if not body or "\n" in body:
        raise MalformedResponse(f"expected one CSV line, got {response!r}")
    if body.casefold() == "none":
        return []
    labels: list[str] = []
    for raw in body.split(","):
        text = raw.strip()
        if not text:
            continue
        label = canonicalize_label(text)
        if label not in labels:
            labels.append(label)
    return labels


def request_hash(model_id: str, prompt: str) -> str:
    digest = hashlib.sha256()
    digest.update(model_id.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(prompt.encode("utf-8"))
    return digest.hexdigest()


@dataclass
class LlmConfig:
    model_id: str
    prompt_mode: str = WT
    iterative: bool = False
    temperature: float = 0.0
    sampling_seed: int | None = None
    iterative_depth: int = DEFAULT_ITERATIVE_DEPTH
    skip_failures: bool = True
    parallelism: int = DEFAULT_PARALLELISM

    def __post_init__(self):
        if self.prompt_mode not in (WT, NT):
            raise InvalidArgument(f"prompt mode must be WT or NT, got {self.prompt_mode!r}")
        if self.iterative_depth < 1:
            raise InvalidArgument("iterative depth must be >= 1")


class ChatClient:
    """Interface: rendered prompt in, raw completion text out."""

    model_id: str

    def complete(self, prompt: str) -> str:
        raise NotImplementedError


class HttpChatClient(ChatClient):
    """OpenAI-style chat-completions endpoint with retry and backoff."""

    def __init__(
        self,
        model_id: str,
        base_url: str | None = None,
        api_key: str | None = None,
        temperature: float = 0.0,
        sampling_seed: int | None = None,
        session: requests.Session | None = None,
        retries: int = 3,
        timeout: float = 60.0,
    ):
        self.model_id = model_id
        self.base_url = base_url or os.environ.get(ENV_LLM_URL)
        if not self.base_url:
            raise ClientError(f"no chat endpoint configured (set {ENV_LLM_URL})")
        self.api_key = api_key or os.environ.get(ENV_LLM_KEY)
        self.temperature = temperature
        self.sampling_seed = sampling_seed
        self.session = session or requests.Session()
        self.retries = retries
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        if self.sampling_seed is not None:
            payload["seed"] = self.sampling_seed
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self.session.post(
                    f"{self.base_url.rstrip('/')}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                time.sleep(2**attempt * 0.5)
        raise ClientError(f"completion failed after {self.retries} attempts: {last_error}")


class RecordingClient(ChatClient):
    """Wraps a live client, persisting one JSON file per exchange plus an
    append-only index in issue order."""

    def __init__(self, inner: ChatClient, record_dir: str | Path):
        self.inner = inner
        self.model_id = inner.model_id
        self.record_dir = Path(record_dir)
        self.record_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        digest = request_hash(self.model_id, prompt)
        path = self.record_dir / f"{digest}.json"
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)["response_text"]
        text = self.inner.complete(prompt)
        doc = {
            "request_hash": digest,
            "model": self.model_id,
            "prompt": prompt,
            "response_text": text,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=1)
            fh.write("\n")
        tmp.replace(path)
        with self._lock:
            with open(self.record_dir / "index.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"request_hash": digest}) + "\n")
        return text


class ReplayClient(ChatClient):
    """Strict playback: a missing recording is a configuration error, not a
    skippable failure."""

    def __init__(self, model_id: str, replay_dir: str | Path):
        self.model_id = model_id
        self.replay_dir = Path(replay_dir)

    def complete(self, prompt: str) -> str:
        digest = request_hash(self.model_id, prompt)
        path = self.replay_dir / f"{digest}.json"
        if not path.exists():
            raise ReplayMissingError(
                f"no recording {digest} for model {self.model_id} under {self.replay_dir}"
            )
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["response_text"]


def _ask(client: ChatClient, cfg: LlmConfig, term_label: str, term_list: list[str] | None):
    prompt = render_prompt(cfg.prompt_mode, term_label, term_list)
    text = client.complete(prompt)
    try:
        return parse_hypernyms(text)
    except MalformedResponse as exc:
        logger.warning("unparseable answer for %r skipped: %s", term_label, exc)
        return []


def build_llm_taxonomy(seed: SeedList, cfg: LlmConfig, client: ChatClient) -> TaxonomyGraph:
    """Ask for each seed term's hypernyms; iterative mode keeps asking for
    the newly returned parents until a fixpoint or the depth bound.

    In list-constrained (WT) mode the offered list is the current graph's
    labels; answers outside the list are kept but logged. Failed calls are
    skipped after the client's retry budget unless the config says
    otherwise; missing replay recordings always raise.
    """
    g = TaxonomyGraph()
    for entry in seed.entries:
        g.add_term(entry.label, qid=entry.qid, genericity_cluster=entry.cluster, origins={SEED})

    def term_list_now() -> list[str] | None:
        if cfg.prompt_mode != WT:
            return None
        return sorted(term.label for term in g.terms.values())

    def query_round(labels: list[str], term_list: list[str] | None) -> dict[str, list[str]]:
        answers: dict[str, list[str]] = {}

        def one(label: str) -> tuple[str, list[str] | None]:
            try:
                return label, _ask(client, cfg, label, term_list)
            except ReplayMissingError:
                raise
            except ClientError as exc:
                if not cfg.skip_failures:
                    raise
                logger.warning("giving up on %r: %s", label, exc)
                return label, None

        workers = 1 if cfg.iterative else max(1, cfg.parallelism)
        if workers == 1:
            results = [one(label) for label in labels]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, labels))
        for label, parents in results:
            if parents is not None:
                answers[label] = parents
        return answers

    offered = term_list_now()
    pending = [entry.label for entry in seed.entries]
    asked: set[str] = {canonicalize_label(label) for label in pending}
    depth = 0
    while pending:
        answers = query_round(pending, offered)
        new_labels: list[str] = []
        for label, parents in sorted(answers.items()):
            child_id = canonicalize_label(label)
            for parent_id in parents:
                if parent_id not in g:
                    g.add_term(parent_id, origins={LLM})
                    if offered is not None:
                        logger.info("answer outside offered list kept: %r", parent_id)
                g.add_edge(child_id, parent_id, LLM)
                if parent_id not in asked:
                    asked.add(parent_id)
                    new_labels.append(parent_id)
        depth += 1
        if not cfg.iterative or depth >= cfg.iterative_depth:
            break
        offered = term_list_now()
        pending = sorted(new_labels)
    return g


def complete_unlinked(
    g: TaxonomyGraph, seed: SeedList, cfg: LlmConfig, client: ChatClient
) -> TaxonomyGraph:
    """One list-constrained pass over the seed terms that still have no
    edges; never removes anything."""
    if cfg.prompt_mode != WT:
        raise InvalidArgument("completion requires the list-constrained (WT) prompt mode")
    out = g.copy()
    linked = {e.child for e in out.edges} | {e.parent for e in out.edges}
    term_list = sorted(term.label for term in out.terms.values())
    for entry in seed.entries:
        if entry.id in linked:
            continue
        if entry.id not in out:
            out.add_term(entry.label, qid=entry.qid, genericity_cluster=entry.cluster,
                         origins={SEED})
        try:
            parents = _ask(client, cfg, entry.label, term_list)
        except ReplayMissingError:
            raise
        except ClientError as exc:
            if not cfg.skip_failures:
                raise
            logger.warning("completion for %r skipped: %s", entry.label, exc)
            continue
        for parent_id in parents:
            if parent_id == entry.id:
                continue  # a term cannot complete to itself
            if parent_id not in out:
                out.add_term(parent_id, origins={LLM})
            out.add_edge(entry.id, parent_id, LLM)
    return out


def judge_pairs(
    pairs: list[tuple[str, str]], client: ChatClient, skip_failures: bool = True
) -> dict[tuple[str, str], int]:
    """Ask the model to rate each (child, parent) pair 0/1; an extra rater
    column for the agreement stats."""
    verdicts: dict[tuple[str, str], int] = {}
    for child, parent in pairs:
        try:
            text = client.complete(render_pair_prompt(child, parent)).strip()
        except ReplayMissingError:
            raise
        except ClientError as exc:
            if not skip_failures:
                raise
            logger.warning("judgment for (%s, %s) skipped: %s", child, parent, exc)
            continue
        if text in ("0", "1"):
            verdicts[(child, parent)] = int(text)
        else:
            logger.warning("unparseable judgment %r for (%s, %s) skipped", text, child, parent)
    return verdicts
