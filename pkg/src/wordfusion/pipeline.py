"""End-to-end build: load vectors, gather graph neighbors, fuse, refine, project, write.

Every stage is deterministic for identical inputs, so two builds of the same
config produce byte-identical output files and equal manifest digests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import conceptnet, fusion, pca, som
from .conceptnet import NeighborSet
from .embedding_store import EmbeddingTable, load_text, save_text
from .errors import BuildStageError, ConfigError, WordFusionError

logger = logging.getLogger(__name__)

ALL_EMBEDDABLE = "all-embeddable-conceptnet-terms"

_CONFIG_KEYS = {
    "embeddings",
    "output",
    "conceptnet_dump",
    "conceptnet_api",
    "cache_dir",
    "vocabulary",
    "neighbor_cap",
    "relation_filter",
    "missing_neighbor_policy",
    "fallback_when_no_neighbors",
    "som_iterations",
    "som_learning_rate",
    "som_k_neighbors",
    "grid_rows",
    "pca_dim",
    "workers",
}


@dataclass
class PipelineConfig:
    """Everything cmd_build needs; mirrors the JSON config file keys one to one."""

    embeddings: str = ""
    output: str = ""
    conceptnet_dump: str | None = None
    conceptnet_api: str | None = None
    cache_dir: str | None = None
    vocabulary: str = ALL_EMBEDDABLE  # the sentinel above, or a word-list file path
    neighbor_cap: int = 20
    relation_filter: tuple[str, ...] | None = None
    missing_neighbor_policy: str = fusion.REPORT
    fallback_when_no_neighbors: str = fusion.COPY_OWN_VECTOR
    som_iterations: int = 500
    som_learning_rate: float = 0.005
    som_k_neighbors: int = 4
    grid_rows: int | None = None
    pca_dim: int | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "PipelineConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**{k: (tuple(v) if k == "relation_filter" and v is not None else v) for k, v in raw.items()})
        if base_dir is not None:
            cfg._resolve_paths(base_dir)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        """Load a JSON config; relative paths resolve against the config file's directory."""
        p = Path(path)
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path}: expected a JSON object")
        return cls.from_dict(raw, base_dir=p.resolve().parent)

    def _resolve_paths(self, base_dir: Path) -> None:
        for name in ("embeddings", "output", "conceptnet_dump", "cache_dir"):
            value = getattr(self, name)
            if value:
                setattr(self, name, str((base_dir / value)) if not Path(value).is_absolute() else value)
        if self.vocabulary and self.vocabulary != ALL_EMBEDDABLE and not Path(self.vocabulary).is_absolute():
            self.vocabulary = str(base_dir / self.vocabulary)

    def validate(self) -> None:
        problems: list[str] = []
        if not self.embeddings:
            problems.append("embeddings path is required")
        elif not Path(self.embeddings).is_file():
            problems.append(f"embeddings path not found: {self.embeddings}")
        if not self.output:
            problems.append("output path is required")
        if bool(self.conceptnet_dump) == bool(self.conceptnet_api):
            problems.append("exactly one of conceptnet_dump / conceptnet_api must be set")
        if self.conceptnet_dump and not Path(self.conceptnet_dump).is_file():
            problems.append(f"conceptnet dump not found: {self.conceptnet_dump}")
        if self.conceptnet_api and not self.cache_dir:
            problems.append("cache_dir is required with conceptnet_api")
        if self.vocabulary != ALL_EMBEDDABLE and not Path(self.vocabulary).is_file():
            problems.append(f"vocabulary word list not found: {self.vocabulary}")
        if self.vocabulary == ALL_EMBEDDABLE and self.conceptnet_api:
            problems.append(f"vocabulary {ALL_EMBEDDABLE!r} needs a dump source (the API cannot be enumerated)")
        if self.neighbor_cap < 1:
            problems.append(f"neighbor_cap must be >= 1, got {self.neighbor_cap}")
        if self.som_iterations < 0:
            problems.append(f"som_iterations must be >= 0, got {self.som_iterations}")
        if not (0.0 <= self.som_learning_rate < 1.0):
            problems.append(f"som_learning_rate must be in [0, 1), got {self.som_learning_rate}")
        if self.som_k_neighbors < 1:
            problems.append(f"som_k_neighbors must be >= 1, got {self.som_k_neighbors}")
        if self.grid_rows is not None and self.grid_rows < 1:
            problems.append(f"grid_rows must be >= 1, got {self.grid_rows}")
        if self.pca_dim is not None and self.pca_dim < 1:
            problems.append(f"pca_dim must be >= 1, got {self.pca_dim}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        if self.missing_neighbor_policy not in (fusion.SKIP_SILENTLY, fusion.REPORT):
            problems.append(f"unknown missing_neighbor_policy {self.missing_neighbor_policy!r}")
        if self.fallback_when_no_neighbors not in (fusion.COPY_OWN_VECTOR, fusion.EXCLUDE_WORD):
            problems.append(f"unknown fallback_when_no_neighbors {self.fallback_when_no_neighbors!r}")
        if problems:
            raise ConfigError("invalid config: " + "; ".join(problems))

    def som_config(self) -> som.SomConfig:
        return som.SomConfig(
            iterations=self.som_iterations,
            learning_rate=self.som_learning_rate,
            k_neighbors=self.som_k_neighbors,
            grid_rows=self.grid_rows,
        )

    def combine_config(self) -> fusion.CombineConfig:
        return fusion.CombineConfig(
            neighbor_cap=self.neighbor_cap,
            missing_neighbor_policy=self.missing_neighbor_policy,
            fallback_when_no_neighbors=self.fallback_when_no_neighbors,
        )

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["relation_filter"] is not None:
            out["relation_filter"] = list(out["relation_filter"])
        return out


@dataclass
class RunManifest:
    config: dict
    counts: dict
    timings_s: dict = field(default_factory=dict)
    output_digest: str = ""

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"


def _neighbor_source(config: PipelineConfig) -> tuple[Callable[[str], NeighborSet], set[str] | None]:
    """Returns (per-word neighbor lookup, set of known graph terms or None for API mode)."""
    relation_filter = set(config.relation_filter) if config.relation_filter else None
    if config.conceptnet_dump:
        errors: list[conceptnet.DumpParseError] = []
        with open(config.conceptnet_dump, encoding="utf-8") as handle:
            index = conceptnet.build_term_index(conceptnet.parse_dump(handle, errors=errors))
        if errors:
            logger.warning("conceptnet dump: %d unparseable lines skipped", len(errors))

        def lookup(word: str) -> NeighborSet:
            term = conceptnet.normalize_term(word)
            return conceptnet.neighbors(term, index.get(term, ()), cap=config.neighbor_cap, relation_filter=relation_filter)

        return lookup, set(index)

    def fetch(word: str) -> NeighborSet:
        return conceptnet.fetch_neighbors_http(
            word,
            cache_dir=config.cache_dir,
            endpoint=config.conceptnet_api,
            cap=config.neighbor_cap,
            relation_filter=relation_filter,
        )

    return fetch, None


def read_word_list(path: str) -> list[str]:
    """One word per line; blank lines and '#' comments skipped; order kept, duplicates dropped."""
    words: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            word = line.strip()
            if not word or word.startswith("#"):
                continue
            if word not in seen:
                seen.add(word)
                words.append(word)
    return words


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return f"sha256:{digest.hexdigest()}"


def run_build(config: PipelineConfig) -> RunManifest:
    """Run the full fusion pipeline and write the output table plus a JSON manifest.

    Stages: load embeddings -> resolve vocabulary -> combine each word with
    its graph neighbors -> Kohonen refinement -> PCA projection -> write in
    word2vec text format. Any stage failure is re-raised as BuildStageError
    naming the stage.
    """
    config.validate()
    timings: dict[str, float] = {}

    def staged(stage: str, fn: Callable):
        start = time.perf_counter()
        try:
            result = fn()
        except (WordFusionError, ValueError, OSError) as exc:
            raise BuildStageError(stage, exc) from exc
        timings[stage] = time.perf_counter() - start
        return result

    def _load() -> EmbeddingTable:
        with open(config.embeddings, encoding="utf-8") as handle:
            return load_text(handle)

    table = staged("load-embeddings", _load)
    neighbor_lookup, graph_terms = staged("load-conceptnet", lambda: _neighbor_source(config))

    def _vocabulary() -> list[str]:
        if config.vocabulary == ALL_EMBEDDABLE:
            words = sorted(w for w in table.words if conceptnet.normalize_term(w) in graph_terms)
        else:
            words = read_word_list(config.vocabulary)
        if not words:
            raise ValueError("vocabulary is empty")
        return words

    words = staged("vocabulary", _vocabulary)

    combine_cfg = config.combine_config()

    def _combine() -> tuple[dict, int, list[str], list[str]]:
        fused: dict = {}
        misses = 0
        oov: list[str] = []
        excluded: list[str] = []
        for word in words:
            if word not in table:
                oov.append(word)
                continue
            result = fusion.combine_word(word, table, neighbor_lookup(word), combine_cfg)
            if result is None:
                excluded.append(word)
                continue
            fused[word] = result.vector
            misses += len(result.missing_neighbors)
        if oov:
            logger.warning("%d vocabulary words have no pretrained vector: %s", len(oov), ", ".join(oov))
        if not fused:
            raise ValueError("no words survived the combine stage")
        return fused, misses, oov, excluded

    fused, neighbor_misses, oov_words, excluded = staged("combine", _combine)

    refined = staged("som-refine", lambda: som.refine_vocabulary(fused, config.som_config(), workers=config.workers))

    d_out = config.pca_dim if config.pca_dim is not None else table.dim
    projected = staged("pca-project", lambda: pca.project_embeddings(refined, d_out))

    output_path = Path(config.output)

    def _write() -> str:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        out_table = EmbeddingTable(d_out, projected)
        with open(output_path, "w", encoding="utf-8", newline="\n") as handle:
            save_text(out_table, handle)
        return _sha256_file(output_path)

    digest = staged("write-output", _write)

    manifest = RunManifest(
        config=config.to_dict(),
        counts={
            "vocab_size": len(words),
            "fused_words": len(fused),
            "excluded_words": len(excluded),
            "neighbor_misses": neighbor_misses,
            "oov_words": len(oov_words),
        },
        timings_s={k: round(v, 6) for k, v in timings.items()},
        output_digest=digest,
    )
    manifest_path = output_path.with_name(output_path.name + ".manifest.json")
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    return manifest
