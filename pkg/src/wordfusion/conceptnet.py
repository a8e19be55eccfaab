"""ConceptNet related-word extraction.

Two interchangeable sources produce the same NeighborSet shape: an offline
assertions dump (TSV) and the public HTTP API backed by a per-term disk cache.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import requests

from .errors import FetchError, FormatError

logger = logging.getLogger(__name__)

DEFAULT_API_ENDPOINT = "http://api.conceptnet.io"
DEFAULT_NEIGHBOR_CAP = 20  # related words held per term, on average


def normalize_term(raw: str) -> str:
    """Normalize a surface form to graph-term shape.

    Lowercases, strips surrounding whitespace, and joins internal whitespace
    runs with underscores ("New York" -> "new_york").
    """
    pieces = raw.split()
    if not pieces:
        raise ValueError(f"empty or whitespace-only term {raw!r}")
    return "_".join(pieces).lower()


@dataclass(frozen=True)
class ConceptEdge:
    """One assertion: start_term -> end_term under a relation, with a confidence weight."""

    relation: str
    start_term: str
    end_term: str
    weight: float

    def __post_init__(self):
        if not self.start_term or not self.end_term:
            raise ValueError("edge endpoints must be non-empty terms")
        if not self.relation:
            raise ValueError("edge relation must be non-empty")
        if not (self.weight >= 0.0):
            raise ValueError(f"edge weight must be >= 0, got {self.weight}")


class Neighbor(NamedTuple):
    term: str
    relation: str
    weight: float


@dataclass(frozen=True)
class NeighborSet:
    """A word's related terms, deduplicated, weight-descending, capped."""

    word: str
    neighbors: tuple[Neighbor, ...]

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(n.term for n in self.neighbors)

    def __len__(self) -> int:
        return len(self.neighbors)


class DumpParseError(NamedTuple):
    line_no: int
    reason: str


def _concept_uri_parts(uri: str) -> tuple[str, str] | None:
    # "/c/en/dog/n/wn" -> ("en", "dog"); None when not a concept URI
    parts = uri.split("/")
    if len(parts) < 4 or parts[0] != "" or parts[1] != "c" or not parts[2] or not parts[3]:
        return None
    return parts[2], parts[3]


def _relation_label(uri: str) -> str | None:
    # "/r/RelatedTo" -> "RelatedTo"; keeps subpaths ("/r/dbpedia/genre" -> "dbpedia/genre")
    parts = uri.split("/")
    if len(parts) < 3 or parts[0] != "" or parts[1] != "r" or not parts[2]:
        return None
    return "/".join(parts[2:])


def parse_dump(
    lines: Iterable[str],
    language: str = "en",
    errors: list[DumpParseError] | None = None,
) -> Iterable[ConceptEdge]:
    """Stream ConceptEdges out of an assertions dump.

    Each line carries 5 tab-separated fields: edge URI, relation URI, start
    URI, end URI, and JSON metadata with a numeric "weight". Only edges whose
    BOTH endpoints are in ``language`` are yielded. Malformed lines never
    abort the stream; they are appended to ``errors`` when a list is given.
    """

    def record(line_no: int, reason: str) -> None:
        if errors is not None:
            errors.append(DumpParseError(line_no, reason))

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line:
            continue
        fields = line.split("\t", 4)
        if len(fields) != 5:
            record(line_no, f"expected 5 tab-separated fields, got {len(fields)}")
            continue
        _, rel_uri, start_uri, end_uri, meta_json = fields
        relation = _relation_label(rel_uri)
        if relation is None:
            record(line_no, f"bad relation URI {rel_uri!r}")
            continue
        start = _concept_uri_parts(start_uri)
        end = _concept_uri_parts(end_uri)
        if start is None or end is None:
            record(line_no, f"bad concept URI in {start_uri!r} / {end_uri!r}")
            continue
        if start[0] != language or end[0] != language:
            continue
        try:
            meta = json.loads(meta_json)
            weight = meta["weight"]
        except (json.JSONDecodeError, TypeError, KeyError):
            record(line_no, "malformed JSON metadata or missing weight")
            continue
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or not math.isfinite(weight) or weight < 0:
            record(line_no, f"invalid weight {weight!r}")
            continue
        try:
            yield ConceptEdge(relation, normalize_term(start[1]), normalize_term(end[1]), float(weight))
        except ValueError as exc:
            record(line_no, str(exc))


def build_term_index(edges: Iterable[ConceptEdge]) -> dict[str, list[ConceptEdge]]:
    """Group edges by endpoint term so per-word neighbor queries avoid full scans."""
    index: dict[str, list[ConceptEdge]] = {}
    for edge in edges:
        index.setdefault(edge.start_term, []).append(edge)
        if edge.end_term != edge.start_term:
            index.setdefault(edge.end_term, []).append(edge)
    return index


def neighbors(
    word: str,
    edges: Iterable[ConceptEdge],
    cap: int = DEFAULT_NEIGHBOR_CAP,
    relation_filter: set[str] | None = None,
) -> NeighborSet:
    """Collect the word's related terms from an edge source.

    Both edge directions count. Duplicated terms keep their maximum weight
    (ties keep the lexicographically smallest relation label, so the result
    is independent of edge order). Sorted by descending weight, ties by term,
    truncated to ``cap``. The word itself never appears. Unknown words yield
    an empty set.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    best: dict[str, tuple[float, str]] = {}
    for edge in edges:
        if relation_filter is not None and edge.relation not in relation_filter:
            continue
        if edge.start_term == word:
            other = edge.end_term
        elif edge.end_term == word:
            other = edge.start_term
        else:
            continue
        if other == word:
            continue
        cur = best.get(other)
        if cur is None or edge.weight > cur[0] or (edge.weight == cur[0] and edge.relation < cur[1]):
            best[other] = (edge.weight, edge.relation)
    ordered = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))[:cap]
    return NeighborSet(word=word, neighbors=tuple(Neighbor(t, rel, w) for t, (w, rel) in ordered))


# Public-endpoint politeness: one request per second across all threads.
_rate_lock = threading.Lock()
_last_request_at = 0.0


def _throttle(min_interval: float) -> None:
    global _last_request_at
    if min_interval <= 0:
        return
    with _rate_lock:
        wait = _last_request_at + min_interval - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        _last_request_at = time.monotonic()


def _atomic_write_text(path: Path, text: str) -> None:
    # write-temp-then-rename so concurrent readers never see a partial file
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _edges_from_api_payload(payload: dict) -> list[ConceptEdge]:
    edges = []
    for raw in payload.get("edges", []):
        try:
            start = raw["start"]
            end = raw["end"]
            relation = raw["rel"]["label"]
            weight = raw["weight"]
        except (KeyError, TypeError):
            continue
        if start.get("language") != "en" or end.get("language") != "en":
            continue
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or not math.isfinite(weight) or weight < 0:
            continue
        try:
            edges.append(
                ConceptEdge(str(relation), normalize_term(str(start["label"])), normalize_term(str(end["label"])), float(weight))
            )
        except (KeyError, ValueError):
            continue
    return edges


def fetch_neighbors_http(
    word: str,
    cache_dir: str | os.PathLike,
    endpoint: str = DEFAULT_API_ENDPOINT,
    cap: int = DEFAULT_NEIGHBOR_CAP,
    relation_filter: set[str] | None = None,
    timeout: float = 10.0,
    min_interval: float = 1.0,
) -> NeighborSet:
    """Neighbor set for ``word`` from the HTTP API, cached on disk.

    The response body is cached verbatim at ``<cache_dir>/<word>.json``; a
    cache hit never touches the network, which makes warm-cache runs
    deterministic and offline-reproducible. Live requests are throttled to
    one per ``min_interval`` seconds process-wide. Note the cache is keyed by
    term only: the body fetched for the first cap is reused for later calls.
    """
    term = normalize_term(word)
    cache_dir = Path(cache_dir)
    cache_path = cache_dir / f"{term}.json"
    if cache_path.exists():
        body = cache_path.read_text(encoding="utf-8")
    else:
        url = f"{endpoint.rstrip('/')}/c/en/{term}?limit={cap}"
        _throttle(min_interval)
        try:
            response = requests.get(url, timeout=timeout)
        except requests.RequestException as exc:
            raise FetchError(f"fetch failed for {term!r} with empty cache ({cache_path}): {exc}") from exc
        if response.status_code != 200:
            raise FetchError(f"fetch failed for {term!r}: HTTP {response.status_code} from {url}")
        body = response.text
        cache_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write_text(cache_path, body)
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON for {term!r} (cache: {cache_path}): {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError(f"unexpected JSON payload for {term!r}: expected an object")
    return neighbors(term, _edges_from_api_payload(payload), cap=cap, relation_filter=relation_filter)
