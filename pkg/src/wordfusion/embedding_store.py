"""Load, hold, and query pretrained word-vector tables in word2vec text format.

The text format is: a header line ``<count> <dim>``, then one line per word,
``<word> <f1> ... <f_dim>``, single-space separated, UTF-8, LF line endings.
"""

from __future__ import annotations

import logging
import math
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import FormatError

logger = logging.getLogger(__name__)


def format_float(x: float) -> str:
    """Shortest string that parses back to exactly ``x``.

    ``repr`` already gives the shortest roundtrip form; integral values
    additionally drop the trailing ``.0`` (so 1.0 prints as ``1``).
    """
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _valid_token(word: str) -> bool:
    return bool(word) and not any(ch.isspace() for ch in word)


class EmbeddingTable:
    """Immutable word -> vector map with one shared dimension.

    Vectors are float64, finite, and exposed as read-only arrays. Safe for
    unlimited concurrent readers once constructed.
    """

    def __init__(self, dim: int, entries: Mapping[str, Iterable[float]], duplicate_count: int = 0):
        if dim < 1:
            raise FormatError(f"dimension must be >= 1, got {dim}")
        store: dict[str, np.ndarray] = {}
        norms: dict[str, float] = {}
        for word, values in entries.items():
            if not _valid_token(word):
                raise FormatError(f"invalid word token {word!r}: must be non-empty with no whitespace")
            vec = np.asarray(values, dtype=np.float64)
            if vec.ndim != 1 or vec.shape[0] != dim:
                raise FormatError(f"word {word!r}: expected {dim} values, got shape {vec.shape}")
            if not np.all(np.isfinite(vec)):
                raise FormatError(f"word {word!r}: vector contains non-finite values")
            vec = vec.copy()
            vec.flags.writeable = False
            store[word] = vec
            norms[word] = float(np.linalg.norm(vec))
        self._dim = dim
        self._entries = store
        self._norms = norms
        self._duplicate_count = duplicate_count

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def words(self):
        return self._entries.keys()

    @property
    def duplicate_count(self) -> int:
        """Number of duplicated rows encountered at load time (last one won)."""
        return self._duplicate_count

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        if self._dim != other._dim or self._entries.keys() != other._entries.keys():
            return False
        return all(
            self._entries[w].tobytes() == other._entries[w].tobytes() for w in self._entries
        )

    def lookup(self, word: str) -> np.ndarray | None:
        """Return the stored vector, or None when the word is absent.

        Matching is exact and case-sensitive; no vector is ever fabricated.
        """
        return self._entries.get(word)

    def cosine_neighbors(self, query, k: int) -> list[tuple[str, float]]:
        """Top-k stored words by cosine similarity to ``query``, descending.

        Ties break by lexicographic word order. Stored zero-norm vectors are
        skipped (their cosine is undefined). Fewer than k words may be
        returned when the table is small.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self._dim:
            raise ValueError(f"query dimension mismatch: expected {self._dim}, got shape {q.shape}")
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            raise ValueError("zero-norm query has no cosine neighbors")
        scored = []
        for word, vec in self._entries.items():
            n = self._norms[word]
            if n == 0.0:
                continue
            scored.append((-float(np.dot(q, vec)) / (qn * n), word))
        scored.sort()
        return [(word, -neg) for neg, word in scored[:k]]


def load_text(source: IO[str]) -> EmbeddingTable:
    """Parse a word2vec-format text stream into an EmbeddingTable.

    Duplicate words: last occurrence wins; the count of overwritten rows is
    available as ``table.duplicate_count``. Raises FormatError (with a line
    number where applicable) on malformed headers, arity mismatches,
    non-numeric or non-finite fields, and row-count mismatches.
    """
    lines = iter(source)
    header = next(lines, None)
    if header is None:
        raise FormatError("empty stream: missing '<count> <dim>' header")
    fields = header.rstrip("\n").rstrip("\r").split(" ")
    if len(fields) != 2:
        raise FormatError(f"malformed header {header.rstrip()!r}: expected '<count> <dim>'")
    try:
        count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        raise FormatError(f"malformed header {header.rstrip()!r}: non-integer fields") from None
    if count < 0:
        raise FormatError(f"malformed header: negative word count {count}")
    if dim < 1:
        raise FormatError(f"dimension must be >= 1, got {dim}")

    entries: dict[str, list[float]] = {}
    duplicates = 0
    rows = 0
    seen_blank = False
    for line_no, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n").rstrip("\r")
        if line == "":
            seen_blank = True
            continue
        if seen_blank:
            raise FormatError(f"line {line_no}: data after blank line")
        parts = line.split(" ")
        if len(parts) != dim + 1:
            raise FormatError(f"line {line_no}: expected {dim + 1} space-separated fields, got {len(parts)}")
        word = parts[0]
        if not _valid_token(word):
            raise FormatError(f"line {line_no}: invalid word token {word!r}")
        values = []
        for tok in parts[1:]:
            try:
                x = float(tok)
            except ValueError:
                raise FormatError(f"line {line_no}: non-numeric field {tok!r}") from None
            if not math.isfinite(x):
                raise FormatError(f"line {line_no}: non-finite field {tok!r}")
            values.append(x)
        if word in entries:
            duplicates += 1
        entries[word] = values
        rows += 1
    if rows != count:
        raise FormatError(f"header declared {count} rows but stream has {rows}")
    if duplicates:
        logger.warning("embedding load: %d duplicate rows (last occurrence kept)", duplicates)
    return EmbeddingTable(dim, entries, duplicate_count=duplicates)


def save_text(table: EmbeddingTable, sink: IO[str]) -> None:
    """Write the table in word2vec text format.

    Words are written in lexicographic order and floats in shortest-roundtrip
    form, so saving is deterministic and ``load_text`` recovers an equal table.
    """
    sink.write(f"{len(table)} {table.dim}\n")
    for word in sorted(table.words):
        vec = table.lookup(word)
        sink.write(word)
        for x in vec:
            sink.write(" ")
            sink.write(format_float(float(x)))
        sink.write("\n")
