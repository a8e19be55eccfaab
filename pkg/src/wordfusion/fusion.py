"""Fuse a word's own vector with the summed vectors of its graph neighbors.

The fused vector is the element-wise product of the neighbor sum with the
word's own vector, then L2-normalized. Multiplying by the own vector is what
keeps the result anchored to the word's context-derived meaning instead of
drifting toward the neighborhood average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conceptnet import NeighborSet
from .embedding_store import EmbeddingTable

COPY_OWN_VECTOR = "copy-own-vector"
EXCLUDE_WORD = "exclude-word"
SKIP_SILENTLY = "skip-silently"
REPORT = "report"


@dataclass(frozen=True)
class CombineConfig:
    neighbor_cap: int = 20
    missing_neighbor_policy: str = REPORT  # or "skip-silently"
    fallback_when_no_neighbors: str = COPY_OWN_VECTOR  # or "exclude-word"

    def __post_init__(self):
        if self.neighbor_cap < 1:
            raise ValueError(f"neighbor_cap must be >= 1, got {self.neighbor_cap}")
        if self.missing_neighbor_policy not in (SKIP_SILENTLY, REPORT):
            raise ValueError(f"unknown missing_neighbor_policy {self.missing_neighbor_policy!r}")
        if self.fallback_when_no_neighbors not in (COPY_OWN_VECTOR, EXCLUDE_WORD):
            raise ValueError(f"unknown fallback_when_no_neighbors {self.fallback_when_no_neighbors!r}")


@dataclass(frozen=True)
class FusedVector:
    """Unit-norm fused vector plus the neighbor terms that actually contributed."""

    word: str
    vector: np.ndarray
    used_neighbors: tuple[str, ...]
    missing_neighbors: tuple[str, ...] = ()


def neighbor_vectors(ns: NeighborSet, table: EmbeddingTable) -> tuple[list[np.ndarray], list[str]]:
    """Look up each neighbor term; returns (vectors in NeighborSet order, missing terms)."""
    found: list[np.ndarray] = []
    missing: list[str] = []
    for neighbor in ns.neighbors:
        vec = table.lookup(neighbor.term)
        if vec is None:
            missing.append(neighbor.term)
        else:
            found.append(vec)
    return found, missing


def aggregate(vectors: list[np.ndarray]) -> np.ndarray:
    """Element-wise sum of equal-dimension vectors."""
    if not vectors:
        raise ValueError("cannot aggregate an empty vector list")
    dim = len(vectors[0])
    for v in vectors[1:]:
        if len(v) != dim:
            raise ValueError(f"dimension mismatch in aggregate: {dim} vs {len(v)}")
    return np.stack([np.asarray(v, dtype=np.float64) for v in vectors]).sum(axis=0)


def fuse(own, neighbor_sum) -> np.ndarray:
    """Element-wise product of the word's own vector with the neighbor sum."""
    a = np.asarray(own, dtype=np.float64)
    b = np.asarray(neighbor_sum, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch in fuse: {a.shape} vs {b.shape}")
    return a * b


def scale(v, word: str | None = None) -> np.ndarray:
    """Divide by the Euclidean norm so the output has unit length."""
    arr = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        subject = f" for word {word!r}" if word else ""
        raise ValueError(f"cannot scale a zero vector{subject} (degenerate fusion)")
    return arr / norm


def combine_word(
    word: str,
    table: EmbeddingTable,
    ns: NeighborSet,
    cfg: CombineConfig = CombineConfig(),
) -> FusedVector | None:
    """Run lookup -> neighbor vectors -> sum -> element-wise product -> scale.

    With no usable neighbors the fallback policy applies: copy-own-vector
    normalizes the word's own vector; exclude-word returns None so the caller
    drops the word. Neighbor vectors are summed in lexicographic term order,
    which makes the output invariant under permutations of the NeighborSet.
    """
    own = table.lookup(word)
    if own is None:
        raise ValueError(f"word {word!r} absent from embedding table")
    capped = ns.neighbors[: cfg.neighbor_cap]
    found: list[tuple[str, np.ndarray]] = []
    missing: list[str] = []
    for neighbor in capped:
        vec = table.lookup(neighbor.term)
        if vec is None:
            missing.append(neighbor.term)
        else:
            found.append((neighbor.term, vec))
    reported = tuple(missing) if cfg.missing_neighbor_policy == REPORT else ()
    if not found:
        if cfg.fallback_when_no_neighbors == EXCLUDE_WORD:
            return None
        return FusedVector(word, scale(own, word), (), reported)
    total = aggregate([vec for _, vec in sorted(found, key=lambda kv: kv[0])])
    fused = scale(fuse(own, total), word)
    return FusedVector(word, fused, tuple(term for term, _ in found), reported)
