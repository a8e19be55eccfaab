"""Kohonen-style refinement of fused vectors.

Each word's vector is reshaped to a 2-D grid and repeatedly pulled toward the
grids of its nearest vocabulary neighbors: for every iteration, for every
neighbor in ascending-distance order, ``center += a * (neighbor - center)``
cell-wise. Neighbors are chosen by Euclidean distance over the vectors as
they were BEFORE refinement started (a snapshot), so word processing order
never matters.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class SomConfig:
    iterations: int = 500
    learning_rate: float = 0.005
    k_neighbors: int = 4
    grid_rows: int | None = None  # None: largest divisor of dim <= sqrt(dim)

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not (0.0 <= self.learning_rate < 1.0):
            raise ValueError(f"learning_rate must be in [0, 1), got {self.learning_rate}")
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if self.grid_rows is not None and self.grid_rows < 1:
            raise ValueError(f"grid_rows must be >= 1, got {self.grid_rows}")


def default_grid_rows(dim: int) -> int:
    """Largest divisor of ``dim`` not exceeding its square root (15 for 300)."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    for rows in range(math.isqrt(dim), 0, -1):
        if dim % rows == 0:
            return rows
    return 1


def reshape(vector, rows: int) -> np.ndarray:
    """Row-major reshape of a vector into a rows x (dim/rows) grid."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if rows < 1 or v.size % rows != 0:
        raise ValueError(f"rows={rows} does not divide dimension {v.size}")
    return v.reshape(rows, v.size // rows)


def flatten(grid) -> np.ndarray:
    """Exact row-major inverse of :func:`reshape`."""
    return np.asarray(grid, dtype=np.float64).reshape(-1)


def nearest_vocab(word: str, all_vectors: Mapping[str, np.ndarray], k: int) -> list[str]:
    """The k other words closest to ``word`` in Euclidean distance, ascending.

    Ties break lexicographically. Raises when the vocabulary has fewer than
    k+1 words.
    """
    if word not in all_vectors:
        raise ValueError(f"word {word!r} not in vocabulary")
    if len(all_vectors) < k + 1:
        raise ValueError(f"vocabulary too small: need at least {k + 1} words for k={k}, have {len(all_vectors)}")
    center = np.asarray(all_vectors[word], dtype=np.float64)
    scored = []
    for term, vec in all_vectors.items():
        if term == word:
            continue
        scored.append((float(np.linalg.norm(np.asarray(vec, dtype=np.float64) - center)), term))
    scored.sort()
    return [term for _, term in scored[:k]]


def refine_word(center, neighbor_grids: list[np.ndarray], cfg: SomConfig) -> np.ndarray:
    """Pull ``center`` toward each neighbor grid, cell-wise, for cfg.iterations passes.

    With a zero learning rate, zero iterations, or no neighbors the center is
    returned unchanged (bit-exact copy).
    """
    out = np.array(center, dtype=np.float64, copy=True)
    grids = [np.asarray(g, dtype=np.float64) for g in neighbor_grids]
    for g in grids:
        if g.shape != out.shape:
            raise ValueError(f"grid shape mismatch: {out.shape} vs {g.shape}")
    a = cfg.learning_rate
    if a == 0.0 or not grids or cfg.iterations == 0:
        return out
    for _ in range(cfg.iterations):
        for g in grids:
            out = out + a * (g - out)
    return out


def refine_vocabulary(
    all_vectors: Mapping[str, np.ndarray],
    cfg: SomConfig = SomConfig(),
    workers: int = 1,
) -> dict[str, np.ndarray]:
    """Refine every word against its k nearest neighbors from the pre-refinement snapshot.

    Words are independent given the snapshot, so ``workers > 1`` fans out to a
    thread pool with bit-identical results to the sequential run.
    """
    if len(all_vectors) < cfg.k_neighbors + 1:
        raise ValueError(
            f"vocabulary too small: need at least {cfg.k_neighbors + 1} words "
            f"for k={cfg.k_neighbors}, have {len(all_vectors)}"
        )
    snapshot = {w: np.asarray(v, dtype=np.float64) for w, v in all_vectors.items()}
    dims = {v.shape for v in snapshot.values()}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise ValueError(f"vocabulary vectors must share one 1-D shape, got {sorted(dims)}")
    dim = next(iter(dims))[0]
    rows = cfg.grid_rows if cfg.grid_rows is not None else default_grid_rows(dim)
    if dim % rows != 0:
        raise ValueError(f"grid_rows={rows} does not divide dimension {dim}")

    def _refine_one(word: str) -> tuple[str, np.ndarray]:
        neighbor_terms = nearest_vocab(word, snapshot, cfg.k_neighbors)
        center = reshape(snapshot[word], rows)
        grids = [reshape(snapshot[t], rows) for t in neighbor_terms]
        return word, flatten(refine_word(center, grids, cfg))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_refine_one, snapshot))
    else:
        results = dict(_refine_one(w) for w in snapshot)
    return {w: results[w] for w in all_vectors}
