"""Word-similarity benchmark evaluation: cosine scoring and tie-aware Spearman rank correlation.

Works with SimLex-999 style TSV files (header, then word1/word2/POS/score
columns). Pairs with unembeddable words are excluded and reported, never
imputed; the correlation covers scored pairs only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import FormatError


@dataclass(frozen=True)
class SimilarityPair:
    word1: str
    word2: str
    gold: float  # human similarity judgment on the 0-10 scale


@dataclass(frozen=True)
class EvalReport:
    pairs_total: int
    pairs_covered: int
    spearman_rho: float | None  # None when undefined (fewer than 2 covered pairs, or constant scores)
    missing_words: tuple[str, ...]

    def rho_text(self) -> str:
        covered = f"({self.pairs_covered}/{self.pairs_total} covered)"
        if self.spearman_rho is None:
            return f"rho: undefined {covered}"
        return f"rho: {self.spearman_rho:.3f} {covered}"


def parse_simlex(source: IO[str]) -> list[SimilarityPair]:
    """Parse a SimLex-999 style TSV: header line, then columns word1, word2, POS, score.

    Columns 1, 2, and 4 are consumed; extra columns are ignored. Raises
    FormatError (with line numbers) on a missing header, short rows,
    non-numeric scores, scores outside [0, 10], or word1 == word2.
    """
    lines = iter(source)
    header = next(lines, None)
    if header is None:
        raise FormatError("empty stream: missing header line")
    first_col = header.rstrip("\n").rstrip("\r").split("\t")[0].strip().lower()
    if first_col != "word1":
        raise FormatError(f"missing header: expected first column 'word1', got {first_col!r}")
    pairs: list[SimilarityPair] = []
    for line_no, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n").rstrip("\r")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) < 4:
            raise FormatError(f"line {line_no}: expected at least 4 tab-separated columns, got {len(cols)}")
        word1, word2, score_text = cols[0], cols[1], cols[3]
        if not word1 or not word2:
            raise FormatError(f"line {line_no}: empty word token")
        if word1 == word2:
            raise FormatError(f"line {line_no}: identical words {word1!r}")
        try:
            gold = float(score_text)
        except ValueError:
            raise FormatError(f"line {line_no}: non-numeric score {score_text!r}") from None
        if not math.isfinite(gold) or not (0.0 <= gold <= 10.0):
            raise FormatError(f"line {line_no}: score {score_text!r} outside [0, 10]")
        pairs.append(SimilarityPair(word1, word2, gold))
    return pairs


def cosine(u, v) -> float:
    """Cosine similarity, clamped into [-1, 1]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch in cosine: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    return float(np.clip(float(np.dot(a, b)) / (na * nb), -1.0, 1.0))


def rank_average_ties(xs: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean rank of their span."""
    if not xs:
        raise ValueError("cannot rank an empty sequence")
    n = len(xs)
    order = sorted(range(n), key=xs.__getitem__)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        # positions i..j (0-based) hold equal values; mean of 1-based ranks i+1..j+1
        mean_rank = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rank correlation: Pearson correlation of tie-averaged ranks."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError(f"need at least 2 observations, got {len(xs)}")
    rx = rank_average_ties(xs)
    ry = rank_average_ties(ys)
    n = len(rx)
    mx = sum(rx) / n
    my = sum(ry) / n
    sxy = sxx = syy = 0.0
    for a, b in zip(rx, ry):
        da = a - mx
        db = b - my
        sxy += da * db
        sxx += da * da
        syy += db * db
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for a constant list")
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def evaluate(vectors: Mapping[str, np.ndarray], pairs: Sequence[SimilarityPair]) -> EvalReport:
    """Score every pair whose words are both embeddable; correlate against gold.

    Words that are absent, or whose vectors have zero norm (cosine undefined),
    are recorded in missing_words and their pairs skipped. Never raises: an
    undefined correlation is reported as rho None.
    """
    scores: list[float] = []
    golds: list[float] = []
    missing: set[str] = set()
    covered = 0
    for pair in pairs:
        usable = True
        for word in (pair.word1, pair.word2):
            vec = vectors.get(word)
            if vec is None or float(np.linalg.norm(np.asarray(vec, dtype=np.float64))) == 0.0:
                missing.add(word)
                usable = False
        if not usable:
            continue
        scores.append(cosine(vectors[pair.word1], vectors[pair.word2]))
        golds.append(pair.gold)
        covered += 1
    rho: float | None = None
    if covered >= 2:
        try:
            rho = spearman(scores, golds)
        except ValueError:
            rho = None  # constant score or gold list
    return EvalReport(
        pairs_total=len(pairs),
        pairs_covered=covered,
        spearman_rho=rho,
        missing_words=tuple(sorted(missing)),
    )
