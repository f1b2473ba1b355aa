"""Semantic distance between story prompts and ideas.

Documents are embedded by summing pretrained word vectors; distance is
1 - cosine similarity, so farther means conceptually less related.
Sentence-level variants compute the distance over all cross-document
sentence pairs and aggregate by mean, min, or median.  Precomputed
document vectors (from external encoders) enter through a sidecar file
keyed by text id.

Stores are immutable after load; every function here is pure, so the
module is safe under unrestricted concurrency.
"""

from __future__ import annotations

import math
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyFile,
    NoKnownTokens,
    NoVectorizableSentence,
    ParseError,
    ZeroVector,
)
from .workspace import tokenize


class VectorSource(str, Enum):
    WORD_SUM = "WORD_SUM"
    SIDECAR = "SIDECAR"


class Aggregation(str, Enum):
    MEAN = "MEAN"
    MIN = "MIN"
    MEDIAN = "MEDIAN"


@dataclass
class EmbeddingStore:
    dimension: int
    table: dict[str, np.ndarray]
    case_folding: bool = True

    def lookup(self, token: str) -> np.ndarray | None:
        if self.case_folding:
            token = token.lower()
        return self.table.get(token)


@dataclass
class DocVector:
    values: np.ndarray
    source: VectorSource
    token_hits: int


@dataclass
class SidecarVectors:
    dimension: int
    table: dict[str, np.ndarray] = field(default_factory=dict)


def load_embeddings(path: str, case_folding: bool = True) -> EmbeddingStore:
    """Parse a word-vector file: one token plus D space-separated floats
    per line, every line the same D."""
    table: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) < 2:
                raise ParseError(f"line {lineno}: no vector values", line=lineno)
            token = parts[0]
            try:
                vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed float", line=lineno)
            if dimension is None:
                dimension = len(vec)
            elif len(vec) != dimension:
                raise DimensionMismatch(
                    f"line {lineno}: expected {dimension} values, got {len(vec)}",
                    line=lineno)
            if case_folding:
                token = token.lower()
            table[token] = vec
    if dimension is None:
        raise EmptyFile(f"{path} holds no vectors")
    return EmbeddingStore(dimension=dimension, table=table, case_folding=case_folding)


def load_sidecar(path: str) -> SidecarVectors:
    """Parse precomputed document vectors: ``text-id<TAB>f1,f2,...`` per line."""
    table: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ParseError(f"line {lineno}: missing tab separator", line=lineno)
            text_id, _, vals = line.partition("\t")
            try:
                vec = np.array([float(p) for p in vals.split(",")], dtype=np.float64)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed float", line=lineno)
            if dimension is None:
                dimension = len(vec)
            elif len(vec) != dimension:
                raise DimensionMismatch(
                    f"line {lineno}: expected {dimension} values, got {len(vec)}",
                    line=lineno)
            table[text_id] = vec
    if dimension is None:
        raise EmptyFile(f"{path} holds no vectors")
    return SidecarVectors(dimension=dimension, table=table)


def embed_sum(text: str, store: EmbeddingStore) -> DocVector:
    """Sum the vectors of in-vocabulary tokens; out-of-vocabulary tokens
    are skipped.  All-miss is an error rather than a zero vector."""
    total = np.zeros(store.dimension, dtype=np.float64)
    hits = 0
    for token in tokenize(text):
        vec = store.lookup(token)
        if vec is not None:
            total += vec
            hits += 1
    if hits == 0:
        raise NoKnownTokens(f"no token of {text!r} is in the embedding store")
    return DocVector(values=total, source=VectorSource.WORD_SUM, token_hits=hits)


def cosine_distance(u: Sequence[float] | np.ndarray,
                    v: Sequence[float] | np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"{u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine distance undefined for a zero vector")
    return 1.0 - float(np.dot(u, v)) / (nu * nv)


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])(?:\s+|$)")


def split_sentences(text: str) -> list[str]:
    """Split at '.', '!' or '?' followed by whitespace or end of text,
    keeping the terminator.  Deliberately simple: abbreviations like
    "Mr." start a new segment."""
    return [seg.strip() for seg in _SENTENCE_SPLIT.split(text) if seg.strip()]


Vectorizer = Callable[[str], np.ndarray]


def word_sum_vectorizer(store: EmbeddingStore) -> Vectorizer:
    def vectorize(sentence: str) -> np.ndarray:
        return embed_sum(sentence, store).values
    return vectorize


def _sentence_vectors(doc: str | Sequence[str],
                      vectorizer: Vectorizer) -> list[np.ndarray]:
    sentences = split_sentences(doc) if isinstance(doc, str) else doc
    vecs = []
    for sentence in sentences:
        try:
            vecs.append(vectorizer(sentence))
        except NoKnownTokens:
            continue
    return vecs


def pair_distances(doc_a: str | Sequence[str], doc_b: str | Sequence[str],
                   vectorizer: Vectorizer) -> list[float]:
    """Distances of every cross-document sentence pair, in (a, b) scan order."""
    vecs_a = _sentence_vectors(doc_a, vectorizer)
    vecs_b = _sentence_vectors(doc_b, vectorizer)
    if not vecs_a or not vecs_b:
        raise NoVectorizableSentence("a document yields no vectorizable sentence")
    return [cosine_distance(u, v) for u in vecs_a for v in vecs_b]


def sentence_pair_distance(doc_a: str | Sequence[str],
                           doc_b: str | Sequence[str],
                           vectorizer: Vectorizer,
                           agg: Aggregation = Aggregation.MEAN) -> float:
    dists = pair_distances(doc_a, doc_b, vectorizer)
    agg = Aggregation(agg)
    if agg is Aggregation.MEAN:
        return math.fsum(dists) / len(dists)
    if agg is Aggregation.MIN:
        return min(dists)
    return float(statistics.median(dists))


Metric = Callable[[str, str], float]


@dataclass
class RankedIdea:
    idea_id: str
    distance: float | None
    unscored: bool = False


def rank_ideas(prompt_text: str, ideas: Sequence[tuple[str, str, float]],
               metric: Metric) -> list[RankedIdea]:
    """Order ideas farthest-first; ties go to the earlier submission and
    unscorable ideas sink to the bottom marked UNSCORED.

    ``ideas`` is (idea_id, body, submitted_at) triples.
    """
    scored: list[tuple[float, float, str]] = []
    unscored: list[tuple[float, str]] = []
    for idea_id, body, submitted_at in ideas:
        try:
            scored.append((metric(prompt_text, body), submitted_at, idea_id))
        except (NoKnownTokens, NoVectorizableSentence, ZeroVector, KeyError):
            unscored.append((submitted_at, idea_id))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    unscored.sort()
    out = [RankedIdea(idea_id=i, distance=d) for d, _, i in scored]
    out.extend(RankedIdea(idea_id=i, distance=None, unscored=True)
               for _, i in unscored)
    return out


def near_duplicate_flags(ideas: Sequence[tuple[str, str, float]],
                         metric: Metric, threshold: float = 0.05) -> set[str]:
    """Flag the later of every abnormally-similar pair; the earliest
    submission in a cluster survives."""
    ordered = sorted(ideas, key=lambda t: (t[2], t[0]))
    flagged: set[str] = set()
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            try:
                d = metric(ordered[i][1], ordered[j][1])
            except (NoKnownTokens, NoVectorizableSentence, ZeroVector):
                continue
            if d < threshold:
                flagged.add(ordered[j][0])
    return flagged
