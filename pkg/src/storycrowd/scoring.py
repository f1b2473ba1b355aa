"""Binds named distance metrics to the embedding/sidecar stores.

Metric names exposed over the API:
  wordsum      document-level word-vector sum, cosine distance
  sent_mean    mean over all cross-document sentence-pair distances
  sent_min     minimum over sentence pairs
  sent_median  median over sentence pairs
  sidecar      cosine distance of precomputed vectors keyed by text id
               (task id for the prompt, submission id for an idea)
"""

from __future__ import annotations

from .distance import (
    Aggregation,
    EmbeddingStore,
    SidecarVectors,
    cosine_distance,
    embed_sum,
    sentence_pair_distance,
    word_sum_vectorizer,
)
from .errors import (
    NoKnownTokens,
    NotFound,
    NoVectorizableSentence,
    ZeroVector,
)

TEXT_METRICS = ("wordsum", "sent_mean", "sent_min", "sent_median")
SCORE_ERRORS = (NoKnownTokens, NoVectorizableSentence, ZeroVector)


class DistanceService:
    def __init__(self, embeddings: EmbeddingStore,
                 sidecar: SidecarVectors | None = None):
        self.embeddings = embeddings
        self.sidecar = sidecar
        self._vectorizer = word_sum_vectorizer(embeddings)

    def metric_names(self) -> list[str]:
        names = list(TEXT_METRICS)
        if self.sidecar is not None:
            names.append("sidecar")
        return names

    def text_distance(self, metric: str, a: str, b: str) -> float:
        if metric == "wordsum":
            return cosine_distance(embed_sum(a, self.embeddings).values,
                                   embed_sum(b, self.embeddings).values)
        if metric == "sent_mean":
            return sentence_pair_distance(a, b, self._vectorizer, Aggregation.MEAN)
        if metric == "sent_min":
            return sentence_pair_distance(a, b, self._vectorizer, Aggregation.MIN)
        if metric == "sent_median":
            return sentence_pair_distance(a, b, self._vectorizer, Aggregation.MEDIAN)
        raise NotFound(f"unknown metric {metric}")

    def sidecar_distance(self, id_a: str, id_b: str) -> float:
        if self.sidecar is None:
            raise NotFound("no sidecar vectors loaded")
        va = self.sidecar.table.get(id_a)
        vb = self.sidecar.table.get(id_b)
        if va is None or vb is None:
            raise NotFound(f"sidecar vector missing for {id_a if va is None else id_b}")
        return cosine_distance(va, vb)

    def score_submission(self, prompt_text: str, idea_text: str,
                         idea_id: str, task_id: str) -> dict[str, float]:
        """Scorer hook the orchestrator calls on every acceptance; metrics
        that cannot score the pair are skipped, not fatal."""
        scores: dict[str, float] = {}
        for metric in TEXT_METRICS:
            try:
                scores[metric] = self.text_distance(metric, prompt_text, idea_text)
            except SCORE_ERRORS:
                continue
        if self.sidecar is not None:
            try:
                scores["sidecar"] = self.sidecar_distance(task_id, idea_id)
            except (NotFound, ZeroVector):
                pass
        return scores
