"""The iterative retrieval driver: rounds, pseudo-query construction,
round-1 privileged spread, drift scheduling, and TREC run emission.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import drift as drift_mod
from .clustering import ClusterIndex
from .corpus import Corpus, Query
from .drift import DriftTechnique
from .lm import log_rendition_docs
from .scoring import (
    MethodParams,
    PseudoQueryList,
    ScoredRanking,
    score_mccluster,
    score_mcdoc,
    score_vdoc,
)

log = logging.getLogger(__name__)

METHODS = ("vdoc", "mcdoc", "mccluster")


@dataclass(frozen=True)
class RunConfig:
    """Every free parameter of one retrieval system."""

    method: str = "mcdoc"
    alpha: int = 10
    alpha1: int | None = None       # round-1 spread; defaults to alpha
    alpha_cluster: int = 2
    beta: int = 20
    delta: int | None = None        # cluster size; 40 large corpora, 10 small
    m: int | None = None            # re-scaling pool; defaults to 2 * alpha
    T: int = 1
    mu: float = 2000.0
    drift: DriftTechnique = field(default_factory=DriftTechnique)
    N: int = 1000                   # retrieval depth

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.alpha1 is None:
            object.__setattr__(self, "alpha1", self.alpha)
        if self.m is None:
            object.__setattr__(self, "m", 2 * self.alpha)
        for name in ("alpha", "alpha1", "alpha_cluster", "beta", "T", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.m <= self.alpha:
            raise ValueError(f"m={self.m} must exceed alpha={self.alpha}")
        if self.delta is not None and self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if self.T > 10:
            log.warning("T=%d rounds; the iteration count is meant to stay small",
                        self.T)

    def resolved_delta(self, corpus: Corpus) -> int:
        if self.delta is not None:
            return self.delta
        return 40 if corpus.n_docs > 1000 else 10


@dataclass
class RoundTrace:
    round_index: int
    pseudo_query_count: int
    top10: list[tuple[int, float]]


def _next_pseudo_queries(ranking: ScoredRanking) -> PseudoQueryList:
    """Round scores become the next round's weights, max-normalized.

    Division by the round maximum is order-preserving, so the pseudo-query
    order equals the round's ranking; zero-scored documents are dropped
    (they could contribute nothing anyway).
    """
    positive = ranking.scores > 0.0
    if not positive.any():
        raise ValueError("no pseudo-queries remain: every document scored zero")
    top = float(ranking.scores[0])
    items = ranking.doc_ids[positive].tolist()
    weights = (ranking.scores[positive] / top).tolist()
    return PseudoQueryList(items, weights)


def run_retrieval(query: Query, config: RunConfig, corpus: Corpus,
                  cluster_index: ClusterIndex | None = None,
                  trace: list[RoundTrace] | None = None) -> ScoredRanking:
    """Execute T rounds of pseudo-query processing for one query."""
    terms = [t for t in query.terms if t in corpus.collection_counts]
    dropped = len(query.terms) - len(terms)
    if dropped:
        log.warning("query %s: %d out-of-vocabulary terms dropped",
                    query.query_id, dropped)
    if not terms:
        raise ValueError(f"query {query.query_id} is empty after preprocessing")
    query_counts = dict(Counter(terms))

    if config.method == "mccluster":
        if cluster_index is None:
            raise ValueError("mccluster requires a cluster index")
        if cluster_index.corpus_hash != corpus.content_hash:
            raise ValueError("cluster index was built for a different corpus")
        if cluster_index.mu != config.mu:
            raise ValueError(
                f"cluster index was built with mu={cluster_index.mu}, "
                f"config has mu={config.mu}")
        if cluster_index.delta != config.resolved_delta(corpus):
            raise ValueError(
                f"cluster index was built with delta={cluster_index.delta}, "
                f"config expects delta={config.resolved_delta(corpus)}")

    query_scores = ScoredRanking.from_dense(
        np.exp(log_rendition_docs(corpus, query_counts, config.mu)))

    pq = PseudoQueryList.initial()
    ranking = query_scores
    technique = config.drift
    for t in range(1, config.T + 1):
        first = t == 1
        if config.method == "vdoc":
            spread = config.alpha1 if first else config.alpha
            ranking = score_vdoc(pq, spread, corpus, config.mu, query_counts)
        elif config.method == "mcdoc":
            # The pool must exceed the round's spread.  Raising m in round 1
            # (single pseudo-query) rescales every score by one constant, so
            # the ranking and the next round's normalized weights are
            # unchanged.
            spread = config.alpha1 if first else config.alpha
            params = MethodParams(alpha=spread, m=max(config.m, spread + 1))
            ranking = score_mcdoc(pq, params, corpus, config.mu, query_counts)
        else:
            params = MethodParams(
                alpha=config.alpha,
                alpha_cluster=config.alpha1 if first else config.alpha_cluster,
                beta=config.beta,
                m=config.m,
            )
            ranking = score_mccluster(pq, params, corpus, cluster_index,
                                      config.mu, first, query_counts)
        if technique.kind == "iterated_truncation":
            ranking = drift_mod.iterated_truncation(ranking, technique.N)
        elif technique.kind == "iterated_rerank":
            ranking = drift_mod.truncated_rerank(ranking, query_scores, technique.N)
        elif technique.kind == "iterated_interpolation":
            ranking = drift_mod.interpolate(ranking, query_scores, technique.lambda_)
        if trace is not None:
            trace.append(RoundTrace(t, len(pq.items), ranking.truncate(10).entries))
        if t < config.T:
            pq = _next_pseudo_queries(ranking)

    if technique.kind == "interpolation":
        ranking = drift_mod.interpolate(ranking, query_scores, technique.lambda_)
    elif technique.kind == "truncated_rerank":
        ranking = drift_mod.truncated_rerank(ranking, query_scores, technique.N)
    return ranking.truncate(config.N)


def format_run_lines(query_id: str, ranking: ScoredRanking, corpus: Corpus,
                     tag: str) -> list[str]:
    """TREC run rows: qid Q0 docno rank score tag, fixed 6-decimal scores."""
    return [
        f"{query_id} Q0 {corpus.documents[int(d)].docno} {rank} {score:.6f} {tag}"
        for rank, (d, score) in enumerate(ranking.entries, start=1)
    ]
