"""The three renderer-scoring methods mapping weighted pseudo-queries to
document scores.

All three consume a :class:`PseudoQueryList` (the ranked texts of the
current round) and produce a deterministic total order over documents.
Computation is repertoire-driven: each pseudo-query's top-renderer list is
computed once and inverted into per-document credits, which matches the
per-document definitions exactly while touching only active pseudo-queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .clustering import ClusterIndex, cluster_membership
from .corpus import Corpus
from .lm import QUERY_ID, log_rendition_docs, ranked_order


@dataclass
class PseudoQueryList:
    """Ranked text ids with nonincreasing weights in [0, 1].

    Round 1 is the single entry QUERY_ID with weight 1; later rounds carry
    document ids.  Zero-weight items are inert and are pruned before any
    repertoire computation.
    """

    items: list[int]
    weights: list[float]

    def __post_init__(self):
        if len(self.items) != len(self.weights):
            raise ValueError("items and weights differ in length")
        if not self.items:
            raise ValueError("empty pseudo-query list")
        prev = 1.0
        for w in self.weights:
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight {w} outside [0, 1]")
            if w > prev + 1e-12:
                raise ValueError("weights must be nonincreasing")
            prev = w

    def active(self) -> Iterator[tuple[int, float]]:
        """(item, weight) pairs with weight > 0, in rank order."""
        return ((i, w) for i, w in zip(self.items, self.weights) if w > 0.0)

    @classmethod
    def initial(cls) -> "PseudoQueryList":
        return cls([QUERY_ID], [1.0])


class ScoredRanking:
    """Total order over documents: score descending, doc id ascending."""

    def __init__(self, doc_ids, scores):
        self.doc_ids = np.asarray(doc_ids, dtype=int)
        self.scores = np.asarray(scores, dtype=float)
        if len(self.doc_ids) != len(self.scores):
            raise ValueError("ids and scores differ in length")
        if len(self.scores) and not np.all(np.isfinite(self.scores)):
            raise ValueError("non-finite score in ranking")

    @classmethod
    def from_dense(cls, scores: np.ndarray) -> "ScoredRanking":
        """Rank every document given a score-per-doc-id array."""
        order = ranked_order(scores)
        return cls(order, np.asarray(scores, dtype=float)[order])

    @classmethod
    def from_pairs(cls, pairs) -> "ScoredRanking":
        pairs = sorted(pairs, key=lambda e: (-e[1], e[0]))
        return cls([d for d, _ in pairs], [s for _, s in pairs])

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.doc_ids.tolist(), self.scores.tolist()))

    def truncate(self, n: int) -> "ScoredRanking":
        return ScoredRanking(self.doc_ids[:n], self.scores[:n])

    def score_of(self) -> dict[int, float]:
        return dict(zip(self.doc_ids.tolist(), self.scores.tolist()))

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ScoredRanking)
            and np.array_equal(self.doc_ids, other.doc_ids)
            and np.array_equal(self.scores, other.scores)
        )


@dataclass(frozen=True)
class MethodParams:
    alpha: int = 10
    alpha_cluster: int = 2
    beta: int = 20
    m: int | None = None  # re-scaling pool; defaults to 2 * alpha

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", 2 * self.alpha)
        for name in ("alpha", "alpha_cluster", "beta", "m"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.m <= self.alpha:
            raise ValueError(f"m={self.m} must exceed alpha={self.alpha}")


def _pq_counts(item: int, corpus: Corpus, query_counts) -> Mapping[str, int]:
    if item == QUERY_ID:
        if query_counts is None:
            raise ValueError("pseudo-query list references the query but no "
                             "query counts were provided")
        return query_counts
    return corpus.documents[item].term_counts


def score_vdoc(pq: PseudoQueryList, alpha: int, corpus: Corpus, mu: float,
               query_counts: Mapping[str, int]) -> ScoredRanking:
    """Emit each pseudo-query's top-alpha renderers in turn, explicit scores.

    A document is credited at the highest-ranked pseudo-query whose
    top-alpha set contains it; its score is
    (p + 2 * (|D| - rank + 1)) / (1 + 2 * |D|) with p the rendition
    probability at that pseudo-query.  Documents matched by no pseudo-query
    use rank |D| + 1 and their rendition probability of the original query,
    which places them below every matched document.
    """
    n = corpus.n_docs
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    matched_rank = np.full(n, n + 1, dtype=int)
    matched_p = np.exp(log_rendition_docs(corpus, query_counts, mu))
    rank = 0
    for item, _w in pq.active():
        rank += 1
        probs = np.exp(log_rendition_docs(corpus, _pq_counts(item, corpus, query_counts), mu))
        for d in ranked_order(probs)[:alpha]:
            if matched_rank[d] == n + 1:
                matched_rank[d] = rank
                matched_p[d] = probs[d]
    scores = (matched_p + 2.0 * np.where(matched_rank <= n, n - matched_rank + 1, 0)) \
        / (1.0 + 2.0 * n)
    return ScoredRanking.from_dense(scores)


def score_mcdoc(pq: PseudoQueryList, params: MethodParams, corpus: Corpus,
                mu: float, query_counts=None) -> ScoredRanking:
    """Credit each document for every pseudo-query it is a top renderer of.

    score(d) = sum over pseudo-queries q in d's repertoire of
    w(q) * p(q | d) / N(q), where N(q) sums the rendition probabilities of
    q's top-m renderers.  Accumulation follows pseudo-query rank order so
    results are bit-stable.
    """
    n = corpus.n_docs
    scores = np.zeros(n)
    for item, w in pq.active():
        probs = np.exp(log_rendition_docs(corpus, _pq_counts(item, corpus, query_counts), mu))
        order = ranked_order(probs)
        norm = float(probs[order[: params.m]].sum())
        top = order[: params.alpha]
        scores[top] += w * (probs[top] / norm)
    return ScoredRanking.from_dense(scores)


def log_rendition_clusters(cluster_index: ClusterIndex, corpus: Corpus,
                           x_counts: Mapping[str, int], mu: float) -> np.ndarray:
    """Log rendition scores of one text against every cluster model."""
    if mu <= 0:
        raise ValueError("vectorized rendition scoring requires mu > 0")
    n = len(cluster_index)
    xlen = float(sum(x_counts.values()))
    if xlen == 0:
        raise ValueError("empty sequence")
    out = np.zeros(n)
    base = 0.0
    for term, cnt in sorted(x_counts.items()):
        p_coll = corpus.collection_prob(term)
        if p_coll == 0.0:
            raise ValueError(f"term {term!r} is not in the corpus vocabulary")
        background = math.log(mu * p_coll)
        base += cnt * background
        ids, counts = cluster_index.postings(term)
        if len(ids):
            out[ids] += cnt * (np.log(counts + mu * p_coll) - background)
    out += base
    out -= xlen * np.log(cluster_index.lengths() + mu)
    out /= xlen
    return out


def score_mccluster(pq: PseudoQueryList, params: MethodParams, corpus: Corpus,
                    cluster_index: ClusterIndex, mu: float, first_round: bool,
                    query_counts=None, instrumentation: dict | None = None) -> ScoredRanking:
    """Two-phase cluster scoring.

    Phase 1 credits each cluster for every pseudo-query it is a top
    renderer of, where a cluster may only render its constituent documents
    (the round-1 query counts as belonging to all clusters); the credit is
    normalized over all clusters containing the pseudo-query.  Phase 2
    converts cluster scores into document scores by crediting each document
    for every scored cluster it is a top-beta renderer of, restricted to
    the clusters it belongs to.
    """
    if instrumentation is not None:
        instrumentation.setdefault("cluster_credits", [])
        instrumentation.setdefault("doc_credits", [])
    cscores = np.zeros(len(cluster_index))
    for item, w in pq.active():
        cand = np.array(sorted(cluster_membership(cluster_index, item, first_round)),
                        dtype=int)
        if len(cand) == 0:
            continue
        logp = log_rendition_clusters(
            cluster_index, corpus, _pq_counts(item, corpus, query_counts), mu)
        probs = np.exp(logp[cand])
        norm = float(probs.sum())
        order = np.lexsort((cand, -probs))[: params.alpha_cluster]
        chosen = cand[order]
        cscores[chosen] += w * (probs[order] / norm)
        if instrumentation is not None:
            instrumentation["cluster_credits"].extend((item, int(c)) for c in chosen)

    dscores = np.zeros(corpus.n_docs)
    for cid in np.nonzero(cscores)[0]:
        members, probs, norm = cluster_index.member_rendition(int(cid), corpus)
        top = members[: params.beta]
        dscores[top] += cscores[cid] * (probs[: params.beta] / norm)
        if instrumentation is not None:
            instrumentation["doc_credits"].extend((int(cid), int(d)) for d in top)
    return ScoredRanking.from_dense(dscores)
