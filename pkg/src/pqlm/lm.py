"""Unigram language models: MLE, Dirichlet smoothing, rendition probabilities,
top-renderer sets, repertoires, and offline neighbor precomputation.

A *renderer* is a document or cluster whose smoothed language model assigns a
rendition probability to a text.  The rendition probability used throughout is
the geometric mean of the smoothed per-term probabilities,

    p(r, x) = (prod_i p_dir(w_i | r)) ** (1 / |x|),

accumulated in natural-log space.  It equals exp(-KL(MLE_x || Dir_r)) divided
by exp(H(MLE_x)); the entropy factor is constant for a fixed text, so every
per-text ranking and every ratio normalization downstream is unchanged by the
omission.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, ParseError, canonical_json

log = logging.getLogger(__name__)

#: Reserved text id for the original query in pseudo-query lists.
QUERY_ID = -1

NEIGHBORS_FORMAT = "pqlm-neighbors-v1"


@dataclass(frozen=True)
class RendererRef:
    kind: str  # "document" | "cluster" | "query"
    id: int


@dataclass
class TopRendererSet:
    """The k candidates scoring a text highest, ties broken to lower ids."""

    target: object
    renderers: list[tuple[RendererRef, float]]
    k: int

    def ids(self) -> list[int]:
        return [ref.id for ref, _ in self.renderers]


@dataclass
class Repertoire:
    renderer: RendererRef
    members: set


def mle_prob(counts: Mapping[str, int], seq: Sequence[str]) -> float:
    """Maximum-likelihood probability of a token sequence under a count table."""
    if not seq:
        raise ValueError("empty sequence")
    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty count table")
    prob = 1.0
    for term in seq:
        prob *= counts.get(term, 0) / total
    return prob


def _resolve(renderer, corpus: Corpus, cluster_index=None):
    """Renderer ref or bare doc id -> (term counts, length)."""
    if isinstance(renderer, RendererRef):
        if renderer.kind == "document":
            doc = corpus.documents[renderer.id]
            return doc.term_counts, doc.length
        if renderer.kind == "cluster":
            if cluster_index is None:
                raise ValueError("cluster renderer given without a cluster index")
            c = cluster_index.clusters[renderer.id]
            return c.term_counts, c.length
        raise ValueError(f"renderer kind {renderer.kind!r} has no count table here")
    doc = corpus.documents[renderer]
    return doc.term_counts, doc.length


def dirichlet_term_prob(renderer, term: str, mu: float, corpus: Corpus,
                        cluster_index=None) -> float:
    """Dirichlet-smoothed probability of one term under a renderer's model.

    (count(term | r) + mu * p_ml(term | collection)) / (length_r + mu).
    Terms outside the vocabulary use collection probability 0 and are
    reported; they carry no ranking signal.
    """
    counts, length = _resolve(renderer, corpus, cluster_index)
    p_coll = corpus.collection_prob(term)
    if p_coll == 0.0 and term not in counts:
        log.warning("term %r is outside the vocabulary; collection probability 0", term)
    return (counts.get(term, 0) + mu * p_coll) / (length + mu)


def rendition_prob(renderer, seq, mu: float, corpus: Corpus,
                   cluster_index=None) -> float:
    """Geometric mean of smoothed per-term probabilities, via log space.

    `seq` may be a token sequence or a term-count mapping.
    """
    counts, length = _resolve(renderer, corpus, cluster_index)
    if isinstance(seq, Mapping):
        items = sorted(seq.items())
    else:
        from collections import Counter

        items = sorted(Counter(seq).items())
    n = sum(c for _, c in items)
    if n == 0:
        raise ValueError("empty sequence")
    acc = 0.0
    for term, cnt in items:
        p = (counts.get(term, 0) + mu * corpus.collection_prob(term)) / (length + mu)
        if p == 0.0:
            if mu == 0.0:
                raise ValueError(f"zero probability for {term!r} with mu=0")
            raise ValueError(f"term {term!r} has zero smoothed probability")
        acc += cnt * math.log(p)
    return math.exp(acc / n)


def _as_counts(seq) -> dict:
    if isinstance(seq, Mapping):
        return dict(seq)
    from collections import Counter

    return dict(Counter(seq))


def log_rendition_docs(corpus: Corpus, x_counts: Mapping[str, int], mu: float) -> np.ndarray:
    """Log geometric-mean rendition scores of one text against every document.

    Vectorized over the inverted index: only documents containing a text
    term deviate from the background contribution log(mu * p_coll).
    Requires mu > 0.
    """
    if mu <= 0:
        raise ValueError("vectorized rendition scoring requires mu > 0")
    n = corpus.n_docs
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
        ids, counts = corpus.postings(term)
        if len(ids):
            out[ids] += cnt * (np.log(counts + mu * p_coll) - background)
    out += base
    out -= xlen * np.log(corpus.doc_lengths() + mu)
    out /= xlen
    return out


def ranked_order(scores: np.ndarray) -> np.ndarray:
    """Indices sorted by descending score, ties toward lower index."""
    ids = np.arange(len(scores))
    return np.lexsort((ids, -np.asarray(scores, dtype=float)))


def top_renderers(x, candidates, k: int, *, corpus: Corpus, mu: float,
                  kind: str = "document", cluster_index=None) -> TopRendererSet:
    """The k candidates assigning x the highest rendition probability.

    `x` is a doc id or a token-sequence/count mapping; `candidates` is a
    collection of renderer ids of one kind.  Result order is deterministic
    under any permutation of the candidate enumeration.
    """
    cand = sorted(set(candidates))
    if not cand:
        raise ValueError("empty candidate set")
    if k < 1:
        raise ValueError("k must be >= 1")
    x_counts = _as_counts(corpus.documents[x].term_counts if isinstance(x, int) else x)
    scores = [
        rendition_prob(RendererRef(kind, cid), x_counts, mu, corpus, cluster_index)
        for cid in cand
    ]
    order = sorted(range(len(cand)), key=lambda i: (-scores[i], cand[i]))
    chosen = order[: min(k, len(cand))]
    return TopRendererSet(
        target=x,
        renderers=[(RendererRef(kind, cand[i]), scores[i]) for i in chosen],
        k=k,
    )


def repertoire(r, X, candidates, k: int, *, corpus: Corpus, mu: float,
               kind: str = "document", cluster_index=None) -> Repertoire:
    """Texts in X for which renderer r ranks among the top-k candidates."""
    ref = r if isinstance(r, RendererRef) else RendererRef(kind, r)
    if ref.id not in set(candidates):
        raise ValueError(f"renderer {ref.id} outside the candidate set")
    members = {
        x
        for x in X
        if ref.id in top_renderers(x, candidates, k, corpus=corpus, mu=mu,
                                   kind=ref.kind, cluster_index=cluster_index).ids()
    }
    return Repertoire(ref, members)


class NeighborIndex:
    """Per-document ordered best-renderer lists, precomputed offline.

    Keyed by (corpus hash, mu, k_max); loading against a different corpus or
    smoothing parameter is an error.
    """

    def __init__(self, corpus_hash: str, mu: float, k_max: int,
                 neighbors: list[list[int]]):
        self.corpus_hash = corpus_hash
        self.mu = mu
        self.k_max = k_max
        self.neighbors = neighbors

    def top(self, doc_id: int, k: int) -> list[int]:
        if k > self.k_max:
            raise ValueError(
                f"k={k} exceeds precomputed k_max={self.k_max}; recompute neighbors"
            )
        return self.neighbors[doc_id][:k]

    def to_payload(self) -> dict:
        return {
            "format": NEIGHBORS_FORMAT,
            "corpus_hash": self.corpus_hash,
            "mu": self.mu,
            "k_max": self.k_max,
            "neighbors": self.neighbors,
        }

    def save(self, path) -> None:
        from .storage import atomic_write

        atomic_write(path, canonical_json(self.to_payload()))

    @classmethod
    def load(cls, path, corpus: Corpus | None = None, mu: float | None = None) -> "NeighborIndex":
        with open(path, "rb") as fh:
            payload = json.loads(fh.read())
        if not isinstance(payload, dict) or payload.get("format") != NEIGHBORS_FORMAT:
            raise ParseError(f"{path}: not a {NEIGHBORS_FORMAT} file")
        try:
            idx = cls(payload["corpus_hash"], payload["mu"], payload["k_max"],
                      [list(map(int, row)) for row in payload["neighbors"]])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: malformed neighbor payload: {exc}") from exc
        if corpus is not None and idx.corpus_hash != corpus.content_hash:
            raise ValueError(f"{path}: neighbor lists were built for a different corpus")
        if mu is not None and idx.mu != mu:
            raise ValueError(f"{path}: neighbor lists were built with mu={idx.mu}, not {mu}")
        return idx


def precompute_neighbors(corpus: Corpus, k_max: int, mu: float,
                         threads: int = 1) -> NeighborIndex:
    """Top-k_max renderer list for every document, for O(1) later queries.

    Per-document results are independent, so the computation may fan out
    over threads without affecting the (deterministic) output.
    """
    n = corpus.n_docs
    if k_max > n:
        log.warning("k_max=%d exceeds corpus size %d; clamped", k_max, n)
        k_max = n
    if k_max < 1:
        raise ValueError("k_max must be >= 1")

    def one(doc_id: int) -> list[int]:
        scores = log_rendition_docs(corpus, corpus.documents[doc_id].term_counts, mu)
        return ranked_order(scores)[:k_max].tolist()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            neighbors = list(pool.map(one, range(n)))
    else:
        neighbors = [one(d) for d in range(n)]
    return NeighborIndex(corpus.content_hash, mu, k_max, neighbors)
