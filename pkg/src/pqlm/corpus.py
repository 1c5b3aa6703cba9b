"""Corpus ingestion: TREC parsing, tokenization, and index construction.

The built :class:`Corpus` is immutable after construction and is the shared
substrate for every language-model computation.  Term ids are assigned
lexicographically so that tie-breaking by "lower term id" survives a
save/load round trip.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass

from . import porter

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")

INDEX_FORMAT = "pqlm-index-v1"


class ParseError(ValueError):
    """Malformed input data (TREC SGML, topics, qrels, run files)."""


@dataclass(frozen=True)
class PreprocessOptions:
    lowercase: bool = True
    stemmer: str = "none"  # none | porter  (krovetz reserved, not shipped)
    stoplist: frozenset[str] = frozenset()
    drop_length_one: bool = False

    def __post_init__(self):
        if self.stemmer not in ("none", "porter", "krovetz"):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")
        if self.stemmer == "krovetz":
            raise ValueError("krovetz stemmer is reserved but not shipped; use porter")
        object.__setattr__(self, "stoplist", frozenset(self.stoplist))

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "stemmer": self.stemmer,
            "stoplist": sorted(self.stoplist),
            "drop_length_one": self.drop_length_one,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessOptions":
        return cls(
            lowercase=d["lowercase"],
            stemmer=d["stemmer"],
            stoplist=frozenset(d["stoplist"]),
            drop_length_one=d["drop_length_one"],
        )


def tokenize(text: str, opts: PreprocessOptions) -> list[str]:
    """Split text into maximal alphanumeric runs and apply the option chain.

    Order: segment, lowercase, stoplist filter, length-one filter, stem.
    """
    tokens = _TOKEN_RE.findall(text)
    if opts.lowercase:
        tokens = [t.lower() for t in tokens]
    if opts.stoplist:
        tokens = [t for t in tokens if t not in opts.stoplist]
    if opts.drop_length_one:
        tokens = [t for t in tokens if len(t) > 1]
    if opts.stemmer == "porter":
        tokens = [porter.stem(t) for t in tokens]
    return tokens


@dataclass
class Document:
    doc_id: int
    docno: str
    term_counts: dict[str, int]
    length: int


@dataclass
class Query:
    query_id: str
    terms: list[str]


class Corpus:
    """Indexed document collection with collection-level statistics."""

    def __init__(self, documents: list[Document], options: PreprocessOptions):
        self.documents = documents
        self.options = options
        self.collection_counts: dict[str, int] = Counter()
        self.collection_length = 0
        for doc in documents:
            self.collection_length += doc.length
            for term, cnt in doc.term_counts.items():
                self.collection_counts[term] += cnt
        self.collection_counts = dict(self.collection_counts)
        # lexicographic term ids: deterministic and reload-stable
        self.vocabulary: dict[str, int] = {
            t: i for i, t in enumerate(sorted(self.collection_counts))
        }
        self._postings: dict[str, tuple] = {}
        self._lengths = None
        self._hash: str | None = None

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    def collection_prob(self, term: str) -> float:
        """Collection maximum-likelihood probability; 0 for unknown terms."""
        return self.collection_counts.get(term, 0) / self.collection_length

    def doc_lengths(self):
        import numpy as np

        if self._lengths is None:
            self._lengths = np.array([d.length for d in self.documents], dtype=float)
        return self._lengths

    def postings(self, term: str):
        """(doc_ids, counts) arrays for one term, built lazily."""
        import numpy as np

        hit = self._postings.get(term)
        if hit is None:
            ids, cnts = [], []
            for doc in self.documents:
                c = doc.term_counts.get(term)
                if c:
                    ids.append(doc.doc_id)
                    cnts.append(c)
            hit = (np.array(ids, dtype=int), np.array(cnts, dtype=float))
            self._postings[term] = hit
        return hit

    def preprocess_query(self, query_id: str, text: str) -> Query:
        return Query(query_id, tokenize(text, self.options))

    # -- persistence ----------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "format": INDEX_FORMAT,
            "options": self.options.to_dict(),
            "documents": [
                {"docno": d.docno, "counts": dict(sorted(d.term_counts.items()))}
                for d in self.documents
            ],
        }

    def serialize(self) -> bytes:
        return canonical_json(self.to_payload())

    @property
    def content_hash(self) -> str:
        if self._hash is None:
            self._hash = hashlib.sha256(self.serialize()).hexdigest()
        return self._hash

    def save(self, path) -> None:
        from .storage import atomic_write

        atomic_write(path, self.serialize())

    @classmethod
    def load(cls, path) -> "Corpus":
        with open(path, "rb") as fh:
            payload = json.loads(fh.read())
        if not isinstance(payload, dict) or payload.get("format") != INDEX_FORMAT:
            raise ParseError(f"{path}: not a {INDEX_FORMAT} file")
        try:
            options = PreprocessOptions.from_dict(payload["options"])
            documents = []
            for i, entry in enumerate(payload["documents"]):
                counts = {t: int(c) for t, c in entry["counts"].items()}
                documents.append(
                    Document(i, entry["docno"], counts, sum(counts.values())))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"{path}: malformed index payload: {exc}") from exc
        return cls(documents, options)


def canonical_json(payload) -> bytes:
    """Deterministic byte encoding used for hashing and persistence."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def build_corpus(
    docs: list[tuple[str, str]],
    opts: PreprocessOptions,
    excluded: list[str] | None = None,
) -> Corpus:
    """Index (docno, text) pairs; doc ids follow input order.

    Documents that tokenize to nothing are excluded (their docnos are
    appended to `excluded` when given) since a length-0 document has no
    maximum-likelihood model.
    """
    seen: set[str] = set()
    documents: list[Document] = []
    for docno, text in docs:
        if docno in seen:
            raise ParseError(f"duplicate docno {docno!r}")
        seen.add(docno)
        tokens = tokenize(text, opts)
        if not tokens:
            log.warning("document %s is empty after preprocessing; excluded", docno)
            if excluded is not None:
                excluded.append(docno)
            continue
        counts = dict(Counter(tokens))
        documents.append(Document(len(documents), docno, counts, len(tokens)))
    return Corpus(documents, opts)


# -- input file formats -------------------------------------------------

_DOC_OPEN = re.compile(rb"<DOC>")
_DOC_CLOSE = re.compile(rb"</DOC>")
_DOCNO_RE = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.S)
_TEXT_RE = re.compile(r"<TEXT>(.*?)</TEXT>", re.S)


def parse_trec(data) -> list[tuple[str, str]]:
    """Parse TREC SGML <DOC> blocks into (docno, text) pairs.

    `data` may be str, bytes, or a file-like object.  The text of a
    document is the concatenation of its <TEXT> sections.
    """
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, str):
        data = data.encode("utf-8", "replace")
    out: list[tuple[str, str]] = []
    pos = 0
    block_index = 0
    while True:
        m = _DOC_OPEN.search(data, pos)
        if m is None:
            break
        end = _DOC_CLOSE.search(data, m.end())
        if end is None:
            raise ParseError(f"unclosed <DOC> block at byte offset {m.start()}")
        block = data[m.end() : end.start()].decode("utf-8", "replace")
        docno_m = _DOCNO_RE.search(block)
        if docno_m is None:
            raise ParseError(f"missing <DOCNO> in DOC block {block_index}")
        docno = docno_m.group(1).strip()
        text = " ".join(t.strip() for t in _TEXT_RE.findall(block))
        out.append((docno, text))
        pos = end.end()
        block_index += 1
    return out


def parse_lines(data) -> list[tuple[str, str]]:
    """One document per line; line k (0-based) becomes docno "L<k>"."""
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", "replace")
    return [(f"L{k}", line) for k, line in enumerate(data.splitlines())]


_TOP_RE = re.compile(r"<top>(.*?)</top>", re.S | re.I)
_NUM_RE = re.compile(r"<num>\s*(?:Number:)?\s*([^<\s]+)", re.I)
_TITLE_RE = re.compile(r"<title>\s*(?:Topic:)?\s*(.*?)\s*(?=<|\Z)", re.S | re.I)


def parse_topics(data) -> list[tuple[str, str]]:
    """Parse TREC topic files into (query_id, title) pairs."""
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", "replace")
    out = []
    for block in _TOP_RE.findall(data):
        num_m = _NUM_RE.search(block)
        if num_m is None:
            raise ParseError("topic block without <num>")
        title_m = _TITLE_RE.search(block)
        if title_m is None:
            raise ParseError(f"topic {num_m.group(1)} has no <title>")
        out.append((num_m.group(1).strip(), " ".join(title_m.group(1).split())))
    return out
