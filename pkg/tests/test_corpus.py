import io

import pytest

from pqlm import (
    Corpus,
    ParseError,
    PreprocessOptions,
    build_corpus,
    parse_lines,
    parse_topics,
    parse_trec,
    tokenize,
)


class TestTokenize:
    def test_plain_segmentation(self):
        opts = PreprocessOptions(lowercase=True)
        assert tokenize("The cat, the HAT", opts) == ["the", "cat", "the", "hat"]

    def test_stoplist_and_length_filter(self):
        opts = PreprocessOptions(stoplist={"in"}, drop_length_one=True)
        assert tokenize("a cat in hats", opts) == ["cat", "hats"]

    def test_porter(self):
        opts = PreprocessOptions(stemmer="porter")
        assert tokenize("running runner", opts) == ["run", "runner"]

    def test_case_preserved_when_disabled(self):
        opts = PreprocessOptions(lowercase=False)
        assert tokenize("Cat cat", opts) == ["Cat", "cat"]

    def test_idempotent_without_stemming(self):
        opts = PreprocessOptions(stoplist={"the"}, drop_length_one=True)
        once = tokenize("The quick brown fox, a fox!", opts)
        assert tokenize(" ".join(once), opts) == once

    def test_krovetz_not_shipped(self):
        with pytest.raises(ValueError, match="krovetz"):
            PreprocessOptions(stemmer="krovetz")


class TestParseTrec:
    def test_single_block(self):
        assert parse_trec("<DOC><DOCNO>X1</DOCNO><TEXT>a b</TEXT></DOC>") == [
            ("X1", "a b")
        ]

    def test_empty_stream(self):
        assert parse_trec("") == []

    def test_multiple_text_sections_concatenate(self):
        data = "<DOC><DOCNO> X1 </DOCNO><TEXT>a</TEXT><TEXT>b</TEXT></DOC>"
        assert parse_trec(data) == [("X1", "a b")]

    def test_missing_docno(self):
        with pytest.raises(ParseError, match="DOC block 0"):
            parse_trec("<DOC><TEXT>a</TEXT></DOC>")

    def test_unclosed_block_reports_offset(self):
        data = "<DOC><DOCNO>A</DOCNO></DOC>  <DOC><DOCNO>B</DOCNO>"
        with pytest.raises(ParseError, match="byte offset 29"):
            parse_trec(data)

    def test_file_object(self):
        assert parse_trec(io.BytesIO(b"<DOC><DOCNO>Z</DOCNO><TEXT>x</TEXT></DOC>")) \
            == [("Z", "x")]


class TestBuildCorpus:
    def test_counting(self, opts):
        corpus = build_corpus([("A", "a a b"), ("B", "b c")], opts)
        assert corpus.collection_counts == {"a": 2, "b": 2, "c": 1}
        assert corpus.collection_length == 5
        assert [d.docno for d in corpus.documents] == ["A", "B"]
        assert [d.doc_id for d in corpus.documents] == [0, 1]

    def test_empty_document_excluded(self, opts):
        excluded = []
        corpus = build_corpus([("A", "")], opts, excluded)
        assert corpus.n_docs == 0
        assert excluded == ["A"]

    def test_duplicate_docno(self, opts):
        with pytest.raises(ParseError, match="duplicate docno 'A'"):
            build_corpus([("A", "x"), ("A", "y")], opts)

    def test_count_invariants(self, opts):
        import numpy as np

        rng = np.random.default_rng(7)
        from conftest import random_corpus

        for _ in range(20):
            corpus = random_corpus(rng)
            assert sum(corpus.collection_counts.values()) == corpus.collection_length
            for doc in corpus.documents:
                assert sum(doc.term_counts.values()) == doc.length
                assert doc.length >= 1

    def test_term_ids_lexicographic(self, opts):
        corpus = build_corpus([("A", "zebra apple mango")], opts)
        assert corpus.vocabulary == {"apple": 0, "mango": 1, "zebra": 2}


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path, opts):
        corpus = build_corpus(
            [("A", "the cat sat"), ("B", "a hat and a bat")],
            PreprocessOptions(stoplist={"the"}, stemmer="porter"),
        )
        path = tmp_path / "index.json"
        corpus.save(path)
        first = path.read_bytes()
        reloaded = Corpus.load(path)
        reloaded.save(path)
        assert path.read_bytes() == first
        assert reloaded.content_hash == corpus.content_hash
        assert reloaded.options == corpus.options
        assert [d.term_counts for d in reloaded.documents] \
            == [d.term_counts for d in corpus.documents]

    def test_reingest_is_deterministic(self, opts):
        docs = [("A", "x y z"), ("B", "y y")]
        assert build_corpus(docs, opts).serialize() == build_corpus(docs, opts).serialize()

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "nope.json"
        path.write_text('{"format": "other"}')
        with pytest.raises(ParseError, match="not a pqlm-index"):
            Corpus.load(path)


class TestOtherInputs:
    def test_lines_format(self):
        assert parse_lines("a b\nc\n") == [("L0", "a b"), ("L1", "c")]

    def test_topics(self):
        data = """
<top>
<num> Number: 401
<title> foreign minorities, Germany

<desc> Description:
something else
</top>
<top>
<num> Number: 402
<title> Topic: behavioral genetics
</top>
"""
        assert parse_topics(data) == [
            ("401", "foreign minorities, Germany"),
            ("402", "behavioral genetics"),
        ]

    def test_topic_without_num(self):
        with pytest.raises(ParseError, match="without <num>"):
            parse_topics("<top><title> x </top>")
