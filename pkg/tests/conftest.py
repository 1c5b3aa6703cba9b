import numpy as np
import pytest

from pqlm import PreprocessOptions, build_corpus

VOCAB = list("abcdefgh")


def random_corpus(rng, n_docs=None, vocab_size=8, max_len=12):
    """Small random corpus over a letter vocabulary; never empty docs."""
    n = int(n_docs) if n_docs is not None else int(rng.integers(4, 13))
    docs = []
    for i in range(n):
        length = int(rng.integers(2, max_len + 1))
        terms = rng.choice(VOCAB[:vocab_size], size=length)
        docs.append((f"D{i}", " ".join(terms)))
    return build_corpus(docs, PreprocessOptions())


def random_mu(rng) -> float:
    return float(rng.uniform(0.5, 50.0))


@pytest.fixture
def opts():
    return PreprocessOptions()


@pytest.fixture
def tiny_corpus():
    """The two-document worked example: d0 = 'a a b', d1 = 'b c'."""
    return build_corpus([("d0", "a a b"), ("d1", "b c")], PreprocessOptions())
