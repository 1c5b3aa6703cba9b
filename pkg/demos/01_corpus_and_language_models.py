"""Build a tiny corpus and look at its language models.

Walks from raw text to smoothed term probabilities and rendition scores:
the probability-like quantity that says how well a document's language
model accounts for a piece of text.
"""

from pqlm import (
    PreprocessOptions,
    build_corpus,
    dirichlet_term_prob,
    mle_prob,
    rendition_prob,
    tokenize,
    top_renderers,
)

DOCS = [
    ("sun-1", "solar panels convert sunlight into electric power"),
    ("sun-2", "the solar farm stores power in large batteries"),
    ("wind-1", "wind turbines generate electric power from moving air"),
    ("poem-1", "a verse about sunlight in a summer poem"),
    ("poem-2", "poets write verses about love and loss"),
]

opts = PreprocessOptions(lowercase=True, stoplist={"the", "a", "in", "and"})
print("tokenize('Solar power, the SUN!') ->",
      tokenize("Solar power, the SUN!", opts))

corpus = build_corpus(DOCS, opts)
print(f"\n{corpus.n_docs} documents, {len(corpus.vocabulary)} distinct terms, "
      f"{corpus.collection_length} tokens")
print("collection probability of 'power':", corpus.collection_prob("power"))

doc = corpus.documents[0]
print(f"\nunsmoothed model of {doc.docno}: p('power') =",
      mle_prob(doc.term_counts, ["power"]))

print("\nDirichlet smoothing pulls unseen terms up from zero:")
for mu in (0.0, 10.0, 1000.0):
    try:
        p = dirichlet_term_prob(0, "turbines", mu, corpus)
    except ValueError as exc:
        p = f"error: {exc}"
    print(f"  mu={mu:>6}: p('turbines' | {doc.docno}) = {p}")

print("\nrendition scores of the text 'solar power' under each document:")
for d in range(corpus.n_docs):
    score = rendition_prob(d, ["solar", "power"], 10.0, corpus)
    print(f"  {corpus.documents[d].docno:7s} {score:.6f}")

top = top_renderers({"solar": 1, "power": 1}, range(corpus.n_docs), 3,
                    corpus=corpus, mu=10.0)
print("\ntop-3 renderers of 'solar power':",
      [corpus.documents[i].docno for i in top.ids()])
