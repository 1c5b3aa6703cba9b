"""Command-line surface: index, neighbors, cluster, run, eval, sweep.

Exit codes: 0 success, 1 usage error, 2 data error.  The default worker
count comes from PQLM_THREADS; outputs are written atomically.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import baselines
from .clustering import ClusterIndex, build_clusters
from .corpus import (
    Corpus,
    ParseError,
    PreprocessOptions,
    build_corpus,
    parse_lines,
    parse_topics,
    parse_trec,
)
from .drift import DriftTechnique
from .evaluation import Qrels, evaluate_run, format_report, parse_run
from .experiment import SystemSpec, parse_spec
from .lm import NeighborIndex, precompute_neighbors
from .pipeline import RunConfig, format_run_lines, run_retrieval
from .storage import atomic_write

THREADS_ENV = "PQLM_THREADS"

_CONFIG_HELP = """\
system section keys (RunConfig fields) and defaults:
  method         vdoc | mcdoc | mccluster | baseline | rocchio | relevance_model
  alpha          top-renderer spread per round (default 10)
  alpha1         privileged round-1 spread (default: alpha)
  alpha_cluster  cluster spread for mccluster (default 2)
  beta           documents credited per cluster (default 20)
  delta          cluster size (default 40 above 1000 docs, else 10)
  m              re-scaling pool, must exceed alpha (default 2*alpha)
  T              rounds (default 1)
  mu             Dirichlet smoothing parameter (default 2000)
  drift          none | interpolation | truncated_rerank | iterated_truncation |
                 iterated_rerank | iterated_interpolation (default none)
  lambda         interpolation weight in [0,1]
  drift_N        drift cutoff (default: N)
  N              retrieval depth (default 1000)
baseline keys: mu, N.  rocchio keys: k1, t, gamma, N.
relevance_model keys: k1, lambda_r, clip_k, mu, N.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="pqlm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("index",
                       help="ingest documents and persist the corpus index")
    p.add_argument("inputs", nargs="+", help="document files")
    p.add_argument("-o", "--output", required=True, help="index file to write")
    p.add_argument("--format", choices=("trec", "lines"), default="trec")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--stemmer", choices=("none", "porter"), default="none")
    p.add_argument("--stoplist", help="file with one stopword per line")
    p.add_argument("--drop-length-one", action="store_true")

    p = sub.add_parser("neighbors",
                       help="precompute per-document best-renderer lists")
    p.add_argument("--index", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--mu", type=float, default=2000.0)
    p.add_argument("--threads", type=int, default=_default_threads())

    p = sub.add_parser("cluster",
                       help="materialize the overlapping cluster index")
    p.add_argument("--index", required=True)
    p.add_argument("--neighbors", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--delta", type=int, required=True)

    p = sub.add_parser("run",
                       help="execute an experiment spec and evaluate it",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog=_CONFIG_HELP)
    p.add_argument("spec", help="experiment spec file")
    p.add_argument("--threads", type=int, default=_default_threads())

    p = sub.add_parser("eval",
                       help="evaluate TREC run files against qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("runs", nargs="+", help="run files (first one is the baseline)")
    p.add_argument("--depth", type=int, default=1000)

    p = sub.add_parser("sweep",
                       help="vary the round-1 spread and emit a CSV of "
                            "(alpha1, MAP, recall)")
    p.add_argument("spec")
    p.add_argument("--system", required=True, help="system name from the spec")
    p.add_argument("--alpha1", type=int, nargs="+", required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    return parser


def _preprocess_options(args) -> PreprocessOptions:
    stop = frozenset()
    if args.stoplist:
        stop = frozenset(Path(args.stoplist).read_text().split())
    return PreprocessOptions(
        lowercase=not args.no_lowercase,
        stemmer=args.stemmer,
        stoplist=stop,
        drop_length_one=args.drop_length_one,
    )


def _read_documents(paths, fmt: str) -> list[tuple[str, str]]:
    docs: list[tuple[str, str]] = []
    for path in paths:
        with open(path, "rb") as fh:
            data = fh.read()
        docs.extend(parse_trec(data) if fmt == "trec" else parse_lines(data))
    return docs


def cmd_index(args) -> int:
    opts = _preprocess_options(args)
    excluded: list[str] = []
    corpus = build_corpus(_read_documents(args.inputs, args.format), opts, excluded)
    corpus.save(args.output)
    print(f"{corpus.n_docs} documents, {len(corpus.vocabulary)} terms, "
          f"{corpus.collection_length} tokens -> {args.output}")
    if excluded:
        print(f"excluded {len(excluded)} empty documents: {' '.join(excluded)}")
    return 0


def cmd_neighbors(args) -> int:
    corpus = Corpus.load(args.index)
    index = precompute_neighbors(corpus, args.k_max, args.mu, threads=args.threads)
    index.save(args.output)
    print(f"neighbor lists (k_max={index.k_max}, mu={index.mu}) -> {args.output}")
    return 0


def cmd_cluster(args) -> int:
    corpus = Corpus.load(args.index)
    neighbors = NeighborIndex.load(args.neighbors, corpus)
    clusters = build_clusters(corpus, args.delta, neighbors)
    clusters.save(args.output)
    print(f"{len(clusters)} clusters (delta={args.delta}, mu={clusters.mu}) "
          f"-> {args.output}")
    return 0


# -- run / sweep ----------------------------------------------------------


_INT_KEYS = ("alpha", "alpha1", "alpha_cluster", "beta", "delta", "m", "T",
             "N", "k1", "t", "clip_k", "drift_N")
_FLOAT_KEYS = ("mu", "gamma", "lambda", "lambda_r")


def _typed(params: dict[str, str]) -> dict:
    out: dict = {}
    for key, value in params.items():
        if key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        else:
            raise ParseError(f"unknown system parameter {key!r}")
    return out


_BASELINE_KEYS = {
    "baseline": {"mu", "N"},
    "rocchio": {"k1", "t", "gamma", "N"},
    "relevance_model": {"k1", "lambda_r", "clip_k", "mu", "N"},
}


def _make_run_config(method: str, point: dict[str, str]) -> RunConfig:
    raw = dict(point)
    drift_kind = raw.pop("drift", "none")
    params = _typed(raw)
    lambda_ = params.pop("lambda", None)
    drift_n = params.pop("drift_N", None)
    if drift_kind in ("interpolation", "iterated_interpolation"):
        drift = DriftTechnique(drift_kind, lambda_, None)
    elif drift_kind in ("truncated_rerank", "iterated_truncation", "iterated_rerank"):
        drift = DriftTechnique(drift_kind, None,
                               drift_n if drift_n is not None else params.get("N", 1000))
    else:
        drift = DriftTechnique(drift_kind)
    return RunConfig(method=method, drift=drift, **params)


def _load_experiment(spec_path: str):
    spec = parse_spec(Path(spec_path).read_text())
    if spec.index:
        corpus = Corpus.load(_rel(spec_path, spec.index))
    else:
        if not spec.corpus:
            raise ParseError("spec needs either an index or corpus paths")
        opts = PreprocessOptions(
            lowercase=spec.lowercase,
            stemmer=spec.stemmer,
            stoplist=frozenset(
                Path(_rel(spec_path, spec.stoplist)).read_text().split())
            if spec.stoplist else frozenset(),
            drop_length_one=spec.drop_length_one,
        )
        docs = _read_documents([_rel(spec_path, p) for p in spec.corpus], spec.format)
        corpus = build_corpus(docs, opts)
    if not spec.topics:
        raise ParseError("spec has no topics path")
    topics = parse_topics(Path(_rel(spec_path, spec.topics)).read_text())
    qrels = None
    if spec.qrels:
        qrels = Qrels.parse(Path(_rel(spec_path, spec.qrels)).read_text())
    return spec, corpus, topics, qrels


def _rel(spec_path: str, path: str) -> str:
    """Paths inside a spec resolve relative to the spec file."""
    p = Path(path)
    return str(p if p.is_absolute() else Path(spec_path).parent / p)


def _cluster_index_for(spec, spec_path, corpus, config: RunConfig) -> ClusterIndex:
    delta = config.resolved_delta(corpus)
    if spec.clusters:
        index = ClusterIndex.load(_rel(spec_path, spec.clusters), corpus)
        return index
    if spec.neighbors:
        neighbors = NeighborIndex.load(_rel(spec_path, spec.neighbors), corpus,
                                       mu=config.mu)
    else:
        neighbors = precompute_neighbors(corpus, delta, config.mu)
    return build_clusters(corpus, delta, neighbors)


def _system_tag(name: str, point: dict[str, str]) -> str:
    digest = hashlib.sha1(
        ";".join(f"{k}={point[k]}" for k in sorted(point)).encode()
    ).hexdigest()[:8]
    return f"{name}.{digest}"


def _point_label(name: str, point: dict[str, str], varying: list[str]) -> str:
    if not varying:
        return name
    parts = "_".join(f"{k}={point[k]}" for k in varying)
    return f"{name}__{parts}"


def _execute_system(system: SystemSpec, point: dict[str, str], corpus,
                    queries, threads: int, spec, spec_path) -> list[str]:
    """Run every query for one parameter point; returns TREC run lines."""
    method = system.method
    tag = _system_tag(system.name, point)

    if method in ("baseline", "rocchio", "relevance_model"):
        unknown = set(point) - _BASELINE_KEYS[method]
        if unknown:
            raise ParseError(f"system {system.name!r}: invalid parameters "
                             f"for {method}: {', '.join(sorted(unknown))}")
        params = _typed(dict(point))
        n = params.pop("N", 1000)

        def score(query):
            if method == "baseline":
                return baselines.lm_baseline(query, corpus,
                                             params.get("mu", 2000.0), n)
            if method == "rocchio":
                return baselines.rocchio_rank(
                    query, corpus, params.get("k1", 10), params.get("t", 10),
                    params.get("gamma", 1.0), n)
            return baselines.relevance_model_rank(
                query, corpus, params.get("k1", 10),
                params.get("lambda_r", 0.5), params.get("clip_k", 0),
                params.get("mu", 2000.0), n)
    else:
        config = _make_run_config(method, point)
        cluster_index = (_cluster_index_for(spec, spec_path, corpus, config)
                         if method == "mccluster" else None)

        def score(query):
            return run_retrieval(query, config, corpus, cluster_index)

    def one(query):
        return format_run_lines(query.query_id, score(query), corpus, tag)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, queries))
    else:
        chunks = [one(q) for q in queries]
    return [line for chunk in chunks for line in chunk]


def _queries(corpus, topics):
    out = []
    for qid, title in topics:
        q = corpus.preprocess_query(qid, title)
        if not q.terms:
            print(f"skipping query {qid}: empty after preprocessing",
                  file=sys.stderr)
            continue
        out.append(q)
    return out


def cmd_run(args) -> int:
    spec, corpus, topics, qrels = _load_experiment(args.spec)
    queries = _queries(corpus, topics)
    outdir = Path(_rel(args.spec, spec.output))
    outdir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for system in spec.systems:
        grid = system.grid()
        varying = sorted(k for k, v in system.params.items() if len(v) > 1)
        for point in grid:
            label = _point_label(system.name, point, varying)
            lines = _execute_system(system, point, corpus, queries,
                                    args.threads, spec, args.spec)
            run_path = outdir / f"{label}.run"
            atomic_write(run_path, ("\n".join(lines) + "\n").encode())
            print(f"wrote {run_path} ({len(lines)} rows)")
            if qrels is not None:
                run = parse_run("\n".join(lines))
                reports[label] = evaluate_run(run, qrels, _point_depth(point))
    if reports:
        print()
        print(format_report(reports))
    return 0


def _point_depth(point: dict[str, str]) -> int:
    return int(point.get("N", 1000))


def cmd_eval(args) -> int:
    qrels = Qrels.parse(Path(args.qrels).read_text())
    reports = {}
    for path in args.runs:
        run = parse_run(Path(path).read_text())
        reports[Path(path).stem] = evaluate_run(run, qrels, args.depth)
    print(format_report(reports))
    for name, rep in reports.items():
        if rep.excluded:
            print(f"{name}: excluded queries with no relevant docs: "
                  f"{' '.join(rep.excluded)}")
    return 0


def cmd_sweep(args) -> int:
    spec, corpus, topics, qrels = _load_experiment(args.spec)
    if qrels is None:
        raise ParseError("sweep needs qrels in the spec")
    queries = _queries(corpus, topics)
    systems = {s.name: s for s in spec.systems}
    if args.system not in systems:
        raise ParseError(f"system {args.system!r} not found in spec")
    system = systems[args.system]
    grid = system.grid()
    if len(grid) != 1:
        raise ParseError("sweep expects a single-point system; move other "
                         "parameters out of grids")
    if system.method == "baseline":
        raise ParseError("the plain baseline has no round-1 spread to sweep; "
                         "pick an iterative or feedback system")
    # feedback baselines share the round-1 pool size through k1
    knob = "k1" if system.method in ("rocchio", "relevance_model") else "alpha1"
    outdir = Path(_rel(args.spec, spec.output))
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["alpha1,map,recall"]
    for i, alpha1 in enumerate(args.alpha1):
        point = dict(grid[0])
        point[knob] = str(alpha1)
        lines = _execute_system(system, point, corpus, queries, args.threads,
                                spec, args.spec)
        run_path = outdir / f"{i:03d}_{system.name}_alpha1={alpha1}.run"
        atomic_write(run_path, ("\n".join(lines) + "\n").encode())
        report = evaluate_run(parse_run("\n".join(lines)), qrels,
                              _point_depth(point))
        rows.append(f"{alpha1},{report.mean_ap:.6f},{report.recall_micro:.6f}")
    csv_path = outdir / f"sweep_{system.name}.csv"
    atomic_write(csv_path, ("\n".join(rows) + "\n").encode())
    print("\n".join(rows))
    print(f"wrote {csv_path}")
    return 0


_COMMANDS = {
    "index": cmd_index,
    "neighbors": cmd_neighbors,
    "cluster": cmd_cluster,
    "run": cmd_run,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"pqlm: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
