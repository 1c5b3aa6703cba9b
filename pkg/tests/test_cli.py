import re
from pathlib import Path

import pytest

from pqlm.cli import main
from pqlm.evaluation import Qrels, evaluate_run, parse_run

DATA = Path(__file__).parent / "data"


def write_spec(tmp_path, body: str) -> Path:
    spec = tmp_path / "exp.cfg"
    spec.write_text(body)
    return spec


def baseline_spec(tmp_path, extra_systems: str = "") -> Path:
    return write_spec(tmp_path, f"""\
corpus = {DATA / 'micro.trec'}
topics = {DATA / 'micro_topics.txt'}
qrels = {DATA / 'micro.qrels'}
output = out

[system]
name = baseline
method = baseline
mu = 2000
N = 1000
{extra_systems}""")


class TestIndex:
    def test_summary_and_determinism(self, tmp_path, capsys):
        doc = tmp_path / "two.trec"
        doc.write_text("<DOC><DOCNO>A</DOCNO><TEXT>x y</TEXT></DOC>"
                       "<DOC><DOCNO>B</DOCNO><TEXT>y z</TEXT></DOC>")
        out = tmp_path / "index.json"
        assert main(["index", str(doc), "-o", str(out)]) == 0
        assert "2 documents" in capsys.readouterr().out
        first = out.read_bytes()
        assert main(["index", str(doc), "-o", str(out)]) == 0
        assert out.read_bytes() == first

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        missing = tmp_path / "nope.trec"
        code = main(["index", str(missing), "-o", str(tmp_path / "i.json")])
        assert code == 2
        assert "nope.trec" in capsys.readouterr().err

    def test_duplicate_docno_is_data_error(self, tmp_path, capsys):
        doc = tmp_path / "dup.trec"
        doc.write_text("<DOC><DOCNO>A</DOCNO><TEXT>x</TEXT></DOC>"
                       "<DOC><DOCNO>A</DOCNO><TEXT>y</TEXT></DOC>")
        assert main(["index", str(doc), "-o", str(tmp_path / "i.json")]) == 2

    def test_usage_error_exit_code(self, capsys):
        assert main(["index"]) == 1
        assert main(["frobnicate"]) == 1

    def test_lines_format(self, tmp_path, capsys):
        doc = tmp_path / "docs.txt"
        doc.write_text("solar power\nwind power\n")
        out = tmp_path / "index.json"
        assert main(["index", str(doc), "-o", str(out), "--format", "lines"]) == 0
        assert "2 documents" in capsys.readouterr().out
        from pqlm import Corpus

        corpus = Corpus.load(out)
        assert [d.docno for d in corpus.documents] == ["L0", "L1"]


class TestArtifactCommands:
    def test_neighbors_then_cluster(self, tmp_path, capsys):
        doc = tmp_path / "docs.trec"
        doc.write_text("".join(
            f"<DOC><DOCNO>D{i}</DOCNO><TEXT>{'x ' * (i + 1)}y</TEXT></DOC>"
            for i in range(4)))
        index = tmp_path / "index.json"
        nbrs = tmp_path / "nbrs.json"
        clusters = tmp_path / "clusters.json"
        assert main(["index", str(doc), "-o", str(index)]) == 0
        assert main(["neighbors", "--index", str(index), "-o", str(nbrs),
                     "--k-max", "2", "--mu", "5"]) == 0
        assert main(["cluster", "--index", str(index), "--neighbors",
                     str(nbrs), "-o", str(clusters), "--delta", "2"]) == 0
        out = capsys.readouterr().out
        assert "4 clusters" in out

    def test_cluster_delta_beyond_kmax(self, tmp_path, capsys):
        doc = tmp_path / "docs.trec"
        doc.write_text("<DOC><DOCNO>A</DOCNO><TEXT>x</TEXT></DOC>"
                       "<DOC><DOCNO>B</DOCNO><TEXT>x y</TEXT></DOC>")
        index = tmp_path / "i.json"
        nbrs = tmp_path / "n.json"
        main(["index", str(doc), "-o", str(index)])
        main(["neighbors", "--index", str(index), "-o", str(nbrs),
              "--k-max", "1", "--mu", "5"])
        assert main(["cluster", "--index", str(index), "--neighbors",
                     str(nbrs), "-o", str(tmp_path / "c.json"),
                     "--delta", "2"]) == 2


class TestRun:
    def test_baseline_map_matches_recomputation(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path)
        assert main(["run", str(spec)]) == 0
        out = capsys.readouterr().out
        run_path = tmp_path / "out" / "baseline.run"
        assert run_path.exists()
        report = evaluate_run(parse_run(run_path.read_text()),
                              Qrels.parse((DATA / "micro.qrels").read_text()),
                              1000)
        assert f"{report.mean_ap * 100:.2f}%" in out
        assert f"{report.recall_micro * 100:.2f}%" in out

    def test_degenerate_mcdoc_matches_baseline_ranking(self, tmp_path):
        spec = baseline_spec(tmp_path, """
[system]
name = degenerate
method = mcdoc
alpha = 2
alpha1 = 8
m = 9
T = 1
mu = 2000
N = 1000
""")
        assert main(["run", str(spec)]) == 0

        def projection(path):
            return [tuple(line.split()[:4]) for line in
                    path.read_text().splitlines()]

        assert projection(tmp_path / "out" / "baseline.run") == \
            projection(tmp_path / "out" / "degenerate.run")

    def test_grid_produces_one_run_per_point(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path, """
[system]
name = vd
method = vdoc
alpha = 2 3
T = 1
mu = 2000
""")
        assert main(["run", str(spec)]) == 0
        names = sorted(p.name for p in (tmp_path / "out").glob("vd__*.run"))
        assert names == ["vd__alpha=2.run", "vd__alpha=3.run"]

    def test_mccluster_and_drift_via_spec(self, tmp_path):
        spec = baseline_spec(tmp_path, """
[system]
name = clustered
method = mccluster
alpha = 1
alpha1 = 4
alpha_cluster = 2
beta = 3
delta = 3
m = 2
T = 2
mu = 2000
drift = interpolation
lambda = 0.5
N = 1000
""")
        assert main(["run", str(spec)]) == 0
        assert (tmp_path / "out" / "clustered.run").exists()

    def test_invalid_grid_value_is_data_error(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path, """
[system]
name = bad
method = mcdoc
alpha = 0
""")
        assert main(["run", str(spec)]) == 2

    def test_unknown_parameter_is_data_error(self, tmp_path):
        spec = baseline_spec(tmp_path, """
[system]
name = bad
method = baseline
bogus = 3
""")
        assert main(["run", str(spec)]) == 2


class TestDeterminism:
    def test_byte_identical_across_invocations_and_threads(self, tmp_path):
        spec = baseline_spec(tmp_path, """
[system]
name = iter
method = mcdoc
alpha = 3
alpha1 = 5
m = 6
T = 2
mu = 2000
drift = iterated_truncation
drift_N = 6
""")
        outputs = []
        for threads in ("1", "1", "4"):
            assert main(["run", str(spec), "--threads", threads]) == 0
            outputs.append({
                p.name: p.read_bytes()
                for p in sorted((tmp_path / "out").glob("*.run"))
            })
        assert outputs[0] == outputs[1] == outputs[2]


class TestEvalCommand:
    def test_eval_prints_table(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path)
        main(["run", str(spec)])
        capsys.readouterr()
        run_path = tmp_path / "out" / "baseline.run"
        assert main(["eval", "--qrels", str(DATA / "micro.qrels"),
                     str(run_path)]) == 0
        out = capsys.readouterr().out
        assert "prec" in out and "recall" in out and "baseline" in out


class TestSweep:
    def test_alpha1_sweep_emits_csv(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path, """
[system]
name = sweepme
method = mcdoc
alpha = 2
m = 9
T = 1
mu = 2000
""")
        assert main(["sweep", str(spec), "--system", "sweepme",
                     "--alpha1", "2", "4", "8"]) == 0
        csv_path = tmp_path / "out" / "sweep_sweepme.csv"
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "alpha1,map,recall"
        assert len(lines) == 4
        assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "4", "8"]
        run_names = sorted(p.name for p in (tmp_path / "out").glob("*_sweepme_*.run"))
        assert run_names == [
            "000_sweepme_alpha1=2.run",
            "001_sweepme_alpha1=4.run",
            "002_sweepme_alpha1=8.run",
        ]

    def test_unknown_system(self, tmp_path):
        spec = baseline_spec(tmp_path)
        assert main(["sweep", str(spec), "--system", "nope",
                     "--alpha1", "2"]) == 2

    def test_plain_baseline_cannot_sweep(self, tmp_path, capsys):
        spec = baseline_spec(tmp_path)
        assert main(["sweep", str(spec), "--system", "baseline",
                     "--alpha1", "2"]) == 2
        assert "no round-1 spread" in capsys.readouterr().err

    def test_feedback_baseline_sweeps_k1(self, tmp_path):
        spec = baseline_spec(tmp_path, """
[system]
name = roc
method = rocchio
t = 2
gamma = 0.5
""")
        assert main(["sweep", str(spec), "--system", "roc",
                     "--alpha1", "1", "3"]) == 0
        lines = (tmp_path / "out" / "sweep_roc.csv").read_text().splitlines()
        assert len(lines) == 3


class TestThreadsEnvVar:
    def test_default_worker_count_from_environment(self, monkeypatch):
        from pqlm.cli import _default_threads

        monkeypatch.setenv("PQLM_THREADS", "6")
        assert _default_threads() == 6
        monkeypatch.setenv("PQLM_THREADS", "not-a-number")
        assert _default_threads() == 1
        monkeypatch.delenv("PQLM_THREADS")
        assert _default_threads() == 1


class TestConsoleScript:
    def test_entry_point_runs(self):
        import subprocess
        import sys

        proc = subprocess.run([sys.executable, "-m", "pqlm.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        for sub in ("index", "cluster", "neighbors", "run", "eval", "sweep"):
            assert sub in proc.stdout


class TestHelp:
    def test_run_help_lists_every_config_field(self, capsys):
        assert main(["run", "--help"]) == 0
        out = capsys.readouterr().out
        for field in ("method", "alpha", "alpha1", "alpha_cluster", "beta",
                      "delta", "m", "T", "mu", "drift", "lambda", "N"):
            assert re.search(rf"\b{field}\b", out), field
        assert "2000" in out and "1000" in out
