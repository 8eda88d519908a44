import pytest

from propclust.bench import RESULT_HEADER, read_results
from propclust.cli import main
from propclust.fileio import read_clustering


@pytest.fixture
def incompat(tmp_path):
    path = tmp_path / "inc.txt"
    assert main(["fixture", "incompatibility", "--n", "12", "--k", "2", "--output", str(path)]) == 0
    return path


def test_fixture_then_cluster_then_audit(tmp_path, incompat, capsys):
    out = tmp_path / "c.txt"
    assert main(["cluster", "--input", str(incompat), "--algo", "greedy-capture", "--output", str(out)]) == 0
    C = read_clustering(out, 2)
    assert C.n == 12
    rep = tmp_path / "r.csv"
    assert main(["audit", "--input", str(incompat), "--clustering", str(out), "--kind", "core", "--output", str(rep)]) == 0
    lines = rep.read_text().splitlines()
    assert lines[0].startswith("theta") and lines[1].startswith("1.0,")


def test_audit_interval_prints_bounds(tmp_path, incompat, capsys):
    out = tmp_path / "c.txt"
    main(["cluster", "--input", str(incompat), "--algo", "smallest-diameter", "--output", str(out)])
    code = main(["audit", "--input", str(incompat), "--clustering", str(out), "--audit-mode", "interval", "--loss", "maximum"])
    assert code == 0
    assert "fjr interval" in capsys.readouterr().err


def test_cluster_kmeans_on_embedded_points(tmp_path):
    pts = tmp_path / "p.txt"
    assert main(["fixture", "incompatibility", "--embed", "1e6", "--output", str(pts)]) == 0
    out = tmp_path / "c.txt"
    assert main(["cluster", "--input", str(pts), "--algo", "kmeans-pp", "--seed", "3", "--output", str(out)]) == 0
    assert read_clustering(out, 2).n == 12


def test_cluster_csv_input(tmp_path):
    csv = tmp_path / "d.csv"
    csv.write_text("a,b,w\n0,0,1\n0,1,1\n9,9,1\n9,8,1\n")
    out = tmp_path / "c.txt"
    assert main(["cluster", "--input", str(csv), "--weight-column", "w", "--k", "2", "--algo", "kmedoids", "--output", str(out)]) == 0
    assert sorted(read_clustering(out, 2).canonical()) == [(0, 1), (2, 3)]


def test_experiment_writes_results_and_meta(tmp_path):
    out = tmp_path / "res.csv"
    argv = ["experiment", "--k", "2", "--trials", "1", "--sample-size", "8", "--algo", "greedy-capture", "--loss", "maximum", "--output", str(out)]
    assert main(argv) == 0
    rows = read_results(out)
    assert rows and all(r.algorithm == "greedy-capture" for r in rows)
    assert "sample_size = 8" in (tmp_path / "res.csv.meta").read_text()


def test_experiment_zero_trials(tmp_path):
    out = tmp_path / "res.csv"
    assert main(["experiment", "--trials", "0", "--output", str(out)]) == 0
    assert out.read_text() == ",".join(RESULT_HEADER) + "\n"


def test_errors_return_code_two(tmp_path, capsys):
    assert main(["cluster", "--input", str(tmp_path / "missing.txt"), "--k", "2"]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n0 x\nx 0\n")
    assert main(["cluster", "--input", str(bad)]) == 2
    assert main(["experiment", "--k", "99", "--trials", "1"]) == 2
