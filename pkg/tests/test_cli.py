import json
import subprocess
import sys


from tropdiv.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reduce_example(capsys, data_dir):
    code, out, _ = run(capsys, "reduce", data_dir / "g0.graph", "--divisor", "2*m0", "--at", "v2")
    assert code == 0
    assert out == "v1 + v2\n"


def test_reduce_certificate_json(capsys, data_dir):
    code, out, _ = run(capsys, "reduce", data_dir / "g0.graph", "--divisor", "2*m0", "--at", "v2", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["reduced"] == "v1 + v2"
    assert rep["certificate"]["output"] == "v1 + v2"


def test_parse_error_exit(capsys, data_dir):
    code, _, err = run(capsys, "reduce", data_dir / "g0.graph", "--divisor", "e0@1/0", "--at", "v2")
    assert code == 2
    assert "column" in err


def test_domain_error_exit(capsys, data_dir):
    code, _, err = run(capsys, "reduce", data_dir / "g0.graph", "--divisor", "e0@9", "--at", "v2")
    assert code == 3
    assert "outside" in err


def test_missing_file_and_bad_claim(capsys, tmp_path):
    assert run(capsys, "rank", tmp_path / "none.graph", "--divisor", "v1")[0] == 2
    assert run(capsys, "verify", "nonsense")[0] == 2


def test_rank_example(capsys, data_dir):
    code, out, _ = run(capsys, "rank", data_dir / "gn.graph", "--n", "2", "--divisor", "v1+v2+2*q1")
    assert code == 0
    assert int(out) == 1


def test_dot_and_emit(capsys, data_dir):
    code, out, _ = run(capsys, "dot", data_dir / "g0.graph")
    assert code == 0
    assert out.count(" -- ") == 3
    assert out.count("shape=circle") == 2
    code, out, _ = run(capsys, "emit", data_dir / "theta.graph")
    assert code == 0
    assert "mark p e1@1" in out


def test_harmonic_check(capsys, data_dir, tmp_path):
    code, out, _ = run(capsys, "harmonic", "check", data_dir / "fold.morphism")
    assert code == 0
    assert "degree: 2" in out
    broken = (data_dir / "fold.morphism").read_text().replace("forward 2", "forward 3", 1)
    path = tmp_path / "broken.morphism"
    path.write_text(broken)
    code, out, _ = run(capsys, "harmonic", "check", path)
    assert code == 1
    assert "verdict: false" in out


def test_harmonic_search_report_dir(capsys, data_dir, tmp_path):
    out_dir = tmp_path / "rep"
    code, out, _ = run(capsys, "harmonic", "search", data_dir / "gn.graph", "--n", "2", "--budget-mods", "1", "--subdiv", "2", "--report-dir", out_dir)
    assert code == 0
    assert "EXHAUSTED_WITHIN_BUDGET" in out
    for name in ("report.txt", "report.json", "graph.png", "counts.png"):
        assert (out_dir / name).exists()
    rep = json.loads((out_dir / "report.json").read_text())
    assert len(rep["details"]["rejections"]) == rep["details"]["candidates"]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("TROPDIV_SEED", "17")
    code, out, _ = run(capsys, "verify", "lemma3", "--json")
    assert code == 0
    assert json.loads(out)["seed"] == 17
    monkeypatch.setenv("TROPDIV_SEED", "x")
    assert run(capsys, "verify", "lemma3")[0] == 2


def test_verify_lemma1(capsys):
    code, out, _ = run(capsys, "verify", "lemma1", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["mode"] == "EXACT"
    assert rep["verdict"] is True
    assert sorted(rep["witnesses"]) == ["e0@1", "e1@3/2", "e2@5/2"]


def test_equal_lengths_are_inconclusive(capsys):
    code, out, _ = run(capsys, "verify", "theorem", "--lengths", "2,2,3", "--budget-mods", "0")
    assert code == 4
    assert "equal_length_boundary" in out


def test_wrd_example(capsys, data_dir):
    code, out, _ = run(capsys, "wrd", data_dir / "gn.graph", "--n", "3", "--r", "1", "--d", "4", "--w", "1")
    assert code == 0
    assert "mode: SAMPLED" in out
    assert "verdict: true" in out


def test_reports_and_figures_are_deterministic(capsys, data_dir, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, out, _ = run(capsys, "clifford", data_dir / "gn.graph", "--n", "2", "--random-points", "0", "--report-dir", d)
        assert code == 0
        outs.append((out, (d / "report.json").read_bytes(), (d / "graph.png").read_bytes()))
    assert outs[0] == outs[1]


def test_console_script_entry(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "tropdiv.cli", "reduce", str(data_dir / "g0.graph"), "--divisor", "2*m1", "--at", "v2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == "v1 + v2\n"
