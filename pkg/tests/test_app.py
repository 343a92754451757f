import json

from hotcache import app
from hotcache.export import SWEEP_COLUMNS


def test_verify_bundled_pair(capsys):
    assert app.main(["hhpda", "verify", "example"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("✓ HHPDA")
    assert "tau_scanned: 56" in out


def test_build_then_verify(tmp_path, capsys):
    path = tmp_path / "pair.json"
    assert app.main(["hhpda", "build", "--design", "ex2-3-8-4-1", "--k2", "2", "--a", "1,2", "-o", str(path)]) == 0
    assert app.main(["hhpda", "verify", "--pair", str(path), "--sample", "10"]) == 0
    assert "sample(10, seed=0)" in capsys.readouterr().out


def test_mutated_pair_fails(tmp_path, capsys):
    data = json.loads(app.hhpda.pair_json(app.hhpda.example_pair()))
    data["Q0"][0][0] = None
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    assert app.main(["hhpda", "verify", str(path), "--format", "json"]) == 1
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["ok"] is False
    assert "A1" in {v["code"] for v in verdict["violations"]}


def test_single_active_set(capsys):
    assert app.main(["hhpda", "verify", "--tau", "(1,1),(2,2),(3,1)"]) == 0
    out = capsys.readouterr().out
    assert "zeta: 1,2,12,7,4,13,3,8,14" in out
    assert app.main(["hhpda", "verify", "--tau", "(1,1),(2,2),(3,1)", "--zeta", "2,1,12,7,4,13,3,8,14"]) == 1


def test_params_json(capsys):
    assert app.main(["hhpda", "params", "--design", "ex2-3-8-4-1", "--k2", "2", "--a", "1,2", "--format", "json"]) == 0
    values = json.loads(capsys.readouterr().out)
    assert values["R1"] == "5/9"
    assert values["M2/N"] == "4/9"
    assert values["Fprime"] == 9
    assert len(values["notes"]) == 2


def test_bad_construction_is_usage_error(capsys):
    assert app.main(["hhpda", "build", "--design", "ex2-3-8-4-1", "--k2", "3", "--a", "1,2"]) == 2
    assert capsys.readouterr().err.startswith("Error:")


def test_design_commands(capsys):
    assert app.main(["design", "verify", "ex2-3-8-4-1"]) == 0
    assert "lambda_2: 3" in capsys.readouterr().out
    assert app.main(["design", "verify", "missing.json"]) == 2


def test_sim_run_json(capsys):
    argv = ["sim", "run", "--active", "(1,1),(2,2),(3,1)", "--demands", "1,2,3", "--format", "json"]
    assert app.main(argv) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["R1_measured"] == "5/9"
    assert report["R2_measured"] == "7/9"


def test_sweep_csv_and_export(tmp_path, capsys):
    db_path = tmp_path / "sweep.sqlite"
    argv = ["sim", "sweep", "--sample", "3", "--packet-bytes", "16", "--format", "csv", "--db", str(db_path)]
    assert app.main(argv) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 4
    assert "Ledger cache hits: 0, misses: 3" in captured.err

    out_csv = tmp_path / "sweep.csv"
    assert app.main(["sim", "export", "--db", str(db_path), "--out", str(out_csv)]) == 0
    assert "Exported 3 sessions" in capsys.readouterr().out
    assert app.main(["sim", "export", "--db", str(tmp_path / "none.sqlite")]) == 2


def test_missing_subcommand():
    assert app.main(["sim"]) == 2
