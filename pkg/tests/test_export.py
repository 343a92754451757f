import csv
import io

from hotcache import export, ledger, sim


def test_sweep_row_values(example_pair, worked_tau, small_library):
    report = sim.run_session(example_pair, small_library, worked_tau, [1, 2, 3])
    buffer = io.StringIO()
    assert export.write_sweep([report], buffer) == 1

    buffer.seek(0)
    reader = csv.DictReader(buffer)
    assert reader.fieldnames == export.SWEEP_COLUMNS
    row = next(reader)
    assert row["tau"] == "(1,1),(2,2),(3,1)"
    assert row["strategy"] == "prefer-mirror-star"
    assert row["R1_measured"] == row["R1_theory"] == "5/9"
    assert row["R2_measured"] == row["R2_theory"] == "7/9"
    assert row["r2_per_mirror"] == "1:7/9;2:7/9;3:7/9;4:0"
    assert row["decode_ok"] == "true"
    assert row["bytes_server"] == "80"
    assert row["bytes_mirrors"] == "336"
    assert row["demands"] == "1,2,3"


def test_export_ledger(tmp_path, example_pair):
    db_path = str(tmp_path / "sweep.sqlite")
    out_csv = tmp_path / "sweep.csv"
    reports, _ = ledger.run_sweep_cached(example_pair, 4, 16, db_path, taus=3, threads=1, progress=False)

    assert export.export_ledger(db_path, str(out_csv)) == 3
    with open(out_csv, newline='', encoding='utf-8') as handle:
        rows = list(csv.DictReader(handle))
    assert [row["tau"] for row in rows] == [export.report_row(r)["tau"] for r in reports]
    assert all(row["decode_ok"] == "true" for row in rows)

    assert export.export_ledger(db_path, str(out_csv), digest="0" * 64) == 0
