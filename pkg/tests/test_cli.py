import csv
import io
import json
import subprocess
import sys

import pytest

from groverdb import discrim, grover
from groverdb.cli import main


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "groverdb", *map(str, args)],
        capture_output=True, text=True,
    )


@pytest.fixture
def phone_csv(tmp_path):
    path = tmp_path / "book.csv"
    path.write_text("number,name\n5,A\n5,B\n7,C\n")
    return path


def unique_book(tmp_path, d):
    src = tmp_path / f"book{d}.csv"
    src.write_text("number,name\n" + "".join(f"{i},p{(7 * i + 3) % d}\n" for i in range(d)))
    out = tmp_path / f"book{d}.json"
    assert main(["build", "--fields", f"number:{d},name:{d}", "--input", str(src), "--out", str(out)]) == 0
    return out


def parse_search(text):
    lines = text.splitlines()
    head = dict(kv.split("=") for kv in lines[0][2:].split())
    tail = dict(kv.split("=") for kv in lines[-1][2:].split())
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:-1]))))
    return head, rows, tail


def test_build(phone_csv, tmp_path, capsys):
    out = tmp_path / "db.json"
    assert main(["build", "--fields", "number:8,name:8", "--input", str(phone_csv), "--out", str(out)]) == 0
    assert "records: 3" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert len(doc["records"]) == 3
    assert [f["dim"] for f in doc["fields"]] == [8, 8]


def test_build_duplicate_line(tmp_path):
    src = tmp_path / "dup.csv"
    src.write_text("number,name\n5,A\n7,B\n5,A\n")
    res = run_cli("build", "--fields", "number:8,name:8", "--input", src, "--out", tmp_path / "x.json")
    assert res.returncode != 0
    assert "line 4" in res.stderr


def test_build_overflow(tmp_path):
    src = tmp_path / "many.csv"
    src.write_text("number,name\n" + "".join(f"1,n{i}\n" for i in range(9)))
    res = run_cli("build", "--fields", "number:8,name:8", "--input", src, "--out", tmp_path / "x.json")
    assert res.returncode != 0
    assert "line 10" in res.stderr


def test_build_bad_field_spec(phone_csv, tmp_path):
    assert main(["build", "--fields", "number8", "--input", str(phone_csv), "--out", str(tmp_path / "x")]) == 1


def test_search_n4_always_succeeds(tmp_path, capsys):
    db = unique_book(tmp_path, 4)
    capsys.readouterr()
    assert main(["search", "--db", str(db), "--known", "number=2", "--steps", "auto", "--trials", "1000"]) == 0
    head, rows, tail = parse_search(capsys.readouterr().out)
    assert head == {"N": "4", "K": "1", "omega": "1.0471975511966", "m0": "1", "steps": "1"}
    assert len(rows) == 1000
    assert all(r["verified"] == "1" and r["steps_used"] == "1" and r["oracle_calls"] == "2" for r in rows)
    assert tail["frequency"] == "1"


def test_search_absent_value(phone_csv, tmp_path, capsys):
    db = tmp_path / "db.json"
    main(["build", "--fields", "number:8,name:8", "--input", str(phone_csv), "--out", str(db)])
    capsys.readouterr()
    assert main(["search", "--db", str(db), "--known", "number=99", "--trials", "50"]) == 0
    _, rows, tail = parse_search(capsys.readouterr().out)
    assert tail["verified"] == "0"
    assert all(r["verified"] == "0" for r in rows)


def test_search_errors(tmp_path):
    db = unique_book(tmp_path, 4)
    assert main(["search", "--db", str(db), "--known", "colour=red"]) == 1
    assert main(["search", "--db", str(db), "--known", "number=1", "--unknown", "number"]) == 1
    assert main(["search", "--db", str(tmp_path / "missing.json"), "--known", "number=1"]) == 1
    # table full (dim 4, 4 values) so an unseen value cannot be represented
    assert main(["search", "--db", str(db), "--known", "number=77"]) == 1
    res = run_cli("search", "--db", db, "--known", "number=1", "--steps", "-3")
    assert res.returncode != 0


def test_search_reproducible(tmp_path):
    db = unique_book(tmp_path, 16)
    a = run_cli("search", "--db", db, "--known", "name=p3", "--trials", 200, "--seed", 42)
    b = run_cli("search", "--db", db, "--known", "name=p3", "--trials", 200, "--seed", 42)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_search_explicit_steps(tmp_path, capsys):
    db = unique_book(tmp_path, 16)
    capsys.readouterr()
    main(["search", "--db", str(db), "--known", "number=3", "--steps", "0", "--trials", "5", "--summary-only"])
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2
    assert out[0].endswith("steps=0")


def test_sweep_n100(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--n", "100", "--m-max", "20", "--samples-per-step", "1", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "m,p_grover,gamma0_bound,p_minerr,cos_term,sin_term"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 21
    assert float(rows[8]["gamma0_bound"]) == pytest.approx(0.1016, abs=1e-4)


def test_sweep_n4_crossings(capsys):
    assert main(["sweep", "--n", "4", "--m-max", "3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    for m in (1, 2):
        assert float(rows[m]["gamma0_bound"]) == pytest.approx(1, abs=1e-10)
        assert float(rows[m]["p_minerr"]) == pytest.approx(1, abs=1e-10)


def test_sweep_n2_dependent_states(capsys):
    assert main(["sweep", "--n", "2", "--m-max", "2"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert float(rows[1]["gamma0_bound"]) == 0.0


def test_sweep_grid_and_round_trip(capsys):
    assert main(["sweep", "--n", "50", "--m-max", "12", "--samples-per-step", "4"]) == 0
    text = capsys.readouterr().out
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 49
    p = grover.params(50)
    for r in rows:
        m = float(r["m"])
        assert float(r["p_grover"]) == pytest.approx(grover.success_prob(p, m), abs=1e-12)
        assert float(r["gamma0_bound"]) == pytest.approx(discrim.unamb_bound(50, m), abs=1e-12)
        assert float(r["p_minerr"]) == pytest.approx(discrim.minerr_prob(50, m), abs=1e-12)
        c, s = discrim.unamb_terms(50, m)
        assert (float(r["cos_term"]), float(r["sin_term"])) == (pytest.approx(c, abs=1e-12), pytest.approx(s, abs=1e-12))


def test_sweep_invalid_n():
    assert main(["sweep", "--n", "1", "--m-max", "3"]) == 1


def test_sweep_byte_identical(tmp_path):
    a = run_cli("sweep", "--n", 64, "--m-max", 10, "--samples-per-step", 3)
    b = run_cli("sweep", "--n", 64, "--m-max", 10, "--samples-per-step", 3)
    assert a.returncode == 0 and a.stdout == b.stdout
