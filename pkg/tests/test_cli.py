import csv
import io
import json
import subprocess
import sys

import pytest

from treeplication.cli import UsageError, main, parse_multiset, parse_subset, parse_vertex
from treeplication.tree import VertexId


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_encode_decode_roundtrip(tmp_path, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(b"hello world, tree!" * 7)
    cw, back = tmp_path / "cw.trpl", tmp_path / "out.bin"
    rc, out, _ = run(capsys, "encode", "--k", "4", "--input", str(src), "--out", str(cw))
    assert rc == 0 and json.loads(out)["fragments"] == 7
    assert cw.read_bytes()[:4] == b"TRPL"

    rc, out, _ = run(capsys, "decode", "--input", str(cw), "--out", str(back))
    assert rc == 0 and back.read_bytes() == src.read_bytes()
    assert json.loads(out)["xor_chains"] == 0

    rc, out, _ = run(capsys, "decode", "--input", str(cw), "--out", str(back),
                     "--manifest", "1,1 1,2 1,3 2,2")
    assert rc == 0 and back.read_bytes() == src.read_bytes()
    assert json.loads(out)["xor_chains"] == 1


def test_decode_non_decodable_exit_2(tmp_path, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(b"abc")
    cw = tmp_path / "cw.trpl"
    run(capsys, "encode", "--k", "4", "--input", str(src), "--out", str(cw))
    rc, _, err = run(capsys, "decode", "--input", str(cw), "--out", str(tmp_path / "x"),
                     "--manifest", "2,1 2,2 3,1 1,3")
    assert rc == 2 and "NonDecodable" in err


def test_missing_file_exit_1(tmp_path, capsys):
    rc, _, err = run(capsys, "decode", "--input", str(tmp_path / "nope"), "--out", "x")
    assert rc == 1 and "nope" in err


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["optimize", "--k", "4"])
    assert exc.value.code == 1
    rc, _, _ = run(capsys, "optimize", "--k", "6", "--n", "20")
    assert rc in (1, 2)


def test_optimize_json(capsys):
    rc, out, _ = run(capsys, "optimize", "--k", "8", "--n", "20")
    payload = json.loads(out)
    assert rc == 0
    assert payload["counts"] == [16, 2, 1, 1] and payload["explored"] > 0
    assert payload["config"]["n"] == 20


def test_optimize_csv(capsys):
    rc, out, _ = run(capsys, "optimize", "--k", "8", "--n", "20", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rc == 0 and rows[0]["counts"] == "16 2 1 1"
    assert "\r\n" in out


def test_global_flags_before_subcommand(capsys):
    rc, out, _ = run(capsys, "--format", "csv", "optimize", "--k", "8", "--n", "20")
    assert rc == 0 and out.startswith("k,n,counts")


def test_analyze(capsys):
    rc, out, _ = run(capsys, "analyze", "--k", "8", "--target", "0.9")
    payload = json.loads(out)
    assert rc == 0
    assert payload["min_n"] == {"replication": 33, "uniform": 26, "nonuniform": 20}


def test_plan_and_error_payload(capsys):
    rc, out, _ = run(capsys, "plan", "--k", "4", "--subset", "[[1,1],[1,2],[1,3],[2,2]]")
    payload = json.loads(out)
    assert rc == 0 and payload["cost"] == 1
    rc, out, _ = run(capsys, "plan", "--k", "4", "--subset", "2,1 2,2")
    assert rc == 2 and json.loads(out)["error"] == "non-decodable"


def test_cost(capsys):
    rc, out, _ = run(capsys, "cost", "--k", "8", "--probs", "[0.5,0.5,0.5,0.5]")
    assert rc == 0 and {"E", "C", "Q"} <= set(json.loads(out))


def test_health_and_augment(capsys):
    ms = "[[1,3],[2]]"
    rc, out, _ = run(capsys, "health", "--multiset", ms, "--l", "2", "--exact-survival")
    payload = json.loads(out)
    assert rc == 0 and payload["health"] == 1.0
    rc, out, _ = run(capsys, "augment", "--multiset", "[[3,0],[1]]", "--z", "1,1")
    payload = json.loads(out)
    assert rc == 0 and payload["new_vertex"] == [1, 2] and payload["method"] == "generate-from-parent"


def test_simulate_writes_csv(tmp_path, capsys):
    rows = tmp_path / "trials.csv"
    cfg = json.dumps({"mode": "uniform-draw", "k": 8, "n": 26})
    rc, out, _ = run(capsys, "simulate", "--experiment", "decodability", "--config", cfg,
                     "--trials", "2000", "--seed", "3", "--csv", str(rows))
    payload = json.loads(out)
    assert rc == 0 and payload["trials"] == 2000 and payload["config"]["seed"] == 3
    assert len(rows.read_text().splitlines()) == 2001


def test_report_table4(capsys):
    rc, out, _ = run(capsys, "report", "table4")
    payload = json.loads(out)
    assert rc == 0 and payload["pass"] is True and len(payload["rows"]) == 4


def test_parsers():
    assert parse_vertex("2:1") == VertexId(2, 1)
    assert parse_subset("[[1,1],[2,1]]") == [VertexId(1, 1), VertexId(2, 1)]
    m = parse_multiset('{"k": 4, "weights": {"1,1": 2, "3,1": 1}}')
    assert m.n == 3
    with pytest.raises(UsageError):
        parse_vertex("x")


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "treeplication.cli", "optimize", "--k", "4",
                          "--n", "8"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["counts"]
