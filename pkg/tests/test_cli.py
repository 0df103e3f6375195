import json

import pytest

from anonmatch.cli import main


@pytest.fixture
def k2_file(tmp_path):
    p = tmp_path / "k2.txt"
    p.write_text("2 1\n0 1\n")
    return p


def test_run_prints_stats(capsys):
    assert main(["run", "--gen", "ring,n=5", "--algo", "a1", "--daemon", "adversarial", "--seed", "3"]) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["converged"] and row["n"] == 5


def test_run_from_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algorithm": "a2", "gen": "complete,n=4", "daemon": "random_subset"}))
    assert main(["run", "--config", str(cfg), "--seed", "7"]) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["algorithm"] == "a2" and row["seed"] == 7


def test_replay_round_trip(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    args = ["run", "--gen", "random_connected,n=9", "--algo", "composed", "--seed", "4"]
    assert main(args + ["--daemon", "subset", "--trace-out", str(trace)]) == 0
    assert main(args + ["--daemon", "replay", "--replay", str(trace)]) == 0
    first, second = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert first["total_moves"] == second["total_moves"]


def test_exit_codes(tmp_path, k2_file):
    assert main(["run", "--gen", "hypercube,n=4"]) == 2
    assert main(["run", "--graph", str(tmp_path / "missing.txt")]) == 2
    assert main(["run", "--gen", "path,n=3", "--daemon", "replay"]) == 2
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"colour": 1}')
    assert main(["run", "--config", str(cfg)]) == 2
    assert main(["run", "--gen", "ring,n=9", "--faults", "all-null", "--max-moves", "2"]) == 4
    trace = tmp_path / "a1.jsonl"
    assert main(["run", "--graph", str(k2_file), "--trace-out", str(trace)]) == 0
    assert main(["run", "--gen", "ring,n=6", "--daemon", "replay", "--replay", str(trace)]) == 5


def test_verify_state(tmp_path, k2_file, capsys):
    good = tmp_path / "good.json"
    good.write_text('{"beta": [1, 1], "link": [[1], [1]], "img": [[1], [1]]}')
    assert main(["verify", "--graph", str(k2_file), "--state", str(good)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"beta": [null, null]}')
    assert main(["verify", "--graph", str(k2_file), "--state", str(bad)]) == 3
    assert "M3=FAIL" in capsys.readouterr().out


def test_verify_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    assert main(["run", "--gen", "star,n=6", "--trace-out", str(trace)]) == 0
    assert main(["verify", "--trace", str(trace)]) == 0
    lines = trace.read_text().splitlines()
    event = json.loads(lines[1])
    event["changes"] = []
    lines[1] = json.dumps(event)
    trace.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--trace", str(trace)]) == 3


def test_modelcheck(capsys):
    assert main(["modelcheck", "--gen", "path,n=3", "--algo", "a1"]) == 0
    assert "closure=ok" in capsys.readouterr().out
    assert main(["modelcheck", "--gen", "complete,n=5", "--max-states", "10"]) == 2


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--n", "3,6", "--trials", "10", "--daemon", "sync", "--csv-out", str(out)]) == 0
    assert out.read_text().startswith("n,policy")
