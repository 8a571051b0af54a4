import json
import warnings

import pytest
from click.testing import CliRunner

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from ctrie.cli import main
from ctrie.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


def run(*args):
    return CliRunner().invoke(main, list(args))


# -- service ----------------------------------------------------------------


def test_named_trie_round_trip(client):
    assert client.post("/tries", json={"name": "m"}).status_code == 201
    assert client.post("/tries", json={"name": "m"}).status_code == 409
    assert client.post("/tries/m/insert", json={"key": 3, "value": {"a": 1}}).json()["found"]
    assert client.post("/tries/m/lookup", json={"key": 3}).json() == {"found": True, "value": {"a": 1}}
    assert client.post("/tries/m/remove", json={"key": 3}).json()["found"]
    assert client.post("/tries/m/lookup", json={"key": 3}).json() == {"found": False, "value": None}
    assert client.get("/tries").json() == [{"name": "m", "hash": "default"}]
    assert client.delete("/tries/m").status_code == 204
    assert client.post("/tries/m/lookup", json={"key": 3}).status_code == 404


def test_non_scalar_key_rejected(client):
    client.post("/tries", json={"name": "m"})
    assert client.post("/tries/m/lookup", json={"key": [1, 2]}).status_code == 422


def test_load_then_validate_named(client):
    client.post("/tries", json={"name": "m", "hash": "mix"})
    out = client.post("/tries/m/load", json={"ops": 4000, "keys": 256, "threads": 4}).json()
    assert out["errors"] == [] and out["ops"] == 4000
    summary = client.post("/validate", json={"trie": "m"}).json()
    assert summary["violations"] == []
    assert summary["tips"] <= 1


def test_metrics_counts_violations(client):
    out = client.post("/metrics", json={"ops": 2000, "keys": 128}).json()
    assert set(out) == {"n", "t", "l", "r", "d", "tips", "violations"}
    assert out["violations"] == 0


def test_fuzz_endpoint(client):
    assert client.post("/fuzz", json={"ops": 5000, "keys": 512}).json()["ok"]
    assert not client.post("/fuzz", json={"ops": 20000, "keys": 256, "fault": "skip-untomb"}).json()["ok"]


def test_lincheck_submitted_histories(client):
    bad = [
        {"t": 0, "op": "lookup", "k": 1, "v": None, "res": {"found": True, "value": 9}, "inv": 1, "ret": 2},
        {"t": 1, "op": "insert", "k": 1, "v": 9, "res": None, "inv": 3, "ret": 4},
    ]
    out = client.post("/lincheck", json={"histories": [bad]}).json()
    assert out["rejected"] == 1 and out["results"][0]["witness"] == []


def test_bench_errors(client):
    assert client.post("/bench", json={"scenario": "insert", "elements": 0}).status_code == 400
    assert client.post("/bench", json={"scenario": "insert"}).status_code == 422


def test_sweep_rejects_fractional_threads(client):
    body = {"axis": "threads", "points": [1.5], "base": {"scenario": "insert", "elements": 10}}
    assert client.post("/sweep", json=body).status_code == 400


# -- CLI --------------------------------------------------------------------


def test_cli_fuzz():
    res = run("fuzz", "--seed", "3", "--ops", "5000", "--keys", "1024")
    assert res.exit_code == 0
    assert json.loads(res.output)["ok"] is True


def test_cli_fuzz_fault_exits_nonzero():
    res = run("fuzz", "--ops", "20000", "--keys", "256", "--fault", "skip-tomb")
    assert res.exit_code == 1


@pytest.mark.parametrize("cmd", ["validate", "metrics"])
def test_cli_snapshot_single_line(cmd):
    res = run(cmd, "--ops", "3000", "--keys", "256")
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert len(lines) == 1
    assert set(json.loads(lines[0])) == {"n", "t", "l", "r", "d", "tips", "violations"}


def test_cli_lincheck_dump_and_recheck(tmp_path):
    res = run("lincheck", "--threads", "4", "--ops-per-thread", "8", "--keys", "4",
              "--rounds", "3", "--seed", "1", "--dump", str(tmp_path))
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["accepted"] == 3
    files = sorted(tmp_path.glob("*.jsonl"))
    assert len(files) == 3
    for line in files[0].read_text().splitlines():
        e = json.loads(line)
        assert set(e) == {"t", "op", "k", "v", "res", "inv", "ret"}
        assert e["op"] in ("insert", "lookup", "remove")
    res = run("lincheck", "--check", str(files[0]), "--check", str(files[1]))
    assert res.exit_code == 0 and json.loads(res.output)["accepted"] == 2


def test_cli_lincheck_rejects_impossible(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text(
        '{"t":0,"op":"lookup","k":1,"v":null,"res":{"found":true,"value":9},"inv":1,"ret":2}\n'
        '{"t":1,"op":"insert","k":1,"v":9,"res":null,"inv":3,"ret":4}\n'
    )
    res = run("lincheck", "--check", str(p))
    assert res.exit_code == 1
    assert json.loads(res.output)["rejected"] == 1


def test_cli_bench_ok_with_csv(tmp_path):
    out = tmp_path / "b.csv"
    res = run("bench", "--scenario", "mixed", "--structure", "locked-hash", "--elements", "2000",
              "--threads", "2", "--ratio", "2", "--csv", str(out))
    assert res.exit_code == 0, res.output
    row = json.loads(res.output)
    assert row["ops"] == {"insert": 2000, "lookup": 4000}
    assert out.read_text().splitlines()[0] == "scenario,structure,N,P,r,rep,median_ms,min_ms,error"


@pytest.mark.parametrize("args", [
    ["--scenario", "insert", "--elements", "0"],
    ["--scenario", "insert", "--elements", "10", "--reps", "1"],
    ["--scenario", "bogus", "--elements", "10"],
])
def test_cli_bench_config_error_exit_2(args):
    assert run("bench", *args).exit_code == 2


def test_cli_sweep():
    res = run("sweep", "--scenario", "insert", "--elements", "500", "--axis", "threads", "--points", "1,2",
              "--structures", "ctrie,locked-ordered")
    assert res.exit_code == 0, res.output
    lines = res.output.strip().splitlines()
    assert lines[0].startswith("scenario,structure") and len(lines) == 5


def test_cli_named_trie_session():
    # in-process mode keeps state only within one command, so create fresh each time
    assert run("create", "x").exit_code == 0
    assert run("lookup", "x", "1").exit_code == 1


@pytest.fixture
def server_url():
    import socket
    import threading
    import time

    import uvicorn

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="warning"))
    th = threading.Thread(target=server.run, daemon=True)
    th.start()
    deadline = time.time() + 10
    while not server.started and time.time() < deadline:
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    th.join(5)


def test_cli_against_running_server(server_url):
    url = ["--url", server_url]
    assert run(*url, "create", "shared").exit_code == 0
    assert run(*url, "insert", "shared", "7", '"seven"').exit_code == 0
    res = run(*url, "lookup", "shared", "7")
    assert json.loads(res.output) == {"found": True, "value": "seven"}
    assert run(*url, "load", "shared", "--ops", "2000", "--threads", "2").exit_code == 0
    res = run(*url, "validate", "--trie", "shared")
    assert res.exit_code == 0 and json.loads(res.output)["violations"] == []
