"""``ctriectl``: thin client for the ctrie service.

With ``--url`` (or ``CTRIE_URL``) requests go to a running server; without
it each invocation runs the service in-process, so named tries live only
for that one command.
"""
from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path
from typing import Any, Optional

import click
import httpx

EXIT_FAIL = 1
EXIT_CONFIG = 2


class Client:
    def __init__(self, url: Optional[str]) -> None:
        if url:
            self._http = httpx.Client(base_url=url, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

                from .service import create_app
            self._http = TestClient(create_app())

    def call(self, method: str, path: str, body: Any = None) -> Any:
        try:
            resp = self._http.request(method, path, json=body)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"cannot reach service: {exc}") from None
        if resp.status_code in (400, 422):
            _fail(_detail(resp), EXIT_CONFIG)
        if resp.status_code >= 300:
            _fail(_detail(resp), EXIT_FAIL)
        return resp.json() if resp.content else None


def _detail(resp: httpx.Response) -> str:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        return resp.text
    if isinstance(detail, list):
        return "; ".join(f"{'.'.join(map(str, d.get('loc', [])))}: {d.get('msg')}" for d in detail)
    return str(detail)


def _fail(msg: str, code: int) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _emit(obj: Any) -> None:
    click.echo(json.dumps(obj, separators=(",", ":")))


def _parse_scalar(text: str) -> Any:
    """JSON scalars pass through (``3``, ``true``, ``"3"``); anything else is a string."""
    try:
        val = json.loads(text)
    except ValueError:
        return text
    if isinstance(val, (list, dict)) or val is None:
        return text
    return val


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except ValueError:
        return text


@click.group()
@click.option("--url", envvar="CTRIE_URL", default=None, help="Service base URL; in-process when omitted.")
@click.pass_context
def main(ctx: click.Context, url: Optional[str]) -> None:
    """Concurrent hash trie: validation, testing harness and benchmarks."""
    ctx.obj = url


def _client(ctx: click.Context) -> Client:
    return Client(ctx.obj)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("ctrie.service:app", host=host, port=port)


# -- named tries ------------------------------------------------------------


@main.command()
@click.argument("name")
@click.option("--hash", "hash_name", type=click.Choice(["default", "mix"]), default="default")
@click.pass_context
def create(ctx: click.Context, name: str, hash_name: str) -> None:
    """Create a named trie."""
    _emit(_client(ctx).call("POST", "/tries", {"name": name, "hash": hash_name}))


@main.command("list")
@click.pass_context
def list_(ctx: click.Context) -> None:
    """List named tries."""
    _emit(_client(ctx).call("GET", "/tries"))


@main.command()
@click.argument("name")
@click.argument("key")
@click.argument("value")
@click.pass_context
def insert(ctx: click.Context, name: str, key: str, value: str) -> None:
    """Bind KEY to VALUE (both parsed as JSON when possible)."""
    _emit(_client(ctx).call("POST", f"/tries/{name}/insert", {"key": _parse_scalar(key), "value": _parse_value(value)}))


@main.command()
@click.argument("name")
@click.argument("key")
@click.pass_context
def lookup(ctx: click.Context, name: str, key: str) -> None:
    _emit(_client(ctx).call("POST", f"/tries/{name}/lookup", {"key": _parse_scalar(key)}))


@main.command()
@click.argument("name")
@click.argument("key")
@click.pass_context
def remove(ctx: click.Context, name: str, key: str) -> None:
    _emit(_client(ctx).call("POST", f"/tries/{name}/remove", {"key": _parse_scalar(key)}))


@main.command()
@click.argument("name")
@click.option("--ops", default=10_000, show_default=True)
@click.option("--keys", default=1024, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def load(ctx: click.Context, name: str, ops: int, keys: int, threads: int, seed: int) -> None:
    """Apply random operations to a named trie."""
    _emit(_client(ctx).call("POST", f"/tries/{name}/load",
                            {"ops": ops, "keys": keys, "threads": threads, "seed": seed}))


# -- snapshot validation ----------------------------------------------------


def _snapshot_options(f):
    f = click.option("--seed", default=0, show_default=True, help="Seed of the random build.")(f)
    f = click.option("--keys", default=1024, show_default=True, help="Key space of the random build.")(f)
    f = click.option("--ops", default=10_000, show_default=True, help="Random ops used to build a trie.")(f)
    f = click.option("--trie", default=None, help="Check this named trie instead of building one.")(f)
    return f


@main.command()
@_snapshot_options
@click.pass_context
def validate(ctx: click.Context, trie: Optional[str], ops: int, keys: int, seed: int) -> None:
    """Check structural invariants; exit 1 on any violation."""
    out = _client(ctx).call("POST", "/validate", {"trie": trie, "ops": ops, "keys": keys, "seed": seed})
    _emit(out)
    if out["violations"]:
        sys.exit(EXIT_FAIL)


@main.command()
@_snapshot_options
@click.pass_context
def metrics(ctx: click.Context, trie: Optional[str], ops: int, keys: int, seed: int) -> None:
    """Print state metrics, tip count and the number of violations."""
    out = _client(ctx).call("POST", "/metrics", {"trie": trie, "ops": ops, "keys": keys, "seed": seed})
    _emit(out)
    if out["violations"]:
        sys.exit(EXIT_FAIL)


# -- harness ----------------------------------------------------------------


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--ops", default=100_000, show_default=True)
@click.option("--keys", default=1 << 14, show_default=True)
@click.option("--fault", type=click.Choice(["skip-tomb", "skip-untomb"]), default=None,
              help="Run a deliberately broken build instead.")
@click.pass_context
def fuzz(ctx: click.Context, seed: int, ops: int, keys: int, fault: Optional[str]) -> None:
    """Differential fuzz against a model map; exit 1 on divergence."""
    out = _client(ctx).call("POST", "/fuzz", {"seed": seed, "ops": ops, "keys": keys, "fault": fault})
    _emit(out)
    if not out["ok"]:
        sys.exit(EXIT_FAIL)


def _write_jsonl(path: Path, events: list[dict[str, Any]]) -> None:
    with path.open("w") as fp:
        for e in events:
            fp.write(json.dumps(e, separators=(",", ":")) + "\n")


def _read_jsonl(path: Path) -> list[dict[str, Any]]:
    try:
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    except ValueError as exc:
        _fail(f"{path}: {exc}", EXIT_CONFIG)
        raise  # unreachable


@main.command()
@click.option("--threads", default=4, show_default=True)
@click.option("--ops-per-thread", default=8, show_default=True)
@click.option("--keys", default=4, show_default=True)
@click.option("--rounds", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dump", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Directory receiving one JSON Lines history per round.")
@click.option("--check", "check_files", multiple=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Check existing JSON Lines histories instead of recording new ones.")
@click.pass_context
def lincheck(ctx: click.Context, threads: int, ops_per_thread: int, keys: int, rounds: int, seed: int,
             dump: Optional[Path], check_files: tuple[Path, ...]) -> None:
    """Record concurrent histories and check them for linearizability;
    exit 1 if any is rejected."""
    body: dict[str, Any] = {"threads": threads, "ops_per_thread": ops_per_thread, "keys": keys,
                            "rounds": rounds, "seed": seed, "return_histories": dump is not None}
    if check_files:
        body["histories"] = [_read_jsonl(p) for p in check_files]
    out = _client(ctx).call("POST", "/lincheck", body)
    histories = out.pop("histories", None)
    if dump is not None and histories is not None:
        dump.mkdir(parents=True, exist_ok=True)
        for i, h in enumerate(histories):
            _write_jsonl(dump / f"history-{i:04d}.jsonl", h)
    bad = [r for r in out["results"] if not r["accepted"]]
    _emit({"rounds": out["rounds"], "accepted": out["accepted"], "rejected": out["rejected"],
           "errors": out["errors"], "failures": bad})
    if bad:
        sys.exit(EXIT_FAIL)


@main.command()
@click.option("--paused", default=1, show_default=True)
@click.option("--active", default=3, show_default=True)
@click.option("--budget", default=10_000, show_default=True)
@click.option("--timeout", default=30.0, show_default=True)
@click.option("--structure", type=click.Choice(["ctrie", "locked-hash", "locked-ordered"]), default="ctrie")
@click.pass_context
def progress(ctx: click.Context, paused: int, active: int, budget: int, timeout: float, structure: str) -> None:
    """Progress smoke test with threads parked before their CAS; exit 1 on failure."""
    out = _client(ctx).call("POST", "/progress", {"paused": paused, "active": active, "budget": budget,
                                                  "timeout": timeout, "structure": structure})
    _emit(out)
    if not out["passed"]:
        sys.exit(EXIT_FAIL)


# -- benchmarks -------------------------------------------------------------


def _bench_options(f):
    f = click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None)(f)
    f = click.option("--seed", default=0, show_default=True)(f)
    f = click.option("--warmup", default=1, show_default=True)(f)
    f = click.option("--reps", default=3, show_default=True)(f)
    f = click.option("--ratio", default=0.0, show_default=True)(f)
    f = click.option("--threads", default=1, show_default=True)(f)
    f = click.option("--elements", type=int, required=True)(f)
    f = click.option("--structure", type=click.Choice(["ctrie", "locked-hash", "locked-ordered"]), default="ctrie")(f)
    f = click.option("--scenario", type=click.Choice(["insert", "remove", "lookup", "mixed"]), required=True)(f)
    return f


def _bench_body(scenario, structure, elements, threads, ratio, reps, warmup, seed) -> dict[str, Any]:
    return {"scenario": scenario, "structure": structure, "elements": elements, "threads": threads,
            "ratio": ratio, "repetitions": reps, "warmup": warmup, "seed": seed}


@main.command()
@_bench_options
@click.pass_context
def bench(ctx: click.Context, scenario, structure, elements, threads, ratio, reps, warmup, seed,
          csv_path: Optional[Path]) -> None:
    """Time one scenario; exit 2 on a bad configuration."""
    out = _client(ctx).call("POST", "/bench", _bench_body(scenario, structure, elements, threads,
                                                          ratio, reps, warmup, seed))
    if csv_path is not None:
        csv_path.write_text(out["csv"])
    out.pop("csv")
    _emit(out)


@main.command("sweep")
@_bench_options
@click.option("--axis", type=click.Choice(["elements", "threads", "ratio"]), required=True)
@click.option("--points", required=True, help="Comma-separated values for the swept axis.")
@click.option("--structures", default=None, help="Comma-separated structures; defaults to --structure.")
@click.pass_context
def sweep_cmd(ctx: click.Context, scenario, structure, elements, threads, ratio, reps, warmup, seed,
              csv_path: Optional[Path], axis: str, points: str, structures: Optional[str]) -> None:
    """Run a scenario over several points of one axis and print CSV."""
    try:
        pts = [float(p) for p in points.split(",") if p.strip()]
    except ValueError:
        _fail(f"bad --points {points!r}", EXIT_CONFIG)
    body = {"axis": axis, "points": pts,
            "base": _bench_body(scenario, structure, elements, threads, ratio, reps, warmup, seed),
            "structures": structures.split(",") if structures else None}
    out = _client(ctx).call("POST", "/sweep", body)
    if csv_path is not None:
        csv_path.write_text(out["csv"])
    click.echo(out["csv"], nl=False)
    if any(r["error"] for r in out["rows"]):
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":
    main()
