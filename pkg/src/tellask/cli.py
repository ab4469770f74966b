"""Command-line front end.

Every verb is a thin client of the HTTP service: by default requests run
against an in-process app instance, --server pointing the same calls at a
remote one. Exit codes: 0 success, 1 runtime failure, 2 usage or parse
error.
"""

from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

from .errors import ConfigError
from .models.graph_paths import parse_edges


def _client(server: str | None) -> httpx.AsyncClient:
    if server:
        return httpx.AsyncClient(base_url=server.rstrip("/"), timeout=None)
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.AsyncClient(transport=transport, base_url="http://tellask.local", timeout=None)


def _fail_http(status: int, body: bytes):
    """Translate an error response into the documented exit codes."""
    message = body.decode("utf-8", "replace")
    try:
        detail = json.loads(message).get("detail")
        if isinstance(detail, dict) and "message" in detail:
            message = detail["message"]
        elif detail is not None:
            message = json.dumps(detail)
    except ValueError:
        pass
    click.echo(f"error: {message}", err=True)
    sys.exit(2 if status in (400, 422) else 1)


def _post(server: str | None, path: str, payload: dict) -> dict:
    async def go():
        async with _client(server) as client:
            resp = await client.post(path, json=payload)
            if resp.status_code != 200:
                _fail_http(resp.status_code, resp.content)
            return resp.json()

    try:
        return asyncio.run(go())
    except httpx.HTTPError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise click.UsageError(f"{what} wants comma-separated integers, got {text!r}")


@click.group()
@click.option("--server", metavar="URL", default=None, help="Talk to a running service instead of in-process.")
@click.pass_context
def main(ctx, server):
    """Run timed constraint specs and the bundled models."""
    ctx.obj = server


@main.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--units", type=click.IntRange(min=1), required=True, help="Time units to simulate.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--input", "script_file", type=click.Path(exists=True, dir_okay=False), help="Input script (JSON lines).")
@click.option("--args", "main_args", default="", help="Integer arguments for main, comma separated.")
@click.option("--fixed-unit-ms", type=click.IntRange(min=0), default=None, help="Stretch every unit to this wall time.")
@click.option("--timing", is_flag=True, help="Add per-unit elapsed_us to the trace.")
@click.pass_obj
def run(server, spec_file, units, seed, script_file, main_args, fixed_unit_ms, timing):
    """Simulate SPEC_FILE, one JSON line per time unit on stdout."""
    with open(spec_file, encoding="utf-8") as fh:
        source = fh.read()
    script = []
    if script_file:
        with open(script_file, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    script.append(json.loads(line))
                except ValueError:
                    raise click.UsageError(f"{script_file}:{line_no}: not valid JSON")
    payload = {
        "source": source,
        "units": units,
        "seed": seed,
        "args": _ints(main_args, "--args"),
        "script": script,
        "fixed_unit_ms": fixed_unit_ms,
        "timing": timing,
    }

    async def go() -> int:
        code = 0
        async with _client(server) as client:
            async with client.stream("POST", "/run", json=payload) as resp:
                if resp.status_code != 200:
                    _fail_http(resp.status_code, await resp.aread())
                async for line in resp.aiter_lines():
                    if not line:
                        continue
                    obj = json.loads(line)
                    if "tu" in obj and "error" not in obj and "warning" not in obj:
                        click.echo(line)
                        sys.stdout.flush()
                    elif "error" in obj:
                        click.echo(line)
                        sys.stdout.flush()
                        click.echo(f"error: {obj['error']} (tu {obj.get('tu', '?')})", err=True)
                        code = 1
                    else:
                        # seed/units header and overrun warnings go to stderr so
                        # stdout stays one record per unit
                        click.echo(line, err=True)
        return code

    try:
        code = asyncio.run(go())
    except httpx.HTTPError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(code)


@main.command()
@click.option("--input", "symbols", required=True, help='Symbol sequence, e.g. "60,62,62".')
@click.option("--dot", "dot_file", type=click.Path(dir_okay=False, writable=True), help="Also write a DOT graph.")
@click.pass_obj
def fo(server, symbols, dot_file):
    """Learn a factor oracle and print its link table."""
    data = _post(server, "/fo", {"symbols": _ints(symbols, "--input")})
    click.echo(data["table"], nl=False)
    if dot_file:
        with open(dot_file, "w", encoding="utf-8") as fh:
            fh.write(data["dot"])
        click.echo(f"wrote {dot_file}", err=True)


@main.command("graph-path")
@click.option("--edges", "edges_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--from", "source", type=click.IntRange(min=0), required=True)
@click.option("--to", "target", type=click.IntRange(min=0), required=True)
@click.pass_obj
def graph_path(server, edges_file, source, target):
    """Find one directed path between two vertices."""
    with open(edges_file, encoding="utf-8") as fh:
        try:
            edges = parse_edges(fh.read())
        except (ValueError, ConfigError) as exc:
            raise click.UsageError(f"{edges_file}: {exc}")
    data = _post(server, "/graph-path", {"edges": [list(e) for e in edges], "source": source, "target": target})
    if data["found"]:
        click.echo(" -> ".join(str(v) for v in data["path"]))
    else:
        click.echo(f"no path from {source} to {target}")


@main.command()
@click.option("--pitches", required=True, help='Pitch classes, e.g. "3,10,11".')
@click.option("--k", type=click.IntRange(min=0), required=True, help="Number of inversion edges.")
@click.option("--limit", type=click.IntRange(min=1), default=None, help="Stop after this many solutions.")
@click.option("--json", "as_json", is_flag=True, help="Print machine-readable JSON instead of matrices.")
@click.option("--connected", is_flag=True, help="Keep only solutions whose label graph is connected.")
@click.pass_obj
def knets(server, pitches, k, limit, as_json, connected):
    """Enumerate k-net label matrices for a chord."""
    pcs = _ints(pitches, "--pitches")
    data = _post(
        server, "/knets", {"pitches": pcs, "k": k, "limit": limit, "connected": connected}
    )
    if as_json:
        click.echo(json.dumps({"pitches": pcs, "k": k, "count": data["count"], "solutions": data["solutions"]}))
        return
    for block in data["rendered"]:
        click.echo(block)
    click.echo(f"solutions: {data['count']}")


@main.group()
def bench():
    """Timing benchmarks."""


@bench.command("ccfomi")
@click.option("--processes-per-unit", type=click.IntRange(min=1), default=880, show_default=True)
@click.option("--units", type=click.IntRange(min=1), default=None, help="Override the derived horizon.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_obj
def bench_ccfomi(server, processes_per_unit, units, seed):
    """Time the improviser at a target process load."""
    data = _post(
        server,
        "/bench/ccfomi",
        {"processes_per_unit": processes_per_unit, "units": units, "seed": seed},
    )
    click.echo(f"notes {data['notes']}, units {data['units']}, target {data['processes_target']} processes/unit")
    click.echo(f"scheduled/unit: mean {data['mean_scheduled']:.1f}, max {data['max_scheduled']}")
    click.echo(f"elapsed/unit:   mean {data['mean_elapsed_ms']:.2f} ms, max {data['max_elapsed_ms']:.2f} ms")
    click.echo(f"total:          {data['total_s']:.2f} s")


@main.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def lint(server, spec_file):
    """Static checks: suspicious choice under replication, arity, recursion."""
    with open(spec_file, encoding="utf-8") as fh:
        source = fh.read()
    data = _post(server, "/lint", {"source": source})
    findings = data["findings"]
    if not findings:
        click.echo(f"{spec_file}: clean")
        return
    for f in findings:
        click.echo(f"{spec_file}:{f['line']}:{f['col']}: {f['rule']}: {f['message']}")


if __name__ == "__main__":
    main()
