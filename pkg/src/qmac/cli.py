"""Thin-client CLI: every command talks to the HTTP service API.

Without --server the service app is mounted in-process (no socket), so
commands stay offline and deterministic; with --server the same requests
go to a running instance. Exit codes: 0 success, 1 verification failure or
backend mismatch, 2 usage error, 3 capacity (register too wide for dense
simulation).
"""
from __future__ import annotations

import json
import sys

import click
import httpx

from . import __version__, cost

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


class ServiceClient:
    """Minimal JSON client; in-process unless a server URL is given."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # noisy testclient deprecation
                from starlette.testclient import TestClient

            from .service.app import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        try:
            body = response.json()
        except ValueError:
            body = {"error": "ServiceError", "detail": response.text.strip()}
        if response.status_code == 200:
            return body
        detail = body.get("detail", body)
        error = body.get("error", "")
        if response.status_code == 413:
            code = EXIT_CAPACITY
        elif response.status_code == 422:
            code = EXIT_USAGE
        else:
            code = EXIT_FAILURE
        click.echo(f"error: {error or response.status_code}: {detail}", err=True)
        if error == "BackendMismatchError":
            click.echo(f"dense: {body.get('dense')}", err=True)
            click.echo(f"phase: {body.get('phase')}", err=True)
        sys.exit(code)


def _parse_pairs(pairs: tuple[str, ...]) -> list[tuple[int, int]]:
    out = []
    for chunk in pairs:
        parts = chunk.split(",")
        if len(parts) != 2:
            raise click.UsageError(f"--pairs expects 'x,y', got {chunk!r}")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise click.UsageError(f"--pairs values must be integers, got {chunk!r}")
    return out


def _parse_values(text: str) -> list[int]:
    """Range 'lo:hi' (inclusive) or comma list '2,4,8' or a single value."""
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise click.UsageError(f"bad range {text!r}")
        if hi_i < lo_i:
            raise click.UsageError(f"empty range {text!r}")
        return list(range(lo_i, hi_i + 1))
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise click.UsageError(f"bad value list {text!r}")


def _job_payload(k, z, pairs, n, variant, epsilon, signed) -> dict:
    parsed = _parse_pairs(pairs)
    if n is not None:
        if parsed and len(parsed) != n:
            raise click.UsageError(f"--n {n} but {len(parsed)} pairs given")
        if not parsed:
            parsed = [(0, 0)] * n
    if variant == "approx" and epsilon is None:
        raise click.UsageError("--variant approx requires --epsilon")
    if variant == "exact" and epsilon is not None:
        raise click.UsageError("--epsilon only applies to --variant approx")
    return {
        "k": k,
        "z": z,
        "pairs": parsed,
        "variant": variant,
        "epsilon": epsilon,
        "signed": signed,
    }


def _emit(data, out: str | None, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    else:  # csv: data must be {"columns": [...], "rows": [...]}
        text = cost.rows_to_csv(data["rows"], data["columns"])
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; in-process if omitted.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, server):
    """Hybrid multiply-accumulate circuits: build, simulate, verify, sweep."""
    ctx.obj = ServiceClient(server)


_common = [
    click.option("--k", required=True, type=int, help="Register width in bits."),
    click.option("--z", default=0, type=int, help="Initial accumulator."),
    click.option("--pairs", multiple=True, help="Multiplicand pair 'x,y'; repeatable."),
    click.option("--n", default=None, type=int, help="Step count (pads zero pairs if none given)."),
    click.option("--variant", type=click.Choice(["exact", "approx"]), default="exact"),
    click.option("--epsilon", default=None, type=float, help="Precision for --variant approx."),
    click.option("--signed", is_flag=True, help="Two's-complement interpretation of values."),
    click.option("--out", default=None, help="Write the JSON/CSV payload to this path."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
]


def _with(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@main.command()
@_with(_common)
@click.pass_obj
def build(client, k, z, pairs, n, variant, epsilon, signed, out, fmt):
    """Build the chain and emit its metrics plus the layer serialization."""
    if fmt == "csv":
        raise click.UsageError("build output is JSON only")
    body = client.post("/build", _job_payload(k, z, pairs, n, variant, epsilon, signed))
    m = body["metrics"]
    click.echo(
        f"depth {m['depth']}  quantum gates {m['quantum_gate_count']}  "
        f"classical gates {m['classical_gate_count']}  qubits {m['qubit_count']}"
    )
    if out:
        _emit(body, out, "json")


@main.command()
@_with(_common)
@click.option("--backend", type=click.Choice(["dense", "phase", "both"]), default="both")
@click.option("--verbose", is_flag=True, help="Include the per-step accumulator trace.")
@click.pass_obj
def run(client, k, z, pairs, n, variant, epsilon, signed, out, fmt, backend, verbose):
    """Execute the chain and report the result (and backend agreement)."""
    if fmt == "csv":
        raise click.UsageError("run output is JSON only")
    payload = {
        "job": _job_payload(k, z, pairs, n, variant, epsilon, signed),
        "backend": backend,
        "verbose": verbose,
    }
    body = client.post("/run", payload)
    line = f"result {body['result']}"
    if body.get("dense") is not None:
        line += f"  probability {body['dense']['probability']:.6f}"
    if body.get("agree") is not None:
        line += "  backends agree" if body["agree"] else "  BACKENDS DISAGREE"
    click.echo(line)
    if out:
        _emit(body, out, "json")


@main.command()
@click.option("--suite", "suites", multiple=True, help="Suite name; repeatable (default: all).")
@click.option("--mutate", type=click.Choice(["drop-gate"]), default=None,
              help="Fault injection: the equivalence suite must then fail.")
@click.option("--seed", default=0, type=int)
@click.option("--samples", default=10, type=int, help="Random cases for the precision suite.")
@click.option("--out", default=None)
@click.pass_obj
def verify(client, suites, mutate, seed, samples, out):
    """Run verification suites; nonzero exit on any failure."""
    payload = {"suites": list(suites) or None, "mutate": mutate, "seed": seed, "samples": samples}
    body = client.post("/verify", payload)
    for suite in body["suites"]:
        status = "PASS" if suite["passed"] else "FAIL"
        click.echo(f"{status} {suite['name']}: {suite['detail']}")
    if out:
        _emit(body, out, "json")
    if not body["passed"]:
        sys.exit(EXIT_FAILURE)
    click.echo("all suites passed")


def _model_options(fn):
    options = [
        click.option("--adder", type=click.Choice(list(cost.ADDER_KINDS)), default="carry_lookahead"),
        click.option("--add-coeff", default=2, type=int),
        click.option("--mult-coeff", default=3, type=int),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@main.command()
@click.option("--k", "k_range", required=True, help="Widths: 'lo:hi' or comma list.")
@click.option("--n", "n_range", required=True, help="Step counts: 'lo:hi' or comma list.")
@click.option("--variant", type=click.Choice(["exact", "approx"]), default="exact")
@click.option("--epsilon", default=None, type=float)
@_model_options
@click.option("--out", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv")
@click.pass_obj
def sweep(client, k_range, n_range, variant, epsilon, adder, add_coeff, mult_coeff, out, fmt):
    """Measured vs predicted depth over a (k, n) grid, as CSV or JSON."""
    payload = {
        "k_values": _parse_values(k_range),
        "n_values": _parse_values(n_range),
        "variant": variant,
        "epsilon": epsilon,
        "model": {"adder_kind": adder, "add_coeff": add_coeff, "mult_coeff": mult_coeff},
    }
    body = client.post("/sweep", payload)
    _emit(body if fmt == "json" else {"columns": body["columns"], "rows": body["rows"]}, out, fmt)


@main.command()
@click.option("--k", "k_range", required=True, help="Widths: 'lo:hi' or comma list.")
@click.option("--variant", type=click.Choice(["exact", "approx"]), default="exact")
@click.option("--epsilon", default=None, type=float)
@_model_options
@click.option("--out", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv")
@click.pass_obj
def crossover(client, k_range, variant, epsilon, adder, add_coeff, mult_coeff, out, fmt):
    """Per-width smallest n where the hybrid chain beats the classical model."""
    payload = {
        "k_values": _parse_values(k_range),
        "variant": variant,
        "epsilon": epsilon,
        "model": {"adder_kind": adder, "add_coeff": add_coeff, "mult_coeff": mult_coeff},
    }
    body = client.post("/crossover", payload)
    _emit(body if fmt == "json" else {"columns": body["columns"], "rows": body["rows"]}, out, fmt)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
