"""Command line interface.

Every subcommand is a thin client of the HTTP service: by default it
spins the service up in process and talks to it through a test transport;
``--server URL`` points it at a running instance instead.  Seeds fall back
to the PSN_SEED environment variable.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .errors import ScenarioError
from .harness.bench import DEFAULT_REPEAT, format_table, to_csv
from .sim.scenario import load_scenario

U64 = click.IntRange(0, 2**64 - 1)
U32 = click.IntRange(1, 2**32 - 1)


def make_client(server_url: str | None):
    if server_url:
        import httpx

        return httpx.Client(base_url=server_url, timeout=None)
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    body = response.json()
    if response.status_code != 200:
        click.echo(f"error: {body.get('code', response.status_code)}: {body.get('detail', body)}", err=True)
        sys.exit(2)
    return body


@click.group()
def main() -> None:
    """Privacy-preserving sensing credits: simulate, attack, measure."""


@main.command("run")
@click.argument("scenario")
@click.option("--seed", type=U64, envvar="PSN_SEED", default=None, help="overrides the scenario seed")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="directory for summary.json and transcript.txt")
@click.option("--server", default=None, help="base URL of a running service (default: in process)")
def run_cmd(scenario: str, seed: int | None, out: str | None, server: str | None) -> None:
    """Run SCENARIO: a preset name, a JSON file, or key=value pairs."""
    try:
        sc = load_scenario(scenario)
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    client = make_client(server)
    try:
        data = _post(client, "/run", {"scenario": sc.to_mapping(), "seed": seed})
    finally:
        client.close()
    summary = data["summary"]
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        with open(os.path.join(out, "transcript.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(data["lines"]))
            fh.write("\n")
    click.echo(f"seed {summary['seed']}  transcript {summary['transcript_hash']}")
    click.echo(f"balances {summary['balances']}  messages {summary['messages']}")
    attack = summary.get("attack_results")
    if attack:
        click.echo(
            f"attack {attack['attack']}: {attack['attempts']} attempts, "
            f"{attack['accepted']} accepted"
        )
    ok = not summary["violations"]
    if attack:
        ok = ok and attack["all_as_expected"]
    for violation in summary["violations"]:
        click.echo(f"violation: {violation}", err=True)
    if not ok:
        sys.exit(1)


@main.command("attack-suite")
@click.option("--seed", type=U64, envvar="PSN_SEED", default=0, show_default=True)
@click.option("--key-bits", type=U32, default=256, show_default=True)
@click.option("--server", default=None)
def attack_suite_cmd(seed: int, key_bits: int, server: str | None) -> None:
    """Run the adversarial proposition suite."""
    client = make_client(server)
    try:
        data = _post(client, "/attack-suite", {"seed": seed, "key_bits": key_bits})
    finally:
        client.close()
    for prop in data["propositions"]:
        mark = "PASS" if prop["passed"] else "FAIL"
        click.echo(f"[{mark}] {prop['name']}")
        if not prop["passed"]:
            click.echo(f"       {prop['details']}")
    held = sum(p["passed"] for p in data["propositions"])
    click.echo(f"{held}/{len(data['propositions'])} propositions held")
    if not data["all_passed"]:
        sys.exit(1)


@main.command("bench")
@click.option("--tasks", default="1,2,4,8,16", show_default=True, help="comma-separated task counts")
@click.option("--c", type=U32, default=5, show_default=True, help="credits granted per report")
@click.option("--key-bits", type=U32, default=256, show_default=True)
@click.option("--repeat", type=U32, default=DEFAULT_REPEAT, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--server", default=None)
def bench_cmd(tasks: str, c: int, key_bits: int, repeat: int, fmt: str, server: str | None) -> None:
    """Time protocol operations and workload scaling."""
    try:
        task_list = [int(part) for part in tasks.split(",") if part.strip()]
    except ValueError:
        click.echo(f"error: --tasks must be comma-separated integers, got {tasks!r}", err=True)
        sys.exit(2)
    client = make_client(server)
    try:
        data = _post(
            client,
            "/bench",
            {"tasks": task_list, "c": c, "key_bits": key_bits, "repeat": repeat},
        )
    finally:
        client.close()
    if fmt == "json":
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(to_csv(data), nl=False)
        click.echo(format_table(data), err=True, nl=False)


@main.command("storage")
@click.option("--M", "tasks_per_window", type=U32, required=True, help="tasks in the window")
@click.option("--cmax", type=U32, required=True, help="credit batch size")
@click.option("--key-bits", type=U32, default=128, show_default=True)
@click.option("--seed", type=U64, envvar="PSN_SEED", default=0, show_default=True)
@click.option("--server", default=None)
def storage_cmd(tasks_per_window: int, cmax: int, key_bits: int, seed: int, server: str | None) -> None:
    """Measure ledger peaks for a full window against the bound."""
    client = make_client(server)
    try:
        data = _post(
            client,
            "/storage-grid",
            {"M": tasks_per_window, "cmax": cmax, "key_bits": key_bits, "seed": seed},
        )
    finally:
        client.close()
    for key in (
        "M",
        "cmax",
        "peak_request",
        "peak_report",
        "peak_credit",
        "peak_total",
        "bound",
        "baseline",
        "within_bound",
        "saving_vs_baseline",
        "wallet_peak",
    ):
        click.echo(f"{key}: {data[key]}")
    if not data["within_bound"] or data["violations"]:
        for violation in data["violations"]:
            click.echo(f"violation: {violation}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
