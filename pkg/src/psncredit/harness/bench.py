"""Timing benchmark.

Measures wall time per protocol operation, split into the server's share
(time inside dispatch) and the participant's share (everything around it:
hashing, blinding, unblinding, verification).  The deposit row has no
participant share worth reporting: depositing spends a token that already
exists, so the client side is pure transport and shows up as "-".

Scaling is measured per full window of N tasks: the median of the server's
total share is fit against N by least squares, with the end-to-end medians
kept alongside for context.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field

from ..clock import SimClock
from ..participant import Participant
from ..server import SensingServer, ServerConfig
from ..sim.bus import LocalLink
from ..sim.run import exponent_bits_for

OPS = ("task-request", "report", "deposit")
DEFAULT_REPEAT = 100

CSV_HEADER = "kind,tasks,op,actor,value"


class InstrumentedLink(LocalLink):
    """LocalLink that accumulates the time spent inside server dispatch."""

    def __init__(self, server: SensingServer, sender: str = "bench"):
        super().__init__(server, sender=sender, log=None)
        self.server_elapsed = 0.0

    def _dispatch(self, payload: bytes) -> bytes:
        t0 = time.perf_counter()
        raw = self.server.dispatch_bytes(payload)
        self.server_elapsed += time.perf_counter() - t0
        return raw


@dataclass
class BenchResult:
    tasks: list[int]
    c: int
    key_bits: int
    repeat: int
    totals_ms: dict[int, float]
    server_totals_ms: dict[int, float]
    server_ms: dict[str, float]
    participant_ms: dict[str, float]
    fit: dict | None
    fit_e2e: dict | None
    sample_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tasks": self.tasks,
            "c": self.c,
            "key_bits": self.key_bits,
            "repeat": self.repeat,
            "totals_ms": {str(k): v for k, v in self.totals_ms.items()},
            "server_totals_ms": {str(k): v for k, v in self.server_totals_ms.items()},
            "server_ms": self.server_ms,
            "participant_ms": self.participant_ms,
            "fit": self.fit,
            "fit_e2e": self.fit_e2e,
            "sample_counts": self.sample_counts,
        }


def _fit_line(points: list[tuple[float, float]]) -> dict | None:
    if len(points) < 2:
        return None
    n = len(points)
    sx = sum(x for x, _ in points)
    sy = sum(y for _, y in points)
    sxx = sum(x * x for x, _ in points)
    sxy = sum(x * y for x, y in points)
    denom = n * sxx - sx * sx
    if denom == 0:
        return None
    slope = (n * sxy - sx * sy) / denom
    intercept = (sy - slope * sx) / n
    mean_y = sy / n
    ss_tot = sum((y - mean_y) ** 2 for _, y in points)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in points)
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    return {"slope_ms_per_task": slope, "intercept_ms": intercept, "r2": r2}


def bench(
    tasks: list[int],
    c: int,
    key_bits: int,
    repeat: int = DEFAULT_REPEAT,
    seed: int = 0,
) -> BenchResult:
    if not tasks or any(t < 1 for t in tasks):
        raise ValueError("tasks must be a non-empty list of positive counts")
    if repeat < 1:
        raise ValueError("repeat must be positive")
    rng = random.Random(seed)
    # keys are built once; timing covers protocol operations, not keygen
    template = SensingServer.generate(
        ServerConfig(tasks_per_window=max(tasks), c_min=1, c_max=c, horizon=1 << 30),
        key_bits,
        rng,
        exponent_bits=exponent_bits_for(key_bits),
    )

    server_samples: dict[str, list[float]] = {op: [] for op in OPS}
    participant_samples: dict[str, list[float]] = {op: [] for op in OPS}
    totals: dict[int, list[float]] = {}
    server_totals: dict[int, list[float]] = {}

    for n_tasks in tasks:
        config = ServerConfig(tasks_per_window=n_tasks, c_min=1, c_max=c, horizon=1 << 30)
        totals[n_tasks] = []
        server_totals[n_tasks] = []
        for r in range(repeat):
            server = SensingServer(
                config, template.rsa, template.request_key, template.report_key, clock=SimClock()
            )
            link = InstrumentedLink(server)
            participant = Participant(
                rid=b"bench",
                link=link,
                secret_rng=random.Random(rng.getrandbits(64)),
            )

            def timed(op: str, fn):
                t0 = time.perf_counter()
                s0 = link.server_elapsed
                out = fn()
                outer = time.perf_counter() - t0
                inner = link.server_elapsed - s0
                server_samples[op].append(inner * 1000)
                participant_samples[op].append((outer - inner) * 1000)
                return out

            t_start = time.perf_counter()
            s_start = link.server_elapsed
            for i in range(1, n_tasks + 1):
                timed("task-request", lambda: participant.request_task(i))
                grant = timed("report", lambda: participant.submit_report(i))
                for _ in range(grant.granted):
                    timed("deposit", participant.deposit_one)
            totals[n_tasks].append((time.perf_counter() - t_start) * 1000)
            server_totals[n_tasks].append((link.server_elapsed - s_start) * 1000)

    totals_ms = {n: statistics.median(v) for n, v in totals.items()}
    server_totals_ms = {n: statistics.median(v) for n, v in server_totals.items()}
    # scaling claim is about the server's share: fit that, keep e2e as context
    fit = _fit_line([(float(n), server_totals_ms[n]) for n in sorted(server_totals_ms)])
    fit_e2e = _fit_line([(float(n), totals_ms[n]) for n in sorted(totals_ms)])
    return BenchResult(
        tasks=list(tasks),
        c=c,
        key_bits=key_bits,
        repeat=repeat,
        totals_ms=totals_ms,
        server_totals_ms=server_totals_ms,
        server_ms={op: statistics.median(v) for op, v in server_samples.items()},
        participant_ms={op: statistics.median(v) for op, v in participant_samples.items()},
        fit=fit,
        fit_e2e=fit_e2e,
        sample_counts={op: len(v) for op, v in server_samples.items()},
    )


# ---- output formats (work on plain dicts so remote results format the same) --


def to_csv(result: dict) -> str:
    lines = [CSV_HEADER]
    for n in result["tasks"]:
        lines.append(f"scaling,{n},workload,server,{result['server_totals_ms'][str(n)]:.4f}")
        lines.append(f"scaling,{n},workload,e2e,{result['totals_ms'][str(n)]:.4f}")
    for op in OPS:
        lines.append(f"op,,{op},server,{result['server_ms'][op]:.4f}")
        if op == "deposit":
            lines.append(f"op,,{op},participant,-")
        else:
            lines.append(f"op,,{op},participant,{result['participant_ms'][op]:.4f}")
    fit = result.get("fit")
    if fit:
        lines.append(f"fit,,slope_ms_per_task,server,{fit['slope_ms_per_task']:.4f}")
        lines.append(f"fit,,intercept_ms,server,{fit['intercept_ms']:.4f}")
        lines.append(f"fit,,r2,server,{fit['r2']:.6f}")
    return "\n".join(lines) + "\n"


def format_table(result: dict) -> str:
    rows = [("op", "server_ms", "participant_ms")]
    for op in OPS:
        sp = "-" if op == "deposit" else f"{result['participant_ms'][op]:.3f}"
        rows.append((op, f"{result['server_ms'][op]:.3f}", sp))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    out = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    out.append("")
    for n in result["tasks"]:
        out.append(
            f"{n} tasks: {result['server_totals_ms'][str(n)]:.3f} ms server, "
            f"{result['totals_ms'][str(n)]:.3f} ms end to end"
        )
    fit = result.get("fit")
    if fit:
        out.append(
            f"server fit: {fit['slope_ms_per_task']:.3f} ms/task "
            f"+ {fit['intercept_ms']:.3f} ms (r2 {fit['r2']:.4f})"
        )
    return "\n".join(out) + "\n"
