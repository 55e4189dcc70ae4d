"""Evaluation harness: adversarial proposition suite, storage accounting,
and timing benchmarks."""

from .suite import PropositionResult, SuiteResult, attack_suite, linkage_analysis, storage_record
from .bench import BenchResult, bench

__all__ = [
    "PropositionResult",
    "SuiteResult",
    "attack_suite",
    "linkage_analysis",
    "storage_record",
    "BenchResult",
    "bench",
]
