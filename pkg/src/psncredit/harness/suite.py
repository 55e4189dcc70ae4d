"""Adversarial proposition suite.

Five propositions, each judged on fresh seeded runs:

1. double spending is rejected, in the window and after it;
2. credits stolen from another wallet cannot be deposited;
3. credit tokens cannot be forged without a grant;
4. deposits cannot be linked to the pseudonymous exchanges that earned
   them (surrogate checks: fresh pseudonyms, preimages stay hidden until
   deposit, and swapping whose secrets are whose changes nothing an
   observer sees in the exchange structure);
5. honest accounting conserves credits and ledgers drain once tasks
   complete and the window expires.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..sim.run import TranscriptBundle, pseudonyms_of, run
from ..sim.scenario import Scenario


@dataclass(frozen=True)
class PropositionResult:
    name: str
    passed: bool
    details: dict


@dataclass
class SuiteResult:
    seed: int
    propositions: list[PropositionResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(p.passed for p in self.propositions)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "all_passed": self.all_passed,
            "propositions": [
                {"name": p.name, "passed": p.passed, "details": p.details}
                for p in self.propositions
            ],
        }

    def format_lines(self) -> list[str]:
        lines = []
        for p in self.propositions:
            mark = "PASS" if p.passed else "FAIL"
            lines.append(f"[{mark}] {p.name}")
            if not p.passed:
                lines.append(f"       {p.details}")
        lines.append(
            f"{sum(p.passed for p in self.propositions)}/{len(self.propositions)} "
            "propositions held"
        )
        return lines


def linkage_analysis(bundle: TranscriptBundle, swapped: TranscriptBundle | None = None) -> dict:
    """What a curious server could and could not do with this transcript."""
    pids = pseudonyms_of(bundle.log)
    privacy_violations = [v for v in bundle.violations if "preimage" in v or "secret" in v]
    analysis = {
        "pseudonyms_fresh": len(pids) == len(set(pids)),
        "pseudonym_count": len(pids),
        "preimages_hidden_before_deposit": not privacy_violations,
        "trivially_linkable_by_cardinality": bundle.scenario.n_participants < 2,
    }
    if swapped is not None:
        analysis["structure_invariant_under_secret_swap"] = (
            bundle.structure() == swapped.structure()
        )
        analysis["transcripts_differ_under_secret_swap"] = (
            bundle.transcript_hash != swapped.transcript_hash
        )
        analysis["balances_match_under_secret_swap"] = bundle.balances == swapped.balances
    return analysis


def _attack_proposition(name: str, bundle: TranscriptBundle, expected_attempts: int) -> PropositionResult:
    results = bundle.attack_results or {}
    passed = (
        not bundle.violations
        and results.get("attempts", 0) >= expected_attempts
        and results.get("all_rejected", False)
        and results.get("all_as_expected", False)
    )
    details = {
        "attempts": results.get("attempts", 0),
        "accepted": results.get("accepted"),
        "violations": bundle.violations,
    }
    if not results.get("all_as_expected", False):
        details["outcomes"] = [
            o for o in results.get("outcomes", []) if not o["as_expected"]
        ]
    return PropositionResult(name=name, passed=passed, details=details)


def attack_suite(seed: int, key_bits: int = 256) -> SuiteResult:
    base = Scenario(M=2, c_min=1, c_max=3, n_participants=2, key_bits=key_bits)
    out = SuiteResult(seed=seed)

    replay = run(replace(base, attack="replay"), seed=seed)
    out.propositions.append(
        _attack_proposition("double-spend-rejected", replay, expected_attempts=4)
    )

    theft = run(replace(base, attack="theft"), seed=seed + 1)
    out.propositions.append(
        _attack_proposition("stolen-credit-rejected", theft, expected_attempts=2)
    )

    forgery = run(replace(base, attack="forgery"), seed=seed + 2)
    out.propositions.append(
        _attack_proposition("forged-credit-rejected", forgery, expected_attempts=9)
    )

    plain = run(replace(base, attack="linkage"), seed=seed + 3)
    swapped = run(replace(base, attack="linkage"), seed=seed + 3, secret_perm=[1, 0])
    analysis = linkage_analysis(plain, swapped)
    linkable = (
        not analysis["pseudonyms_fresh"]
        or not analysis["preimages_hidden_before_deposit"]
        or not analysis["structure_invariant_under_secret_swap"]
        or not analysis["transcripts_differ_under_secret_swap"]
        or not analysis["balances_match_under_secret_swap"]
    )
    out.propositions.append(
        PropositionResult("deposits-unlinkable", passed=not linkable, details=analysis)
    )

    honest = run(Scenario(M=2, c_min=1, c_max=3, n_participants=1, key_bits=key_bits), seed=seed + 4)
    metrics = honest.storage
    conservation = (
        not honest.violations
        and metrics.peak_total <= metrics.bound
        and all(
            honest.wallet_peaks[lab] == honest.scenario.granted_credits()
            for lab in honest.wallet_peaks
        )
    )
    out.propositions.append(
        PropositionResult(
            "conservation-and-storage",
            passed=conservation,
            details={
                "violations": honest.violations,
                "peak_total": metrics.peak_total,
                "bound": metrics.bound,
                "wallet_peaks": honest.wallet_peaks,
            },
        )
    )
    return out


def storage_record(tasks: int, cmax: int, key_bits: int = 128, seed: int = 0) -> dict:
    """Measured ledger peaks for a full single-participant window against
    the closed-form bound and the keep-everything baseline."""
    scenario = Scenario(M=tasks, c_min=1, c_max=cmax, n_participants=1, key_bits=key_bits)
    bundle = run(scenario, seed=seed)
    m = bundle.storage
    saving = 1 - (m.peak_total / m.baseline) if m.baseline else 0.0
    return {
        "M": tasks,
        "cmax": cmax,
        "peak_request": m.peak_request,
        "peak_report": m.peak_report,
        "peak_credit": m.peak_credit,
        "peak_total": m.peak_total,
        "bound": m.bound,
        "baseline": m.baseline,
        "within_bound": m.peak_total <= m.bound,
        "saving_vs_baseline": round(saving, 4),
        "wallet_peak": bundle.wallet_peaks["sp0"],
        "violations": bundle.violations,
    }
