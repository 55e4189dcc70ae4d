import random

import pytest

from psncredit.crypto import PbsKeyPair, RsaKeyPair, keygen_pbs, keygen_rsa

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def criterion():
    """Records one pass/fail line per acceptance criterion and asserts it.
    The lines are replayed after the run so they stay visible even with
    output capture on."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" -- {detail}"
        _acceptance_lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.ensure_newline()
        terminalreporter.section("acceptance criteria", sep="-")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def toy_rsa() -> RsaKeyPair:
    # n=3233, e=17, d=2753: small enough to check by hand
    return RsaKeyPair.from_primes(61, 53, 17)


@pytest.fixture
def toy_pbs() -> PbsKeyPair:
    # 23 and 47 are safe primes; n=1081
    return PbsKeyPair.from_primes(23, 47, exponent_bits=16)


@pytest.fixture
def rsa_64() -> RsaKeyPair:
    return keygen_rsa(64, random.Random(0xA5))


@pytest.fixture(scope="session")
def rsa_2048() -> RsaKeyPair:
    return keygen_rsa(2048, random.Random(0xC0FFEE))


@pytest.fixture(scope="session")
def pbs_2048() -> PbsKeyPair:
    return keygen_pbs(2048, random.Random(0xFACADE))
