import math
import random

import pytest

from psncredit.crypto import (
    BlindingFactor,
    blind,
    blind_sign_ts,
    fdh,
    rsa_sign,
    rsa_verify,
    unblind,
    verify_ts,
)


def units_of(n):
    return {x for x in range(1, n) if math.gcd(x, n) == 1}


def test_plain_sign_verify(toy_rsa):
    sig = rsa_sign(toy_rsa, b"hello")
    assert rsa_verify(toy_rsa.n, toy_rsa.e, b"hello", sig)
    assert not rsa_verify(toy_rsa.n, toy_rsa.e, b"other", sig)
    assert not rsa_verify(toy_rsa.n, toy_rsa.e, b"hello", sig + 1)


def test_blind_pipeline_roundtrip(rsa_64):
    rng = random.Random(42)
    key = rsa_64
    msg = b"reading-17"
    z = BlindingFactor.random(key.n, rng)
    blinded = blind(msg, z, key.n, key.e)
    sig_b = blind_sign_ts(key, blinded, ticks=77)
    sig = unblind(sig_b, z, key.n)
    assert verify_ts(key.n, key.e, msg, 77, sig)
    assert not verify_ts(key.n, key.e, msg, 78, sig)
    assert not verify_ts(key.n, key.e, b"reading-18", 77, sig)


def test_unblinded_signature_ignores_blinding(rsa_64):
    # two different blinding factors must strip to the same signature
    key = rsa_64
    msg = b"same message"
    z1 = BlindingFactor.random(key.n, random.Random(1))
    z2 = BlindingFactor.random(key.n, random.Random(2))
    assert z1.value != z2.value
    s1 = unblind(blind_sign_ts(key, blind(msg, z1, key.n, key.e), 5), z1, key.n)
    s2 = unblind(blind_sign_ts(key, blind(msg, z2, key.n, key.e), 5), z2, key.n)
    assert s1 == s2


def test_blinding_factor_from_value_checks_units():
    with pytest.raises(ValueError):
        BlindingFactor.from_value(5, 15)  # gcd(5,15) != 1
    z = BlindingFactor.from_value(7, 15)
    assert z.value * z.inverse % 15 == 1


def test_blind_sign_rejects_out_of_range(rsa_64):
    with pytest.raises(ValueError):
        blind_sign_ts(rsa_64, 0, 1)
    with pytest.raises(ValueError):
        blind_sign_ts(rsa_64, rsa_64.n, 1)


def test_blinding_is_bijection_on_units_toy():
    # for fixed m, z -> m * z^e mod n permutes the units of Z_n
    for n, e in ((15, 3), (3233, 17)):
        units = units_of(n)
        m = fdh(b"fixed", n)
        image = {blind(b"fixed", BlindingFactor.from_value(z, n), n, e) for z in units}
        assert image == units
        assert m * pow(1, e, n) % n in image


def test_blinded_value_reveals_nothing_without_z(toy_rsa):
    # every candidate message is a possible pre-image: some blinding factor
    # explains the observed blinded value for each of them
    n, e, d = toy_rsa.n, toy_rsa.e, toy_rsa.d
    z = BlindingFactor.random(n, random.Random(9))
    observed = blind(b"actual", z, n, e)
    for candidate in (b"actual", b"decoy-a", b"decoy-b"):
        h = fdh(candidate, n)
        z_candidate = pow(observed * pow(h, -1, n) % n, d, n)
        assert h * pow(z_candidate, e, n) % n == observed
