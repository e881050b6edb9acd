import pytest

from morpheus.crypto import (
    CryptoProvider,
    InsufficientShares,
    MixedPayloads,
    digest,
    hash_block,
    max_faulty,
)
from morpheus.messages import GENESIS


@pytest.mark.parametrize("n,f", [(1, 0), (3, 0), (4, 1), (6, 1), (7, 2), (10, 3), (13, 4)])
def test_max_faulty(n, f):
    assert max_faulty(n) == f


def test_digest_is_deterministic_and_seeded():
    assert digest(b"abc") == digest(b"abc")
    assert digest(b"abc") != digest(b"abd")
    assert digest(b"abc", 1) != digest(b"abc", 2)
    assert len(digest(b"")) == 32


def test_hash_block_hashes_the_signed_body():
    assert hash_block(GENESIS) == digest(GENESIS.body)
    assert GENESIS.digest == hash_block(GENESIS)


def test_sign_and_verify():
    p = CryptoProvider(4, seed=1)
    sig = p.signer(2).sign(b"payload")
    assert p.verify(b"payload", sig, 2)
    assert not p.verify(b"payload", sig, 1)
    assert not p.verify(b"other", sig, 2)


def test_signatures_do_not_transfer_between_providers():
    a, b = CryptoProvider(4, seed=1), CryptoProvider(4, seed=2)
    sig = a.signer(0).sign(b"x")
    assert not b.verify(b"x", sig, 0)


def test_aggregate_needs_distinct_signers():
    p = CryptoProvider(4)
    shares = [p.signer(i).sign(b"m") for i in range(3)]
    t = p.aggregate(shares, 3)
    assert p.verify_threshold(b"m", t, 3)
    assert not p.verify_threshold(b"m", t, 2)
    assert not p.verify_threshold(b"n", t, 3)
    with pytest.raises(InsufficientShares):
        p.aggregate(shares[:2] + shares[:1], 3)
    with pytest.raises(InsufficientShares):
        p.aggregate([], 1)


def test_aggregate_rejects_mixed_payloads():
    p = CryptoProvider(4)
    with pytest.raises(MixedPayloads):
        p.aggregate([p.signer(0).sign(b"a"), p.signer(1).sign(b"b")], 2)


def test_aggregate_ignores_forged_shares():
    p = CryptoProvider(4)
    good = [p.signer(i).sign(b"m") for i in range(2)]
    forged = p.signer(3).sign(b"m")
    forged = type(forged)(2, forged.payload_digest, forged.tag)
    with pytest.raises(InsufficientShares):
        p.aggregate(good + [forged], 3)


def test_threshold_signatures_are_unique_per_payload():
    p = CryptoProvider(7)
    t1 = p.aggregate([p.signer(i).sign(b"m") for i in range(5)], 5)
    t2 = p.aggregate([p.signer(i).sign(b"m") for i in range(2, 7)], 5)
    assert t1 == t2
