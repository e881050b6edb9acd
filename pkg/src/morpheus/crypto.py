"""Simulation-grade signatures, threshold signatures and block hashing.

Every key is derived from a single seed, so two providers built from the same
seed agree on every signature and digest. Signatures are keyed BLAKE2b tags:
only the holder of a process's key (its :class:`Signer` handle) can produce a
tag that verifies for that process.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable

DIGEST_SIZE = 32


class CryptoError(Exception):
    pass


class InsufficientShares(CryptoError):
    pass


class MixedPayloads(CryptoError):
    pass


def max_faulty(n: int) -> int:
    """Largest integer strictly less than n/3."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1) // 3


@dataclass(frozen=True)
class Signature:
    signer: int
    payload_digest: bytes = field(repr=False)
    tag: bytes = field(repr=False)


@dataclass(frozen=True)
class ThresholdSignature:
    m: int
    payload_digest: bytes = field(repr=False)
    tag: bytes = field(repr=False)


def digest(data: bytes, seed: int = 0) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST_SIZE, salt=_salt(seed)).digest()


def hash_block(b, seed: int = 0) -> bytes:
    """Digest of a block's canonical body (signature excluded)."""
    return digest(b.body, seed)


def _salt(seed: int) -> bytes:
    return (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "big") + b"morpheus"


class CryptoProvider:
    """Key material for one simulated execution.

    ``signer(i)`` hands out the only object able to sign as process ``i``.
    Verification and aggregation are public.
    """

    def __init__(self, n: int, seed: int = 0):
        self.n = n
        self.seed = seed
        self._keys = [self._derive(b"sig", i) for i in range(n)]
        self._group_keys: dict[int, bytes] = {}
        self._verified: set[tuple[int, bytes, bytes]] = set()

    def _derive(self, label: bytes, i: int) -> bytes:
        return hashlib.blake2b(
            label + i.to_bytes(8, "big"), digest_size=32, salt=_salt(self.seed)
        ).digest()

    def _group_key(self, m: int) -> bytes:
        key = self._group_keys.get(m)
        if key is None:
            key = self._group_keys[m] = self._derive(b"thr", m)
        return key

    def hash(self, data: bytes) -> bytes:
        return digest(data, self.seed)

    def signer(self, i: int) -> "Signer":
        if not 0 <= i < self.n:
            raise ValueError(f"no such process p{i}")
        return Signer(self, i, self._keys[i])

    def _tag(self, key: bytes, payload_digest: bytes) -> bytes:
        return hashlib.blake2b(payload_digest, digest_size=DIGEST_SIZE, key=key).digest()

    def verify(self, payload: bytes, sig: Signature, signer: int) -> bool:
        if sig.signer != signer or not 0 <= signer < self.n:
            return False
        return self.verify_digest(self.hash(payload), sig)

    def verify_digest(self, payload_digest: bytes, sig: Signature) -> bool:
        if not 0 <= sig.signer < self.n or sig.payload_digest != payload_digest:
            return False
        memo = (sig.signer, payload_digest, sig.tag)
        if memo in self._verified:
            return True
        ok = self._tag(self._keys[sig.signer], payload_digest) == sig.tag
        if ok:
            self._verified.add(memo)
        return ok

    def aggregate(self, shares: Iterable[Signature], m: int) -> ThresholdSignature:
        shares = list(shares)
        digests = {s.payload_digest for s in shares}
        if len(digests) > 1:
            raise MixedPayloads("shares sign different payloads")
        if not digests:
            raise InsufficientShares(f"need {m} shares, got none")
        (payload_digest,) = digests
        signers = {s.signer for s in shares if self.verify_digest(payload_digest, s)}
        if len(signers) < m:
            raise InsufficientShares(f"need {m} distinct signers, got {len(signers)}")
        return ThresholdSignature(m, payload_digest, self._tag(self._group_key(m), payload_digest))

    def verify_threshold(self, payload: bytes, tsig: ThresholdSignature, m: int) -> bool:
        payload_digest = self.hash(payload)
        if tsig.m != m or tsig.payload_digest != payload_digest:
            return False
        return self._tag(self._group_key(m), payload_digest) == tsig.tag


class Signer:
    """Signing handle for a single process."""

    def __init__(self, provider: CryptoProvider, pid: int, key: bytes):
        self.provider = provider
        self.pid = pid
        self._key = key

    def sign(self, payload: bytes) -> Signature:
        d = self.provider.hash(payload)
        return Signature(self.pid, d, self.provider._tag(self._key, d))
