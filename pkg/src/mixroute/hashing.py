"""Domain-separated SHA-256 and the hash commitment scheme.

Every use of the hash function carries a single-byte domain tag so that
digests from one context (say, routing permutation) can never collide
with digests from another (commitments, Fiat-Shamir challenges).
"""

import hashlib
from dataclasses import dataclass

DIGEST_BYTES = 32

# Single-byte domain tags. ROUTING must stay 0x52: the routing
# permutation is recomputed independently by every verifier and the tag
# is part of its wire-level definition.
ROUTING = b"\x52"
COMMITMENT = b"\x43"
FIAT_SHAMIR = b"\x46"
SIGNATURE = b"\x53"
KEY_DERIVATION = b"\x4b"


def tagged_hash(domain: bytes, payload: bytes) -> bytes:
    """SHA-256 of a domain tag followed by the payload."""
    if len(domain) != 1:
        raise ValueError("domain tag must be a single byte")
    return hashlib.sha256(domain + payload).digest()


@dataclass(frozen=True)
class Opening:
    payload: bytes
    nonce: bytes


@dataclass(frozen=True)
class Commitment:
    """Hash commitment: value = H(payload || nonce) under the commitment tag."""

    value: bytes

    def serialize(self) -> bytes:
        return self.value


def commit(payload: bytes, rng) -> tuple[Commitment, Opening]:
    """Commit to payload with a fresh 256-bit nonce drawn from rng."""
    nonce = rng.getrandbits(256).to_bytes(32, "big")
    value = tagged_hash(COMMITMENT, payload + nonce)
    return Commitment(value), Opening(payload, nonce)


def verify_open(value: bytes, opening: Opening) -> bool:
    return tagged_hash(COMMITMENT, opening.payload + opening.nonce) == value
