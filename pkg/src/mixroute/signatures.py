"""Schnorr signatures over the protocol group.

Signatures authenticate bulletin-board entries; the verification key pkv
is public through the server registry while sks stays with the signer.
"""

from dataclasses import dataclass

from mixroute.group import MalformedElement
from mixroute.hashing import SIGNATURE, tagged_hash


@dataclass(frozen=True)
class SigKeyPair:
    sks: int
    pkv: object  # group element g^sks


def keygen_sig(group, rng) -> SigKeyPair:
    sks = group.random_scalar(rng)
    return SigKeyPair(sks, group.exp(group.generator(), sks))


def _challenge(group, r_bytes: bytes, pkv, message: bytes) -> int:
    digest = tagged_hash(
        SIGNATURE, r_bytes + group.element_to_bytes(pkv) + message
    )
    return int.from_bytes(digest, "big") % group.q


def sign(group, sks: int, message: bytes, rng) -> bytes:
    k = group.random_scalar(rng)
    r_bytes = group.element_to_bytes(group.exp(group.generator(), k))
    pkv = group.exp(group.generator(), sks)
    e = _challenge(group, r_bytes, pkv, message)
    s = (k + e * sks) % group.q
    return r_bytes + s.to_bytes(group.scalar_bytes, "big")


def verify_sig(group, pkv, message: bytes, signature: bytes) -> bool:
    if len(signature) != group.element_bytes + group.scalar_bytes:
        return False
    r_bytes = signature[: group.element_bytes]
    s = int.from_bytes(signature[group.element_bytes :], "big")
    if s >= group.q:
        return False
    try:
        r_point = group.element_from_bytes(r_bytes)
    except MalformedElement:
        return False
    e = _challenge(group, r_bytes, pkv, message)
    lhs = group.exp(group.generator(), s)
    rhs = group.mul(r_point, group.exp(pkv, e))
    return lhs == rhs
