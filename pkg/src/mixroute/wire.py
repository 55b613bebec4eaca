"""Entry-body schemas for every bulletin-board entry kind.

Bodies are opaque to the board itself; each starts with a version byte
so schemas can evolve without breaking old transcripts.
"""

from dataclasses import dataclass

from mixroute.board import ServerRegistry
from mixroute.elgamal import Ciphertext
from mixroute.group import get_group
from mixroute.serialization import (
    DeserializationError,
    Reader,
    prefixed,
    prefixed_str,
    u32,
)
from mixroute.shuffle import ShuffleProof

VERSION = 1


def _header(r: Reader):
    ver = r.take(1)[0]
    if ver != VERSION:
        raise DeserializationError(f"unsupported body version {ver}")


@dataclass(frozen=True)
class SessionId:
    """One coin-tossing session: routes one batch of ciphertexts.

    ctr is the layer whose board section holds the session entries;
    source is a mix identity, or "reassign:<mix>" when a failed mix's
    pending inputs are redistributed. batch tags which output batch of
    the source is being routed; target is the layer the assignment maps
    onto (ctr+1 normally, ctr for in-layer reassignments, further ahead
    when a whole layer was lost); toss counts coin-toss retries after a
    routing entity aborted.
    """

    ctr: int
    source: str
    batch: int = 0
    target: int = 0
    toss: int = 0

    def serialize(self) -> bytes:
        return prefixed_str(self.source) + u32(self.batch) + u32(self.target) + u32(self.toss)

    @classmethod
    def read_from(cls, ctr: int, r: Reader) -> "SessionId":
        return cls(ctr, r.prefixed_str(), r.u32(), r.u32(), r.u32())

    def with_toss(self, toss: int) -> "SessionId":
        return SessionId(self.ctr, self.source, self.batch, self.target, toss)

    def label(self) -> str:
        return (
            f"ctr={self.ctr} source={self.source} batch={self.batch} "
            f"target={self.target} toss={self.toss}"
        )


def proof_context(group, pke, ctr: int, mix: str, attempt: int) -> bytes:
    """Fiat-Shamir context binding a shuffle proof to its batch, so a
    proof cannot be replayed for another mix, layer, or attempt."""
    return (
        group.element_to_bytes(pke) + u32(ctr) + prefixed_str(mix) + u32(attempt)
    )


def public_key_body(group, pke, registry: ServerRegistry, blocks: int) -> bytes:
    return (
        bytes([VERSION])
        + prefixed_str(group.name)
        + group.element_to_bytes(pke)
        + u32(blocks)
        + registry.serialize(group)
    )


def parse_public_key_body(data: bytes):
    r = Reader(data)
    _header(r)
    group = get_group(r.prefixed_str())
    pke = group.element_from_bytes(r.take(group.element_bytes))
    blocks = r.u32()
    registry = ServerRegistry.read_from(group, r)
    r.expect_end()
    return group, pke, blocks, registry


def batch_body(group, mix: str, attempt: int, cts) -> bytes:
    """Shared schema for InputCiphertexts and OutputCiphertexts."""
    out = [bytes([VERSION]), prefixed_str(mix), u32(attempt), u32(len(cts))]
    out.extend(ct.serialize(group) for ct in cts)
    return b"".join(out)


def parse_batch_body(group, data: bytes):
    r = Reader(data)
    _header(r)
    mix = r.prefixed_str()
    attempt = r.u32()
    cts = [Ciphertext.read_from(group, r) for _ in range(r.u32())]
    r.expect_end()
    return mix, attempt, cts


def shuffle_proof_body(group, mix: str, attempt: int, proof: ShuffleProof) -> bytes:
    return (
        bytes([VERSION])
        + prefixed_str(mix)
        + u32(attempt)
        + prefixed(proof.serialize(group))
    )


def parse_shuffle_proof_body(group, data: bytes):
    r = Reader(data)
    _header(r)
    mix = r.prefixed_str()
    attempt = r.u32()
    proof = ShuffleProof.deserialize(group, r.prefixed())
    r.expect_end()
    return mix, attempt, proof


def rand_commitment_body(session: SessionId, entity: str, value: bytes) -> bytes:
    return bytes([VERSION]) + session.serialize() + prefixed_str(entity) + value


def parse_rand_commitment_body(ctr: int, data: bytes):
    r = Reader(data)
    _header(r)
    session = SessionId.read_from(ctr, r)
    entity = r.prefixed_str()
    value = r.take(32)
    r.expect_end()
    return session, entity, value


def rand_opening_body(
    session: SessionId, entity: str, payload: bytes, nonce: bytes
) -> bytes:
    return (
        bytes([VERSION])
        + session.serialize()
        + prefixed_str(entity)
        + prefixed(payload)
        + nonce
    )


def parse_rand_opening_body(ctr: int, data: bytes):
    r = Reader(data)
    _header(r)
    session = SessionId.read_from(ctr, r)
    entity = r.prefixed_str()
    payload = r.prefixed()
    nonce = r.take(32)
    r.expect_end()
    return session, entity, payload, nonce


def failure_body(subject: str, code: str, detail: str) -> bytes:
    return (
        bytes([VERSION]) + prefixed_str(subject) + prefixed_str(code) + prefixed_str(detail)
    )


def parse_failure_body(data: bytes):
    r = Reader(data)
    _header(r)
    out = (r.prefixed_str(), r.prefixed_str(), r.prefixed_str())
    r.expect_end()
    return out


def reassignment_body(
    group, scope: str, subject: str, session: SessionId, survivors, cts
) -> bytes:
    """scope: "mix-failure" | "layer-skip" | "new-entry-points".

    For mix failures, cts is the pending input batch being redistributed
    over the surviving mixes; for new entry points, survivors lists the
    replacement entry mixes.
    """
    out = [
        bytes([VERSION]),
        prefixed_str(scope),
        prefixed_str(subject),
        session.serialize(),
        u32(len(survivors)),
    ]
    out.extend(prefixed_str(s) for s in survivors)
    out.append(u32(len(cts)))
    out.extend(ct.serialize(group) for ct in cts)
    return b"".join(out)


def parse_reassignment_body(group, ctr: int, data: bytes):
    r = Reader(data)
    _header(r)
    scope = r.prefixed_str()
    subject = r.prefixed_str()
    session = SessionId.read_from(ctr, r)
    survivors = [r.prefixed_str() for _ in range(r.u32())]
    cts = [Ciphertext.read_from(group, r) for _ in range(r.u32())]
    r.expect_end()
    return scope, subject, session, survivors, cts
