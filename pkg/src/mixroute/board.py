"""Append-only bulletin board and the server registry behind it.

The board is the system's only communication channel: servers append
signed, layer-indexed entries and everyone reads. Entries are immutable,
sequence numbers strictly increase, and every append re-verifies the
author's signature, so a transcript exported from the board carries its
own integrity proof. Users can read but never write; their ciphertexts
enter through a first-layer mix.
"""

import base64
import json
from dataclasses import dataclass, field

from mixroute.serialization import DeserializationError, prefixed, prefixed_str, u32
from mixroute.signatures import verify_sig

KINDS = (
    "PublicKey",
    "InputCiphertexts",
    "OutputCiphertexts",
    "ShuffleProof",
    "RandCommitment",
    "RandOpening",
    "VerificationFailure",
    "Reassignment",
)

ROLES = ("mix", "routing-entity", "auditor")


class BoardError(Exception):
    pass


class UnregisteredAuthor(BoardError):
    pass


class RoleError(BoardError):
    """Write attempt by an identity that may only read (a user)."""


class BadSignature(BoardError):
    pass


class BoardTimeout(BoardError):
    """A completion predicate did not hold within the step budget."""


@dataclass(frozen=True)
class ServerInfo:
    identity: str
    role: str  # one of ROLES
    pkv: object  # verification key element
    layer: int = 0  # 1-based layer for mixes, 0 otherwise
    throughput: int = 0  # messages per time-frame (mixes)
    organization: str = ""


@dataclass
class ServerRegistry:
    servers: dict = field(default_factory=dict)

    def register(self, info: ServerInfo):
        if info.role not in ROLES:
            raise ValueError(f"unknown role {info.role!r}")
        if info.identity in self.servers:
            raise ValueError(f"duplicate identity {info.identity!r}")
        self.servers[info.identity] = info

    def get(self, identity: str) -> ServerInfo:
        return self.servers[identity]

    def mixes_in_layer(self, layer: int):
        """Mixes of one layer in canonical (ascending identity) order."""
        return sorted(
            (s for s in self.servers.values() if s.role == "mix" and s.layer == layer),
            key=lambda s: s.identity,
        )

    def by_role(self, role: str):
        return sorted(
            (s for s in self.servers.values() if s.role == role),
            key=lambda s: s.identity,
        )

    def layer_count(self) -> int:
        return max((s.layer for s in self.servers.values()), default=0)

    def serialize(self, group) -> bytes:
        out = [u32(len(self.servers))]
        for ident in sorted(self.servers):
            s = self.servers[ident]
            out.append(prefixed_str(s.identity))
            out.append(bytes([ROLES.index(s.role)]))
            out.append(u32(s.layer))
            out.append(u32(s.throughput))
            out.append(prefixed_str(s.organization))
            out.append(group.element_to_bytes(s.pkv))
        return b"".join(out)

    @classmethod
    def read_from(cls, group, r) -> "ServerRegistry":
        reg = cls()
        for _ in range(r.u32()):
            ident = r.prefixed_str()
            role = ROLES[r.take(1)[0]]
            layer = r.u32()
            throughput = r.u32()
            org = r.prefixed_str()
            pkv = group.element_from_bytes(r.take(group.element_bytes))
            reg.register(ServerInfo(ident, role, pkv, layer, throughput, org))
        return reg


@dataclass(frozen=True)
class BulletinBoardEntry:
    seq: int
    ctr: int
    author: str
    kind: str
    body: bytes
    signature: bytes


def signed_message(ctr: int, kind: str, body: bytes) -> bytes:
    """Canonical bytes an entry author signs."""
    return u32(ctr) + prefixed_str(kind) + prefixed(body)


class BulletinBoard:
    def __init__(self, group, registry: ServerRegistry):
        self.group = group
        self.registry = registry
        self.entries: list = []
        self.user_ids: set = set()

    def register_user(self, identity: str):
        self.user_ids.add(identity)

    def append(self, ctr: int, kind: str, body: bytes, author: str, signature: bytes) -> int:
        if kind not in KINDS:
            raise BoardError(f"unknown entry kind {kind!r}")
        if author in self.user_ids:
            raise RoleError(f"{author!r} is a user; users cannot write to the board")
        if author not in self.registry.servers:
            raise UnregisteredAuthor(f"{author!r} is not a registered server")
        pkv = self.registry.get(author).pkv
        if not verify_sig(self.group, pkv, signed_message(ctr, kind, body), signature):
            raise BadSignature(f"signature by {author!r} does not verify")
        entry = BulletinBoardEntry(
            seq=len(self.entries) + 1,
            ctr=ctr,
            author=author,
            kind=kind,
            body=body,
            signature=signature,
        )
        self.entries.append(entry)
        return entry.seq

    def read(self, ctr=None, kind=None, author=None):
        """All matching entries in append order (pure)."""
        return [
            e
            for e in self.entries
            if (ctr is None or e.ctr == ctr)
            and (kind is None or e.kind == kind)
            and (author is None or e.author == author)
        ]

    def await_entries(self, description: str, predicate):
        """Scheduling barrier: return the predicate's matches, or raise.

        The simulator drives all parties before reaching a barrier, so the
        predicate is evaluated against the settled board state; an
        unsatisfied predicate means some party stalled or aborted, which
        the caller's fault handler deals with.
        """
        matches = predicate(self)
        if matches:
            return matches
        raise BoardTimeout(description)


def export_transcript(board: BulletinBoard) -> str:
    """One self-contained JSON record per line; bit-exact round trip."""
    lines = []
    for e in board.entries:
        lines.append(
            json.dumps(
                {
                    "seq": e.seq,
                    "ctr": e.ctr,
                    "author": e.author,
                    "kind": e.kind,
                    "body": base64.b64encode(e.body).decode("ascii"),
                    "sig": base64.b64encode(e.signature).decode("ascii"),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"


def import_transcript(text: str):
    entries = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            entries.append(
                BulletinBoardEntry(
                    seq=rec["seq"],
                    ctr=rec["ctr"],
                    author=rec["author"],
                    kind=rec["kind"],
                    body=base64.b64decode(rec["body"]),
                    signature=base64.b64decode(rec["sig"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise DeserializationError(f"transcript line {n}: {exc}") from exc
    return entries
