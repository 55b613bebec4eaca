"""Joint-randomness routing: coin tossing, assignment, and verification.

Every output batch gets its own commit-reveal session among the routing
entities. The combined 256-bit value keys a hash permutation over the
batch, and the permuted sequence is split into contiguous slices sized
by the next layer's throughput shares. Everything here is a pure
function of board-visible data, so any verifier reaches the same
assignment the mixes used.
"""

from dataclasses import dataclass, field

from mixroute import wire
from mixroute.hashing import ROUTING, Opening, tagged_hash, verify_open
from mixroute.serialization import u64
from mixroute.wire import SessionId

RAND_BYTES = 32


class ProtocolOrderError(Exception):
    """Opening posted before every commitment for the session."""


def combine_randomness(openings) -> bytes:
    """Bitwise XOR of the entities' 256-bit strings (order-independent)."""
    acc = bytearray(RAND_BYTES)
    for rand in openings:
        if len(rand) != RAND_BYTES:
            raise ValueError("each opening must be exactly 32 bytes")
        for i, b in enumerate(rand):
            acc[i] ^= b
    return bytes(acc)


def permute_indices(rand: bytes, w: int) -> tuple:
    """Hash permutation of {1..w} keyed by the joint randomness.

    Index i maps to (H(rand || i || j) mod w) + 1 for the smallest j >= 0
    that avoids already-taken values; i and j are 8-byte big-endian and
    the digest carries the routing domain tag.
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    taken = set()
    out = []
    for i in range(1, w + 1):
        j = 0
        while True:
            digest = tagged_hash(ROUTING, rand + u64(i) + u64(j))
            z = int.from_bytes(digest, "big") % w + 1
            if z not in taken:
                break
            j += 1
        taken.add(z)
        out.append(z)
    return tuple(out)


def quotas(w: int, throughputs) -> list:
    """Largest-remainder split of w positions proportional to throughput.

    Ties go to the lower index. Exact when the layer total divides
    w * b_j; never off by a full unit otherwise.
    """
    total = sum(throughputs)
    if total <= 0:
        raise ValueError("total throughput must be positive")
    if not throughputs:
        raise ValueError("at least one mix required")
    base = [w * b // total for b in throughputs]
    remainders = [(w * b) % total for b in throughputs]
    leftover = w - sum(base)
    order = sorted(range(len(throughputs)), key=lambda j: (-remainders[j], j))
    for j in order[:leftover]:
        base[j] += 1
    return base


@dataclass(frozen=True)
class AssignmentList:
    """Permutation z plus the contiguous fetch plan over its positions."""

    z: tuple  # 1-based ciphertext indices, position i holds c_{z[i]}
    slices: tuple  # ((mix_id, lo, hi), ...) 0-based position ranges

    def indices_for(self, mix_id: str) -> list:
        """0-based indices into the published output list."""
        for mid, lo, hi in self.slices:
            if mid == mix_id:
                return [self.z[i] - 1 for i in range(lo, hi)]
        return []

    def mix_at_position(self, pos: int) -> str:
        for mid, lo, hi in self.slices:
            if lo <= pos < hi:
                return mid
        raise IndexError(pos)


def map_ciphertexts(z, capacities) -> AssignmentList:
    """Assign the permuted sequence to mixes in proportion to throughput.

    capacities: (mix_id, throughput) pairs in canonical (ascending
    identity) order. Mix j receives the j-th contiguous quota of
    positions.
    """
    caps = list(capacities)
    if caps != sorted(caps, key=lambda c: c[0]):
        raise ValueError("capacities must be in ascending mix-identity order")
    qs = quotas(len(z), [b for _, b in caps])
    slices = []
    pos = 0
    for (mix_id, _), quota in zip(caps, qs):
        slices.append((mix_id, pos, pos + quota))
        pos += quota
    return AssignmentList(tuple(z), tuple(slices))


def assign(rand: bytes, w: int, capacities) -> AssignmentList:
    """Permute then map: deterministic in (rand, w, capacities)."""
    return map_ciphertexts(permute_indices(rand, w), capacities)


# --- coin-tossing sessions over the board ---------------------------------


@dataclass
class SessionView:
    """Commitments and openings read back from the board for one session."""

    session: SessionId
    commitments: dict = field(default_factory=dict)  # entity -> 32B value
    openings: dict = field(default_factory=dict)  # entity -> (payload, nonce)


def read_session(board, session: SessionId) -> SessionView:
    """Collect a session's commitments and openings from the board.

    A commitment only counts if it was appended before the session's
    first opening: committing is over once anyone starts revealing, so a
    laggard cannot choose its value after seeing openings.
    """
    commits = []  # (seq, entity, value)
    opens = []  # (seq, entity, payload, nonce)
    for e in board.read(ctr=session.ctr, kind="RandCommitment"):
        sid, entity, value = wire.parse_rand_commitment_body(e.ctr, e.body)
        if sid == session:
            commits.append((e.seq, entity, value))
    for e in board.read(ctr=session.ctr, kind="RandOpening"):
        sid, entity, payload, nonce = wire.parse_rand_opening_body(e.ctr, e.body)
        if sid == session:
            opens.append((e.seq, entity, payload, nonce))
    first_open = min((seq for seq, *_ in opens), default=None)
    view = SessionView(session)
    for seq, entity, value in commits:
        if first_open is None or seq < first_open:
            view.commitments.setdefault(entity, value)
    for seq, entity, payload, nonce in opens:
        if entity in view.commitments:
            view.openings.setdefault(entity, (payload, nonce))
    return view


@dataclass(frozen=True)
class RandCheck:
    ok: bool
    rand: bytes = b""
    bad_entities: tuple = ()
    missing: tuple = ()


def verify_rand(view: SessionView, expected_entities) -> RandCheck:
    """Check openings against commitments and combine them.

    Fails when an entity's opening does not match its commitment, or when
    commitments or openings are missing (stalled or aborted entity).
    """
    expected = sorted(expected_entities)
    missing = tuple(
        ent
        for ent in expected
        if ent not in view.commitments or ent not in view.openings
    )
    if missing:
        return RandCheck(ok=False, missing=missing)
    bad = []
    for ent in expected:
        payload, nonce = view.openings[ent]
        if len(payload) != RAND_BYTES or not verify_open(
            view.commitments[ent], Opening(payload, nonce)
        ):
            bad.append(ent)
    if bad:
        return RandCheck(ok=False, bad_entities=tuple(bad))
    rand = combine_randomness([view.openings[ent][0] for ent in expected])
    return RandCheck(ok=True, rand=rand)


# --- routing verification ---------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of verifying one output batch's routing."""

    status: str  # "accept" | "commitment-error" | "routing-error" | "incomplete-session"
    session: SessionId = None
    offender: str = ""
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "accept"


def verify_routing(
    group,
    board,
    session: SessionId,
    outputs,
    capacities,
    next_ctr: int,
    expected_entities,
) -> Verdict:
    """Recompute the assignment for one batch and check the next layer
    fetched exactly what it was assigned.

    capacities are the next layer's (mix_id, throughput) pairs in
    canonical order. A mix "signed" a ciphertext when the ciphertext
    appears in its signed InputCiphertexts entry at next_ctr.
    """
    view = read_session(board, session)
    check = verify_rand(view, expected_entities)
    if check.missing:
        return Verdict(
            "incomplete-session",
            session,
            detail=f"missing commitment/opening from {', '.join(check.missing)}",
        )
    if not check.ok:
        return Verdict(
            "commitment-error",
            session,
            offender=",".join(check.bad_entities),
            detail="opening does not match commitment",
        )

    plan = assign(check.rand, len(outputs), capacities)

    signed = {}  # mix -> set of ciphertext bytes it signed as inputs
    for e in board.read(ctr=next_ctr, kind="InputCiphertexts"):
        mix, _, cts = wire.parse_batch_body(group, e.body)
        signed.setdefault(mix, set()).update(ct.serialize(group) for ct in cts)

    for pos in range(len(outputs)):
        mix = plan.mix_at_position(pos)
        ct_bytes = outputs[plan.z[pos] - 1].serialize(group)
        if ct_bytes not in signed.get(mix, set()):
            return Verdict(
                "routing-error",
                session,
                offender=mix,
                detail=f"assigned ciphertext at position {pos + 1} not in {mix}'s signed inputs",
            )
    return Verdict("accept", session)
