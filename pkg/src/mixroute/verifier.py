"""Transcript verification: every check, from transcript bytes alone.

Rebuilds the registry from the setup entry (the trust anchor), re-checks
every signature, every shuffle proof, every commitment opening, and every
routing assignment, without any simulator state. The offline `verify`
command reaches the same verdicts the auditors reached during the run.
"""

from dataclasses import dataclass, field

from mixroute import wire
from mixroute.board import BulletinBoard, signed_message
from mixroute.routing import assign, read_session, verify_rand
from mixroute.serialization import DeserializationError
from mixroute.shuffle import verify_shuffle
from mixroute.signatures import verify_sig
from mixroute.wire import SessionId

MAX_TOSS_ATTEMPTS = 64


@dataclass
class ReplayVerdict:
    ctr: int
    subject: str
    check: str  # "shuffle" | "routing"
    status: str  # "accept" | "shuffle-error" | "routing-error" | "commitment-error" | "incomplete-session"
    detail: str = ""

    @property
    def ok(self):
        return self.status == "accept"


@dataclass
class TranscriptReport:
    verdicts: list = field(default_factory=list)
    notes: list = field(default_factory=list)  # liveness events, reassignments
    error: str = ""  # structural problem: truncation, bad signature

    @property
    def ok(self) -> bool:
        return not self.error and all(v.ok for v in self.verdicts)


def _rebuild_board(entries):
    anchor = next((e for e in entries if e.kind == "PublicKey"), None)
    if anchor is None:
        raise DeserializationError("transcript has no PublicKey setup entry")
    group, pke, blocks, registry = wire.parse_public_key_body(anchor.body)
    board = BulletinBoard(group, registry)
    for e in entries:
        if e.author not in registry.servers:
            raise DeserializationError(
                f"entry seq={e.seq} authored by unregistered {e.author!r}"
            )
        pkv = registry.get(e.author).pkv
        if not verify_sig(group, pkv, signed_message(e.ctr, e.kind, e.body), e.signature):
            raise DeserializationError(
                f"entry seq={e.seq} by {e.author!r}: signature does not verify"
            )
        board.entries.append(e)
    return group, pke, registry, board


def verify_transcript(entries) -> TranscriptReport:
    """Replay all verification checks over imported transcript entries."""
    report = TranscriptReport()
    try:
        group, pke, registry, board = _rebuild_board(entries)
    except DeserializationError as exc:
        report.error = str(exc)
        return report

    depth = registry.layer_count()

    # protocol events posted by auditors during the run
    skipped = set()
    entry_ctr = 1
    reassignments = []  # (ctr, failed subject, session, survivors, cts)
    for e in board.read(kind="Reassignment"):
        scope, subject, session, survivors, cts = wire.parse_reassignment_body(
            group, e.ctr, e.body
        )
        if scope == "layer-skip":
            skipped.add(int(subject.split(":", 1)[1]))
            report.notes.append(
                f"layer {e.ctr} lost; its traffic rerouted to layer {session.target}"
            )
        elif scope == "new-entry-points":
            skipped.add(int(subject.split(":", 1)[1]))
            entry_ctr = session.target
            report.notes.append(f"entry layer moved to {session.target}")
        else:
            reassignments.append((e.ctr, subject, session, survivors, cts))
            report.notes.append(f"layer {e.ctr}: {subject}'s pending batch redistributed")

    inputs = {}  # (ctr, mix, attempt) -> cts
    outputs = {}
    proofs = {}
    for e in board.read(kind="InputCiphertexts"):
        mix, attempt, cts = wire.parse_batch_body(group, e.body)
        inputs[(e.ctr, mix, attempt)] = cts
    for e in board.read(kind="OutputCiphertexts"):
        mix, attempt, cts = wire.parse_batch_body(group, e.body)
        outputs[(e.ctr, mix, attempt)] = cts
    for e in board.read(kind="ShuffleProof"):
        mix, attempt, proof = wire.parse_shuffle_proof_body(group, e.body)
        proofs[(e.ctr, mix, attempt)] = proof

    layers = [c for c in range(entry_ctr, depth + 1) if c not in skipped]
    output_layers = {k[0] for k in outputs}
    if not layers or not output_layers:
        report.error = "transcript contains no output batches"
        return report
    final_ctr = max(output_layers)

    # shuffle checks: every published output batch needs a verifying proof
    routable = {}  # ctr -> [(mix, attempt, out_cts)]
    for key in sorted(outputs):
        ctr, mix, attempt = key
        out_cts = outputs[key]
        in_cts = inputs.get(key)
        if in_cts is None:
            report.verdicts.append(
                ReplayVerdict(ctr, mix, "shuffle", "incomplete-session",
                              f"output batch attempt {attempt} has no input batch")
            )
            continue
        context = wire.proof_context(group, pke, ctr, mix, attempt)
        proof = proofs.get(key)
        if proof is None or not verify_shuffle(group, pke, context, in_cts, out_cts, proof):
            report.verdicts.append(
                ReplayVerdict(ctr, mix, "shuffle", "shuffle-error", f"batch attempt {attempt}")
            )
            continue
        report.verdicts.append(
            ReplayVerdict(ctr, mix, "shuffle", "accept", f"attempt {attempt}")
        )
        routable.setdefault(ctr, []).append((mix, attempt, out_cts))

    reassigned_mixes = {(ctr, subject) for ctr, subject, *_ in reassignments}
    for key in sorted(inputs):
        ctr, mix, attempt = key
        if not any(k[0] == ctr and k[1] == mix for k in outputs):
            if (ctr, mix) in reassigned_mixes:
                report.notes.append(f"layer {ctr}: {mix} stalled; batch was recovered")
            # a stalled mix whose assigned inputs were never posted shows up
            # through the routing checks below instead

    # routing: each valid batch's session must assign exactly what the
    # next layer's mixes signed as inputs
    for idx, ctr in enumerate(layers):
        if ctr >= final_ctr:
            break
        target = layers[idx + 1]
        caps = [(s.identity, s.throughput) for s in registry.mixes_in_layer(target)]
        for mix, attempt, out_cts in routable.get(ctr, []):
            sid = SessionId(ctr, mix, attempt, target, 0)
            report.verdicts.append(
                _verify_batch_routing(group, board, sid, out_cts, caps, target, inputs)
            )

    # recovery sessions redistribute a failed mix's pending batch inside
    # its own layer; the Reassignment entry pins the survivor set
    for ctr, subject, session, survivors, cts in reassignments:
        surv_caps = [
            (s.identity, s.throughput)
            for s in registry.mixes_in_layer(ctr)
            if s.identity in survivors
        ]
        report.verdicts.append(
            _verify_batch_routing(group, board, session, cts, surv_caps, ctr, inputs)
        )

    return report


def _verify_batch_routing(group, board, base_sid, out_cts, caps, target_ctr, inputs):
    """Walk toss attempts to the first complete session and check that the
    assigned mixes signed the ciphertexts they were given."""
    last_missing = ""
    for toss in range(MAX_TOSS_ATTEMPTS):
        sid = base_sid.with_toss(toss)
        view = read_session(board, sid)
        if not view.commitments:
            break
        check = verify_rand(view, sorted(view.commitments))
        if check.missing:
            last_missing = f"toss {toss}: no opening from {', '.join(check.missing)}"
            continue  # aborted attempt; the next one is binding
        if not check.ok:
            return ReplayVerdict(
                sid.ctr, ",".join(check.bad_entities), "routing", "commitment-error",
                f"{sid.label()}: opening does not match commitment",
            )
        plan = assign(check.rand, len(out_cts), caps)
        signed = {}
        for (ctr, mix, attempt), cts in inputs.items():
            if ctr == target_ctr:
                signed.setdefault(mix, set()).update(ct.serialize(group) for ct in cts)
        for pos in range(len(out_cts)):
            mix = plan.mix_at_position(pos)
            ct_bytes = out_cts[plan.z[pos] - 1].serialize(group)
            if ct_bytes not in signed.get(mix, set()):
                return ReplayVerdict(
                    sid.ctr, mix, "routing", "routing-error",
                    f"{sid.label()}: assigned ciphertext missing from {mix}'s signed inputs",
                )
        return ReplayVerdict(sid.ctr, sid.source, "routing", "accept", sid.label())
    return ReplayVerdict(
        base_sid.ctr, base_sid.source, "routing", "incomplete-session",
        last_missing or f"no complete coin-toss session for {base_sid.label()}",
    )
