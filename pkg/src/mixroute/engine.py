"""Deterministic time-frame simulator.

Runs one batching epoch end to end over an in-process bulletin board:
users encrypt and submit, each layer of mixes re-randomizes and shuffles
with proofs, routing entities toss coins per output batch, auditors
verify everything and finally threshold-decrypt. Adversarial behaviors
and scheduled removals are injected per configuration; every recovery
path redistributes pending ciphertexts so that submitted messages still
come out the far end.

All randomness derives from the config seed, so equal configurations
produce byte-identical transcripts.
"""

import hashlib
import random
import time
from dataclasses import dataclass, field

from mixroute import wire
from mixroute.board import BulletinBoard, ServerInfo, ServerRegistry
from mixroute.elgamal import (
    combine_decrypt,
    encrypt,
    keygen_threshold,
    partial_decrypt,
)
from mixroute.group import DecodeError, get_group
from mixroute.hashing import KEY_DERIVATION, commit
from mixroute.routing import (
    assign,
    combine_randomness,
    quotas,
    read_session,
    verify_rand,
    verify_routing,
)
from mixroute.serialization import Reader, prefixed_str, u32, u64
from mixroute.shuffle import (
    ShuffleProof,
    challenge_bytes,
    prove_shuffle,
    random_permutation,
    shuffle,
    simulate_proof,
    verify_shuffle,
)
from mixroute.signatures import keygen_sig, sign
from mixroute.topology import MixSpec, build_topology, layer_count
from mixroute.wire import SessionId

MIX_BEHAVIORS = ("passive-observe", "wrong-routing", "invalid-shuffle")
RE_BEHAVIORS = ("passive-observe", "abort-after-commit", "grind")


class ConfigError(ValueError):
    pass


class UnrecoverableError(Exception):
    """Topology collapse with no recovery path; partial result attached."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class CorruptSpec:
    identity: str
    behavior: str
    grind_attempts: int = 1
    grind_target: str = ""


@dataclass(frozen=True)
class AdversarySpec:
    servers: tuple = ()

    def behavior_of(self, identity: str) -> str:
        for s in self.servers:
            if s.identity == identity:
                return s.behavior
        return ""

    def spec_of(self, identity: str):
        for s in self.servers:
            if s.identity == identity:
                return s
        return None


@dataclass(frozen=True)
class FaultEvent:
    phase: str  # "collect" | "mix" | "toss" | "decrypt"
    ctr: int
    scope: str  # "mix:<id>" | "layer:<k>" | "re:<id>" | "auditor:<id>"


@dataclass
class TimeFrameConfig:
    n_messages: int
    mixes: list
    v: int = 3
    d: int = 3
    z: int = 2
    k: int = 16
    blocks: int = 2
    seed: int = 0
    group_name: str = "schnorr256"
    layers: int = 0  # 0 = layer_count(n_messages)
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    faults: tuple = ()
    messages: list = None  # [(receiver, payload bytes)]; None = generated

    def depth(self) -> int:
        return self.layers or layer_count(self.n_messages)


@dataclass
class BatchRecord:
    """One input batch of one mix (attempt 0 = primary, >0 = recovery)."""

    ctr: int
    mix: str
    attempt: int
    input_cts: list
    input_ids: list
    output_cts: list = None
    output_ids: list = None
    discarded: bool = False
    verified: bool = False

    @property
    def key(self):
        return (self.ctr, self.mix, self.attempt)


@dataclass
class VerdictRecord:
    ctr: int
    subject: str
    status: str  # "accept" | "routing-error" | "shuffle-error" | "commitment-error" | "liveness"
    detail: str = ""


@dataclass
class TimeFrameResult:
    delivered: list = field(default_factory=list)  # (receiver, payload)
    submitted: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    misbehavior: list = field(default_factory=list)
    reassignments: int = 0
    anonymity_notes: list = field(default_factory=list)
    layer_steps: dict = field(default_factory=dict)
    layer_seconds: dict = field(default_factory=dict)
    message_paths: list = field(default_factory=list)
    grind_stats: dict = field(default_factory=dict)
    transcript: str = ""
    failure: str = ""
    enc_keypair: object = None  # simulator-private; tests use it as an oracle

    @property
    def delivered_all(self) -> bool:
        return not self.failure and sorted(self.delivered) == sorted(self.submitted)


def derive_rng(seed: int, label: str) -> random.Random:
    digest = hashlib.sha256(KEY_DERIVATION + u64(seed) + label.encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


def pack_user_payload(receiver: str, message: bytes) -> bytes:
    return prefixed_str(receiver) + message


def unpack_user_payload(payload: bytes):
    r = Reader(payload)
    receiver = r.prefixed_str()
    return receiver, payload[r.pos :]


def adversary_grind(honest_rands, candidates, w, capacities, target_index, target_mix):
    """Post-hoc selection among precomputed candidate openings.

    Models a committer holding multiple openings of one commitment: the
    candidates are fixed before the honest openings are known; after
    seeing them the adversary picks any candidate that steers the target
    ciphertext to the target mix. Returns (success, chosen candidate).
    A failed grind opens the first candidate and is indistinguishable
    from honest participation.
    """
    if not candidates:
        return False, None
    for cand in candidates:
        rand = combine_randomness(list(honest_rands) + [cand])
        plan = assign(rand, w, capacities)
        position = plan.z.index(target_index)
        if plan.mix_at_position(position) == target_mix:
            return True, cand
    return False, candidates[0]


# --- parties ----------------------------------------------------------------


@dataclass
class MixParty:
    spec: MixSpec
    keys: object
    rng: random.Random
    behavior: str = ""
    alive: bool = True
    expelled: bool = False
    inbox: list = field(default_factory=list)  # (ciphertext, message id)
    deviated: bool = False
    next_attempt: int = 0

    @property
    def identity(self):
        return self.spec.identity


@dataclass
class REParty:
    identity: str
    keys: object
    rng: random.Random
    behavior: str = ""
    grind_attempts: int = 1
    grind_target: str = ""
    alive: bool = True
    excluded: bool = False
    strikes: int = 0


@dataclass
class AuditorParty:
    identity: str
    keys: object
    share: object
    rng: random.Random
    honest: bool = True
    alive: bool = True


@dataclass
class UserParty:
    identity: str
    rng: random.Random
    receiver: str
    message: bytes
    msg_id: int
    entry_mix: str = ""
    ciphertext: object = None
    ct_bytes: bytes = b""


# --- engine -----------------------------------------------------------------


class TimeFrameEngine:
    def __init__(self, config: TimeFrameConfig):
        self.cfg = config
        self.group = get_group(config.group_name)
        self._validate()
        self.topology = build_topology(config.mixes, config.depth())
        self.depth = self.topology.depth
        self.result = TimeFrameResult()
        self.batches = {}  # (ctr, mix, attempt) -> BatchRecord
        self.plans = {}  # (ctr, source, batch) -> (SessionId, rand, AssignmentList)
        self.skipped_layers = set()
        self.entry_ctr = 1
        self.final_ctr = None

    # -- setup ---------------------------------------------------------------

    def _validate(self):
        cfg = self.cfg
        if cfg.n_messages < 1:
            raise ConfigError("n_messages must be >= 1")
        if not 1 <= cfg.z <= cfg.d:
            raise ConfigError("decryption threshold must satisfy 1 <= z <= d")
        if cfg.v < 1:
            raise ConfigError("at least one routing entity required")
        if cfg.k < 1:
            raise ConfigError("shuffle soundness parameter k must be >= 1")
        known = {m.identity for m in cfg.mixes}
        known.update(f"RE{i}" for i in range(1, cfg.v + 1))
        known.update(f"AS{i}" for i in range(1, cfg.d + 1))
        corrupt_auditors = 0
        for s in cfg.adversary.servers:
            if s.identity not in known:
                raise ConfigError(f"adversary names unknown server {s.identity!r}")
            if s.identity.startswith("AS"):
                corrupt_auditors += 1
                if s.behavior != "passive-observe":
                    raise ConfigError("corrupt auditors are passive observers")
            elif s.identity.startswith("RE"):
                if s.behavior not in RE_BEHAVIORS:
                    raise ConfigError(f"unknown routing-entity behavior {s.behavior!r}")
            elif s.behavior not in MIX_BEHAVIORS:
                raise ConfigError(f"unknown mix behavior {s.behavior!r}")
        if corrupt_auditors and corrupt_auditors >= cfg.z:
            raise ConfigError("corrupt auditors must number fewer than the threshold z")
        if corrupt_auditors >= cfg.d:
            raise ConfigError("at least one honest auditor is required")
        if cfg.faults:
            for ev in cfg.faults:
                if ev.phase not in ("collect", "mix", "recover", "toss", "decrypt"):
                    raise ConfigError(f"unknown fault phase {ev.phase!r}")
            # availability mode: removals need someone left to take over
            for layer in build_topology(cfg.mixes, cfg.depth()).layers:
                if len(layer) < 2 and any(
                    ev.scope.startswith(("mix:", "layer:")) for ev in cfg.faults
                ):
                    raise ConfigError(
                        "availability mode needs at least two mixes per layer"
                    )

    def _setup(self):
        cfg = self.cfg
        adv = cfg.adversary
        self.dealer_rng = derive_rng(cfg.seed, "dealer")
        self.keypair = keygen_threshold(self.group, cfg.d, cfg.z, self.dealer_rng)
        self.result.enc_keypair = self.keypair

        registry = ServerRegistry()
        self.mixes = {}
        for layer_idx, layer in enumerate(self.topology.layers, start=1):
            for spec in layer:
                party = MixParty(
                    spec=MixSpec(spec.identity, spec.throughput, spec.organization, layer_idx),
                    keys=keygen_sig(self.group, derive_rng(cfg.seed, f"mixkey/{spec.identity}")),
                    rng=derive_rng(cfg.seed, f"mix/{spec.identity}"),
                    behavior=adv.behavior_of(spec.identity),
                )
                self.mixes[spec.identity] = party
                registry.register(
                    ServerInfo(
                        spec.identity, "mix", party.keys.pkv, layer_idx,
                        spec.throughput, spec.organization,
                    )
                )
        self.res = {}
        for i in range(1, cfg.v + 1):
            ident = f"RE{i}"
            spec = adv.spec_of(ident)
            party = REParty(
                identity=ident,
                keys=keygen_sig(self.group, derive_rng(cfg.seed, f"rekey/{ident}")),
                rng=derive_rng(cfg.seed, f"re/{ident}"),
                behavior=adv.behavior_of(ident),
                grind_attempts=spec.grind_attempts if spec else 1,
                grind_target=spec.grind_target if spec else "",
            )
            self.res[ident] = party
            registry.register(ServerInfo(ident, "routing-entity", party.keys.pkv))
        self.auditors = {}
        for i in range(1, cfg.d + 1):
            ident = f"AS{i}"
            party = AuditorParty(
                identity=ident,
                keys=keygen_sig(self.group, derive_rng(cfg.seed, f"askey/{ident}")),
                share=self.keypair.shares[i - 1],
                rng=derive_rng(cfg.seed, f"as/{ident}"),
                honest=adv.behavior_of(ident) == "",
            )
            self.auditors[ident] = party
            registry.register(ServerInfo(ident, "auditor", party.keys.pkv))

        self.registry = registry
        self.board = BulletinBoard(self.group, registry)

        messages = cfg.messages
        if messages is None:
            messages = [(f"recv-{i:04d}", f"msg-{i:04d}".encode()) for i in range(cfg.n_messages)]
        if len(messages) != cfg.n_messages:
            raise ConfigError("messages list must match n_messages")
        self.users = []
        for i, (receiver, payload) in enumerate(messages):
            ident = f"u{i:05d}"
            self.board.register_user(ident)
            self.users.append(
                UserParty(ident, derive_rng(cfg.seed, f"user/{ident}"), receiver, payload, i)
            )
        self.result.submitted = [(r, p) for r, p in messages]
        self.result.message_paths = [[] for _ in messages]

        # setup entry: public key + registry, posted by the first auditor
        body = wire.public_key_body(self.group, self.keypair.pke, registry, cfg.blocks)
        self._post("AS1", self.auditors["AS1"], 0, "PublicKey", body)

    def _post(self, ident, party, ctr, kind, body):
        from mixroute.board import signed_message

        sig = sign(self.group, party.keys.sks, signed_message(ctr, kind, body), party.rng)
        return self.board.append(ctr, kind, body, ident, sig)

    def _step(self, ctr):
        self.result.layer_steps[ctr] = self.result.layer_steps.get(ctr, 0) + 1

    def _reporter(self):
        for ident in sorted(self.auditors):
            a = self.auditors[ident]
            if a.alive and a.honest:
                return a
        return None

    def _alive_mixes(self, ctr):
        return [
            self.mixes[mid]
            for mid, _ in self.topology.capacities(ctr)
            if self.mixes[mid].alive and not self.mixes[mid].expelled
        ]

    def _capacities(self, ctr):
        return [
            (mid, b)
            for mid, b in self.topology.capacities(ctr)
            if not self.mixes[mid].expelled
        ]

    # -- faults ----------------------------------------------------------------

    def _apply_faults(self, phase, ctr):
        for ev in self.cfg.faults:
            if ev.phase != phase or ev.ctr != ctr:
                continue
            kind, _, name = ev.scope.partition(":")
            if kind == "mix":
                self.mixes[name].alive = False
            elif kind == "layer":
                for mid, _ in self.topology.capacities(int(name)):
                    self.mixes[mid].alive = False
            elif kind == "re":
                self.res[name].alive = False
            elif kind == "auditor":
                self.auditors[name].alive = False
            else:
                raise ConfigError(f"unknown fault scope {ev.scope!r}")
            self.result.misbehavior.append(f"fault: {ev.scope} removed at {phase}/{ctr}")

    # -- user submission -------------------------------------------------------

    def _encrypt_and_submit(self):
        entry_caps = self.topology.capacities(1)
        share = quotas(len(self.users), [b for _, b in entry_caps])
        slot = []
        for (mid, _), n in zip(entry_caps, share):
            slot.extend([mid] * n)
        for user in self.users:
            payload = pack_user_payload(user.receiver, user.message)
            user.ciphertext = encrypt(
                self.group, self.keypair.pke, payload, self.cfg.blocks, user.rng
            )
            user.ct_bytes = user.ciphertext.serialize(self.group)
            user.entry_mix = slot[user.msg_id]
            self.mixes[user.entry_mix].inbox.append((user.ciphertext, user.msg_id))

    # -- entry layer -----------------------------------------------------------

    def _collect_entry(self, ctr) -> bool:
        self._step(ctr)
        alive = self._alive_mixes(ctr)
        if not alive:
            # the whole entry layer is gone: designate the next layer as
            # the new entry points and have users resubmit
            if ctr + 1 > self.depth:
                self._fail("no layer available to accept submissions")
            new_caps = self._capacities(ctr + 1)
            survivors = [mid for mid, _ in new_caps if self.mixes[mid].alive]
            if not survivors:
                self._fail("no alive mixes to serve as new entry points")
            reporter = self._reporter()
            if reporter:
                body = wire.reassignment_body(
                    self.group, "new-entry-points", f"layer:{ctr}",
                    SessionId(ctr, "entry", 0, ctr + 1, 0), survivors, [],
                )
                self._post(reporter.identity, reporter, ctr, "Reassignment", body)
            surv_caps = [(mid, b) for mid, b in new_caps if mid in survivors]
            share = quotas(len(self.users), [b for _, b in surv_caps])
            slot = []
            for (mid, _), n in zip(surv_caps, share):
                slot.extend([mid] * n)
            for user in self.users:
                user.entry_mix = slot[user.msg_id]
                self.mixes[user.entry_mix].inbox.append((user.ciphertext, user.msg_id))
            self.skipped_layers.add(ctr)
            self.result.anonymity_notes.append(
                f"layer {ctr} lost before collection: all messages mixed by one layer fewer"
            )
            self.result.reassignments += 1
            return False

        def post_inbox(mix, attempt):
            cts = [ct for ct, _ in mix.inbox]
            ids = [mid for _, mid in mix.inbox]
            mix.inbox = []
            body = wire.batch_body(self.group, mix.identity, attempt, cts)
            self._post(mix.identity, mix, ctr, "InputCiphertexts", body)
            rec = BatchRecord(ctr, mix.identity, attempt, cts, ids)
            self.batches[rec.key] = rec
            mix.next_attempt = attempt + 1

        for mix in alive:
            if mix.inbox:
                post_inbox(mix, 0)

        # users whose ciphertext is missing resubmit to the next alive mix
        posted = set()
        for e in self.board.read(ctr=ctr, kind="InputCiphertexts"):
            _, _, cts = wire.parse_batch_body(self.group, e.body)
            posted.update(ct.serialize(self.group) for ct in cts)
        stranded = [u for u in self.users if u.ct_bytes not in posted]
        if stranded:
            self._step(ctr)
            order = [m.identity for m in alive]
            for user in stranded:
                fallback = order[user.msg_id % len(order)]
                self.mixes[fallback].inbox.append((user.ciphertext, user.msg_id))
                self.result.misbehavior.append(
                    f"user {user.identity} resubmitted to {fallback}"
                )
            for mix in alive:
                if mix.inbox:
                    post_inbox(mix, mix.next_attempt)
        return True

    # -- routed collection -------------------------------------------------------

    def _sessions_targeting(self, ctr):
        out = []
        for key in sorted(self.plans):
            sid, rand, plan = self.plans[key]
            if sid.target == ctr:
                out.append((key, sid, rand, plan))
        return out

    def _assigned_map(self, ctr):
        """mix -> list of (ciphertext, id) assigned by sessions targeting ctr."""
        assigned = {mid: [] for mid, _ in self._capacities(ctr)}
        for key, sid, rand, plan in self._sessions_targeting(ctr):
            src_ctr, source, batch = key
            if source.startswith("reassign:"):
                continue  # in-layer recovery, handled where it was created
            rec = self.batches[(src_ctr, source, batch)]
            for mid in assigned:
                for idx in plan.indices_for(mid):
                    assigned[mid].append((rec.output_cts[idx], rec.output_ids[idx]))
        return assigned

    def _collect_routed(self, ctr):
        self._step(ctr)
        assigned = self._assigned_map(ctr)
        alive = {m.identity for m in self._alive_mixes(ctr)}
        for mid in sorted(assigned):
            mix = self.mixes[mid]
            if mid not in alive:
                continue
            cts_ids = list(assigned[mid])
            if mix.behavior == "wrong-routing" and not mix.deviated:
                steal = None
                for other in sorted(assigned):
                    if other != mid and assigned[other]:
                        steal = assigned[other][0]
                        break
                if steal and cts_ids:
                    dropped = cts_ids[0]
                    cts_ids[0] = steal
                    mix.deviated = True
                    self.result.misbehavior.append(
                        f"{mid} fetched a ciphertext assigned to another mix "
                        f"and dropped one of its own"
                    )
            if not cts_ids:
                continue
            cts = [c for c, _ in cts_ids]
            ids = [i for _, i in cts_ids]
            body = wire.batch_body(self.group, mid, 0, cts)
            self._post(mid, mix, ctr, "InputCiphertexts", body)
            rec = BatchRecord(ctr, mid, 0, cts, ids)
            self.batches[rec.key] = rec
            mix.next_attempt = 1

    def _verify_routing_into(self, ctr):
        """Auditors check every session targeting ctr now that inputs are
        posted; offenders are expelled and their assigned inputs
        redistributed inside layer ctr."""
        self._step(ctr)
        if not any(a.alive and a.honest for a in self.auditors.values()):
            return
        assigned = self._assigned_map(ctr)
        offenders = {}
        for key, sid, rand, plan in self._sessions_targeting(ctr):
            src_ctr, source, batch = key
            if source.startswith("reassign:"):
                continue
            rec = self.batches[(src_ctr, source, batch)]
            entities = self._session_entities(sid)
            verdict = verify_routing(
                self.group, self.board, sid, rec.output_cts,
                self._capacities(ctr), ctr, entities,
            )
            if verdict.ok:
                continue
            if verdict.status == "routing-error":
                mix = self.mixes[verdict.offender]
                code = "liveness" if not mix.alive else "routing-error"
                offenders.setdefault(verdict.offender, code)
                self.result.verdicts.append(
                    VerdictRecord(ctr, verdict.offender, code, verdict.detail)
                )
            else:
                self.result.verdicts.append(
                    VerdictRecord(ctr, source, verdict.status, verdict.detail)
                )
        for offender in sorted(offenders):
            pending = assigned.get(offender, [])
            self._expel_and_reassign(ctr, offender, pending, offenders[offender])

    def _session_entities(self, sid):
        view = read_session(self.board, sid)
        return sorted(view.commitments)

    # -- recovery ----------------------------------------------------------------

    def _fail(self, reason):
        self.result.failure = reason
        raise UnrecoverableError(reason, self.result)

    def _expel_and_reassign(self, ctr, offender, pending, code, detail=""):
        """Expel a mix and redistribute its pending inputs over the layer's
        survivors with a fresh joint-randomness session."""
        mix = self.mixes[offender]
        mix.expelled = True
        reporter = self._reporter()
        if reporter:
            body = wire.failure_body(offender, code, detail or f"layer {ctr}")
            self._post(reporter.identity, reporter, ctr, "VerificationFailure", body)
        if not pending:
            return
        survivors = [m for m in self._alive_mixes(ctr) if m.identity != offender]
        if not survivors:
            self._fail(f"layer {ctr} has no survivors to absorb {offender}'s batch")
        surv_caps = [
            (mid, b) for mid, b in self._capacities(ctr)
            if self.mixes[mid].alive and mid != offender
        ]
        cts = [c for c, _ in pending]
        ids = [i for _, i in pending]
        sid = SessionId(ctr, f"reassign:{offender}", 0, ctr, 0)
        if reporter:
            body = wire.reassignment_body(
                self.group, "mix-failure", offender, sid,
                [mid for mid, _ in surv_caps], cts,
            )
            self._post(reporter.identity, reporter, ctr, "Reassignment", body)
        self.result.reassignments += 1
        sid, rand, plan = self._run_toss(sid, len(cts), surv_caps)
        for mid, _ in surv_caps:
            idxs = plan.indices_for(mid)
            if not idxs:
                continue
            survivor = self.mixes[mid]
            batch_cts = [cts[i] for i in idxs]
            batch_ids = [ids[i] for i in idxs]
            attempt = survivor.next_attempt
            survivor.next_attempt += 1
            body = wire.batch_body(self.group, mid, attempt, batch_cts)
            self._post(mid, survivor, ctr, "InputCiphertexts", body)
            rec = BatchRecord(ctr, mid, attempt, batch_cts, batch_ids)
            self.batches[rec.key] = rec

    # -- mixing --------------------------------------------------------------------

    def _mix_layer(self, ctr):
        self._step(ctr)
        for key in sorted(self.batches):
            rec = self.batches[key]
            if rec.ctr != ctr or rec.output_cts is not None or rec.discarded:
                continue
            mix = self.mixes[rec.mix]
            if not mix.alive or mix.expelled:
                continue
            self._mix_batch(mix, rec)

    def _mix_batch(self, mix, rec):
        ctr = rec.ctr
        w = len(rec.input_cts)
        phi = random_permutation(w, mix.rng)
        outputs, witness = shuffle(self.group, self.keypair.pke, rec.input_cts, phi, mix.rng)
        out_ids = [rec.input_ids[phi[i]] for i in range(w)]
        context = self._proof_context(ctr, mix.identity, rec.attempt)

        if mix.behavior == "invalid-shuffle" and not mix.deviated:
            mix.deviated = True
            junk = encrypt(
                self.group, self.keypair.pke, b"tampered", self.cfg.blocks, mix.rng
            )
            outputs = [junk] + outputs[1:]
            out_ids = [-1] + out_ids[1:]
            # forge: guess the challenge bits and simulate; survives only
            # if the hash happens to match the guess
            guess = [mix.rng.randrange(2) for _ in range(self.cfg.k)]
            shadows, responses = simulate_proof(
                self.group, self.keypair.pke, rec.input_cts, outputs, guess, mix.rng
            )
            challenge = challenge_bytes(
                self.group, context, rec.input_cts, outputs, shadows, self.cfg.k
            )
            proof = ShuffleProof(shadows, challenge, responses)
            self.result.misbehavior.append(
                f"{mix.identity} tampered with its output batch and forged a proof"
            )
        else:
            proof = prove_shuffle(
                self.group, self.keypair.pke, context,
                rec.input_cts, outputs, witness, self.cfg.k, mix.rng,
            )
        rec.output_cts = outputs
        rec.output_ids = out_ids
        for i in out_ids:
            if i >= 0:
                self.result.message_paths[i].append(mix.identity)
        body = wire.batch_body(self.group, mix.identity, rec.attempt, outputs)
        self._post(mix.identity, mix, ctr, "OutputCiphertexts", body)
        body = wire.shuffle_proof_body(self.group, mix.identity, rec.attempt, proof)
        self._post(mix.identity, mix, ctr, "ShuffleProof", body)

    def _proof_context(self, ctr, mix_id, attempt):
        return wire.proof_context(self.group, self.keypair.pke, ctr, mix_id, attempt)

    def _verify_mixing(self, ctr):
        """Check every proof at ctr; expel cheats and stalled mixes, hand
        their input batches to survivors, and verify the recovery batches
        too. Loops until the layer is stable."""
        self._step(ctr)
        detect = any(a.alive and a.honest for a in self.auditors.values())
        proofs = {}
        for e in self.board.read(ctr=ctr, kind="ShuffleProof"):
            mid, attempt, proof = wire.parse_shuffle_proof_body(self.group, e.body)
            proofs[(ctr, mid, attempt)] = proof

        for _ in range(len(self.mixes) + 2):
            failed = {}
            for key in sorted(self.batches):
                rec = self.batches[key]
                if rec.ctr != ctr or rec.discarded or rec.verified:
                    continue
                mix = self.mixes[rec.mix]
                if rec.output_cts is None:
                    if mix.expelled:
                        rec.discarded = True
                        continue
                    # collected inputs but never produced outputs
                    failed.setdefault(rec.mix, ("liveness", "no output batch"))
                    continue
                if not detect:
                    rec.verified = True
                    continue
                proof = proofs.get(key)
                ok = proof is not None and verify_shuffle(
                    self.group, self.keypair.pke,
                    self._proof_context(ctr, rec.mix, rec.attempt),
                    rec.input_cts, rec.output_cts, proof,
                )
                if ok:
                    rec.verified = True
                else:
                    failed.setdefault(
                        rec.mix, ("shuffle-error", f"batch attempt {rec.attempt}")
                    )
            if not failed:
                return
            for offender in sorted(failed):
                code, detail = failed[offender]
                self.result.verdicts.append(VerdictRecord(ctr, offender, code, detail))
                # already-verified batches stay published; only the
                # offender's unverified work gets redistributed
                pending = []
                for key in sorted(self.batches):
                    rec = self.batches[key]
                    if (
                        rec.ctr == ctr
                        and rec.mix == offender
                        and not rec.discarded
                        and not rec.verified
                    ):
                        pending.extend(zip(rec.input_cts, rec.input_ids))
                        rec.discarded = True
                self._expel_and_reassign(ctr, offender, pending, code, detail)
            # refresh proofs and mix the recovery batches just posted
            self._apply_faults("recover", ctr)
            self._mix_layer(ctr)
            proofs = {}
            for e in self.board.read(ctr=ctr, kind="ShuffleProof"):
                mid, attempt, proof = wire.parse_shuffle_proof_body(self.group, e.body)
                proofs[(ctr, mid, attempt)] = proof
        self._fail(f"layer {ctr} never stabilized")

    def _valid_batches(self, ctr):
        out = []
        for key in sorted(self.batches):
            rec = self.batches[key]
            if rec.ctr == ctr and not rec.discarded and rec.output_cts is not None:
                out.append(rec)
        return out

    # -- coin tossing ----------------------------------------------------------------

    def _toss_layer(self, ctr, target):
        self._step(ctr)
        caps = self._capacities(target)
        for rec in self._valid_batches(ctr):
            sid = SessionId(ctr, rec.mix, rec.attempt, target, 0)
            sid, rand, plan = self._run_toss(sid, len(rec.output_cts), caps)
            self.plans[(ctr, rec.mix, rec.attempt)] = (sid, rand, plan)

    def _retoss_for_skip(self, skipped_ctr, target):
        """A whole layer vanished: fresh randomness assigns the batches
        that were headed for it to the layer after."""
        reporter = self._reporter()
        if reporter:
            body = wire.reassignment_body(
                self.group, "layer-skip", f"layer:{skipped_ctr}",
                SessionId(skipped_ctr, "entry", 0, target, 0),
                [mid for mid, _ in self._capacities(target)], [],
            )
            self._post(
                reporter.identity, reporter, skipped_ctr, "Reassignment", body
            )
        self.result.reassignments += 1
        caps = self._capacities(target)
        for key, sid, rand, plan in self._sessions_targeting(skipped_ctr):
            src_ctr, source, batch = key
            rec = self.batches.get((src_ctr, source, batch))
            if rec is None or rec.discarded:
                continue
            # toss retries are scoped per target layer, so the fresh
            # sessions for the new target start at toss 0
            new_sid = SessionId(src_ctr, source, batch, target, 0)
            new_sid, rand, plan = self._run_toss(new_sid, len(rec.output_cts), caps)
            self.plans[key] = (new_sid, rand, plan)
        for i in range(len(self.result.message_paths)):
            self.result.anonymity_notes.append(
                f"layer {skipped_ctr} lost: affected messages mixed by one layer fewer"
            )
            break

    def _run_toss(self, sid: SessionId, w: int, caps):
        """Commit-reveal among the available routing entities, with retry
        on abort and vote-out after the second strike."""
        for _ in range(2 * len(self.res) + 2):
            entities = [
                re for re in self.res.values() if re.alive and not re.excluded
            ]
            if not entities:
                self._fail("no routing entities left to toss")
            commits = {}
            grinders = []
            for re in sorted(entities, key=lambda r: r.identity):
                if re.behavior == "grind" and re.grind_target:
                    candidates = [
                        re.rng.getrandbits(256).to_bytes(32, "big")
                        for _ in range(max(re.grind_attempts, 1))
                    ]
                    # the wire behavior stays honest: the first candidate is
                    # committed and opened; steering success of the modeled
                    # multi-opening set is tracked in grind_stats
                    value, opening = commit(candidates[0], re.rng)
                    commits[re.identity] = (value, opening, candidates)
                    grinders.append(re)
                else:
                    payload = re.rng.getrandbits(256).to_bytes(32, "big")
                    value, opening = commit(payload, re.rng)
                    commits[re.identity] = (value, opening, None)
                body = wire.rand_commitment_body(sid, re.identity, value.value)
                self._post(re.identity, re, sid.ctr, "RandCommitment", body)

            aborted = []
            opened = []
            for re in sorted(entities, key=lambda r: r.identity):
                if re.behavior == "abort-after-commit" and re.strikes < 2:
                    re.strikes += 1
                    aborted.append(re)
                    self.result.misbehavior.append(
                        f"{re.identity} aborted after committing ({sid.label()})"
                    )
                    continue
                if re in grinders:
                    continue  # grinders reveal last
                _, opening, _ = commits[re.identity]
                body = wire.rand_opening_body(sid, re.identity, opening.payload, opening.nonce)
                self._post(re.identity, re, sid.ctr, "RandOpening", body)
                opened.append(opening.payload)
            for re in grinders:
                if re.behavior == "abort-after-commit":
                    continue
                _, opening, candidates = commits[re.identity]
                others = list(opened)
                success, _ = adversary_grind(
                    others, candidates, w, caps, 1, re.grind_target
                )
                stats = self.result.grind_stats.setdefault(
                    re.identity, {"sessions": 0, "steered": 0}
                )
                stats["sessions"] += 1
                stats["steered"] += int(success)
                body = wire.rand_opening_body(sid, re.identity, opening.payload, opening.nonce)
                self._post(re.identity, re, sid.ctr, "RandOpening", body)

            view = read_session(self.board, sid)
            check = verify_rand(view, sorted(view.commitments))
            if check.ok:
                return sid, check.rand, assign(check.rand, w, caps)
            for ident in check.bad_entities:
                # provable misbehavior: opening does not match commitment
                self.res[ident].excluded = True
                self.result.verdicts.append(
                    VerdictRecord(sid.ctr, ident, "commitment-error", sid.label())
                )
                reporter = self._reporter()
                if reporter:
                    body = wire.failure_body(
                        ident, "commitment-error", "opening does not match commitment"
                    )
                    self._post(
                        reporter.identity, reporter, sid.ctr, "VerificationFailure", body
                    )
            for re in aborted:
                if re.strikes >= 2:
                    re.excluded = True
                    reporter = self._reporter()
                    if reporter:
                        body = wire.failure_body(
                            re.identity, "re-vote-out", "aborted twice after committing"
                        )
                        self._post(
                            reporter.identity, reporter, sid.ctr,
                            "VerificationFailure", body,
                        )
                    self.result.misbehavior.append(f"{re.identity} voted out")
            sid = sid.with_toss(sid.toss + 1)
        self._fail("coin tossing never completed")

    # -- decryption --------------------------------------------------------------------

    def _decrypt(self):
        self._apply_faults("decrypt", 0)
        available = [a for a in self.auditors.values() if a.alive]
        if len(available) < self.cfg.z:
            self._fail(
                f"threshold failure: {len(available)} auditors alive, "
                f"need z={self.cfg.z} to decrypt"
            )
        quorum = sorted(available, key=lambda a: a.identity)[: self.cfg.z]
        for rec in self._valid_batches(self.final_ctr):
            for pos, ct in enumerate(rec.output_cts):
                shares = [partial_decrypt(self.group, a.share, ct) for a in quorum]
                try:
                    payload = combine_decrypt(self.group, shares, ct, self.cfg.z)
                    receiver, message = unpack_user_payload(payload)
                except (DecodeError, ValueError) as exc:
                    self.result.misbehavior.append(
                        f"undecryptable ciphertext from {rec.mix}#{rec.attempt}@{pos}: {exc}"
                    )
                    continue
                self.result.delivered.append((receiver, message))

    # -- main loop ----------------------------------------------------------------------

    def run(self) -> TimeFrameResult:
        self._setup()
        self._encrypt_and_submit()
        entered = False
        last_output_ctr = None
        for ctr in range(1, self.depth + 1):
            t0 = time.perf_counter()
            self._apply_faults("collect", ctr)
            if not entered:
                entered = self._collect_entry(ctr)
                if not entered:
                    continue
                self.entry_ctr = ctr
            else:
                if not self._alive_mixes(ctr):
                    if ctr == self.depth:
                        self.skipped_layers.add(ctr)
                        self.result.anonymity_notes.append(
                            f"final layer {ctr} lost: delivery from layer {last_output_ctr}"
                        )
                        self.result.reassignments += 1
                        break
                    self._retoss_for_skip(ctr, ctr + 1)
                    self.skipped_layers.add(ctr)
                    continue
                self._collect_routed(ctr)
                self._verify_routing_into(ctr)
            self._apply_faults("mix", ctr)
            self._mix_layer(ctr)
            self._verify_mixing(ctr)
            if not self._valid_batches(ctr):
                self._fail(f"layer {ctr} produced no valid output batches")
            last_output_ctr = ctr
            self._apply_faults("toss", ctr)
            if ctr < self.depth:
                self._toss_layer(ctr, ctr + 1)
            self.result.layer_seconds[ctr] = time.perf_counter() - t0
        self.final_ctr = last_output_ctr
        if self.final_ctr is None:
            self._fail("no layer produced outputs")
        self._decrypt()
        from mixroute.board import export_transcript

        self.result.transcript = export_transcript(self.board)
        return self.result


def run_timeframe(config: TimeFrameConfig) -> TimeFrameResult:
    """Execute one time-frame; deterministic in (config, seed).

    An unrecoverable topology collapse returns a partial result with the
    failure marker set and whatever transcript exists, rather than
    raising.
    """
    from mixroute.board import export_transcript

    engine = TimeFrameEngine(config)
    try:
        return engine.run()
    except UnrecoverableError as exc:
        result = exc.result or engine.result
        if hasattr(engine, "board"):
            result.transcript = export_transcript(engine.board)
        return result
