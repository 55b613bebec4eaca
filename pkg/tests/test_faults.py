"""Availability scenarios: scheduled removals must never lose messages.

Conservation is checked against the submitted multiset and, for the
mid-layer recovery case, with the dealer-side full-key decryption oracle
over the reassigned ciphertext batch.
"""

import pytest

from mixroute.board import import_transcript
from mixroute.engine import FaultEvent, TimeFrameConfig, run_timeframe
from mixroute.group import get_group
from mixroute.topology import MixSpec
from mixroute import wire


def config(n=12, per_layer=2, layers=3, seed=42, **kw):
    count = per_layer * layers
    mixes = [MixSpec(f"m{i}", 1) for i in range(1, count + 1)]
    defaults = dict(n_messages=n, mixes=mixes, layers=layers, k=8, seed=seed)
    defaults.update(kw)
    return TimeFrameConfig(**defaults)


def reconstruct_secret(keypair, q):
    shares = [(s.index, s.value) for s in keypair.shares[: keypair.threshold]]
    total = 0
    for i, (xi, yi) in enumerate(shares):
        num, den = 1, 1
        for j, (xj, _) in enumerate(shares):
            if i != j:
                num = num * xj % q
                den = den * (xj - xi) % q
        total = (total + yi * num * pow(den, -1, q)) % q
    return total


def oracle_decrypt(group, x, ct):
    chunks = []
    for c1, c2 in ct.blocks:
        m = group.mul(c2, group.inv(group.exp(c1, x)))
        chunks.append(group.decode_chunk(m))
    return b"".join(chunks)


class TestScenario1EntryMixDown:
    def test_users_resubmit_and_all_deliver(self):
        result = run_timeframe(config(faults=(FaultEvent("collect", 1, "mix:m1"),)))
        assert result.delivered_all
        assert any("resubmitted" in m for m in result.misbehavior)

    def test_across_seeds(self):
        for seed in (0, 1, 2):
            result = run_timeframe(
                config(seed=seed, faults=(FaultEvent("collect", 1, "mix:m2"),))
            )
            assert result.delivered_all, seed


class TestScenario2WholeEntryLayerDown:
    def test_new_entry_points_and_all_deliver(self):
        result = run_timeframe(config(faults=(FaultEvent("collect", 1, "layer:1"),)))
        assert result.delivered_all
        assert result.anonymity_notes  # one fewer mixing layer is recorded
        entries = import_transcript(result.transcript)
        kinds = [e.kind for e in entries]
        assert "Reassignment" in kinds


class TestScenario3MidLayerMixDown:
    def test_survivors_absorb_and_all_deliver(self):
        result = run_timeframe(config(faults=(FaultEvent("mix", 2, "mix:m3"),)))
        assert result.delivered_all
        assert any(v.subject == "m3" and v.status == "liveness" for v in result.verdicts)

    def test_reassigned_batch_preserves_multiset(self):
        """Full-key decryption oracle over the redistributed ciphertexts."""
        result = run_timeframe(config(faults=(FaultEvent("mix", 2, "mix:m3"),)))
        group = get_group("schnorr256")
        x = reconstruct_secret(result.enc_keypair, group.q)
        entries = import_transcript(result.transcript)
        reassigned = None
        for e in entries:
            if e.kind == "Reassignment":
                scope, subject, session, survivors, cts = wire.parse_reassignment_body(
                    group, e.ctr, e.body
                )
                if scope == "mix-failure" and subject == "m3":
                    reassigned = cts
        assert reassigned, "no reassignment entry found"
        payloads = sorted(oracle_decrypt(group, x, ct) for ct in reassigned)
        # the redistributed batch must decrypt to distinct real messages
        assert len(set(payloads)) == len(payloads)
        submitted = {p for _, p in result.submitted}
        for payload in payloads:
            assert any(s in payload for s in submitted)
        assert result.delivered_all

    def test_fetch_counts_grow_per_largest_remainder(self):
        """Three equal mixes, one dies: survivors split its batch by the
        largest-remainder rule over surviving throughput."""
        result = run_timeframe(
            config(n=18, per_layer=3, faults=(FaultEvent("mix", 2, "mix:m4"),))
        )
        assert result.delivered_all
        group = get_group("schnorr256")
        entries = import_transcript(result.transcript)
        recovered = {}
        for e in entries:
            if e.kind == "InputCiphertexts" and e.ctr == 2:
                mix, attempt, cts = wire.parse_batch_body(group, e.body)
                if attempt > 0:
                    recovered[mix] = len(cts)
        assert set(recovered) <= {"m5", "m6"}
        total = sum(recovered.values())
        for n in recovered.values():
            assert abs(n - total / 2) < 1 or abs(n - total / 2) == 0.5


class TestScenario4WholeMidLayerDown:
    def test_next_layer_takes_over(self):
        result = run_timeframe(config(faults=(FaultEvent("collect", 2, "layer:2"),)))
        assert result.delivered_all
        assert any("layer 2 lost" in n for n in result.anonymity_notes)
        # no message was mixed by layer 2
        for path in result.message_paths:
            assert all(m not in ("m3", "m4") for m in path)
            assert len(path) == 2

    def test_last_layer_down(self):
        result = run_timeframe(config(faults=(FaultEvent("collect", 3, "layer:3"),)))
        assert result.delivered_all
        for path in result.message_paths:
            assert len(path) == 2


class TestAuditorThreshold:
    def test_z_minus_one_removed_still_decrypts(self):
        # d=3, z=2: removing one auditor leaves a quorum
        result = run_timeframe(config(faults=(FaultEvent("decrypt", 0, "auditor:AS3"),)))
        assert result.delivered_all

    def test_threshold_breach_reported(self):
        faults = (
            FaultEvent("decrypt", 0, "auditor:AS1"),
            FaultEvent("decrypt", 0, "auditor:AS2"),
        )
        result = run_timeframe(config(faults=faults))
        assert "threshold failure" in result.failure
        assert not result.delivered_all
        assert result.transcript  # partial transcript still exported


class TestRepeatedFailures:
    def test_double_failure_same_layer_conserves(self):
        """Two of three mid-layer mixes fail; the survivor absorbs both
        batches through two reassignments."""
        faults = (
            FaultEvent("mix", 2, "mix:m4"),
            FaultEvent("mix", 2, "mix:m5"),
        )
        result = run_timeframe(config(n=18, per_layer=3, faults=faults))
        assert result.delivered_all
        assert result.reassignments >= 2

    def test_replacement_failure_only_unpublished_reassigned(self):
        """A mix dies after its own batch was published and verified but
        before mixing the recovery batch it absorbed: only the recovery
        inputs move again."""
        faults = (
            FaultEvent("mix", 2, "mix:m4"),  # first failure
            FaultEvent("recover", 2, "mix:m5"),  # replacement dies mid-recovery
        )
        result = run_timeframe(config(n=18, per_layer=3, seed=3, faults=faults))
        assert result.delivered_all
        assert result.reassignments >= 2
        # m5's primary batch stayed published: it appears in message paths
        assert any("m5" in path for path in result.message_paths)

    def test_whole_layer_lost_after_detection_is_unrecoverable(self):
        faults = (
            FaultEvent("mix", 2, "mix:m3"),
            FaultEvent("mix", 2, "mix:m4"),
        )
        result = run_timeframe(config(faults=faults))
        assert result.failure
        assert not result.delivered_all
