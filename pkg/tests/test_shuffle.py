import random

import pytest

from mixroute.elgamal import (
    combine_decrypt,
    encrypt,
    keygen_threshold,
    partial_decrypt,
)
from mixroute.shuffle import (
    ShuffleProof,
    WitnessError,
    challenge_bit,
    challenge_bytes,
    check_responses,
    prove_shuffle,
    random_permutation,
    shuffle,
    simulate_proof,
    verify_shuffle,
)

CONTEXT = b"test-context"


def make_batch(group, kp, rng, w, blocks=1):
    return [encrypt(group, kp.pke, f"m{i}".encode(), blocks, rng) for i in range(w)]


def decrypt_all(group, kp, cts):
    out = []
    for ct in cts:
        shares = [partial_decrypt(group, s, ct) for s in kp.shares[: kp.threshold]]
        out.append(combine_decrypt(group, shares, ct, kp.threshold))
    return out


def test_shuffle_single_element(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 1)
    out, witness = shuffle(tgroup, kp.pke, batch, (0,), rng)
    assert len(out) == 1 and out[0] != batch[0]
    assert decrypt_all(tgroup, kp, out) == [b"m0"]


def test_identity_permutation_zero_randomness(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 4)
    from mixroute.shuffle import apply_witness

    out = apply_witness(tgroup, kp.pke, batch, (0, 1, 2, 3), ((0,), (0,), (0,), (0,)))
    assert out == batch


def test_plaintext_multiset_preserved(tgroup, rng):
    """Full-decryption oracle on random 8-element batches."""
    kp = keygen_threshold(tgroup, 3, 2, rng)
    for _ in range(5):
        batch = make_batch(tgroup, kp, rng, 8)
        phi = random_permutation(8, rng)
        out, _ = shuffle(tgroup, kp.pke, batch, phi, rng)
        assert sorted(decrypt_all(tgroup, kp, out)) == sorted(decrypt_all(tgroup, kp, batch))
        assert decrypt_all(tgroup, kp, out) == [f"m{phi[i]}".encode() for i in range(8)]


def test_shuffle_size_mismatch(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 3)
    with pytest.raises(WitnessError):
        shuffle(tgroup, kp.pke, batch, (0, 1), rng)
    with pytest.raises(WitnessError):
        shuffle(tgroup, kp.pke, batch, (0, 1, 1), rng)


@pytest.mark.parametrize("w", [1, 2, 8, 64])
@pytest.mark.parametrize("k", [1, 8, 16, 40])
def test_completeness_grid(tgroup, rng, w, k):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, w)
    phi = random_permutation(w, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, k, rng)
    assert verify_shuffle(tgroup, kp.pke, CONTEXT, batch, out, proof)


def test_proof_size_linear_in_k_and_w(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)

    def proof_bytes(w, k):
        batch = make_batch(tgroup, kp, rng, w)
        phi = random_permutation(w, rng)
        out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
        proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, k, rng)
        return len(proof.serialize(tgroup))

    base = proof_bytes(4, 4)
    assert proof_bytes(4, 8) < 2.5 * base and proof_bytes(4, 8) > 1.5 * base
    assert proof_bytes(8, 4) < 2.5 * base and proof_bytes(8, 4) > 1.5 * base


def test_witness_inconsistency_rejected(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 4)
    phi = random_permutation(4, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    wrong = make_batch(tgroup, kp, rng, 4)
    with pytest.raises(WitnessError):
        prove_shuffle(tgroup, kp.pke, CONTEXT, batch, wrong, witness, 8, rng)


def test_tampered_output_rejected(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 6)
    phi = random_permutation(6, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, 16, rng)
    tampered = [encrypt(tgroup, kp.pke, b"other", 1, rng)] + out[1:]
    assert not verify_shuffle(tgroup, kp.pke, CONTEXT, batch, tampered, proof)


def test_reordered_output_rejected(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 6)
    phi = random_permutation(6, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, 16, rng)
    swapped = list(out)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    assert not verify_shuffle(tgroup, kp.pke, CONTEXT, batch, swapped, proof)


def test_context_binding(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 3)
    phi = random_permutation(3, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, 16, rng)
    assert not verify_shuffle(tgroup, kp.pke, b"other-context", batch, out, proof)


def test_statistical_soundness_forged_proofs(tgroup, rng):
    """A forger without a witness simulates with guessed challenge bits;
    at k=16 the hash should never match the guess across 200 trials
    (tolerance: one fluke)."""
    k = 16
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 2)
    accepted = 0
    for _ in range(200):
        fake = make_batch(tgroup, kp, rng, 2)
        guess = [rng.randrange(2) for _ in range(k)]
        shadows, responses = simulate_proof(tgroup, kp.pke, batch, fake, guess, rng)
        challenge = challenge_bytes(tgroup, CONTEXT, batch, fake, shadows, k)
        proof = ShuffleProof(shadows, challenge, responses)
        accepted += verify_shuffle(tgroup, kp.pke, CONTEXT, batch, fake, proof)
    assert accepted <= 1


def test_forged_proof_acceptance_tracks_k(tgroup, rng):
    """At k=2 the same forgery succeeds ~1/4 of the time, confirming the
    2^-k soundness scaling."""
    k = 2
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 2)
    accepted = 0
    trials = 400
    for _ in range(trials):
        fake = make_batch(tgroup, kp, rng, 2)
        guess = [rng.randrange(2) for _ in range(k)]
        shadows, responses = simulate_proof(tgroup, kp.pke, batch, fake, guess, rng)
        challenge = challenge_bytes(tgroup, CONTEXT, batch, fake, shadows, k)
        proof = ShuffleProof(shadows, challenge, responses)
        accepted += verify_shuffle(tgroup, kp.pke, CONTEXT, batch, fake, proof)
    # binomial(400, 1/4): mean 100, sd ~8.66; allow 5 sigma
    assert 55 <= accepted <= 145


def test_simulator_passes_programmed_challenges(tgroup, rng):
    """Zero-knowledge surrogate: simulated transcripts satisfy the
    response predicate for any programmed bit string."""
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 4)
    unrelated = make_batch(tgroup, kp, rng, 4)
    for bits in ([0] * 8, [1] * 8, [0, 1] * 4, [1, 0, 0, 1, 1, 1, 0, 0]):
        shadows, responses = simulate_proof(tgroup, kp.pke, batch, unrelated, bits, rng)
        assert check_responses(tgroup, kp.pke, batch, unrelated, shadows, bits, responses)


def test_many_honest_proofs_all_verify(tgroup):
    """2^10 honest proofs at k=16 all verify."""
    rng = random.Random(31)
    kp = keygen_threshold(tgroup, 1, 1, rng)
    ok = 0
    runs = 1 << 10
    for _ in range(runs):
        batch = make_batch(tgroup, kp, rng, 2)
        phi = random_permutation(2, rng)
        out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
        proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, 16, rng)
        ok += verify_shuffle(tgroup, kp.pke, CONTEXT, batch, out, proof)
    assert ok == runs


def test_proof_serialization_roundtrip(tgroup, rng):
    kp = keygen_threshold(tgroup, 1, 1, rng)
    batch = make_batch(tgroup, kp, rng, 3, blocks=2)
    phi = random_permutation(3, rng)
    out, witness = shuffle(tgroup, kp.pke, batch, phi, rng)
    proof = prove_shuffle(tgroup, kp.pke, CONTEXT, batch, out, witness, 8, rng)
    data = proof.serialize(tgroup)
    restored = ShuffleProof.deserialize(tgroup, data)
    assert restored == proof
    assert verify_shuffle(tgroup, kp.pke, CONTEXT, batch, out, restored)


def test_challenge_bit_extraction():
    challenge = bytes([0b10110000])
    assert [challenge_bit(challenge, j) for j in range(4)] == [1, 0, 1, 1]
