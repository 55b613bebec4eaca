import random

from mixroute.signatures import keygen_sig, sign, verify_sig


def test_sign_verify_roundtrip(any_group, rng):
    kp = keygen_sig(any_group, rng)
    msg = b"serialized ciphertext list"
    sig = sign(any_group, kp.sks, msg, rng)
    assert verify_sig(any_group, kp.pkv, msg, sig)


def test_flipped_message_bit_rejected(tgroup, rng):
    kp = keygen_sig(tgroup, rng)
    msg = bytearray(b"some message bytes")
    sig = sign(tgroup, kp.sks, bytes(msg), rng)
    msg[3] ^= 0x01
    assert not verify_sig(tgroup, kp.pkv, bytes(msg), sig)


def test_wrong_key_rejected(tgroup, rng):
    kp1 = keygen_sig(tgroup, rng)
    kp2 = keygen_sig(tgroup, rng)
    sig = sign(tgroup, kp1.sks, b"message", rng)
    assert not verify_sig(tgroup, kp2.pkv, b"message", sig)


def test_truncated_signature_rejected(tgroup, rng):
    kp = keygen_sig(tgroup, rng)
    sig = sign(tgroup, kp.sks, b"m", rng)
    assert not verify_sig(tgroup, kp.pkv, b"m", sig[:-1])
    assert not verify_sig(tgroup, kp.pkv, b"m", b"")


def test_mutation_surrogate_10k_trials(tgroup):
    """Unforgeability surrogate: random single-byte mutations of the
    message or signature never verify across 10^4 trials."""
    rng = random.Random(99)
    kp = keygen_sig(tgroup, rng)
    msg = b"the canonical entry bytes"
    sig = sign(tgroup, kp.sks, msg, rng)
    accepted = 0
    for _ in range(10_000):
        if rng.random() < 0.5:
            m = bytearray(msg)
            m[rng.randrange(len(m))] ^= 1 << rng.randrange(8)
            accepted += verify_sig(tgroup, kp.pkv, bytes(m), sig)
        else:
            s = bytearray(sig)
            s[rng.randrange(len(s))] ^= 1 << rng.randrange(8)
            accepted += verify_sig(tgroup, kp.pkv, msg, bytes(s))
    assert accepted == 0
