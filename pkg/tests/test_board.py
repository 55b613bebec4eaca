import pytest

from mixroute.board import (
    BadSignature,
    BoardTimeout,
    BulletinBoard,
    RoleError,
    ServerInfo,
    ServerRegistry,
    UnregisteredAuthor,
    export_transcript,
    import_transcript,
    signed_message,
)
from mixroute.signatures import keygen_sig, sign


@pytest.fixture
def setup(tgroup, rng):
    registry = ServerRegistry()
    keys = {}
    for ident, role in [("m1", "mix"), ("m2", "mix"), ("RE1", "routing-entity"), ("AS1", "auditor")]:
        kp = keygen_sig(tgroup, rng)
        keys[ident] = kp
        layer = 1 if role == "mix" else 0
        registry.register(ServerInfo(ident, role, kp.pkv, layer, 1, ""))
    board = BulletinBoard(tgroup, registry)
    board.register_user("u1")
    return board, keys, registry


def post(board, keys, tgroup, rng, author, ctr, kind, body):
    sig = sign(tgroup, keys[author].sks, signed_message(ctr, kind, body), rng)
    return board.append(ctr, kind, body, author, sig)


def test_append_and_read(setup, tgroup, rng):
    board, keys, _ = setup
    seq = post(board, keys, tgroup, rng, "m1", 1, "OutputCiphertexts", b"batch-1")
    assert seq == 1
    seq = post(board, keys, tgroup, rng, "m2", 1, "OutputCiphertexts", b"batch-2")
    assert seq == 2
    entries = board.read(ctr=1, kind="OutputCiphertexts", author="m1")
    assert len(entries) == 1 and entries[0].body == b"batch-1"
    assert board.read(ctr=9) == []
    all_entries = board.read()
    assert [e.seq for e in all_entries] == [1, 2]


def test_tampered_body_rejected(setup, tgroup, rng):
    board, keys, _ = setup
    sig = sign(tgroup, keys["m1"].sks, signed_message(1, "OutputCiphertexts", b"real"), rng)
    with pytest.raises(BadSignature):
        board.append(1, "OutputCiphertexts", b"fake", "m1", sig)


def test_user_append_rejected(setup, tgroup, rng):
    board, keys, _ = setup
    sig = b"\x00" * 64
    with pytest.raises(RoleError):
        board.append(1, "InputCiphertexts", b"x", "u1", sig)


def test_unregistered_author_rejected(setup):
    board, _, _ = setup
    with pytest.raises(UnregisteredAuthor):
        board.append(1, "InputCiphertexts", b"x", "nobody", b"sig")


def test_unknown_kind_rejected(setup):
    board, _, _ = setup
    with pytest.raises(Exception):
        board.append(1, "Gossip", b"x", "m1", b"sig")


def test_await_entries(setup, tgroup, rng):
    board, keys, _ = setup
    with pytest.raises(BoardTimeout):
        board.await_entries("two outputs", lambda b: len(b.read(kind="OutputCiphertexts")) >= 2 and b.read(kind="OutputCiphertexts"))
    post(board, keys, tgroup, rng, "m1", 1, "OutputCiphertexts", b"a")
    post(board, keys, tgroup, rng, "m2", 1, "OutputCiphertexts", b"b")
    got = board.await_entries("two outputs", lambda b: b.read(kind="OutputCiphertexts"))
    assert len(got) == 2


def test_transcript_roundtrip(setup, tgroup, rng):
    board, keys, _ = setup
    post(board, keys, tgroup, rng, "m1", 1, "InputCiphertexts", bytes(range(64)))
    post(board, keys, tgroup, rng, "AS1", 2, "VerificationFailure", b"\xff\x00data")
    text = export_transcript(board)
    entries = import_transcript(text)
    assert entries == board.entries
    # bit-exact: re-export equals the original text
    board2 = BulletinBoard(tgroup, board.registry)
    board2.entries = entries
    assert export_transcript(board2) == text


def test_registry_canonical_order(setup):
    _, _, registry = setup
    mixes = registry.mixes_in_layer(1)
    assert [m.identity for m in mixes] == ["m1", "m2"]
    assert registry.layer_count() == 1


def test_registry_serialization_roundtrip(setup, tgroup):
    _, _, registry = setup
    from mixroute.serialization import Reader

    data = registry.serialize(tgroup)
    restored = ServerRegistry.read_from(tgroup, Reader(data))
    assert restored.servers.keys() == registry.servers.keys()
    for ident in registry.servers:
        assert restored.get(ident) == registry.get(ident)


def test_duplicate_registration_rejected(setup, tgroup, rng):
    _, keys, registry = setup
    with pytest.raises(ValueError):
        registry.register(ServerInfo("m1", "mix", keys["m1"].pkv, 1, 1, ""))
