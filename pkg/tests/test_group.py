import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixroute.group import DecodeError, MalformedElement, get_group


def test_unknown_group_rejected():
    with pytest.raises(ValueError):
        get_group("nope")


def test_group_parameters(any_group):
    g = any_group
    assert g.chunk_bytes == 30
    # generator has the full prime order: g^q = identity, g != identity
    assert g.exp(g.generator(), g.q) == g.identity()
    assert g.generator() != g.identity()


def test_exponent_arithmetic(any_group):
    g = any_group
    a = g.exp(g.generator(), 12345)
    b = g.exp(g.generator(), 54321)
    assert g.mul(a, b) == g.exp(g.generator(), 12345 + 54321)
    assert g.mul(a, g.inv(a)) == g.identity()
    assert g.exp(a, 0) == g.identity()


def test_element_serialization_roundtrip(any_group, rng):
    g = any_group
    for _ in range(20):
        el = g.exp(g.generator(), g.random_scalar(rng))
        data = g.element_to_bytes(el)
        assert len(data) == g.element_bytes
        assert g.element_from_bytes(data) == el
    assert g.element_from_bytes(g.element_to_bytes(g.identity())) == g.identity()


def test_malformed_elements_rejected(any_group):
    g = any_group
    with pytest.raises(MalformedElement):
        g.element_from_bytes(b"\x01" * (g.element_bytes + 1))
    with pytest.raises(MalformedElement):
        # all-0xff is not a valid encoding for either instantiation
        g.element_from_bytes(b"\xff" * g.element_bytes)


def test_schnorr_rejects_non_residue(tgroup):
    g = tgroup
    # p-1 = -1 is a non-residue mod a safe prime > 3
    data = (g.p - 1).to_bytes(g.element_bytes, "big")
    with pytest.raises(MalformedElement):
        g.element_from_bytes(data)
    assert not g.is_element(g.p - 1)
    assert not g.is_element(0)
    assert not g.is_element(g.p)


@settings(max_examples=60, deadline=None)
@given(st.binary(min_size=30, max_size=30))
def test_chunk_encode_decode_identity_schnorr(chunk):
    g = get_group("schnorr256")
    assert g.decode_chunk(g.encode_chunk(chunk)) == chunk


@settings(max_examples=25, deadline=None)
@given(st.binary(min_size=30, max_size=30))
def test_chunk_encode_decode_identity_curve(chunk):
    g = get_group("secp256k1")
    el = g.encode_chunk(chunk)
    assert g.is_element(el)
    assert g.decode_chunk(el) == chunk


def test_chunk_wrong_length_rejected(any_group):
    with pytest.raises(ValueError):
        any_group.encode_chunk(b"short")


def test_decode_rejects_random_elements(any_group, rng):
    g = any_group
    rejected = 0
    for _ in range(50):
        el = g.exp(g.generator(), g.random_scalar(rng))
        try:
            chunk = g.decode_chunk(el)
        except DecodeError:
            rejected += 1
            continue
        # astronomically unlikely, but if it decodes it must round-trip
        assert g.encode_chunk(chunk) == el
    assert rejected >= 45


def test_identity_decode_behavior():
    # the curve identity is no point and cannot decode; the residue-group
    # identity 1 is the canonical encoding of the all-zeros chunk
    curve = get_group("secp256k1")
    with pytest.raises(DecodeError):
        curve.decode_chunk(curve.identity())
    schnorr = get_group("schnorr256")
    assert schnorr.decode_chunk(schnorr.identity()) == b"\x00" * 30
    assert schnorr.encode_chunk(b"\x00" * 30) == schnorr.identity()
