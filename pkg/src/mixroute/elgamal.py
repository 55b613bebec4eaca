"""Re-randomizable ElGamal with Shamir-shared threshold decryption.

A dealer generates the key pair and splits the secret exponent into d
Shamir shares with threshold z; any z shareholders jointly decrypt, z-1
learn nothing at the sharing layer. Ciphertexts are fixed-length lists
of element pairs (g^r, m * y^r), one pair per payload chunk, so every
ciphertext in a time-frame has the same size.
"""

from dataclasses import dataclass

from mixroute.group import DecodeError
from mixroute.serialization import Reader, u32


class ThresholdError(ValueError):
    pass


class PayloadTooLong(ValueError):
    pass


class InsufficientShares(ValueError):
    pass


@dataclass(frozen=True)
class KeyShare:
    index: int  # Shamir x-coordinate, 1-based
    value: int  # polynomial evaluation in the exponent field


@dataclass(frozen=True)
class EncKeyPair:
    pke: object  # group element y = g^x
    shares: tuple  # d KeyShares
    threshold: int  # z


@dataclass(frozen=True)
class Ciphertext:
    blocks: tuple  # ((c1, c2), ...) element pairs

    def serialize(self, group) -> bytes:
        out = [u32(len(self.blocks))]
        for c1, c2 in self.blocks:
            out.append(group.element_to_bytes(c1))
            out.append(group.element_to_bytes(c2))
        return b"".join(out)

    @classmethod
    def deserialize(cls, group, data: bytes) -> "Ciphertext":
        r = Reader(data)
        ct = cls.read_from(group, r)
        r.expect_end()
        return ct

    @classmethod
    def read_from(cls, group, r: Reader) -> "Ciphertext":
        count = r.u32()
        blocks = []
        for _ in range(count):
            c1 = group.element_from_bytes(r.take(group.element_bytes))
            c2 = group.element_from_bytes(r.take(group.element_bytes))
            blocks.append((c1, c2))
        return cls(tuple(blocks))


@dataclass(frozen=True)
class DecryptionShare:
    index: int
    parts: tuple  # c1^share per block


def keygen_threshold(group, d: int, z: int, rng) -> EncKeyPair:
    """Dealer-based threshold key generation: d shares, threshold z."""
    if not 1 <= z <= d:
        raise ThresholdError(f"threshold z={z} must satisfy 1 <= z <= d={d}")
    coeffs = [group.random_scalar(rng) for _ in range(z)]
    x = coeffs[0]
    shares = tuple(
        KeyShare(i, _poly_eval(coeffs, i, group.q)) for i in range(1, d + 1)
    )
    return EncKeyPair(pke=group.exp(group.generator(), x), shares=shares, threshold=z)


def _poly_eval(coeffs, x, q):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def max_payload_bytes(group, blocks: int) -> int:
    return blocks * group.chunk_bytes - 4


def _pack_payload(group, payload: bytes, blocks: int) -> list:
    if len(payload) > max_payload_bytes(group, blocks):
        raise PayloadTooLong(
            f"{len(payload)} bytes > maximum {max_payload_bytes(group, blocks)}"
        )
    buf = u32(len(payload)) + payload
    buf += b"\x00" * (blocks * group.chunk_bytes - len(buf))
    cb = group.chunk_bytes
    return [buf[i * cb : (i + 1) * cb] for i in range(blocks)]


def _unpack_payload(group, chunks: list) -> bytes:
    buf = b"".join(chunks)
    r = Reader(buf)
    length = r.u32()
    if length > len(buf) - 4:
        raise DecodeError("corrupt length header")
    payload = r.take(length)
    if any(b for b in buf[4 + length :]):
        raise DecodeError("nonzero padding")
    return payload


def encrypt(group, pke, payload: bytes, blocks: int, rng) -> Ciphertext:
    """Encrypt payload into a fixed number of blocks under pke."""
    g = group.generator()
    out = []
    for chunk in _pack_payload(group, payload, blocks):
        m = group.encode_chunk(chunk)
        r = group.random_scalar(rng)
        out.append((group.exp(g, r), group.mul(m, group.exp(pke, r))))
    return Ciphertext(tuple(out))


def reencrypt_with(group, pke, ct: Ciphertext, scalars) -> Ciphertext:
    """Re-randomize with caller-chosen per-block scalars (deterministic)."""
    if len(scalars) != len(ct.blocks):
        raise ValueError("one scalar per block required")
    g = group.generator()
    out = []
    for (c1, c2), s in zip(ct.blocks, scalars):
        out.append((group.mul(c1, group.exp(g, s)), group.mul(c2, group.exp(pke, s))))
    return Ciphertext(tuple(out))


def reencrypt(group, pke, ct: Ciphertext, rng):
    """Re-randomize a ciphertext; returns (ct', witnesses s)."""
    scalars = tuple(group.random_scalar(rng) for _ in ct.blocks)
    return reencrypt_with(group, pke, ct, scalars), scalars


def partial_decrypt(group, share: KeyShare, ct: Ciphertext) -> DecryptionShare:
    return DecryptionShare(
        share.index, tuple(group.exp(c1, share.value) for c1, _ in ct.blocks)
    )


def _lagrange_at_zero(indices, q):
    coeffs = {}
    for i in indices:
        num, den = 1, 1
        for j in indices:
            if j != i:
                num = num * j % q
                den = den * (j - i) % q
        coeffs[i] = num * pow(den, -1, q) % q
    return coeffs


def combine_decrypt(group, shares, ct: Ciphertext, threshold: int) -> bytes:
    """Combine >= threshold decryption shares and decode the payload.

    Raises InsufficientShares below the threshold and DecodeError when the
    combination leaves the decodable range (corrupted share or ciphertext).
    """
    by_index = {}
    for s in shares:
        by_index.setdefault(s.index, s)
    if len(by_index) < threshold:
        raise InsufficientShares(
            f"{len(by_index)} distinct shares < threshold {threshold}"
        )
    chosen = [by_index[i] for i in sorted(by_index)][:threshold]
    lam = _lagrange_at_zero([s.index for s in chosen], group.q)
    chunks = []
    for b, (_, c2) in enumerate(ct.blocks):
        acc = group.identity()
        for s in chosen:
            acc = group.mul(acc, group.exp(s.parts[b], lam[s.index]))
        m = group.mul(c2, group.inv(acc))
        chunks.append(group.decode_chunk(m))
    return _unpack_payload(group, chunks)
