"""Prime-order groups backing all ciphertexts, signatures, and proofs.

Two interchangeable instantiations:

* SchnorrGroup — the quadratic-residue subgroup of a safe prime; elements
  are ints and all arithmetic is built-in pow(). The bundled 256-bit
  instance is the test-mode default: fast and deterministic, but nowhere
  near production discrete-log hardness.
* CurveGroup — secp256k1 (prime order, cofactor 1); elements are affine
  (x, y) tuples handled by the compiled kernel when available. Default
  mode.

Payload bytes are mapped into the group by try-and-increment: a chunk
plus an 8-bit counter is read as an element candidate and the counter
incremented until the candidate lands in the group. The smallest working
counter is canonical, so the map is invertible and decryption can detect
elements that never came out of encode_chunk().
"""

from mixroute import _kernel

try:
    import gmpy2

    _powmod = gmpy2.powmod
    _invert = gmpy2.invert

    def _is_qr(a: int, p: int) -> bool:
        return gmpy2.legendre(a, p) == 1

except ImportError:  # pragma: no cover - exercised only without gmpy2
    _powmod = pow

    def _invert(a, p):
        return pow(a, -1, p)

    def _is_qr(a: int, p: int) -> bool:
        return pow(a, (p - 1) // 2, p) == 1


class MalformedElement(ValueError):
    """Byte string or tuple that does not describe a group element."""


class DecodeError(ValueError):
    """Group element outside the decodable payload range."""


class SchnorrGroup:
    """Subgroup of quadratic residues mod a safe prime p = 2q + 1."""

    def __init__(self, name: str, p: int, g: int):
        self.name = name
        self.p = p
        self.q = (p - 1) // 2
        self.g = g
        self.element_bytes = (p.bit_length() + 7) // 8
        self.scalar_bytes = (self.q.bit_length() + 7) // 8
        # candidates stay strictly below 2^(bitlen-1) <= p, so every
        # chunk||counter string is in range
        self._candidate_bytes = (p.bit_length() - 1) // 8
        self.chunk_bytes = self._candidate_bytes - 1

    def generator(self):
        return self.g

    def identity(self):
        return 1

    def exp(self, a: int, k: int) -> int:
        return int(_powmod(a, k % self.q, self.p))

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        return int(_invert(a, self.p))

    def is_element(self, a) -> bool:
        # subgroup membership: quadratic residues mod the safe prime
        return isinstance(a, int) and 0 < a < self.p and _is_qr(a, self.p)

    def random_scalar(self, rng) -> int:
        return rng.randrange(self.q)

    def element_to_bytes(self, a: int) -> bytes:
        return a.to_bytes(self.element_bytes, "big")

    def element_from_bytes(self, data: bytes) -> int:
        if len(data) != self.element_bytes:
            raise MalformedElement(f"expected {self.element_bytes} bytes")
        a = int.from_bytes(data, "big")
        if not self.is_element(a):
            raise MalformedElement("not in the prime-order subgroup")
        return a

    def encode_chunk(self, chunk: bytes) -> int:
        if len(chunk) != self.chunk_bytes:
            raise ValueError(f"chunk must be exactly {self.chunk_bytes} bytes")
        for counter in range(256):
            cand = int.from_bytes(chunk + bytes([counter]), "big")
            if self.is_element(cand):
                return cand
        raise MalformedElement("no counter lands in the group")  # pragma: no cover

    def decode_chunk(self, a: int) -> bytes:
        try:
            raw = a.to_bytes(self._candidate_bytes, "big")
        except (OverflowError, AttributeError):
            raise DecodeError("element outside the decodable range") from None
        chunk = raw[:-1]
        if self.encode_chunk(chunk) != a:
            raise DecodeError("non-canonical counter byte")
        return chunk


class CurveGroup:
    """secp256k1: prime order, cofactor 1, elements as (x, y) or None."""

    def __init__(self):
        self.name = "secp256k1"
        self.p = _kernel.P_FIELD
        self.q = _kernel.ORDER
        self.g = (_kernel.GX, _kernel.GY)
        self.element_bytes = 33  # SEC compressed; 33 zero bytes = identity
        self.scalar_bytes = 32
        self._candidate_bytes = 31
        self.chunk_bytes = 30

    def generator(self):
        return self.g

    def identity(self):
        return None

    def exp(self, a, k: int):
        return _kernel.point_mul(a, k % self.q)

    def mul(self, a, b):
        return _kernel.point_add(a, b)

    def inv(self, a):
        if a is None:
            return None
        return (a[0], (self.p - a[1]) % self.p)

    def is_element(self, a) -> bool:
        if a is None:
            return True
        if not (isinstance(a, tuple) and len(a) == 2):
            return False
        x, y = a
        if not (0 <= x < self.p and 0 <= y < self.p):
            return False
        return (y * y - (x * x * x + 7)) % self.p == 0

    def random_scalar(self, rng) -> int:
        return rng.randrange(self.q)

    def element_to_bytes(self, a) -> bytes:
        if a is None:
            return b"\x00" * 33
        x, y = a
        return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")

    def element_from_bytes(self, data: bytes):
        if len(data) != 33:
            raise MalformedElement("expected 33 bytes")
        if data == b"\x00" * 33:
            return None
        if data[0] not in (2, 3):
            raise MalformedElement("bad compression prefix")
        x = int.from_bytes(data[1:], "big")
        if x >= self.p:
            raise MalformedElement("x out of field range")
        y = self._lift_x(x)
        if y is None:
            raise MalformedElement("x not on curve")
        if (y & 1) != (data[0] & 1):
            y = self.p - y
        return (x, y)

    def _lift_x(self, x: int):
        y_sq = (x * x * x + 7) % self.p
        if not _is_qr(y_sq, self.p):
            return None
        # p = 3 (mod 4): this power is a square root whenever one exists
        return int(_powmod(y_sq, (self.p + 1) // 4, self.p))

    def encode_chunk(self, chunk: bytes):
        if len(chunk) != self.chunk_bytes:
            raise ValueError(f"chunk must be exactly {self.chunk_bytes} bytes")
        for counter in range(256):
            x = int.from_bytes(chunk + bytes([counter]), "big")
            y = self._lift_x(x)
            if y is not None:
                return (x, y if y % 2 == 0 else self.p - y)
        raise MalformedElement("no counter lands on the curve")  # pragma: no cover

    def decode_chunk(self, a) -> bytes:
        if a is None or not isinstance(a, tuple):
            raise DecodeError("element outside the decodable range")
        try:
            raw = a[0].to_bytes(self._candidate_bytes, "big")
        except OverflowError:
            raise DecodeError("element outside the decodable range") from None
        chunk = raw[:-1]
        if self.encode_chunk(chunk) != a:
            raise DecodeError("non-canonical encoding")
        return chunk


# 256-bit safe prime (q = (p-1)/2 prime, g = 4 generates the order-q
# subgroup). Test-mode group: small enough to keep full protocol runs
# fast, structurally identical to a production instantiation.
_SAFE_PRIME_256 = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF72EF

_GROUPS = {}


def get_group(name: str):
    """Look up a group instantiation by config name."""
    if name not in _GROUPS:
        if name == "schnorr256":
            _GROUPS[name] = SchnorrGroup("schnorr256", _SAFE_PRIME_256, 4)
        elif name in ("secp256k1", "curve"):
            _GROUPS[name] = CurveGroup()
        else:
            raise ValueError(f"unknown group: {name!r}")
    return _GROUPS[name]
