"""Canonical byte encodings shared by every signed or hashed message.

All multi-byte integers are big-endian. Variable-length fields carry a
4-byte length prefix. Anything that gets signed, hashed, or committed to
goes through these helpers so that two parties always serialize the same
value to the same bytes.
"""

import struct


class DeserializationError(ValueError):
    pass


def u32(n: int) -> bytes:
    return struct.pack(">I", n)


def u64(n: int) -> bytes:
    return struct.pack(">Q", n)


def prefixed(data: bytes) -> bytes:
    """Length-prefixed byte string."""
    return u32(len(data)) + data


def prefixed_str(s: str) -> bytes:
    return prefixed(s.encode("utf-8"))


def prefixed_list(items: list[bytes]) -> bytes:
    """Length-prefixed list of already-serialized items."""
    return u32(len(items)) + b"".join(items)


class Reader:
    """Sequential reader over a byte string; raises on truncation."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DeserializationError(
                f"truncated input: need {n} bytes at offset {self.pos}, "
                f"have {len(self.data) - self.pos}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def prefixed(self) -> bytes:
        return self.take(self.u32())

    def prefixed_str(self) -> str:
        return self.prefixed().decode("utf-8")

    def expect_end(self):
        if self.pos != len(self.data):
            raise DeserializationError(
                f"{len(self.data) - self.pos} trailing bytes after message"
            )
