"""Canonical byte encoding primitives.

Every hashed or signed structure in the system is the concatenation of
fixed-width big-endian integers and u32-length-prefixed byte strings, in
declared field order. The exact layouts live in docs/protocol.md so that an
independent tool can reproduce any hash from the documented bytes.

Decoding is strict: a reader must consume its input exactly. Any slack,
truncation, or oversized length prefix raises :class:`NonCanonicalEncoding`,
which is what makes the encodings canonical (one byte string per value).
"""

from __future__ import annotations

import struct

from chainclass.errors import NonCanonicalEncoding

U64_MAX = 2**64 - 1


def enc_u8(x: int) -> bytes:
    if not 0 <= x <= 0xFF:
        raise ValueError(f"u8 out of range: {x}")
    return struct.pack(">B", x)


def enc_u32(x: int) -> bytes:
    if not 0 <= x <= 0xFFFFFFFF:
        raise ValueError(f"u32 out of range: {x}")
    return struct.pack(">I", x)


def enc_u64(x: int) -> bytes:
    if not 0 <= x <= U64_MAX:
        raise ValueError(f"u64 out of range: {x}")
    return struct.pack(">Q", x)


def enc_s64(x: int) -> bytes:
    """Signed 64-bit, big-endian two's complement."""
    if not -(2**63) <= x < 2**63:
        raise ValueError(f"s64 out of range: {x}")
    return struct.pack(">q", x)


def enc_u128(x: int) -> bytes:
    """128-bit unsigned, big-endian; wide enough for subunit balances."""
    if not 0 <= x < 2**128:
        raise ValueError(f"u128 out of range: {x}")
    return x.to_bytes(16, "big")


def enc_bytes(b: bytes) -> bytes:
    """u32 length prefix followed by the raw bytes."""
    return enc_u32(len(b)) + b


def enc_str(s: str) -> bytes:
    return enc_bytes(s.encode("utf-8"))


def to_hex(b: bytes) -> str:
    return "0x" + b.hex()


def from_hex(s: str) -> bytes:
    if s.startswith(("0x", "0X")):
        s = s[2:]
    try:
        return bytes.fromhex(s)
    except ValueError as exc:
        raise NonCanonicalEncoding(f"bad hex: {exc}") from None


class Reader:
    """Strict sequential reader over one canonical encoding."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise NonCanonicalEncoding(
                f"need {n} bytes at offset {self._pos}, have {self.remaining}"
            )
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def s64(self) -> int:
        return struct.unpack(">q", self.take(8))[0]

    def u128(self) -> int:
        return int.from_bytes(self.take(16), "big")

    def bytes_(self) -> bytes:
        return self.take(self.u32())

    def str_(self) -> str:
        raw = self.bytes_()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise NonCanonicalEncoding("invalid utf-8 in string field") from None

    def expect_end(self) -> None:
        if self.remaining:
            raise NonCanonicalEncoding(f"{self.remaining} trailing bytes")
