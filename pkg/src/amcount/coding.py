"""Self-delimiting integer codes and a minimal MSB-first bit stream.

The only code used here is the Elias gamma code: a positive integer v
with b = floor(log2 v) is written as b zero bits followed by the b + 1
bit binary form of v (whose leading bit is the terminating 1).
"""

from __future__ import annotations

from collections.abc import Iterable


def gamma_length(value: int) -> int:
    """Length in bits of the gamma code of ``value`` (which must be >= 1)."""
    if value < 1:
        raise ValueError(f"gamma code is defined for positive integers, got {value}")
    return 2 * (value.bit_length() - 1) + 1


class BitWriter:
    """Accumulates bits most-significant-first."""

    def __init__(self) -> None:
        self._bits: list[int] = []

    def __len__(self) -> int:
        return len(self._bits)

    def write_bit(self, bit: int) -> None:
        self._bits.append(1 if bit else 0)

    def write_gamma(self, value: int) -> None:
        nbits = gamma_length(value) // 2
        self._bits.extend([0] * nbits)
        self._bits.extend(int(c) for c in format(value, "b"))

    def bits(self) -> list[int]:
        return list(self._bits)

    def to_bytes(self) -> bytes:
        """Pack the bits, zero-padding the final byte."""
        out = bytearray()
        for start in range(0, len(self._bits), 8):
            chunk = self._bits[start:start + 8]
            chunk += [0] * (8 - len(chunk))
            byte = 0
            for b in chunk:
                byte = (byte << 1) | b
            out.append(byte)
        return bytes(out)


class BitReader:
    def __init__(self, data: bytes | Iterable[int], nbits: int | None = None) -> None:
        if isinstance(data, (bytes, bytearray)):
            bits = []
            for byte in data:
                bits.extend((byte >> (7 - k)) & 1 for k in range(8))
        else:
            bits = [1 if b else 0 for b in data]
        if nbits is not None:
            bits = bits[:nbits]
        self._bits = bits
        self._pos = 0

    @property
    def position(self) -> int:
        return self._pos

    def remaining_is_padding(self) -> bool:
        """True when every unread bit is zero (end of payload)."""
        return not any(self._bits[self._pos:])

    def read_bit(self) -> int:
        if self._pos >= len(self._bits):
            raise EOFError("bit stream exhausted")
        bit = self._bits[self._pos]
        self._pos += 1
        return bit

    def read_gamma(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
        value = 1
        for _ in range(zeros):
            value = (value << 1) | self.read_bit()
        return value


def encode_gammas(values: Iterable[int]) -> bytes:
    w = BitWriter()
    for v in values:
        w.write_gamma(v)
    return w.to_bytes()


def decode_gammas(data: bytes, count: int) -> list[int]:
    r = BitReader(data)
    return [r.read_gamma() for _ in range(count)]
