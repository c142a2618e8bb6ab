"""Block strings, 10* padding and its inverse.

Bit strings are written most-significant bit first: the partial block
``1011`` of a width-8 mode is the int ``0b1011`` with ``tail_bits=4`` and pads
to ``0b10111000``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PaddingError(ValueError):
    pass


class Floor10Error(ValueError):
    """Operand has no trailing ``10*`` to strip, or stripping leaves nothing."""


@dataclass(frozen=True)
class BlockString:
    """A sequence of n-bit blocks whose last block may be partial.

    ``tail_bits`` is the bit length of the final block when it is partial
    (1..n-1) and ``None`` when every block is full.  Blocks are ints, or
    ``uint64`` arrays when a mode is evaluated over many inputs at once.
    """

    blocks: tuple = ()
    tail_bits: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.tail_bits is not None and not self.blocks:
            raise ValueError("an empty block string cannot have a partial tail")

    def __len__(self):
        return len(self.blocks)

    @property
    def partial(self) -> bool:
        return self.tail_bits is not None

    def bit_length(self, n: int) -> int:
        if not self.blocks:
            return 0
        return (len(self.blocks) - 1) * n + (self.tail_bits or n)

    def validate(self, n: int):
        if self.tail_bits is not None and not 1 <= self.tail_bits <= n - 1:
            raise ValueError(f"tail_bits must be in 1..{n - 1}")
        for i, b in enumerate(self.blocks):
            if isinstance(b, np.ndarray):
                continue
            bits = self.tail_bits if (self.partial and i == len(self.blocks) - 1) else n
            if not 0 <= b < (1 << bits):
                raise ValueError(f"block {i} does not fit in {bits} bits")
        return self

    @classmethod
    def from_bits(cls, value: int, nbits: int, n: int) -> "BlockString":
        """Split an ``nbits``-long bit string into n-bit blocks."""
        if nbits < 0 or value >> max(nbits, 0):
            raise ValueError("value does not fit in nbits")
        full, rem = divmod(nbits, n)
        count = full + (1 if rem else 0)
        blocks = []
        for i in range(count):
            width = n if (i < full) else rem
            shift = nbits - (i * n + width)
            blocks.append((value >> shift) & ((1 << width) - 1))
        return cls(tuple(blocks), rem or None)

    def to_bits(self, n: int) -> tuple[int, int]:
        """Inverse of :meth:`from_bits`: ``(value, nbits)``."""
        value, nbits = 0, 0
        for i, b in enumerate(self.blocks):
            w = self.tail_bits if (self.partial and i == len(self.blocks) - 1) else n
            value = (value << w) | int(b)
            nbits += w
        return value, nbits

    @classmethod
    def from_bytes(cls, data: bytes, n: int) -> "BlockString":
        return cls.from_bits(int.from_bytes(data, "big"), 8 * len(data), n)


Message = BlockString
AssociatedData = BlockString


def pad10(x, bits: int, n: int):
    """``x || 1 || 0^(n-bits-1)`` for a partial block of ``bits`` bits."""
    if not 1 <= bits <= n - 1:
        raise PaddingError(f"pad10 needs 1 <= |x| <= {n - 1}, got {bits}")
    shift = n - bits
    if isinstance(x, np.ndarray):
        return (x << np.uint64(shift)) | np.uint64(1 << (shift - 1))
    if not 0 <= x < (1 << bits):
        raise PaddingError("partial block wider than its declared length")
    return (x << shift) | (1 << (shift - 1))


def floor10(x: int, n: int) -> tuple[int, int]:
    """Strip the trailing ``10*`` from an n-bit block.

    Returns ``(value, bits)``.  Raises :class:`Floor10Error` when ``x`` is zero
    or when nothing would be left (``x = 10...0``).
    """
    if not 0 <= x < (1 << n):
        raise ValueError(f"block does not fit in {n} bits")
    if x == 0:
        raise Floor10Error("all-zero block has no 10* suffix")
    tz = (x & -x).bit_length() - 1
    bits = n - tz - 1
    if bits == 0:
        raise Floor10Error("stripping 10* leaves an empty string")
    return x >> (tz + 1), bits


def padded_blocks(bs: BlockString, n: int) -> list:
    """All blocks as full n-bit values, the partial tail padded with 10*."""
    out = list(bs.blocks)
    if bs.partial:
        out[-1] = pad10(out[-1], bs.tail_bits, n)
    return out


def concat(a: BlockString, b: BlockString, n: int) -> BlockString:
    """Bit-level concatenation ``a || b`` re-split into n-bit blocks."""
    if not a.blocks:
        return b
    if not b.blocks:
        return a
    if not a.partial:
        return BlockString(a.blocks + b.blocks, b.tail_bits)
    va, la = a.to_bits(n)
    vb, lb = b.to_bits(n)
    return BlockString.from_bits((va << lb) | vb, la + lb, n)
