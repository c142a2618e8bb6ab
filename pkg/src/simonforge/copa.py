"""COPA and AES-COPA (v1, v2) encryption, tagging and verification.

Notation follows the usual description of the mode: ``L = E_k(0)``, masks
are field multiples ``2^i 3^j 7^k L`` and the chain value starts at
``S_0 = V ^ L`` where ``V`` summarises the associated data.  Per block::

    e_i  = E(M[i] ^ 2^(i-1) 3 L)
    C[i] = E(e_i ^ S_(i-1)) ^ 2^(i-1) L
    S_i  = S_(i-1) ^ e_i

and the tag is ``E(E(Sigma ^ 2^(d-1) 3^2 L) ^ S_d) ^ 2^(d-1) 7 L`` with
``Sigma`` the XOR of all (padded) message blocks.  AES-COPA v2 changes the
tag masks and the chain mask of a fractional last block; v1 routes a
fractional last block through :func:`xls`.

All the ``*_padded`` helpers take already-padded blocks and work on ints or
``uint64`` arrays alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .blocks import BlockString, Floor10Error, concat, floor10, padded_blocks
from .ciphers import derive_L, make_cipher
from .gf2poly import field_for


class Variant(str, Enum):
    COPA = "copa"
    AESCOPA_V1 = "aes-copa-v1"
    AESCOPA_V2 = "aes-copa-v2"


class UnsupportedCaseError(ValueError):
    pass


class InvalidTag(Exception):
    pass


@dataclass(frozen=True)
class AeOutput:
    ciphertext: tuple
    tag: int
    tail_bits: int | None = None  # length of the message's partial last block


class CopaInstance:
    def __init__(self, cipher, variant: Variant | str = Variant.COPA):
        self.cipher = cipher
        self.variant = Variant(variant)
        self.n = cipher.width
        self.field = field_for(self.n)
        self.L = derive_L(cipher)
        self._masks: dict[tuple[int, int, int], int] = {}

    @classmethod
    def from_key(cls, key: int, width: int, variant: Variant | str = Variant.COPA):
        return cls(make_cipher(width, key), variant)

    def __repr__(self):
        return f"CopaInstance({self.variant.value}, n={self.n})"

    def E(self, x):
        return self.cipher.encrypt(x)

    def D(self, y):
        return self.cipher.decrypt(y)

    def mask(self, two: int, three: int = 0, seven: int = 0) -> int:
        key = (two, three, seven)
        m = self._masks.get(key)
        if m is None:
            m = self._masks[key] = self.field.mask_const(self.L, two, three, seven)
        return m


def _as_blockstring(x) -> BlockString:
    if x is None:
        return BlockString()
    if isinstance(x, BlockString):
        return x
    return BlockString((x,))


def _ad_stream(inst: CopaInstance, ad, nonce) -> BlockString:
    ad = _as_blockstring(ad).validate(inst.n)
    if inst.variant is Variant.COPA:
        if nonce is not None:
            raise ValueError("plain COPA takes no nonce")
        return ad
    if nonce is None:
        raise ValueError("AES-COPA needs a nonce")
    return concat(ad, _as_blockstring(nonce).validate(inst.n), inst.n)


def process_ad_padded(inst: CopaInstance, blocks, partial: bool = False):
    """``V`` from padded associated-data blocks; 0 when there are none."""
    a = len(blocks)
    if a == 0:
        return 0
    acc = 0
    for i in range(a - 1):
        acc = acc ^ inst.E(blocks[i] ^ inst.mask(i, 3))
    last = inst.mask(a - 1, 5 if partial else 4)
    return inst.E(acc ^ blocks[-1] ^ last)


def process_ad(inst: CopaInstance, ad=None, nonce=None):
    """``V`` for associated data (plus the nonce, for AES-COPA)."""
    stream = _ad_stream(inst, ad, nonce)
    return process_ad_padded(inst, padded_blocks(stream, inst.n), stream.partial)


def chain_mask(inst: CopaInstance, i: int, d: int, fractional: bool):
    """Input mask of message block ``i`` (0-based) out of ``d``."""
    if fractional and i == d - 1 and inst.variant is Variant.AESCOPA_V2:
        return inst.mask(i, 1, 1) if d >= 2 else inst.mask(i, 1)
    return inst.mask(i, 1)


def encrypt_padded(inst: CopaInstance, V, blocks, fractional: bool = False,
                   with_ciphertext: bool = True):
    """Core pipeline on padded message blocks: ``(ciphertext_blocks, tag)``.

    ``fractional`` only matters for AES-COPA v2 (the ``P`` flag).  For v1 the
    caller strips the fractional block first and applies :func:`xls`.
    """
    d = len(blocks)
    if d == 0:
        raise ValueError("message must have at least one block")
    S = V ^ inst.L
    sigma = 0
    out = []
    for i, m in enumerate(blocks):
        e = inst.E(m ^ chain_mask(inst, i, d, fractional))
        if with_ciphertext:
            out.append(inst.E(e ^ S) ^ inst.mask(i))
        S = S ^ e
        sigma = sigma ^ m
    if inst.variant is Variant.AESCOPA_V2:
        p = 1 if fractional else 0
        tag = inst.E(inst.E(sigma ^ inst.mask(d - 1, 2, p)) ^ S) ^ inst.mask(d, 0, 1)
    else:
        tag = inst.E(inst.E(sigma ^ inst.mask(d - 1, 2)) ^ S) ^ inst.mask(d - 1, 0, 1)
    return out, tag


def xls(inst: CopaInstance, m_last, bits: int, t_prime):
    """Stand-in for v1's length-preserving XLS transform.

    ``t1 = E(t'); c = m ^ top_bits(t1); tag = E(t1 ^ (c || 0^(n-bits)))``.
    Returns ``(c, tag)``; a bijection on ``bits + n`` bits.
    """
    n = inst.n
    if not 1 <= bits <= n - 1:
        raise ValueError(f"xls needs 1 <= bits <= {n - 1}")
    shift = n - bits
    t1 = inst.E(t_prime)
    c = m_last ^ (t1 >> shift)
    return c, inst.E(t1 ^ (c << shift))


def xls_inverse(inst: CopaInstance, c, bits: int, tag):
    n = inst.n
    if not 1 <= bits <= n - 1:
        raise ValueError(f"xls needs 1 <= bits <= {n - 1}")
    shift = n - bits
    t1 = inst.D(tag) ^ (c << shift)
    return c ^ (t1 >> shift), inst.D(t1)


def encrypt_and_tag(inst: CopaInstance, ad=None, msg: BlockString = None, nonce=None) -> AeOutput:
    if msg is None or not len(msg):
        raise ValueError("message must have at least one block")
    msg.validate(inst.n)
    V = process_ad(inst, ad, nonce)
    if inst.variant is Variant.AESCOPA_V1 and msg.partial:
        d = len(msg)
        if d == 1:
            raise UnsupportedCaseError(
                "AES-COPA v1 with a single fractional block is not supported")
        head, t_prime = encrypt_padded(inst, V, list(msg.blocks[:-1]))
        c_last, tag = xls(inst, msg.blocks[-1], msg.tail_bits, t_prime)
        return AeOutput(tuple(head) + (c_last,), tag, msg.tail_bits)
    blocks = padded_blocks(msg, inst.n)
    ct, tag = encrypt_padded(inst, V, blocks, msg.partial)
    return AeOutput(tuple(ct), tag, msg.tail_bits)


def tag_of(inst: CopaInstance, ad=None, msg: BlockString = None, nonce=None) -> int:
    return encrypt_and_tag(inst, ad, msg, nonce).tag


def verify(inst: CopaInstance, ad, msg: BlockString, claimed_tag: int, nonce=None) -> bool:
    return tag_of(inst, ad, msg, nonce) == claimed_tag


def decrypt(inst: CopaInstance, ad, out: AeOutput, nonce=None) -> BlockString:
    """Recover the message from ``out``; raises :class:`InvalidTag`."""
    V = process_ad(inst, ad, nonce)
    cts = list(out.ciphertext)
    if not cts:
        raise ValueError("empty ciphertext")
    v1_frac = inst.variant is Variant.AESCOPA_V1 and out.tail_bits is not None
    if v1_frac and len(cts) == 1:
        raise UnsupportedCaseError(
            "AES-COPA v1 with a single fractional block is not supported")
    body = cts[:-1] if v1_frac else cts
    d = len(cts)
    fractional = out.tail_bits is not None and not v1_frac
    S = V ^ inst.L
    blocks = []
    for i, c in enumerate(body):
        e = inst.D(c ^ inst.mask(i)) ^ S
        blocks.append(inst.D(e) ^ chain_mask(inst, i, d, fractional))
        S ^= e
    if v1_frac:
        _, t_prime = encrypt_padded(inst, V, blocks, with_ciphertext=False)
        m_last, t_rec = xls_inverse(inst, cts[-1], out.tail_bits, out.tag)
        if t_rec != t_prime:
            raise InvalidTag("tag mismatch")
        return BlockString(tuple(blocks) + (m_last,), out.tail_bits)
    if fractional:
        try:
            value, bits = floor10(blocks[-1], inst.n)
        except Floor10Error as exc:
            raise InvalidTag("bad padding") from exc
        if bits != out.tail_bits:
            raise InvalidTag("bad padding")
        blocks[-1] = value
    msg = BlockString(tuple(blocks), out.tail_bits)
    if not verify(inst, ad, msg, out.tag, nonce):
        raise InvalidTag("tag mismatch")
    return msg
