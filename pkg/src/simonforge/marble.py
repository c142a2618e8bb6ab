"""A Marble-style two-chain authenticated-encryption mode.

Per block, with ``x`` the masked input::

    rho      = E1(x)
    (w, S2') = TRANS(E2(rho), S2)          # TRANS(x, y) = (x ^ y, 3x ^ y)
    out      = E3(w ^ S1) ^ out_mask
    S1'      = S1 ^ rho

Associated-data blocks only update the chains.  Message block ``i`` enters
with mask ``2^i L`` and leaves with ``2^(i-1) 3 L``; the tag block enters as
``Sigma ^ tau ^ 2^d 7 L`` and leaves with ``2^(d-1) 3 7 L``.  Both chains are
XOR-accumulations of per-block images, so ``S1`` after the tag block is::

    Const1 ^ E1(Const0) ^ E1(A[1] ^ 3^2 L) ^ ... ^ E1(M[1] ^ 2L) ^ ...
           ^ E1(Sigma ^ tau ^ 2^d 7 L)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .blocks import BlockString, padded_blocks
from .ciphers import marble_layer_ciphers
from .copa import AeOutput, InvalidTag
from .gf2poly import field_for


class MarbleVersion(str, Enum):
    V1_0 = "1.0"
    V1_1 = "1.1"
    V1_2 = "1.2"


class TauProfile(str, Enum):
    ZERO = "zero"
    RANDOM_SECRET = "secret"


class UnsupportedProfileError(ValueError):
    pass


@dataclass(frozen=True)
class MarbleState:
    s1: int
    s2: int


def marble_constants(n: int) -> tuple[int, int, int]:
    """Const0/1/2: repeating bytes 0x00, 0x01, 0x02 cut to the first n bits."""
    nbytes = (n + 7) // 8
    cut = 8 * nbytes - n
    return tuple(int.from_bytes(bytes([b]) * nbytes, "big") >> cut for b in (0, 1, 2))


class MarbleInstance:
    def __init__(self, e1, e2, e3, version=MarbleVersion.V1_2, tau_profile=TauProfile.ZERO,
                 consts=None):
        self.e1, self.e2, self.e3 = e1, e2, e3
        self.n = e1.width
        if not e1.width == e2.width == e3.width:
            raise ValueError("layer ciphers must share a width")
        self.field = field_for(self.n)
        self.version = MarbleVersion(version)
        self.tau_profile = TauProfile(tau_profile)
        self.consts = tuple(consts) if consts is not None else marble_constants(self.n)
        c0, c1, _ = self.consts
        self.L = e1.encrypt(c0) ^ e2.encrypt(c0)
        self.tau = 0 if self.tau_profile is TauProfile.ZERO else e3.encrypt(c1)
        self._masks = {}

    @classmethod
    def from_key(cls, key: int, width: int, version=MarbleVersion.V1_2,
                 tau_profile=TauProfile.ZERO):
        return cls(*marble_layer_ciphers(width, key), version=version, tau_profile=tau_profile)

    def __repr__(self):
        return f"MarbleInstance(v{self.version.value}, n={self.n}, tau={self.tau_profile.value})"

    def mask(self, two: int, three: int = 0, seven: int = 0) -> int:
        key = (two, three, seven)
        m = self._masks.get(key)
        if m is None:
            m = self._masks[key] = self.field.mask_const(self.L, two, three, seven)
        return m


def trans(field, x, y):
    """``(x ^ y, 3x ^ y)``."""
    return x ^ y, field.times3(x) ^ y


def marble_init(inst: MarbleInstance) -> MarbleState:
    c0, c1, c2 = inst.consts
    return MarbleState(c1 ^ inst.e1.encrypt(c0), c2)


def _absorb(inst: MarbleInstance, st: MarbleState, masked_in):
    rho = inst.e1.encrypt(masked_in)
    v = inst.e2.encrypt(rho)
    w, s2 = trans(inst.field, v, st.s2)
    return rho, w, MarbleState(st.s1 ^ rho, s2)


def marble_process_block(inst: MarbleInstance, st: MarbleState, masked_in, out_mask):
    """One block through the pipeline: ``(output, new_state)``."""
    _, w, new = _absorb(inst, st, masked_in)
    return inst.e3.encrypt(w ^ st.s1) ^ out_mask, new


def ad_mask(inst: MarbleInstance, i: int, a: int, partial: bool) -> int:
    """Input mask of associated-data block ``i`` (0-based) out of ``a``."""
    if i < a - 1 or inst.version is MarbleVersion.V1_1:
        return inst.mask(i, 2)
    if inst.version is MarbleVersion.V1_0 and partial:
        return inst.mask(i, 4)
    return inst.mask(i, 3)


def _absorb_ad(inst: MarbleInstance, st: MarbleState, ad: BlockString | None) -> MarbleState:
    if ad is None or not len(ad):
        return st
    ad.validate(inst.n)
    blocks = padded_blocks(ad, inst.n)
    for i, b in enumerate(blocks):
        _, _, st = _absorb(inst, st, b ^ ad_mask(inst, i, len(blocks), ad.partial))
    return st


def _check_msg(inst: MarbleInstance, msg: BlockString):
    if msg is None or not len(msg):
        raise ValueError("message must have at least one block")
    if msg.partial:
        raise ValueError("Marble here takes full message blocks only")
    msg.validate(inst.n)


def marble_run(inst: MarbleInstance, ad: BlockString | None, msg: BlockString,
               with_ciphertext: bool = True):
    """``(ciphertext_blocks, tag, final_state)``; blocks may be arrays."""
    _check_msg(inst, msg)
    st = _absorb_ad(inst, marble_init(inst), ad)
    d = len(msg)
    sigma = 0
    out = []
    for i, m in enumerate(msg.blocks):
        if with_ciphertext:
            c, st = marble_process_block(inst, st, m ^ inst.mask(i + 1), inst.mask(i, 1))
            out.append(c)
        else:
            _, _, st = _absorb(inst, st, m ^ inst.mask(i + 1))
        sigma = sigma ^ m
    tag_in = sigma ^ inst.tau ^ inst.mask(d, 0, 1)
    tag, st = marble_process_block(inst, st, tag_in, inst.mask(d - 1, 1, 1))
    return out, tag, st


def marble_encrypt_and_tag(inst: MarbleInstance, ad: BlockString | None, msg: BlockString) -> AeOutput:
    ct, tag, _ = marble_run(inst, ad, msg)
    return AeOutput(tuple(ct), tag)


def marble_s1(inst: MarbleInstance, ad: BlockString | None, msg: BlockString):
    """First-chain value once the tag block has been absorbed."""
    return marble_run(inst, ad, msg, with_ciphertext=False)[2].s1


def marble_verify(inst: MarbleInstance, ad, msg: BlockString, tag: int) -> bool:
    return marble_run(inst, ad, msg, with_ciphertext=False)[1] == tag


def marble_decrypt(inst: MarbleInstance, ad, out: AeOutput) -> BlockString:
    st = _absorb_ad(inst, marble_init(inst), ad)
    blocks = []
    for i, c in enumerate(out.ciphertext):
        w = inst.e3.decrypt(c ^ inst.mask(i, 1)) ^ st.s1
        v = w ^ st.s2
        rho = inst.e2.decrypt(v)
        blocks.append(inst.e1.decrypt(rho) ^ inst.mask(i + 1))
        st = MarbleState(st.s1 ^ rho, inst.field.times3(v) ^ st.s2)
    msg = BlockString(tuple(blocks))
    if not marble_verify(inst, ad, msg, out.tag):
        raise InvalidTag("tag mismatch")
    return msg
