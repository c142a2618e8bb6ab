"""Keyed n-bit block permutations.

Three families live here:

* ``ToySPN`` -- a small 4-bit S-box / bit-rotation network usable at any
  width that is a multiple of 4.  Encryption accepts ints or ``uint64``
  arrays; at n <= 16 the full codebook is cached on first vector use.
* ``AES128`` -- the real cipher, backed by ``cryptography``.
* ``ReducedAES`` -- a pure-Python 4-round AES with selectable round
  subkeys, used as Marble's E1/E2/E3 at full width.

``aes128_encrypt_block`` is a from-scratch reference AES kept as an
independent check on the library-backed one.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .gf2poly import field_for

TOY_SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
TOY_ROUNDS = 8
CODEBOOK_MAX_WIDTH = 16

# Which of the eleven AES-128 round keys each Marble layer cipher uses.
MARBLE_SUBKEYS = {"E1": (1, 2, 3, 4), "E2": (5, 6, 7, 8), "E3": (7, 8, 9, 10)}

ROLES = ("Ek", "E1", "E2", "E3")


class WidthError(ValueError):
    pass


def rotl(x, r: int, n: int):
    r %= n
    if r == 0:
        return x
    mask = (1 << n) - 1
    if isinstance(x, np.ndarray):
        return ((x << np.uint64(r)) | (x >> np.uint64(n - r))) & np.uint64(mask)
    return ((x << r) | (x >> (n - r))) & mask


def rotr(x, r: int, n: int):
    return rotl(x, n - (r % n), n)


@dataclass(frozen=True)
class ToySpnSpec:
    width: int
    sbox: tuple = TOY_SBOX
    rotation: int | None = None  # defaults to n/4 + 1
    rounds: int = TOY_ROUNDS

    def __post_init__(self):
        if self.width % 4 or self.width < 8 or self.width > 32:
            raise WidthError("toy SPN width must be a multiple of 4 in [8, 32]")
        if sorted(self.sbox) != list(range(16)):
            raise ValueError("sbox is not a permutation of 0..15")
        if self.rounds < 1:
            raise ValueError("rounds must be positive")

    @property
    def rot(self) -> int:
        if self.rotation is not None:
            return self.rotation
        r = self.width // 4 + 1
        # a nibble-aligned rotation would only permute S-box outputs (n = 12)
        return r + 1 if r % 4 == 0 else r


class ToySPN:
    """Toy substitution-permutation network.

    Round ``i`` (0-based) XORs ``rotl(key, i) ^ i``, applies the S-box to every
    nibble and rotates the block left by ``n/4 + 1`` (``n/4 + 2`` when the former
    is a multiple of 4).  A final whitening key
    ``rotl(key, R) ^ R`` follows the last round.
    """

    def __init__(self, key: int, width: int, role: str = "Ek", spec: ToySpnSpec | None = None):
        self.spec = spec or ToySpnSpec(width)
        if self.spec.width != width:
            raise WidthError("ToySpnSpec width does not match cipher width")
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        self.width = width
        self.role = role
        self.mask = (1 << width) - 1
        self.key = key & self.mask
        self.round_keys = [rotl(self.key, i, width) ^ (i & self.mask)
                           for i in range(self.spec.rounds + 1)]
        inv = [0] * 16
        for i, v in enumerate(self.spec.sbox):
            inv[v] = i
        self._sbox = tuple(self.spec.sbox)
        self._inv = tuple(inv)
        self._sbox_np = np.array(self._sbox, dtype=np.uint64)
        self._inv_np = np.array(self._inv, dtype=np.uint64)
        self._enc_book = None
        self._dec_book = None

    def __repr__(self):
        return f"ToySPN(n={self.width}, role={self.role})"

    def _sub(self, x, table, table_np):
        n_nib = self.width // 4
        if isinstance(x, np.ndarray):
            out = np.zeros_like(x)
            for j in range(n_nib):
                sh = np.uint64(4 * j)
                out |= table_np[(x >> sh) & np.uint64(0xF)] << sh
            return out
        out = 0
        for j in range(n_nib):
            out |= table[(x >> (4 * j)) & 0xF] << (4 * j)
        return out

    def _encrypt_direct(self, x):
        rk = self.round_keys
        for i in range(self.spec.rounds):
            x = x ^ _as(x, rk[i])
            x = self._sub(x, self._sbox, self._sbox_np)
            x = rotl(x, self.spec.rot, self.width)
        return x ^ _as(x, rk[-1])

    def _decrypt_direct(self, y):
        rk = self.round_keys
        y = y ^ _as(y, rk[-1])
        for i in reversed(range(self.spec.rounds)):
            y = rotr(y, self.spec.rot, self.width)
            y = self._sub(y, self._inv, self._inv_np)
            y = y ^ _as(y, rk[i])
        return y

    def _books(self):
        if self._enc_book is None:
            xs = np.arange(1 << self.width, dtype=np.uint64)
            enc = self._encrypt_direct(xs)
            dec = np.empty_like(enc)
            dec[enc.astype(np.int64)] = xs
            self._enc_book, self._dec_book = enc, dec
        return self._enc_book, self._dec_book

    def encrypt(self, x):
        if isinstance(x, np.ndarray):
            if self.width <= CODEBOOK_MAX_WIDTH:
                return self._books()[0][x.astype(np.int64)]
            return self._encrypt_direct(x.astype(np.uint64))
        _check_block(x, self.width)
        if self._enc_book is not None:
            return int(self._enc_book[x])
        return self._encrypt_direct(int(x))

    def decrypt(self, y):
        if isinstance(y, np.ndarray):
            if self.width <= CODEBOOK_MAX_WIDTH:
                return self._books()[1][y.astype(np.int64)]
            return self._decrypt_direct(y.astype(np.uint64))
        _check_block(y, self.width)
        if self._dec_book is not None:
            return int(self._dec_book[y])
        return self._decrypt_direct(int(y))


def _as(x, k: int):
    return np.uint64(k) if isinstance(x, np.ndarray) else k


def _check_block(x, n: int):
    if not 0 <= x < (1 << n):
        raise WidthError(f"block {x:#x} does not fit in {n} bits")


class IdentityCipher:
    """Test double: encrypt and decrypt are the identity map."""

    def __init__(self, width: int, role: str = "Ek"):
        self.width = width
        self.role = role

    def encrypt(self, x):
        if not isinstance(x, np.ndarray):
            _check_block(x, self.width)
        return x

    decrypt = encrypt


# ---------------------------------------------------------------------------
# AES


def _build_aes_tables():
    sbox = [0] * 256
    f8 = field_for(8)
    for a in range(256):
        b = f8.inv(a) if a else 0
        s = b
        for k in range(1, 5):
            s ^= ((b << k) | (b >> (8 - k))) & 0xFF
        sbox[a] = s ^ 0x63
    inv = [0] * 256
    for i, v in enumerate(sbox):
        inv[v] = i
    return tuple(sbox), tuple(inv)


AES_SBOX, AES_INV_SBOX = _build_aes_tables()


def _xt(a: int) -> int:
    a <<= 1
    return (a ^ 0x11B) if a & 0x100 else a


def _gmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = _xt(a)
        b >>= 1
    return out


_MUL = {c: tuple(_gmul(a, c) for a in range(256)) for c in (2, 3, 9, 11, 13, 14)}


def aes128_round_keys(key: bytes) -> list[bytes]:
    """The eleven 16-byte AES-128 round keys."""
    if len(key) != 16:
        raise WidthError("AES-128 key must be 16 bytes")
    words = [list(key[4 * i:4 * i + 4]) for i in range(4)]
    rcon = 1
    for i in range(4, 44):
        t = list(words[i - 1])
        if i % 4 == 0:
            t = t[1:] + t[:1]
            t = [AES_SBOX[b] for b in t]
            t[0] ^= rcon
            rcon = _xt(rcon)
        words.append([a ^ b for a, b in zip(words[i - 4], t)])
    return [bytes(sum(words[4 * r:4 * r + 4], [])) for r in range(11)]


def _sub_bytes(s):
    return [AES_SBOX[b] for b in s]


def _inv_sub_bytes(s):
    return [AES_INV_SBOX[b] for b in s]


def _shift_rows(s):
    # column-major state: byte (r, c) at index 4c + r
    return [s[4 * ((c + r) % 4) + r] for c in range(4) for r in range(4)]


def _inv_shift_rows(s):
    return [s[4 * ((c - r) % 4) + r] for c in range(4) for r in range(4)]


def _mix_columns(s):
    m2, m3 = _MUL[2], _MUL[3]
    out = []
    for c in range(4):
        a0, a1, a2, a3 = s[4 * c:4 * c + 4]
        out += [m2[a0] ^ m3[a1] ^ a2 ^ a3,
                a0 ^ m2[a1] ^ m3[a2] ^ a3,
                a0 ^ a1 ^ m2[a2] ^ m3[a3],
                m3[a0] ^ a1 ^ a2 ^ m2[a3]]
    return out


def _inv_mix_columns(s):
    m9, m11, m13, m14 = _MUL[9], _MUL[11], _MUL[13], _MUL[14]
    out = []
    for c in range(4):
        a0, a1, a2, a3 = s[4 * c:4 * c + 4]
        out += [m14[a0] ^ m11[a1] ^ m13[a2] ^ m9[a3],
                m9[a0] ^ m14[a1] ^ m11[a2] ^ m13[a3],
                m13[a0] ^ m9[a1] ^ m14[a2] ^ m11[a3],
                m11[a0] ^ m13[a1] ^ m9[a2] ^ m14[a3]]
    return out


def _xor(s, k):
    return [a ^ b for a, b in zip(s, k)]


def aes128_encrypt_block(key: bytes, block: bytes) -> bytes:
    """Reference AES-128 (FIPS-197), byte-oriented and slow."""
    rks = aes128_round_keys(key)
    s = _xor(block, rks[0])
    for r in range(1, 10):
        s = _xor(_mix_columns(_shift_rows(_sub_bytes(s))), rks[r])
    s = _xor(_shift_rows(_sub_bytes(s)), rks[10])
    return bytes(s)


def aes128_decrypt_block(key: bytes, block: bytes) -> bytes:
    rks = aes128_round_keys(key)
    s = _xor(block, rks[10])
    s = _inv_sub_bytes(_inv_shift_rows(s))
    for r in range(9, 0, -1):
        s = _inv_mix_columns(_xor(s, rks[r]))
        s = _inv_sub_bytes(_inv_shift_rows(s))
    return bytes(_xor(s, rks[0]))


class AES128:
    """AES-128 on 128-bit integer blocks (big-endian byte order)."""

    width = 128

    def __init__(self, key: int | bytes, role: str = "Ek"):
        self.key = key if isinstance(key, bytes) else int(key).to_bytes(16, "big")
        if len(self.key) != 16:
            raise WidthError("AES-128 key must be 16 bytes")
        self.role = role
        self._enc = None
        self._dec = None

    def __getstate__(self):
        return {"key": self.key, "role": self.role}

    def __setstate__(self, state):
        self.__init__(state["key"], state["role"])

    def encrypt(self, x: int) -> int:
        _check_block(x, 128)
        if self._enc is None:
            self._enc = Cipher(algorithms.AES(self.key), modes.ECB()).encryptor()
        return int.from_bytes(self._enc.update(x.to_bytes(16, "big")), "big")

    def decrypt(self, y: int) -> int:
        _check_block(y, 128)
        if self._dec is None:
            self._dec = Cipher(algorithms.AES(self.key), modes.ECB()).decryptor()
        return int.from_bytes(self._dec.update(y.to_bytes(16, "big")), "big")


class ReducedAES:
    """Four AES rounds, round ``j`` adding ``round_keys[subkeys[j]]``.

    Each round is SubBytes, ShiftRows, MixColumns, AddRoundKey.
    """

    width = 128

    def __init__(self, key: int | bytes, subkeys=(1, 2, 3, 4), role: str = "E1"):
        key = key if isinstance(key, bytes) else int(key).to_bytes(16, "big")
        rks = aes128_round_keys(key)
        if len(subkeys) != 4 or not all(0 <= i <= 10 for i in subkeys):
            raise ValueError("need four subkey indices in 0..10")
        self.subkeys = tuple(subkeys)
        self.keys = [rks[i] for i in subkeys]
        self.role = role

    def encrypt(self, x: int) -> int:
        _check_block(x, 128)
        s = list(x.to_bytes(16, "big"))
        for k in self.keys:
            s = _xor(_mix_columns(_shift_rows(_sub_bytes(s))), k)
        return int.from_bytes(bytes(s), "big")

    def decrypt(self, y: int) -> int:
        _check_block(y, 128)
        s = list(y.to_bytes(16, "big"))
        for k in reversed(self.keys):
            s = _inv_sub_bytes(_inv_shift_rows(_inv_mix_columns(_xor(s, k))))
        return int.from_bytes(bytes(s), "big")


# ---------------------------------------------------------------------------


def make_cipher(width: int, key: int, role: str = "Ek"):
    """The ``Ek`` cipher for a mode at ``width`` bits."""
    if width == 128:
        return AES128(key, role)
    return ToySPN(key, width, role)


def xor_fold(value: int, bits: int, width: int) -> int:
    """XOR together the ``width``-bit chunks of a ``bits``-bit value."""
    mask = (1 << width) - 1
    out = 0
    for shift in range(0, bits, width):
        out ^= (value >> shift) & mask
    return out


def marble_layer_ciphers(width: int, key: int):
    """Three independently keyed permutations (E1, E2, E3) for Marble."""
    if width == 128:
        return tuple(ReducedAES(key, MARBLE_SUBKEYS[r], r) for r in ("E1", "E2", "E3"))
    out = []
    for tag, role in ((1, "E1"), (2, "E2"), (3, "E3")):
        k = xor_fold((key << 8) | tag, width + 8, width)
        out.append(ToySPN(k, width, role))
    return tuple(out)


def derive_L(cipher) -> int:
    """``L = E_k(0)``."""
    return cipher.encrypt(0)


def load_test_vectors(path) -> list[tuple[int, int, int]]:
    """Parse ``key_hex, plaintext_hex, ciphertext_hex`` lines (``#`` comments)."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        k, p, c = (int(t.strip(), 16) for t in line.split(","))
        out.append((k, p, c))
    return out
