"""Arithmetic in GF(2^n) for the block widths used by the modes.

Elements are plain Python ints whose bit ``i`` is the coefficient of ``x^i``,
so the integer 5 is the polynomial ``x^2 + 1``.  The doubling and
multiply-by-constant routines also accept ``numpy`` ``uint64`` arrays (toy
widths only), which is what lets the attack code evaluate a mode over a whole
input cube at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Low-degree part of the reduction polynomial; the x^n term is implicit.
REDUCTION = {
    8: 0x1B,  # x^8 + x^4 + x^3 + x + 1
    12: 0x53,  # x^12 + x^6 + x^4 + x + 1
    16: 0x2B,  # x^16 + x^5 + x^3 + x + 1
    20: 0x09,  # x^20 + x^3 + 1
    24: 0x1B,  # x^24 + x^4 + x^3 + x + 1
    128: 0x87,  # x^128 + x^7 + x^2 + x + 1
}

SUPPORTED_WIDTHS = tuple(sorted(REDUCTION))


class FieldMismatchError(ValueError):
    """Operands belong to different fields (or do not fit the width)."""


def clmul(a: int, b: int) -> int:
    """Carryless product of two polynomials over GF(2), no reduction."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, m: int) -> int:
    """Remainder of ``a`` divided by ``m`` in GF(2)[x]."""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _mulmod(a: int, b: int, m: int) -> int:
    return poly_mod(clmul(a, b), m)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _x_pow_2k(k: int, m: int) -> int:
    """``x^(2^k) mod m`` by repeated squaring."""
    r = poly_mod(2, m)
    for _ in range(k):
        r = _mulmod(r, r, m)
    return r


def is_irreducible(poly: int) -> bool:
    """Rabin's test for a polynomial of degree ``n`` over GF(2).

    ``poly`` is irreducible iff ``x^(2^n) = x mod poly`` and, for every prime
    ``q`` dividing ``n``, ``gcd(x^(2^(n/q)) - x, poly) = 1``.
    """
    n = poly.bit_length() - 1
    if n < 1:
        return False
    if n == 1:
        return True
    primes = [q for q in range(2, n + 1) if n % q == 0 and all(q % r for r in range(2, q))]
    for q in primes:
        if _gcd(poly, _x_pow_2k(n // q, poly) ^ 2) != 1:
            return False
    return _x_pow_2k(n, poly) == poly_mod(2, poly)


@dataclass(frozen=True)
class Field:
    """GF(2^n) with reduction polynomial ``x^n + reduction``."""

    width: int
    reduction: int

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("field width must be at least 2")
        if self.reduction >> self.width:
            raise ValueError("reduction must be the low-degree part only")

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def modulus(self) -> int:
        return (1 << self.width) | self.reduction

    def check(self, a: int) -> int:
        if isinstance(a, (int, np.integer)) and not 0 <= int(a) <= self.mask:
            raise FieldMismatchError(f"{a:#x} is not a {self.width}-bit element")
        return a

    def add(self, a, b):
        return self.check(a) ^ self.check(b)

    def double(self, a):
        """Multiply by ``x``; works on ints and on uint64 arrays."""
        n = self.width
        if isinstance(a, np.ndarray):
            hi = (a >> np.uint64(n - 1)) & np.uint64(1)
            return ((a << np.uint64(1)) & np.uint64(self.mask)) ^ (hi * np.uint64(self.reduction))
        hi = a >> (n - 1)
        return ((a << 1) & self.mask) ^ (self.reduction if hi else 0)

    def pow2mul(self, a, i: int):
        """Return ``2^i * a`` via ``i`` successive doublings."""
        if i < 0:
            raise ValueError("exponent must be non-negative")
        for _ in range(i):
            a = self.double(a)
        return a

    def mul(self, a, b: int):
        """Field product.  ``a`` may be an array when ``b`` is a scalar."""
        if isinstance(b, np.ndarray):
            a, b = b, a
        self.check(b)
        if not isinstance(a, np.ndarray):
            self.check(a)
            return _mul_int(a, b, self.width, self.reduction)
        out = np.zeros_like(a)
        while b:
            if b & 1:
                out ^= a
            a = self.double(a)
            b >>= 1
        return out

    def times3(self, a):
        return a ^ self.double(a)

    def power(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        """Inverse by the extended Euclidean algorithm over GF(2)[x]."""
        self.check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^n)")
        r0, r1 = self.modulus, a
        s0, s1 = 0, 1
        while r1:
            q = 0
            r = r0
            dr1 = r1.bit_length()
            while r.bit_length() >= dr1:
                shift = r.bit_length() - dr1
                q ^= 1 << shift
                r ^= r1 << shift
            r0, r1 = r1, r
            s0, s1 = s1, s0 ^ clmul(q, s1)
        # r0 is the gcd, which is 1 for an irreducible modulus
        if r0 != 1:
            raise ArithmeticError("reduction polynomial is not irreducible")
        return poly_mod(s0, self.modulus)

    def mask_const(self, L: int, two: int = 0, three: int = 0, seven: int = 0) -> int:
        """``2^two * 3^three * 7^seven * L``."""
        if min(two, three, seven) < 0:
            raise ValueError("exponents must be non-negative")
        return self.mul(L, mask_coefficient(self, two, three, seven))

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(self.check(value), self)


@lru_cache(maxsize=None)
def mask_coefficient(field: Field, two: int, three: int, seven: int) -> int:
    """The field constant ``2^two * 3^three * 7^seven``."""
    c = field.power(3, three)
    c = field.mul(c, field.power(7, seven))
    return field.pow2mul(c, two)


def _mul_int(a: int, b: int, n: int, red: int) -> int:
    # reduce once at the end: clmul then fold the high half back
    p = clmul(a, b)
    mod = (1 << n) | red
    return poly_mod(p, mod)


@lru_cache(maxsize=None)
def field_for(width: int) -> Field:
    """The field this package uses at ``width`` bits."""
    if width not in REDUCTION:
        raise ValueError(f"unsupported width {width}; choose from {SUPPORTED_WIDTHS}")
    return Field(width, REDUCTION[width])


@dataclass(frozen=True)
class FieldElem:
    """A value bound to its field; supports ``^``/``+`` and ``*``."""

    value: int
    field: Field

    def _other(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldMismatchError("operands live in different fields")
            return other.value
        return self.field.check(other)

    def __xor__(self, other):
        return FieldElem(self.value ^ self._other(other), self.field)

    __add__ = __rxor__ = __radd__ = __xor__

    def __mul__(self, other):
        return FieldElem(self.field.mul(self.value, self._other(other)), self.field)

    __rmul__ = __mul__

    def inv(self) -> "FieldElem":
        return FieldElem(self.field.inv(self.value), self.field)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElem({self.value:#x}, n={self.field.width})"


def add(a: FieldElem, b: FieldElem) -> FieldElem:
    return a ^ b


def mul(a: FieldElem, b: FieldElem) -> FieldElem:
    return a * b


def pow2mul(a: FieldElem, i: int) -> FieldElem:
    return FieldElem(a.field.pow2mul(a.value, i), a.field)


def inv(a: FieldElem) -> FieldElem:
    return a.inv()


def mask(L: FieldElem, two_exp: int = 0, three_exp: int = 0, seven_exp: int = 0) -> FieldElem:
    return FieldElem(L.field.mask_const(L.value, two_exp, three_exp, seven_exp), L.field)
