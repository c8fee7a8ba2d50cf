"""Arithmetic in GF(2^k) with elements stored as k-bit integer masks.

Bit j of an element is the coefficient of x^j, so the constant term is the
lowest bit.  Moduli are (k+1)-bit masks.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadInputError
from .kernels import gf_mul_array

MIN_DEGREE = 2
MAX_DEGREE = 26


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible(m: int) -> bool:
    """Trial division by every polynomial of degree 1..deg(m)//2."""
    deg = m.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for p in range(1 << d, 1 << (d + 1)):
            if poly_mod(m, p) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    k: int
    modulus: int

    def __post_init__(self):
        if not MIN_DEGREE <= self.k <= MAX_DEGREE:
            raise BadInputError(f"extension degree must be in [{MIN_DEGREE}, {MAX_DEGREE}], got {self.k}")
        if self.modulus.bit_length() != self.k + 1:
            raise BadInputError(f"modulus {self.modulus:#x} does not have degree {self.k}")
        if not _irreducible_cached(self.modulus):
            raise BadInputError(f"modulus {self.modulus:#x} is reducible")

    @property
    def order(self):
        return 1 << self.k

    def check(self, e):
        if not 0 <= e < (1 << self.k):
            raise BadInputError(f"{e} is not a {self.k}-bit field element")
        return e


@lru_cache(maxsize=None)
def _irreducible_cached(m):
    return is_irreducible(m)


@lru_cache(maxsize=None)
def find_irreducible(k: int) -> FieldCtx:
    """The field built on the numerically smallest irreducible of degree k."""
    if not MIN_DEGREE <= k <= MAX_DEGREE:
        raise BadInputError(f"extension degree must be in [{MIN_DEGREE}, {MAX_DEGREE}], got {k}")
    # even masks are divisible by x
    for m in range((1 << k) | 1, 1 << (k + 1), 2):
        if _irreducible_cached(m):
            return FieldCtx(k, m)
    raise AssertionError("unreachable: irreducibles exist in every degree")


def mul(ctx: FieldCtx, a: int, b: int) -> int:
    """Shift-and-add product with interleaved reduction."""
    top = 1 << ctx.k
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= ctx.modulus
    return acc


def add(a: int, b: int) -> int:
    return a ^ b


def power(ctx: FieldCtx, a: int, e: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = mul(ctx, result, a)
        a = mul(ctx, a, a)
        e >>= 1
    return result


def inverse(ctx: FieldCtx, a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    return power(ctx, a, ctx.order - 2)


def poly_eval_deg3(ctx: FieldCtx, s, x: int) -> int:
    """s[0] + s[1] x + s[2] x^2 + s[3] x^3 by Horner's rule."""
    s1, s2, s3, s4 = s
    acc = s4
    acc = mul(ctx, acc, x) ^ s3
    acc = mul(ctx, acc, x) ^ s2
    return mul(ctx, acc, x) ^ s1


def iota(e: int) -> int:
    """The constant-term coefficient, used as the output bit of an element."""
    return e & 1


def iota_mask(ctx: FieldCtx, c: int) -> int:
    """Mask m with iota(c * y) == parity(y & m) for every element y."""
    m = 0
    for j in range(ctx.k):
        m |= iota(mul(ctx, c, 1 << j)) << j
    return m


def iota_masks(ctx: FieldCtx) -> np.ndarray:
    """``iota_mask`` for every element, vectorised; shape (2^k,)."""
    # bit j of mask(c) is iota(c x^j) = parity(c & mask(x^j))
    elems = np.arange(ctx.order, dtype=np.uint64)
    out = np.zeros(ctx.order, dtype=np.uint64)
    for j in range(ctx.k):
        mj = np.uint64(iota_mask(ctx, 1 << j))
        out |= (np.bitwise_count(elems & mj).astype(np.uint64) & np.uint64(1)) << np.uint64(j)
    return out


def mul_many(ctx: FieldCtx, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.broadcast_to(np.asarray(b, dtype=np.uint64), a.shape)
    return gf_mul_array(np.ascontiguousarray(a), np.ascontiguousarray(b), ctx.k, ctx.modulus)


@lru_cache(maxsize=4)
def power_tables(ctx: FieldCtx):
    """(x, x^2, x^3) for every element x, as uint32 arrays."""
    x = np.arange(ctx.order, dtype=np.uint64)
    x2 = mul_many(ctx, x, x)
    x3 = mul_many(ctx, x2, x)
    tabs = tuple(a.astype(np.uint32) for a in (x, x2, x3))
    for t in tabs:
        t.setflags(write=False)
    return tabs
