# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

# Bit-exact semantics of fixed-width bit-vector operations over Python ints.
# Values are always kept in [0, 2^w). Division follows the SMT-LIB convention:
# x udiv 0 = all ones, x urem 0 = x.


def mask(width: int) -> int:
    return (1 << width) - 1


def norm(value: int, width: int) -> int:
    return value & mask(width)


def to_signed(value: int, width: int) -> int:
    """
    Interprets a `width`-bit pattern as a two's complement integer.

    Example usage:
    --------------
    >>> to_signed(255, 8)
    -1
    >>> to_signed(127, 8)
    127
    """
    value = norm(value, width)
    if value >> (width - 1):
        return value - (1 << width)
    return value


def add(a: int, b: int, width: int) -> int:
    return norm(a + b, width)


def sub(a: int, b: int, width: int) -> int:
    return norm(a - b, width)


def mul(a: int, b: int, width: int) -> int:
    return norm(a * b, width)


def neg(a: int, width: int) -> int:
    return norm(-a, width)


def bnot(a: int, width: int) -> int:
    return norm(~a, width)


def udiv(a: int, b: int, width: int) -> int:
    if b == 0:
        return mask(width)
    return a // b


def urem(a: int, b: int, width: int) -> int:
    if b == 0:
        return a
    return a % b


def shl(a: int, b: int, width: int) -> int:
    if b >= width:
        return 0
    return norm(a << b, width)


def lshr(a: int, b: int, width: int) -> int:
    if b >= width:
        return 0
    return a >> b


def ashr(a: int, b: int, width: int) -> int:
    signed = to_signed(a, width)
    if b >= width:
        return mask(width) if signed < 0 else 0
    return norm(signed >> b, width)


def ult(a: int, b: int, width: int) -> bool:
    return a < b


def ule(a: int, b: int, width: int) -> bool:
    return a <= b


def slt(a: int, b: int, width: int) -> bool:
    return to_signed(a, width) < to_signed(b, width)


def sle(a: int, b: int, width: int) -> bool:
    return to_signed(a, width) <= to_signed(b, width)


def extract(a: int, hi: int, lo: int) -> int:
    return (a >> lo) & mask(hi - lo + 1)


def zero_extend(a: int, extra: int, width: int) -> int:
    return a


def sign_extend(a: int, extra: int, width: int) -> int:
    return norm(to_signed(a, width), width + extra)


def concat(a: int, b: int, width_b: int) -> int:
    return (a << width_b) | b
