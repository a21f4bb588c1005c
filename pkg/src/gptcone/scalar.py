"""Scalar policy: exact rationals by default, tolerance-tagged floats otherwise.

A vector is *exact* when every coordinate is an ``int`` or ``Fraction``.  Any
float coordinate switches the whole computation to float mode, where every
comparison is made against a single global tolerance.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

Scalar = Union[Fraction, float]
Vec = tuple

DEFAULT_EPSILON = 1e-9
EPSILON_ENV = "GPTCONE_EPSILON"


def epsilon() -> float:
    """Float-mode tolerance, overridable through ``$GPTCONE_EPSILON``."""
    raw = os.environ.get(EPSILON_ENV)
    if raw:
        return float(raw)
    return DEFAULT_EPSILON


def to_scalar(x) -> Scalar:
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return parse_scalar(x)
    return float(x)


def parse_scalar(text: str) -> Scalar:
    """Parse ``"p/q"`` or an integer literal exactly; anything else as float."""
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def format_scalar(x: Scalar) -> Union[str, float]:
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def vec(values: Iterable) -> Vec:
    return tuple(to_scalar(v) for v in values)


def is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def all_exact(vectors: Iterable[Sequence]) -> bool:
    return all(is_exact(v) for v in vectors)


def to_float_vec(values: Iterable) -> tuple:
    return tuple(float(v) for v in values)


def is_zero(x: Scalar) -> bool:
    if isinstance(x, (Fraction, int)):
        return x == 0
    return abs(x) <= epsilon()


def sign(x: Scalar) -> int:
    if is_zero(x):
        return 0
    return 1 if x > 0 else -1


def geq(a: Scalar, b: Scalar) -> bool:
    """``a >= b`` exactly, or within tolerance in float mode."""
    return sign(a - b) >= 0


def eq(a: Scalar, b: Scalar) -> bool:
    return sign(a - b) == 0


def dot(a: Sequence, b: Sequence) -> Scalar:
    return sum((x * y for x, y in zip(a, b)), Fraction(0) if is_exact(a) and is_exact(b) else 0.0)


def vec_eq(a: Sequence, b: Sequence) -> bool:
    return len(a) == len(b) and all(eq(x, y) for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vec:
    return tuple(c * x for x in a)


def lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)
