"""Exact arithmetic over prime fields GF(p) and the rationals.

Linear algebra in this package works on raw canonical values (``int`` in
``[0, p)`` for GF(p), :class:`fractions.Fraction` for the rationals) for
speed.  :class:`FieldElement` wraps such a value together with its field and
is the public, operator-overloaded face of the same arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

Raw = Union[int, Fraction]

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin, exact for all p < 3.3e24."""
    if p < 2:
        return False
    for b in _MR_BASES:
        if p % b == 0:
            return p == b
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class FieldMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    """A prime field (``modulus`` set) or the rationals (``modulus`` is None)."""

    kind: str
    modulus: int | None = None
    # sampling parameters for random rational weights; not part of field identity
    num_range: tuple[int, int] = field(default=(-9, 9), compare=False)
    den_max: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "prime":
            if self.modulus is None or not is_prime(int(self.modulus)):
                raise ValueError(f"modulus {self.modulus!r} is not prime")
            if self.modulus >= 2**31:
                raise ValueError("prime moduli must be below 2**31")
        elif self.kind == "rational":
            if self.modulus is not None:
                raise ValueError("rational field takes no modulus")
            lo, hi = self.num_range
            if lo > hi or (lo == 0 and hi == 0) or self.den_max < 1:
                raise ValueError("empty rational sampling range")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def gf(cls, p: int) -> FieldSpec:
        return cls("prime", int(p))

    @classmethod
    def rationals(cls, num_range: tuple[int, int] = (-9, 9), den_max: int = 1) -> FieldSpec:
        return cls("rational", None, num_range, den_max)

    @classmethod
    def parse(cls, text: str) -> FieldSpec:
        """Parse ``"gf:5"`` or ``"q"``."""
        t = text.strip().lower()
        if t in ("q", "rational", "rationals"):
            return cls.rationals()
        if t.startswith("gf:"):
            try:
                p = int(t[3:])
            except ValueError:
                raise ValueError(f"bad field string {text!r}") from None
            return cls.gf(p)
        raise ValueError(f"bad field string {text!r}")

    @property
    def is_prime(self) -> bool:
        return self.kind == "prime"

    def __str__(self) -> str:
        return f"gf:{self.modulus}" if self.is_prime else "q"

    # raw-value arithmetic, shared by the linear algebra code

    def coerce(self, x) -> Raw:
        if isinstance(x, FieldElement):
            if x.field != self:
                raise FieldMismatch(f"{x.field} element used in {self}")
            return x.value
        if self.is_prime:
            if isinstance(x, Fraction):
                return self.div(x.numerator % self.modulus, x.denominator % self.modulus)
            return int(x) % self.modulus
        return Fraction(x)

    def add(self, a: Raw, b: Raw) -> Raw:
        return (a + b) % self.modulus if self.is_prime else a + b

    def sub(self, a: Raw, b: Raw) -> Raw:
        return (a - b) % self.modulus if self.is_prime else a - b

    def mul(self, a: Raw, b: Raw) -> Raw:
        return (a * b) % self.modulus if self.is_prime else a * b

    def neg(self, a: Raw) -> Raw:
        return (-a) % self.modulus if self.is_prime else -a

    def inv(self, a: Raw) -> Raw:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.is_prime:
            return pow(int(a), -1, self.modulus)
        return 1 / Fraction(a)

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def random_raw(self, rng: np.random.Generator) -> Raw:
        if self.is_prime:
            return int(rng.integers(1, self.modulus))
        lo, hi = self.num_range
        while True:
            num = int(rng.integers(lo, hi + 1))
            if num != 0:
                break
        den = int(rng.integers(1, self.den_max + 1))
        return Fraction(num, den)

    def random_nonzero(self, rng: np.random.Generator) -> FieldElement:
        return FieldElement(self, self.random_raw(rng))

    def element(self, x) -> FieldElement:
        return FieldElement(self, self.coerce(x))

    def format(self, a: Raw) -> str:
        return str(a)

    def parse_value(self, text: str) -> Raw:
        return self.coerce(Fraction(text)) if "/" in text else self.coerce(int(text))


GF2 = FieldSpec.gf(2)
QQ = FieldSpec.rationals()


class FieldElement:
    """Immutable element of a :class:`FieldSpec`, kept in canonical form."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldSpec, value) -> None:
        if field.is_prime:
            v: Raw = int(value) % field.modulus
        else:
            v = Fraction(value)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", v)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, b) -> Raw:
        if isinstance(b, FieldElement):
            if b.field != self.field:
                raise FieldMismatch(f"{self.field} vs {b.field}")
            return b.value
        if isinstance(b, (int, Fraction)):
            return self.field.coerce(b)
        return NotImplemented

    def _wrap(self, v: Raw) -> FieldElement:
        return FieldElement(self.field, v)

    def __add__(self, b):
        o = self._other(b)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, b):
        o = self._other(b)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(self.value, o))

    def __rsub__(self, b):
        o = self._other(b)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(o, self.value))

    def __mul__(self, b):
        o = self._other(b)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, b):
        o = self._other(b)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.div(self.value, o))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def inv(self) -> FieldElement:
        return self._wrap(self.field.inv(self.value))

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self) -> bool:
        return self.value != 0

    def __eq__(self, b) -> bool:
        if isinstance(b, FieldElement):
            return self.field == b.field and self.value == b.value
        if isinstance(b, (int, Fraction)):
            return self.value == self.field.coerce(b)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field, self.value))

    def __repr__(self) -> str:
        return f"FieldElement({self.field}, {self.value})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def random_nonzero(spec: FieldSpec, rng: np.random.Generator) -> FieldElement:
    return spec.random_nonzero(rng)
