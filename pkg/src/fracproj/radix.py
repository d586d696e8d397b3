"""Exact radix arithmetic.

Every point handled by the package is an integer numerator over a power of an
atomic radix ``b``; every scale is a power of some radix (``2`` for dyadic
grids, ``m = b**q`` for m-adic grids). Nothing here uses floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Union

import numpy as np

from .errors import NonIntegralExponent

Rational = Union[int, Fraction]

# int64 headroom kept for one extra addition after a multiply
_INT64_SAFE = 1 << 62


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    """``"num/den"``, or just ``"num"`` for integers."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def integer_root(n: int, k: int) -> tuple[int, bool]:
    """Return ``(floor(n ** (1/k)), exact)`` for integers ``n >= 0``, ``k >= 1``."""
    if n < 0 or k < 1:
        raise ValueError("integer_root needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n, True
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo, lo**k == n


def exact_power(base: int, p: Rational) -> int | None:
    """``base ** p`` as an int when it is one, else ``None`` (``p >= 0``)."""
    p = Fraction(p)
    if p < 0:
        raise ValueError("exact_power only handles non-negative exponents")
    root, exact = integer_root(base, p.denominator)
    if not exact:
        return None
    return root**p.numerator


@dataclass(frozen=True)
class RadixBase:
    """Atomic radix ``b`` and power ``q`` with ``m = b**q``."""

    b: int
    q: int

    def __post_init__(self):
        if self.b < 2 or self.q < 1:
            raise ValueError(f"need b >= 2 and q >= 1, got b={self.b}, q={self.q}")

    @property
    def m(self) -> int:
        return self.b**self.q

    @property
    def rho(self) -> Fraction:
        return Fraction(1, self.m)

    @classmethod
    def for_modulus(cls, m: int) -> "RadixBase":
        """Smallest atomic radix whose power equals ``m``."""
        if m < 2:
            raise ValueError("m must be at least 2")
        for q in range(m.bit_length(), 0, -1):
            root, exact = integer_root(m, q)
            if exact and root >= 2:
                return cls(root, q)
        return cls(m, 1)

    def m_exponent(self, p: Rational) -> int:
        """Exponent of ``b`` equal to ``m ** p``; raises if not integral."""
        e = Fraction(p) * self.q
        if e.denominator != 1:
            raise NonIntegralExponent(
                f"m**({fraction_str(Fraction(p))}) = {self.b}**({fraction_str(e)}) is not an integer power"
            )
        return int(e)

    def m_power(self, p: Rational) -> int:
        """``m ** p`` as an integer (``p >= 0``)."""
        return self.b ** self.m_exponent(p)


def make_base(b: int, q: int, tau: Rational) -> RadixBase:
    """Build a base able to represent the digit spacings for ``tau`` exactly.

    The spacings used by the A, B and Theta families are ``m**(-(1+tau)/2)``,
    ``m**(-(1-tau)/2)`` and ``m**(-tau)``; each must be an integer power of ``b``.
    """
    tau = as_fraction(tau)
    if not 0 <= tau < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    base = RadixBase(b, q)
    for p in (tau, (1 + tau) / 2, (1 - tau) / 2):
        base.m_exponent(p)
    return base


@total_ordering
@dataclass(frozen=True)
class ScaledInt:
    """The exact number ``num * b**(-exp)`` in canonical form.

    Canonical means ``exp >= 0`` and ``num`` is not divisible by ``b`` unless
    ``exp == 0``; zero is stored as ``(0, 0)``.
    """

    num: int
    exp: int
    b: int = 2

    def __post_init__(self):
        num, exp, b = int(self.num), int(self.exp), int(self.b)
        if b < 2:
            raise ValueError("radix must be at least 2")
        if exp < 0:
            num, exp = num * b ** (-exp), 0
        if num == 0:
            exp = 0
        while exp > 0 and num % b == 0:
            num //= b
            exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_fraction(cls, x: Rational, b: int) -> "ScaledInt":
        x = Fraction(x)
        den = x.denominator
        exp = 0
        while den % b == 0:
            den //= b
            exp += 1
        if den != 1:
            raise ValueError(f"{x} is not a {b}-adic rational")
        return cls(x.numerator, exp, b)

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.b**self.exp)

    def at_exp(self, e: int) -> int:
        """Numerator over ``b**e`` (``e >= exp``)."""
        if e < self.exp:
            raise ValueError(f"cannot express {self} with exponent {e}")
        return self.num * self.b ** (e - self.exp)

    def __add__(self, other: "ScaledInt") -> "ScaledInt":
        return add(self, other)

    def __mul__(self, other: "ScaledInt") -> "ScaledInt":
        return mul(self, other)

    def __lt__(self, other: "ScaledInt") -> bool:
        return self.value < other.value

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"{self.num}*{self.b}^-{self.exp}"


def _same_radix(x: ScaledInt, y: ScaledInt) -> int:
    if x.b != y.b:
        raise ValueError(f"radix mismatch: {x.b} vs {y.b}")
    return x.b


def add(x: ScaledInt, y: ScaledInt) -> ScaledInt:
    b = _same_radix(x, y)
    e = max(x.exp, y.exp)
    return ScaledInt(x.at_exp(e) + y.at_exp(e), e, b)


def mul(x: ScaledInt, y: ScaledInt) -> ScaledInt:
    b = _same_radix(x, y)
    return ScaledInt(x.num * y.num, x.exp + y.exp, b)


@total_ordering
@dataclass(frozen=True)
class Scale:
    """The length ``radix**(-exp)``; ``radix == 2`` is a dyadic scale."""

    radix: int
    exp: int

    @classmethod
    def dyadic(cls, k: int) -> "Scale":
        return cls(2, k)

    @classmethod
    def madic(cls, base: RadixBase, k: int) -> "Scale":
        return cls(base.m, k)

    @property
    def value(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(1, self.radix**self.exp)
        return Fraction(self.radix ** (-self.exp))

    @property
    def flavor(self) -> str:
        return "dyadic" if self.radix == 2 else f"{self.radix}-adic"

    def __lt__(self, other: "Scale") -> bool:
        return self.value < other.value

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scale):
            return NotImplemented
        return self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def __str__(self) -> str:
        return f"{self.radix}^-{self.exp}"


def floor_to_cell(x: ScaledInt, r: Scale) -> int:
    """Index ``i`` of the half-open cell ``[i*r, (i+1)*r)`` containing ``x``."""
    return (x.value / r.value).__floor__()


def _int_array(values, bound: int) -> np.ndarray:
    if bound < _INT64_SAFE:
        return np.asarray(values, dtype=np.int64)
    return np.asarray(values, dtype=object)


def scale_nums(nums: np.ndarray, mult: int, div: int = 1) -> np.ndarray:
    """Exact ``floor(nums * mult / div)`` elementwise.

    Stays in int64 while every intermediate fits, otherwise switches to
    Python integers held in an object array.
    """
    g = math.gcd(mult, div)
    mult //= g
    div //= g
    if nums.size == 0:
        return nums.copy()
    peak = max(abs(int(nums.max())), abs(int(nums.min())))
    if nums.dtype != object and peak * mult < _INT64_SAFE and div < _INT64_SAFE:
        out = nums * np.int64(mult) if mult != 1 else nums.copy()
        return out // np.int64(div) if div != 1 else out
    out = nums.astype(object)
    if mult != 1:
        out = out * mult
    if div != 1:
        out = out // div
    if peak * mult // div < _INT64_SAFE:
        return out.astype(np.int64)
    return out


def cell_indices(nums: np.ndarray, exp: int, b: int, r: Scale) -> np.ndarray:
    """Cell indices at scale ``r`` of the points ``nums * b**(-exp)``."""
    v = r.value
    return scale_nums(nums, v.denominator, v.numerator * b**exp)


def lcm_denominator(*xs: Fraction) -> int:
    out = 1
    for x in xs:
        out = math.lcm(out, Fraction(x).denominator)
    return out


@total_ordering
@dataclass(frozen=True)
class Surd:
    """The positive real ``coef * radix**exp`` with rational ``coef`` and ``exp``.

    Ratios such as ``count / (R/r)**s`` are of this form; comparisons raise both
    sides to a common integer power so pass/fail logic never rounds.
    """

    coef: Fraction
    radix: int
    exp: Fraction

    def __post_init__(self):
        coef, exp = Fraction(self.coef), Fraction(self.exp)
        if coef < 0:
            raise ValueError("Surd values are non-negative")
        # keep exp in [0, 1) by moving whole powers into the coefficient
        whole = exp.numerator // exp.denominator
        coef *= Fraction(self.radix) ** whole
        exp -= whole
        if coef == 0:
            exp = Fraction(0)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "exp", exp)

    @classmethod
    def of(cls, x: Rational) -> "Surd":
        return cls(Fraction(x), 2, Fraction(0))

    def _power(self, d: int) -> Fraction:
        e = self.exp * d
        assert e.denominator == 1
        return self.coef**d * Fraction(self.radix) ** int(e)

    def _cmp(self, other: "Surd") -> int:
        if self.coef == 0 or other.coef == 0:
            return (self.coef > 0) - (other.coef > 0)
        d = lcm_denominator(self.exp, other.exp)
        a, b = self._power(d), other._power(d)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd.of(other)
        if not isinstance(other, Surd):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd.of(other)
        return self._cmp(other) < 0

    def __hash__(self) -> int:
        return hash((self.coef, self.radix, self.exp))

    def __mul__(self, other) -> "Surd":
        if isinstance(other, (int, Fraction)):
            return Surd(self.coef * other, self.radix, self.exp)
        if other.radix == self.radix:
            return Surd(self.coef * other.coef, self.radix, self.exp + other.exp)
        # fold a radix that is a power of the other into one base
        small, big = sorted((self, other), key=lambda s: s.radix)
        k, power = 1, small.radix
        while power < big.radix:
            k, power = k + 1, power * small.radix
        if power != big.radix:
            raise ValueError("cannot multiply surds with unrelated radices")
        return Surd(self.coef * other.coef, small.radix, small.exp + big.exp * k)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Surd":
        if k < 0:
            return self.reciprocal() ** -k
        return Surd(self.coef**k, self.radix, self.exp * k)

    def reciprocal(self) -> "Surd":
        if self.coef == 0:
            raise ZeroDivisionError("zero has no reciprocal")
        return Surd(1 / self.coef, self.radix, -self.exp)

    def __truediv__(self, other) -> "Surd":
        if isinstance(other, (int, Fraction)):
            other = Surd.of(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Surd":
        return Surd.of(other) * self.reciprocal()

    def decimal(self, digits: int = 12) -> Decimal:
        if self.coef == 0:
            return Decimal(0)
        with localcontext() as ctx:
            ctx.prec = digits + 10
            val = Decimal(self.coef.numerator) / Decimal(self.coef.denominator)
            if self.exp:
                e = Decimal(self.exp.numerator) / Decimal(self.exp.denominator)
                val *= (e * Decimal(self.radix).ln()).exp()
            ctx.prec = digits
            return +val

    def __float__(self) -> float:
        return float(self.coef) * float(self.radix) ** float(self.exp)

    def to_json(self) -> dict:
        return {
            "coef": fraction_str(self.coef),
            "radix": self.radix,
            "exp": fraction_str(self.exp),
            "decimal": str(self.decimal()),
        }

    def __str__(self) -> str:
        coef = str(self.coef)
        if self.exp == 0:
            return coef
        if self.coef == 1:
            return f"{self.radix}^({self.exp})"
        return f"{coef}*{self.radix}^({self.exp})"


def scale_power(r: Scale, s: Rational) -> Surd:
    """``r ** s`` as an exact surd."""
    return Surd(Fraction(1), r.radix, -Fraction(s) * r.exp)
