"""Truncated digit-expansion self-similar sets.

A digit fractal with spacing ``m**(-p)`` and digit set ``D`` is, truncated at
``depth`` levels, the finite set

    { sum_{j < depth} m**(-j) * d_j * m**(-p) : d_j in D }.

Every such point is stored exactly as an integer numerator over a common power
``b**exp`` of the atomic radix (one fixed exponent per set).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDigits, EmptySet, SizeLimit
from .params import ToyConfig
from .radix import (
    RadixBase,
    Rational,
    Scale,
    ScaledInt,
    _int_array,
    as_fraction,
    cell_indices,
    exact_power,
    scale_nums,
)

DEFAULT_SIZE_LIMIT = 1 << 26


def _unique(nums: np.ndarray) -> np.ndarray:
    if nums.ndim == 1:
        return np.unique(nums)
    return np.unique(nums, axis=0)


@dataclass(eq=False)
class DiscreteSet:
    """Sorted, deduplicated exact points ``nums * b**(-exp)``.

    ``nums`` has shape ``(N,)`` for subsets of the line and ``(N, 2)`` for
    subsets of the plane (lexicographically sorted rows). ``resolution`` is the
    finest scale at which covering numbers of the set are meaningful.
    """

    base: RadixBase
    exp: int
    nums: np.ndarray
    resolution: Scale

    def __post_init__(self):
        self.nums = _unique(np.asarray(self.nums))
        if self.exp < 0:
            self.nums = scale_nums(self.nums, self.base.b ** (-self.exp))
            self.exp = 0

    @classmethod
    def from_values(cls, values: Iterable, base: RadixBase, resolution: Scale) -> "DiscreteSet":
        """Build from rationals (1D) or pairs of rationals (2D)."""
        vals = [tuple(as_fraction(c) for c in v) if isinstance(v, tuple) else as_fraction(v) for v in values]
        flat = [c for v in vals for c in (v if isinstance(v, tuple) else (v,))]
        exp = max((ScaledInt.from_fraction(c, base.b).exp for c in flat), default=0)
        scale = base.b**exp
        ints = [[int(c * scale) for c in v] if isinstance(v, tuple) else int(v * scale) for v in vals]
        bound = max((abs(c * scale) for c in flat), default=0)
        return cls(base, exp, _int_array(ints, int(bound) + 1), resolution)

    @property
    def dim(self) -> int:
        return 1 if self.nums.ndim == 1 else self.nums.shape[1]

    def __len__(self) -> int:
        return len(self.nums)

    def __repr__(self) -> str:
        return f"DiscreteSet(dim={self.dim}, size={len(self)}, b={self.base.b}, exp={self.exp}, resolution={self.resolution})"

    def at_exp(self, e: int) -> np.ndarray:
        """Numerators over ``b**e`` for ``e >= exp``."""
        if e < self.exp:
            raise ValueError(f"exponent {e} is coarser than the set's {self.exp}")
        return scale_nums(self.nums, self.base.b ** (e - self.exp))

    def values(self) -> list:
        den = self.base.b**self.exp
        if self.dim == 1:
            return [Fraction(int(v), den) for v in self.nums]
        return [tuple(Fraction(int(c), den) for c in row) for row in self.nums]

    def points(self) -> list[ScaledInt]:
        if self.dim != 1:
            raise ValueError("points() is for subsets of the line")
        return [ScaledInt(int(v), self.exp, self.base.b) for v in self.nums]

    def cells(self, r: Scale) -> np.ndarray:
        """Distinct half-open cells of side ``r`` that meet the set."""
        return _unique(cell_indices(self.nums, self.exp, self.base.b, r))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteSet):
            return NotImplemented
        if len(self) != len(other) or self.base.b != other.base.b:
            return False
        e = max(self.exp, other.exp)
        return bool(np.array_equal(self.at_exp(e), other.at_exp(e)))

    def issubset(self, other: "DiscreteSet") -> bool:
        e = max(self.exp, other.exp)
        mine, theirs = self.at_exp(e), other.at_exp(e)
        if self.dim == 1:
            return bool(np.isin(mine, theirs).all())
        theirs_rows = {tuple(int(c) for c in row) for row in theirs}
        return all(tuple(int(c) for c in row) in theirs_rows for row in mine)

    def max_value(self) -> Fraction:
        if len(self) == 0:
            raise EmptySet("empty set has no maximum")
        return Fraction(int(self.nums.max()), self.base.b**self.exp)


@dataclass(frozen=True)
class DigitFractal:
    """Digit-expansion fractal with spacing ``m**(-spacing)``."""

    base: RadixBase
    spacing: Fraction
    digits: tuple
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "spacing", as_fraction(self.spacing))
        digits = tuple(int(d) for d in self.digits)
        object.__setattr__(self, "digits", digits)
        limit = self.base.m_power(self.spacing)
        if len(set(digits)) != len(digits):
            raise BadDigits(f"repeated digits in {digits}")
        if any(not 0 <= d < limit for d in digits):
            raise BadDigits(f"digits must lie in [0, {limit}), got {digits}")
        if not digits:
            raise BadDigits("a digit fractal needs at least one digit")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    @property
    def exp(self) -> int:
        """Exponent of ``b`` carried by the finest digit position."""
        return self.base.q * (self.depth - 1) + self.base.m_exponent(self.spacing)

    @property
    def size(self) -> int:
        return len(self.digits) ** self.depth


def build_digit_fractal(f: DigitFractal, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """All truncated expansions of ``f``, in exact arithmetic.

    The numerator of ``sum_j m**(-j) d_j m**(-spacing)`` over ``b**f.exp`` is
    the base-``m`` integer with digits ``d_0 d_1 ... d_{depth-1}``, so the set
    is enumerated in odometer order by repeated ``x -> m*x + d``.
    """
    if f.size > size_limit:
        raise SizeLimit(f"{len(f.digits)}**{f.depth} = {f.size} points exceeds limit {size_limit}")
    m = f.base.m
    digits = _int_array(f.digits, m ** f.depth)
    nums = digits.copy()
    for _ in range(f.depth - 1):
        nums = (nums[:, None] * m + digits[None, :]).ravel()
    return DiscreteSet(f.base, f.exp, nums, Scale.madic(f.base, f.depth))


def fractal_A(cfg: ToyConfig) -> DigitFractal:
    return DigitFractal(cfg.base, cfg.spacing_A, tuple(range(cfg.digitsA)), cfg.n)


def fractal_B(cfg: ToyConfig) -> DigitFractal:
    return DigitFractal(cfg.base, cfg.spacing_B, tuple(range(cfg.digitsB)), cfg.n)


def fractal_Theta(cfg: ToyConfig) -> DigitFractal:
    return DigitFractal(cfg.base, cfg.spacing_Theta, tuple(range(cfg.digitsTheta)), cfg.n)


def build_A(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """Expansions ``sum rho**j k_j rho**((1+tau)/2)`` with ``0 <= k_j < m**((1+tau)/2)``."""
    return build_digit_fractal(fractal_A(cfg), size_limit)


def build_B(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """Expansions ``sum rho**j l_j rho**((1-tau)/2)`` with ``0 <= l_j < m**((1-tau)/2)``."""
    return build_digit_fractal(fractal_B(cfg), size_limit)


def build_Theta(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """Expansions ``sum rho**j r_j rho**tau`` with ``0 <= r_j < m**tau``."""
    return build_digit_fractal(fractal_Theta(cfg), size_limit)


def corollary_fractal(m: int, s: Rational, digit_choice: Sequence[int], depth: int) -> DigitFractal:
    s = as_fraction(s)
    count = exact_power(m, s)
    if count is None:
        raise BadDigits(f"m**s = {m}**{s} is not an integer")
    digits = [int(d) for d in digit_choice]
    if len(digits) != count:
        raise BadDigits(f"need exactly m**s = {count} digits, got {len(digits)}")
    if len(set(digits)) != len(digits):
        raise BadDigits(f"digits must be distinct, got {digits}")
    if any(not 0 <= d < m for d in digits):
        raise BadDigits(f"digits must lie in 0..{m - 1}, got {digits}")
    return DigitFractal(RadixBase.for_modulus(m), Fraction(1), tuple(sorted(digits)), depth)


def build_corollary_set(
    m: int, s: Rational, digit_choice: Sequence[int], depth: int, size_limit: int = DEFAULT_SIZE_LIMIT
) -> DiscreteSet:
    """Self-similar set of the maps ``x -> x/m + k_j/m`` for ``m**s`` distinct ``k_j``."""
    return build_digit_fractal(corollary_fractal(m, s, digit_choice, depth), size_limit)


def full_grid(base: RadixBase, exp: int) -> DiscreteSet:
    """All multiples ``k * b**(-exp)`` in ``[0, 1)``."""
    n = base.b**exp
    return DiscreteSet(base, exp, np.arange(n, dtype=np.int64), Scale(base.b, exp))


# Binary cache format, little-endian:
#   magic b"FPDS", then uint32 fields b, q, resolution radix, resolution exp,
#   point exp, dim, followed by uint64 count; then dim*count numerators, each a
#   uint32 byte length and that many bytes of a signed little-endian integer.
_MAGIC = b"FPDS"
_HEADER = struct.Struct("<4sIIIIIIQ")


def dump_set(S: DiscreteSet, path) -> None:
    flat = S.nums.ravel()
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, S.base.b, S.base.q, S.resolution.radix, S.resolution.exp, S.exp, S.dim, len(S)))
        for v in flat:
            v = int(v)
            raw = v.to_bytes((v.bit_length() + 8) // 8, "little", signed=True)
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


def load_set(path) -> DiscreteSet:
    with open(Path(path), "rb") as fh:
        magic, b, q, rradix, rexp, exp, dim, count = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError(f"{path} is not a DiscreteSet dump")
        vals = []
        for _ in range(dim * count):
            (length,) = struct.unpack("<I", fh.read(4))
            vals.append(int.from_bytes(fh.read(length), "little", signed=True))
    bound = max((abs(v) for v in vals), default=0)
    nums = _int_array(vals, bound + 1)
    if dim > 1:
        nums = nums.reshape(count, dim)
    return DiscreteSet(RadixBase(b, q), exp, nums, Scale(rradix, rexp))
