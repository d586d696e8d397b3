"""Cube counting and the sumset machinery.

Covering numbers are counts of half-open grid cells ``[i r, (i+1) r)`` meeting
a set. The sumset ``A + Theta B`` is compared with the set ``H`` of ``n+1``
digit expansions whose digits may run up to ``2 n m**((1+tau)/2)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BadDigits, EmptySet, ScaleTooFine, SizeLimit
from .fractal import DEFAULT_SIZE_LIMIT, DiscreteSet, build_A, build_B, build_Theta
from .params import ToyConfig
from .radix import Rational, Scale, ScaledInt, Surd, _INT64_SAFE, as_fraction, fraction_str, scale_nums


@dataclass
class CoverReport:
    scale: Scale
    count: int
    grid: str
    bound_target: Surd | None = None
    ratio: Surd | None = None
    label: str = ""

    @property
    def within_target(self) -> bool | None:
        if self.ratio is None:
            return None
        return self.ratio <= 1

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "scale": str(self.scale),
            "grid": self.grid,
            "count": self.count,
            "bound_target": None if self.bound_target is None else self.bound_target.to_json(),
            "ratio": None if self.ratio is None else self.ratio.to_json(),
            "within_target": self.within_target,
        }


@dataclass
class InclusionReport:
    max_distance: Fraction
    budget: Fraction | None = None
    witnesses: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool | None:
        if self.budget is None:
            return None
        return self.max_distance <= self.budget

    def to_json(self) -> dict:
        return {
            "max_distance": fraction_str(self.max_distance),
            "budget": None if self.budget is None else fraction_str(self.budget),
            "within_budget": self.within_budget,
            "witnesses": [[fraction_str(x), fraction_str(h)] for x, h in self.witnesses],
        }


def cover_count(S: DiscreteSet, r: Scale) -> int:
    """Number of cells of side ``r`` meeting ``S``."""
    if r.value < S.resolution.value:
        raise ScaleTooFine(f"scale {r} is finer than the set resolution {S.resolution}")
    return len(S.cells(r))


def madic_cover_count(S: DiscreteSet, r: Scale) -> int:
    if r.radix != S.base.m:
        raise ValueError(f"{r} is not an m-adic scale for m={S.base.m}")
    return cover_count(S, r)


def dyadic_cover_count(S: DiscreteSet, r: Scale) -> int:
    if r.radix != 2:
        raise ValueError(f"{r} is not a dyadic scale")
    return cover_count(S, r)


def covering_target(delta: Scale, t: Rational) -> Surd:
    """``delta ** (-(1+t)/2)``."""
    t = as_fraction(t)
    return Surd(Fraction(1), delta.radix, delta.exp * (1 + t) / 2)


def cover_report(S: DiscreteSet, r: Scale, t: Rational | None = None, label: str = "") -> CoverReport:
    count = cover_count(S, r)
    target = ratio = None
    if t is not None:
        target = covering_target(r, t)
        ratio = count / target
    return CoverReport(r, count, r.flavor, target, ratio, label)


def _outer_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.size == 0 or y.size == 0:
        return np.zeros(0, dtype=np.int64)
    peak = abs(int(x.max())) + abs(int(y.max()))
    if x.dtype == object or y.dtype == object or peak >= _INT64_SAFE:
        x, y = x.astype(object), y.astype(object)
    return np.add.outer(x, y).ravel()


def _outer_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.size == 0 or y.size == 0:
        return np.zeros(0, dtype=np.int64)
    peak = abs(int(x.max())) * abs(int(y.max()))
    if x.dtype == object or y.dtype == object or peak >= _INT64_SAFE:
        x, y = x.astype(object), y.astype(object)
    return np.multiply.outer(x, y).ravel()


def _check_size(n: int, size_limit: int, what: str) -> None:
    if n > size_limit:
        raise SizeLimit(f"{what}: {n} candidate points exceeds limit {size_limit}")


def sumset(A: DiscreteSet, theta: ScaledInt, B: DiscreteSet, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """The exact set ``{a + theta * b}``."""
    if A.base.b != B.base.b or theta.b != A.base.b:
        raise ValueError("sumset operands must share the atomic radix")
    _check_size(len(A) * len(B), size_limit, "sumset")
    e = max(A.exp, theta.exp + B.exp)
    tb = scale_nums(B.nums, theta.num * A.base.b ** (e - theta.exp - B.exp))
    nums = _outer_add(A.at_exp(e), tb)
    res = max(A.resolution, B.resolution)
    return DiscreteSet(A.base, e, nums, res)


def product_set(Theta: DiscreteSet, B: DiscreteSet, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """The exact set ``{theta * b}``."""
    _check_size(len(Theta) * len(B), size_limit, "product set")
    return DiscreteSet(B.base, Theta.exp + B.exp, _outer_mul(Theta.nums, B.nums), max(Theta.resolution, B.resolution))


def union_sumset(
    A: DiscreteSet,
    Theta: DiscreteSet,
    B: DiscreteSet,
    size_limit: int = DEFAULT_SIZE_LIMIT,
    workers: int = 1,
) -> DiscreteSet:
    """``A + Theta B``, the union over ``theta in Theta`` of ``A + theta B``.

    The products ``theta * b`` are deduplicated before the outer sum with
    ``A``. With ``workers > 1`` the angles are split into contiguous chunks
    evaluated in threads; the merge is a sort, so the result does not depend
    on the split.
    """
    if len(A) == 0 or len(Theta) == 0 or len(B) == 0:
        raise EmptySet("union_sumset needs nonempty A, Theta and B")
    chunks = np.array_split(Theta.nums, max(1, min(workers, len(Theta))))

    def part(chunk: np.ndarray) -> DiscreteSet:
        T = DiscreteSet(Theta.base, Theta.exp, chunk, Theta.resolution)
        P = product_set(T, B, size_limit)
        _check_size(len(A) * len(P), size_limit, "union sumset")
        e = max(A.exp, P.exp)
        return DiscreteSet(A.base, e, _outer_add(A.at_exp(e), P.at_exp(e)), max(A.resolution, P.resolution))

    if len(chunks) == 1:
        return part(chunks[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(part, chunks))
    e = max(p.exp for p in parts)
    merged = np.concatenate([p.at_exp(e) for p in parts])
    _check_size(len(merged), size_limit, "union sumset merge")
    return DiscreteSet(A.base, e, merged, parts[0].resolution)


def h_digit_bound(cfg: ToyConfig, factor: int) -> int:
    return factor * cfg.n * cfg.digitsA


def _build_expansions(cfg: ToyConfig, factor: int, size_limit: int) -> DiscreteSet:
    # numerator over b**exp is sum_k s_k m**(n-k): a Minkowski sum of scaled ranges
    top = h_digit_bound(cfg, factor)
    m = cfg.m
    digits = np.arange(top + 1, dtype=np.int64)
    nums = digits.copy()
    for _ in range(cfg.n):
        _check_size(len(nums) * len(digits), size_limit, "H construction")
        nums = np.unique(_outer_add(scale_nums(nums, m), digits))
    exp = cfg.base.q * cfg.n + cfg.base.m_exponent(cfg.spacing_A)
    return DiscreteSet(cfg.base, exp, nums, cfg.delta)


def build_H(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """``{sum_{k=0}^{n} rho**k s_k rho**((1+tau)/2) : 0 <= s_k <= 2 n m**((1+tau)/2)}``."""
    return _build_expansions(cfg, 2, size_limit)


def build_Hprime(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """As :func:`build_H` with digits up to ``n m**((1+tau)/2)``."""
    return _build_expansions(cfg, 1, size_limit)


def h_display_bound(cfg: ToyConfig) -> int:
    """The cardinality bound ``(2 n m**((1+tau)/2))**n``; it ignores the extra digit position."""
    return h_digit_bound(cfg, 2) ** cfg.n


def h_raw_tuples(cfg: ToyConfig, factor: int = 2) -> int:
    return (h_digit_bound(cfg, factor) + 1) ** (cfg.n + 1)


def inclusion_distance(X: DiscreteSet, H: DiscreteSet, budget: Rational | None = None, n_witnesses: int = 5) -> InclusionReport:
    """``max_{x in X} min_{h in H} |x - h|`` by binary search in sorted ``H``."""
    if len(X) == 0 or len(H) == 0:
        raise EmptySet("inclusion_distance needs nonempty sets")
    if X.dim != 1 or H.dim != 1:
        raise ValueError("inclusion_distance works on subsets of the line")
    e = max(X.exp, H.exp)
    xs, hs = X.at_exp(e), H.at_exp(e)
    idx = np.searchsorted(hs, xs)
    right = hs[np.minimum(idx, len(hs) - 1)]
    left = hs[np.maximum(idx - 1, 0)]
    d_right = np.abs(right - xs)
    d_left = np.abs(xs - left)
    use_left = d_left <= d_right
    dist = np.where(use_left, d_left, d_right)
    nearest = np.where(use_left, left, right)
    worst = int(dist.max())
    den = X.base.b**e
    where = np.flatnonzero(dist == worst)[:n_witnesses]
    witnesses = [(Fraction(int(xs[i]), den), Fraction(int(nearest[i]), den)) for i in where]
    return InclusionReport(
        Fraction(worst, den), None if budget is None else as_fraction(budget), witnesses
    )


def neighborhood_cell_count(H: DiscreteSet, radius: Rational, r: Scale) -> int:
    """Number of cells of side ``r`` meeting the closed neighbourhood ``[H]_radius``."""
    if len(H) == 0:
        raise EmptySet("empty set has no neighbourhood")
    radius = as_fraction(radius)
    # put radius on the set's grid: b**e must clear its denominator
    e = H.exp
    while (radius * H.base.b**e).denominator != 1:
        e += 1
    rad = int(radius * H.base.b**e)
    hs = H.at_exp(e)
    v = r.value
    lo = scale_nums(hs - rad, v.denominator, v.numerator * H.base.b**e)
    hi = scale_nums(hs + rad, v.denominator, v.numerator * H.base.b**e)
    lo, hi = lo.astype(np.int64), hi.astype(np.int64)
    prev = np.concatenate([[lo[0] - 1], np.maximum.accumulate(hi)[:-1]])
    fresh = hi - np.maximum(lo - 1, prev)
    return int(np.clip(fresh, 0, None).sum())


def remainder(theta_digits: Sequence[int], b_digits: Sequence[int], cfg: ToyConfig) -> Fraction:
    """``R_n = sum_{k=n+1}^{2n} rho**k sum_{i+j=k} r_i l_j rho**((1+tau)/2)``.

    ``theta_digits`` are the ``n+1`` digits ``r_0..r_n`` of ``theta`` and
    ``b_digits`` the ``n+1`` digits ``l_0..l_n`` of ``b``.
    """
    n = cfg.n
    r, l = [int(d) for d in theta_digits], [int(d) for d in b_digits]
    if len(r) != n + 1 or len(l) != n + 1:
        raise BadDigits(f"need {n + 1} digits each, got {len(r)} and {len(l)}")
    if any(not 0 <= d < cfg.digitsTheta for d in r) or any(not 0 <= d < cfg.digitsB for d in l):
        raise BadDigits("digit out of range")
    rho = cfg.rho
    unit = Fraction(1, cfg.base.m_power(cfg.spacing_A))
    total = Fraction(0)
    for k in range(n + 1, 2 * n + 1):
        inner = sum(r[i] * l[k - i] for i in range(k - n, n + 1))
        total += rho**k * inner * unit
    return total


def remainder_envelope(cfg: ToyConfig) -> Fraction:
    """``sum_{k=n+1}^{2n} rho**k * 2n``."""
    n = cfg.n
    return sum((cfg.rho**k * 2 * n for k in range(n + 1, 2 * n + 1)), Fraction(0))


@dataclass
class SumsetBoundRow:
    n: int
    cover: CoverReport
    h_size: int
    h_display_bound: int
    h_neighborhood_cells: int

    @property
    def chain_holds(self) -> bool:
        return self.cover.count <= self.h_neighborhood_cells <= 9 * self.h_size

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "cover_count": self.cover.count,
            "target_decimal": str(self.cover.bound_target.decimal()),
            "ratio_decimal": str(self.cover.ratio.decimal()),
            "h_size": self.h_size,
            "h_display_bound": self.h_display_bound,
            "h_neighborhood_cells": self.h_neighborhood_cells,
            "nine_h": 9 * self.h_size,
            "chain_holds": self.chain_holds,
        }


def sumset_bound(cfg: ToyConfig, budget_factor: Rational = 4, size_limit: int = DEFAULT_SIZE_LIMIT, workers: int = 1) -> SumsetBoundRow:
    """``N_delta(A + Theta B) <= #cells meeting [H]_{4 delta} <= 9 |H|`` at one depth."""
    A, B, T = build_A(cfg, size_limit), build_B(cfg, size_limit), build_Theta(cfg, size_limit)
    S = union_sumset(A, T, B, size_limit, workers)
    H = build_H(cfg, size_limit)
    report = cover_report(S, cfg.delta, cfg.t, label="A+Theta*B")
    cells = neighborhood_cell_count(H, as_fraction(budget_factor) * cfg.delta.value, cfg.delta)
    return SumsetBoundRow(cfg.n, report, len(H), h_display_bound(cfg), cells)


def sumset_trend(cfg: ToyConfig, n_max: int, **kw) -> list[SumsetBoundRow]:
    return [sumset_bound(cfg.with_depth(n), **kw) for n in range(1, n_max + 1)]
