"""Uniformity and two-scale regularity of finite sets.

A set ``P`` is ``(s, C)``-regular between scales ``delta`` and ``Delta`` when

    C**-1 (R/r)**s <= |P cap Q|_r <= C (R/r)**s

for all grid scales ``delta <= r <= R <= Delta`` and every grid cell ``Q`` of
side ``R`` meeting ``P``. :func:`regularity_constant` returns the smallest such
``C`` by scanning every pair of scales and every cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotUniform, ScaleTooFine
from .fractal import DiscreteSet
from .radix import Rational, Scale, Surd, as_fraction, exact_power, fraction_str


def _unique_counts(cells: np.ndarray):
    if cells.ndim == 1:
        return np.unique(cells, return_counts=True)
    return np.unique(cells, axis=0, return_counts=True)


def _cell_str(c) -> str:
    return str(int(c)) if np.ndim(c) == 0 else str(tuple(int(v) for v in c))


@dataclass
class UniformityReport:
    scales: list
    branching: list
    witness: dict | None = None

    @property
    def uniform(self) -> bool:
        return self.witness is None

    def to_json(self) -> dict:
        return {
            "uniform": self.uniform,
            "scales": [str(s) for s in self.scales],
            "branching": self.branching,
            "witness": self.witness,
        }


def uniformity_check(S: DiscreteSet, levels: int) -> UniformityReport:
    """Child counts of m-adic cells at levels ``j = 0..levels``.

    Level ``j`` compares every cell of side ``m**-j`` meeting ``S`` by the number
    of its children of side ``m**-(j+1)`` meeting ``S``. The first level with two
    different counts ends the scan and is reported as the witness. A set built
    from ``n`` digit positions is checked with ``levels = n - 1``.
    """
    if levels < 0:
        raise ValueError("levels must be non-negative")
    m = S.base.m
    scales = [Scale(m, j) for j in range(levels + 2)]
    branching = []
    for j in range(levels + 1):
        children = S.cells(scales[j + 1])
        parents, counts = _unique_counts(children // m)
        if counts.min() != counts.max():
            first = int(np.flatnonzero(counts != counts[0])[0])
            witness = {
                "level": j,
                "cell_a": _cell_str(parents[0]),
                "children_a": int(counts[0]),
                "cell_b": _cell_str(parents[first]),
                "children_b": int(counts[first]),
            }
            return UniformityReport(scales, branching, witness)
        branching.append(int(counts[0]))
    return UniformityReport(scales, branching)


@dataclass
class RegularityReport:
    s: Fraction
    delta: Fraction
    Delta: Fraction
    grid: int
    C_min: Surd
    worst_upper: dict = field(default_factory=dict)
    worst_lower: dict = field(default_factory=dict)
    pairs_tested: int = 0
    cubes_tested: int = 0

    def to_json(self) -> dict:
        return {
            "s": fraction_str(self.s),
            "delta": fraction_str(self.delta),
            "Delta": fraction_str(self.Delta),
            "grid": "dyadic" if self.grid == 2 else f"{self.grid}-adic",
            "C_min": self.C_min.to_json(),
            "worst_upper": self.worst_upper,
            "worst_lower": self.worst_lower,
            "pairs_tested": self.pairs_tested,
            "cubes_tested": self.cubes_tested,
        }


def grid_scales(radix: int, lo: Fraction, hi: Fraction) -> list[int]:
    """Exponents ``k >= 0`` with ``lo <= radix**-k <= hi``, coarsest first."""
    ks, k = [], 0
    while Fraction(1, radix**k) >= lo:
        if Fraction(1, radix**k) <= hi:
            ks.append(k)
        k += 1
    return ks


def _grid_radix(S: DiscreteSet, grid) -> int:
    if grid in ("dyadic", 2):
        return 2
    if grid in ("m-adic", "madic", S.base.m):
        return S.base.m
    if isinstance(grid, int) and grid >= 2:
        return grid
    raise ValueError(f"unknown grid {grid!r}")


def regularity_constant(S: DiscreteSet, s: Rational, delta, Delta, grid="dyadic") -> RegularityReport:
    """Smallest ``C`` for which ``S`` is ``(s, C)``-regular between ``delta`` and ``Delta``.

    ``delta`` and ``Delta`` may be Scales or rationals; every grid scale between
    them is used. The ratio ``(R/r)**s`` stays symbolic and is compared through
    integer powers, so the returned constant is exact.
    """
    s = as_fraction(s)
    lo = delta.value if isinstance(delta, Scale) else as_fraction(delta)
    hi = Delta.value if isinstance(Delta, Scale) else as_fraction(Delta)
    if lo < S.resolution.value:
        raise ScaleTooFine(f"delta={lo} is finer than the set resolution {S.resolution}")
    radix = _grid_radix(S, grid)
    ks = grid_scales(radix, lo, hi)
    cells = {k: S.cells(Scale(radix, k)) for k in ks}

    best = Surd.of(1)
    worst_upper: dict = {}
    worst_lower: dict = {}
    pairs = cubes = 0
    for i, kR in enumerate(ks):
        for kr in ks[i:]:
            parents, counts = _unique_counts(cells[kr] // radix ** (kr - kR))
            pairs += 1
            cubes += len(counts)
            gap = kr - kR
            top, bottom = int(np.argmax(counts)), int(np.argmin(counts))
            upper = Surd(Fraction(int(counts[top])), radix, -gap * s)
            lower = Surd(Fraction(1, int(counts[bottom])), radix, gap * s)
            record = {"r": f"{radix}^-{kr}", "R": f"{radix}^-{kR}"}
            if not worst_upper or upper > worst_upper["_ratio"]:
                worst_upper = {**record, "Q": _cell_str(parents[top]), "count": int(counts[top]), "_ratio": upper}
            if not worst_lower or lower > worst_lower["_ratio"]:
                worst_lower = {**record, "Q": _cell_str(parents[bottom]), "count": int(counts[bottom]), "_ratio": lower}
            best = max(best, upper, lower)

    def clean(w: dict) -> dict:
        return {k: (v.to_json() if k == "_ratio" else v) for k, v in w.items()} if w else {}

    out_upper, out_lower = clean(worst_upper), clean(worst_lower)
    for w in (out_upper, out_lower):
        if "_ratio" in w:
            w["ratio"] = w.pop("_ratio")
    return RegularityReport(s, lo, hi, radix, best, out_upper, out_lower, pairs, cubes)


def verify_lemma27(S: DiscreteSet, s: Rational, m: int, n: int, slack: Rational = 8, grid="dyadic"):
    """Check ``C_min <= slack * m**(3 s)`` for a uniform set with branching ``m**s``.

    Returns ``(passed, report)``. Raises :class:`NotUniform` when the set does
    not branch exactly ``m**s`` times at each of its ``n`` levels.
    """
    s = as_fraction(s)
    want = exact_power(m, s)
    if want is None:
        raise NotUniform(f"m**s = {m}**{s} is not an integer")
    u = uniformity_check(S, n - 1)
    if not u.uniform or any(N != want for N in u.branching):
        raise NotUniform(f"expected branching {want} at every level, got {u.to_json()}")
    report = regularity_constant(S, s, Fraction(1, m**n), Fraction(1), grid)
    bound = Surd(as_fraction(slack), m, 3 * s)
    return report.C_min <= bound, report
