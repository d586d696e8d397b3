"""Discrete measures on grid cells and their ball-ratio constants.

A :class:`DiscreteMeasure` puts the mass ``weights[i] / total`` on the cell
``cells[i]`` of side ``resolution``, spread evenly across the cell. Balls are
closed sup-norm balls centred at cell centres with radii ``r = w * resolution``
on the ``b``-adic grid. Such a ball contains the cells at index distance below
``w`` and half of each cell at distance exactly ``w`` (per axis), so its mass is
the average of the cell windows of half-widths ``w - 1`` and ``w``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptySet, SizeLimit, ZeroMass
from .fractal import DEFAULT_SIZE_LIMIT, DigitFractal, DiscreteSet, build_digit_fractal
from .params import ToyConfig
from .radix import RadixBase, Rational, Scale, Surd, as_fraction, cell_indices, fraction_str
from .regularity import _unique_counts


@dataclass(eq=False)
class DiscreteMeasure:
    base: RadixBase
    resolution: Scale
    cells: np.ndarray
    weights: np.ndarray
    total: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        cells = np.asarray(self.cells)
        weights = np.asarray(self.weights, dtype=np.int64)
        if len(cells) != len(weights):
            raise ValueError("cells and weights differ in length")
        if cells.ndim == 1:
            order = np.argsort(cells, kind="stable")
        else:
            order = np.lexsort(cells.T[::-1])
        self.cells, self.weights = cells[order], weights[order]

    @classmethod
    def from_points(cls, S: DiscreteSet, resolution: Scale | None = None) -> "DiscreteMeasure":
        """Equal mass on every point of ``S``, aggregated per cell."""
        if len(S) == 0:
            raise EmptySet("cannot put a probability measure on an empty set")
        resolution = resolution or S.resolution
        cells, counts = _unique_counts(cell_indices(S.nums, S.exp, S.base.b, resolution))
        return cls(S.base, resolution, cells, counts, len(S))

    @property
    def dim(self) -> int:
        return 1 if self.cells.ndim == 1 else self.cells.shape[1]

    @property
    def masses(self) -> dict:
        key = (lambda c: int(c)) if self.dim == 1 else (lambda c: tuple(int(v) for v in c))
        return {key(c): Fraction(int(w), self.total) for c, w in zip(self.cells, self.weights)}

    def total_mass(self) -> Fraction:
        return Fraction(int(self.weights.sum()), self.total)

    def mass_of_cells(self, r: Scale) -> dict:
        """Mass of every cell of side ``r`` (coarser than the resolution)."""
        ratio = r.value / self.resolution.value
        if ratio.denominator != 1:
            raise ValueError(f"{r} is not a multiple of the resolution {self.resolution}")
        parents = self.cells // int(ratio)
        keys, inverse = (np.unique(parents, return_inverse=True) if self.dim == 1
                         else np.unique(parents, axis=0, return_inverse=True))
        sums = np.zeros(len(keys), dtype=np.int64)
        np.add.at(sums, inverse.ravel(), self.weights)
        key = (lambda c: int(c)) if self.dim == 1 else (lambda c: tuple(int(v) for v in c))
        return {key(k): Fraction(int(w), self.total) for k, w in zip(keys, sums)}

    def to_json(self) -> dict:
        return {
            "b": self.base.b,
            "q": self.base.q,
            "resolution": {"radix": self.resolution.radix, "exp": self.resolution.exp},
            "masses": [
                [int(c) if self.dim == 1 else [int(v) for v in c], fraction_str(Fraction(int(w), self.total))]
                for c, w in zip(self.cells, self.weights)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteMeasure":
        masses = [(c, Fraction(v)) for c, v in data["masses"]]
        total = 1
        for _, v in masses:
            total = total * v.denominator // np.gcd(total, v.denominator)
        cells = np.array([c for c, _ in masses], dtype=np.int64)
        weights = [int(v * total) for _, v in masses]
        res = Scale(data["resolution"]["radix"], data["resolution"]["exp"])
        return cls(RadixBase(data["b"], data["q"]), res, cells, weights, int(total))


def build_prop23_measure(P: DiscreteSet, delta: Scale, s: Rational | None = None) -> DiscreteMeasure:
    """Mass ``1 / |P|_delta`` on each ``delta``-cell meeting ``P``.

    Every coarser cell ``Q`` then carries ``|P cap Q|_delta / |P|_delta``. ``s``
    is only range-checked: the flat discrete construction does not depend on it.
    """
    if len(P) == 0:
        raise EmptySet("cannot build a measure on an empty set")
    if s is not None and not 0 <= as_fraction(s) <= P.dim:
        raise ValueError(f"s must lie in [0, {P.dim}]")
    cells = P.cells(delta)
    return DiscreteMeasure(P.base, delta, cells, np.ones(len(cells), dtype=np.int64), len(cells))


def equal_weight_ssm(f: DigitFractal, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteMeasure:
    """Mass ``|digits|**-depth`` on each leaf of the truncated fractal."""
    return DiscreteMeasure.from_points(build_digit_fractal(f, size_limit))


def _radii(mu: DiscreteMeasure, r_min, r_max) -> list[tuple[Scale, int]]:
    lo = r_min.value if isinstance(r_min, Scale) else as_fraction(r_min)
    hi = r_max.value if isinstance(r_max, Scale) else as_fraction(r_max)
    if lo < mu.resolution.value:
        raise ValueError(f"r_min={lo} is finer than the resolution {mu.resolution}")
    b = mu.base.b
    out, k = [], 0
    while Fraction(1, b**k) >= lo:
        r = Scale(b, k)
        if r.value <= hi:
            w = r.value / mu.resolution.value
            if w.denominator != 1:
                raise ValueError(f"radius {r} is not a multiple of the resolution")
            out.append((r, int(w)))
        k += 1
    return out[::-1]


def _window_sums_1d(cells: np.ndarray, weights: np.ndarray, centers: np.ndarray, w: int) -> np.ndarray:
    cum = np.concatenate([[0], np.cumsum(weights)])
    hi = np.searchsorted(cells, centers + w, side="right")
    lo = np.searchsorted(cells, centers - w, side="left")
    return cum[hi] - cum[lo]


class _SummedArea:
    """Inclusive rectangle sums over the bounding box of a 2D cell set."""

    def __init__(self, cells: np.ndarray, weights: np.ndarray, size_limit: int):
        self.lo = cells.min(axis=0)
        self.hi = cells.max(axis=0)
        shape = tuple(int(v) for v in self.hi - self.lo + 1)
        if shape[0] * shape[1] > size_limit:
            raise SizeLimit(f"bounding box {shape} too large for a summed-area table")
        dense = np.zeros(shape, dtype=np.int64)
        np.add.at(dense, (cells[:, 0] - self.lo[0], cells[:, 1] - self.lo[1]), weights)
        self.table = np.zeros((shape[0] + 1, shape[1] + 1), dtype=np.int64)
        self.table[1:, 1:] = dense.cumsum(0).cumsum(1)

    def window(self, centers: np.ndarray, wx: int, wy: int) -> np.ndarray:
        nx, ny = self.table.shape[0] - 1, self.table.shape[1] - 1
        x0 = np.clip(centers[:, 0] - wx - self.lo[0], 0, nx)
        y0 = np.clip(centers[:, 1] - wy - self.lo[1], 0, ny)
        x1 = np.clip(centers[:, 0] + wx - self.lo[0] + 1, 0, nx)
        y1 = np.clip(centers[:, 1] + wy - self.lo[1] + 1, 0, ny)
        x1, y1 = np.maximum(x1, x0), np.maximum(y1, y0)
        t = self.table
        return t[x1, y1] - t[x0, y1] - t[x1, y0] + t[x0, y0]


def _ball_masses(mu: DiscreteMeasure, centers: np.ndarray, radii, size_limit: int):
    """Yield ``(r, w, sums, scale)`` with ball masses ``sums / (scale * mu.total)``."""
    if mu.dim == 1:
        for r, w in radii:
            inner = _window_sums_1d(mu.cells, mu.weights, centers, w - 1)
            outer = _window_sums_1d(mu.cells, mu.weights, centers, w)
            yield r, w, inner + outer, 2
    else:
        sat = _SummedArea(mu.cells, mu.weights, size_limit)
        for r, w in radii:
            sums = sum(sat.window(centers, a, c) for a in (w - 1, w) for c in (w - 1, w))
            yield r, w, sums, 4


def _center(mu: DiscreteMeasure, c) -> str:
    half = mu.resolution.value / 2
    if np.ndim(c) == 0:
        return fraction_str(int(c) * mu.resolution.value + half)
    return str(tuple(fraction_str(int(v) * mu.resolution.value + half) for v in c))


@dataclass
class BallReport:
    s: Fraction
    constant: Surd
    witness: dict
    per_radius: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "s": fraction_str(self.s),
            "constant": self.constant.to_json(),
            "witness": self.witness,
            "per_radius": [
                {"r": str(r), "upper": u.to_json(), "lower": l.to_json()} for r, u, l in self.per_radius
            ],
        }


def ahlfors_constant(mu: DiscreteMeasure, s: Rational, r_min, r_max, size_limit: int = DEFAULT_SIZE_LIMIT) -> BallReport:
    """``max over x in spt mu, r of max(mu(B(x,r)) / r**s, r**s / mu(B(x,r)))``."""
    if len(mu.cells) == 0:
        raise EmptySet("measure has empty support")
    s = as_fraction(s)
    b = mu.base.b
    best, witness, rows = None, {}, []
    for r, w, sums, scale in _ball_masses(mu, mu.cells, _radii(mu, r_min, r_max), size_limit):
        top, bottom = int(np.argmax(sums)), int(np.argmin(sums))
        den = scale * mu.total
        upper = Surd(Fraction(int(sums[top]), den), b, r.exp * s)
        lower = Surd(Fraction(den, int(sums[bottom])), b, -r.exp * s)
        rows.append((r, upper, lower))
        for side, ratio, i in (("upper", upper, top), ("lower", lower, bottom)):
            if best is None or ratio > best:
                best = ratio
                witness = {
                    "side": side,
                    "center": _center(mu, mu.cells[i]),
                    "r": str(r),
                    "mass": fraction_str(Fraction(int(sums[i]), den)),
                }
    return BallReport(s, best, witness, rows)


@dataclass
class FrostmanReport:
    tau: Fraction
    C_max: Surd
    witness: dict
    per_radius: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "tau": fraction_str(self.tau),
            "C_max": self.C_max.to_json(),
            "witness": self.witness,
            "per_radius": [{"r": str(r), "ratio": v.to_json()} for r, v in self.per_radius],
        }


def frostman_constant(nu: DiscreteMeasure, tau: Rational, r_min, r_max) -> FrostmanReport:
    """``sup_x,r nu(B(x, r)) / r**tau`` over every cell centre, on or off the support."""
    if len(nu.cells) == 0:
        raise EmptySet("measure has empty support")
    if nu.dim != 1:
        raise ValueError("frostman_constant handles measures on the line")
    tau = as_fraction(tau)
    b = nu.base.b
    best, witness, rows = None, {}, []
    for r, w in _radii(nu, r_min, r_max):
        centers = np.arange(int(nu.cells[0]) - w, int(nu.cells[-1]) + w + 1, dtype=np.int64)
        sums = _window_sums_1d(nu.cells, nu.weights, centers, w - 1) + _window_sums_1d(nu.cells, nu.weights, centers, w)
        i = int(np.argmax(sums))
        mass = Fraction(int(sums[i]), 2 * nu.total)
        ratio = Surd(mass, b, r.exp * tau)
        rows.append((r, ratio))
        if best is None or ratio > best:
            best = ratio
            witness = {"center": _center(nu, centers[i]), "r": str(r), "mass": fraction_str(mass)}
    return FrostmanReport(tau, best, witness, rows)


def rescale_nu(nu0: DiscreteMeasure, cfg: ToyConfig) -> DiscreteMeasure:
    """Push ``nu0`` forward by ``theta -> m**((1+tau)/2) theta``, restrict to ``[0, 1)``, renormalise.

    Scaling by an integer power of ``b`` maps the cell ``i`` of side ``h`` onto
    the cell ``i`` of side ``h * m**((1+tau)/2)``, so only the resolution changes.
    The mass kept before renormalisation is stored in ``meta["unit_mass"]``.
    """
    if nu0.dim != 1:
        raise ValueError("rescale_nu handles measures on the line")
    if nu0.resolution.radix == nu0.base.m:
        res_exp = nu0.resolution.exp * nu0.base.q
    elif nu0.resolution.radix == nu0.base.b:
        res_exp = nu0.resolution.exp
    else:
        raise ValueError("resolution must be a power of b")
    new_res = Scale(nu0.base.b, res_exp - cfg.base.m_exponent(cfg.spacing_A))
    limit = -(-1 // new_res.value)  # cells i with i * h < 1
    keep = nu0.cells < int(limit)
    weights = nu0.weights[keep]
    kept = int(weights.sum())
    if kept == 0:
        raise ZeroMass("no mass of the pushed-forward measure lies in [0, 1)")
    meta = {
        "unit_mass": Fraction(kept, nu0.total),
        "unit_mass_lower_bound": Fraction(1, cfg.base.m_power(cfg.tau)),
    }
    return DiscreteMeasure(nu0.base, new_res, nu0.cells[keep], weights, kept, meta)


def rescaled_frostman_bound(cfg: ToyConfig, factor: Rational = 4) -> Surd:
    """``factor * rho**(tau (tau - 1) / 2)``."""
    return Surd(as_fraction(factor), cfg.m, cfg.tau * (1 - cfg.tau) / 2)
