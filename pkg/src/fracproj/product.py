"""The planar product set and its projections.

``K = A0 x rho**((1+tau)/2) B0`` carries the product of the equal-weight
measures. Level-``j`` rectangles are the images of the level-``j`` squares of
``A0 x B0`` under ``(x, y) -> (x, rho**((1+tau)/2) y)``; they have size
``rho**j x rho**j rho**((1+tau)/2)`` and mass ``rho**j``.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .covering import CoverReport, cover_report, union_sumset, sumset
from .errors import BadLevel, SizeLimit
from .fractal import DEFAULT_SIZE_LIMIT, DiscreteSet, build_A, build_B, build_Theta
from .measure import BallReport, DiscreteMeasure, ahlfors_constant
from .params import ToyConfig
from .radix import Rational, Scale, ScaledInt, Surd, fraction_str, scale_nums
from .regularity import _unique_counts


@dataclass(eq=False)
class ProductSet:
    cfg: ToyConfig
    A0: DiscreteSet
    B0: DiscreteSet
    B_scaled: DiscreteSet
    points2d: DiscreteSet

    def rect_dims(self, j: int) -> tuple[Fraction, Fraction]:
        rho = self.cfg.rho
        return rho**j, rho**j * Fraction(1, self.cfg.digitsA)

    def digit_prefixes(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Level-``j`` digit prefixes of the A0 and B0 coordinates of every point."""
        pts, e = self.points2d.nums, self.points2d.exp
        b = self.cfg.base.b
        a_nums = pts[:, 0] // b ** (e - self.A0.exp)
        b_nums = pts[:, 1] // b ** (e - self.B_scaled.exp)
        shift = self.cfg.m ** (self.cfg.n - j)
        return a_nums // shift, b_nums // shift


def build_K(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> ProductSet:
    A0, B0 = build_A(cfg, size_limit), build_B(cfg, size_limit)
    if len(A0) * len(B0) > size_limit:
        raise SizeLimit(f"|A0| * |B0| = {len(A0) * len(B0)} exceeds limit {size_limit}")
    shift = cfg.base.m_exponent(cfg.spacing_A)
    Bs = DiscreteSet(cfg.base, B0.exp + shift, B0.nums, cfg.delta)
    e = max(A0.exp, Bs.exp)
    xs, ys = A0.at_exp(e), Bs.at_exp(e)
    grid = np.stack([np.repeat(xs, len(ys)), np.tile(ys, len(xs))], axis=1)
    return ProductSet(cfg, A0, B0, Bs, DiscreteSet(cfg.base, e, grid, cfg.delta))


def build_mu(cfg: ToyConfig, K: ProductSet | None = None, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteMeasure:
    """Mass ``1 / (|A0| |B0|)`` on every point of ``K``, at resolution ``delta``."""
    K = K or build_K(cfg, size_limit)
    return DiscreteMeasure.from_points(K.points2d, cfg.delta)


def rectangle_masses(K: ProductSet, j: int) -> dict:
    """Mass of each level-``j`` rectangle, keyed by its pair of digit prefixes."""
    a_pre, b_pre = K.digit_prefixes(j)
    keys, counts = _unique_counts(np.stack([a_pre, b_pre], axis=1))
    total = len(K.points2d)
    return {(int(a), int(b)): Fraction(int(c), total) for (a, b), c in zip(keys, counts)}


@dataclass
class StackReport:
    j: int
    rect_width: Fraction
    rect_height: Fraction
    horizontal_sep: Fraction | None
    vertical_sep: Fraction | None
    stacks_count: int
    rectangles: int
    contained: bool
    expected_horizontal: Fraction
    expected_vertical: Fraction

    @property
    def matches(self) -> bool:
        h_ok = self.horizontal_sep is None or self.horizontal_sep == self.expected_horizontal
        v_ok = self.vertical_sep is None or self.vertical_sep == self.expected_vertical
        return self.contained and h_ok and v_ok

    def to_json(self) -> dict:
        f = lambda x: None if x is None else fraction_str(x)
        return {
            "j": self.j,
            "rect_width": f(self.rect_width),
            "rect_height": f(self.rect_height),
            "horizontal_sep": f(self.horizontal_sep),
            "vertical_sep": f(self.vertical_sep),
            "expected_horizontal": f(self.expected_horizontal),
            "expected_vertical": f(self.expected_vertical),
            "stacks_count": self.stacks_count,
            "rectangles": self.rectangles,
            "contained": self.contained,
            "matches": self.matches,
        }


def _min_gap(sorted_vals: np.ndarray) -> int | None:
    if len(sorted_vals) < 2:
        return None
    return int(np.diff(sorted_vals).min())


def stack_diagnostics(K: ProductSet, j: int) -> StackReport:
    """Measure rectangle sizes and centre separations at level ``j``.

    Centres are read off the point set through the digit prefixes; separations
    are the smallest gaps between distinct centre coordinates (horizontal) and
    between centres inside one stack (vertical).
    """
    cfg = K.cfg
    if not 1 <= j <= cfg.n:
        raise BadLevel(f"level must lie in 1..{cfg.n}, got {j}")
    width, height = K.rect_dims(j)
    b = cfg.base.b
    # fine enough for both the points and the rectangle height
    e = max(K.points2d.exp, cfg.base.q * j + cfg.base.m_exponent(cfg.spacing_A))
    a_pre, b_pre = K.digit_prefixes(j)
    shift = cfg.m ** (cfg.n - j)
    # rectangle corners over b**e
    x0 = scale_nums(a_pre * shift, b ** (e - K.A0.exp))
    y0 = scale_nums(b_pre * shift, b ** (e - K.B_scaled.exp))
    pts = K.points2d.at_exp(e)
    w_num, h_num = int(width * b**e), int(height * b**e)
    contained = bool(((pts[:, 0] >= x0) & (pts[:, 0] < x0 + w_num) & (pts[:, 1] >= y0) & (pts[:, 1] < y0 + h_num)).all())

    rects = np.unique(np.stack([x0, y0], axis=1), axis=0)
    xs = np.unique(rects[:, 0])
    h_gap = _min_gap(xs)
    v_gaps = [g for x in xs if (g := _min_gap(np.sort(rects[rects[:, 0] == x, 1]))) is not None]
    den = b**e
    rho = cfg.rho
    return StackReport(
        j=j,
        rect_width=width,
        rect_height=height,
        horizontal_sep=None if h_gap is None else Fraction(h_gap, den),
        vertical_sep=Fraction(min(v_gaps), den) if v_gaps else None,
        stacks_count=len(xs),
        rectangles=len(rects),
        contained=contained,
        expected_horizontal=rho ** (j - 1) * Fraction(1, cfg.digitsA),
        expected_vertical=rho**j,
    )


@dataclass
class AhlforsRegimeReport:
    ball: BallReport
    regimes: dict = field(default_factory=dict)

    @property
    def constant(self) -> Surd:
        return self.ball.constant

    def to_json(self) -> dict:
        return {
            "ball": self.ball.to_json(),
            "regimes": {
                k: {"radii": v["radii"], "worst": v["worst"].to_json()} for k, v in self.regimes.items()
            },
        }


def regime_of(r: Scale, cfg: ToyConfig) -> str:
    """Which case a radius falls in: within one stack, across stacks, or on the boundary.

    With ``rho**j <= r <= rho**(j-1)`` the boundary sits at ``rho**(j-1) rho**((1+tau)/2)``.
    """
    v, rho = r.value, cfg.rho
    j = 1
    while rho**j > v:
        j += 1
    edge = rho ** (j - 1) * Fraction(1, cfg.digitsA)
    if v == edge:
        return "boundary"
    return "single-stack" if v < edge else "multi-stack"


def ahlfors1_check(mu: DiscreteMeasure, r_min, r_max, cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> AhlforsRegimeReport:
    """Dimension-1 ball-ratio constant of the planar measure, binned by regime."""
    ball = ahlfors_constant(mu, 1, r_min, r_max, size_limit)
    regimes: dict = {}
    for r, upper, lower in ball.per_radius:
        worst = max(upper, lower)
        slot = regimes.setdefault(regime_of(r, cfg), {"radii": [], "worst": worst})
        slot["radii"].append(str(r))
        slot["worst"] = max(slot["worst"], worst)
    return AhlforsRegimeReport(ball, regimes)


def rescaled_theta(cfg: ToyConfig, size_limit: int = DEFAULT_SIZE_LIMIT) -> DiscreteSet:
    """``m**((1+tau)/2) Theta0`` intersected with ``[0, 1)``."""
    T0 = build_Theta(cfg, size_limit)
    shift = cfg.base.m_exponent(cfg.spacing_A)
    scaled = DiscreteSet(cfg.base, T0.exp - shift, T0.nums, cfg.delta)
    keep = scaled.nums < cfg.base.b**scaled.exp
    return DiscreteSet(cfg.base, scaled.exp, scaled.nums[keep], scaled.resolution)


@dataclass
class SweepReport:
    per_theta: list
    union: CoverReport
    reference: CoverReport | None = None
    union_subset_of_reference: bool | None = None

    @property
    def chain_holds(self) -> bool:
        ok = all(rep.count <= self.union.count for _, rep in self.per_theta)
        if self.reference is not None:
            ok = ok and bool(self.union_subset_of_reference) and self.union.count <= self.reference.count
        return ok

    def csv_rows(self) -> list[dict]:
        rows = []
        for theta, rep in self.per_theta:
            flags = ["within_target" if rep.within_target else "above_target"]
            if theta.num == 0:
                flags.append("theta_zero")
            rows.append({
                "theta_num": theta.num,
                "theta_den_exp": theta.exp,
                "cover_count": rep.count,
                "target": "delta^(-(1+t)/2)",
                "ratio_decimal": str(rep.ratio.decimal(12)),
                "regime_flags": ";".join(flags),
            })
        return rows

    def write_csv(self, path) -> None:
        rows = self.csv_rows()
        fields = ["theta_num", "theta_den_exp", "cover_count", "target", "ratio_decimal", "regime_flags"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)

    def to_json(self) -> dict:
        return {
            "per_theta": [{"theta": str(t), **rep.to_json()} for t, rep in self.per_theta],
            "union": self.union.to_json(),
            "reference": None if self.reference is None else self.reference.to_json(),
            "union_subset_of_reference": self.union_subset_of_reference,
            "chain_holds": self.chain_holds,
        }


def projection_sweep(
    K: ProductSet,
    Theta: DiscreteSet,
    delta: Scale | None = None,
    size_limit: int = DEFAULT_SIZE_LIMIT,
    workers: int = 1,
    reference: bool = True,
) -> SweepReport:
    """``N_delta(pi_theta K)`` for every ``theta`` in ``Theta`` and for the union.

    ``pi_theta(K) = A0 + theta B`` is formed exactly before counting cells.
    With ``reference`` the union is also checked to lie inside ``A0 + Theta0 B0``.
    """
    cfg = K.cfg
    delta = delta or cfg.delta
    thetas = Theta.points()

    def one(theta: ScaledInt) -> tuple[ScaledInt, CoverReport]:
        S = sumset(K.A0, theta, K.B_scaled, size_limit)
        return theta, cover_report(S, delta, cfg.t, label=f"theta={theta}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_theta = list(pool.map(one, thetas))
    else:
        per_theta = [one(th) for th in thetas]
    U = union_sumset(K.A0, Theta, K.B_scaled, size_limit, workers)
    union = cover_report(U, delta, cfg.t, label="union")
    ref = subset = None
    if reference:
        R = union_sumset(K.A0, build_Theta(cfg, size_limit), K.B0, size_limit, workers)
        ref = cover_report(R, delta, cfg.t, label="A0+Theta0*B0")
        subset = U.issubset(R)
    return SweepReport(per_theta, union, ref, subset)
