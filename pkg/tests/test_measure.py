from fractions import Fraction

import numpy as np
import pytest

import oracles
from fracproj.errors import EmptySet
from fracproj.fractal import DigitFractal, DiscreteSet, build_A, build_corollary_set, fractal_Theta, full_grid
from fracproj.measure import (
    DiscreteMeasure,
    ahlfors_constant,
    build_prop23_measure,
    equal_weight_ssm,
    frostman_constant,
    rescale_nu,
    rescaled_frostman_bound,
)
from fracproj.radix import RadixBase, Scale, Surd
from fracproj.regularity import regularity_constant

BASE2 = RadixBase(2, 1)


def as_triple(s: Surd):
    return (s.coef, s.radix, s.exp)


def test_prop23_measure_full_grid():
    mu = build_prop23_measure(full_grid(BASE2, 3), Scale(2, 3))
    assert mu.masses == {k: Fraction(1, 8) for k in range(8)}


def test_prop23_measure_corollary():
    mu = build_prop23_measure(build_corollary_set(4, "1/2", [0, 2], 3), Scale(4, 3))
    assert len(mu.cells) == 8 and set(mu.masses.values()) == {Fraction(1, 8)}


def test_prop23_measure_singleton():
    mu = build_prop23_measure(DiscreteSet.from_values(["1/4"], BASE2, Scale(2, 3)), Scale(2, 3))
    assert mu.masses == {2: 1}


def test_prop23_measure_rejects_empty_and_bad_s():
    with pytest.raises(EmptySet):
        build_prop23_measure(DiscreteSet(BASE2, 0, np.array([], dtype=np.int64), Scale(2, 3)), Scale(2, 3))
    with pytest.raises(ValueError):
        build_prop23_measure(full_grid(BASE2, 3), Scale(2, 3), s=2)


def test_mass_of_cells_and_json_roundtrip():
    mu = equal_weight_ssm(DigitFractal(RadixBase(2, 4), Fraction(1, 2), range(4), 2))
    assert len(mu.cells) == 16 and set(mu.masses.values()) == {Fraction(1, 16)}
    assert set(mu.mass_of_cells(Scale(16, 1)).values()) == {Fraction(1, 4)}
    back = DiscreteMeasure.from_json(mu.to_json())
    assert back.masses == mu.masses and back.resolution == mu.resolution


def test_theta_depth_one_masses(cfg16):
    nu = equal_weight_ssm(fractal_Theta(cfg16(1)))
    assert list(nu.masses.values()) == [Fraction(1, 4)] * 4


def test_single_digit_gives_point_mass():
    nu = equal_weight_ssm(DigitFractal(RadixBase(2, 4), Fraction(1, 2), (0,), 3))
    assert nu.masses == {0: 1}


def test_ahlfors_uniform_grid():
    mu = build_prop23_measure(full_grid(BASE2, 6), Scale(2, 6))
    rep = ahlfors_constant(mu, 1, Scale(2, 6), 1)
    # interior balls carry exactly 2r; balls at the edge of [0, 1) lose up to half
    assert rep.constant == 2
    ref = oracles.ahlfors_1d({Fraction(k, 64): Fraction(1, 64) for k in range(64)}, Fraction(1, 64), Fraction(1), 2, 6, 0)
    assert oracles.power_cmp(ref, as_triple(rep.constant)) == 0


def test_ahlfors_point_mass():
    mu = build_prop23_measure(DiscreteSet.from_values([0], BASE2, Scale(2, 4)), Scale(2, 4))
    rep = ahlfors_constant(mu, "1/2", Scale(2, 4), Scale(2, 4))
    assert rep.constant == 4


@pytest.mark.parametrize(
    "digits,golden",
    [
        ((0, 1), Surd(Fraction(31, 16), 2, 0)),
        ((0, 2), Surd(Fraction(31, 32), 2, Fraction(1, 2))),
        ((0, 3), Surd(1, 2, Fraction(1, 2))),
    ],
)
def test_prop23_corollary_golden(digits, golden):
    P = build_corollary_set(4, "1/2", digits, 4)
    mu = build_prop23_measure(P, Scale(4, 4), "1/2")
    rep = ahlfors_constant(mu, "1/2", Scale(4, 4), 1)
    assert rep.constant == golden
    C = regularity_constant(P, "1/2", Scale(4, 4), 1).C_min
    assert rep.constant <= 8 * C**2


@pytest.mark.parametrize("n,coef", [(1, Fraction(15, 16)), (2, Fraction(127, 128))])
def test_prop23_A_matches_oracle(cfg16, n, coef):
    cfg = cfg16(n)
    mu = build_prop23_measure(build_A(cfg), cfg.delta)
    rep = ahlfors_constant(mu, "3/4", cfg.delta, 1)
    A, _, _ = oracles.sets_ABTheta(16, Fraction(1, 2), n)
    h = cfg.delta.value
    cells = {x // h for x in A}
    ref = oracles.ahlfors_1d({c * h: Fraction(1, len(cells)) for c in cells}, h, Fraction(3, 4), 2, 4 * n, 0)
    assert oracles.power_cmp(ref, as_triple(rep.constant)) == 0
    assert rep.constant == Surd(coef, 2, Fraction(3, 4))


def test_frostman_uniform_grid():
    nu = build_prop23_measure(full_grid(BASE2, 5), Scale(2, 5))
    assert frostman_constant(nu, 1, Scale(2, 5), 1).C_max == 2


def test_ball_mass_spreads_cell_mass():
    # radius one cell about a cell centre: the own cell plus half of each neighbour
    nu = build_prop23_measure(full_grid(BASE2, 3), Scale(2, 3))
    rep = frostman_constant(nu, 0, Scale(2, 3), Scale(2, 3))
    assert rep.witness["mass"] == "1/4"


def test_frostman_point_mass():
    nu = build_prop23_measure(DiscreteSet.from_values([0], BASE2, Scale(2, 4)), Scale(2, 4))
    rep = frostman_constant(nu, "1/2", Scale(2, 4), 1)
    assert rep.C_max == 4
    assert rep.witness["r"] == "2^-4"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_frostman_theta_matches_oracle(cfg16, n):
    cfg = cfg16(n)
    nu = equal_weight_ssm(fractal_Theta(cfg))
    rep = frostman_constant(nu, "1/2", nu.resolution, 1)
    assert rep.C_max == Surd(1, 2, Fraction(1, 2)) and rep.C_max <= 4
    if n <= 2:
        _, _, T = oracles.sets_ABTheta(16, Fraction(1, 2), n)
        ref = oracles.frostman_1d({x: Fraction(1, len(T)) for x in T}, Fraction(1, 16**n), Fraction(1, 2), 2, 4 * n, 0)
        assert oracles.power_cmp(ref, as_triple(rep.C_max)) == 0


def test_rescale_nu(cfg16):
    cfg = cfg16(2)
    nu0 = equal_weight_ssm(fractal_Theta(cfg))
    nu = rescale_nu(nu0, cfg)
    assert nu.resolution == Scale(2, 5)
    assert nu.meta["unit_mass"] == Fraction(1, 4) >= nu.meta["unit_mass_lower_bound"]
    assert nu.total_mass() == 1
    rep = frostman_constant(nu, "1/2", nu.resolution, 1)
    bound = rescaled_frostman_bound(cfg)
    assert bound == Surd(4, 2, Fraction(1, 2))
    assert rep.C_max == 2 and rep.C_max <= bound


def test_rescale_point_mass_at_origin(cfg16):
    cfg = cfg16(2)
    nu0 = equal_weight_ssm(DigitFractal(cfg.base, Fraction(1, 2), (0,), 2))
    nu = rescale_nu(nu0, cfg)
    assert nu.masses == {0: 1}
