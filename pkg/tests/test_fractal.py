from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fracproj.errors import BadDigits, SizeLimit
from fracproj.fractal import (
    DigitFractal,
    DiscreteSet,
    build_A,
    build_B,
    build_corollary_set,
    build_digit_fractal,
    build_Theta,
    dump_set,
    full_grid,
    load_set,
)
from fracproj.radix import RadixBase, Scale

BASE16 = RadixBase(2, 4)


def test_A_depth_one():
    S = build_digit_fractal(DigitFractal(BASE16, Fraction(3, 4), range(8), 1))
    assert S.values() == [Fraction(k, 8) for k in range(8)]


def test_Theta_depth_one():
    S = build_digit_fractal(DigitFractal(BASE16, Fraction(1, 2), range(4), 1))
    assert S.values() == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]


@pytest.mark.parametrize("depth", [1, 2, 4])
def test_single_digit_is_origin(depth):
    S = build_digit_fractal(DigitFractal(BASE16, Fraction(1, 2), (0,), depth))
    assert S.values() == [0]


def test_sizes_at_depth_three(cfg16):
    cfg = cfg16(3)
    assert (len(build_A(cfg)), len(build_B(cfg)), len(build_Theta(cfg))) == (512, 8, 64)


def test_B_depth_one(cfg16):
    assert build_B(cfg16(1)).values() == [0, Fraction(1, 2)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_builders_match_oracle(cfg16, n):
    A, B, T = oracles.sets_ABTheta(16, Fraction(1, 2), n)
    cfg = cfg16(n)
    assert set(build_A(cfg).values()) == A
    assert set(build_B(cfg).values()) == B
    assert set(build_Theta(cfg).values()) == T


def test_corollary_example():
    S = build_corollary_set(4, "1/2", [0, 2], 2)
    assert S.values() == [0, Fraction(1, 8), Fraction(1, 2), Fraction(5, 8)]


def test_corollary_rejects_repeats():
    with pytest.raises(BadDigits):
        build_corollary_set(4, "1/2", [0, 0], 2)


def test_corollary_rejects_wrong_count_and_range():
    with pytest.raises(BadDigits):
        build_corollary_set(4, "1/2", [0, 1, 2], 2)
    with pytest.raises(BadDigits):
        build_corollary_set(4, "1/2", [0, 4], 2)


def test_full_binary_grid():
    S = build_corollary_set(2, 1, [0, 1], 3)
    assert S.values() == [Fraction(k, 8) for k in range(8)]
    assert S == full_grid(RadixBase(2, 1), 3)


def test_digit_validation():
    with pytest.raises(BadDigits):
        DigitFractal(BASE16, Fraction(1, 2), (0, 4), 1)
    with pytest.raises(BadDigits):
        DigitFractal(BASE16, Fraction(1, 2), (), 1)


def test_size_limit():
    with pytest.raises(SizeLimit):
        build_digit_fractal(DigitFractal(BASE16, Fraction(3, 4), range(8), 5), size_limit=1000)


def test_discrete_set_dedups_and_sorts():
    S = DiscreteSet.from_values(["1/2", "1/4", "1/2", 0], BASE16, Scale(2, 2))
    assert S.values() == [0, Fraction(1, 4), Fraction(1, 2)]
    assert S.issubset(full_grid(BASE16, 2))
    assert S.max_value() == Fraction(1, 2)


def test_planar_set():
    S = DiscreteSet.from_values([("1/2", "1/4"), (0, 0), ("1/2", "1/4")], BASE16, Scale(2, 2))
    assert S.dim == 2 and len(S) == 2
    assert S.values() == [(0, 0), (Fraction(1, 2), Fraction(1, 4))]


def test_dump_roundtrip(tmp_path, cfg16):
    for S in (build_A(cfg16(2)), DiscreteSet.from_values([("1/2", "1/4"), (0, 0)], BASE16, Scale(16, 1))):
        path = tmp_path / "set.bin"
        dump_set(S, path)
        T = load_set(path)
        assert T == S and T.resolution == S.resolution and T.exp == S.exp


def test_dump_roundtrip_big_integers(tmp_path):
    nums = np.array([0, 2**80 + 1], dtype=object)
    S = DiscreteSet(BASE16, 90, nums, Scale(2, 90))
    dump_set(S, tmp_path / "big.bin")
    assert load_set(tmp_path / "big.bin").values() == S.values()


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from([(Fraction(1, 4), 2), (Fraction(1, 2), 4), (Fraction(3, 4), 8), (Fraction(1), 16)]),
    st.data(),
    st.integers(1, 3),
)
def test_digit_fractal_matches_expansion_oracle(spacing_limit, data, depth):
    spacing, limit = spacing_limit
    digits = data.draw(st.sets(st.integers(0, limit - 1), min_size=1, max_size=limit))
    S = build_digit_fractal(DigitFractal(BASE16, spacing, sorted(digits), depth))
    unit = Fraction(1, limit)
    assert set(S.values()) == oracles.expansions(16, unit, digits, depth)
    assert len(S) == len(digits) ** depth
