"""Parameter cascades.

Two regimes are supported. :func:`admissible_delta` evaluates the asymptotic
choice ``delta = 2**(-n_seed**K)`` symbolically: it never enumerates points,
because already the smallest admissible instances have ``1/rho`` around
``2**36``. :func:`structural_config` instead fixes ``(b, q, tau, t, n)``
directly and sets ``delta := m**(-n)``, which is small enough to enumerate.

All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadOrder, IntegralityFailure
from .radix import RadixBase, Rational, Scale, as_fraction, exact_power, fraction_str, make_base


def _check_order(t: Fraction, tau: Fraction) -> None:
    if not 0 < t <= 1:
        raise BadOrder(f"t must lie in (0, 1], got {t}")
    if not 0 < tau < t:
        raise BadOrder(f"need 0 < tau < t, got tau={tau}, t={t}")


def derive_epsilon(t: Rational, tau: Rational) -> Fraction:
    """``(t - tau) / 6``."""
    t, tau = as_fraction(t), as_fraction(tau)
    _check_order(t, tau)
    return (t - tau) / 6


def _pow2_ge(base: int, n: int, two_exp: Fraction) -> bool:
    """Exact test of ``base**n >= 2**two_exp`` for rational ``two_exp >= 0``."""
    c = two_exp.denominator
    return base ** (n * c) >= 2**two_exp.numerator


def _ceil_log_ratio(L: int, eps: Fraction) -> int:
    """Smallest ``n >= 1`` with ``n * log2(L) >= eps * L``."""
    target = eps * L
    guess = max(1, math.floor(float(target) / math.log2(L)) - 1)
    while guess > 1 and _pow2_ge(L, guess - 1, target):
        guess -= 1
    while not _pow2_ge(L, guess, target):
        guess += 1
    return guess


@dataclass(frozen=True)
class PaperParams:
    t: Fraction
    tau: Fraction
    epsilon: Fraction
    K: int
    n_seed: int
    log2_delta: int
    m: int
    rho_exp: int | None
    n_levels: int
    form3: dict = field(default_factory=dict)
    digits: dict = field(default_factory=dict)
    property_of_n: bool = False
    smallness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def big(v: int) -> str:
            return str(v) if v.bit_length() <= 256 else f"<{v.bit_length()}-bit integer>"

        return {
            "mode": "paper",
            "t": fraction_str(self.t),
            "tau": fraction_str(self.tau),
            "epsilon": fraction_str(self.epsilon),
            "K": self.K,
            "n_seed": self.n_seed,
            "log2_inv_delta": self.log2_delta,
            "m": big(self.m),
            "rho_exp": self.rho_exp,
            "n_levels": self.n_levels,
            "form3": {k: big(v) for k, v in self.form3.items()},
            "digits": {k: big(v) for k, v in self.digits.items()},
            "property_of_n": self.property_of_n,
            "smallness": self.smallness,
        }


def admissible_delta(t: Rational, tau: Rational, n_seed: int) -> PaperParams:
    """Symbolic parameters for ``delta = 2**(-n_seed**K)``.

    ``K`` is the least common multiple of the denominators of ``1/(2 eps)`` and
    ``tau/(2 eps)``. With ``L = log2(1/delta) = n_seed**K`` the five quantities
    ``L, L**(1/eps), L**(tau/eps), L**((1+tau)/(2 eps)), L**((1-tau)/(2 eps))``
    must all be integers at least 2; each is evaluated exactly.

    ``n_levels = ceil(eps * L / log2(L))`` is computed without rounding by
    comparing ``L**n`` against ``2**(eps * L)``.
    """
    t, tau = as_fraction(t), as_fraction(tau)
    eps = derive_epsilon(t, tau)
    if n_seed < 2:
        raise ValueError("n_seed must be at least 2")
    K = math.lcm((1 / (2 * eps)).denominator, (tau / (2 * eps)).denominator)
    L = n_seed**K

    exponents = {
        "L": Fraction(1),
        "L^(1/eps)": 1 / eps,
        "L^(tau/eps)": tau / eps,
        "L^((1+tau)/(2eps))": (1 + tau) / (2 * eps),
        "L^((1-tau)/(2eps))": (1 - tau) / (2 * eps),
    }
    form3 = {}
    for name, p in exponents.items():
        v = exact_power(L, p)
        if v is None or v < 2:
            raise IntegralityFailure(f"{name} with L={L} is not an integer >= 2")
        form3[name] = v

    m = form3["L^(1/eps)"]
    rho_exp = m.bit_length() - 1 if m & (m - 1) == 0 else None
    n_levels = _ceil_log_ratio(L, eps)
    # n <= log(1/delta) / log log(1/delta)  <=>  L**n <= 2**L
    property_of_n = L**n_levels <= 2**L
    # log log(1/delta) >= 4 and log(1/delta) <= delta**(-eps**2/2)
    small_exp = eps * eps * L / 2
    smallness = {
        "loglog_at_least_4": L >= 16,
        "log_below_delta_power": L**small_exp.denominator <= 2**small_exp.numerator,
    }
    digits = {
        "A": form3["L^((1+tau)/(2eps))"],
        "B": form3["L^((1-tau)/(2eps))"],
        "Theta": form3["L^(tau/eps)"],
    }
    return PaperParams(
        t=t,
        tau=tau,
        epsilon=eps,
        K=K,
        n_seed=n_seed,
        log2_delta=L,
        m=m,
        rho_exp=rho_exp,
        n_levels=n_levels,
        form3=form3,
        digits=digits,
        property_of_n=property_of_n,
        smallness=smallness,
    )


@dataclass(frozen=True)
class ToyConfig:
    """Desk-scale construction parameters with ``delta = m**(-n)``."""

    base: RadixBase
    tau: Fraction
    t: Fraction
    n: int

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def rho(self) -> Fraction:
        return self.base.rho

    @property
    def epsilon(self) -> Fraction:
        return (self.t - self.tau) / 6

    @property
    def delta(self) -> Scale:
        return Scale.madic(self.base, self.n)

    @property
    def spacing_A(self) -> Fraction:
        return (1 + self.tau) / 2

    @property
    def spacing_B(self) -> Fraction:
        return (1 - self.tau) / 2

    @property
    def spacing_Theta(self) -> Fraction:
        return self.tau

    @property
    def digitsA(self) -> int:
        return self.base.m_power(self.spacing_A)

    @property
    def digitsB(self) -> int:
        return self.base.m_power(self.spacing_B)

    @property
    def digitsTheta(self) -> int:
        return self.base.m_power(self.spacing_Theta)

    def with_depth(self, n: int) -> "ToyConfig":
        return ToyConfig(self.base, self.tau, self.t, n)

    def to_json(self) -> dict:
        return {
            "mode": "structural",
            "b": self.base.b,
            "q": self.base.q,
            "m": self.m,
            "tau": fraction_str(self.tau),
            "t": fraction_str(self.t),
            "n": self.n,
            "delta": f"{self.m}^-{self.n}",
            "digitsA": self.digitsA,
            "digitsB": self.digitsB,
            "digitsTheta": self.digitsTheta,
        }


def structural_config(b: int, q: int, tau: Rational, t: Rational, n: int) -> ToyConfig:
    tau, t = as_fraction(tau), as_fraction(t)
    _check_order(t, tau)
    if n < 1:
        raise ValueError("construction depth n must be at least 1")
    base = make_base(b, q, tau)
    return ToyConfig(base, tau, t, n)
