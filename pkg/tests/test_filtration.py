import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adelheat import Filtration
from adelheat.errors import ResourceError, UsageError


def test_factorial_chain(fact):
    for n in range(0, 12):
        assert fact.psi_value(n) == math.factorial(n + 1)
        assert fact.psi_value(-n) == Fraction(1, math.factorial(n + 1))


def test_prime_power_chain(two):
    assert [two.chain_int(n) for n in range(6)] == [1, 2, 4, 8, 16, 32]
    assert two.psi_value(-3) == Fraction(1, 8)


def test_lcm_chain_skips_repeats(lcm):
    expected, value = [1], 1
    for m in range(2, 40):
        new = math.lcm(value, m)
        if new != value:
            expected.append(new)
            value = new
    got = [lcm.chain_int(n) for n in range(len(expected))]
    assert got == expected
    assert got[:6] == [1, 2, 6, 12, 60, 420]


def test_ratios_and_radix(fact):
    assert fact.ratio(3) == 4
    # e^{Lambda(n)} = e^{Lambda(1-n)} for n <= 0
    assert fact.ratio(0) == fact.ratio(1) == 2
    assert fact.ratio(-2) == fact.ratio(3)
    assert fact.radix(2) == fact.ratio(3)


@given(st.integers(-40, 40), st.integers(0, 20))
def test_divisibility_and_quotient(n, d):
    f = Filtration.factorial(window=(-80, 80))
    q = f.psi_value(n + d) / f.psi_value(n)
    assert q.denominator == 1
    assert f.quotient(n + d, n) == q.numerator


def test_log_psi_matches_exact(fact):
    ns = np.arange(-30, 31)
    logs = fact.log_psi(ns)
    exact = [math.log(fact.psi_value(int(n)).numerator) - math.log(fact.psi_value(int(n)).denominator) for n in ns]
    assert np.allclose(logs, exact, rtol=0, atol=1e-12)


def test_window_guard(fact):
    with pytest.raises(ResourceError):
        fact.psi_value(257)
    with pytest.raises(ResourceError):
        fact.log_psi(np.array([0, -300]))


def test_cofinality_builtin(builtin):
    rep = builtin.validate_cofinality(100)
    if builtin.name.startswith("prime_power"):
        assert not rep.ok
        assert 3 in rep.uncovered
    else:
        assert rep.ok
        assert all(builtin.chain_int(rep.first_index[m]) % m == 0 for m in range(1, 101))


def test_custom_periodic_and_reject():
    f = Filtration.custom([2, 3], extend="periodic")
    assert [f.chain_int(n) for n in range(5)] == [1, 2, 6, 12, 36]
    with pytest.raises(UsageError):
        Filtration.custom([2, 3], extend="reject", window=(-10, 10))
    with pytest.raises(UsageError):
        Filtration.custom([2, 1])


def test_config_roundtrip(builtin):
    again = Filtration.from_config(builtin.to_config())
    assert again == builtin
    assert Filtration.from_config("prime_power(3)").chain_int(2) == 9
    with pytest.raises(UsageError):
        Filtration.from_config({"type": "nope"})


def test_order_of_rational(fact):
    assert fact.order_of_rational(Fraction(0)) == math.inf
    assert fact.order_of_rational(Fraction(6)) == 2  # 6 = 3!, not divisible by 4!
    assert fact.order_of_rational(Fraction(1, 6)) == -2
    assert fact.order_of_rational(Fraction(5, 2)) == -1
