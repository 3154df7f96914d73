from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgbar.errors import DomainError, InconsistentSystemError
from mgbar.exact import (
    MultiPoly,
    as_rational,
    bernoulli,
    compositions,
    factorize,
    format_rational,
    hermite_normal_form,
    is_prime,
    lattice_index,
    multinomial,
    nullspace,
    poly_eval,
    primitive,
    rank,
    solve_linear,
    valuation,
)

rationals = st.fractions(max_denominator=10**6).filter(lambda x: abs(x.numerator) < 10**12)


def test_bernoulli_values():
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(6) == Fraction(1, 42)
    assert bernoulli(8) == Fraction(-1, 30)
    assert bernoulli(12) == Fraction(-691, 2730)


@pytest.mark.parametrize("n", [0, 1, 3, -2])
def test_bernoulli_rejects(n):
    with pytest.raises(DomainError):
        bernoulli(n)


def test_factorize_examples():
    assert factorize(650924662500) == [(2, 2), (3, 2), (5, 5), (7, 1), (826571, 1)]
    assert factorize(1) == []
    assert factorize(1440) == [(2, 5), (3, 2), (5, 1)]
    assert factorize(90720) == [(2, 5), (3, 4), (5, 1), (7, 1)]


def test_factorize_large_semiprime():
    p, q = 1000000007, 998244353
    assert factorize(p * q) == [(q, 1), (p, 1)]
    assert factorize(2**61 - 1) == [(2**61 - 1, 1)]


def test_factorize_rejects_zero():
    with pytest.raises(DomainError):
        factorize(0)


def test_is_prime_small():
    primes = [n for n in range(200) if is_prime(n)]
    sieve = [n for n in range(2, 200) if all(n % d for d in range(2, int(n**0.5) + 1))]
    assert primes == sieve
    assert is_prime(826571)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10**15))
def test_factorize_product_property(n):
    fs = factorize(n)
    assert math.prod(p**e for p, e in fs) == n
    assert [p for p, _ in fs] == sorted({p for p, _ in fs})
    assert all(is_prime(p) and e >= 1 for p, e in fs)


def test_as_rational_refuses_floats():
    assert as_rational("3/6") == Fraction(1, 2)
    assert as_rational(4) == Fraction(4)
    with pytest.raises(DomainError):
        as_rational(0.5)
    with pytest.raises(DomainError):
        as_rational(True)


def test_format_rational():
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(0)) == "0"


def test_multinomial_and_compositions():
    assert multinomial((2, 1, 3)) == 60
    comps = list(compositions(3, 3))
    assert len(comps) == math.comb(5, 2)
    assert comps[0] == (3, 0, 0) and comps[-1] == (0, 0, 3)


def test_multipoly_invariants():
    p = MultiPoly(("a", "b"), {(1, 0): 1, (0, 1): 0})
    assert p.terms == {(1, 0): Fraction(1)}
    with pytest.raises(DomainError):
        MultiPoly(("a",), {(1, 2): 1})
    with pytest.raises(DomainError):
        MultiPoly(("a", "a"), {})


def test_multipoly_arithmetic_and_eval():
    v = ("a", "b")
    a, b = MultiPoly.var(v, "a"), MultiPoly.var(v, "b")
    d3 = (a**3 + 15 * a**2 * b - 15 * a * b**2 + 5 * b**3) * Fraction(1, 1440)
    assert d3(60, 12) == 516
    assert poly_eval(d3, (Fraction(1), Fraction(0))) == Fraction(1, 1440)
    assert (a + b) * (a - b) == a**2 - b**2
    with pytest.raises(DomainError):
        poly_eval(d3, (1,))


def test_multipoly_json_round_trip():
    v = ("a", "b", "c")
    p = MultiPoly(v, {(6, 0, 0): Fraction(1, 90720), (0, 3, 3): Fraction(-505, 18)})
    assert MultiPoly.from_json(p.to_json()) == p
    assert MultiPoly.loads(p.dumps()) == p
    with pytest.raises(DomainError):
        MultiPoly.from_json({"vars": ["a"], "terms": [{"coeff": 0.5, "exps": [1]}]})


def test_substitution_helpers():
    v = ("a", "b")
    a, b = MultiPoly.var(v, "a"), MultiPoly.var(v, "b")
    p = a**2 * b
    assert p.scale_variables((2, 3)) == 12 * a**2 * b
    q = p.substitute_linear(("x", "y"), [[1, 1], [0, 1]])
    x, y = MultiPoly.var(("x", "y"), "x"), MultiPoly.var(("x", "y"), "y")
    assert q == (x + y) ** 2 * y


@settings(max_examples=150, deadline=None)
@given(rationals, rationals, rationals)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x + 0 == x and x * 1 == x
    assert x + (-x) == 0
    if x != 0:
        assert x * (1 / x) == 1
    r = as_rational(format_rational(x))
    assert r == x and math.gcd(r.numerator, r.denominator) == 1 and r.denominator > 0


def test_solve_linear_free_and_inconsistent():
    x, free = solve_linear([[1, 1, 0], [0, 0, 1]], [2, 3])
    assert x == [None, None, Fraction(3)] and free == [0, 1]
    with pytest.raises(InconsistentSystemError) as exc:
        solve_linear([[1, 0], [0, 1], [1, 1]], [1, 1, 3])
    assert exc.value.row == 2


def test_rank_nullspace():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert rank(rows) == 2
    (v,) = nullspace(rows, 3)
    assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)
    assert primitive([Fraction(1, 2), Fraction(3, 4)]) == (2, 3)


def test_hnf_and_index():
    h = hermite_normal_form([[60, 0], [0, 12], [120, 24]], 2)
    assert h == [(60, 0), (0, 12)]
    assert lattice_index(h) == 720
    h = hermite_normal_form([[2, 1], [0, 3]], 2)
    assert h == [(2, 1), (0, 3)]


def test_valuation():
    assert valuation(650924662500, 5) == 5
    with pytest.raises(DomainError):
        valuation(0, 2)
