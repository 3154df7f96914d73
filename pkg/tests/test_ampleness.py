from __future__ import annotations

from fractions import Fraction

import pytest

from mgbar.ampleness import (
    M3_AMPLE_ROWS,
    integral_on_lattice,
    m2_closed_form,
    m2_conditions,
    m2_degree,
    m2_minimize,
    m2_pairing,
    m2_two_lambda_scan,
    m3_conditions,
    m3_degree,
    m3_minimize,
    m3_mixed,
    minimize,
)
from mgbar.errors import DomainError
from mgbar.exact import MultiPoly, factorize, lattice_index


def test_m2_degree_matches_closed_form():
    for a in range(-3, 8):
        for b in range(-3, 8):
            assert m2_degree(a, b) == m2_closed_form(a, b)
    assert m2_degree(60, 12) == 516


def test_m2_pairings():
    a, b = MultiPoly.var(("a", "b"), "a"), MultiPoly.var(("a", "b"), "b")
    assert m2_pairing("Delta1") == (a - b) ** 2 * Fraction(1, 144)
    assert m2_pairing("Delta0") == a * b * Fraction(1, 12) - b**2 * Fraction(1, 24)
    with pytest.raises(DomainError):
        m2_pairing("Delta2")


def test_m2_conditions_lattice():
    rep = m2_conditions()
    assert rep.lattice == ((60, 0), (0, 12))
    assert all(rep.checks.values())
    assert [c.describe() for c in rep.per_prime] == ["4|a ∧ 4|b", "3|a ∧ 3|b", "5|a"]


def test_m2_two_lambda_scan():
    scan = m2_two_lambda_scan()
    s, t = MultiPoly.var(("s", "t"), "s"), MultiPoly.var(("s", "t"), "t")
    assert scan["form"] == Fraction(5, 2) * s**2 + 5 * s * t - Fraction(1, 2) * t**2
    assert scan["residues"] == 64
    assert scan["integral_count"] == scan["divisible_count"] == 32
    assert scan["equal"]


def test_integral_on_lattice():
    assert integral_on_lattice(m2_pairing("Delta0"), (60, 12))
    assert not integral_on_lattice(m2_pairing("Delta0"), (1, 1))


def test_m2_minimize():
    r = m2_minimize()
    assert r.point == (60, 12) and r.value == 516
    assert r.certified


def test_m3_degree():
    v = m3_degree(840, 60, 60)
    assert v == 650924662500
    assert factorize(int(v)) == [(2, 2), (3, 2), (5, 5), (7, 1), (826571, 1)]


def test_m3_mixed_codimension_check():
    with pytest.raises(DomainError):
        m3_mixed(4, "lambda")


def _results(rep, source, prime):
    return [e for e in rep.entries if e.source == source and e.prime == prime]


def test_m3_chain_steps():
    rep = m3_conditions()
    d6 = [e.result for e in rep.entries if e.source == "D⁶" and not e.frame]
    assert d6 == ["2|c", "2|a ∧ 4|c", "2|b", "3|a", "3|b", "5|a ∨ 5|(a+3b+c)", "7|a"]
    framed = [e for e in rep.entries if e.source == "D⁶" and e.frame]
    assert [(e.frame, e.result) for e in framed] == [("a=42a₁, b=6b₁, c=4c₁", "5|a₁ ∨ 5|(3a₁+2b₁+c₁)")]


def test_m3_divisor_pairings():
    rep = m3_conditions()
    (d0,) = _results(rep, "D⁵·δ₀", 3)
    assert d0.result == "3|c₁" and d0.detail["implied_by_previous"] is False
    (d1,) = _results(rep, "D⁵·[Δ₁]", 3)
    assert d1.result == "3|c₁ ∨ 3|(a₁+2b₁)" and d1.detail["implied_by_previous"] is True
    (h3,) = _results(rep, "D⁵·[H₃]", 5)
    assert h3.result == "5|(3a₁+2b₁+c₁)" and h3.detail["implied_by_previous"] is False
    for q in (3, 5):
        (lam,) = _results(rep, "D⁵·λ", q)
        assert lam.detail["implied_by_previous"] is True


def test_m3_external_and_lattice():
    rep = m3_conditions()
    ext = [e for e in rep.entries if e.kind == "paper-data"]
    assert [e.result for e in ext] == [
        "5|a₁ ∨ 5|c₂ ∨ 5|(a₁+c₂) ∨ 5|(a₁+3c₂)",
        "2|a₁",
        "5|(a₂+2c₂)",
    ]
    assert rep.entries[-1].result == "5|a₂ ∧ 5|b₁ ∧ 5|c₂"
    assert rep.frame.scales == (84, 6, 12)
    assert rep.lattice == ((420, 0, 0), (0, 30, 0), (0, 0, 60))
    assert rep.is_diagonal()


def test_m3_without_external_is_weaker():
    rep = m3_conditions(use_external=False)
    assert rep.lattice == ((42, 0, 48), (0, 6, 12), (0, 0, 60))
    assert lattice_index(rep.lattice) == 15120
    assert lattice_index(rep.lattice) < lattice_index(((420, 0, 0), (0, 30, 0), (0, 0, 60)))


def test_m3_minimize():
    r = m3_minimize()
    assert r.point == (840, 60, 60)
    assert r.value == 650924662500
    assert r.lattice_coords == (2, 2, 1)
    assert r.certified
    assert r.rays == ((1, 0, 0), (10, 1, 2), (12, 1, 0))
    assert r.ray_values == (Fraction(1, 90720), Fraction(61, 9072), Fraction(871, 504))


def test_minimize_requires_box_when_uncertified():
    x, y = MultiPoly.var(("x", "y"), "x"), MultiPoly.var(("x", "y"), "y")
    form = x**2 - x * y + y**2  # negative cross term: no box certificate
    with pytest.raises(DomainError):
        minimize(form, ((1, 0), (0, 1)), ((1, 0), (0, 1)))
    r = minimize(form, ((1, 0), (0, 1)), ((1, 0), (0, 1)), seed_box=((0, 4), (0, 4)))
    assert r.point == (1, 1) and not r.certified


def test_ample_rows_define_the_genus3_cone():
    assert M3_AMPLE_ROWS[0] == (1, -12, 1)
