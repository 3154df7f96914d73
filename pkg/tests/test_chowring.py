from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgbar.chowring import (
    MonomialTable,
    RingPresentation,
    load_presentation,
    load_topform,
    macaulay_normal_form,
    monomial_ratio,
    mumford_presentation,
    mumford_reduce,
    normal_form,
    orient,
    polarize,
    ring_table,
    top_pairing,
    weighted_monomials,
)
from mgbar.errors import DomainError
from mgbar.exact import MultiPoly, compositions

M2 = load_presentation("m2bar.json")
LAM, DEL = M2.gen("λ"), M2.gen("δ₁")


def test_m2_rewrite_examples():
    assert normal_form(LAM * DEL, M2) == -(DEL**2)
    assert normal_form(LAM**3, M2) == Fraction(1, 5) * DEL**3
    assert normal_form(DEL * (LAM + DEL), M2).is_zero()
    assert normal_form(LAM**2 * (5 * LAM - DEL), M2).is_zero()


def test_m2_calibration():
    assert top_pairing([LAM, LAM, LAM], M2) == Fraction(1, 1440)
    assert top_pairing([DEL, DEL, DEL], M2) == Fraction(1, 288)
    assert top_pairing([LAM, LAM, LAM], M2, "qclass") == Fraction(1, 2880)
    with pytest.raises(DomainError):
        top_pairing([LAM, LAM], M2, "stacky")


def test_m2_cubic_identity():
    a, b = MultiPoly.var(("a", "b"), "a"), MultiPoly.var(("a", "b"), "b")
    printed = (a**3 + 15 * a**2 * b - 15 * a * b**2 + 5 * b**3) * Fraction(1, 1440)
    assert ring_table(M2).power_form(("a", "b"), (1, 1)) == printed


def test_m2_table_values():
    t = ring_table(M2)
    assert t.value((3, 0)) == Fraction(1, 1440)
    assert t.value((2, 1)) == Fraction(1, 288)
    assert t.value((1, 2)) == Fraction(-1, 288)
    assert t.value((0, 3)) == Fraction(1, 288)


def test_standard_monomials_m2():
    assert M2.standard_monomials(3) == [(0, 3)]
    assert sorted(M2.standard_monomials(1)) == [(0, 1), (1, 0)]


def test_macaulay_agrees_with_rewriting():
    for pres in (M2, mumford_presentation(4, 10), mumford_presentation(3, 6)):
        gens = pres.generators
        for d in range(1, pres.top_degree + 1):
            for e in weighted_monomials(pres.grades, d):
                m = MultiPoly.monomial(gens, e)
                assert normal_form(m, pres) == macaulay_normal_form(m, pres.relations, pres), (pres.name, e)


def test_orient_reproduces_shipped_rules():
    rules = orient(M2.relations, M2.generators, M2.grades, M2.top_degree, M2.order)
    assert rules == M2.rules


def test_presentation_json_round_trip():
    data = M2.to_json()
    again = RingPresentation.from_json(json.loads(json.dumps(data)))
    assert again.to_json() == data
    assert again.top_values == M2.top_values


def test_mumford_relation():
    assert mumford_reduce() == Fraction(1, 384)
    p4 = mumford_presentation(4, 10)
    assert monomial_ratio(p4, (10, 0, 0, 0), (1, 1, 1, 1)) == 768
    p3 = mumford_presentation(3, 6)
    assert monomial_ratio(p3, (6, 0, 0), (1, 1, 1)) == 16


def test_mumford_rule_list():
    p4 = mumford_presentation(4, 10)
    l1, l3 = p4.gen("l1"), p4.gen("l3")
    assert normal_form(p4.gen("l2"), p4) == Fraction(1, 2) * l1**2
    assert normal_form(p4.gen("l4"), p4) == l1 * l3 - Fraction(1, 8) * l1**4
    assert normal_form(l3**2, p4) == l1**3 * l3 - Fraction(1, 8) * l1**6


def test_d6_top_form_entries():
    top = load_topform()
    assert len(top.form.terms) == 19
    assert top.form(840, 60, 60) == 650924662500
    assert top.table.value((6, 0, 0)) == Fraction(1, 90720)


def test_polarization_round_trip_shipped_forms():
    top = load_topform()
    assert top.table.power_form(("a", "b", "c"), top.signs) == top.form
    d3 = ring_table(M2).power_form(("a", "b"), (1, 1))
    t = polarize(d3, (1, 1), ("λ", "δ₁"))
    assert t.values == ring_table(M2).values
    assert t.power_form(("a", "b"), (1, 1)) == d3


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=1, max_value=3),
    st.lists(st.sampled_from([1, -1]), min_size=4, max_size=4),
    st.lists(st.fractions(max_denominator=50), min_size=35, max_size=35),
)
def test_polarization_round_trip_random(d, n, signs, vals):
    basis = tuple(f"x{i}" for i in range(n))
    values = {e: v for e, v in zip(compositions(d, n), vals) if v}
    t = MonomialTable(basis, d, values)
    form = t.power_form(tuple(f"y{i}" for i in range(n)), signs[:n])
    assert polarize(form, signs[:n], basis).values == t.values


def test_table_json_round_trip():
    t = load_topform().table
    assert MonomialTable.from_json(json.loads(json.dumps(t.to_json()))).values == t.values


def test_power_form_checks():
    t = ring_table(M2)
    with pytest.raises(DomainError):
        t.power_form(("a",), (1, 1))
    with pytest.raises(DomainError):
        t.power_form(("a", "b"), (1, 1), k=2)
