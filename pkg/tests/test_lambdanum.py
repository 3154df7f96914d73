from __future__ import annotations

import json
from fractions import Fraction

import pytest

from mgbar.errors import DomainError, InconsistentSystemError
from mgbar.lambdanum import (
    KappaTable,
    TestSurfaceRow,
    h_g,
    h_g_folded,
    kappa_from_psi,
    kappa_name,
    lambda3_cubed,
    lambda6_m3,
    lambda7_delta1sq,
    lambda9_m4,
    load_kappa_table,
    load_test_surfaces,
    proportionality,
    psi_integral,
    schottky_multiple,
    solve_test_surfaces,
    top_lambda1_on_A,
    witten_check,
    witten_value,
)

KAPPA_M3 = {
    (6, 0, 0, 0, 0, 0): Fraction(176557, 107520),
    (4, 1, 0, 0, 0, 0): Fraction(75899, 322560),
    (2, 2, 0, 0, 0, 0): Fraction(32941, 967680),
    (0, 3, 0, 0, 0, 0): Fraction(14507, 2903040),
    (3, 0, 1, 0, 0, 0): Fraction(4073, 161280),
    (1, 1, 1, 0, 0, 0): Fraction(149, 40320),
    (0, 0, 2, 0, 0, 0): Fraction(131, 322560),
    (2, 0, 0, 1, 0, 0): Fraction(2173, 967680),
    (0, 1, 0, 1, 0, 0): Fraction(971, 2903040),
    (1, 0, 0, 0, 1, 0): Fraction(1, 5760),
    (0, 0, 0, 0, 0, 1): Fraction(1, 82944),
}


def test_h_values():
    assert h_g(1) == Fraction(1, 96)
    assert h_g(2) == Fraction(1, 2880)
    assert h_g(3) == Fraction(1, 10080)
    assert h_g(4) == Fraction(31, 362880)
    for g in range(1, 8):
        assert h_g_folded(g) == h_g(g)
    with pytest.raises(DomainError):
        h_g(0)


def test_lambda6():
    assert lambda6_m3() == Fraction(1, 90720)


def test_test_surface_solution():
    sol = solve_test_surfaces()
    assert sol.determined == {
        "j": Fraction(9),
        "i": Fraction(36, 5),
        "g": Fraction(3, 5),
        "m": Fraction(-6, 5),
        "l": Fraction(1, 5),
        "n": Fraction(-12, 5),
        "h": Fraction(27, 5),
    }
    assert sol.free == ("c", "d", "e", "f", "k")
    assert [new for _, new in sol.progress] == [("j",), (), ("g", "i"), ("m",), ("l",), ("n",), ("h",)]


def test_test_surface_inconsistency_reports_row():
    rows, unknowns, known = load_test_surfaces()
    bad = TestSurfaceRow("bogus", {"δ₂²": Fraction(8)}, Fraction(1))
    with pytest.raises(InconsistentSystemError) as exc:
        solve_test_surfaces(rows + [bad], unknowns, known)
    assert exc.value.row == len(rows)


def test_genus4_chain():
    assert lambda7_delta1sq() == Fraction(-1, 77760)
    r = lambda9_m4()
    assert r.restricted == (Fraction(51, 2), Fraction(21, 5))
    assert r.lambda9 == Fraction(1, 113400)
    assert r.lambda7_kappa2 == Fraction(169, 1360800)


def test_lambda3_cubed():
    val, c, l9 = lambda3_cubed()
    assert c == Fraction(1, 384)
    assert val == Fraction(1, 43545600)


def test_proportionality():
    assert proportionality(1) == Fraction(1, 24)
    assert proportionality(3) == Fraction(1, 2903040)
    assert proportionality(4) == Fraction(1, 1393459200)


def test_abelian_values():
    assert top_lambda1_on_A(4) == (Fraction(1, 1814400), Fraction(768))
    top3, ratio3 = top_lambda1_on_A(3)
    assert ratio3 == 16 and top3 == Fraction(1, 181440)


def test_schottky():
    r = schottky_multiple()
    assert r.multiple == 16 and r.qclass_multiple == 8


def test_witten():
    assert witten_value(3) == Fraction(1, 82944)
    assert witten_value(2) == Fraction(1, 1152)
    assert witten_value(4) == Fraction(1, 7962624)
    assert witten_check() == (Fraction(1, 82944), Fraction(1, 82944), True)
    with pytest.raises(DomainError):
        witten_check(4)


def test_kappa_table_load_and_round_trip():
    t = load_kappa_table()
    assert t.entries == KAPPA_M3
    text = json.dumps(t.to_json(), sort_keys=True)
    again = KappaTable.from_json(json.loads(text))
    assert again.entries == t.entries
    assert json.dumps(again.to_json(), sort_keys=True) == text
    assert kappa_name((2, 0, 0, 1, 0, 0)) == "κ₁²κ₄"


def test_kappa_table_rejects_wrong_weight():
    with pytest.raises(DomainError):
        KappaTable(3, {(5, 0, 0, 0, 0, 0): Fraction(1)})


def test_psi_integrals_known_values():
    assert psi_integral(0, (0, 0, 0)) == 1
    assert psi_integral(1, (1,)) == Fraction(1, 24)
    assert psi_integral(2, (4,)) == Fraction(1, 1152)
    assert psi_integral(3, (7,)) == Fraction(1, 82944)
    assert psi_integral(1, (1, 1)) == Fraction(1, 24)
    assert psi_integral(0, (1, 0, 0, 0)) == 1


def test_kappa_table_matches_psi_recursion():
    for e, v in KAPPA_M3.items():
        assert kappa_from_psi(3, e) == v


def test_kappa_genus2():
    # a single kappa equals the one-point psi integral
    assert kappa_from_psi(2, (0, 0, 1)) == Fraction(1, 1152)
