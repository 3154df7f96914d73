from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgbar import kernels
from mgbar.chowring import load_topform
from mgbar.errors import DomainError
from mgbar.exact import MultiPoly, factorize
from mgbar.integrality import (
    CosetCondition,
    CRTCondition,
    Divisibility,
    Frame,
    analyze,
    bump,
    conjoin,
    coordinate_lattice,
    descent,
    integral_residues,
    lattice_test,
    simplify,
    zero_set,
)

V2 = ("a", "b")
V3 = ("a", "b", "c")


def _vars(names):
    return [MultiPoly.var(names, v) for v in names]


def test_zero_set_small():
    a, b = _vars(V2)
    m = zero_set((a * b) * Fraction(1, 3), 3)
    expected = np.array([[(x * y) % 3 == 0 for y in range(3)] for x in range(3)])
    assert np.array_equal(m, expected)


def test_backends_agree():
    a, b, c = _vars(V3)
    p = (a**3 + 5 * a * b * c - 7 * c**2 + 11) * Fraction(1, 1)
    exps = np.array(list(p.integer_numerator()[0].keys()), dtype=np.int64)
    coeffs = list(p.integer_numerator()[0].values())
    for m in (2, 7, 27):
        got = kernels.zero_mask(exps, coeffs, m, backend="numpy")
        brute = np.zeros((m,) * 3, dtype=bool)
        for x in np.ndindex(*(m,) * 3):
            brute[x] = int(p(*x)) % m == 0
        assert np.array_equal(got, brute)
        if kernels.BACKEND == "cython":
            assert np.array_equal(kernels.zero_mask(exps, coeffs, m, backend="cython"), got)


def test_analyze_rejects_composite_and_low_power():
    a, b = _vars(V2)
    p = a * Fraction(1, 4)
    with pytest.raises(DomainError):
        analyze(p, 4)
    with pytest.raises(DomainError):
        analyze(p, 2, 1)


def test_size_cap():
    a, b, c = _vars(V3)
    with pytest.raises(DomainError):
        analyze(a * Fraction(1, 2**10), 2)


def test_m2_cubic_per_prime():
    a, b = _vars(V2)
    d3 = (a**3 + 15 * a**2 * b - 15 * a * b**2 + 5 * b**3) * Fraction(1, 1440)
    c2 = simplify(analyze(d3, 2))
    assert c2.describe() == "4|a ∧ 4|b"
    ok, basis = lattice_test(c2)
    assert ok and basis == ((4, 0), (0, 4))
    assert simplify(analyze(d3, 3)).describe() == "3|a ∧ 3|b"
    assert simplify(analyze(d3, 5)).describe() == "5|a"
    full = conjoin([simplify(analyze(d3, q)) for q in (2, 3, 5)])
    assert lattice_test(full) == (True, ((60, 0), (0, 12)))


def test_d6_prime5_union():
    d6 = load_topform().form
    c = simplify(analyze(d6, 5))
    assert c.count() == 45
    assert c.describe() == "5|a ∨ 5|(a+3b+c)"
    assert lattice_test(c) == (False, None)


def test_d6_descents():
    d6 = load_topform().form
    assert descent(d6, 2).describe() == "2|c; then 2|a ∧ 4|c; then 2|b"
    assert descent(d6, 3).describe() == "3|a; then 3|b"
    assert descent(d6, 7).describe() == "7|a"
    r5 = descent(d6, 5)
    assert not r5.integral and r5.steps == ()
    assert r5.residual.describe() == "5|a ∨ 5|(a+3b+c)"
    r2 = descent(d6, 2)
    assert r2.integral and r2.frame.scales == (2, 2, 4)


def test_direct_2adic_scan_refused():
    d6 = load_topform().form
    with pytest.raises(DomainError):
        analyze(d6, 2)


def test_frame_substitution():
    f = Frame.identity(V3).substitute((42, 6, 4))
    assert f.variables == ("a1", "b1", "c1")
    assert f.render() == "a=42a₁, b=6b₁, c=4c₁"
    f2 = f.substitute((2, 1, 3))
    assert f2.scales == (84, 6, 12)
    assert f2.lattice_to_original(((5, 0, 0), (0, 5, 0), (0, 0, 5))) == ((420, 0, 0), (0, 30, 0), (0, 0, 60))
    assert bump("a") == "a1" and bump("c1") == "c2"


def test_divisibility_render_and_mask():
    d = Divisibility(5, (3, 2, 1))
    assert d.render(("a1", "b1", "c1")) == "5|(3a₁+2b₁+c₁)"
    assert d.holds((1, 1, 0)) and not d.holds((1, 0, 0))
    assert d.mask(5, 3).sum() == 25


def test_coordinate_lattice():
    c = CosetCondition.from_clauses(V2, [(Divisibility(4, (1, 0)),), (Divisibility(2, (0, 1)),)], modulus=4)
    assert coordinate_lattice(c) == (4, 2)
    u = CosetCondition.from_clauses(V2, [(Divisibility(2, (1, 0)), Divisibility(2, (0, 1)))], modulus=2)
    assert coordinate_lattice(u) is None


def test_conjoin_crt_over_cap():
    conds = [CosetCondition.from_clauses(V3, [(Divisibility(q, (1, 0, 0)),)], modulus=q) for q in (256, 81)]
    out = conjoin(conds)
    assert isinstance(out, CRTCondition)
    assert out.contains((256 * 81, 5, 7)) and not out.contains((256, 0, 0))
    ok, basis = lattice_test(out)
    assert ok and basis == ((20736, 0, 0), (0, 1, 0), (0, 0, 1))


def _random_poly(rng: random.Random, den: int) -> MultiPoly:
    terms = {}
    for _ in range(rng.randint(1, 4)):
        e = tuple(rng.randint(0, 3) for _ in range(3))
        terms[e] = Fraction(rng.randint(-9, 9), 1)
    terms[tuple(rng.randint(0, 2) for _ in range(3))] = Fraction(1)
    p = MultiPoly(V3, terms)
    return p * Fraction(1, den)


@pytest.mark.parametrize("seed", range(20))
def test_crt_consistency_full_grid(seed):
    rng = random.Random(seed)
    den = rng.choice([6, 10, 12, 15, 18, 20, 24, 30, 36, 45, 60])
    p = _random_poly(rng, den)
    _, real = p.integer_numerator()
    per_prime = [analyze(p, q) for q, _ in factorize(real)] or [CosetCondition.full(V3)]
    combined = conjoin(per_prime)
    direct = integral_residues(p, real)
    lifted = combined.lift(real) if isinstance(combined, CosetCondition) else None
    assert lifted is not None and np.array_equal(lifted.admitted, direct.admitted)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([72, 200, 392, 648, 1000, 2592]),
    st.integers(min_value=0, max_value=2**32),
    st.lists(st.tuples(*(st.integers(min_value=-10**6, max_value=10**6),) * 3), min_size=20, max_size=20),
)
def test_crt_consistency_sampled(den, seed, points):
    p = _random_poly(random.Random(seed), den)
    _, real = p.integer_numerator()
    per_prime = [analyze(p, q) for q, _ in factorize(real)]
    if not per_prime:
        return
    combined = conjoin(per_prime)
    for x in points:
        assert combined.contains(x) == (p(*x).denominator == 1)


def test_simplify_verified_by_reenumeration():
    a, b = _vars(V2)
    c = simplify(analyze((a * b) * Fraction(1, 5), 5))
    assert c.describe() == "5|a ∨ 5|b"
    assert c.count() == 9


def test_pure_backend_env_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MGBAR_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "import mgbar.kernels as k; print(k.BACKEND)"], env=env, capture_output=True, text=True
    )
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("backend", ["numpy", "cython"])
def test_kernel_single_variable(backend):
    if backend == "cython" and kernels.BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    exps = np.array([[2], [0]], dtype=np.int64)
    got = kernels.zero_mask(exps, [1, -1], 8, backend=backend)  # x^2 - 1 mod 8
    assert [i for i in range(8) if got[i]] == [1, 3, 5, 7]
