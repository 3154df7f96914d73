"""Integrality conditions for very ample divisors on M_2-bar and M_3-bar and
the minimum embedding degree."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .chowring import (
    MonomialTable,
    load_json,
    load_presentation,
    load_topform,
    ring_table,
    top_pairing,
)
from .errors import DomainError, InvariantError
from .exact import MultiPoly, as_rational, factorize, hermite_normal_form
from .integrality import (
    CosetCondition,
    CRTCondition,
    Divisibility,
    Frame,
    analyze,
    conjoin,
    coordinate_lattice,
    descent,
    lattice_test,
    simplify,
)

M2_VARS = ("a", "b")
M3_VARS = ("a", "b", "c")


@dataclass(frozen=True)
class CycleClass:
    name: str
    label: str
    coeffs: tuple[Fraction, ...]
    codim: int


@lru_cache(maxsize=None)
def cycle_classes(space: str) -> dict[str, CycleClass]:
    data = load_json("cycle_classes.json")
    if space not in data:
        raise DomainError(f"no class table for {space!r}")
    out = {}
    for name, c in data[space]["classes"].items():
        out[name] = CycleClass(name, c["label"], tuple(as_rational(x) for x in c["coeffs"]), int(c["codim"]))
    return out


def _class(space: str, name: str) -> CycleClass:
    table = cycle_classes(space)
    if name not in table:
        raise DomainError(f"unknown class {name!r}; known: {sorted(table)}")
    return table[name]


# -- M2-bar -------------------------------------------------------------------------

def m2_closed_form(a, b) -> Fraction:
    a, b = as_rational(a), as_rational(b)
    return (a**3 + 15 * a**2 * b - 15 * a * b**2 + 5 * b**3) / 1440


@lru_cache(maxsize=None)
def m2_table(presentation: str = "m2bar.json") -> MonomialTable:
    return ring_table(load_presentation(presentation))


def m2_degree(a: int, b: int, presentation: str = "m2bar.json") -> Fraction:
    """D^3 for D = a*lambda + b*delta_1 via the ring engine, checked against the closed form."""
    pres = load_presentation(presentation)
    d = pres.linear([a, b])
    val = top_pairing([d, d, d], pres, "coarse")
    if presentation == "m2bar.json" and val != m2_closed_form(a, b):
        raise InvariantError(f"ring engine gives {val} at ({a},{b}), closed form differs")
    return val


def m2_degree_form(presentation: str = "m2bar.json") -> MultiPoly:
    """D^3 as a polynomial in (a, b), expanded symbolically through the ring engine."""
    return m2_table(presentation).power_form(M2_VARS, (1, 1))


def m2_pairing(name: str, normalization: str = "coarse", presentation: str = "m2bar.json") -> MultiPoly:
    """D^2 . X as a polynomial in (a, b)."""
    cls = _class("m2bar", name)
    table = m2_table(presentation)
    p = table.power_form(M2_VARS, (1, 1), k=3 - cls.codim, extra=cls.coeffs)
    if normalization == "qclass":
        p = p * table.qclass_factor
    elif normalization != "coarse":
        raise DomainError(f"unknown normalization {normalization!r}")
    return p


def _substitute_lattice(p: MultiPoly, scales: Sequence[int], names: Sequence[str]) -> MultiPoly:
    return p.scale_variables(scales).rename(names)


def integral_on_lattice(p: MultiPoly, scales: Sequence[int]) -> bool:
    """Whether p(scales * y) is an integer for every integer y."""
    sub = _substitute_lattice(p, scales, [f"y{i}" for i in range(len(scales))])
    _, den = sub.integer_numerator()
    return all(analyze(sub, q).is_full() for q, _ in factorize(den))


@dataclass(frozen=True, eq=False)
class M2Report:
    condition: CosetCondition
    lattice: tuple[tuple[int, ...], ...]
    per_prime: tuple[CosetCondition, ...]
    checks: dict[str, bool]
    scan: dict[str, object] = field(default_factory=dict)


def m2_conditions(presentation: str = "m2bar.json") -> M2Report:
    form = m2_degree_form(presentation)
    _, den = form.integer_numerator()
    per_prime = tuple(simplify(analyze(form, q, e)) for q, e in factorize(den))
    cond = conjoin(per_prime, label="integrality of D³")
    ok, basis = lattice_test(cond)
    if not ok:
        raise InvariantError("the degree condition on M2-bar is not a lattice")
    if any(basis[i][j] for i in range(2) for j in range(2) if i != j):
        raise InvariantError(f"lattice {basis} is not diagonal")
    scales = (basis[0][0], basis[1][1])
    checks = {
        "D²·[Δ₀] integral": integral_on_lattice(m2_pairing("Delta0"), scales),
        "D²·[Δ₁] integral": integral_on_lattice(m2_pairing("Delta1"), scales),
        "D²·4λ integral": integral_on_lattice(m2_pairing("4lambda"), scales),
        "D²·2λ coarse always integral": integral_on_lattice(m2_pairing("2lambda"), scales),
    }
    scan = m2_two_lambda_scan(scales, presentation)
    checks["D²·2λ (Q-class) integral iff 8|(a+b)"] = scan["equal"]
    return M2Report(cond, basis, per_prime, checks, scan)


def m2_two_lambda_scan(scales: Sequence[int] = (60, 12), presentation: str = "m2bar.json") -> dict:
    """Exhaustive scan over (s, t) mod 8 of a = scales[0]*s, b = scales[1]*t."""
    p = _substitute_lattice(m2_pairing("2lambda", "qclass", presentation), scales, ("s", "t"))
    num, den = p.integer_numerator()
    if 8 % den:
        raise InvariantError(f"denominator {den} of D²·2λ on the lattice does not divide 8")
    s, t = np.indices((8, 8))
    acc = np.zeros((8, 8), dtype=np.int64)
    for e, c in num.items():
        acc = acc + c * s ** e[0] * t ** e[1]
    integral = acc % den == 0
    eight = (scales[0] * s + scales[1] * t) % 8 == 0
    return {
        "residues": 64,
        "integral_count": int(integral.sum()),
        "divisible_count": int(eight.sum()),
        "equal": bool(np.array_equal(integral, eight)),
        "form": p,
    }


# -- M3-bar -------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _m3():
    return load_topform("m3bar_topform.json")


def m3_degree(a: int, b: int, c: int) -> Fraction:
    """D^6 for D = a*lambda - b*delta_0 - c*delta_1."""
    return _m3().form(a, b, c)


def m3_mixed(k: int, name: str) -> MultiPoly:
    """D^k . X as a polynomial in (a, b, c)."""
    cls = _class("m3bar", name)
    if k + cls.codim != 6:
        raise DomainError(f"D^{k} . {name} is not a top-degree product")
    top = _m3()
    return top.table.power_form(M3_VARS, top.signs, k=k, extra=cls.coeffs)


MIXED_ITEMS = ("delta0", "Delta1", "H3", "lambda")


@dataclass(frozen=True)
class ChainEntry:
    source: str
    prime: int | None
    frame: str  # rendering of the active substitution
    variables: tuple[str, ...]
    result: str
    kind: str  # derived or paper-data
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class M3Report:
    entries: tuple[ChainEntry, ...]
    frame: Frame
    final: CRTCondition | CosetCondition
    lattice_frame: tuple[tuple[int, ...], ...] | None
    lattice: tuple[tuple[int, ...], ...] | None
    descents: dict
    external_used: bool

    def is_diagonal(self) -> bool:
        L = self.lattice
        return L is not None and all(L[i][j] == 0 for i in range(3) for j in range(3) if i != j)


def _external_conditions():
    return load_json("m3_external.json")["conditions"]


def _pulled_divisibility(frame: Frame, variables, d: dict) -> Divisibility:
    return Divisibility(int(d["modulus"]), frame.pull(variables, d["coeffs"]))


def m3_conditions(use_external: bool = True) -> M3Report:
    top = _m3()
    d6 = top.form
    entries: list[ChainEntry] = []
    frame = Frame.identity(M3_VARS)
    _, den = d6.integer_numerator()
    descents = {}
    factors = [1, 1, 1]
    residual_primes = []
    for q, _ in factorize(den):
        r = descent(d6, q)
        descents[q] = r
        for st in r.steps:
            entries.append(ChainEntry("D⁶", q, "", M3_VARS, st.describe(), "derived", {"source": st.source}))
        if r.integral:
            factors = [f * s for f, s in zip(factors, r.frame.scales)]
        else:
            residual_primes.append(q)
            entries.append(ChainEntry("D⁶", q, "", M3_VARS, r.residual.describe(), "derived", {"count": r.residual.count()}))
    frame = frame.substitute(factors)
    # the degree condition seen in the new frame
    for q in residual_primes:
        c = simplify(analyze(frame.apply(d6), q))
        entries.append(ChainEntry("D⁶", q, frame.render(), frame.variables, c.describe(), "derived"))

    # divisor pairings in this frame; coordinate conditions are adopted afterwards
    known: dict[int, list[CosetCondition]] = {}
    for q in residual_primes:
        known.setdefault(q, []).append(analyze(frame.apply(d6), q))
    adopt = [1, 1, 1]
    for name in MIXED_ITEMS:
        p = frame.apply(m3_mixed(5, name))
        _, dn = p.integer_numerator()
        for q, _ in factorize(dn):
            c = simplify(analyze(p, q))
            if c.is_full():
                continue
            implied = _implied_by(c, known.get(q, []))
            d = coordinate_lattice(c)
            if d is not None and not implied:
                adopt = [math.lcm(x, y) for x, y in zip(adopt, d)]
            known.setdefault(q, []).append(c)
            entries.append(
                ChainEntry(
                    f"D⁵·{_class('m3bar', name).label}", q, frame.render(), frame.variables, c.describe(), "derived",
                    {"implied_by_previous": implied},
                )
            )
    frame = frame.substitute(adopt)

    external = []
    if use_external:
        for item in _external_conditions():
            clause = tuple(_pulled_divisibility(frame, item["variables"], d) for d in item["clause"])
            entries.append(
                ChainEntry(item["pairing"], clause[0].modulus, frame.render(), frame.variables,
                           " ∨ ".join(d.render(frame.variables) for d in clause), "paper-data",
                           {"id": item["id"], "citation": item["citation"]})
            )
            if item.get("substitute"):
                if len(clause) != 1 or sum(1 for x in clause[0].coeffs if x) != 1:
                    raise DomainError(f"external item {item['id']} is not a coordinate condition")
                j = next(i for i, x in enumerate(clause[0].coeffs) if x)
                fac = [1, 1, 1]
                fac[j] = clause[0].modulus // math.gcd(clause[0].modulus, clause[0].coeffs[j])
                # earlier external clauses are re-pulled below, so substitute now
                frame = frame.substitute(fac)
            else:
                external.append(item)

    # recompute every condition in the final frame and conjoin per prime
    conds = []
    polys = [("D⁶", d6)] + [(f"D⁵·{name}", m3_mixed(5, name)) for name in MIXED_ITEMS]
    for _, p in polys:
        fp = frame.apply(p)
        _, dn = fp.integer_numerator()
        for q, _ in factorize(dn):
            c = analyze(fp, q)
            if not c.is_full():
                conds.append(c)
    for item in external:
        clause = tuple(_pulled_divisibility(frame, item["variables"], d) for d in item["clause"])
        conds.append(CosetCondition.from_clauses(frame.variables, [clause], label=item["id"]))
    final = conjoin(conds, label="combined") if conds else CosetCondition.full(frame.variables)
    if isinstance(final, CRTCondition):
        final = CRTCondition(final.variables, tuple(simplify(c) for c in final.components), final.label)
    ok, basis = lattice_test(final)
    lattice = frame.lattice_to_original(basis) if ok else None
    entries.append(ChainEntry("combined", None, frame.render(), frame.variables, final.describe(), "hybrid" if use_external else "derived"))
    return M3Report(tuple(entries), frame, final, basis if ok else None, lattice, descents, use_external)


def _implied_by(c: CosetCondition, previous: Sequence[CosetCondition]) -> bool:
    """Whether the conjunction of earlier conditions at the same prime already implies c."""
    if not previous:
        return False
    both = conjoin(list(previous) + [c])
    before = conjoin(list(previous))
    return both.same_set(before)


# -- minimization -----------------------------------------------------------------

@dataclass(frozen=True)
class MinimizeResult:
    point: tuple[int, ...]
    value: Fraction
    lattice_coords: tuple[int, ...]
    rays: tuple[tuple[int, ...], ...]
    ray_values: tuple[Fraction, ...]
    ray_lattice_points: tuple[tuple[int, ...], ...]
    ray_lattice_values: tuple[Fraction, ...]
    seed: tuple[int, ...]
    seed_value: Fraction
    ray_bounds: tuple[int, ...]
    box: tuple[tuple[int, int], ...]
    lattice_box: tuple[tuple[int, int], ...]
    examined: int
    feasible: int
    certified: bool


def _iroot_ceil(x: Fraction, d: int) -> int:
    """Smallest integer r >= 0 with r^d >= x."""
    if x <= 0:
        return 0
    n = math.ceil(x)
    r = int(round(float(n) ** (1.0 / d))) if n < 2**1000 else 1 << (n.bit_length() // d + 1)
    while r**d < x:
        r += 1
    while r > 0 and (r - 1) ** d >= x:
        r -= 1
    return r


def _simplicial_rays(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    from .nefcone import Cone, extremal_rays

    c = extremal_rays(Cone(n, tuple(tuple(r) for r in rows)))
    if c.lineality or len(c.rays) != n:
        raise DomainError("the box certificate needs a pointed simplicial cone")
    return list(c.rays)


def _inverse(mat: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    from .exact import _rref

    n = len(mat)
    aug = [[Fraction(int(mat[i][j])) for j in range(n)] + [Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    red, piv = _rref(aug, n)
    if len(piv) != n:
        raise DomainError("singular matrix")
    return [row[n:] for row in red]


def _lattice_points_in_box(basis, box):
    """Integer combinations y with sum y_i basis_i inside box (basis upper triangular, row style)."""
    n = len(basis)

    def rec(i, partial, ys):
        if i == n:
            yield tuple(ys), tuple(partial)
            return
        piv = basis[i][i]
        lo, hi = box[i]
        # x_i = partial_i + y_i * piv
        ylo = -((partial[i] - lo) // piv)
        yhi = (hi - partial[i]) // piv
        for y in range(ylo, yhi + 1):
            nxt = [p + y * basis[i][j] for j, p in enumerate(partial)]
            yield from rec(i + 1, nxt, ys + [y])

    yield from rec(0, [0] * n, [])


def minimize(
    form: MultiPoly,
    rows: Sequence[Sequence[int]],
    lattice: Sequence[Sequence[int]],
    strict: Sequence[int] | None = None,
    seed_search: int = 3,
    seed_box: Sequence[tuple[int, int]] | None = None,
) -> MinimizeResult:
    """Exact minimum of a homogeneous form over lattice points of a cone.

    ``rows`` define the cone (row . x >= 0); rows listed in ``strict`` must
    hold strictly (default: all). When the cone is simplicial and the form,
    written in extremal-ray coordinates t, has only nonnegative coefficients,
    any point with value at most F0 has t_i^d <= F0 / f(r_i); this gives a
    finite box that is searched exhaustively. Otherwise ``seed_box`` (lattice
    coordinate ranges) must be given and the search is uncertified.
    """
    n = form.nvars
    d = form.degree()
    if not form.is_homogeneous(d):
        raise DomainError("minimize needs a homogeneous form")
    rows = [tuple(int(v) for v in r) for r in rows]
    strict = list(range(len(rows))) if strict is None else list(strict)
    basis = hermite_normal_form(lattice, n)
    if len(basis) != n:
        raise DomainError("lattice must have full rank")

    def feasible(x):
        for i, r in enumerate(rows):
            s = sum(a * b for a, b in zip(r, x))
            if s < 0 or (s == 0 and i in strict):
                return False
        return True

    def coords(x):
        return tuple(int(v) for v in x)

    # seed: small lattice coordinates
    seed, seed_val = None, None
    for ys in itertools.product(range(-seed_search, seed_search + 1), repeat=n):
        x = tuple(sum(y * basis[i][j] for i, y in enumerate(ys)) for j in range(n))
        if feasible(x):
            v = form(*x)
            if seed_val is None or (v, x) < (seed_val, seed):
                seed, seed_val = x, v
    if seed is None and seed_box is None:
        raise DomainError("no feasible point found near the origin; give a seed box")

    certified = False
    rays: list[tuple[int, ...]] = []
    ray_vals: list[Fraction] = []
    ray_pts: list[tuple[int, ...]] = []
    ray_pt_vals: list[Fraction] = []
    bounds: list[int] = []
    try:
        rays = _simplicial_rays(rows, n)
        tv = [f"t{i}" for i in range(n)]
        in_rays = form.substitute_linear(tv, [[r[j] for r in rays] for j in range(n)])
        ray_vals = [form(*r) for r in rays]
        if all(c >= 0 for c in in_rays.terms.values()) and all(v > 0 for v in ray_vals) and seed is not None:
            certified = True
            bounds = [_iroot_ceil(seed_val / v, d) for v in ray_vals]
        for r in rays:
            k = 1
            while not _in_lattice([k * x for x in r], basis):
                k += 1
            pt = tuple(k * x for x in r)
            ray_pts.append(_lattice_coords(pt, basis))
            ray_pt_vals.append(form(*pt))
    except DomainError:
        certified = False

    if certified:
        box = []
        for j in range(n):
            lo = sum(min(0, r[j] * b) for r, b in zip(rays, bounds))
            hi = sum(max(0, r[j] * b) for r, b in zip(rays, bounds))
            box.append((lo, hi))
        inv = _inverse([[r[j] for r in rays] for j in range(n)])
    else:
        if seed_box is None:
            raise DomainError("no box certificate for this form and cone; pass a seed box")
        box = None

    best, best_val = None, None
    examined = feasible_count = 0
    if box is not None:
        points = _lattice_points_in_box(basis, box)
    else:
        ranges = [range(lo, hi + 1) for lo, hi in seed_box]
        points = (
            (ys, tuple(sum(y * basis[i][j] for i, y in enumerate(ys)) for j in range(n)))
            for ys in itertools.product(*ranges)
        )
    for ys, x in points:
        examined += 1
        if certified:
            t = [sum(inv[i][j] * x[j] for j in range(n)) for i in range(n)]
            if any(ti < 0 or ti > b for ti, b in zip(t, bounds)):
                continue
        if not feasible(x):
            continue
        feasible_count += 1
        v = form(*x)
        if v <= 0:
            raise DomainError(f"form is not positive at feasible point {x}")
        if best_val is None or (v, x) < (best_val, best):
            best, best_val = x, v
    if best is None:
        raise DomainError("no feasible lattice point in the search box")
    if box is not None:
        # exact for diagonal lattices, a coarse summary otherwise
        lattice_box = tuple((-(-box[i][0] // basis[i][i]), box[i][1] // basis[i][i]) for i in range(n))
    else:
        lattice_box = tuple(tuple(b) for b in seed_box)
    return MinimizeResult(
        point=coords(best),
        value=best_val,
        lattice_coords=_lattice_coords(best, basis),
        rays=tuple(rays),
        ray_values=tuple(ray_vals),
        ray_lattice_points=tuple(ray_pts),
        ray_lattice_values=tuple(ray_pt_vals),
        seed=_lattice_coords(seed, basis) if seed is not None else (),
        seed_value=seed_val if seed_val is not None else Fraction(0),
        ray_bounds=tuple(bounds),
        box=tuple(box) if box is not None else (),
        lattice_box=lattice_box,
        examined=examined,
        feasible=feasible_count,
        certified=certified,
    )


def _in_lattice(x, basis) -> bool:
    rem = list(x)
    for i, row in enumerate(basis):
        if rem[i] % row[i]:
            return False
        c = rem[i] // row[i]
        rem = [a - c * b for a, b in zip(rem, row)]
    return not any(rem)


def _lattice_coords(x, basis) -> tuple[int, ...]:
    rem = list(x)
    ys = []
    for i, row in enumerate(basis):
        if rem[i] % row[i]:
            raise DomainError(f"{tuple(x)} is not in the lattice")
        c = rem[i] // row[i]
        ys.append(c)
        rem = [a - c * b for a, b in zip(rem, row)]
    return tuple(ys)


M2_AMPLE_ROWS = ((1, -1), (0, 1))  # a > b > 0
M3_AMPLE_ROWS = ((1, -12, 1), (0, 2, -1), (0, 0, 1))  # a - 12b + c > 0, 2b > c > 0


def m2_minimize(seed_box=None, presentation: str = "m2bar.json") -> MinimizeResult:
    rep = m2_conditions(presentation)
    return minimize(m2_degree_form(presentation), M2_AMPLE_ROWS, rep.lattice, seed_box=seed_box)


def m3_minimize(seed_box=None, lattice=None) -> MinimizeResult:
    if lattice is None:
        rep = m3_conditions()
        if rep.lattice is None:
            raise InvariantError("the combined M3-bar condition is not a lattice")
        lattice = rep.lattice
    return minimize(_m3().form, M3_AMPLE_ROWS, lattice, seed_box=seed_box)
