"""Graded quotient rings given by rewrite rules, top-degree pairings, and
polarization of diagonal power forms into monomial value tables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, InvariantError
from .exact import (
    Exps,
    MultiPoly,
    as_rational,
    compositions,
    format_rational,
    multinomial,
    solve_linear,
)

NORMALIZATIONS = ("coarse", "qclass")


def weighted_monomials(grades: Sequence[int], degree: int) -> list[Exps]:
    """Exponent vectors of weighted degree ``degree``."""
    out: list[Exps] = []

    def rec(i: int, left: int, acc: list[int]):
        if i == len(grades) - 1:
            if left % grades[i] == 0:
                out.append(tuple(acc + [left // grades[i]]))
            return
        for k in range(left // grades[i], -1, -1):
            rec(i + 1, left - k * grades[i], acc + [k])

    if degree < 0:
        return out
    rec(0, degree, [])
    return out


@dataclass(frozen=True)
class Rule:
    lhs: Exps
    rhs: MultiPoly

    def to_json(self) -> dict:
        return {"lhs": list(self.lhs), "rhs": self.rhs.to_json()["terms"]}


@dataclass(frozen=True, eq=False)
class RingPresentation:
    """A graded Q-algebra ``Q[generators]/(rules)`` truncated above ``top_degree``.

    ``order`` lists generators from most to least significant; monomials are
    compared by weighted degree, then lexicographically in that priority.
    ``calibration`` assigns numbers to top-degree monomials (coarse
    normalization); ``qclass_factor`` converts to the Q-class reading.
    """

    name: str
    generators: tuple[str, ...]
    grades: tuple[int, ...]
    top_degree: int
    rules: tuple[Rule, ...]
    calibration: Mapping[Exps, Fraction] = field(default_factory=dict)
    order: tuple[str, ...] = ()
    qclass_factor: Fraction = Fraction(1)
    relations: tuple[MultiPoly, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.order:
            object.__setattr__(self, "order", tuple(self.generators))
        if sorted(self.order) != sorted(self.generators):
            raise DomainError("order must be a permutation of the generators")
        for r in self.rules:
            if r.rhs.variables != self.generators:
                raise DomainError(f"rule {r.lhs} uses variables {r.rhs.variables}")
            g = self.grade_of(r.lhs)
            for e in r.rhs.terms:
                if self.grade_of(e) != g:
                    raise DomainError(f"rule {r.lhs} is not grade preserving")
                if self.key(e) >= self.key(r.lhs):
                    raise DomainError(f"rule {r.lhs} -> {e} does not decrease the order")

    # ordering ------------------------------------------------------------
    @cached_property
    def _perm(self) -> tuple[int, ...]:
        return tuple(self.generators.index(v) for v in self.order)

    def grade_of(self, e: Sequence[int]) -> int:
        return sum(g * k for g, k in zip(self.grades, e))

    def key(self, e: Sequence[int]) -> tuple[int, ...]:
        return (self.grade_of(e),) + tuple(e[i] for i in self._perm)

    # elements --------------------------------------------------------------
    def zero(self) -> MultiPoly:
        return MultiPoly.zero(self.generators)

    def gen(self, name: str) -> MultiPoly:
        return MultiPoly.var(self.generators, name)

    def linear(self, coeffs: Mapping[str, object] | Sequence) -> MultiPoly:
        if isinstance(coeffs, Mapping):
            unknown = set(coeffs) - set(self.generators)
            if unknown:
                raise DomainError(f"unknown generators {sorted(unknown)}")
            coeffs = [coeffs.get(v, 0) for v in self.generators]
        return MultiPoly.linear(self.generators, coeffs)

    def is_reducible(self, e: Exps) -> bool:
        return self.grade_of(e) > self.top_degree or any(_divides(r.lhs, e) for r in self.rules)

    def standard_monomials(self, degree: int) -> list[Exps]:
        return [e for e in weighted_monomials(self.grades, degree) if not self.is_reducible(e)]

    @cached_property
    def top_values(self) -> dict[Exps, Fraction]:
        """Coarse values of the standard top-degree monomials, solved from the calibration."""
        std = self.standard_monomials(self.top_degree)
        if not self.calibration:
            return {}
        rows, rhs = [], []
        for mono, value in self.calibration.items():
            nf = normal_form(MultiPoly.monomial(self.generators, mono), self)
            rows.append([nf.coefficient(s) for s in std])
            rhs.append(value)
        x, free = solve_linear(rows, rhs)
        if free:
            raise InvariantError(
                f"calibration of {self.name} leaves {[std[i] for i in free]} undetermined"
            )
        return dict(zip(std, x))

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": [{"name": v, "grade": g} for v, g in zip(self.generators, self.grades)],
            "order": list(self.order),
            "top_degree": self.top_degree,
            "rules": [r.to_json() for r in self.rules],
            "relations": [p.to_json()["terms"] for p in self.relations],
            "calibration": [
                {"exps": list(e), "value": format_rational(v)} for e, v in self.calibration.items()
            ],
            "qclass_factor": format_rational(self.qclass_factor),
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> RingPresentation:
        gens = tuple(g["name"] for g in data["generators"])
        grades = tuple(int(g["grade"]) for g in data["generators"])

        def poly(terms):
            return MultiPoly.from_json({"vars": gens, "terms": terms})

        return cls(
            name=data.get("name", "presentation"),
            generators=gens,
            grades=grades,
            top_degree=int(data["top_degree"]),
            rules=tuple(Rule(tuple(r["lhs"]), poly(r["rhs"])) for r in data.get("rules", [])),
            calibration={
                tuple(c["exps"]): as_rational(c["value"]) for c in data.get("calibration", [])
            },
            order=tuple(data.get("order", ())),
            qclass_factor=as_rational(data.get("qclass_factor", "1")),
            relations=tuple(poly(t) for t in data.get("relations", [])),
            notes=tuple(data.get("notes", ())),
        )


def _divides(a: Exps, b: Exps) -> bool:
    return all(x <= y for x, y in zip(a, b))


def normal_form(element: MultiPoly, pres: RingPresentation) -> MultiPoly:
    """Rewrite ``element`` until no rule applies; terms above the top degree vanish."""
    if element.variables != pres.generators:
        if not set(element.variables) <= set(pres.generators):
            raise DomainError(f"element variables {element.variables} not among generators")
        element = _embed(element, pres.generators)
    pending: dict[Exps, Fraction] = dict(element.terms)
    done: dict[Exps, Fraction] = {}
    while pending:
        e = max(pending, key=pres.key)
        c = pending.pop(e)
        if pres.grade_of(e) > pres.top_degree:
            continue
        rule = next((r for r in pres.rules if _divides(r.lhs, e)), None)
        if rule is None:
            done[e] = c
            continue
        shift = tuple(x - y for x, y in zip(e, rule.lhs))
        for f, d in rule.rhs.terms.items():
            g = tuple(x + y for x, y in zip(f, shift))
            v = pending.get(g, Fraction(0)) + c * d
            if v:
                pending[g] = v
            else:
                pending.pop(g, None)
    return MultiPoly(pres.generators, done)


def _embed(p: MultiPoly, variables: tuple[str, ...]) -> MultiPoly:
    idx = [variables.index(v) for v in p.variables]
    terms = {}
    for e, c in p.terms.items():
        full = [0] * len(variables)
        for i, k in zip(idx, e):
            full[i] = k
        terms[tuple(full)] = c
    return MultiPoly(variables, terms)


def orient(
    relations: Iterable[MultiPoly],
    generators: Sequence[str],
    grades: Sequence[int],
    top_degree: int,
    order: Sequence[str] = (),
) -> tuple[Rule, ...]:
    """Turn relations into rewrite rules, one graded component at a time.

    Each component is reduced by the rules found so far before its leading
    monomial is taken, so earlier eliminations (e.g. of a generator) are
    substituted into later relations. This is not a Groebner completion.
    """
    generators = tuple(generators)
    scratch = RingPresentation("scratch", generators, tuple(grades), top_degree, (), order=tuple(order))
    comps: list[MultiPoly] = []
    for rel in relations:
        degs = sorted({scratch.grade_of(e) for e in rel.terms})
        comps.extend(rel.homogeneous_part(d, grades) for d in degs)
    comps.sort(key=lambda p: scratch.grade_of(next(iter(p.terms))))
    rules: list[Rule] = []
    for comp in comps:
        cur = RingPresentation("scratch", generators, tuple(grades), top_degree, tuple(rules), order=tuple(order))
        red = normal_form(comp, cur)
        if red.is_zero():
            continue
        lead = max(red.terms, key=cur.key)
        lc = red.terms[lead]
        rhs = MultiPoly(generators, {e: -c / lc for e, c in red.terms.items() if e != lead})
        rules.append(Rule(lead, rhs))
    return tuple(rules)


def macaulay_normal_form(
    element: MultiPoly, relations: Sequence[MultiPoly], pres: RingPresentation
) -> MultiPoly:
    """Reduce a homogeneous element modulo the degree-d part of the ideal by linear algebra.

    The ideal's degree-d piece is spanned by monomial multiples of the graded
    components of ``relations``; with columns sorted by the monomial order the
    residue is supported on standard monomials, so for a confluent rule set it
    must coincide with :func:`normal_form`.
    """
    degs = {pres.grade_of(e) for e in element.terms}
    if len(degs) > 1:
        raise DomainError("macaulay_normal_form needs a homogeneous element")
    if not degs:
        return pres.zero()
    d = degs.pop()
    if d > pres.top_degree:
        return pres.zero()
    cols = sorted(weighted_monomials(pres.grades, d), key=pres.key, reverse=True)
    pos = {e: i for i, e in enumerate(cols)}
    comps = []
    for rel in relations:
        for k in sorted({pres.grade_of(e) for e in rel.terms}):
            comps.append(rel.homogeneous_part(k, pres.grades))
    rows: list[list[Fraction]] = []
    for comp in comps:
        k = pres.grade_of(next(iter(comp.terms)))
        for m in weighted_monomials(pres.grades, d - k):
            row = [Fraction(0)] * len(cols)
            for e, c in comp.terms.items():
                row[pos[tuple(x + y for x, y in zip(e, m))]] += c
            if any(row):
                rows.append(row)
    echelon = _echelon(rows, len(cols))
    vec = [Fraction(0)] * len(cols)
    for e, c in element.terms.items():
        vec[pos[e]] += c
    for piv, row in echelon:
        if vec[piv]:
            f = vec[piv]
            vec = [a - f * b for a, b in zip(vec, row)]
    return MultiPoly(pres.generators, {cols[i]: v for i, v in enumerate(vec) if v})


def _echelon(rows: list[list[Fraction]], n: int) -> list[tuple[int, list[Fraction]]]:
    out: list[tuple[int, list[Fraction]]] = []
    for row in rows:
        row = list(row)
        for piv, r in out:
            if row[piv]:
                f = row[piv]
                row = [a - f * b for a, b in zip(row, r)]
        lead = next((i for i, v in enumerate(row) if v), None)
        if lead is None:
            continue
        inv = 1 / row[lead]
        row = [v * inv for v in row]
        # keep the basis fully reduced so later reductions are order independent
        nxt = []
        for piv, r in out:
            if r[lead]:
                f = r[lead]
                r = [a - f * b for a, b in zip(r, row)]
            nxt.append((piv, r))
        out = nxt + [(lead, row)]
    return out


def _check_normalization(normalization: str):
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")


def top_pairing(
    classes: Sequence[MultiPoly], pres: RingPresentation, normalization: str = "coarse"
) -> Fraction:
    """Intersection number of homogeneous classes whose grades add up to the top degree."""
    _check_normalization(normalization)
    if not classes:
        raise DomainError("top_pairing needs at least one class")
    total = 0
    prod = MultiPoly.constant(pres.generators, 1)
    for cls in classes:
        if cls.variables != pres.generators:
            cls = _embed(cls, pres.generators)
        degs = {pres.grade_of(e) for e in cls.terms}
        if len(degs) > 1:
            raise DomainError("classes must be homogeneous")
        total += degs.pop() if degs else 0
        prod = prod * cls
    if prod.is_zero():
        return Fraction(0)
    if total != pres.top_degree:
        raise DomainError(f"total grade {total} differs from top degree {pres.top_degree}")
    nf = normal_form(prod, pres)
    values = pres.top_values
    out = Fraction(0)
    for e, c in nf.terms.items():
        if e not in values:
            raise InvariantError(f"normal form monomial {e} is not calibrated")
        out += c * values[e]
    if normalization == "qclass":
        out *= pres.qclass_factor
    return out


# -- monomial tables ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MonomialTable:
    """Top-degree intersection numbers of monomials in a divisor basis."""

    basis: tuple[str, ...]
    degree: int
    values: Mapping[Exps, Fraction]
    qclass_factor: Fraction = Fraction(1)

    def __post_init__(self):
        for e in self.values:
            if len(e) != len(self.basis) or sum(e) != self.degree:
                raise DomainError(f"table entry {e} has the wrong shape")
        object.__setattr__(self, "values", {tuple(e): as_rational(v) for e, v in self.values.items() if v})

    def value(self, exps: Sequence[int]) -> Fraction:
        exps = tuple(exps)
        if len(exps) != len(self.basis) or sum(exps) != self.degree:
            raise DomainError(f"{exps} is not a degree-{self.degree} monomial")
        return self.values.get(exps, Fraction(0))

    def entries(self) -> list[tuple[Exps, Fraction]]:
        return [(e, self.value(e)) for e in compositions(self.degree, len(self.basis))]

    def pair(self, classes: Sequence, normalization: str = "coarse") -> Fraction:
        """Pair classes given as polynomials over the basis or coefficient vectors."""
        _check_normalization(normalization)
        prod = MultiPoly.constant(self.basis, 1)
        for cls in classes:
            if not isinstance(cls, MultiPoly):
                cls = MultiPoly.linear(self.basis, cls)
            elif cls.variables != self.basis:
                cls = _embed(cls, self.basis)
            prod = prod * cls
        if prod.is_zero():
            return Fraction(0)
        if not prod.is_homogeneous(self.degree):
            raise DomainError(f"product is not of degree {self.degree}")
        out = sum((c * self.value(e) for e, c in prod.terms.items()), Fraction(0))
        return out * self.qclass_factor if normalization == "qclass" else out

    def power_form(
        self, coeff_vars: Sequence[str], signs: Sequence[int], k: int | None = None, extra=None
    ) -> MultiPoly:
        """The polynomial ``D^k * extra`` in the coefficients of ``D = sum sign_i x_i basis_i``.

        ``extra`` is a coefficient vector over the basis of complementary
        degree (or None when ``k`` is the full degree).
        """
        n = len(self.basis)
        if len(coeff_vars) != n or len(signs) != n:
            raise DomainError("one coefficient variable and one sign per basis element")
        k = self.degree if k is None else k
        extra_poly = None
        if extra is not None:
            extra_poly = extra if isinstance(extra, MultiPoly) else MultiPoly.linear(self.basis, extra)
            if extra_poly.variables != self.basis:
                extra_poly = _embed(extra_poly, self.basis)
            degs = {sum(e) for e in extra_poly.terms}
            if degs and degs != {self.degree - k}:
                raise DomainError("extra class has the wrong codimension")
        elif k != self.degree:
            raise DomainError("a complementary class is needed when k < degree")
        terms: dict[Exps, Fraction] = {}
        for e in compositions(k, n):
            sign = 1
            for s, p in zip(signs, e):
                if s < 0 and p % 2:
                    sign = -sign
            if extra_poly is None:
                v = self.value(e)
            else:
                v = sum(
                    (c * self.value(tuple(a + b for a, b in zip(e, f))) for f, c in extra_poly.terms.items()),
                    Fraction(0),
                )
            if v:
                terms[e] = multinomial(e) * sign * v
        return MultiPoly(tuple(coeff_vars), terms)

    def to_json(self) -> dict:
        return {
            "basis": list(self.basis),
            "degree": self.degree,
            "values": [
                {"exps": list(e), "value": format_rational(v)} for e, v in self.entries()
            ],
            "qclass_factor": format_rational(self.qclass_factor),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> MonomialTable:
        return cls(
            basis=tuple(data["basis"]),
            degree=int(data["degree"]),
            values={tuple(v["exps"]): as_rational(v["value"]) for v in data["values"]},
            qclass_factor=as_rational(data.get("qclass_factor", "1")),
        )


def polarize(
    form: MultiPoly, signs: Sequence[int], basis: Sequence[str] | None = None, degree: int | None = None
) -> MonomialTable:
    """Recover monomial values from the diagonal power ``(sum sign_i x_i basis_i)^d``.

    value(e) = sign(e) * coefficient(e) / multinomial(d; e).
    """
    n = form.nvars
    if len(signs) != n or any(s not in (1, -1) for s in signs):
        raise DomainError("signs must be +1/-1, one per coefficient variable")
    d = form.degree() if degree is None else degree
    if not form.is_homogeneous(d):
        raise DomainError(f"form is not homogeneous of degree {d}")
    basis = tuple(basis) if basis is not None else tuple(f"x{i}" for i in range(n))
    values: dict[Exps, Fraction] = {}
    for e in compositions(d, n):
        c = form.coefficient(e)
        if not c:
            continue
        sign = 1
        for s, p in zip(signs, e):
            if s < 0 and p % 2:
                sign = -sign
        values[e] = sign * c / multinomial(e)
    return MonomialTable(basis, d, values)


# -- the Mumford relation -----------------------------------------------------

def chern_product_relation(g: int) -> tuple[tuple[str, ...], MultiPoly]:
    """``(1 + l1 + ... + lg)(1 - l1 + l2 - ...) - 1`` over generators l1..lg."""
    gens = tuple(f"l{i}" for i in range(1, g + 1))
    plus = MultiPoly.constant(gens, 1)
    minus = MultiPoly.constant(gens, 1)
    for i, v in enumerate(gens, start=1):
        x = MultiPoly.var(gens, v)
        plus = plus + x
        minus = minus + (x if i % 2 == 0 else -x)
    return gens, plus * minus - 1


def mumford_presentation(g: int, top_degree: int) -> RingPresentation:
    """Presentation of the relation ring of the Hodge classes in genus ``g``.

    Generators are ordered ``lg > ... > l1`` so that the even classes are
    eliminated in favour of the odd ones and powers of ``l1`` survive.
    """
    gens, rel = chern_product_relation(g)
    grades = tuple(range(1, g + 1))
    order = tuple(reversed(gens))
    rules = orient([rel], gens, grades, top_degree, order)
    return RingPresentation(
        name=f"mumford_g{g}",
        generators=gens,
        grades=grades,
        top_degree=top_degree,
        rules=rules,
        order=order,
        relations=(rel,),
    )


def monomial_ratio(pres: RingPresentation, mono: Exps, reference: Exps) -> Fraction:
    """Scalar c with mono = c * reference in the quotient (both of the same grade)."""
    nf = normal_form(MultiPoly.monomial(pres.generators, mono), pres)
    ref = normal_form(MultiPoly.monomial(pres.generators, reference), pres)
    if len(ref.terms) != 1:
        raise InvariantError(f"reference {reference} does not reduce to a single standard monomial")
    (std, c_ref), = ref.terms.items()
    if any(e != std for e in nf.terms):
        raise InvariantError(f"{mono} is not proportional to {reference} in {pres.name}")
    return nf.coefficient(std) / c_ref


def mumford_reduce() -> Fraction:
    """The constant c with lambda_3^3 = c * lambda_1^9 on M_4-bar."""
    pres = mumford_presentation(4, 9)
    return monomial_ratio(pres, (0, 0, 3, 0), (9, 0, 0, 0))


# -- shipped data -------------------------------------------------------------

def _data_text(name: str) -> str:
    return resources.files("mgbar.data").joinpath(name).read_text(encoding="utf-8")


def load_json(name_or_path: str | Path) -> dict:
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    return json.loads(_data_text(str(name_or_path)))


def load_presentation(name_or_path: str | Path = "m2bar.json") -> RingPresentation:
    return RingPresentation.from_json(load_json(name_or_path))


@dataclass(frozen=True)
class TopForm:
    """A printed diagonal power form together with its polarized table."""

    form: MultiPoly
    signs: tuple[int, ...]
    table: MonomialTable
    notes: tuple[str, ...] = ()


def load_topform(name_or_path: str | Path = "m3bar_topform.json") -> TopForm:
    data = load_json(name_or_path)
    form = MultiPoly.from_json(data["form"])
    signs = tuple(int(s) for s in data["signs"])
    table = polarize(form, signs, data["basis"], int(data["degree"]))
    table = MonomialTable(table.basis, table.degree, table.values, as_rational(data.get("qclass_factor", "1")))
    return TopForm(form, signs, table, tuple(data.get("notes", ())))


def ring_table(pres: RingPresentation, basis: Sequence[str] | None = None) -> MonomialTable:
    """Top-degree monomial values of a presentation whose generators all have grade 1."""
    if any(g != 1 for g in pres.grades):
        raise DomainError("ring_table needs grade-1 generators")
    d = pres.top_degree
    values = {}
    for e in compositions(d, len(pres.generators)):
        v = top_pairing([MultiPoly.monomial(pres.generators, e)], pres, "coarse")
        if v:
            values[e] = v
    return MonomialTable(tuple(basis or pres.generators), d, values, pres.qclass_factor)
