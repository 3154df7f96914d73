"""Necessary nef conditions on M_g-bar from one-parameter families, and the
conversion of the resulting cone to extremal rays by double description."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, InvariantError
from .exact import as_rational, nullspace, primitive, rank

KINDS = "ABCDEFGH"
_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def fold(i: int, g: int) -> int:
    """Boundary index with the symmetry delta_i = delta_{g-i} applied."""
    if not 0 <= i < g:
        raise DomainError(f"boundary index {i} out of range for genus {g}")
    return g - i if i > g // 2 else i


@dataclass(frozen=True)
class DivisorClass:
    """``a*lambda - sum_i b_i delta_i`` with b indexed 0..floor(g/2)."""

    g: int
    a: Fraction
    b: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.b) != self.g // 2 + 1:
            raise DomainError(f"genus {self.g} needs {self.g // 2 + 1} boundary coefficients")
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", tuple(as_rational(x) for x in self.b))

    def coeff(self, i: int) -> Fraction:
        return self.b[fold(i, self.g)]

    def vector(self) -> tuple[Fraction, ...]:
        return (self.a,) + self.b

    @classmethod
    def from_vector(cls, g: int, vec: Sequence) -> DivisorClass:
        return cls(g, vec[0], tuple(vec[1:]))


@dataclass(frozen=True)
class FamilyDescriptor:
    kind: str
    g: int
    params: tuple[int, ...] = ()

    def __post_init__(self):
        k, g, p = self.kind, self.g, self.params
        if k not in KINDS:
            raise DomainError(f"unknown family kind {k!r}")
        if g < 3:
            raise DomainError("families are defined for g >= 3")
        ok = {
            "A": len(p) == 0,
            "B": len(p) == 0,
            "G": len(p) == 0,
            "C": len(p) == 2 and p[0] >= 0 and p[1] >= 1 and sum(p) == g - 2,
            "D": len(p) == 2 and min(p) >= 1 and sum(p) == g - 2,
            "E": len(p) == 3 and min(p) >= 1 and sum(p) == g - 1,
            "F": len(p) == 4 and min(p) >= 1 and sum(p) == g,
            "H": len(p) == 2 and min(p) >= 1 and sum(p) == g - 1,
        }[k]
        if not ok:
            raise DomainError(f"invalid parameters {p} for family {k} in genus {g}")

    @property
    def label(self) -> str:
        return self.kind + ("(" + ",".join(map(str, self.params)) + ")" if self.params else "")


def family_degrees(f: FamilyDescriptor) -> tuple[Fraction, ...]:
    """Degrees of (lambda, delta_0, ..., delta_h) on the family.

    Families E and F are only recorded through their final conditions, see
    :func:`family_condition`.
    """
    g, h = f.g, f.g // 2
    deg = [Fraction(0)] * (h + 2)

    def add(i: int, v: int):
        deg[1 + fold(i, g)] += v

    if f.kind == "A":
        deg[0] = Fraction(1)
        add(0, 12)
        add(1, -1)
    elif f.kind == "B":
        add(0, -1)
    elif f.kind == "C":
        add(f.params[1], -1)
    elif f.kind == "D":
        add(0, -2)
        add(f.params[0] + 1, 1)
    elif f.kind == "G":
        add(0, -2)
        add(1, 1)
    elif f.kind == "H":
        i, j = f.params
        add(i, -1)
        add(j, -1)
        add(1, 1)
    else:
        raise DomainError(f"family {f.kind} has no degree vector here; use family_condition")
    return tuple(deg)


def family_condition(f: FamilyDescriptor) -> tuple[int, ...]:
    """Integer row r with the necessary condition r . (a, b_0, ..., b_h) >= 0."""
    g, h = f.g, f.g // 2
    if f.kind in "EF":
        row = [0] * (h + 2)

        def add(i: int, v: int):
            row[1 + fold(i, g)] += v

        if f.kind == "E":
            _, j, k = f.params
            add(j, 1)
            add(k, 1)
            add(j + k, -1)
        else:
            i, j, k, l = f.params
            for t in (i, j, k, l):
                add(t, 1)
            for t in (i + j, i + k, i + l):
                add(t, -1)
        return tuple(row)
    deg = family_degrees(f)
    return primitive([deg[0]] + [-d for d in deg[1:]]) if any(deg) else tuple([0] * (h + 2))


def families(g: int, include_b: bool = False) -> list[FamilyDescriptor]:
    """All family instances in genus g; B is left out by default since its
    condition b_0 >= 0 is not among the listed conditions (it follows from 2b_0 >= b_j >= 0)."""
    if g < 3:
        raise DomainError("families are defined for g >= 3")
    out = [FamilyDescriptor("A", g)]
    if include_b:
        out.append(FamilyDescriptor("B", g))
    out += [FamilyDescriptor("C", g, (g - 2 - j, j)) for j in range(1, g - 1)]
    out += [FamilyDescriptor("D", g, (i, g - 2 - i)) for i in range(1, g - 2)]
    out.append(FamilyDescriptor("G", g))
    out += [FamilyDescriptor("H", g, (i, g - 1 - i)) for i in range(1, g - 1)]
    # E written through (j, k) with 1 <= j <= k, j + k <= g - 2
    for j in range(1, g):
        for k in range(j, g - 1 - j):
            out.append(FamilyDescriptor("E", g, (g - 1 - j - k, j, k)))
    for p in itertools.combinations_with_replacement(range(1, g + 1), 4):
        if sum(p) == g:
            out.append(FamilyDescriptor("F", g, p))
    return out


# -- cones ----------------------------------------------------------------------

@dataclass(frozen=True)
class Cone:
    """Closed cone {x : row . x >= 0 for every row}, optionally with generators."""

    dimension: int
    inequalities: tuple[tuple[int, ...], ...]
    rays: tuple[tuple[int, ...], ...] | None = None
    lineality: tuple[tuple[int, ...], ...] = ()
    families: tuple[tuple[str, ...], ...] = field(default=(), compare=False)

    def contains(self, x: Sequence) -> bool:
        return all(_dot(r, x) >= 0 for r in self.inequalities)

    def with_rays(self) -> Cone:
        return self if self.rays is not None else extremal_rays(self)


def _dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def nef_inequalities(g: int, drop_redundant: bool = False) -> Cone:
    """The listed necessary conditions, deduplicated up to positive scaling."""
    if g < 3:
        raise DomainError("nef inequalities need g >= 3")
    rows: list[tuple[int, ...]] = []
    labels: dict[tuple[int, ...], list[str]] = {}
    for f in families(g):
        r = family_condition(f)
        if not any(r):
            continue
        r = primitive(r)
        if r not in labels:
            rows.append(r)
            labels[r] = []
        labels[r].append(f.label)
    n = g // 2 + 2
    if drop_redundant:
        keep = list(rows)
        for r in list(rows):
            rest = [s for s in keep if s != r]
            c = extremal_rays(Cone(n, tuple(rest)))
            if all(_dot(r, v) >= 0 for v in c.rays) and all(_dot(r, l) == 0 for l in c.lineality):
                keep = rest
        rows = keep
    return Cone(n, tuple(rows), families=tuple(tuple(labels[r]) for r in rows))


def _canonical_lineality(vecs: list[list[int]], n: int) -> tuple[tuple[int, ...], ...]:
    if not vecs:
        return ()
    from .exact import _rref

    red, piv = _rref([[Fraction(v) for v in row] for row in vecs], n)
    return tuple(primitive(red[i]) for i in range(len(piv)))


def _project_out(v: Sequence[int], lin: tuple[tuple[int, ...], ...]) -> tuple[int, ...]:
    """Orthogonal projection to the complement of the lineality space, made primitive."""
    if not lin:
        return primitive(v)
    # Gram-Schmidt over Q
    basis: list[list[Fraction]] = []
    for l in lin:
        w = [Fraction(x) for x in l]
        for b in basis:
            c = _dot(w, b) / _dot(b, b)
            w = [x - c * y for x, y in zip(w, b)]
        basis.append(w)
    w = [Fraction(x) for x in v]
    for b in basis:
        c = _dot(w, b) / _dot(b, b)
        w = [x - c * y for x, y in zip(w, b)]
    return primitive(w)


def extremal_rays(cone: Cone | Sequence[Sequence[int]], dimension: int | None = None) -> Cone:
    """Double description: generators of ``{x : A x >= 0}``.

    Returns primitive rays sorted lexicographically and a canonical basis of
    the lineality space; when the lineality space is nontrivial the rays are
    taken orthogonal to it.
    """
    if not isinstance(cone, Cone):
        rows = tuple(tuple(int(v) for v in r) for r in cone)
        if dimension is None:
            if not rows:
                raise DomainError("dimension needed for an empty inequality list")
            dimension = len(rows[0])
        cone = Cone(dimension, rows)
    n = cone.dimension
    for r in cone.inequalities:
        if len(r) != n:
            raise DomainError("inequality length differs from the cone dimension")
    order = sorted(
        (i for i, r in enumerate(cone.inequalities) if any(r)),
        key=lambda i: (sum(1 for v in cone.inequalities[i] if v), cone.inequalities[i]),
    )
    lin: list[list[int]] = [[int(i == j) for j in range(n)] for i in range(n)]
    rays: list[tuple[list[int], frozenset[int]]] = []
    seen: list[int] = []
    for idx in order:
        a = cone.inequalities[idx]
        moving = next((l for l in lin if _dot(a, l) != 0), None)
        if moving is not None:
            if _dot(a, moving) < 0:
                moving = [-v for v in moving]
            am = _dot(a, moving)
            new_lin = []
            for l in lin:
                if l is moving:
                    continue
                al = _dot(a, l)
                new_lin.append(list(primitive([am * x - al * y for x, y in zip(l, moving)])) if al else l)
            lin = [l for l in new_lin if any(l)]
            new_rays = []
            for v, z in rays:
                av = _dot(a, v)
                w = list(primitive([am * x - av * y for x, y in zip(v, moving)])) if av else v
                new_rays.append((w, z | {idx}))
            # the old zero sets stay valid: the shift along `moving` is tight on
            # every processed row, because `moving` was in the lineality space
            new_rays.append((list(primitive(moving)), frozenset(seen)))
            rays = new_rays
            seen.append(idx)
            continue
        pos, zer, neg = [], [], []
        for v, z in rays:
            s = _dot(a, v)
            (pos if s > 0 else neg if s < 0 else zer).append((v, z, s))
        out = [(v, z) for v, z, _ in pos] + [(v, z | {idx}) for v, z, _ in zer]
        for (p, zp, sp), (q, zq, sq) in itertools.product(pos, neg):
            common = zp & zq
            adjacent = True
            for w, zw in rays:
                if w is p or w is q:
                    continue
                if common <= zw:
                    adjacent = False
                    break
            if not adjacent:
                continue
            w = primitive([sp * y - sq * x for x, y in zip(p, q)])
            # sp*q - sq*p has a . w = 0
            out.append((list(w), common | {idx}))
        rays = out
        seen.append(idx)
    linb = _canonical_lineality(lin, n)
    final = sorted({_project_out(v, linb) for v, _ in rays})
    final = [v for v in final if any(v)]
    return Cone(n, cone.inequalities, tuple(final), linb, cone.families)


def brute_force_rays(cone: Cone) -> tuple[tuple[int, ...], ...]:
    """Rays from all corank-one subsets of inequalities (pointed cones only)."""
    n = cone.dimension
    rows = [r for r in cone.inequalities if any(r)]
    if rank(rows) < n:
        raise DomainError("brute force enumeration needs a pointed cone")
    found = set()
    for sub in itertools.combinations(rows, n - 1):
        if rank(sub) != n - 1:
            continue
        (v,) = nullspace(sub, n)
        for cand in (v, tuple(-x for x in v)):
            if all(_dot(r, cand) >= 0 for r in rows):
                found.add(cand)
    return tuple(sorted(found))


def check_rays(cone: Cone) -> None:
    """Raise InvariantError unless every ray is feasible, primitive and extreme."""
    if cone.rays is None:
        raise InvariantError("cone has no V-representation")
    n = cone.dimension
    eff = n - len(cone.lineality)
    for v in cone.rays:
        if math.gcd(*v) != 1:
            raise InvariantError(f"ray {v} is not primitive")
        if not cone.contains(v):
            raise InvariantError(f"ray {v} violates an inequality")
        tight = [r for r in cone.inequalities if _dot(r, v) == 0]
        if rank(tight) != eff - 1:
            raise InvariantError(f"ray {v} is tight on a face of rank {rank(tight)}, expected {eff - 1}")
    if list(cone.rays) != sorted(cone.rays):
        raise InvariantError("rays are not sorted")


def generated_cone(generators: Sequence[Sequence[int]], n: int) -> Cone:
    """H-representation of the cone spanned by ``generators`` (via the dual cone)."""
    dual = extremal_rays(Cone(n, tuple(tuple(g) for g in generators)))
    rows = list(dual.rays) + list(dual.lineality) + [tuple(-x for x in l) for l in dual.lineality]
    return Cone(n, tuple(rows))


def ray_is_redundant(rays: Sequence[Sequence[int]], index: int, n: int) -> bool:
    """Whether ``rays[index]`` lies in the cone generated by the other rays."""
    others = [r for i, r in enumerate(rays) if i != index]
    if not others:
        return not any(rays[index])
    return generated_cone(others, n).contains(rays[index])


def ray_to_divisor(ray: Sequence[int], g: int | None = None) -> str:
    """Render (a, b_0, ..., b_h) as ``"a λ − b_0 δ_0 − ..."`` with integer coefficients."""
    vec = primitive(ray)
    if g is not None and len(vec) != g // 2 + 2:
        raise DomainError(f"genus {g} rays have length {g // 2 + 2}")
    parts: list[tuple[int, str]] = [(vec[0], "λ")]
    parts += [(-b, "δ" + str(i).translate(_SUB)) for i, b in enumerate(vec[1:])]
    out = ""
    for c, sym in parts:
        if c == 0:
            continue
        mag = "" if abs(c) == 1 else str(abs(c))
        if c < 0:
            out += "−" + mag + sym
        else:
            out += ("+" if out else "") + mag + sym
    return out or "0"


def nef_cone(g: int) -> Cone:
    return extremal_rays(nef_inequalities(g))


def universal_rays(g: int) -> dict[str, tuple[int, ...]]:
    """λ, 12λ−δ₀ and 10λ−δ₀−2δ₁−…−2δ_h, which are extremal in every genus."""
    h = g // 2
    return {
        "λ": (1,) + (0,) * (h + 1),
        "12λ−δ₀": (12, 1) + (0,) * h,
        "10λ−2δ+δ₀": (10, 1) + (2,) * h,
    }


def format_inequality(row: Sequence[int]) -> str:
    names = ["a"] + [f"b{i}".translate(_SUB) for i in range(len(row) - 1)]
    out = ""
    for c, sym in zip(row, names):
        if c == 0:
            continue
        mag = "" if abs(c) == 1 else str(abs(c))
        out += ("−" if c < 0 else ("+" if out else "")) + mag + sym
    return (out or "0") + " ≥ 0"


def rays_equal_up_to_scaling(a: Iterable[Sequence], b: Iterable[Sequence]) -> bool:
    return sorted(primitive(x) for x in a) == sorted(primitive(x) for x in b)
