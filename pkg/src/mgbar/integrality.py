"""Residue-set analysis of where a rational polynomial takes q-integral values.

A :class:`CosetCondition` stores an admitted set of residues mod m as a
boolean array of shape (m,)*n, optionally with an equivalent CNF of
divisibility clauses ``d | L(x)`` that has been checked by re-enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, InvariantError
from .exact import MultiPoly, factorize, hermite_normal_form, lattice_index, valuation

MAX_POINTS = 2**24
MAX_DISJUNCTS = 4
# hyperplane-union search is only attempted on grids this small
_UNION_SEARCH_POINTS = 2**16

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def pretty(name: str) -> str:
    """``a1`` -> ``a₁``; other names unchanged."""
    head = name.rstrip("0123456789")
    return head + name[len(head):].translate(_SUB)


def _check_size(m: int, n: int) -> None:
    if m < 1:
        raise DomainError("modulus must be positive")
    if m**n > MAX_POINTS:
        raise DomainError(f"refusing to enumerate {m}^{n} residues (cap {MAX_POINTS})")


def _grid(m: int, n: int) -> list[np.ndarray]:
    return list(np.indices((m,) * n, dtype=np.int64))


@dataclass(frozen=True)
class Divisibility:
    """``modulus | sum coeffs[i] * x_i``."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError("divisibility modulus must be positive")
        object.__setattr__(self, "coeffs", tuple(int(c) % self.modulus for c in self.coeffs))

    def holds(self, x: Sequence[int]) -> bool:
        return sum(c * int(v) for c, v in zip(self.coeffs, x)) % self.modulus == 0

    def mask(self, m: int, n: int) -> np.ndarray:
        if m % self.modulus:
            raise DomainError(f"{self.modulus} does not divide the grid modulus {m}")
        grid = _grid(m, n)
        acc = np.zeros((m,) * n, dtype=np.int64)
        for c, g in zip(self.coeffs, grid):
            if c:
                acc = (acc + c * g) % self.modulus
        return acc == 0

    def render(self, variables: Sequence[str]) -> str:
        terms = []
        for c, v in zip(self.coeffs, variables):
            if c:
                terms.append(("" if c == 1 else str(c)) + pretty(v))
        body = "+".join(terms) if terms else "0"
        if len(terms) > 1:
            body = f"({body})"
        return f"{self.modulus}|{body}"

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "coeffs": list(self.coeffs)}


Clause = tuple[Divisibility, ...]


def render_clauses(clauses: Sequence[Clause] | None, variables: Sequence[str]) -> str:
    if clauses is None:
        return "<raw residue set>"
    if not clauses:
        return "true"
    parts = []
    for cl in clauses:
        s = " ∨ ".join(d.render(variables) for d in cl)
        parts.append(f"({s})" if len(cl) > 1 and len(clauses) > 1 else s)
    return " ∧ ".join(parts)


def clauses_mask(clauses: Sequence[Clause], m: int, n: int) -> np.ndarray:
    out = np.ones((m,) * n, dtype=bool)
    for cl in clauses:
        part = np.zeros((m,) * n, dtype=bool)
        for d in cl:
            part |= d.mask(m, n)
        out &= part
    return out


@dataclass(frozen=True, eq=False)
class CosetCondition:
    variables: tuple[str, ...]
    modulus: int
    admitted: np.ndarray
    clauses: tuple[Clause, ...] | None = None
    label: str = ""

    def __post_init__(self):
        n = len(self.variables)
        if self.admitted.shape != (self.modulus,) * n or self.admitted.dtype != bool:
            raise DomainError("admitted mask must be boolean of shape (modulus,)*n")
        self.admitted.setflags(write=False)

    # constructors ------------------------------------------------------------
    @classmethod
    def full(cls, variables: Sequence[str], modulus: int = 1, label: str = "") -> CosetCondition:
        variables = tuple(variables)
        _check_size(modulus, len(variables))
        return cls(variables, modulus, np.ones((modulus,) * len(variables), dtype=bool), (), label)

    @classmethod
    def from_clauses(
        cls, variables: Sequence[str], clauses: Sequence[Clause], modulus: int | None = None, label: str = ""
    ) -> CosetCondition:
        variables = tuple(variables)
        clauses = tuple(tuple(cl) for cl in clauses)
        for cl in clauses:
            for d in cl:
                if len(d.coeffs) != len(variables):
                    raise DomainError("clause arity differs from the variable list")
        if modulus is None:
            modulus = math.lcm(1, *(d.modulus for cl in clauses for d in cl))
        _check_size(modulus, len(variables))
        return cls(variables, modulus, clauses_mask(clauses, modulus, len(variables)), clauses, label)

    @classmethod
    def from_lattice(
        cls, variables: Sequence[str], basis: Sequence[Sequence[int]], modulus: int, label: str = ""
    ) -> CosetCondition:
        """Residues mod ``modulus`` of the lattice spanned by ``basis`` (which must contain modulus*Z^n)."""
        variables = tuple(variables)
        n = len(variables)
        _check_size(modulus, n)
        hnf = hermite_normal_form(list(basis) + [tuple(modulus * int(i == j) for j in range(n)) for i in range(n)], n)
        mask = _lattice_membership(hnf, _grid(modulus, n), modulus)
        return cls(variables, modulus, mask, None, label)

    # queries -----------------------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def count(self) -> int:
        return int(self.admitted.sum())

    def is_full(self) -> bool:
        return bool(self.admitted.all())

    def contains(self, x: Sequence[int]) -> bool:
        if len(x) != self.nvars:
            raise DomainError("point arity differs from the variable list")
        return bool(self.admitted[tuple(int(v) % self.modulus for v in x)])

    def points(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in p) for p in np.argwhere(self.admitted)]

    def lift(self, modulus: int) -> CosetCondition:
        if modulus % self.modulus:
            raise DomainError(f"cannot lift modulus {self.modulus} to {modulus}")
        _check_size(modulus, self.nvars)
        r = modulus // self.modulus
        return CosetCondition(
            self.variables, modulus, np.tile(self.admitted, (r,) * self.nvars), self.clauses, self.label
        )

    def same_set(self, other: CosetCondition) -> bool:
        if self.variables != other.variables:
            return False
        m = math.lcm(self.modulus, other.modulus)
        return bool(np.array_equal(self.lift(m).admitted, other.lift(m).admitted))

    def with_label(self, label: str) -> CosetCondition:
        return CosetCondition(self.variables, self.modulus, self.admitted, self.clauses, label)

    def describe(self) -> str:
        return render_clauses(self.clauses, self.variables)

    def to_json(self) -> dict:
        ok, basis = lattice_test(self)
        return {
            "variables": list(self.variables),
            "modulus": self.modulus,
            "admitted_count": self.count(),
            "total": self.modulus**self.nvars,
            "simplified": self.describe() if self.clauses is not None else None,
            "clauses": None
            if self.clauses is None
            else [[d.to_json() for d in cl] for cl in self.clauses],
            "lattice": [list(r) for r in basis] if ok else None,
            "label": self.label,
        }


# -- analysis -------------------------------------------------------------------

def _integer_form(p: MultiPoly) -> tuple[np.ndarray, list[int], int]:
    num, den = p.integer_numerator()
    exps = np.array(list(num.keys()) or [[0] * p.nvars], dtype=np.int64).reshape(-1, p.nvars)
    coeffs = list(num.values()) or [0]
    return exps, coeffs, den


def zero_set(p: MultiPoly, modulus: int, backend: str | None = None) -> np.ndarray:
    """Mask of x mod ``modulus`` with (D*p)(x) = 0 mod ``modulus``, D the common denominator of p."""
    _check_size(modulus, p.nvars)
    exps, coeffs, _ = _integer_form(p)
    return kernels.zero_mask(exps, coeffs, modulus, backend=backend)


def analyze(p: MultiPoly, q: int, k: int | None = None, backend: str | None = None) -> CosetCondition:
    """Residues x mod q^k at which p(x) is q-integral.

    With p = N/D (N integral, D the common denominator) this is
    ``N(x) = 0 mod q^v`` where v is the q-adic valuation of D; the set is
    computed on (Z/q^v)^n and tiled up to q^k.
    """
    if q < 2 or len(factorize(q)) != 1 or factorize(q)[0][1] != 1:
        raise DomainError(f"{q} is not prime")
    _, _, den = _integer_form(p)
    v = valuation(den, q)
    k = v if k is None else k
    if k < v:
        raise DomainError(f"power {k} is below the {q}-adic valuation {v} of the denominator")
    m = q**k
    _check_size(m, p.nvars)
    if v == 0:
        return CosetCondition.full(p.variables, m, label=f"{q}-integral everywhere")
    base = zero_set(p, q**v, backend=backend)
    mask = np.tile(base, (q ** (k - v),) * p.nvars) if k > v else base
    return CosetCondition(tuple(p.variables), m, mask, None, f"{q}-integrality mod {q}^{k}")


def integral_residues(p: MultiPoly, modulus: int, backend: str | None = None) -> CosetCondition:
    """Residues x mod ``modulus`` with p(x) integral; the denominator must divide the modulus."""
    _, _, den = _integer_form(p)
    if modulus % den:
        raise DomainError(f"denominator {den} does not divide {modulus}")
    _check_size(modulus, p.nvars)
    base = zero_set(p, den, backend=backend)
    return CosetCondition(tuple(p.variables), modulus, np.tile(base, (modulus // den,) * p.nvars), None, "integrality")


# -- lattices ---------------------------------------------------------------------

def _lattice_membership(hnf: Sequence[Sequence[int]], grid: list[np.ndarray], modulus: int) -> np.ndarray:
    """Vectorized membership in the lattice with upper-triangular full-rank basis ``hnf``."""
    n = len(grid)
    rem = [g.copy() for g in grid]
    ok = np.ones(grid[0].shape, dtype=bool)
    for i in range(n):
        row = hnf[i]
        d = row[i]
        ok &= rem[i] % d == 0
        c = rem[i] // d
        for j in range(i, n):
            if row[j]:
                rem[j] = rem[j] - c * row[j]
    return ok


def lattice_test(c: CosetCondition) -> tuple[bool, tuple[tuple[int, ...], ...] | None]:
    """Whether the admitted set is a subgroup; if so the HNF basis of its preimage lattice."""
    n, m = c.nvars, c.modulus
    if not c.admitted[(0,) * n]:
        return False, None
    rows = [tuple(m * int(i == j) for j in range(n)) for i in range(n)]
    hnf = hermite_normal_form(rows, n)
    pts = np.argwhere(c.admitted)
    while True:
        cols = [pts[:, j].astype(np.int64) for j in range(n)]
        member = _lattice_membership(hnf, cols, m)
        if member.all():
            break
        bad = tuple(int(v) for v in pts[int(np.argmin(member))])
        hnf = hermite_normal_form(list(hnf) + [bad], n)
    if m**n // lattice_index(hnf) != len(pts):
        return False, None
    return True, tuple(hnf)


def lattice_clauses(basis: Sequence[Sequence[int]], modulus: int) -> tuple[Clause, ...]:
    """Single-divisibility clauses cutting out the lattice (which contains modulus*Z^n)."""
    n = len(basis)
    if all(basis[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        return tuple((Divisibility(basis[i][i], tuple(int(k == i) for k in range(n))),) for i in range(n) if basis[i][i] != 1)
    # dual rows: y with y . b = 0 mod modulus for every basis row b
    from fractions import Fraction

    from .exact import _rref

    mat = [[Fraction(int(basis[j][i])) for j in range(n)] + [Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    red, _ = _rref(mat, n)
    inv_t = [row[n:] for row in red]  # inverse of B^T
    out = []
    for row in inv_t:
        y = [int(v * modulus) for v in row]
        g = math.gcd(modulus, *y)
        d = Divisibility(modulus // g, tuple(v // g for v in y))
        if d.modulus > 1:
            out.append((_nice(d),))
    return tuple(sorted(set(out), key=lambda cl: (cl[0].modulus, cl[0].coeffs)))


def _nice(d: Divisibility) -> Divisibility:
    """Pick the unit multiple with the smallest coefficient sum (ties: lexicographic)."""
    m = d.modulus
    best = min(
        (sum(t), t) for t in (tuple(u * c % m for c in d.coeffs) for u in _units(m))
    )
    return Divisibility(m, best[1])


@lru_cache(maxsize=None)
def _units(m: int) -> tuple[int, ...]:
    return tuple(u for u in range(1, m) if math.gcd(u, m) == 1)


def combine_lattices(a: Sequence[Sequence[int]], ma: int, b: Sequence[Sequence[int]], mb: int, n: int):
    """Intersection of lattices containing ma*Z^n and mb*Z^n with gcd(ma, mb) = 1."""
    if math.gcd(ma, mb) != 1:
        raise DomainError("combine_lattices needs coprime moduli")
    rows = [tuple(mb * x for x in r) for r in a] + [tuple(ma * x for x in r) for r in b]
    return tuple(hermite_normal_form(rows, n))


# -- simplification -----------------------------------------------------------------

def _prime_power(m: int) -> tuple[int, int] | None:
    f = factorize(m)
    return f[0] if len(f) == 1 else None


@lru_cache(maxsize=None)
def _hyperplane_candidates(q: int, k: int, n: int) -> tuple[Divisibility, ...]:
    out: dict[tuple, Divisibility] = {}
    for j in range(1, k + 1):
        mod = q**j
        seen: set[tuple[int, ...]] = set()
        for coeffs in itertools.product(range(mod), repeat=n):
            if coeffs in seen or all(c % q == 0 for c in coeffs):
                continue
            orbit = {tuple(u * c % mod for c in coeffs) for u in _units(mod)}
            seen |= orbit
            d = _nice(Divisibility(mod, coeffs))
            out[(mod, d.coeffs)] = d
    return tuple(out.values())


def _union_search(c: CosetCondition) -> Clause | None:
    pp = _prime_power(c.modulus)
    if pp is None or c.modulus**c.nvars > _UNION_SEARCH_POINTS:
        return None
    q, k = pp
    inside = []
    for d in _hyperplane_candidates(q, k, c.nvars):
        mk = d.mask(c.modulus, c.nvars)
        if not (mk & ~c.admitted).any():
            inside.append((d, mk))
    # prefer coarse hyperplanes (small modulus), then nicer forms
    inside.sort(key=lambda t: (t[0].modulus, sum(1 for x in t[0].coeffs if x), sum(t[0].coeffs), t[0].coeffs))
    target = c.admitted
    for r in range(1, MAX_DISJUNCTS + 1):
        for combo in itertools.combinations(inside, r):
            u = np.zeros_like(target)
            for _, mk in combo:
                u |= mk
            if np.array_equal(u, target):
                # list disjuncts with the simplest first, earlier variables first
                return tuple(sorted((d for d, _ in combo), key=lambda d: (sum(1 for x in d.coeffs if x), [-x for x in d.coeffs])))
    return None


def _crt_components(c: CosetCondition) -> list[CosetCondition] | None:
    """Split into prime-power components when the set is a CRT product."""
    fac = factorize(c.modulus)
    if len(fac) < 2:
        return None
    comps = []
    prod = np.ones_like(c.admitted)
    for q, e in fac:
        m = q**e
        r = c.modulus // m
        view = c.admitted.reshape(sum(((r, m) for _ in range(c.nvars)), ()))
        proj = view.any(axis=tuple(range(0, 2 * c.nvars, 2)))
        comp = CosetCondition(c.variables, m, proj, None, c.label)
        comps.append(comp)
        prod &= comp.lift(c.modulus).admitted
    return comps if np.array_equal(prod, c.admitted) else None


def simplify(c: CosetCondition) -> CosetCondition:
    """Attach an equivalent CNF of divisibility clauses when one is found (verified by enumeration)."""
    n, m = c.nvars, c.modulus
    clauses: tuple[Clause, ...] | None = None
    if c.is_full():
        clauses = ()
    else:
        ok, basis = lattice_test(c)
        if ok:
            clauses = lattice_clauses(basis, m)
        else:
            union = _union_search(c)
            if union is not None:
                clauses = (union,)
            else:
                comps = _crt_components(c)
                if comps is not None:
                    parts = [simplify(x).clauses for x in comps]
                    if all(p is not None for p in parts):
                        clauses = tuple(cl for p in parts for cl in p)
    if clauses is None:
        return CosetCondition(c.variables, m, c.admitted, None, c.label)
    if not np.array_equal(clauses_mask(clauses, m, n), c.admitted):
        raise InvariantError(f"simplified clauses {render_clauses(clauses, c.variables)} do not re-enumerate")
    return CosetCondition(c.variables, m, c.admitted, clauses, c.label)


# -- conjunction ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CRTCondition:
    """Conjunction of conditions at pairwise coprime prime-power moduli."""

    variables: tuple[str, ...]
    components: tuple[CosetCondition, ...]
    label: str = ""

    @property
    def modulus(self) -> int:
        return math.prod(c.modulus for c in self.components)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def contains(self, x: Sequence[int]) -> bool:
        return all(c.contains(x) for c in self.components)

    def component(self, q: int) -> CosetCondition:
        for c in self.components:
            if c.modulus % q == 0:
                return c
        return CosetCondition.full(self.variables, 1)

    def count(self) -> int:
        return math.prod(c.count() for c in self.components)

    def describe(self) -> str:
        parts = [c.describe() for c in self.components if not c.is_full()]
        return " ∧ ".join(parts) if parts else "true"

    def is_full(self) -> bool:
        return all(c.is_full() for c in self.components)

    def to_json(self) -> dict:
        ok, basis = lattice_test(self)
        return {
            "variables": list(self.variables),
            "modulus": self.modulus,
            "components": [c.to_json() for c in self.components],
            "simplified": self.describe(),
            "lattice": [list(r) for r in basis] if ok else None,
            "label": self.label,
        }


def conjoin(conditions: Iterable, label: str = "") -> CosetCondition | CRTCondition:
    """Intersection of conditions over the same variables, lifted to the lcm modulus.

    When the lcm grid would exceed the enumeration cap the result is kept as
    a :class:`CRTCondition` of per-prime components.
    """
    conds: list[CosetCondition] = []
    for c in conditions:
        conds.extend(c.components if isinstance(c, CRTCondition) else [c])
    if not conds:
        raise DomainError("conjoin needs at least one condition")
    variables = conds[0].variables
    for c in conds:
        if c.variables != variables:
            raise DomainError(f"variable lists differ: {variables} vs {c.variables}")
    n = len(variables)
    total = math.lcm(*(c.modulus for c in conds))
    if total**n <= MAX_POINTS:
        mask = np.ones((total,) * n, dtype=bool)
        for c in conds:
            mask &= c.lift(total).admitted
        out = simplify(CosetCondition(variables, total, mask, None, label))
        if out.clauses is None and all(c.clauses is not None for c in conds):
            merged = tuple(cl for c in conds for cl in c.clauses)
            if np.array_equal(clauses_mask(merged, total, n), mask):
                out = CosetCondition(variables, total, mask, merged, label)
        return out
    by_prime: dict[int, list[CosetCondition]] = {}
    for c in conds:
        pp = _prime_power(c.modulus) if c.modulus > 1 else None
        if c.modulus == 1:
            continue
        if pp is None:
            split = _crt_components(c)
            if split is None:
                raise DomainError("a composite-modulus condition is not a CRT product")
            for s in split:
                by_prime.setdefault(_prime_power(s.modulus)[0], []).append(s)
        else:
            by_prime.setdefault(pp[0], []).append(c)
    comps = tuple(conjoin(by_prime[q], label) for q in sorted(by_prime))
    return CRTCondition(variables, comps, label)


def _lattice_test_crt(c: CRTCondition):
    basis: tuple | None = None
    mod = 1
    n = c.nvars
    for comp in c.components:
        ok, b = lattice_test(comp)
        if not ok:
            return False, None
        if basis is None:
            basis, mod = b, comp.modulus
        else:
            basis = combine_lattices(basis, mod, b, comp.modulus, n)
            mod *= comp.modulus
    if basis is None:
        basis = tuple(hermite_normal_form([tuple(int(i == j) for j in range(n)) for i in range(n)], n))
    return True, basis


_lattice_test_single = lattice_test


def lattice_test(c) -> tuple[bool, tuple[tuple[int, ...], ...] | None]:  # noqa: F811
    """Whether the admitted set is a subgroup; if so the HNF basis of the corresponding lattice."""
    if isinstance(c, CRTCondition):
        return _lattice_test_crt(c)
    return _lattice_test_single(c)


# -- reparametrization and descent ------------------------------------------------------

def bump(name: str, times: int = 1) -> str:
    """``a`` -> ``a1`` -> ``a2``: the name after another substitution."""
    head = name.rstrip("0123456789")
    idx = int(name[len(head):] or 0)
    return f"{head}{idx + times}"


@dataclass(frozen=True)
class Frame:
    """Substitution x_i = scales[i] * y_i from original to current variables.

    ``steps`` records, for every substitution, the per-variable factors and the
    variable names valid afterwards, so older names can still be resolved.
    """

    original: tuple[str, ...]
    steps: tuple[tuple[tuple[int, ...], tuple[str, ...]], ...] = ()

    @classmethod
    def identity(cls, variables: Sequence[str]) -> Frame:
        return cls(tuple(variables))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.steps[-1][1] if self.steps else self.original

    @property
    def scales(self) -> tuple[int, ...]:
        out = [1] * len(self.original)
        for factors, _ in self.steps:
            out = [a * b for a, b in zip(out, factors)]
        return tuple(out)

    def substitute(self, factors: Sequence[int]) -> Frame:
        """Adopt x_i = factors[i] * x_i' for every i with factors[i] > 1 (renaming those)."""
        factors = tuple(int(f) for f in factors)
        if len(factors) != len(self.original) or min(factors) < 1:
            raise DomainError("one positive factor per variable")
        if all(f == 1 for f in factors):
            return self
        names = tuple(bump(v) if f > 1 else v for v, f in zip(self.variables, factors))
        return Frame(self.original, self.steps + ((factors, names),))

    def apply(self, p: MultiPoly) -> MultiPoly:
        if p.variables != self.original:
            raise DomainError("polynomial variables differ from the frame's original variables")
        return p.scale_variables(self.scales).rename(self.variables)

    def express(self, name: str) -> tuple[int, int]:
        """(index, multiplier) with the (possibly older) variable ``name`` = multiplier * current variable."""
        frames = [self.original] + [names for _, names in self.steps]
        last = max((k for k, names in enumerate(frames) if name in names), default=None)
        if last is None:
            raise DomainError(f"variable {name} is not in the substitution history")
        i = frames[last].index(name)
        mult = math.prod(f[i] for f, _ in self.steps[last:])
        return i, mult

    def pull(self, variables: Sequence[str], coeffs: Sequence[int]) -> tuple[int, ...]:
        """Coefficients over the current variables of the form sum coeffs[k] * variables[k]."""
        out = [0] * len(self.original)
        for v, c in zip(variables, coeffs):
            i, mult = self.express(v)
            out[i] += c * mult
        return tuple(out)

    def lattice_to_original(self, basis: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
        n = len(self.original)
        sc = self.scales
        rows = [tuple(int(r[j]) * sc[j] for j in range(n)) for r in basis]
        return tuple(hermite_normal_form(rows, n))

    def render(self) -> str:
        return ", ".join(
            f"{pretty(o)}={s}{pretty(v)}" for o, v, s in zip(self.original, self.variables, self.scales) if s != 1
        )


def coordinate_lattice(c: CosetCondition) -> tuple[int, ...] | None:
    """Exponent-free description: d with admitted = {x : d_i | x_i}, else None."""
    n, m = c.nvars, c.modulus
    pts = np.argwhere(c.admitted)
    if not len(pts):
        return None
    d = tuple(math.gcd(m, *(int(v) for v in pts[:, j])) for j in range(n))
    cand = CosetCondition.from_clauses(
        c.variables, [(Divisibility(dj, tuple(int(k == j) for k in range(n))),) for j, dj in enumerate(d) if dj > 1], m
    )
    return d if np.array_equal(cand.admitted, c.admitted) else None


def dependent_axes(mask: np.ndarray) -> list[int]:
    return [j for j in range(mask.ndim) if not np.array_equal(np.roll(mask, 1, axis=j), mask)]


@dataclass(frozen=True, eq=False)
class DescentStep:
    prime: int
    frame: Frame  # frame in which the condition was found
    evidence: CosetCondition  # leading set or projected exact set, in frame variables
    source: str  # "leading" or "projection"
    factors: tuple[int, ...]  # adopted substitution (all ones when stopping)
    original: CosetCondition | None  # adopted condition in the original variables

    def describe(self) -> str:
        if self.original is not None:
            return self.original.describe()
        return self.evidence.describe()


@dataclass(frozen=True, eq=False)
class DescentResult:
    prime: int
    steps: tuple[DescentStep, ...]
    frame: Frame
    integral: bool
    residual: CosetCondition | None  # simplified obstruction when the descent stops

    def describe(self) -> str:
        parts = [s.describe() for s in self.steps]
        return "; then ".join(parts) if parts else "true"


def descent(p: MultiPoly, q: int, frame: Frame | None = None, max_steps: int = 32, backend: str | None = None) -> DescentResult:
    """Peel q-adic obstructions to integrality of p by coordinate substitutions.

    Each round looks at the leading obstruction {x mod q : N(x) = 0 mod q}
    (p = N/D). If it is a coordinate lattice {q | x_i, i in S} the
    substitution x_i = q x_i' is adopted. Otherwise the exact set mod q^v is
    projected onto the variables the leading set depends on, and adopted if
    that projection is a coordinate lattice. Otherwise the descent stops and
    reports the simplified obstruction.
    """
    frame = frame or Frame.identity(p.variables)
    n = p.nvars
    steps: list[DescentStep] = []
    for _ in range(max_steps):
        cur = frame.apply(p)
        _, _, den = _integer_form(cur)
        v = valuation(den, q)
        if v == 0:
            return DescentResult(q, tuple(steps), frame, True, None)
        lead = CosetCondition(frame.variables, q, zero_set(cur, q, backend=backend), None, f"leading {q}-obstruction")
        d = coordinate_lattice(lead)
        source = "leading"
        evidence = lead
        if d is None or all(x == 1 for x in d):
            m = q**v
            if m**n > MAX_POINTS:
                return DescentResult(q, tuple(steps), frame, False, simplify(lead))
            exact = analyze(cur, q, v, backend=backend)
            dep = dependent_axes(lead.admitted)
            other = tuple(j for j in range(n) if j not in dep)
            proj = exact.admitted.any(axis=other, keepdims=True) if other else exact.admitted
            proj = np.broadcast_to(proj, exact.admitted.shape).copy()
            evidence = CosetCondition(frame.variables, m, proj, None, f"projection of the exact set mod {q}^{v}")
            d = coordinate_lattice(evidence)
            source = "projection"
            if d is None or all(x == 1 for x in d):
                return DescentResult(q, tuple(steps), frame, False, _coarsest(lead, simplify(exact)))
        evidence = simplify(evidence)
        new = frame.substitute(d)
        sc = new.scales
        orig = CosetCondition.from_clauses(
            p.variables,
            [(Divisibility(sc[j], tuple(int(k == j) for k in range(n))),) for j in range(n) if d[j] > 1],
            label=f"{q}-adic step",
        )
        steps.append(DescentStep(q, frame, evidence, source, tuple(d), orig))
        frame = new
    raise InvariantError(f"{q}-adic descent did not terminate in {max_steps} steps")


def _coarsest(lead: CosetCondition, exact: CosetCondition) -> CosetCondition:
    """Report the obstruction at the smallest modulus that already describes the exact set."""
    if exact.same_set(lead):
        return simplify(lead)
    return exact
