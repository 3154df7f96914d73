"""Exact arithmetic substrate: rationals, sparse multivariate polynomials,
Bernoulli numbers, integer factorization and small exact linear algebra.

Rationals are :class:`fractions.Fraction`, which is always reduced with a
positive denominator, so equality is structural.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DomainError, InconsistentSystemError

Rational = Fraction
Exps = tuple[int, ...]

__all__ = [
    "Rational",
    "MultiPoly",
    "as_rational",
    "format_rational",
    "bernoulli",
    "factorize",
    "is_prime",
    "multinomial",
    "poly_eval",
    "solve_linear",
    "rank",
    "nullspace",
    "primitive",
    "hermite_normal_form",
    "lattice_index",
    "valuation",
]


def as_rational(x) -> Fraction:
    """Parse ints, Fractions and "p/q" strings. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise DomainError(f"cannot read {x!r} as an exact rational")


def format_rational(x: Fraction) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def multinomial(exps: Sequence[int]) -> int:
    out = math.factorial(sum(exps))
    for e in exps:
        out //= math.factorial(e)
    return out


def compositions(total: int, parts: int) -> Iterator[Exps]:
    """All exponent tuples of length ``parts`` summing to ``total``, lex descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Sparse polynomial with Fraction coefficients over named variables.

    ``terms`` maps dense exponent tuples to nonzero coefficients.
    """

    variables: tuple[str, ...]
    terms: Mapping[Exps, Fraction]

    def __post_init__(self):
        n = len(self.variables)
        if len(set(self.variables)) != n:
            raise DomainError(f"repeated variable names in {self.variables}")
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(k) for k in e)
            if len(e) != n or any(k < 0 for k in e):
                raise DomainError(f"bad exponent tuple {e} for variables {self.variables}")
            c = as_rational(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        clean = {e: c for e, c in clean.items() if c}
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "terms", clean)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, variables: Sequence[str]) -> MultiPoly:
        return cls(tuple(variables), {})

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> MultiPoly:
        return cls(tuple(variables), {(0,) * len(variables): as_rational(c)})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Sequence[int], c=1) -> MultiPoly:
        return cls(tuple(variables), {tuple(exps): as_rational(c)})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> MultiPoly:
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): Fraction(1)})

    @classmethod
    def linear(cls, variables: Sequence[str], coeffs: Sequence) -> MultiPoly:
        n = len(variables)
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = as_rational(c)
        return cls(tuple(variables), terms)

    # basic protocol ------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"MultiPoly({self.to_string()!r}, vars={list(self.variables)})"

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return d is None or degs == {d}

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coefficient((0,) * self.nvars)

    def common_denominator(self) -> int:
        return math.lcm(1, *(c.denominator for c in self.terms.values()))

    def integer_numerator(self) -> tuple[dict[Exps, int], int]:
        """Return ``(N, D)`` with D the lcm of denominators and N = D*self."""
        D = self.common_denominator()
        return {e: int(c * D) for e, c in self.terms.items()}, D

    # arithmetic ----------------------------------------------------------
    def _check(self, other: MultiPoly):
        if other.variables != self.variables:
            raise DomainError(f"variable mismatch {self.variables} vs {other.variables}")

    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(self.variables, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return MultiPoly(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = as_rational(other)
            return MultiPoly(self.variables, {e: c * v for e, v in self.terms.items()})
        self._check(other)
        terms: dict[Exps, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative powers are not polynomials")
        out = MultiPoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def homogeneous_part(self, d: int, grades: Sequence[int] | None = None) -> MultiPoly:
        grades = grades or (1,) * self.nvars
        return MultiPoly(
            self.variables,
            {e: c for e, c in self.terms.items() if sum(g * k for g, k in zip(grades, e)) == d},
        )

    def __call__(self, *point):
        return poly_eval(self, point)

    def substitute_linear(self, new_variables: Sequence[str], matrix: Sequence[Sequence]) -> MultiPoly:
        """Substitute ``old_i = sum_j matrix[i][j] * new_j``."""
        if len(matrix) != self.nvars:
            raise DomainError("substitution matrix needs one row per variable")
        images = [MultiPoly.linear(new_variables, row) for row in matrix]
        out = MultiPoly.zero(new_variables)
        for e, c in self.terms.items():
            term = MultiPoly.constant(new_variables, c)
            for img, k in zip(images, e):
                if k:
                    term = term * img**k
            out = out + term
        return out

    def scale_variables(self, scales: Sequence[int]) -> MultiPoly:
        """Substitute ``x_i -> scales[i] * x_i`` without renaming."""
        return MultiPoly(
            self.variables,
            {e: c * math.prod(s**k for s, k in zip(scales, e)) for e, c in self.terms.items()},
        )

    def rename(self, variables: Sequence[str]) -> MultiPoly:
        if len(variables) != self.nvars:
            raise DomainError("rename needs the same number of variables")
        return MultiPoly(tuple(variables), self.terms)

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "vars": list(self.variables),
            "terms": [
                {"coeff": format_rational(c), "exps": list(e)}
                for e, c in sorted(self.terms.items(), reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> MultiPoly:
        variables = tuple(data["vars"])
        terms: dict[Exps, Fraction] = {}
        for t in data["terms"]:
            coeff = t["coeff"]
            if not isinstance(coeff, (str, int)) or isinstance(coeff, bool):
                raise DomainError(f"coefficient {coeff!r} must be an exact 'p/q' string")
            e = tuple(t["exps"])
            terms[e] = terms.get(e, Fraction(0)) + as_rational(coeff)
        return cls(variables, terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> MultiPoly:
        return cls.from_json(json.loads(text))

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_rational(mag)}*{mono}"
            else:
                body = format_rational(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s


def poly_eval(p: MultiPoly, point: Sequence) -> Fraction:
    if len(point) != p.nvars:
        raise DomainError(f"point has {len(point)} coordinates, polynomial has {p.nvars} variables")
    xs = [as_rational(x) for x in point]
    total = Fraction(0)
    for e, c in p.terms.items():
        term = c
        for x, k in zip(xs, e):
            if k:
                term *= x**k
        total += term
    return total


# -- Bernoulli numbers ------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple[Fraction, ...]:
    # sum_{k=0}^{m} C(m+1, k) B_k = 0, B_0 = 1  (so B_1 = -1/2)
    B = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(math.comb(m + 1, k) * B[k] for k in range(m))
        B.append(-s / (m + 1))
    return tuple(B)


def bernoulli(n: int) -> Fraction:
    """B_n for even n >= 2 by the binomial recurrence."""
    if not isinstance(n, int) or n < 2 or n % 2:
        raise DomainError(f"bernoulli needs an even integer n >= 2, got {n!r}")
    return _bernoulli_table(n)[n]


# -- factorization ------------------------------------------------------------

# Deterministic for n < 3.3e24 (first 12 primes); the 7-base set already
# covers everything below 3.4e14.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise DomainError("primality test is only deterministic below 3.3e24")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, n):
        y, r, q, g = 2, 1, 1, 1
        f = lambda v: (v * v + c) % n  # noqa: E731
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = f(y)
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = f(y)
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = f(ys)
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"no factor found for {n}")


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as [(p, e), ...] with p increasing."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DomainError(f"factorize needs a positive integer, got {n!r}")
    counts: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            counts[p] = counts.get(p, 0) + 1
            n //= p
    # wheel trial division for small factors
    p, step = 7, 4
    while p * p <= n and p < 10**4:
        while n % p == 0:
            counts[p] = counts.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return sorted(counts.items())


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("valuation of zero is infinite")
    n, v = abs(n), 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- exact linear algebra -----------------------------------------------------

def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(matrix: Iterable[Sequence]) -> int:
    rows = [[as_rational(v) for v in row] for row in matrix]
    if not rows:
        return 0
    return len(_rref(rows, len(rows[0]))[1])


def solve_linear(
    matrix: Sequence[Sequence], rhs: Sequence
) -> tuple[list[Fraction | None], list[int]]:
    """Solve ``matrix @ x = rhs`` exactly.

    Returns ``(x, free)``: entries of x that the system does not determine are
    None and their indices are listed in ``free``. Raises
    InconsistentSystemError with the index of an offending row otherwise.
    """
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    aug = [[as_rational(v) for v in row] + [as_rational(b)] for row, b in zip(matrix, rhs)]
    red, pivots = _rref(aug, n)
    for i in range(len(pivots), m):
        if red[i][n] != 0:
            bad = _first_inconsistent_row(aug, n)
            raise InconsistentSystemError(f"inconsistent linear system at row {bad}", row=bad)
    x: list[Fraction | None] = [None] * n
    determined = set()
    for r, col in enumerate(pivots):
        if all(red[r][j] == 0 for j in range(n) if j != col):
            x[col] = red[r][n]
            determined.add(col)
    free = [j for j in range(n) if j not in determined]
    return x, free


def _first_inconsistent_row(aug: list[list[Fraction]], n: int) -> int:
    for k in range(1, len(aug) + 1):
        red, piv = _rref(aug[:k], n)
        if any(red[i][n] != 0 for i in range(len(piv), k)):
            return k - 1
    return len(aug) - 1


def integer_gcd_normalize(vec: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*vec)
    if g == 0:
        return tuple(vec)
    return tuple(v // g for v in vec)


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [as_rational(v) for v in vec]
    den = math.lcm(1, *(f.denominator for f in fr))
    return integer_gcd_normalize([int(f * den) for f in fr])


def hermite_normal_form(rows: Iterable[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Row-style HNF of the lattice spanned by integer ``rows`` in Z^n.

    Rows come out upper triangular with positive pivots and entries above
    each pivot reduced into ``[0, pivot)``.
    """
    work = [list(map(int, r)) for r in rows if any(r)]
    for r in work:
        if len(r) != n:
            raise DomainError("row length does not match the ambient dimension")
    basis: list[list[int]] = []
    pivots: list[int] = []
    for col in range(n):
        while True:
            nz = [r for r in work if r[col] != 0]
            if len(nz) <= 1:
                break
            p = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not p:
                    q = r[col] // p[col]
                    for j in range(n):
                        r[j] -= q * p[j]
            work = [r for r in work if any(r)]
        nz = [r for r in work if r[col] != 0]
        if not nz:
            continue
        p = nz[0]
        work = [r for r in work if r is not p]
        if p[col] < 0:
            p = [-v for v in p]
        basis.append(p)
        pivots.append(col)
    for i, col in enumerate(pivots):
        piv = basis[i][col]
        for k in range(i):
            q = basis[k][col] // piv
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[i])]
    return [tuple(r) for r in basis]


def lattice_index(basis: Sequence[Sequence[int]]) -> int:
    """Index in Z^n of a full-rank lattice given by an HNF basis."""
    n = len(basis[0]) if basis else 0
    if len(basis) != n:
        return 0
    return math.prod(basis[i][i] for i in range(n))


def nullspace(rows: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of ``{x : rows @ x = 0}``, one vector per free column."""
    mat = [[as_rational(v) for v in r] for r in rows]
    red, pivots = _rref(mat, n) if mat else ([], [])
    out = []
    for free in (j for j in range(n) if j not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for r, col in enumerate(pivots):
            v[col] = -red[r][free]
        out.append(primitive(v))
    return out
