"""Hodge and kappa intersection numbers in genus 3 and 4: the hyperelliptic
recursion, the genus 4 test-surface solve, proportionality on A_g, and the
genus 3 kappa table with an independent psi-integral cross-check."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .chowring import load_json, load_topform, monomial_ratio, mumford_presentation, mumford_reduce
from .errors import DomainError, InconsistentSystemError, InvariantError
from .exact import as_rational, bernoulli, format_rational, solve_linear

# -- hyperelliptic recursion ---------------------------------------------------------

_H: dict[int, Fraction] = {1: Fraction(1, 96)}


def h_g(g: int) -> Fraction:
    """lambda^{2g-1} . [H_g-bar]_Q via the quadratic recursion."""
    if not isinstance(g, int) or isinstance(g, bool) or g < 1:
        raise DomainError("h_g needs an integer g >= 1")
    for n in range(2, g + 1):
        if n not in _H:
            _H[n] = _h_sum(n, range(1, n))
    return _H[g]


def _h_term(g: int, i: int) -> Fraction:
    return i * (i + 1) * (g - i) * (g - i + 1) * math.comb(2 * g - 2, 2 * i - 1) * _H[i] * _H[g - i]


def _h_sum(g: int, indices) -> Fraction:
    return Fraction(2, 2 * g + 1) * sum((_h_term(g, i) for i in indices), Fraction(0))


def h_g_folded(g: int) -> Fraction:
    """Same recursion summing over i <= g/2 and doubling the off-diagonal terms."""
    if g == 1:
        return h_g(1)
    h_g(g - 1)
    total = Fraction(0)
    for i in range(1, g // 2 + 1):
        t = _h_term(g, i)
        total += t if 2 * i == g else 2 * t
    return Fraction(2, 2 * g + 1) * total


# -- paper-data registry ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _surfaces_data() -> dict:
    return load_json("genus4_surfaces.json")


def registry(key: str):
    entry = _surfaces_data()["registry"][key]
    v = entry["value"]
    if isinstance(v, dict):
        return {k: as_rational(x) for k, x in v.items()}
    return as_rational(v)


def citation(key: str) -> str:
    return _surfaces_data()["registry"][key]["citation"]


def lambda6_m3() -> Fraction:
    """lambda^6 on M_3-bar as h_3 / 9, checked against the top form's leading entry."""
    val = h_g(3) / registry("H3_Q_over_lambda")
    lead = load_topform().table.value((6, 0, 0))
    if val != lead:
        raise InvariantError(f"h_3/9 = {val} differs from the top-form value {lead}")
    return val


# -- test surfaces ---------------------------------------------------------------------

@dataclass(frozen=True)
class TestSurfaceRow:
    label: str
    values: Mapping[str, Fraction]
    target: Fraction
    citation: str = ""

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class SurfaceSolution:
    determined: dict[str, Fraction]
    free: tuple[str, ...]
    progress: tuple[tuple[str, tuple[str, ...]], ...]  # row label -> coefficients newly fixed


def load_test_surfaces() -> tuple[list[TestSurfaceRow], dict[str, str], dict[str, Fraction]]:
    data = _surfaces_data()
    rows = [
        TestSurfaceRow(
            r["label"], {k: as_rational(v) for k, v in r["values"].items()}, as_rational(r["target"]), r["citation"]
        )
        for r in data["rows"]
    ]
    unknowns = dict(data["unknowns"])
    known = {k: as_rational(v) for k, v in data["known"].items()}
    return rows, unknowns, known


def _system(rows, unknowns, known):
    names = list(unknowns)
    by_class = {cls: name for name, cls in unknowns.items()}
    mat, rhs = [], []
    for r in rows:
        line = [Fraction(0)] * len(names)
        b = r.target
        for cls, v in r.values.items():
            if cls in known:
                b -= known[cls] * v
            elif cls in by_class:
                line[names.index(by_class[cls])] += v
            else:
                raise DomainError(f"row {r.label}: class {cls} is not in the ansatz")
        mat.append(line)
        rhs.append(b)
    return names, mat, rhs


def solve_test_surfaces(rows=None, unknowns=None, known=None) -> SurfaceSolution:
    """Solve the ansatz coefficients row by row; undetermined ones are reported free."""
    if rows is None:
        rows, unknowns, known = load_test_surfaces()
    names, mat, rhs = _system(rows, unknowns, known)
    progress = []
    fixed: set[str] = set()
    for k in range(1, len(rows) + 1):
        try:
            x, _ = solve_linear(mat[:k], rhs[:k])
        except InconsistentSystemError as exc:
            raise InconsistentSystemError(
                f"test surface {rows[exc.row].label} is inconsistent with the earlier rows", row=exc.row
            ) from None
        now = {n for n, v in zip(names, x) if v is not None}
        progress.append((rows[k - 1].label, tuple(n for n in names if n in now - fixed)))
        fixed |= now
    x, free = solve_linear(mat, rhs)
    det = {n: v for n, v in zip(names, x) if v is not None}
    for line, b, r in zip(mat, rhs, rows):
        resid = sum((c * det.get(n, Fraction(0)) for c, n in zip(line, names) if c), Fraction(0)) - b
        if any(c and n not in det for c, n in zip(line, names)) or resid != 0:
            raise InvariantError(f"row {r.label} has a nonzero residual")
    return SurfaceSolution(det, tuple(names[i] for i in free), tuple(progress))


# -- genus 4 Hodge numbers --------------------------------------------------------------

def lambda7_delta1sq() -> Fraction:
    """lambda^7 delta_1^2 on M_4-bar from the splitting over delta_1."""
    return registry("binomial_7_1") * registry("lambda_M11_Q") * registry("minus_K_factor") * lambda6_m3()


@dataclass(frozen=True)
class Lambda9Result:
    lambda9: Fraction
    restricted: tuple[Fraction, Fraction]  # coefficients of lambda^2, delta_1^2
    lambda7_kappa2: Fraction
    lambda7_delta1sq: Fraction
    h: Fraction
    h4: Fraction


def lambda9_m4() -> Lambda9Result:
    sol = solve_test_surfaces()
    if "h" not in sol.determined:
        raise InvariantError("the test surfaces do not determine the delta_1^2 coefficient")
    h = sol.determined["h"]
    base = registry("H4_restricted")
    rel = registry("kernel_relation")
    k2, l2, d2 = rel["κ₂"], rel["λ²"], rel["δ₁²"]
    # 3 kappa_2 = 3 (-l2 lambda^2 - d2 delta_1^2) / k2
    lam_coef = base["λ²"] - base["κ₂"] * l2 / k2
    del_coef = h - base["κ₂"] * d2 / k2
    l7d = lambda7_delta1sq()
    h4 = h_g(4)
    lam9 = (2 * h4 - del_coef * l7d) / lam_coef
    l7k2 = (-l2 * lam9 - d2 * l7d) / k2
    return Lambda9Result(lam9, (lam_coef, del_coef), l7k2, l7d, h, h4)


def lambda3_cubed() -> tuple[Fraction, Fraction, Fraction]:
    """(lambda_3^3, the Mumford-relation factor, lambda^9)."""
    c = mumford_reduce()
    l9 = lambda9_m4().lambda9
    return c * l9, c, l9


def proportionality(g: int) -> Fraction:
    """prod_{i=1}^g |B_{2i}| / (4i): lambda_1 ... lambda_g on the toroidal compactification of A_g."""
    if not isinstance(g, int) or g < 1:
        raise DomainError("proportionality needs g >= 1")
    return math.prod((abs(bernoulli(2 * i)) / (4 * i) for i in range(1, g + 1)), start=Fraction(1))


def top_lambda1_on_A(g: int) -> tuple[Fraction, Fraction]:
    """(lambda_1^{g(g+1)/2} on A_g-tilde, the ratio to lambda_1 ... lambda_g)."""
    top = g * (g + 1) // 2
    pres = mumford_presentation(g, top)
    mono = (top,) + (0,) * (g - 1)
    ratio = monomial_ratio(pres, mono, (1,) * g)
    return ratio * proportionality(g), ratio


@dataclass(frozen=True)
class SchottkyResult:
    multiple: int
    qclass_multiple: Fraction
    lambda10_A4: Fraction
    ratio: Fraction
    lambda9_M4: Fraction


def schottky_multiple() -> SchottkyResult:
    l10, ratio = top_lambda1_on_A(4)
    l9 = lambda9_m4().lambda9
    m = l9 / l10
    if m.denominator != 1:
        raise InvariantError(f"Jacobian locus multiple {m} is not an integer")
    return SchottkyResult(int(m), m / 2, l10, ratio, l9)


# -- kappa numbers ----------------------------------------------------------------------

KAPPA_BASIS = ("κ₁", "κ₂", "κ₃", "κ₄", "κ₅", "κ₆")


@dataclass(frozen=True)
class KappaTable:
    genus: int
    entries: dict[tuple[int, ...], Fraction]

    def __post_init__(self):
        for e in self.entries:
            if sum((i + 1) * k for i, k in enumerate(e)) != 3 * self.genus - 3:
                raise DomainError(f"kappa monomial {e} does not have top weight")

    def value(self, exps: Sequence[int]) -> Fraction:
        return self.entries[tuple(exps)]

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "basis": list(KAPPA_BASIS[: 3 * self.genus - 3]),
            "entries": [{"exps": list(e), "value": format_rational(v)} for e, v in self.entries.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> KappaTable:
        return cls(int(data["genus"]), {tuple(x["exps"]): as_rational(x["value"]) for x in data["entries"]})


def load_kappa_table() -> KappaTable:
    return KappaTable.from_json(load_json("kappa_m3.json"))


def kappa_name(exps: Sequence[int]) -> str:
    parts = []
    for i, k in enumerate(exps):
        if k:
            parts.append(KAPPA_BASIS[i] + ("" if k == 1 else str(k).translate(str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹"))))
    return "".join(parts)


def witten_value(g: int) -> Fraction:
    if g < 1:
        raise DomainError("genus must be positive")
    return Fraction(1, 24**g * math.factorial(g))


def witten_check(g: int = 3) -> tuple[Fraction, Fraction, bool]:
    if g != 3:
        raise DomainError("only the genus 3 kappa table is stored")
    table = load_kappa_table()
    stored = table.value((0, 0, 0, 0, 0, 1))
    formula = witten_value(g)
    return stored, formula, stored == formula


def _dfact(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@lru_cache(maxsize=None)
def psi_integral(g: int, ds: tuple[int, ...]) -> Fraction:
    """<tau_{d_1} ... tau_{d_n}>_g by the string equation and the DVV recursion."""
    ds = tuple(sorted(ds, reverse=True))
    n = len(ds)
    if any(d < 0 for d in ds) or g < 0:
        return Fraction(0)
    if sum(ds) != 3 * g - 3 + n or 2 * g - 2 + n <= 0:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and ds == (1,):
        return Fraction(1, 24)
    if ds[-1] == 0:  # string equation
        rest = ds[:-1]
        return sum(
            (psi_integral(g, rest[:j] + (rest[j] - 1,) + rest[j + 1:]) for j in range(len(rest)) if rest[j] > 0),
            Fraction(0),
        )
    k = ds[0] - 1
    S = ds[1:]
    total = Fraction(0)
    for j, d in enumerate(S):
        others = S[:j] + S[j + 1:]
        total += Fraction(_dfact(2 * k + 2 * d + 1), _dfact(2 * d - 1)) * psi_integral(g, (d + k,) + others)
    for r in range(k):
        s = k - 1 - r
        w = _dfact(2 * r + 1) * _dfact(2 * s + 1)
        total += Fraction(w, 2) * psi_integral(g - 1, (r, s) + S)
        idx = range(len(S))
        for size in range(len(S) + 1):
            for I in itertools.combinations(idx, size):
                left = tuple(S[i] for i in I)
                right = tuple(S[i] for i in idx if i not in I)
                for g1 in range(g + 1):
                    total += Fraction(w, 2) * psi_integral(g1, (r,) + left) * psi_integral(g - g1, (s,) + right)
    return total / _dfact(2 * k + 3)


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def kappa_from_psi(g: int, exps: Sequence[int]) -> Fraction:
    """Integral of prod kappa_i^{exps[i-1]} over M_g-bar from psi integrals.

    Uses kappa_{b_1}...kappa_{b_m} = sum over set partitions P of
    (-1)^{m-|P|} pi_*(prod_B psi_B^{b_B + 1}), the inverse of pushing forward
    psi products as a sum over permutations.
    """
    bs = [i + 1 for i, k in enumerate(exps) for _ in range(k)]
    m = len(bs)
    total = Fraction(0)
    for part in _set_partitions(list(range(m))):
        sign = (-1) ** (m - len(part))
        ds = tuple(sum(bs[i] for i in B) + 1 for B in part)
        total += sign * psi_integral(g, ds)
    return total
