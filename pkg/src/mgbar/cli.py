"""The ``mgbar`` command line."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from . import ampleness, integrality, lambdanum, nefcone
from .chowring import load_json, load_presentation, load_topform
from .errors import DomainError, InvariantError
from .exact import MultiPoly, factorize, format_rational

EXIT_OK, EXIT_DOMAIN, EXIT_INVARIANT, EXIT_USAGE = 0, 2, 3, 64
KINDS = ("derived", "paper-data", "hybrid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@lru_cache(maxsize=None)
def _citations() -> dict[str, str]:
    return load_json("citations.json")["entries"]


@dataclass
class ReportEntry:
    command: str
    inputs: dict
    result: str
    citation: str
    kind: str = "derived"
    approx: str | None = None

    def __post_init__(self):
        if not self.citation:
            raise InvariantError(f"{self.command}: result without a citation")
        if self.kind not in KINDS:
            raise InvariantError(f"{self.command}: unknown derivation kind {self.kind}")


@dataclass
class Report:
    command: str
    entries: list[ReportEntry] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    approx: bool = False

    def add(self, label: str, value, kind: str = "derived", inputs: dict | None = None, cite: str | None = None):
        if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
            text = format_rational(Fraction(value))
            ap = f"~{float(value):.12g} (non-authoritative)" if self.approx else None
        else:
            text, ap = str(value), None
        cmd = f"{self.command}: {label}" if label else self.command
        self.entries.append(ReportEntry(cmd, inputs or {}, text, cite or _citations()[self.command], kind, ap))

    def to_json(self) -> dict:
        out = {"command": self.command}
        out.update(self.data)
        out["entries"] = [{k: v for k, v in asdict(e).items() if v is not None} for e in self.entries]
        if self.notes:
            out["notes"] = self.notes
        return out

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            line = f"{e.command} = {e.result}"
            if e.approx:
                line += f"  [{e.approx}]"
            lines.append(line)
            lines.append(f"    [{e.kind}; {e.citation}]")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def _frac_str(x) -> str:
    return format_rational(Fraction(x))


# -- nef cone --------------------------------------------------------------------------

def _cmd_nef_cone(args, rep: Report):
    g = args.genus
    cone = nefcone.nef_cone(g)
    rep.data = {
        "genus": g,
        "inequalities": [{"row": list(r), "family": list(f)} for r, f in zip(cone.inequalities, cone.families)],
        "rays": [list(r) for r in cone.rays],
    }
    for r, f in zip(cone.inequalities, cone.families):
        rep.add("inequality", f"{nefcone.format_inequality(r)}  from {', '.join(f)}", inputs={"genus": g})
    for r in cone.rays:
        rep.add("ray", nefcone.ray_to_divisor(r, g), inputs={"genus": g})
    rep.add("ray count", len(cone.rays), inputs={"genus": g})


# -- integrality ------------------------------------------------------------------------

def _load_poly(path: str) -> MultiPoly:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read polynomial file {path}: {exc}") from None
    if "form" in data:
        data = data["form"]
    return MultiPoly.from_json(data)


def _cmd_integrality(args, rep: Report):
    p = _load_poly(args.poly)
    c = integrality.analyze(p, args.prime, args.power)
    if args.simplify:
        c = integrality.simplify(c)
    info = c.to_json()
    rep.data = {"condition": info}
    inputs = {"poly": args.poly, "prime": args.prime, "power": args.power}
    rep.add("admitted", f"{info['admitted_count']}/{info['total']} residues mod {info['modulus']}", inputs=inputs)
    if args.simplify:
        rep.add("clauses", c.describe(), inputs=inputs)
    if info["lattice"] is not None:
        rep.add("lattice", info["lattice"], inputs=inputs)


# -- M2-bar and M3-bar -----------------------------------------------------------------

def _cmd_m2(args, rep: Report):
    pres = args.presentation or "m2bar.json"
    if args.presentation:
        load_presentation(pres)  # validate early
    rep.notes.append(
        "ring relation δ₁(λ+δ₁) is used in place of the printed λ(λ+δ₁), which contradicts the stated λδ₁ = −δ₁²"
    )
    if args.action == "degree":
        inputs = {"a": args.a, "b": args.b}
        if args.a is None or args.b is None:
            rep.add("D³", ampleness.m2_degree_form(pres).to_string())
        else:
            rep.add("D³", ampleness.m2_degree(args.a, args.b, pres), inputs=inputs)
    elif args.action == "conditions":
        r = ampleness.m2_conditions(pres)
        rep.data = {
            "per_prime": [c.to_json() for c in r.per_prime],
            "lattice": [list(x) for x in r.lattice],
            "checks": r.checks,
            "scan": {k: v for k, v in r.scan.items() if k != "form"},
        }
        for c in r.per_prime:
            rep.add(f"mod {c.modulus}", c.describe())
        rep.add("lattice", r.lattice)
        for k, v in r.checks.items():
            rep.add(k, v)
        rep.add("D²·2λ on (s,t)", r.scan["form"].to_string())
    else:
        r = ampleness.m2_minimize(seed_box=args.seed_box, presentation=pres)
        _minimize_report(rep, r)


def _minimize_report(rep: Report, r):
    rep.data = {
        "point": list(r.point),
        "value": _frac_str(r.value),
        "lattice_coords": list(r.lattice_coords),
        "rays": [list(x) for x in r.rays],
        "ray_values": [_frac_str(v) for v in r.ray_values],
        "ray_lattice_points": [list(x) for x in r.ray_lattice_points],
        "ray_bounds": list(r.ray_bounds),
        "box": [list(b) for b in r.box],
        "lattice_box": [list(b) for b in r.lattice_box],
        "examined": r.examined,
        "feasible": r.feasible,
        "certified": r.certified,
    }
    rep.add("point", r.point)
    rep.add("degree", r.value)
    if r.value.denominator == 1:
        rep.add("factorization", "·".join(f"{q}^{e}" if e > 1 else str(q) for q, e in factorize(int(r.value))))
    rep.add("certified", r.certified, cite="plumbing")
    rep.add("search", f"{r.examined} lattice points examined, {r.feasible} feasible", cite="plumbing")


def _cmd_m3(args, rep: Report):
    if args.action == "degree":
        if None in (args.a, args.b, args.c):
            rep.add("D⁶", load_topform().form.to_string(), kind="paper-data")
        else:
            rep.add("D⁶", ampleness.m3_degree(args.a, args.b, args.c), kind="paper-data",
                    inputs={"a": args.a, "b": args.b, "c": args.c})
    elif args.action == "mod-chain":
        form = load_topform().form
        _, den = form.integer_numerator()
        chain = []
        for q, _ in factorize(den):
            d = integrality.descent(form, q)
            steps = [s.describe() for s in d.steps]
            res = d.residual.describe() if d.residual is not None else None
            chain.append({"prime": q, "steps": steps, "integral": d.integral, "residual": res})
            text = d.describe() if d.steps else "no coordinate step"
            rep.add(f"prime {q}", text + (f"; residual {res}" if res else ""), inputs={"prime": q})
        rep.data = {"chain": chain}
    elif args.action == "conditions":
        r = ampleness.m3_conditions(use_external=not args.no_external)
        cite = _citations()["m3 conditions"]
        rows = []
        for e in r.entries:
            c = e.detail.get("citation", cite)
            label = e.source + (f" mod {e.prime}" if e.prime else "")
            if e.frame:
                label += f" [{e.frame}]"
            if "implied_by_previous" in e.detail:
                label += " (implied)" if e.detail["implied_by_previous"] else " (new)"
            rep.add(label, e.result, kind=e.kind, cite=c)
            rows.append({"source": e.source, "prime": e.prime, "frame": e.frame, "result": e.result,
                         "kind": e.kind, "citation": c,
                         **{k: v for k, v in e.detail.items() if k not in ("citation",)}})
        if r.lattice is not None:
            rep.add("lattice", r.lattice, kind="hybrid" if r.external_used else "derived")
        rep.data = {"conditions": rows, "lattice": [list(x) for x in r.lattice] if r.lattice else None}
    else:
        r = ampleness.m3_minimize(seed_box=args.seed_box)
        _minimize_report(rep, r)
        for e in rep.entries:
            e.kind = "hybrid"


# -- lambda / kappa ---------------------------------------------------------------------

def _cmd_hg(args, rep: Report):
    rep.add(f"h_{args.genus}", lambdanum.h_g(args.genus), inputs={"genus": args.genus})


def _cmd_lambda(args, rep: Report):
    a = args.action
    if a == "m3-l6":
        rep.add("λ⁶ on M̄₃", lambdanum.lambda6_m3())
    elif a == "m4-l9":
        r = lambdanum.lambda9_m4()
        rep.add("λ⁷δ₁²", r.lambda7_delta1sq, kind="hybrid")
        rep.add("[H̄₄] restricted", f"{_frac_str(r.restricted[0])} λ² + {_frac_str(r.restricted[1])} δ₁²", kind="hybrid")
        rep.add("λ⁹ on M̄₄", r.lambda9, kind="hybrid")
        rep.add("λ⁷κ₂ on M̄₄", r.lambda7_kappa2, kind="hybrid")
    elif a == "l3cubed":
        val, c, l9 = lambdanum.lambda3_cubed()
        rep.add("λ₃³ / λ₁⁹", c)
        rep.add("λ₃³ on M̄₄", val, kind="hybrid")
    else:
        r = lambdanum.schottky_multiple()
        rep.add("λ₁…λ₄ on Ã₄", lambdanum.proportionality(4))
        rep.add("λ₁¹⁰ / λ₁…λ₄", r.ratio)
        rep.add("λ₁¹⁰ on Ã₄", r.lambda10_A4)
        rep.add("[J₄] / λ", r.multiple, kind="hybrid")
        rep.add("[J₄]_Q / λ", r.qclass_multiple, kind="hybrid")


def _cmd_kappa(args, rep: Report):
    table = lambdanum.load_kappa_table()
    if args.action == "table":
        rep.data = {"table": table.to_json()}
        for e, v in table.entries.items():
            rep.add(lambdanum.kappa_name(e), v, kind="paper-data")
        if args.verify:
            ok = all(lambdanum.kappa_from_psi(table.genus, e) == v for e, v in table.entries.items())
            rep.add("agrees with psi-integral recursion", ok)
    else:
        stored, formula, ok = lambdanum.witten_check(3)
        rep.add("stored κ₆", stored, kind="paper-data")
        rep.add("1/(24³·3!)", formula)
        rep.add("equal", ok)
        if not ok:
            raise InvariantError("stored κ₆ differs from 1/(24^g g!)")


def _cmd_testsurface(args, rep: Report):
    sol = lambdanum.solve_test_surfaces()
    _, unknowns, _ = lambdanum.load_test_surfaces()
    rep.data = {
        "determined": {f"coef.{k}": _frac_str(v) for k, v in sorted(sol.determined.items())},
        "free": [f"coef.{k}" for k in sol.free],
        "progress": [{"row": lbl, "new": [f"coef.{k}" for k in new]} for lbl, new in sol.progress],
    }
    for lbl, new in sol.progress:
        rep.add(f"row {lbl}", ", ".join(f"coef.{k}" for k in new) or "nothing new", kind="paper-data")
    for k, v in sorted(sol.determined.items()):
        rep.add(f"coef.{k} ({unknowns[k]})", v, kind="hybrid")
    rep.add("free", ", ".join(f"coef.{k} ({unknowns[k]})" for k in sol.free), kind="hybrid")


# -- parser -----------------------------------------------------------------------------

def _box(text: str) -> tuple[tuple[int, int], ...]:
    """'0:9,0:10,0:7' -> ((0, 9), (0, 10), (0, 7))."""
    try:
        out = []
        for part in text.split(","):
            lo, hi = part.split(":")
            out.append((int(lo), int(hi)))
        return tuple(out)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad box {text!r}; use lo:hi,lo:hi,...") from None


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags; SUPPRESS keeps them from resetting values given earlier
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    parser.add_argument("--approx", action="store_true", default=d(False), help="add non-authoritative decimal renderings")
    parser.add_argument("--seed-box", type=_box, default=d(None), help="minimizer fallback box lo:hi,... in lattice coordinates")
    parser.add_argument("--presentation", default=d(None), help="ring presentation JSON for M2-bar commands")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)

    p = _Parser(prog="mgbar", description="Exact intersection numbers on moduli of stable curves.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("nef-cone", parents=[common], help="nef inequalities and extremal rays")
    s.add_argument("--genus", type=int, required=True)

    s = sub.add_parser("integrality", parents=[common], help="modular integrality analysis")
    ss = s.add_subparsers(dest="action", parser_class=_Parser)
    ss.required = True
    t = ss.add_parser("analyze", parents=[common])
    t.add_argument("--poly", required=True)
    t.add_argument("--prime", type=int, required=True)
    t.add_argument("--power", type=int, default=None)
    t.add_argument("--simplify", action="store_true")

    for space, acts in (("m2", ("degree", "conditions", "minimize")), ("m3", ("degree", "conditions", "minimize", "mod-chain"))):
        s = sub.add_parser(space, parents=[common], help=f"very ampleness on {space.upper()}-bar")
        ss = s.add_subparsers(dest="action", parser_class=_Parser)
        ss.required = True
        for a in acts:
            t = ss.add_parser(a, parents=[common])
            if a == "degree":
                t.add_argument("a", type=int, nargs="?")
                t.add_argument("b", type=int, nargs="?")
                if space == "m3":
                    t.add_argument("c", type=int, nargs="?")
            if a == "conditions" and space == "m3":
                t.add_argument("--no-external", action="store_true", help="omit the stated codimension-2 inputs")

    s = sub.add_parser("hg", parents=[common], help="hyperelliptic numbers h_g")
    s.add_argument("--genus", type=int, required=True)

    s = sub.add_parser("lambda", parents=[common], help="Hodge integrals in genus 3 and 4")
    s.add_argument("action", choices=("m3-l6", "m4-l9", "l3cubed", "schottky"))

    s = sub.add_parser("kappa", parents=[common], help="kappa numbers on M3-bar")
    s.add_argument("action", choices=("table", "witten-check"))
    s.add_argument("--verify", action="store_true", help="recompute the table from psi integrals")

    s = sub.add_parser("testsurface", parents=[common], help="genus 4 test-surface system")
    s.add_argument("action", choices=("solve",))
    return p


_DISPATCH = {
    "nef-cone": _cmd_nef_cone,
    "integrality": _cmd_integrality,
    "m2": _cmd_m2,
    "m3": _cmd_m3,
    "hg": _cmd_hg,
    "lambda": _cmd_lambda,
    "kappa": _cmd_kappa,
    "testsurface": _cmd_testsurface,
}


def _command_key(args) -> str:
    if args.cmd in ("integrality", "m2", "m3", "lambda", "kappa", "testsurface"):
        return f"{args.cmd} {args.action}"
    return args.cmd


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    rep = Report(_command_key(args), approx=args.approx)
    try:
        _DISPATCH[args.cmd](args, rep)
    except DomainError as exc:
        print(f"domain error: {exc}", file=err)
        return EXIT_DOMAIN
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=err)
        return EXIT_INVARIANT
    if args.json:
        print(json.dumps(rep.to_json(), ensure_ascii=False, indent=1, default=str), file=out)
    else:
        print(rep.to_text(), file=out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
