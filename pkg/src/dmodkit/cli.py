"""
System files and the ``dmodkit`` command line.

A file describes one problem, one declaration per line ('#' starts a comment):

    coords x1 x2
    unknowns y
    gen u owner u index (0,0)
    rule d1 u = u^2
    option order_bound 6
    eq y[0,2] - x1*y[0,0] = 0
    eq d1 y - u*y = 0
    op D: d1 + x2, d2
    op P: d1 + x2

``op LABEL: e1, e2, ...`` appends one row to the operator matrix LABEL.
Commands that need a single matrix take D (or the only matrix in the file),
and fall back to the operator form of the ``eq`` lines.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import JetForm, ParseError, evaluate
from .field import DiffFieldPresentation, FieldError, Generator, PresentationBoundError, RatFun
from .operator import DiffOp, OpMatrix, SyzygyBudgetExhausted, adjoint, compose, jets_to_row, ore_pair, row_to_jets
from .system import LinearSystem, jet_key

COMMANDS = ("involution", "cc", "adjoint", "ore", "torsion", "parametrize", "controllable",
            "rank", "resolve", "sections", "ckdata", "dim")

_OPTIONS = {"order_bound": int, "auto_close": lambda s: s.lower() in ("1", "true", "yes")}


@dataclass(frozen=True)
class SystemFile:
    coords: Tuple[str, ...] = ()
    unknowns: Tuple[str, ...] = ()
    gens: Tuple[Tuple[str, str, Tuple[int, ...]], ...] = ()
    rules: Tuple[Tuple[int, str, str], ...] = ()        # (i, generator, expression)
    eqs: Tuple[str, ...] = ()
    ops: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()   # (label, entries) per row
    options: Tuple[Tuple[str, str], ...] = ()

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def m(self) -> int:
        return len(self.unknowns)

    def option(self, key: str, default=None):
        for k, v in self.options:
            if k == key:
                return _OPTIONS[k](v)
        return default

    # -- building
    def presentation(self) -> DiffFieldPresentation:
        gens = [Generator(name, owner, idx) for name, owner, idx in self.gens]
        rules = {(name, i): text for i, name, text in self.rules}
        return DiffFieldPresentation(self.n, gens, rules,
                                     order_bound=self.option("order_bound", 6),
                                     auto_close=self.option("auto_close", False),
                                     coord_names=self.coords)

    def labels(self) -> List[str]:
        out: List[str] = []
        for label, _ in self.ops:
            if label not in out:
                out.append(label)
        return out

    def system(self, pres: Optional[DiffFieldPresentation] = None) -> LinearSystem:
        pres = pres or self.presentation()
        if self.eqs or not self.ops:
            rows = [_eq_row(self, pres, text, None) for text in self.eqs]
            return LinearSystem(pres, self.m, rows, None if rows else 0, self.unknowns)
        D = self.matrix(pres=pres)
        return LinearSystem(pres, D.m, [row_to_jets(r) for r in D.rows], None, self.unknowns)

    def matrix(self, label: Optional[str] = None, pres: Optional[DiffFieldPresentation] = None) -> OpMatrix:
        pres = pres or self.presentation()
        labels = self.labels()
        if label is None:
            if "D" in labels:
                label = "D"
            elif len(labels) == 1:
                label = labels[0]
            elif not labels:
                S = self.system(pres)
                return OpMatrix(pres, [jets_to_row(pres, r, self.m) for r in S.rows], self.m)
            else:
                raise UsageError(f"several operator matrices {labels}; label one of them D")
        if label not in labels:
            raise UsageError(f"no operator matrix labelled {label}")
        rows = [[_op_entry(self, pres, e, None) for e in entries] for lab, entries in self.ops if lab == label]
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise UsageError(f"matrix {label}: rows of different lengths")
        return OpMatrix(pres, rows, widths.pop())


class UsageError(ValueError):
    pass


# -- parsing

_GEN = re.compile(r"^(\w+)\s+owner\s+(\w+)\s+index\s*\(([^)]*)\)\s*$")
_RULE = re.compile(r"^d(\d+)\s+(\w+)\s*=\s*(.+)$")
_OP = re.compile(r"^(\w+)\s*:\s*(.*)$")


def _norm(text: str) -> str:
    return " ".join(text.split())


def _resolver(sf: SystemFile, pres: DiffFieldPresentation):
    unknowns = {u: k for k, u in enumerate(sf.unknowns)}

    def resolve(name, idx, pos):
        if name in unknowns:
            mu = (0,) * sf.n if idx is None else idx
            if len(mu) != sf.n:
                raise ValueError(f"multi-index of {name} needs {sf.n} entries")
            return JetForm(pres, {(unknowns[name], mu): pres.one})
        if idx is not None:
            raise ValueError(f"undeclared symbol {name}[...]")
        if name in pres._var_index:
            return RatFun(pres.ctx.gens()[pres._var_index[name]])
        if name == "d" and sf.n == 1:
            return DiffOp.d(pres, 1)
        if re.fullmatch(r"d[1-9]+", name) and all(int(c) <= sf.n for c in name[1:]):
            mu = [0] * sf.n
            for c in name[1:]:
                mu[int(c) - 1] += 1
            return DiffOp.dmu(pres, tuple(mu))
        raise ValueError(f"undeclared symbol {name}")
    return resolve


def _eval(sf, pres, text, line, offset=0, full=None):
    try:
        return evaluate(text, pres, _resolver(sf, pres), line)
    except ParseError as exc:
        raise ParseError(exc.msg, full or text, exc.pos + offset, line) from None


def _eq_row(sf, pres, text, line, offset=0, full=None):
    lhs, sep, rhs = text.partition("=")
    if not sep:
        raise ParseError("equation needs '= 0'", full or text, offset + len(text), line)
    if rhs.strip() != "0":
        # move the right side over: lhs - (rhs) = 0
        text = f"{lhs} - ({rhs})"
    else:
        text = lhs
    v = _eval(sf, pres, text, line, offset, full)
    if isinstance(v, RatFun) and v.is_zero():
        return {}
    if not isinstance(v, JetForm):
        raise ParseError("equation is not homogeneous linear in the unknowns", full or text, offset, line)
    return dict(v.terms)


def _op_entry(sf, pres, text, line, offset=0, full=None) -> DiffOp:
    v = _eval(sf, pres, text, line, offset, full)
    if isinstance(v, RatFun):
        return DiffOp.scalar(pres, v)
    if not isinstance(v, DiffOp):
        raise ParseError("operator entries cannot contain unknowns", full or text, offset, line)
    return v


def parse_file(text: str) -> SystemFile:
    """Parse a system file; every expression is checked against the declarations."""
    fields: Dict[str, list] = {k: [] for k in ("coords", "unknowns", "gens", "rules", "eqs", "ops", "options")}
    located = []  # (kind, line number, raw line, offset, payload)
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        body = line.strip()
        if not body:
            continue
        kw, _, rest = body.partition(" ")
        rest = rest.strip()
        off = line.index(rest) if rest else len(line)
        if kw in ("coords", "unknowns"):
            names = rest.split()
            if fields[kw]:
                raise ParseError(f"{kw} declared twice", raw, 0, ln)
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                    raise ParseError(f"bad name {nm!r}", raw, line.index(nm), ln)
            fields[kw] = names
        elif kw == "gen":
            mt = _GEN.match(rest)
            if not mt:
                raise ParseError("expected: gen NAME owner OWNER index (i1,...,in)", raw, off, ln)
            try:
                idx = tuple(int(s) for s in mt.group(3).split(",") if s.strip())
            except ValueError:
                raise ParseError("multi-index entries must be integers", raw, off, ln) from None
            fields["gens"].append((mt.group(1), mt.group(2), idx))
        elif kw == "rule":
            mt = _RULE.match(rest)
            if not mt:
                raise ParseError("expected: rule d<i> NAME = EXPR", raw, off, ln)
            fields["rules"].append((int(mt.group(1)), mt.group(2), _norm(mt.group(3))))
            located.append(("rule", ln, raw, off + mt.start(3), mt.group(3)))
        elif kw == "eq":
            fields["eqs"].append(_norm(rest))
            located.append(("eq", ln, raw, off, rest))
        elif kw == "op":
            mt = _OP.match(rest)
            if not mt:
                raise ParseError("expected: op LABEL: ENTRY, ENTRY, ...", raw, off, ln)
            entries = tuple(_norm(e) for e in mt.group(2).split(","))
            if any(not e for e in entries):
                raise ParseError("empty operator entry", raw, off, ln)
            fields["ops"].append((mt.group(1), entries))
            start = off + mt.start(2)
            for e in mt.group(2).split(","):
                located.append(("op", ln, raw, start + len(e) - len(e.lstrip()), e.strip()))
                start += len(e) + 1
        elif kw == "option":
            parts = rest.split()
            if len(parts) != 2 or parts[0] not in _OPTIONS:
                raise ParseError(f"expected: option {{{'|'.join(_OPTIONS)}}} VALUE", raw, off, ln)
            try:
                _OPTIONS[parts[0]](parts[1])
            except ValueError:
                raise ParseError(f"bad value for {parts[0]}", raw, off, ln) from None
            fields["options"].append((parts[0], parts[1]))
        else:
            raise ParseError(f"unknown keyword {kw!r}", raw, 0, ln)
    if not fields["coords"]:
        raise ParseError("missing coords declaration", "", 0, 1)
    sf = SystemFile(tuple(fields["coords"]), tuple(fields["unknowns"]), tuple(fields["gens"]),
                    tuple(fields["rules"]), tuple(fields["eqs"]), tuple(fields["ops"]),
                    tuple(fields["options"]))
    clash = set(sf.unknowns) & (set(sf.coords) | {g[0] for g in sf.gens})
    if clash:
        raise ParseError(f"unknowns clash with field symbols: {sorted(clash)}", "", 0, 1)
    if len(set(sf.unknowns)) != len(sf.unknowns):
        raise ParseError("duplicate unknown names", "", 0, 1)
    try:
        pres = sf.presentation()
    except FieldError as exc:
        raise ParseError(str(exc), "", 0, 1) from None
    for kind, ln, raw, off, payload in located:
        if kind == "eq":
            _eq_row(sf, pres, payload, ln, off, raw)
        elif kind == "op":
            _op_entry(sf, pres, payload, ln, off, raw)
        else:
            v = _eval(sf, pres, payload, ln, off, raw)
            if not isinstance(v, RatFun):
                raise ParseError("rule values must be field elements", raw, off, ln)
    for label in sf.labels():
        sf.matrix(label, pres)
    return sf


def render(sf: SystemFile) -> str:
    lines = ["coords " + " ".join(sf.coords)]
    if sf.unknowns:
        lines.append("unknowns " + " ".join(sf.unknowns))
    for name, owner, idx in sf.gens:
        lines.append(f"gen {name} owner {owner} index ({','.join(map(str, idx))})")
    for i, name, text in sf.rules:
        lines.append(f"rule d{i} {name} = {text}")
    for k, v in sf.options:
        lines.append(f"option {k} {v}")
    for text in sf.eqs:
        lines.append(f"eq {text}")
    for label, entries in sf.ops:
        lines.append(f"op {label}: " + ", ".join(entries))
    return "\n".join(lines) + "\n"


# -- serialization

def rat(a) -> str:
    """Constants as "p/q", other field elements in their printed form."""
    if isinstance(a, (int, Fraction)):
        f = Fraction(a)
        return f"{f.numerator}/{f.denominator}"
    if isinstance(a, RatFun) and a.is_constant():
        return rat(a.constant_value())
    return str(a)


def jet_name(sf: SystemFile, j) -> str:
    k, mu = j
    return f"{sf.unknowns[k]}[{','.join(map(str, mu))}]"


def form_str(sf: SystemFile, row) -> str:
    """A jet row in the file's own eq syntax."""
    if not row:
        return "0"
    out = ""
    for j in sorted(row, key=jet_key):
        a = row[j]
        name = jet_name(sf, j)
        if a.is_one():
            t = "+ " + name
        elif a == -1:
            t = "- " + name
        else:
            s = rat(a) if a.is_constant() else str(a)
            neg = s.startswith("-") and a.is_constant()
            if neg:
                s = s[1:]
            if not a.is_constant() and (len(a.num.to_dict()) > 1 or not a.is_poly()):
                s = f"({s})"
            t = ("- " if neg else "+ ") + f"{s}*{name}"
        out += " " + t
    out = out.strip()
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


def op_entry_str(P: DiffOp) -> str:
    return str(P)


def matrix_json(A: OpMatrix) -> List[List[str]]:
    return [[op_entry_str(P) for P in r] for r in A.rows]


def _frame(A) -> List[List[int]]:
    return [list(r) for r in A]


# -- commands

class Context:
    def __init__(self, sf: SystemFile, args):
        self.sf = sf
        self.args = args
        self.pres = sf.presentation()
        self.coordinate_change = None

    def system(self) -> LinearSystem:
        return self.sf.system(self.pres)

    def matrix(self, label=None) -> OpMatrix:
        return self.sf.matrix(label, self.pres)

    def complete(self, S: LinearSystem):
        from .involution import pp_complete
        return pp_complete(S, self.args.max_prolong, self.args.delta_attempts, self.args.seed)


def _involution(ctx: Context):
    from .involution import involution_test
    S = ctx.system()
    rep = involution_test(S, ctx.args.delta_attempts, ctx.args.seed)
    ctx.coordinate_change = _frame(rep.coordinate_change)
    data = {
        "order": S.q,
        "rank": S.rank,
        "dim": S.dim,
        "alpha": list(rep.characters.alpha),
        "beta": list(rep.characters.beta),
        "dim_g": rep.dim_g,
        "dim_g_next": rep.dim_g_next,
        "surjective": rep.surjective,
        "two_acyclic": rep.two_acyclic,
        "tabular": [{"leader": jet_name(ctx.sf, t.leader), "class": t.cls, "multiplicative": t.multiplicative,
                     "row": form_str(ctx.sf, r)}
                    for t, r in zip(rep.tabular, S.solved_rows())],
        "cohomology": [{"s": c.s, "H": c.H} for c in rep.cohomology],
    }
    lines = [f"order {S.q}, dim R = {S.dim}, dim g = {rep.dim_g}, dim g+1 = {rep.dim_g_next}",
             f"characters alpha = {data['alpha']}, beta = {data['beta']}",
             f"verdict: {rep.verdict}"]
    if not rep.involutive:
        C, crep, _ = ctx.complete(S)
        data["completion"] = {
            "order": C.q, "dim": C.dim, "verdict": crep.verdict,
            "alpha": list(crep.characters.alpha),
            "trace": [[k, v if isinstance(v, int) else [s for s in v]] for k, v in crep.trace],
            "rows": [form_str(ctx.sf, r) for r in C.solved_rows()],
        }
        lines.append(f"completion: order {C.q}, dim {C.dim}, {crep.verdict}")
        for k, v in crep.trace:
            lines.append(f"  {k} " + (str(v) if isinstance(v, int) else "; ".join(v)))
    return rep.verdict, data, lines


def _cc(ctx: Context):
    from .resolution import compatibility_conditions
    D = ctx.matrix()
    C = compatibility_conditions(D, ctx.args.max_order, ctx.args.max_prolong, ctx.args.delta_attempts, ctx.args.seed)
    orders = [C.row_order(i) for i in range(C.p)]
    data = {"rows": matrix_json(C), "orders": orders, "composition_zero": compose(C, D).is_zero() if C.p else True}
    lines = [f"{C.p} compatibility condition(s), orders {orders}"] + [f"  {r}" for r in str(C).splitlines()] * bool(C.p)
    return f"{C.p} conditions", data, lines


def _adjoint(ctx: Context):
    A = adjoint(ctx.matrix())
    return "computed", {"rows": matrix_json(A)}, str(A).splitlines()


def _ore(ctx: Context):
    P = ctx.matrix("P")
    U = ctx.matrix("U")
    if P.shape != (1, 1) or U.shape != (1, 1):
        raise UsageError("ore needs 1x1 operators P and U")
    P, U = P.rows[0][0], U.rows[0][0]
    V, Q = ore_pair(P, U, ctx.args.max_order)
    ok = compose(V, P) == compose(Q, U)
    ident = f"({V})({P}) = ({Q})({U})"
    data = {"V": str(V), "Q": str(Q), "identity": ident, "verified": ok}
    return "verified" if ok else "failed", data, [ident, "verified" if ok else "NOT verified"]


def _torsion(ctx: Context):
    from .duality import torsion_test
    rep = torsion_test(ctx.matrix(), ctx.args.max_order, ctx.args.max_prolong)
    data = {"torsion_free": rep.torsion_free,
            "generators": [[str(P) for P in g] for g in rep.generators],
            "annihilators": [[str(Q) for Q in a] for a in rep.annihilators],
            "B": matrix_json(rep.B), "P": matrix_json(rep.P)}
    verdict = "torsion-free" if rep.torsion_free else "torsion"
    lines = [verdict]
    for g, a in zip(rep.generators, rep.annihilators):
        lines.append(f"  generator [{', '.join(map(str, g))}], annihilators {[str(Q) for Q in a]}")
    return verdict, data, lines


def _parametrize(ctx: Context):
    from .duality import parametrize
    par = parametrize(ctx.matrix(), ctx.args.max_order, ctx.args.max_prolong)
    if par is None:
        return "not parametrizable", {"P": None, "left_inverse": None}, ["not parametrizable (torsion)"]
    data = {"P": matrix_json(par.P),
            "left_inverse": matrix_json(par.left_inverse) if par.left_inverse is not None else None}
    lines = ["parametrization:"] + [f"  {r}" for r in str(par.P).splitlines()]
    if par.left_inverse is not None:
        lines += ["left inverse:"] + [f"  {r}" for r in str(par.left_inverse).splitlines()]
    return "parametrizable", data, lines


def _controllable(ctx: Context):
    from .duality import is_controllable
    c = is_controllable(ctx.matrix(), ctx.args.max_order, ctx.args.max_prolong)
    verdict = "controllable" if c.controllable else "not controllable"
    data = {"controllable": c.controllable,
            "torsion_generators": [[str(P) for P in g] for g in c.torsion.generators],
            "annihilators": [[str(Q) for Q in a] for a in c.torsion.annihilators]}
    lines = [verdict] + [f"  torsion generator [{', '.join(map(str, g))}]" for g in c.torsion.generators]
    return verdict, data, lines


def _rank(ctx: Context):
    from .resolution import PresentedModule, differential_rank
    M = PresentedModule(ctx.matrix(), ctx.args.max_prolong, ctx.args.delta_attempts, ctx.args.seed)
    r = differential_rank(M)
    return str(r), {"differential_rank": r}, [f"differential rank {r}"]


def _resolve(ctx: Context):
    from .resolution import PresentedModule, free_resolution
    M = PresentedModule(ctx.matrix(), ctx.args.max_prolong, ctx.args.delta_attempts, ctx.args.seed)
    rep = free_resolution(M, 4, ctx.args.max_order, ctx.args.max_prolong)
    data = {"ranks": rep.ranks, "euler_characteristic": rep.euler_characteristic,
            "composition_zero": rep.composition_zero, "complete": rep.complete,
            "maps": [matrix_json(A) for A in rep.maps]}
    lines = [f"ranks {rep.ranks}, euler characteristic {rep.euler_characteristic}",
             "complete" if rep.complete else "truncated"]
    for i, A in enumerate(rep.maps):
        lines.append(f"map {i + 1}:")
        lines += [f"  {r}" for r in str(A).splitlines()]
    return "complete" if rep.complete else "truncated", data, lines


def _involutive_system(ctx: Context):
    from .involution import involution_test
    S = ctx.system()
    rep = involution_test(S, ctx.args.delta_attempts, ctx.args.seed)
    ctx.coordinate_change = _frame(rep.coordinate_change)
    if rep.involutive:
        return S, None
    C, crep, _ = ctx.complete(S)
    ctx.coordinate_change = _frame(crep.coordinate_change)
    return C, crep


def _sections(ctx: Context):
    from .inverse_system import generating_sections, modular_equation
    S, crep = _involutive_system(ctx)
    Q = ctx.args.section_order if ctx.args.section_order is not None else S.q + 4
    rep = generating_sections(S, Q, check=False)
    data = {"system_order": S.q, "section_order": Q, "basis_size": len(rep.basis),
            "basis": [modular_equation(b, rep.exact) for b in rep.basis],
            "generators": rep.modular_equations,
            "combinations": [{str(k): rat(v) for k, v in c.items()} for c in rep.combinations],
            "certified_order": rep.certified_order, "truncated": rep.truncated,
            "generator_bound": rep.bound, "within_bound": rep.within_bound,
            "completed": crep is not None}
    lines = [f"{len(rep.basis)} basis sections at order {Q}; {len(rep.generators)} generator(s)"]
    lines += [f"  {e}" for e in rep.modular_equations]
    if rep.truncated:
        lines.append("truncated certificate (not of finite type)")
    k = len(rep.generators)
    return f"{k} generator" + ("" if k == 1 else "s"), data, lines


def _ckdata(ctx: Context):
    from .involution import ck_data
    S, _ = _involutive_system(ctx)
    ck = ck_data(S, ctx.args.delta_attempts, ctx.args.seed)
    data = {"counts": {str(i): c for i, c in ck.counts.items()}, "beta": ck.beta,
            "unknowns": ck.unknowns, "finite_type": ck.finite_type, "total": ck.total}
    lines = [f"functions of {i} variables: {c}" for i, c in ck.counts.items()]
    return "finite type" if ck.finite_type else "infinite", data, lines


def _dim(ctx: Context):
    from .inverse_system import solution_dim
    d = solution_dim(ctx.system(), ctx.args.max_prolong, ctx.args.delta_attempts, ctx.args.seed)
    return str(d), {"dim": d}, [str(d)]


_RUN = {"involution": _involution, "cc": _cc, "adjoint": _adjoint, "ore": _ore, "torsion": _torsion,
        "parametrize": _parametrize, "controllable": _controllable, "rank": _rank, "resolve": _resolve,
        "sections": _sections, "ckdata": _ckdata, "dim": _dim}


def _budget_errors():
    from .duality import StageBudgetExhausted
    from .inverse_system import TruncationTooSmall
    from .involution import PPBudgetExhausted
    from .resolution import MembershipBudgetExhausted
    return (PPBudgetExhausted, SyzygyBudgetExhausted, StageBudgetExhausted, MembershipBudgetExhausted,
            TruncationTooSmall, PresentationBoundError)


def budgets(args) -> Dict[str, Optional[int]]:
    return {"max_prolong": args.max_prolong, "max_order": args.max_order,
            "delta_attempts": args.delta_attempts, "seed": args.seed, "section_order": args.section_order}


def run(command: str, sf: SystemFile, args, text: str = "") -> Tuple[dict, List[str]]:
    """Run one command; returns the JSON report and the text lines."""
    if command not in _RUN:
        raise UsageError(f"unknown command {command!r}")
    ctx = Context(sf, args)
    verdict, data, lines = _RUN[command](ctx)
    report = {"command": command,
              "input_digest": "sha256:" + hashlib.sha256((text or render(sf)).encode()).hexdigest(),
              "verdict": verdict, "data": data, "budgets": budgets(args),
              "coordinate_change": ctx.coordinate_change}
    return report, lines


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dmodkit", description="Formal analysis of linear PD systems and D-modules.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file", help="system file, or - for standard input")
    ap.add_argument("--max-prolong", type=int, default=8)
    ap.add_argument("--max-order", type=int, default=10)
    ap.add_argument("--delta-attempts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--section-order", type=int, default=None)
    ap.add_argument("--json", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        sf = parse_file(text)
        report, lines = run(args.command, sf, args, text)
    except (OSError, ParseError, UsageError, FieldError, UnicodeDecodeError) as exc:
        if isinstance(exc, _budget_errors()):
            return _exhausted(args, exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _budget_errors() as exc:
        return _exhausted(args, exc)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"{args.command}: {report['verdict']}")
        for ln in lines:
            print(ln)
    return 0


def _exhausted(args, exc) -> int:
    print(f"budget exhausted: {exc}", file=sys.stderr)
    if args.json:
        print(json.dumps({"command": args.command, "verdict": "budget exhausted",
                          "data": {"error": str(exc)}, "budgets": budgets(args)}, indent=2))
    return 2


if __name__ == "__main__":
    sys.exit(main())
