"""
Expression reader shared by the presentation rules and the system files.

One grammar covers field elements, operators and linear jet forms:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/' | <juxtaposition>) unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') ['-'] INT)?
    atom   := INT | NAME | NAME '[' INT (',' INT)* ']' | '(' expr ')'

Names resolve through a callback.  Products dispatch on the operand kinds:
field * field is field multiplication, anything with an operator composes,
and an operator applied to a jet form is total differentiation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .field import RatFun, deriv


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0, line: Optional[int] = None):
        self.msg = msg
        self.pos = pos
        self.line = line
        where = f"line {line}, col {pos + 1}" if line is not None else f"col {pos + 1}"
        super().__init__(f"{where}: {msg}" + (f"\n  {text}\n  {' ' * pos}^" if text else ""))


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_']*)|(\*\*|[-+*/^()\[\],]))")


@dataclass
class Tok:
    kind: str  # "int", "name", "op", "end"
    text: str
    pos: int


def tokenize(text: str) -> List[Tok]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(Tok("int", m.group(1), start))
        elif m.group(2):
            out.append(Tok("name", m.group(2), start))
        else:
            out.append(Tok("op", m.group(3), start))
        pos = m.end()
    out.append(Tok("end", "", len(text)))
    return out


class JetForm:
    """Linear form sum a y^k_mu; keys are (unknown index, multi-index)."""

    __slots__ = ("pres", "terms")

    def __init__(self, pres, terms=None):
        self.pres = pres
        self.terms = {k: a for k, a in (terms or {}).items() if not a.is_zero()}

    def __add__(self, o):
        t = dict(self.terms)
        for k, a in o.terms.items():
            b = t.get(k)
            t[k] = a if b is None else b + a
        return JetForm(self.pres, t)

    def __neg__(self):
        return JetForm(self.pres, {k: -a for k, a in self.terms.items()})

    def scale(self, a: RatFun) -> "JetForm":
        return JetForm(self.pres, {k: a * b for k, b in self.terms.items()})

    def total_derivative(self, i: int) -> "JetForm":
        out: Dict = {}
        for (k, mu), a in self.terms.items():
            nu = mu[:i - 1] + (mu[i - 1] + 1,) + mu[i:]
            out[(k, nu)] = out.get((k, nu), self.pres.zero) + a
            da = deriv(self.pres, a, i)
            if not da.is_zero():
                out[(k, mu)] = out.get((k, mu), self.pres.zero) + da
        return JetForm(self.pres, out)


Resolver = Callable[[str, Optional[Tuple[int, ...]], int], object]


class _Reader:
    def __init__(self, text: str, pres, resolve: Resolver, line: Optional[int] = None):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.pres = pres
        self.resolve = resolve
        self.line = line

    def err(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        raise ParseError(msg, self.text, tok.pos, self.line)

    def peek(self) -> Tok:
        return self.toks[self.i]

    def take(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            self.err(f"expected {text!r}", t)
        return t

    def parse(self):
        v = self.expr()
        if self.peek().kind != "end":
            self.err("unexpected token")
        return v

    def expr(self):
        v = self.term()
        while self.peek().text in ("+", "-"):
            t = self.take()
            w = self.term()
            v = self.combine("+", v, w if t.text == "+" else self.neg(w), t)
        return v

    def term(self):
        v = self.unary()
        while True:
            t = self.peek()
            if t.text in ("*", "/"):
                self.take()
                w = self.unary()
                v = self.combine(t.text, v, w, t)
            elif t.kind in ("int", "name") or t.text == "(":
                w = self.unary()
                v = self.combine("*", v, w, t)
            else:
                return v

    def unary(self):
        t = self.peek()
        if t.text == "-":
            self.take()
            return self.neg(self.unary())
        if t.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek().text in ("^", "**"):
            t = self.take()
            sign = 1
            if self.peek().text == "-":
                self.take()
                sign = -1
            e = self.take()
            if e.kind != "int":
                self.err("non-integer exponent", e)
            k = sign * int(e.text)
            return self.pow(v, k, t)
        return v

    def atom(self):
        t = self.take()
        if t.kind == "int":
            return self.pres.const(int(t.text))
        if t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "name":
            idx = None
            if self.peek().text == "[":
                self.take()
                vals = []
                while True:
                    neg = False
                    if self.peek().text == "-":
                        self.take()
                        neg = True
                    e = self.take()
                    if e.kind != "int" or neg:
                        self.err("multi-index entries must be nonnegative integers", e)
                    vals.append(int(e.text))
                    if self.peek().text == ",":
                        self.take()
                        continue
                    self.expect("]")
                    break
                idx = tuple(vals)
            try:
                return self.resolve(t.text, idx, t.pos)
            except ParseError:
                raise
            except (KeyError, ValueError) as exc:
                raise ParseError(str(exc).strip("'\""), self.text, t.pos, self.line) from None
        self.err("unexpected token", t)

    # -- value algebra
    def neg(self, v):
        return -v

    def combine(self, op, a, b, tok):
        from .operator import DiffOp, compose
        try:
            if op == "+":
                if isinstance(a, JetForm) or isinstance(b, JetForm):
                    if isinstance(a, RatFun) and a.is_zero():
                        return b
                    if isinstance(b, RatFun) and b.is_zero():
                        return a
                    if not (isinstance(a, JetForm) and isinstance(b, JetForm)):
                        self.err("equation is not homogeneous linear in the unknowns", tok)
                    return a + b
                if isinstance(a, DiffOp) or isinstance(b, DiffOp):
                    return _as_op(self.pres, a) + _as_op(self.pres, b)
                return a + b
            if op == "/":
                if not isinstance(b, RatFun):
                    self.err("division by a non-field element", tok)
                if b.is_zero():
                    self.err("division by zero", tok)
                inv = b.inverse()
                if isinstance(a, RatFun):
                    return a * inv
                if isinstance(a, JetForm):
                    return a.scale(inv)
                return a.scale(inv)
            # product
            if isinstance(a, JetForm) and isinstance(b, JetForm):
                self.err("product of two unknowns is not linear", tok)
            if isinstance(a, RatFun) and isinstance(b, RatFun):
                return a * b
            if isinstance(b, JetForm):
                if isinstance(a, RatFun):
                    return b.scale(a)
                return _apply(a, b)
            if isinstance(a, JetForm):
                if isinstance(b, RatFun):
                    return a.scale(b)
                self.err("operator to the right of an unknown", tok)
            return compose(_as_op(self.pres, a), _as_op(self.pres, b))
        except ParseError:
            raise

    def pow(self, v, k, tok):
        from .operator import DiffOp, compose
        if isinstance(v, RatFun):
            if k < 0 and v.is_zero():
                self.err("division by zero", tok)
            return v ** k
        if isinstance(v, DiffOp):
            if k < 0:
                self.err("negative power of an operator", tok)
            out = DiffOp.scalar(self.pres, 1)
            for _ in range(k):
                out = compose(out, v)
            return out
        self.err("power of an unknown is not linear", tok)


def _as_op(pres, v):
    from .operator import DiffOp
    if isinstance(v, DiffOp):
        return v
    if isinstance(v, RatFun):
        return DiffOp.scalar(pres, v)
    raise TypeError(type(v))


def _apply(P, form: JetForm) -> JetForm:
    """Apply the operator P = sum a^mu d_mu to a jet form."""
    out = JetForm(form.pres)
    cache: Dict[Tuple[int, ...], JetForm] = {}

    def dmu(mu):
        if mu in cache:
            return cache[mu]
        if not any(mu):
            res = form
        else:
            i = max(j for j, k in enumerate(mu) if k)
            prev = mu[:i] + (mu[i] - 1,) + mu[i + 1:]
            res = dmu(prev).total_derivative(i + 1)
        cache[mu] = res
        return res

    for mu, a in P.terms.items():
        out = out + dmu(mu).scale(a)
    return out


def evaluate(text: str, pres, resolve: Resolver, line: Optional[int] = None):
    return _Reader(text, pres, resolve, line).parse()


def field_resolver(pres) -> Resolver:
    def resolve(name, idx, pos):
        if idx is not None:
            raise ValueError(f"undeclared symbol {name}[...]")
        if name in pres._var_index:
            return RatFun(pres.ctx.gens()[pres._var_index[name]])
        raise ValueError(f"undeclared symbol {name}")
    return resolve


def parse_rational(text: str, pres) -> RatFun:
    v = evaluate(text, pres, field_resolver(pres))
    if not isinstance(v, RatFun):
        raise ParseError("expected a field element", text, 0)
    return v
