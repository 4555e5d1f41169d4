"""
Coefficient field K: exact rational functions in the base coordinates and
finitely presented jet generators, with n commuting derivations.

Arithmetic sits on flint's multivariate polynomials over Q. A RatFun is a
reduced fraction num/den whose denominator has leading coefficient 1 under
degrevlex (coordinates first, then generators in declaration order), so equal
field elements compare equal structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import flint


class FieldError(ValueError):
    pass


class PresentationBoundError(FieldError):
    """A derivative needs a jet generator beyond the declared family."""


class NonCommutingPresentation(FieldError):
    def __init__(self, triple, difference):
        self.triple = triple
        self.difference = difference
        g, i, j = triple
        super().__init__(f"non-commuting presentation at ({g}, {i}, {j}): "
                         f"difference {difference}")


class _Foreign(TypeError):
    pass


def _fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, int):
        return flint.fmpq(c)
    raise TypeError(f"not an exact rational: {c!r}")


class RatFun:
    """Reduced fraction of two polynomials sharing one flint context."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            self.num = num
            self.den = num.context().from_dict({}) + 1
            return
        if _canonical:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num = num
            self.den = den.context().from_dict({}) + 1
            return
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num = num * inv
            den = den * inv
        self.num, self.den = num, den

    # -- basic queries
    def ctx(self):
        return self.num.context()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_poly(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.is_constant()

    def constant_value(self) -> Fraction:
        c = self.num.to_dict().get((0,) * self.num.context().nvars(), 0)
        c = flint.fmpq(c)
        return Fraction(int(c.p), int(c.q))

    def _lift(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            return other
        if not isinstance(other, (int, Fraction, flint.fmpq)):
            raise _Foreign
        c = _fmpq(other)
        return RatFun(self.num.context().from_dict({}) + c, None)

    # -- arithmetic
    def __add__(self, other):
        try:
            o = self._lift(other)
        except _Foreign:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFun(self.num + o.num, self.den, _canonical=True)
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        try:
            return self + (-self._lift(other))
        except _Foreign:
            return NotImplemented

    def __rsub__(self, other):
        try:
            return self._lift(other) - self
        except _Foreign:
            return NotImplemented

    def __mul__(self, other):
        try:
            o = self._lift(other)
        except _Foreign:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFun(self.num * o.num, self.den, _canonical=True)
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n1, d2 = (self.num, o.den) if g1.is_one() else (self.num / g1, o.den / g1)
        n2, d1 = (o.num, self.den) if g2.is_one() else (o.num / g2, self.den / g2)
        num, den = n1 * n2, d1 * d2
        if num.is_zero():
            return RatFun(num, den.context().from_dict({}) + 1, _canonical=True)
        return RatFun(num, den, _canonical=True) if den.is_one() else RatFun(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        try:
            return self * self._lift(other).inverse()
        except _Foreign:
            return NotImplemented

    def __rtruediv__(self, other):
        try:
            return self._lift(other) * self.inverse()
        except _Foreign:
            return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RatFun(self.num ** e, self.den ** e, _canonical=True)

    def __eq__(self, other):
        if not isinstance(other, RatFun):
            try:
                other = self._lift(other)
            except _Foreign:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __bool__(self):
        return not self.num.is_zero()

    def __str__(self):
        n = _poly_str(self.num)
        if self.den.is_one():
            return n
        d = _poly_str(self.den)
        if len(self.num.to_dict()) > 1:
            n = f"({n})"
        if len(self.den.to_dict()) > 1 or "*" in d or "/" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RatFun({self})"


def _poly_str(p) -> str:
    if p.is_zero():
        return "0"
    s = str(p)
    return s.replace(" ", "")


@dataclass(frozen=True)
class Generator:
    name: str
    owner: str
    index: Tuple[int, ...]


class DiffFieldPresentation:
    """
    K = Q(x1..xn) extended by named jet generators.

    rules maps (generator name, i) to the value of d_i on that generator, as
    a RatFun or as a string parsed over the presentation symbols.  A missing
    rule falls back, in turn, to the generator w[mu + 1_i] of the same
    owner, then to d_j(d_i g') where g = d_j g' through an implicit rule.
    When ``auto_close`` is set, parametric jets of each owner are declared
    up to ``order_bound`` so that infinite families stay finitely presented.
    """

    def __init__(self, n: int, generators: Sequence[Generator] = (),
                 rules: Optional[Dict[Tuple[str, int], object]] = None,
                 order_bound: int = 6, auto_close: bool = False,
                 coord_names: Optional[Sequence[str]] = None):
        self.n = n
        self.order_bound = order_bound
        self.coord_names = tuple(coord_names or [f"x{i + 1}" for i in range(n)])
        gens = list(generators)
        raw_rules = dict(rules or {})
        for g in gens:
            if len(g.index) != n:
                raise FieldError(f"generator {g.name}: index length {len(g.index)} != n = {n}")
        if auto_close:
            gens = _close_family(gens, raw_rules, n, order_bound)
        self.generators: Tuple[Generator, ...] = tuple(gens)
        names = list(self.coord_names) + [g.name for g in gens]
        if len(set(names)) != len(names):
            raise FieldError("duplicate symbol names in presentation")
        self.symbols = tuple(names)
        self.ctx = flint.fmpq_mpoly_ctx.get(self.symbols, "degrevlex")
        self._gen_by_name = {g.name: g for g in gens}
        self._gen_by_jet = {(g.owner, g.index): g for g in gens}
        self._var_index = {s: k for k, s in enumerate(self.symbols)}
        self.one = RatFun(self.ctx.from_dict({}) + 1)
        self.zero = RatFun(self.ctx.from_dict({}))
        self.rules: Dict[Tuple[str, int], RatFun] = {}
        for (name, i), val in raw_rules.items():
            if name not in self._gen_by_name:
                raise FieldError(f"rule for undeclared generator {name}")
            if not 1 <= i <= n:
                raise FieldError(f"rule d{i} {name}: coordinate index out of range")
            self.rules[(name, i)] = self.parse(val) if isinstance(val, str) else self.coerce(val)
        self._dcache: Dict[Tuple[str, int], RatFun] = {}
        self._active = set()
        self._implicit = {}
        for g in gens:
            for i in range(1, n + 1):
                if (g.name, i) in self.rules:
                    continue
                nxt = self._gen_by_jet.get((g.owner, _inc(g.index, i)))
                if nxt is not None:
                    self._implicit[(g.name, i)] = nxt.name

    # -- construction helpers
    @classmethod
    def trivial(cls, n: int, coord_names=None) -> "DiffFieldPresentation":
        return cls(n, coord_names=coord_names)

    def coord(self, i: int) -> RatFun:
        return RatFun(self.ctx.gens()[i - 1])

    def gen(self, name: str) -> RatFun:
        return RatFun(self.ctx.gens()[self._var_index[name]])

    def generator(self, name: str) -> Generator:
        return self._gen_by_name[name]

    def jet_generator(self, owner: str, index: Sequence[int]) -> Optional[Generator]:
        return self._gen_by_jet.get((owner, tuple(index)))

    def const(self, c) -> RatFun:
        return RatFun(self.ctx.from_dict({}) + _fmpq(c if not isinstance(c, float) else Fraction(c)))

    def coerce(self, v) -> RatFun:
        if isinstance(v, RatFun):
            if v.num.context() is not self.ctx:
                return self._transport(v)
            return v
        if isinstance(v, str):
            return self.parse(v)
        return self.const(v)

    def _transport(self, v: RatFun) -> RatFun:
        src = v.num.context().names()
        missing = [s for s in src if s not in self._var_index]
        if missing:
            raise FieldError(f"symbols {missing} not in presentation")

        def tr(p):
            out = {}
            for exps, c in p.to_dict().items():
                e = [0] * len(self.symbols)
                for s, k in zip(src, exps):
                    e[self._var_index[s]] = k
                out[tuple(e)] = c
            return self.ctx.from_dict(out)
        return RatFun(tr(v.num), tr(v.den))

    def parse(self, text: str) -> RatFun:
        from .expr import parse_rational
        return parse_rational(text, self)

    # -- derivations
    def deriv_gen(self, name: str, i: int) -> RatFun:
        key = (name, i)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        if key in self._active:
            raise PresentationBoundError(f"presentation bound exceeded: cyclic expansion of d{i} {name}")
        self._active.add(key)
        try:
            val = self._deriv_gen(name, i, frozenset())
        finally:
            self._active.discard(key)
        self._dcache[key] = val
        return val

    def _deriv_gen(self, name: str, i: int, seen) -> RatFun:
        if (name, i) in self.rules:
            return self.rules[(name, i)]
        if (name, i) in self._implicit:
            return self.gen(self._implicit[(name, i)])
        if (name, i) in seen:
            raise PresentationBoundError(f"presentation bound exceeded: cyclic rule for d{i} {name}")
        g = self._gen_by_name[name]
        # g = d_j g' through an implicit rule: d_i g = d_j (d_i g')
        for j in range(1, self.n + 1):
            if j == i or g.index[j - 1] == 0:
                continue
            prev = self._gen_by_jet.get((g.owner, _dec(g.index, j)))
            if prev is None or (prev.name, j) in self.rules:
                continue
            try:
                inner = self._deriv_gen(prev.name, i, seen | {(name, i)})
                return deriv(self, inner, j)
            except PresentationBoundError:
                continue
        raise PresentationBoundError(
            f"presentation bound exceeded: d{i} {name} needs jet "
            f"{g.owner}{list(_inc(g.index, i))} (order_bound={self.order_bound})")

    def __repr__(self):
        return (f"DiffFieldPresentation(n={self.n}, generators="
                f"{[g.name for g in self.generators]}, rules={len(self.rules)})")


def _inc(mu: Tuple[int, ...], i: int) -> Tuple[int, ...]:
    return mu[:i - 1] + (mu[i - 1] + 1,) + mu[i:]


def _dec(mu: Tuple[int, ...], i: int) -> Tuple[int, ...]:
    return mu[:i - 1] + (mu[i - 1] - 1,) + mu[i:]


def jet_name(owner: str, mu: Sequence[int]) -> str:
    return owner + "_" + "".join(str(i + 1) * k for i, k in enumerate(mu))


def _close_family(gens: List[Generator], rules, n: int, bound: int) -> List[Generator]:
    """Declare the parametric descendants of each generator up to ``bound``."""
    gens = list(gens)
    by_jet = {(g.owner, g.index): g for g in gens}
    names = {g.name for g in gens}
    # jets reached through an explicit rule are principal, as is anything above them
    principal = {}
    for g in gens:
        for i in range(1, n + 1):
            if (g.name, i) in rules:
                principal.setdefault(g.owner, []).append(_inc(g.index, i))

    def is_principal(owner, mu):
        return any(all(a >= b for a, b in zip(mu, p)) for p in principal.get(owner, ()))

    k = 0
    while k < len(gens):
        g = gens[k]
        k += 1
        if sum(g.index) >= bound:
            continue
        for i in range(1, n + 1):
            if (g.name, i) in rules:
                continue
            mu = _inc(g.index, i)
            if (g.owner, mu) in by_jet or is_principal(g.owner, mu):
                continue
            name = jet_name(g.owner, mu)
            while name in names:
                name += "_"
            new = Generator(name, g.owner, mu)
            gens.append(new)
            by_jet[(g.owner, mu)] = new
            names.add(name)
    return gens


def _dpoly(pres: DiffFieldPresentation, p, i: int) -> RatFun:
    """d_i of a polynomial by the chain rule over coordinates and generators."""
    degs = p.degrees()
    acc = None
    n = pres.n
    for v, d in enumerate(degs):
        if d == 0:
            continue
        if v < n:
            if v != i - 1:
                continue
            term = RatFun(p.derivative(v))
        else:
            dv = pres.deriv_gen(pres.symbols[v], i)
            if dv.is_zero():
                continue
            term = RatFun(p.derivative(v)) * dv
        acc = term if acc is None else acc + term
    return acc if acc is not None else pres.zero


def deriv(pres: DiffFieldPresentation, f: RatFun, i: int) -> RatFun:
    """d_i f by the Leibniz and quotient rules."""
    if not 1 <= i <= pres.n:
        raise FieldError(f"coordinate index {i} out of range 1..{pres.n}")
    if f.num.is_constant() and f.den.is_one():
        return pres.zero
    dn = _dpoly(pres, f.num, i)
    if f.den.is_one():
        return dn
    dd = _dpoly(pres, f.den, i)
    den = RatFun(f.den)
    return dn / den - RatFun(f.num) * dd / (den * den)


def deriv_multi(pres: DiffFieldPresentation, f: RatFun, mu: Sequence[int]) -> RatFun:
    for i, k in enumerate(mu):
        for _ in range(k):
            if f.is_zero():
                return f
            f = deriv(pres, f, i + 1)
    return f


@dataclass
class ValidationReport:
    accepted: bool
    checks: List[Tuple[str, int, int, str]]
    offending: Optional[Tuple[str, int, int]] = None

    def raise_if_rejected(self):
        if not self.accepted:
            g, i, j = self.offending
            diff = next(c[3] for c in self.checks if c[:3] == self.offending)
            raise NonCommutingPresentation(self.offending, diff)


def validate_presentation(pres: DiffFieldPresentation) -> ValidationReport:
    """Check d_i(d_j g) = d_j(d_i g) for every generator and i < j.

    Pairs whose expansion leaves the declared family are recorded as
    "bound" rather than judged.
    """
    checks = []
    offending = None
    for g in pres.generators:
        x = pres.gen(g.name)
        for i, j in combinations(range(1, pres.n + 1), 2):
            try:
                diff = deriv(pres, deriv(pres, x, j), i) - deriv(pres, deriv(pres, x, i), j)
            except PresentationBoundError:
                checks.append((g.name, i, j, "bound"))
                continue
            if diff.is_zero():
                checks.append((g.name, i, j, "ok"))
            else:
                checks.append((g.name, i, j, str(diff)))
                if offending is None:
                    offending = (g.name, i, j)
    return ValidationReport(offending is None, checks, offending)
