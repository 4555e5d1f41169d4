"""
Sections of R = hom_K(M, K) and the Spencer action on them.

A section of order Q is a finite family of values f^k_mu (|mu| <= Q) that
contracts to zero against every prolonged equation up to order Q.  It is not
a solution: the derivations act through (d_i f)^k_mu = d_i(f^k_mu) - f^k_{mu+1_i},
which lowers the order by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .field import RatFun, deriv
from .involution import NotInvolutive, involution_test, pp_complete
from .linalg import Echelon
from .operator import MultiIndex, inc, indices_of_order, mi_str
from .system import Jet, LinearSystem, jet_key, jet_str, prolong, symbol


class TruncationTooSmall(ValueError):
    pass


@dataclass
class Section:
    order: int
    values: Dict[Jet, RatFun]
    m: int
    n: int

    def __getitem__(self, jet: Jet) -> RatFun:
        return self.values[jet]

    def get(self, k: int, mu: Sequence[int]):
        return self.values[(k, tuple(mu))]

    def truncate(self, Q: int) -> "Section":
        return Section(Q, {j: a for j, a in self.values.items() if sum(j[1]) <= Q}, self.m, self.n)

    def __add__(self, other: "Section") -> "Section":
        Q = min(self.order, other.order)
        a, b = self.truncate(Q), other.truncate(Q)
        return Section(Q, {j: a.values[j] + b.values[j] for j in a.values}, self.m, self.n)

    def scale(self, c) -> "Section":
        return Section(self.order, {j: a * c for j, a in self.values.items()}, self.m, self.n)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.values.values())

    def __eq__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        Q = min(self.order, other.order)
        return all(a.is_zero() for a in (self.truncate(Q) - other.truncate(Q)).values.values())

    def nonzero(self) -> Dict[Jet, RatFun]:
        return {j: a for j, a in self.values.items() if not a.is_zero()}

    def __repr__(self):
        nz = self.nonzero()
        body = ", ".join(f"{jet_str(j)}: {nz[j]}" for j in sorted(nz, key=basis_key))
        return f"Section(order={self.order}, {{{body}}})"


def zero_section(S: LinearSystem, Q: int) -> Section:
    return Section(Q, {j: S.pres.zero for j in S.jets(Q)}, S.m, S.n)


def spencer_apply(pres, f: Section, i: int) -> Section:
    """(d_i f)^k_mu = d_i f^k_mu - f^k_{mu+1_i} for |mu| <= order - 1."""
    if f.order < 1:
        raise ValueError("Spencer action needs a section of order >= 1")
    out = {}
    for (k, mu), a in f.values.items():
        if sum(mu) > f.order - 1:
            continue
        out[(k, mu)] = deriv(pres, a, i) - f.values[(k, inc(mu, i))]
    return Section(f.order - 1, out, f.m, f.n)


def contract(row, f: Section) -> RatFun:
    acc = None
    for j, a in row.items():
        t = a * f.values[j]
        acc = t if acc is None else acc + t
    return acc


def is_section(S: LinearSystem, f: Section) -> bool:
    """Every prolonged row up to order(f) contracts to zero against f."""
    if f.order < S.q:
        raise ValueError("section order below the system order")
    P = prolong(S, f.order - S.q)
    for row in P.rows:
        c = contract(row, f)
        if c is not None and not c.is_zero():
            return False
    return True


def _require_involutive(S: LinearSystem, attempts: int = 8, seed: int = 0):
    rep = involution_test(S, attempts, seed)
    if rep.verdict != "involutive":
        raise NotInvolutive("not involutive: run pp_complete first")


def basis_key(j: Jet):
    """Order first, then y_1 before y_2 before y_3 (y_11 before y_12), then unknown."""
    k, mu = j
    return (sum(mu), tuple(-x for x in mu), k)


def section_basis(S: LinearSystem, Q: int, check: bool = True) -> List[Section]:
    """Sections dual to the parametric jets of order <= Q, lowest order first."""
    if Q < S.q:
        raise ValueError("Q below the system order")
    if check:
        _require_involutive(S)
    P = prolong(S, Q - S.q)
    e = P.echelon.copy()
    e.interreduce()
    piv = e.pivots
    params = sorted((j for j in P.jets() if j not in piv), key=basis_key)
    zero = S.pres.zero
    out = []
    for p in params:
        vals = {j: zero for j in P.jets()}
        vals[p] = S.pres.one
        for c, row in piv.items():
            a = row.get(p)
            if a is not None:
                vals[c] = -a
        out.append(Section(Q, vals, S.m, S.n))
    return out


def parametric_jets(S: LinearSystem, Q: int) -> List[Jet]:
    P = prolong(S, Q - S.q)
    return sorted((j for j in P.jets() if j not in P.echelon.pivots), key=basis_key)


# -- generators

Word = Tuple[int, MultiIndex]  # (generator index, nu)


@dataclass
class GeneratorReport:
    generators: List[Section]
    combinations: List[Dict[int, RatFun]]   # generator as a combination of basis sections
    modular_equations: List[str]
    words: List[Dict[Word, RatFun]]         # basis section b = sum c d_nu g
    depth: int
    certified_order: int
    truncated: bool
    basis: List[Section] = field(default_factory=list)
    exact: bool = False                     # all values above the system order vanish
    bound: int = 0                          # generator count guaranteed by the theory

    @property
    def within_bound(self) -> bool:
        return len(self.generators) <= self.bound


def _vector(f: Section, q: int) -> Dict[Jet, RatFun]:
    return {j: a for j, a in f.values.items() if sum(j[1]) <= q and not a.is_zero()}


def _apply_word(pres, g: Section, nu: MultiIndex) -> Section:
    f = g
    for i, k in enumerate(nu):
        for _ in range(k):
            f = spencer_apply(pres, f, i + 1)
    return f


def _words_span(pres, gens: List[Section], q: int, depth: int):
    """Yield (s, echelon) with the word vectors of depth <= s, truncated to order q.

    Each vector carries a tag column for its word, so reductions report
    the word combination used.
    """
    n = gens[0].n if gens else 0

    def key(c):
        if c[0] == "w":
            return (1, -sum(c[2]), c[1], c[2])
        return (0,) + jet_key(c)

    e = Echelon(key, pres.zero)
    caches: List[Dict[MultiIndex, Section]] = [{(0,) * n: g} for g in gens]
    for s in range(depth + 1):
        for gi in range(len(gens)):
            cache = caches[gi]
            for nu in indices_of_order(n, s):
                if nu not in cache:
                    i = max(t for t, k in enumerate(nu) if k)
                    prev = nu[:i] + (nu[i] - 1,) + nu[i + 1:]
                    cache[nu] = spencer_apply(pres, cache[prev], i + 1)
                row = dict(_vector(cache[nu], q))
                row[("w", gi, nu)] = pres.one
                e.add(row)
        yield s, e


def _span_echelon(pres, gens, q, depth) -> Echelon:
    e = None
    for _, e in _words_span(pres, gens, q, depth):
        pass
    return e


def _generates(pres, gens, basis, q, depth) -> Optional[List[Dict[Word, RatFun]]]:
    """Express every basis section through the shallowest words that reach it."""
    words: List[Optional[Dict[Word, RatFun]]] = [None] * len(basis)
    for _, e in _words_span(pres, gens, q, depth):
        for t, b in enumerate(basis):
            if words[t] is None:
                rem = e.reduce(_vector(b, q))
                if all(c[0] == "w" for c in rem):
                    words[t] = {(c[1], c[2]): -a for c, a in rem.items()}
        if all(w is not None for w in words):
            return words
    return None


def modular_equation(f: Section, exact: bool = False) -> str:
    """E = sum f^k_mu a^{k mu} = 0; a trailing "..." marks values beyond the truncation."""
    parts = []
    nz = f.nonzero()
    for (k, mu) in sorted(nz, key=basis_key):
        a = nz[(k, mu)]
        idx = mi_str(mu) or "0"
        sym = f"a^{{{idx}}}" if f.m == 1 else f"a_{k + 1}^{{{idx}}}"
        if a.is_one():
            parts.append(sym)
        elif a == -1:
            parts.append("-" + sym)
        else:
            s = str(a)
            if len(a.num.to_dict()) > 1 or not a.is_poly():
                s = f"({s})"
            parts.append(f"{s}*{sym}")
    if not parts:
        return "0 = 0"
    out = parts[0]
    for s in parts[1:]:
        out += (" - " + s[1:]) if s.startswith("-") else (" + " + s)
    return out + (" = 0" if exact or not f.order else " + ... = 0")


def generating_sections(S: LinearSystem, Q: int, check: bool = True) -> GeneratorReport:
    """A small generating family of sections, certified at the system order.

    Single basis sections are tried from the highest parametric jet down,
    then differences and sums of two basis sections; larger families grow
    greedily in the same order.
    """
    q = S.q
    if Q < q:
        raise TruncationTooSmall(f"truncation too small: Q = {Q} < system order {q}")
    basis = section_basis(S, Q, check)
    pres = S.pres
    depth = Q - q
    finite = _finite_type(S)
    exact = _vanishes_above(S)
    bound = generator_bound(S)
    if not basis:
        return GeneratorReport([], [], [], [], depth, q, not finite, basis, exact, bound)
    order = list(range(len(basis)))[::-1]
    cands: List[Dict[int, RatFun]] = [{i: pres.one} for i in order]
    for a, b in combinations(range(len(basis)), 2):
        cands.append({a: pres.one, b: -pres.one})
    for a, b in combinations(range(len(basis)), 2):
        cands.append({a: pres.one, b: pres.one})

    def build(c):
        f = None
        for i, a in c.items():
            t = basis[i].scale(a)
            f = t if f is None else f + t
        return f

    for c in cands:
        g = build(c)
        words = _generates(pres, [g], basis, q, depth)
        if words is not None:
            return GeneratorReport([g], [c], [modular_equation(g, exact)], words, depth, q, not finite, basis,
                                   exact, bound)
    # greedy: add single basis sections until the span closes
    chosen: List[Dict[int, RatFun]] = []
    gens: List[Section] = []
    for i in order:
        if gens:
            rem = _span_echelon(pres, gens, q, depth).reduce(_vector(basis[i], q))
            if all(c[0] == "w" for c in rem):
                continue
        chosen.append({i: pres.one})
        gens.append(basis[i])
        words = _generates(pres, gens, basis, q, depth)
        if words is not None:
            return GeneratorReport(gens, chosen, [modular_equation(g, exact) for g in gens], words,
                                   depth, q, not finite, basis, exact, bound)
    raise TruncationTooSmall("truncation too small to certify generation")


def generator_bound(S: LinearSystem) -> int:
    """m for a first-order system without zero-order rows, dim R_q otherwise."""
    if S.q == 1 and not any(all(sum(mu) == 0 for _, mu in r) for r in S.rows):
        return min(S.m, S.dim)
    return S.dim


def _vanishes_above(S: LinearSystem) -> bool:
    """Every jet of order q + 1 vanishes on R, so sections are finite."""
    P = prolong(S, 1)
    one = S.pres.one
    return all(P.contains({(k, mu): one}) for mu in indices_of_order(S.n, S.q + 1) for k in range(S.m))


def _finite_type(S: LinearSystem) -> bool:
    return symbol(S, S.q).dim == 0


def solution_dim(S: LinearSystem, max_steps: int = 8, attempts: int = 8, seed: int = 0) -> Union[int, str]:
    """Number of parametric jets over all orders, or "infinite"."""
    C, rep, _ = pp_complete(S, max_steps, attempts, seed)
    if symbol(C, C.q).dim == 0:
        return C.dim
    return "infinite"
