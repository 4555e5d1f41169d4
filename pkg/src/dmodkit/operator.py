"""
The ring D = K[d1..dn] of linear differential operators.

Operators are kept in normal form sum a^mu d_mu with every coefficient to the
left of the d's; composition uses d_i a = a d_i + d_i(a) repeatedly.
"""

from __future__ import annotations

from itertools import product
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .field import DiffFieldPresentation, RatFun, deriv, deriv_multi

MultiIndex = Tuple[int, ...]


# -- multi-indices

def norm(mu: MultiIndex) -> int:
    return sum(mu)


def mi_class(mu: MultiIndex) -> int:
    """Least i with mu_i != 0 (1-based); 0 stands for the undefined class of 0."""
    for i, k in enumerate(mu):
        if k:
            return i + 1
    return 0


def inc(mu: MultiIndex, i: int) -> MultiIndex:
    return mu[:i - 1] + (mu[i - 1] + 1,) + mu[i:]


def add(mu: MultiIndex, nu: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(mu, nu))


def unit(n: int, i: int) -> MultiIndex:
    return tuple(1 if k == i - 1 else 0 for k in range(n))


def zero_index(n: int) -> MultiIndex:
    return (0,) * n


def mi_key(mu: MultiIndex):
    """Sort key: higher |mu| first, then higher class, then lexicographic."""
    return (-sum(mu), mu)


def indices_of_order(n: int, s: int) -> List[MultiIndex]:
    """All multi-indices with |mu| = s, in mi_key order."""
    if n == 0:
        return [()] if s == 0 else []
    out = []
    for first in range(s, -1, -1):
        for rest in indices_of_order(n - 1, s - first):
            out.append((first,) + rest)
    out.sort(key=mi_key)
    return out


def indices_up_to(n: int, q: int) -> List[MultiIndex]:
    out = []
    for s in range(q, -1, -1):
        out.extend(indices_of_order(n, s))
    return out


def sub_indices(mu: MultiIndex):
    """All lambda <= mu componentwise."""
    return product(*(range(k + 1) for k in mu))


def mi_binom(mu: MultiIndex, lam: MultiIndex) -> int:
    r = 1
    for a, b in zip(mu, lam):
        r *= comb(a, b)
    return r


def mi_str(mu: MultiIndex) -> str:
    return "".join(str(i + 1) * k for i, k in enumerate(mu))


# -- scalar operators

class DiffOp:
    """Scalar operator sum a^mu d_mu; ``terms`` holds only nonzero a^mu."""

    __slots__ = ("pres", "terms")

    def __init__(self, pres: DiffFieldPresentation, terms: Optional[Dict[MultiIndex, RatFun]] = None):
        self.pres = pres
        self.terms = {mu: a for mu, a in (terms or {}).items() if not a.is_zero()}

    @classmethod
    def d(cls, pres, i: int) -> "DiffOp":
        return cls(pres, {unit(pres.n, i): pres.one})

    @classmethod
    def dmu(cls, pres, mu: MultiIndex, coeff: Optional[RatFun] = None) -> "DiffOp":
        return cls(pres, {tuple(mu): coeff if coeff is not None else pres.one})

    @classmethod
    def scalar(cls, pres, a) -> "DiffOp":
        return cls(pres, {zero_index(pres.n): pres.coerce(a)})

    @classmethod
    def zero(cls, pres) -> "DiffOp":
        return cls(pres, {})

    @property
    def order(self) -> int:
        """Max |mu| with nonzero coefficient; -1 for the zero operator."""
        return max((sum(mu) for mu in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def leading(self) -> Tuple[MultiIndex, RatFun]:
        mu = min(self.terms, key=mi_key)
        return mu, self.terms[mu]

    def coeff(self, mu) -> RatFun:
        return self.terms.get(tuple(mu), self.pres.zero)

    def _lift(self, other) -> "DiffOp":
        if isinstance(other, DiffOp):
            return other
        return DiffOp.scalar(self.pres, other)

    def __add__(self, other):
        o = self._lift(other)
        t = dict(self.terms)
        for mu, a in o.terms.items():
            b = t.get(mu)
            t[mu] = a if b is None else b + a
        return DiffOp(self.pres, t)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.pres, {mu: -a for mu, a in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, a: RatFun) -> "DiffOp":
        """Left multiplication by a field element."""
        a = self.pres.coerce(a)
        if a.is_zero():
            return DiffOp(self.pres)
        return DiffOp(self.pres, {mu: a * b for mu, b in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose(self, other)
        if isinstance(other, (RatFun, int)):
            return compose(self, DiffOp.scalar(self.pres, other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (RatFun, int)):
            return self.scale(self.pres.coerce(other))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, RatFun)):
            other = DiffOp.scalar(self.pres, other)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted((mu, hash(a)) for mu, a in self.terms.items())))

    def monic(self) -> "DiffOp":
        if self.is_zero():
            return self
        return self.scale(self.leading()[1].inverse())

    def __str__(self):
        return op_str(self)

    def __repr__(self):
        return f"DiffOp({self})"


def op_str(P: DiffOp, var: str = "d") -> str:
    if P.is_zero():
        return "0"
    parts = []
    for mu in sorted(P.terms, key=mi_key):
        a = P.terms[mu]
        dm = f"{var}{mi_str(mu)}" if sum(mu) else ""
        if not dm:
            s = str(a)
            if len(a.num.to_dict()) > 1 and not a.is_poly():
                s = f"({s})"
        elif a.is_one():
            s = dm
        elif a == -1:
            s = "-" + dm
        else:
            s = str(a)
            if len(a.num.to_dict()) > 1 or not a.is_poly():
                s = f"({s})"
            s = f"{s}*{dm}"
        parts.append(s)
    out = parts[0]
    for s in parts[1:]:
        out += (" - " + s[1:]) if s.startswith("-") else (" + " + s)
    return out


class _DerivCache:
    """Memoized d^kappa(a) for the coefficients of one operator."""

    def __init__(self, pres):
        self.pres = pres
        self.memo: Dict[Tuple[int, MultiIndex], RatFun] = {}

    def get(self, key: int, a: RatFun, kappa: MultiIndex) -> RatFun:
        if not any(kappa):
            return a
        hit = self.memo.get((key, kappa))
        if hit is not None:
            return hit
        # derive from a smaller kappa
        i = max(j for j, k in enumerate(kappa) if k)
        prev = kappa[:i] + (kappa[i] - 1,) + kappa[i + 1:]
        val = self.get(key, a, prev)
        val = val if val.is_zero() else deriv(self.pres, val, i + 1)
        self.memo[(key, kappa)] = val
        return val


def _compose_scalar(P: DiffOp, Q: DiffOp) -> DiffOp:
    """P o Q in normal form."""
    pres = P.pres
    if P.is_zero() or Q.is_zero():
        return DiffOp(pres)
    cache = _DerivCache(pres)
    qterms = list(Q.terms.items())
    acc: Dict[MultiIndex, RatFun] = {}
    for mu, a in P.terms.items():
        for lam in sub_indices(mu):
            kappa = tuple(m - l for m, l in zip(mu, lam))
            c = mi_binom(mu, lam)
            for idx, (nu, b) in enumerate(qterms):
                db = cache.get(idx, b, kappa)
                if db.is_zero():
                    continue
                t = a * db
                if c != 1:
                    t = t * c
                key = add(lam, nu)
                old = acc.get(key)
                acc[key] = t if old is None else old + t
    return DiffOp(pres, acc)


def adjoint_scalar(P: DiffOp) -> DiffOp:
    """sum (-1)^|mu| d_mu o a^mu."""
    pres = P.pres
    acc: Dict[MultiIndex, RatFun] = {}
    cache = _DerivCache(pres)
    for idx, (mu, a) in enumerate(P.terms.items()):
        sign = -1 if sum(mu) % 2 else 1
        for lam in sub_indices(mu):
            kappa = tuple(m - l for m, l in zip(mu, lam))
            da = cache.get(idx, a, kappa)
            if da.is_zero():
                continue
            t = da * (sign * mi_binom(mu, lam))
            old = acc.get(lam)
            acc[lam] = t if old is None else old + t
    return DiffOp(pres, acc)


# -- matrices

class OpMatrix:
    """p x m matrix of operators over one presentation."""

    __slots__ = ("pres", "rows", "p", "m")

    def __init__(self, pres: DiffFieldPresentation, rows: Sequence[Sequence[DiffOp]], m: Optional[int] = None):
        self.pres = pres
        self.rows = [list(r) for r in rows]
        self.p = len(self.rows)
        if m is None:
            if not self.rows:
                raise ValueError("column count needed for an empty matrix")
            m = len(self.rows[0])
        self.m = m
        for r in self.rows:
            if len(r) != m:
                raise ValueError("ragged operator matrix")

    @classmethod
    def identity(cls, pres, m: int) -> "OpMatrix":
        return cls(pres, [[DiffOp.scalar(pres, 1) if i == j else DiffOp.zero(pres)
                           for j in range(m)] for i in range(m)], m)

    @classmethod
    def zeros(cls, pres, p: int, m: int) -> "OpMatrix":
        return cls(pres, [[DiffOp.zero(pres) for _ in range(m)] for _ in range(p)], m)

    @classmethod
    def column(cls, ops: Sequence[DiffOp]) -> "OpMatrix":
        return cls(ops[0].pres, [[P] for P in ops], 1)

    @classmethod
    def row(cls, ops: Sequence[DiffOp]) -> "OpMatrix":
        return cls(ops[0].pres, [list(ops)], len(ops))

    @property
    def shape(self):
        return (self.p, self.m)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def order(self) -> int:
        return max((P.order for r in self.rows for P in r), default=-1)

    def row_order(self, i: int) -> int:
        return max((P.order for P in self.rows[i]), default=-1)

    def is_zero(self) -> bool:
        return all(P.is_zero() for r in self.rows for P in r)

    def transpose(self) -> "OpMatrix":
        return OpMatrix(self.pres, [[self.rows[i][j] for i in range(self.p)] for j in range(self.m)], self.p)

    def stack(self, other: "OpMatrix") -> "OpMatrix":
        if other.m != self.m:
            raise ValueError(f"width mismatch: {self.m} vs {other.m}")
        return OpMatrix(self.pres, self.rows + other.rows, self.m)

    def select(self, idx: Iterable[int]) -> "OpMatrix":
        return OpMatrix(self.pres, [self.rows[i] for i in idx], self.m)

    def __add__(self, other: "OpMatrix"):
        if self.shape != other.shape:
            raise ValueError("dimension mismatch")
        return OpMatrix(self.pres, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.m)

    def __neg__(self):
        return OpMatrix(self.pres, [[-a for a in r] for r in self.rows], self.m)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "OpMatrix"):
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def __str__(self):
        return "\n".join("[" + ", ".join(str(P) for P in r) + "]" for r in self.rows) or f"<{self.p}x{self.m} empty>"

    def __repr__(self):
        return f"OpMatrix({self.p}x{self.m})"


def matmul(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    if A.m != B.p:
        raise ValueError(f"dimension mismatch: {A.p}x{A.m} times {B.p}x{B.m}")
    pres = A.pres
    rows = []
    for i in range(A.p):
        row = []
        for j in range(B.m):
            acc = DiffOp.zero(pres)
            for k in range(A.m):
                if A.rows[i][k].is_zero() or B.rows[k][j].is_zero():
                    continue
                acc = acc + _compose_scalar(A.rows[i][k], B.rows[k][j])
            row.append(acc)
        rows.append(row)
    return OpMatrix(pres, rows, B.m)


def compose(P, Q):
    """P o Q for two scalar operators, or the matrix product for OpMatrix."""
    if isinstance(P, OpMatrix) and isinstance(Q, OpMatrix):
        return matmul(P, Q)
    if isinstance(P, DiffOp) and isinstance(Q, DiffOp):
        return _compose_scalar(P, Q)
    raise TypeError("compose needs two DiffOps or two OpMatrix values")


def adjoint(A):
    """Formal adjoint; for a matrix, transpose and take entrywise adjoints."""
    if isinstance(A, DiffOp):
        return adjoint_scalar(A)
    return OpMatrix(A.pres, [[adjoint_scalar(A.rows[i][j]) for i in range(A.p)] for j in range(A.m)], A.p)


# -- operator rows as jet vectors

def row_to_jets(row: Sequence[DiffOp]) -> Dict[Tuple[int, MultiIndex], RatFun]:
    """Operator row (P_1..P_m) as the jet form sum_k P_k y^k."""
    out = {}
    for k, P in enumerate(row):
        for mu, a in P.terms.items():
            out[(k, mu)] = a
    return out


def jets_to_row(pres, jets: Dict[Tuple[int, MultiIndex], RatFun], m: int, offset: int = 0) -> List[DiffOp]:
    buckets: List[Dict[MultiIndex, RatFun]] = [dict() for _ in range(m)]
    for (k, mu), a in jets.items():
        buckets[k - offset][mu] = a
    return [DiffOp(pres, b) for b in buckets]


# -- Ore pairs and left inverses

class SyzygyBudgetExhausted(RuntimeError):
    pass


def ore_pair(P: DiffOp, U: DiffOp, max_order: int = 10) -> Tuple[DiffOp, DiffOp]:
    """(V, Q) with V o P = Q o U and V != 0, from left syzygies of (P; U)."""
    if U.is_zero():
        raise ValueError("ore_pair needs U != 0")
    from .resolution import compatibility_conditions
    pres = P.pres
    if P.is_zero():
        return DiffOp.scalar(pres, 1), DiffOp.zero(pres)
    C = compatibility_conditions(OpMatrix.column([P, U]), max_order=max_order)
    cands = [(r[0], -r[1]) for r in C.rows if not r[0].is_zero()]
    if not cands:
        raise SyzygyBudgetExhausted("syzygy budget exhausted: no syzygy with V != 0")
    cands.sort(key=lambda vq: (vq[0].order, mi_key(vq[0].leading()[0]), vq[1].order))
    V, Q = cands[0]
    lead = V.leading()[1].inverse()
    return V.scale(lead), Q.scale(lead)


def left_inverse(A: OpMatrix, max_order: int = 2) -> Optional[OpMatrix]:
    """L (m x p) with L o A = identity and entries of order <= max_order, or None.

    Ansatz: L_{j,tau} = sum_nu c_{j,tau,nu} d_nu with unknown c in K; the
    identity L o A = I is linear in the c's.
    """
    from .linalg import solve_linear
    pres = A.pres
    p, m = A.shape
    n = pres.n
    nus = indices_up_to(n, max_order)
    shifted = {}
    for tau in range(p):
        for nu in nus:
            dnu = DiffOp.dmu(pres, nu)
            shifted[(tau, nu)] = [compose(dnu, A.rows[tau][k]) for k in range(m)]
    unknowns = list(shifted)
    rows = []
    for j in range(m):
        eqs: Dict[Tuple[int, MultiIndex], Dict] = {}
        for u in unknowns:
            for k, op in enumerate(shifted[u]):
                for lam, a in op.terms.items():
                    eqs.setdefault((k, lam), {})[u] = a
        rhs = {(j, zero_index(n)): pres.one}
        sol = solve_linear(pres, eqs, unknowns, rhs)
        if sol is None:
            return None
        row = [DiffOp(pres, {nu: sol[(tau, nu)] for (t2, nu) in unknowns if t2 == tau and (tau, nu) in sol})
               for tau in range(p)]
        rows.append(row)
    return OpMatrix(pres, rows, p)
