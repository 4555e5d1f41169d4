"""
Linear systems R_q in jet coordinates: prolongation, projection, symbols.

A row is a dict (k, mu) -> RatFun standing for sum a^mu_k y^k_mu with k the
0-based unknown index.  Jets are ranked by order first, then class (higher
class first), then lexicographically, then by unknown; the first jet of a row
in this ranking is its leader.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .field import DiffFieldPresentation, RatFun, deriv
from .linalg import Echelon, nullspace
from .operator import MultiIndex, indices_of_order, indices_up_to, inc, mi_class, mi_str

Jet = Tuple[int, MultiIndex]
Row = Dict[Jet, RatFun]


def jet_key(j: Jet):
    k, mu = j
    return (-sum(mu), mu, k)


def jet_str(j: Jet, names: Optional[Sequence[str]] = None) -> str:
    k, mu = j
    base = names[k] if names and k < len(names) else f"y{k + 1}"
    s = mi_str(mu)
    return f"{base}_{s}" if s else base


def row_order(row: Row) -> int:
    return max((sum(mu) for _, mu in row), default=-1)


def row_derivative(pres: DiffFieldPresentation, row: Row, i: int) -> Row:
    """Formal derivative: a y_mu -> a y_{mu+1_i} + d_i(a) y_mu."""
    out: Row = {}
    for (k, mu), a in row.items():
        j = (k, inc(mu, i))
        old = out.get(j)
        out[j] = a if old is None else old + a
        da = deriv(pres, a, i)
        if not da.is_zero():
            old = out.get((k, mu))
            out[(k, mu)] = da if old is None else old + da
    return {j: a for j, a in out.items() if not a.is_zero()}


def row_prolongations(pres, row: Row, r: int) -> List[Tuple[MultiIndex, Row]]:
    """All (nu, d_nu row) with |nu| <= r, each nu produced once."""
    n = pres.n
    zero = (0,) * n
    out = [(zero, row)]
    frontier = [(zero, row, 1)]
    for _ in range(r):
        nxt = []
        for nu, rw, last in frontier:
            for i in range(last, n + 1):
                d = row_derivative(pres, rw, i)
                nu2 = inc(nu, i)
                out.append((nu2, d))
                nxt.append((nu2, d, i))
        frontier = nxt
    return out


def row_str(row: Row, names=None) -> str:
    if not row:
        return "0"
    parts = []
    for j in sorted(row, key=jet_key):
        a = row[j]
        js = jet_str(j, names)
        if a.is_one():
            parts.append(js)
        elif a == -1:
            parts.append("-" + js)
        else:
            s = str(a)
            if len(a.num.to_dict()) > 1 or not a.is_poly():
                s = f"({s})"
            parts.append(f"{s}*{js}")
    out = parts[0]
    for s in parts[1:]:
        out += (" - " + s[1:]) if s.startswith("-") else (" + " + s)
    return out


def monic_row(row: Row, key=jet_key) -> Row:
    if not row:
        return row
    lead = min(row, key=key)
    inv = row[lead].inverse()
    return {j: a * inv for j, a in row.items()}


class LinearSystem:
    """Rows of order <= q in m unknowns over a presented field."""

    def __init__(self, pres: DiffFieldPresentation, m: int, rows: Iterable[Row],
                 order: Optional[int] = None, names: Optional[Sequence[str]] = None):
        self.pres = pres
        self.n = pres.n
        self.m = m
        self.rows: List[Row] = []
        for r in rows:
            r = {j: a for j, a in r.items() if not a.is_zero()}
            if r:
                self.rows.append(r)
        top = max((row_order(r) for r in self.rows), default=0)
        self.q = top if order is None else order
        if top > self.q:
            raise ValueError(f"row of order {top} in a system of order {self.q}")
        self.names = tuple(names) if names else tuple(f"y{k + 1}" for k in range(m))
        self._ech: Optional[Echelon] = None

    # -- echelon data
    @property
    def echelon(self) -> Echelon:
        if self._ech is None:
            e = Echelon(jet_key, self.pres.zero)
            e.add_all(self.rows)
            self._ech = e
        return self._ech

    @property
    def rank(self) -> int:
        return self.echelon.rank

    def jets(self, q: Optional[int] = None) -> List[Jet]:
        q = self.q if q is None else q
        return [(k, mu) for mu in indices_up_to(self.n, q) for k in range(self.m)]

    def jet_count(self, q: Optional[int] = None) -> int:
        q = self.q if q is None else q
        return self.m * comb(self.n + q, self.n)

    @property
    def dim(self) -> int:
        return self.jet_count() - self.rank

    def principal(self) -> List[Jet]:
        return sorted(self.echelon.pivots, key=jet_key)

    def parametric(self) -> List[Jet]:
        piv = self.echelon.pivots
        return [j for j in sorted(self.jets(), key=jet_key) if j not in piv]

    def solved_rows(self) -> List[Row]:
        """Reduced echelon form, leaders in jet order."""
        e = self.echelon.copy()
        e.interreduce()
        return e.rows_sorted()

    def contains(self, row: Row) -> bool:
        return self.echelon.contains(row)

    def with_rows(self, extra: Iterable[Row], order: Optional[int] = None) -> "LinearSystem":
        return LinearSystem(self.pres, self.m, self.rows + list(extra),
                            self.q if order is None else order, self.names)

    def echelonized(self) -> "LinearSystem":
        return LinearSystem(self.pres, self.m, self.echelon.rows_sorted(), self.q, self.names)

    def __str__(self):
        return "\n".join(row_str(r, self.names) + " = 0" for r in self.rows) or "(no equations)"

    def __repr__(self):
        return f"LinearSystem(n={self.n}, m={self.m}, q={self.q}, rows={len(self.rows)})"


def prolong(S: LinearSystem, r: int) -> LinearSystem:
    """All d_nu Phi with |nu| <= r; order q + r."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return S
    rows = []
    for row in S.rows:
        rows.extend(d for _, d in row_prolongations(S.pres, row, r))
    return LinearSystem(S.pres, S.m, rows, S.q + r, S.names)


def project(S: LinearSystem, q2: int) -> LinearSystem:
    """Echelon rows whose jets all have order <= q2."""
    if q2 > S.q:
        raise ValueError("cannot project to a higher order")
    rows = [r for c, r in sorted(S.echelon.pivots.items(), key=lambda cr: jet_key(cr[0]))
            if sum(c[1]) <= q2]
    return LinearSystem(S.pres, S.m, rows, q2, S.names)


# -- symbols

def sym_key(j: Jet):
    return jet_key(j)


class SymbolSpace:
    """Top-order part g_s: homogeneous rows in the order-s jets."""

    def __init__(self, pres: DiffFieldPresentation, m: int, s: int, rows: Iterable[Row]):
        self.pres = pres
        self.n = pres.n
        self.m = m
        self.s = s
        self.rows = [r for r in rows if r]
        self._ech: Optional[Echelon] = None

    @property
    def echelon(self) -> Echelon:
        if self._ech is None:
            e = Echelon(sym_key, self.pres.zero)
            e.add_all(self.rows)
            self._ech = e
        return self._ech

    def jets(self) -> List[Jet]:
        return [(k, mu) for mu in indices_of_order(self.n, self.s) for k in range(self.m)]

    @property
    def full_dim(self) -> int:
        return self.m * comb(self.n + self.s - 1, self.n - 1)

    @property
    def dim(self) -> int:
        return self.full_dim - self.echelon.rank

    def beta(self) -> List[int]:
        """Pivot counts per class 1..n in the current frame."""
        out = [0] * self.n
        for _, mu in self.echelon.pivots:
            c = mi_class(mu)
            if c:
                out[c - 1] += 1
        return out

    def alpha(self) -> List[int]:
        """Parametric counts per class 1..n in the current frame."""
        if self.s == 0:
            return [0] * self.n
        beta = self.beta()
        out = []
        for i in range(1, self.n + 1):
            total = self.m * comb(self.s - 1 + self.n - i, self.n - i)
            out.append(total - beta[i - 1])
        return out

    def prolong(self, r: int = 1) -> "SymbolSpace":
        rows = self.rows
        for _ in range(r):
            new = []
            seen = set()
            for row in rows:
                for i in range(1, self.n + 1):
                    sh = {(k, inc(mu, i)): a for (k, mu), a in row.items()}
                    new.append(sh)
            # the span is what matters; echelonize to keep the row count small
            e = Echelon(sym_key, self.pres.zero)
            e.add_all(new)
            rows = e.rows_sorted()
        return SymbolSpace(self.pres, self.m, self.s + r, rows)

    def basis(self) -> List[Row]:
        return nullspace(self.rows, sorted(self.jets(), key=sym_key), sym_key, self.pres.zero)

    def __repr__(self):
        return f"SymbolSpace(s={self.s}, dim={self.dim})"


def top_part(row: Row, s: int) -> Row:
    return {(k, mu): a for (k, mu), a in row.items() if sum(mu) == s}


def symbol(S: LinearSystem, s: Optional[int] = None) -> SymbolSpace:
    """Symbol g_s of S prolonged up to order s."""
    s = S.q if s is None else s
    if s < S.q:
        raise ValueError("symbol order below the system order")
    P = prolong(S, s - S.q)
    return SymbolSpace(S.pres, S.m, s, [top_part(r, s) for r in P.rows])
