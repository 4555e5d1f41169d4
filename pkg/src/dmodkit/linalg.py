"""
Sparse Gaussian elimination over K.

Rows are dicts column -> RatFun.  Columns are arbitrary hashables ranked by a
key function: the smallest key is the leading column.  Pivot rows are kept
monic with the pivot as their leading column, so reduction only ever
introduces columns of lower rank and terminates.
"""

from __future__ import annotations

import heapq
from typing import Callable, Dict, Hashable, Iterable, List, Optional

from .field import RatFun

Row = Dict[Hashable, RatFun]


class Echelon:
    def __init__(self, key: Callable, zero: RatFun):
        self._keyf = key
        self._keys: Dict[Hashable, object] = {}
        self.zero = zero
        self.pivots: Dict[Hashable, Row] = {}

    def key(self, c):
        k = self._keys.get(c)
        if k is None:
            k = self._keyf(c)
            self._keys[c] = k
        return k

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def lead(self, row: Row):
        return min(row, key=self.key)

    def reduce(self, row: Row) -> Row:
        """Remainder of ``row``: no pivot column survives."""
        row = {c: a for c, a in row.items() if not a.is_zero()}
        pivots = self.pivots
        key = self.key
        heap = [(key(c), i, c) for i, c in enumerate(row) if c in pivots]
        heapq.heapify(heap)
        tick = len(heap)
        while heap:
            _, _, c = heapq.heappop(heap)
            a = row.get(c)
            if a is None:
                continue
            del row[c]
            for c2, b in pivots[c].items():
                if c2 == c:
                    continue
                old = row.get(c2)
                t = a * b
                if old is None:
                    row[c2] = -t
                    if c2 in pivots:
                        tick += 1
                        heapq.heappush(heap, (key(c2), tick, c2))
                else:
                    new = old - t
                    if new.is_zero():
                        del row[c2]
                    else:
                        row[c2] = new
        return row

    def add(self, row: Row) -> Optional[Hashable]:
        """Insert a row; returns its new pivot column or None if dependent."""
        r = self.reduce(row)
        if not r:
            return None
        c = self.lead(r)
        a = r[c]
        if not a.is_one():
            inv = a.inverse()
            r = {k: v * inv for k, v in r.items() if k != c}
            r[c] = self.zero + 1
        self.pivots[c] = r
        return c

    def add_all(self, rows: Iterable[Row]) -> List[Hashable]:
        out = []
        for r in rows:
            c = self.add(r)
            if c is not None:
                out.append(c)
        return out

    def contains(self, row: Row) -> bool:
        return not self.reduce(row)

    def interreduce(self) -> None:
        """Bring the pivot rows to reduced row echelon form."""
        order = sorted(self.pivots, key=self.key, reverse=True)
        done = Echelon(self._keyf, self.zero)
        done._keys = self._keys
        for c in order:
            r = self.pivots[c]
            rest = {k: v for k, v in r.items() if k != c}
            rest = done.reduce(rest)
            rest[c] = r[c]
            done.pivots[c] = rest
        self.pivots = done.pivots

    def rows_sorted(self) -> List[Row]:
        return [self.pivots[c] for c in sorted(self.pivots, key=self.key)]

    def copy(self) -> "Echelon":
        e = Echelon(self._keyf, self.zero)
        e._keys = self._keys
        e.pivots = dict(self.pivots)
        return e


def rank_of(rows: Iterable[Row], key: Callable, zero: RatFun) -> int:
    e = Echelon(key, zero)
    e.add_all(rows)
    return e.rank


def nullspace(rows: Iterable[Row], columns: List[Hashable], key: Callable, zero: RatFun) -> List[Row]:
    """Basis of {v : row . v = 0 for all rows}, one vector per free column."""
    e = Echelon(key, zero)
    e.add_all(rows)
    e.interreduce()
    one = None
    basis = []
    for f in columns:
        if f in e.pivots:
            continue
        if one is None:
            one = zero + 1
        v = {f: one}
        for c, r in e.pivots.items():
            a = r.get(f)
            if a is not None:
                v[c] = -a
        basis.append(v)
    return basis


def solve_linear(pres, eqs: Dict[Hashable, Row], unknowns: List[Hashable], rhs: Row) -> Optional[Row]:
    """One solution of sum_u eqs[e][u] c_u = rhs[e] for every equation e.

    Free unknowns are set to zero.  Returns None when inconsistent.
    """
    rank = {u: i for i, u in enumerate(unknowns)}
    RHS = ("__rhs__",)

    def key(c):
        return (1, 0) if c == RHS else (0, rank[c])

    e = Echelon(key, pres.zero)
    names = list(eqs) + [k for k in rhs if k not in eqs]
    for ename in names:
        row = dict(eqs.get(ename, {}))
        b = rhs.get(ename)
        if b is not None:
            row[RHS] = -b
        piv = e.add(row)
        if piv == RHS:
            return None
    e.interreduce()
    sol = {}
    for c, r in e.pivots.items():
        b = r.get(RHS)
        if b is not None:
            sol[c] = -b
    return sol
