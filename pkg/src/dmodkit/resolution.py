"""
Compatibility conditions, free resolutions, membership and submodules.

Everything here is linear algebra over K on prolonged jet rows.  An operator
matrix D (p x m) becomes the tagged system D y - u = 0 in unknowns
(y^1..y^m, u^1..u^p); an echelon form that eliminates every y-jet before any
u-jet leaves, as rows involving u-jets only, the left relations among the
rows of D at the chosen prolongation level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .linalg import Echelon
from .operator import (DiffOp, OpMatrix, SyzygyBudgetExhausted, compose, jets_to_row,
                       row_to_jets)
from .system import Jet, LinearSystem, Row, jet_key, row_order, row_prolongations


class MembershipBudgetExhausted(RuntimeError):
    """Membership could not be decided within the prolongation slack."""


def _tagged_key(m: int):
    def key(c):
        k, mu = c
        return (0 if k < m else 1,) + jet_key(c)
    return key


def _tagged_rows(pres, m: int, rows: Sequence[Row], level: int) -> List[Row]:
    """d_nu (Phi_tau - u_tau) for every row tau and |nu| <= level - ord(Phi_tau)."""
    out = []
    for tau, phi in enumerate(rows):
        r = dict(phi)
        r[(m + tau, (0,) * pres.n)] = -pres.one
        q = max(row_order(phi), 0)
        out.extend(d for _, d in row_prolongations(pres, r, max(level - q, 0)))
    return out


def _u_part(row: Row, m: int) -> Row:
    return {(k - m, mu): a for (k, mu), a in row.items() if k >= m}


def _tagged_echelon(pres, m: int, rows: Sequence[Row], level: int) -> Echelon:
    e = Echelon(_tagged_key(m), pres.zero)
    e.add_all(_tagged_rows(pres, m, rows, level))
    return e


def relations_at_level(D: OpMatrix, level: int) -> List[Row]:
    """Reduced basis of the u-only rows of the tagged system at ``level``.

    Each row is a jet form in (tau, nu) standing for sum c u^tau_nu, i.e. the
    operator row (C_1..C_p) with sum_tau C_tau D_tau = 0.
    """
    m = D.m
    e = _tagged_echelon(D.pres, m, [row_to_jets(r) for r in D.rows], level)
    e.interreduce()
    return [_u_part(r, m) for c, r in sorted(e.pivots.items(), key=lambda cr: e.key(cr[0]))
            if c[0] >= m]


def _bounds(D: OpMatrix, level: int) -> List[int]:
    return [level - max(D.row_order(t), 0) for t in range(D.p)]


def _prolong_within(pres, row: Row, bounds: Sequence[int]) -> List[Row]:
    """Prolongations of a u-row keeping every u^tau jet of order <= bounds[tau]."""
    room = min(bounds[t] - sum(mu) for t, mu in row)
    return [d for _, d in row_prolongations(pres, row, max(room, 0))]


def compatibility_conditions(D: OpMatrix, max_order: int = 10, max_prolong: int = 8,
                             attempts: int = 8, seed: int = 0) -> OpMatrix:
    """Generating left relations C (C o D = 0) among the rows of D.

    The tagged system is prolonged one order past the highest order reached
    by the involutive completion of D y = 0; relations are then picked
    greedily by increasing order, skipping those already generated by the
    prolongations of earlier picks at that level.
    """
    pres = D.pres
    p, m = D.shape
    if p == 0:
        return OpMatrix(pres, [], 0)
    if m == 0 or D.is_zero():
        return OpMatrix.identity(pres, p)
    level = PresentedModule(D, max_prolong, attempts, seed).generation_level() + 1
    bounds = _bounds(D, level)
    if max(bounds) > max_order:
        raise SyzygyBudgetExhausted(
            f"syzygy budget exhausted: relations up to order {max(bounds)} needed, "
            f"max_order={max_order}")
    cands = relations_at_level(D, level)
    ukey = jet_key
    cands.sort(key=lambda r: (row_order(r), ukey(min(r, key=ukey))))
    span = Echelon(ukey, pres.zero)
    kept: List[Row] = []
    for c in cands:
        if span.contains(c):
            continue
        kept.append(c)
        span.add_all(_prolong_within(pres, c, bounds))
    rows = []
    for c in kept:
        inv = c[min(c, key=ukey)].inverse()
        rows.append(jets_to_row(pres, {j: a * inv for j, a in c.items()}, p))
    return OpMatrix(pres, rows, p)


def left_kernel_rank(D: OpMatrix, level: int) -> int:
    """Dimension over K of the u-only rows at ``level`` (raw kernel oracle)."""
    return len(relations_at_level(D, level))


def generated_rank(C: OpMatrix, D: OpMatrix, level: int) -> int:
    """Dimension of the span of prolongations of C's rows inside the level."""
    bounds = _bounds(D, level)
    e = Echelon(jet_key, D.pres.zero)
    for r in C.rows:
        j = row_to_jets(r)
        if j and all(sum(mu) <= bounds[t] for t, mu in j):
            e.add_all(_prolong_within(D.pres, j, bounds))
    return e.rank


# -- provenance

def provenance_matrix(S_in: LinearSystem, S_out: LinearSystem, level: int) -> OpMatrix:
    """T with rows(S_out) = T rows(S_in), read off the tagged echelon at ``level``."""
    pres = S_in.pres
    m = S_in.m
    p = len(S_in.rows)
    e = _tagged_echelon(pres, m, S_in.rows, level)
    out = []
    for row in S_out.rows:
        rem = e.reduce(row)
        if any(k < m for k, _ in rem):
            raise ValueError("output row not generated by the input rows at this level")
        # row - sum c (Phi - u) = u-part  =>  row = sum c Phi  with c read from the u-part
        out.append(jets_to_row(pres, _u_part(rem, m), p))
    return OpMatrix(pres, out, p)


# -- presented modules

class PresentedModule:
    """M = D^m / D^p rows(relations)."""

    def __init__(self, relations: OpMatrix, max_prolong: int = 8, attempts: int = 8, seed: int = 0):
        self.relations = relations
        self.pres = relations.pres
        self.m = relations.m
        self.max_prolong = max_prolong
        self.attempts = attempts
        self.seed = seed
        self._completion = None
        self._levels: Dict[int, Echelon] = {}
        self._gen_level: Optional[int] = None

    @classmethod
    def free(cls, pres, m: int) -> "PresentedModule":
        return cls(OpMatrix(pres, [], m))

    def system(self) -> LinearSystem:
        return LinearSystem(self.pres, self.m, [row_to_jets(r) for r in self.relations.rows])

    def completion(self):
        """(involutive system, report) of the relations' jet system, cached."""
        if self._completion is None:
            from .involution import pp_complete
            S, rep, _ = pp_complete(self.system(), self.max_prolong, self.attempts, self.seed)
            self._completion = (S, rep)
        return self._completion

    def level_echelon(self, level: int) -> Echelon:
        e = self._levels.get(level)
        if e is None:
            rows = []
            for r in self.relations.rows:
                j = row_to_jets(r)
                if j:
                    rows.extend(d for _, d in row_prolongations(self.pres, j, max(level - row_order(j), 0)))
            e = Echelon(jet_key, self.pres.zero)
            e.add_all(rows)
            self._levels[level] = e
        return e

    def generation_level(self) -> int:
        """Least order L such that the relations prolonged to order L span the
        involutive completion."""
        if self._gen_level is None:
            S, rep = self.completion()
            low = max(row_order(r) for r in S.rows) if S.rows else 0
            low = max(low, self.relations.order())
            for L in range(low, rep.max_order + 1):
                e = self.level_echelon(L)
                if all(e.contains(r) for r in S.rows):
                    break
            self._gen_level = L
        return self._gen_level

    def exact_level(self, order: int) -> Optional[int]:
        """A prolongation level that decides membership for rows of this order."""
        from .involution import PPBudgetExhausted
        try:
            S, _ = self.completion()
            L = self.generation_level()
        except PPBudgetExhausted:
            return None
        return max(order, L + max(0, order - S.q))

    def __repr__(self):
        return f"PresentedModule(m={self.m}, relations={self.relations.p})"


def _as_jets(row) -> Row:
    if isinstance(row, dict):
        return row
    return row_to_jets(row)


def reduce(row, M: PresentedModule, slack: int = 3) -> List[DiffOp]:
    """Remainder of an operator row modulo the module generated by M's relations.

    The remainder is zero exactly when the row is a left combination of the
    relations.  The level is taken from the involutive completion; without
    one, ranks are watched for ``slack`` extra orders and the outcome is
    inconclusive unless the remainder vanishes or ranks stay put twice.
    """
    jets = _as_jets(row)
    if isinstance(row, dict):
        width = M.m
    else:
        width = len(row)
        if width != M.m:
            raise ValueError(f"width mismatch: row of width {width}, module of rank {M.m}")
    if not jets:
        return [DiffOp.zero(M.pres) for _ in range(M.m)]
    if M.relations.p == 0:
        return jets_to_row(M.pres, jets, M.m)
    o = row_order(jets)
    lvl = M.exact_level(o)
    if lvl is not None:
        rem = M.level_echelon(lvl).reduce(jets)
        return jets_to_row(M.pres, rem, M.m)
    stable = 0
    prev = None
    for lvl in range(o, o + slack + 1):
        e = M.level_echelon(lvl)
        rem = e.reduce(jets)
        if not rem:
            return jets_to_row(M.pres, rem, M.m)
        sig = len(rem)
        stable = stable + 1 if sig == prev else 0
        prev = sig
        if stable >= 2:
            return jets_to_row(M.pres, rem, M.m)
    raise MembershipBudgetExhausted("membership budget exhausted: inconclusive")


def is_member(row, M: PresentedModule) -> bool:
    return all(P.is_zero() for P in reduce(row, M))


# -- resolutions

@dataclass
class ResolutionReport:
    maps: List[OpMatrix]
    ranks: List[int]
    euler_characteristic: int
    composition_zero: List[bool]
    complete: bool
    notes: List[str] = field(default_factory=list)


def free_resolution(M: PresentedModule, length: int = 4, max_order: int = 10,
                    max_prolong: int = 8) -> ResolutionReport:
    """0 <- M <- D^{a_0} <- D^{a_1} <- ... by iterated compatibility conditions.

    maps[0] is the presentation D^{a_1} -> D^{a_0}; each later map is the CC of
    the previous one.  ``complete`` is set when a zero kernel was reached.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    maps: List[OpMatrix] = []
    ranks = [M.m]
    checks: List[bool] = []
    cur = M.relations
    complete = False
    if cur.p == 0:
        complete = True
    else:
        maps.append(cur)
        ranks.append(cur.p)
        for _ in range(length):
            C = compatibility_conditions(cur, max_order=max_order, max_prolong=max_prolong)
            if C.p == 0:
                complete = True
                break
            checks.append(compose(C, cur).is_zero())
            maps.append(C)
            ranks.append(C.p)
            cur = C
    chi = sum((-1) ** i * a for i, a in enumerate(ranks))
    notes = [] if complete else ["resolution truncated at the requested length"]
    return ResolutionReport(maps, ranks, chi, checks, complete, notes)


# -- submodules

def _check_width(G: OpMatrix, N: PresentedModule, what: str):
    if G.m != N.m:
        raise ValueError(f"width mismatch: {what} has width {G.m}, module has rank {N.m}")


def submodule_sum(gensL: OpMatrix, gensM: OpMatrix, N: PresentedModule) -> PresentedModule:
    """N/(L+M): N's relations together with both generator stacks."""
    _check_width(gensL, N, "gensL")
    _check_width(gensM, N, "gensM")
    rel = N.relations.stack(gensL).stack(gensM)
    return PresentedModule(rel, N.max_prolong, N.attempts, N.seed)


def generated_submodule(gens: OpMatrix, N: PresentedModule, max_order: int = 10) -> PresentedModule:
    """Presentation of the submodule of N spanned by the rows of ``gens``.

    The new unknowns stand for the generators; the relations are the
    gens-blocks of the syzygies of [gens; relations(N)].
    """
    _check_width(gens, N, "gens")
    stacked = gens.stack(N.relations)
    C = compatibility_conditions(stacked, max_order=max_order, max_prolong=N.max_prolong)
    k = gens.p
    rows = [r[:k] for r in C.rows if any(not P.is_zero() for P in r[:k])]
    rel = OpMatrix(N.pres, rows, k)
    return PresentedModule(_minimize(rel), N.max_prolong, N.attempts, N.seed)


def _minimize(G: OpMatrix, base: Optional[OpMatrix] = None) -> OpMatrix:
    """Drop rows that reduce to zero modulo the remaining rows (and ``base``)."""
    rows = list(G.rows)
    i = len(rows) - 1
    while i >= 0:
        others = rows[:i] + rows[i + 1:]
        mat = OpMatrix(G.pres, others, G.m)
        if base is not None:
            mat = mat.stack(base)
        if is_member(rows[i], PresentedModule(mat)):
            rows.pop(i)
        i -= 1
    return OpMatrix(G.pres, rows, G.m)


def submodule_intersection(gensL: OpMatrix, gensM: OpMatrix, N: PresentedModule,
                           max_order: int = 10) -> OpMatrix:
    """Generators of L cap M inside N from the syzygies of [gensL; gensM; relations(N)]."""
    _check_width(gensL, N, "gensL")
    _check_width(gensM, N, "gensM")
    pres = N.pres
    if gensL.p == 0 or gensM.p == 0:
        return OpMatrix(pres, [], N.m)
    stacked = gensL.stack(gensM).stack(N.relations)
    C = compatibility_conditions(stacked, max_order=max_order, max_prolong=N.max_prolong)
    k = gensL.p
    elems = []
    for r in C.rows:
        coeff = OpMatrix(pres, [r[:k]], k)
        e = compose(coeff, gensL).rows[0]
        if N.relations.p and is_member(e, N):
            continue
        if all(P.is_zero() for P in e):
            continue
        elems.append(e)
    G = OpMatrix(pres, elems, N.m)
    G = _minimize(G, N.relations if N.relations.p else None)
    return OpMatrix(pres, [_monic_row(r) for r in G.rows], N.m)


def _monic_row(row: List[DiffOp]) -> List[DiffOp]:
    jets = row_to_jets(row)
    lead = min(jets, key=jet_key)
    inv = jets[lead].inverse()
    return [P.scale(inv) for P in row]


# -- differential rank

def differential_rank(M: PresentedModule, attempts: Optional[int] = None, seed: Optional[int] = None) -> int:
    """alpha^n of the involutive completion of M's system, in the best frame found."""
    from .involution import characters
    from .system import symbol
    S, _ = M.completion()
    g = symbol(S, max(S.q, 1))
    cv, _ = characters(g, M.attempts if attempts is None else attempts,
                       M.seed if seed is None else seed)
    return cv.alpha[-1]
