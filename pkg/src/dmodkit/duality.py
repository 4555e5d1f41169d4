"""
Torsion, controllability and parametrizations by double duality.

For a relation matrix D the pipeline is A = ad(D), B = CC(A), P = ad(B),
C = CC(P).  Then D o P = 0, the rows of C generate the relations satisfied
by the image of P, and the module defined by D is torsion-free exactly when
every row of C is already a consequence of D; the rows that are not give
the torsion elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from .operator import DiffOp, OpMatrix, adjoint, compose, left_inverse, row_to_jets
from .resolution import PresentedModule, compatibility_conditions, is_member, reduce
from .system import jet_key


class StageBudgetExhausted(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {cause}")


@dataclass
class TorsionReport:
    torsion_free: bool
    generators: List[List[DiffOp]]
    annihilators: List[List[DiffOp]]
    A: OpMatrix
    B: OpMatrix
    P: OpMatrix
    C: OpMatrix


@dataclass
class Parametrization:
    P: OpMatrix
    left_inverse: Optional[OpMatrix]
    exact: bool

    @property
    def injective(self) -> bool:
        return self.left_inverse is not None


@dataclass
class Controllability:
    controllable: bool
    parametrization: Optional[Parametrization] = None
    torsion: Optional[TorsionReport] = None
    notes: List[str] = field(default_factory=list)


def _stage(name, fn, *args, **kw):
    from .involution import PPBudgetExhausted
    from .operator import SyzygyBudgetExhausted
    try:
        return fn(*args, **kw)
    except (PPBudgetExhausted, SyzygyBudgetExhausted) as exc:
        raise StageBudgetExhausted(name, exc) from exc


def _monic(row: Sequence[DiffOp]) -> List[DiffOp]:
    jets = row_to_jets(row)
    if not jets:
        return list(row)
    inv = jets[min(jets, key=jet_key)].inverse()
    return [P.scale(inv) for P in row]


def annihilators(omega: Sequence[DiffOp], D: OpMatrix, max_order: int = 10) -> List[DiffOp]:
    """Scalar operators Q with Q o omega in the row module of D (syzygy generators)."""
    stacked = OpMatrix(D.pres, [list(omega)], D.m).stack(D)
    C = compatibility_conditions(stacked, max_order=max_order)
    out = []
    for r in C.rows:
        Q = r[0]
        if not Q.is_zero():
            out.append(Q.monic())
    out.sort(key=lambda Q: (Q.order, str(Q)))
    return out


def torsion_test(D: OpMatrix, max_order: int = 10, max_prolong: int = 8) -> TorsionReport:
    pres = D.pres
    A = adjoint(D)
    B = _stage("B", compatibility_conditions, A, max_order=max_order, max_prolong=max_prolong)
    P = adjoint(B) if B.p else OpMatrix(pres, [[] for _ in range(D.m)], 0)
    C = _stage("C", compatibility_conditions, P, max_order=max_order, max_prolong=max_prolong) \
        if P.m else OpMatrix.identity(pres, D.m)
    M = PresentedModule(D, max_prolong)
    gens: List[List[DiffOp]] = []
    base = D
    for row in C.rows:
        rem = _stage("C", reduce, row, M)
        if all(Q.is_zero() for Q in rem):
            continue
        if gens and is_member(rem, PresentedModule(base, max_prolong)):
            continue
        rem = _monic(rem)
        gens.append(rem)
        base = base.stack(OpMatrix(pres, [rem], D.m))
    anns = [_stage("annihilator", annihilators, g, D, max_order) for g in gens]
    return TorsionReport(not gens, gens, anns, A, B, P, C)


def parametrize(D: OpMatrix, max_order: int = 10, max_prolong: int = 8,
                inverse_order: int = 2) -> Optional[Parametrization]:
    """ad(CC(ad(D))) when the module is torsion-free, with a left inverse if one is found."""
    rep = torsion_test(D, max_order, max_prolong)
    if not rep.torsion_free:
        return None
    P = rep.P
    if P.m == 0:
        return Parametrization(P, None, True)
    return Parametrization(P, left_inverse(P, inverse_order), True)


def is_controllable(D: OpMatrix, max_order: int = 10, max_prolong: int = 8) -> Controllability:
    rep = torsion_test(D, max_order, max_prolong)
    if rep.torsion_free:
        P = rep.P
        inv = left_inverse(P, 2) if P.m else None
        return Controllability(True, Parametrization(P, inv, True), rep)
    return Controllability(False, None, rep)


# -- Kalman form

def kalman_operator(pres, A: Sequence[Sequence], B: Sequence[Sequence]) -> OpMatrix:
    """Rows d y - A y - B u over n = 1, unknowns ordered (y, u)."""
    if pres.n != 1:
        raise ValueError("Kalman form needs one independent variable")
    nA = len(A)
    k = len(B[0]) if B else 0
    d = DiffOp.d(pres, 1)
    rows = []
    for i in range(nA):
        row = []
        for j in range(nA):
            a = DiffOp.scalar(pres, pres.coerce(A[i][j]))
            row.append((d - a) if i == j else -a)
        for j in range(k):
            row.append(-DiffOp.scalar(pres, pres.coerce(B[i][j])))
        rows.append(row)
    return OpMatrix(pres, rows, nA + k)


def kalman_rank(A: Sequence[Sequence], B: Sequence[Sequence]) -> int:
    """Rank of [B, AB, ..., A^{n-1}B] over Q (constant entries)."""
    n = len(A)
    A = [[Fraction(x) for x in r] for r in A]
    blocks = [[Fraction(x) for x in r] for r in B]
    cols = []
    cur = blocks
    for _ in range(n):
        for j in range(len(cur[0]) if cur else 0):
            cols.append([cur[i][j] for i in range(n)])
        cur = [[sum(A[i][t] * cur[t][j] for t in range(n)) for j in range(len(cur[0]))] for i in range(n)]
    return _rank(cols)


def _rank(vectors) -> int:
    rows = [list(v) for v in vectors]
    r = 0
    ncol = len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r
