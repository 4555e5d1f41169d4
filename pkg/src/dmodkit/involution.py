"""
Involution machinery: Spencer delta-cohomology, characters, the Janet test,
prolongation/projection completion, Cartan-Kahler counts and Spencer form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dfield
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .field import RatFun
from .linalg import Echelon
from .operator import MultiIndex, inc, indices_of_order, indices_up_to, mi_class
from .system import (Jet, LinearSystem, Row, SymbolSpace, jet_key, monic_row, project,
                     prolong, row_order, row_str, symbol)


class PPBudgetExhausted(RuntimeError):
    def __init__(self, steps, trace=None):
        self.steps = steps
        self.trace = trace or []
        super().__init__(f"PP budget exhausted (steps={steps})")


class NotInvolutive(ValueError):
    def __init__(self, what="system not involutive"):
        super().__init__(what)


class InternalDisagreement(AssertionError):
    pass


# -- coordinate changes on symbols

def _expand_monomial(A: Tuple[Tuple[int, ...], ...], mu: MultiIndex, memo) -> Dict[MultiIndex, int]:
    """xi^mu with xi_i = sum_j A[j][i] xibar_j, as {nu: integer coefficient}."""
    hit = memo.get(mu)
    if hit is not None:
        return hit
    n = len(mu)
    if not any(mu):
        out = {mu: 1}
    else:
        i = max(k for k, e in enumerate(mu) if e)
        prev = mu[:i] + (mu[i] - 1,) + mu[i + 1:]
        base = _expand_monomial(A, prev, memo)
        out = {}
        for nu, c in base.items():
            for j in range(n):
                a = A[j][i]
                if a:
                    nu2 = nu[:j] + (nu[j] + 1,) + nu[j + 1:]
                    out[nu2] = out.get(nu2, 0) + c * a
        out = {nu: c for nu, c in out.items() if c}
    memo[mu] = out
    return out


def transform_symbol(g: SymbolSpace, A) -> SymbolSpace:
    """The symbol in the frame xbar = A x (A unimodular, integer)."""
    A = tuple(tuple(r) for r in A)
    memo: Dict = {}
    rows = []
    for row in g.rows:
        new: Row = {}
        for (k, mu), a in row.items():
            for nu, c in _expand_monomial(A, mu, memo).items():
                t = a * c
                old = new.get((k, nu))
                new[(k, nu)] = t if old is None else old + t
        rows.append({j: a for j, a in new.items() if not a.is_zero()})
    return SymbolSpace(g.pres, g.m, g.s, rows)


def _det(M) -> int:
    from fractions import Fraction
    n = len(M)
    a = [[Fraction(x) for x in r] for r in M]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for k in range(c, n):
                a[r][k] -= f * a[c][k]
    return int(det)


def unimodular_frames(n: int, attempts: int, seed: int = 0) -> List[Tuple[Tuple[int, ...], ...]]:
    """Identity followed by attempts-1 pseudorandom unimodular matrices, entries in [-3, 3]."""
    ident = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    out = [ident]
    rng = random.Random(seed)
    while len(out) < attempts:
        M = tuple(tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(n))
        if abs(_det(M)) == 1:
            out.append(M)
    return out


# -- characters

@dataclass
class CharacterVector:
    alpha: List[int]
    beta: List[int]

    def weighted(self) -> int:
        return sum((i + 1) * a for i, a in enumerate(self.alpha))

    def predicted_dim(self, r: int) -> int:
        """dim g_{q+r} from the characters."""
        return sum(comb(r + i, r) * a for i, a in enumerate(self.alpha))


def characters(g: SymbolSpace, attempts: int = 8, seed: int = 0):
    """Characters in the frame minimizing sum i*alpha^i among the tried frames."""
    cv, A, _ = _characters_full(g, attempts, seed)
    return cv, A


def _characters_full(g: SymbolSpace, attempts: int, seed: int):
    best = None
    for A in unimodular_frames(g.n, max(1, attempts), seed):
        h = transform_symbol(g, A) if best is not None else g
        cv = CharacterVector(h.alpha(), h.beta())
        if best is None or cv.weighted() < best[0].weighted():
            best = (cv, A, h)
    return best


# -- delta-cohomology

@dataclass
class CohomologyDims:
    s: int
    r: int
    B: int
    Z: int
    H: int


def _forms(n: int, s: int) -> List[Tuple[int, ...]]:
    if s < 0 or s > n:
        return []
    return list(combinations(range(1, n + 1), s))


def _wedge(i: int, I: Tuple[int, ...]):
    """dx^i ^ dx^I = sign * dx^J."""
    if i in I:
        return 0, None
    pos = sum(1 for j in I if j < i)
    J = tuple(sorted(I + (i,)))
    return (-1) ** pos, J


def delta(pres, n: int, elem: Dict[Tuple[Jet, Tuple[int, ...]], RatFun]):
    """(delta w)^k_mu = dx^i ^ w^k_{mu+1_i}; elements map ((k, mu), I) -> coefficient."""
    out: Dict = {}
    for ((k, nu), I), a in elem.items():
        for i in range(1, n + 1):
            if nu[i - 1] == 0:
                continue
            sign, J = _wedge(i, I)
            if J is None:
                continue
            mu = nu[:i - 1] + (nu[i - 1] - 1,) + nu[i:]
            key = ((k, mu), J)
            t = a if sign == 1 else -a
            old = out.get(key)
            out[key] = t if old is None else old + t
    return {k: v for k, v in out.items() if not v.is_zero()}


def _dkey(c):
    (k, mu), I = c
    return (jet_key((k, mu)), I)


def delta_cohomology(g: SymbolSpace, s: int, r: int = 0) -> CohomologyDims:
    """Dimensions of B, Z, H at Lambda^s T* (x) g_{q+r}, q the order of g."""
    n, pres = g.n, g.pres
    if not 0 <= s <= n:
        raise ValueError("s out of range")
    gt = g.prolong(r) if r else g
    gt1 = gt.prolong(1)
    basis_t = gt.basis()
    basis_t1 = gt1.basis()
    forms_s = _forms(n, s)
    dim_space = len(basis_t) * len(forms_s)
    # cycles
    e = Echelon(_dkey, pres.zero)
    for v in basis_t:
        for I in forms_s:
            e.add(delta(pres, n, {(j, I): a for j, a in v.items()}))
    Z = dim_space - e.rank
    # boundaries, and the delta o delta = 0 check on them
    B = 0
    if s >= 1:
        eb = Echelon(_dkey, pres.zero)
        for v in basis_t1:
            for I in _forms(n, s - 1):
                img = delta(pres, n, {(j, I): a for j, a in v.items()})
                if delta(pres, n, img):
                    raise InternalDisagreement("delta o delta != 0")
                eb.add(img)
        B = eb.rank
    return CohomologyDims(s, r, B, Z, Z - B)


def delta_matrix_check(g: SymbolSpace, s: int) -> bool:
    """delta o delta = 0 on Lambda^s (x) g_s-basis elements."""
    n, pres = g.n, g.pres
    for v in g.basis():
        for I in _forms(n, s):
            img = delta(pres, n, {(j, I): a for j, a in v.items()})
            if delta(pres, n, img):
                return False
    return True


# -- involution test

@dataclass
class TabularRow:
    leader: Jet
    cls: int
    multiplicative: List[int]
    text: str


@dataclass
class InvolutionReport:
    verdict: str
    characters: CharacterVector
    tabular: List[TabularRow]
    cohomology: List[CohomologyDims]
    coordinate_change: Tuple[Tuple[int, ...], ...]
    trace: List[Tuple[str, object]] = dfield(default_factory=list)
    surjective: bool = True
    two_acyclic: bool = True
    order: int = 0
    dim_g: int = 0
    dim_g_next: int = 0
    dim: int = 0
    steps: int = 0
    max_order: int = 0

    @property
    def involutive(self) -> bool:
        return self.verdict == "involutive"


def janet_tabular(S: LinearSystem) -> List[TabularRow]:
    """Solved rows with their class and multiplicative variables (zero order: none)."""
    out = []
    for row in S.solved_rows():
        lead = min(row, key=jet_key)
        c = mi_class(lead[1])
        mult = list(range(1, c + 1)) if sum(lead[1]) == S.q else []
        out.append(TabularRow(lead, c, mult, row_str(row, S.names)))
    return out


def involution_test(S: LinearSystem, attempts: int = 8, seed: int = 0) -> InvolutionReport:
    q = S.q
    P = prolong(S, 1)
    surjective = project(P, q).rank == S.rank
    g = symbol(S, q)
    g1 = SymbolSpace(S.pres, S.m, q + 1, [{j: a for j, a in r.items() if sum(j[1]) == q + 1} for r in P.rows])
    if q == 0:
        cv = CharacterVector([0] * S.n, [0] * S.n)
        A = unimodular_frames(S.n, 1)[0]
        # no classes at order 0; g_1 = T* (x) g_0 always holds for zero-order rows
        janet_ok = g1.dim == g.dim * S.n
        coh = []
    else:
        cv, A, _ = _characters_full(g, attempts, seed)
        janet_ok = g1.dim == cv.weighted()
        coh = [delta_cohomology(g, s, 0) for s in range(1, S.n + 1)]
        if janet_ok and any(c.H for c in coh):
            raise InternalDisagreement("Janet equality holds but delta-cohomology does not vanish")
    two_acyclic = all(c.H == 0 for c in coh if c.s <= 2)
    if two_acyclic and q > 0 and not janet_ok:
        two_acyclic = all(c.H == 0 for c in (delta_cohomology(g, s, 1) for s in (1, 2) if s <= S.n))
    if surjective and janet_ok:
        verdict = "involutive"
    elif surjective and two_acyclic:
        verdict = "formally-integrable-only"
    else:
        verdict = "incomplete"
    return InvolutionReport(verdict, cv, janet_tabular(S), coh, A, [], surjective, two_acyclic,
                            q, g.dim, g1.dim, S.dim, 0, q + 1)


def _annihilated(S: LinearSystem) -> bool:
    return S.m > 0 and project(S, 0).rank == S.m


def pp_complete(S: LinearSystem, max_steps: int = 8, attempts: int = 8, seed: int = 0,
                provenance: bool = False):
    """Prolong/project until involutive.

    Returns (system, report, T) where T is an OpMatrix with rows_out = T rows_in
    (None unless ``provenance``).  The report's ``max_order`` is the order up
    to which S itself must be prolonged to span every row that was used.
    """
    cur = S
    trace: List[Tuple[str, object]] = []
    steps = 0
    top = S.q
    excess = 0  # rows of cur lie in the span of S prolonged to order cur.q + excess
    while True:
        P = prolong(cur, 1)
        proj = project(P, cur.q)
        if proj.rank > cur.rank:
            if steps >= max_steps:
                raise PPBudgetExhausted(steps, trace)
            added = [monic_row(r) for r in proj.rows if not cur.contains(r)]
            trace.append(("project", [row_str(r, S.names) for r in _fresh(cur, added)]))
            top = max(top, P.q + excess)
            excess += 1
            cur = proj
            steps += 1
            continue
        rep = involution_test(cur, attempts, seed)
        if rep.verdict == "involutive":
            break
        if steps >= max_steps:
            raise PPBudgetExhausted(steps, trace)
        trace.append(("prolong", cur.q + 1))
        cur = P
        top = max(top, P.q + excess)
        steps += 1
    rep.trace = trace
    rep.steps = steps
    rep.max_order = top
    if _annihilated(cur):
        rep.verdict = "degenerate: unknowns annihilated"
    T = None
    if provenance:
        from .resolution import provenance_matrix
        T = provenance_matrix(S, cur, top)
    return cur, rep, T


def _fresh(cur: LinearSystem, added: List[Row]) -> List[Row]:
    """Added rows reduced against each other, in leader order."""
    e = cur.echelon.copy()
    out = []
    for r in sorted(added, key=lambda r: jet_key(min(r, key=jet_key))):
        red = e.reduce(r)
        if red:
            e.add(red)
            out.append(r)
    return out


def _done(S, attempts, seed) -> bool:
    P = prolong(S, 1)
    if project(P, S.q).rank > S.rank:
        return False
    return involution_test(S, attempts, seed).verdict == "involutive"


def completion_added_rows(trace) -> List[List[str]]:
    return [rows for kind, rows in trace if kind == "project"]


# -- Cartan-Kahler counts

@dataclass
class CKData:
    order: int
    counts: Dict[int, int]
    beta: List[int]
    unknowns: int
    finite_type: bool
    total: Optional[int]


def ck_data(S: LinearSystem, attempts: int = 8, seed: int = 0) -> CKData:
    """Arbitrary functions of i variables (i = 0..n) in the formal solution.

    For a first-order involutive system without zero-order equations the
    count of functions of i variables is beta^{i+1} - beta^i, with beta^0 = 0
    and beta^{n+1} = number of unknowns.  Other systems pass to Spencer form.
    """
    rep = involution_test(S, attempts, seed)
    if rep.verdict != "involutive":
        raise NotInvolutive()
    F = S
    if S.q != 1 or project(S, 0).rank > 0:
        F = spencer_form(S, attempts, seed)
    frep = involution_test(F, attempts, seed)
    beta = list(frep.characters.beta)
    ext = [0] + beta + [F.m]
    counts = {i: ext[i + 1] - ext[i] for i in range(F.n + 1)}
    finite = all(c == 0 for i, c in counts.items() if i > 0)
    total = counts[0] if finite else None
    return CKData(S.q, counts, beta, F.m, finite, total)


# -- Spencer form

def spencer_form(S: LinearSystem, attempts: int = 8, seed: int = 0) -> LinearSystem:
    """First-order system in one unknown z per parametric jet of R_q."""
    rep = involution_test(S, attempts, seed)
    if rep.verdict != "involutive":
        raise NotInvolutive()
    q, n = S.q, S.n
    par = S.parametric()
    zi = {p: t for t, p in enumerate(par)}
    R1 = prolong(S, 1)
    ech = R1.echelon.copy()
    ech.interreduce()
    TAG = "z"

    def key(c):
        if c[0] == TAG:
            _, t, i = c
            # derivative coordinates first, higher class first, then z index
            return (1, 0 if i else 1, -i, t)
        return (0,) + jet_key(c)

    e = Echelon(key, S.pres.zero)
    one = S.pres.one
    for p in par:
        t = zi[p]
        k, mu = p
        for i in range(0, n + 1):
            jet = p if i == 0 else (k, inc(mu, i))
            nf = ech.reduce({jet: one})
            row = dict(nf)
            row[(TAG, t, i)] = -one
            e.add(row)
    e.interreduce()
    rows = []
    for c, r in sorted(e.pivots.items(), key=lambda cr: key(cr[0])):
        if c[0] != TAG:
            continue
        out: Row = {}
        for (tag, t, i), a in r.items():
            mu = tuple(1 if j == i - 1 else 0 for j in range(n)) if i else (0,) * n
            out[(t, mu)] = a
        rows.append(out)
    names = [f"z{t + 1}" for t in range(len(par))]
    return LinearSystem(S.pres, len(par), rows, 1, names)


# -- Spencer and Janet bundles

def spencer_bundle_dims(S: LinearSystem, attempts: int = 8, seed: int = 0) -> Dict[str, List[int]]:
    rep = involution_test(S, attempts, seed)
    if rep.verdict != "involutive":
        raise NotInvolutive()
    n, m, q, pres = S.n, S.m, S.q, S.pres
    g = symbol(S, q)
    g1 = g.prolong(1)
    full1 = SymbolSpace(pres, m, q + 1, [])
    gq_basis = g.basis()
    g1_basis = g1.basis()
    s1_basis = full1.basis()
    dimR, dimJ = S.dim, S.jet_count()
    C, F = [], []
    for r in range(n + 1):
        cnr = comb(n, r)
        eg = Echelon(_dkey, pres.zero)
        for v in g1_basis:
            for I in _forms(n, r - 1):
                eg.add(delta(pres, n, {(j, I): a for j, a in v.items()}))
        C.append(cnr * dimR - eg.rank)
        es = Echelon(_dkey, pres.zero)
        for v in gq_basis:
            for I in _forms(n, r):
                es.add({(j, I): a for j, a in v.items()})
        for v in s1_basis:
            for I in _forms(n, r - 1):
                es.add(delta(pres, n, {(j, I): a for j, a in v.items()}))
        sum_dim = cnr * (dimR - g.dim) + es.rank
        F.append(cnr * dimJ - sum_dim)
    return {"C": C, "F": F}
