from math import comb

from cases import J, Q2, Q3, janet, macaulay, pd1, row
from dmodkit.system import LinearSystem, jet_key, prolong, project, symbol


def test_prolong_zero_is_identity():
    S = macaulay()
    assert prolong(S, 0) is S


def test_macaulay_prolongation_contains_y123_minus_y111():
    P = prolong(macaulay(), 1)
    assert P.contains({J(0, 1, 1, 1): Q3.one, J(0, 3, 0, 0): -Q3.one})


def test_macaulay_symbol_dims():
    S = macaulay()
    assert [symbol(S, s).dim for s in (2, 3, 4)] == [3, 1, 0]


def test_empty_symbol_is_full():
    S = LinearSystem(Q3, 2, [], 1)
    for s in (1, 2, 3):
        assert symbol(S, s).dim == 2 * comb(3 + s - 1, 2)


def test_janet_symbol():
    assert symbol(janet(), 2).dim == 4


def test_dim_formula():
    S = janet()
    assert S.dim == comb(3 + 2, 3) - 2


def test_rhs_as_unknowns():
    # y_1 + x2 y - u = 0, y_2 - v = 0 in the jets of (y, u, v)
    S = LinearSystem(Q2, 3, [row(Q2, (1, 0, (1, 0)), ("x2", 0, (0, 0)), (-1, 1, (0, 0))),
                             row(Q2, (1, 0, (0, 1)), (-1, 2, (0, 0)))])
    P = prolong(S, 1)
    assert P.contains(row(Q2, (1, 0, (1, 1)), ("x2", 0, (0, 1)), (1, 0, (0, 0)), (-1, 1, (0, 1))))
    # y = u_2 - v_1 - x2 v
    assert project(P, 1).contains(row(Q2, (1, 0, (0, 0)), (-1, 1, (0, 1)), (1, 2, (1, 0)), ("x2", 2, (0, 0))))


def test_project_to_own_order():
    S = macaulay()
    assert project(S, S.q).rank == S.rank


def test_pd1_projection():
    S = pd1()
    R3 = project(prolong(S, 1), 3)
    assert R3.contains({J(0, 3, 0): S.pres.one})


def test_jet_order():
    # order first, then multi-index
    jets = [J(0, 0, 1), J(0, 2, 0), J(1, 0, 0), J(0, 1, 1)]
    assert sorted(jets, key=jet_key)[:2] == [J(0, 1, 1), J(0, 2, 0)]


def test_prolongation_order_independent():
    S = janet()
    a = prolong(prolong(S, 1), 1)
    b = prolong(S, 2)
    assert a.rank == b.rank
    assert all(b.contains(r) for r in a.rows)
