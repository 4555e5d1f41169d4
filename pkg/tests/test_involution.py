from math import comb

import pytest

from cases import J, Q1, Q2, Q3, burgers, janet, kdv, macaulay, pd1, row, spencer_three, staircase, two_unknowns
from dmodkit.involution import (NotInvolutive, PPBudgetExhausted, characters, ck_data, completion_added_rows,
                                delta_cohomology, delta_matrix_check, involution_test, pp_complete,
                                spencer_bundle_dims, spencer_form)
from dmodkit.system import LinearSystem, SymbolSpace, project, prolong, symbol


def test_macaulay_fails_at_order_two():
    S = macaulay()
    rep = involution_test(S)
    assert rep.verdict == "incomplete"
    assert rep.dim_g == 3
    g2 = symbol(S, 2)
    assert any(delta_cohomology(g2, s, r).H for s in (1, 2) for r in (0, 1))


def test_macaulay_g3_two_acyclic():
    g3 = symbol(macaulay(), 3)
    assert g3.dim == 1
    assert delta_cohomology(g3, 2, 0).H == 0


def test_macaulay_completion():
    C, rep, _ = pp_complete(macaulay())
    assert rep.verdict == "involutive"
    assert C.q == 4 and C.dim == 8
    assert symbol(C, 4).dim == 0


def test_full_symbol_exact():
    g = SymbolSpace(Q3, 1, 2, [])
    for s in (1, 2, 3):
        assert delta_cohomology(g, s, 0).H == 0


def test_zero_symbol_characters():
    g = symbol(LinearSystem(Q2, 1, [{J(0, 1, 0): Q2.one}, {J(0, 0, 1): Q2.one}]), 1)
    cv, _ = characters(g)
    assert cv.alpha == [0, 0]


def test_kdv_characters():
    rep = involution_test(kdv())
    assert rep.verdict == "involutive"
    assert rep.characters.alpha == [3, 0]


def test_burgers_involutive():
    rep = involution_test(burgers())
    assert rep.verdict == "involutive"
    assert [t.multiplicative for t in rep.tabular] == [[1, 2], [1, 2]]


def test_single_equation_involutive():
    assert involution_test(LinearSystem(Q2, 1, [{J(0, 1, 0): Q2.one}])).involutive


def test_already_involutive_unchanged():
    S = burgers()
    C, rep, _ = pp_complete(S)
    assert rep.steps == 0 and C is S


def test_pd1_completion():
    S = pd1()
    C, rep, _ = pp_complete(S)
    assert rep.verdict == "involutive" and C.q == 3
    assert C.contains({J(0, 3, 0): S.pres.one})


def test_staircase_degenerates():
    S = staircase()
    C, rep, _ = pp_complete(S)
    assert rep.verdict.startswith("degenerate")
    assert C.contains({J(0, 0, 0): S.pres.one})
    assert [k for k, _ in rep.trace] == ["project"] * 3
    # first new row: 2 y eta_2 - x2 eta_1 + 2 y_2 eta = 0
    first = row(S.pres, ("2*y", 0, (0, 1)), ("-x2", 0, (1, 0)), ("2*y_2", 0, (0, 0)))
    assert LinearSystem(S.pres, 1, S.rows + [first]).rank == S.rank + 1
    R1 = project(prolong(S, 1), 2)
    assert R1.contains(first) and R1.rank == S.rank + 1


def test_relations_appear_in_first_projection():
    S = LinearSystem(Q2, 3, [row(Q2, (1, 0, (1, 0)), ("x2", 0, (0, 0)), (-1, 1, (0, 0))),
                             row(Q2, (1, 0, (0, 1)), (-1, 2, (0, 0)))])
    C, rep, _ = pp_complete(S)
    assert rep.verdict == "involutive" and C.q == 1
    # y = u_2 - v_1 - x2 v
    assert C.contains(row(Q2, (1, 0, (0, 0)), (-1, 1, (0, 1)), (1, 2, (1, 0)), ("x2", 2, (0, 0))))
    assert sorted(t.cls for t in rep.tabular) == [1, 2, 2]


def test_budget_surfaced():
    with pytest.raises(PPBudgetExhausted):
        pp_complete(janet(), max_steps=1)


def test_provenance_identity():
    from dmodkit.operator import OpMatrix, compose, jets_to_row
    S = macaulay()
    C, rep, T = pp_complete(S, provenance=True)
    Din = OpMatrix(S.pres, [jets_to_row(S.pres, r, 1) for r in S.rows], 1)
    Dout = OpMatrix(S.pres, [jets_to_row(S.pres, r, 1) for r in C.rows], 1)
    assert compose(T, Din) == Dout


def test_ck_spencer_three():
    ck = ck_data(spencer_three())
    assert ck.counts[0] == 3 and ck.counts[1] == 0


def test_ck_janet():
    C, _, _ = pp_complete(janet())
    ck = ck_data(C)
    assert ck.finite_type and ck.total == 12


def test_ck_empty():
    ck = ck_data(LinearSystem(Q2, 1, [], 1))
    assert ck.counts == {0: 0, 1: 0, 2: 1}


def test_ck_requires_involution():
    with pytest.raises(NotInvolutive):
        ck_data(macaulay())


def test_spencer_form_of_second_order_pair():
    S = two_unknowns().with_rows([{J(1, 2): Q1.one}])
    F = spencer_form(S)
    assert F.m == 3
    o = Q1.one
    expect = [{J(0, 1): o, J(1, 0): -o}, {J(1, 1): o, J(0, 0): -o}, {J(2, 1): o}]
    assert F.rank == 3 and all(F.contains(r) for r in expect)


def test_spencer_form_characters():
    C, _, _ = pp_complete(janet())
    for S in (C, kdv()):
        a = involution_test(S).characters.alpha
        F = spencer_form(S)
        abar = involution_test(F).characters.alpha
        assert abar == [sum(a[i:]) for i in range(len(a))]


def test_spencer_form_first_order_identity():
    S = burgers()
    F = spencer_form(S)
    assert F.m == S.dim


def test_bundle_dims_macaulay():
    C, _, _ = pp_complete(macaulay())
    dims = spencer_bundle_dims(C)
    assert dims["C"][0] == 8
    # C_r = Lambda^r (x) R_q when g_{q+1} = 0
    assert dims["C"] == [8 * comb(3, r) for r in range(4)]


def test_bundle_dims_first_order_relation():
    S = LinearSystem(Q2, 3, [row(Q2, (1, 0, (1, 0)), ("x2", 0, (0, 0)), (-1, 1, (0, 0))),
                             row(Q2, (1, 0, (0, 1)), (-1, 2, (0, 0)))])
    C, _, _ = pp_complete(S)
    dims = spencer_bundle_dims(C)
    assert dims["F"][0] == C.rank


def test_delta_squared_zero():
    for S in (macaulay(), janet(), kdv()):
        for s in range(S.n + 1):
            assert delta_matrix_check(symbol(S, S.q), s)
