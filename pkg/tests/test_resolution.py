import pytest

from cases import Q1, Q2, Q3, dpow, janet_operator, op, ore_column, transport_pair
from dmodkit.operator import DiffOp, OpMatrix, SyzygyBudgetExhausted, compose
from dmodkit.resolution import (PresentedModule, compatibility_conditions, differential_rank, free_resolution,
                                generated_rank, generated_submodule, is_member, left_kernel_rank, reduce,
                                submodule_intersection, submodule_sum)


def rows_equal_up_to_sign(A, B):
    return all(a == b or a == [-x for x in b] for a, b in zip(A.rows, B.rows))


def cc_chain():
    D = ore_column()
    C = compatibility_conditions(D)
    return D, C, compatibility_conditions(C)


def test_two_generating_cc():
    D, C, _ = cc_chain()
    assert C.p == 2 and [C.row_order(i) for i in range(2)] == [2, 2]
    assert C.rows[0] == [op(Q2, "d22"), op(Q2, "-d12 - x2*d2 - 2")]
    assert C.rows[1] == [op(Q2, "d12 + x2*d2 - 1"), op(Q2, "-d11 - 2*x2*d1 - x2^2")]
    assert compose(C, D).is_zero()


def test_cc_of_cc():
    _, C, C2 = cc_chain()
    assert C2.p == 1 and C2.row_order(0) == 1
    # d2 B - d1 A - x2 A
    assert C2.rows[0] == [op(Q2, "-d1 - x2"), op(Q2, "d2")]
    assert compatibility_conditions(C2).p == 0


def test_janet_cc_orders():
    C = compatibility_conditions(janet_operator())
    assert sorted(C.row_order(i) for i in range(C.p)) == [3, 6]
    assert compose(C, janet_operator()).is_zero()


def test_cc_budget():
    with pytest.raises(SyzygyBudgetExhausted):
        compatibility_conditions(janet_operator(), max_order=4)


@pytest.mark.parametrize("level", [3, 4, 5])
def test_cc_complete_against_raw_kernel(level):
    D, C, _ = cc_chain()
    assert generated_rank(C, D, level) == left_kernel_rank(D, level)


def test_janet_cc_complete_against_raw_kernel():
    D = janet_operator()
    C = compatibility_conditions(D)
    assert generated_rank(C, D, 8) == left_kernel_rank(D, 8)


def test_resolution_of_column():
    M = PresentedModule(ore_column())
    rep = free_resolution(M, 4)
    assert rep.ranks == [1, 2, 2, 1]
    assert rep.euler_characteristic == 0 == differential_rank(M)
    assert rep.complete and all(rep.composition_zero)


def test_free_module():
    rep = free_resolution(PresentedModule.free(Q1, 1))
    assert rep.ranks == [1] and rep.euler_characteristic == 1
    assert differential_rank(PresentedModule.free(Q2, 2)) == 2


def test_janet_resolution_second_map():
    rep = free_resolution(PresentedModule(janet_operator()), 2)
    second = rep.maps[1]
    assert sorted(second.row_order(i) for i in range(second.p)) == [3, 6]


def test_reduce_relations_to_zero():
    D = ore_column()
    M = PresentedModule(D)
    for r in D.rows:
        assert all(P.is_zero() for P in reduce(r, M))
    d1 = op(Q2, "d1")
    assert is_member([compose(d1, D.rows[1][0])], M)


def test_torsion_element_membership():
    D = OpMatrix(Q1, [[dpow(Q1, 3) + dpow(Q1, 2, 3) - dpow(Q1, 0, 4), -(dpow(Q1, 3) - dpow(Q1, 1))]], 2)
    M = PresentedModule(D)
    z = [op(Q1, "d11 + 4*d1 + 4"), op(Q1, "-d11 - d1")]
    assert not is_member(z, M)
    dm1 = op(Q1, "d1 - 1")
    assert is_member([compose(dm1, P) for P in z], M)


def test_generated_submodule_equation():
    one, z = DiffOp.scalar(Q1, 1), DiffOp.zero(Q1)
    rel = OpMatrix(Q1, [[-(dpow(Q1, 3) - dpow(Q1, 1)), dpow(Q1, 5) + dpow(Q1, 4, 3) - dpow(Q1, 2, 4)]], 2)
    N = PresentedModule(rel)
    G = generated_submodule(OpMatrix(Q1, [[one, z], [z, dpow(Q1, 2)]], 2), N)
    # d^3 y + 3 d^2 y - 4 y = d^3 u - d u with y = d^2 v
    assert G.relations.p == 1
    assert rows_equal_up_to_sign(G.relations, OpMatrix(Q1, [[op(Q1, "d111 - d1"), op(Q1, "-d111 - 3*d11 + 4")]], 2))


def test_submodule_sum_trivial_cases():
    N = PresentedModule(ore_column())
    L = OpMatrix(Q2, [], 1)
    M = OpMatrix(Q2, [[op(Q2, "d1")]], 1)
    S = submodule_sum(L, M, N)
    assert S.relations.p == N.relations.p + 1
    S2 = submodule_sum(M, M, N)
    for r in S2.relations.rows:
        assert is_member(r, S)


def test_intersection_univariate():
    N = PresentedModule.free(Q1, 1)
    I = submodule_intersection(OpMatrix(Q1, [[op(Q1, "d1")]], 1), OpMatrix(Q1, [[op(Q1, "d1 + 1")]], 1), N)
    assert I.rows == [[op(Q1, "d11 + d1")]]


def test_intersection_commuting():
    N = PresentedModule.free(Q2, 1)
    I = submodule_intersection(OpMatrix(Q2, [[op(Q2, "d1")]], 1), OpMatrix(Q2, [[op(Q2, "d2")]], 1), N)
    assert I.rows == [[op(Q2, "d12")]]


def test_intersection_contained():
    N = PresentedModule.free(Q1, 1)
    L = OpMatrix(Q1, [[op(Q1, "d11 - 1")]], 1)
    M = OpMatrix(Q1, [[op(Q1, "d1 + 1")]], 1)
    I = submodule_intersection(L, M, N)
    assert is_member(I.rows[0], PresentedModule(L)) and is_member(L.rows[0], PresentedModule(I))


def test_rank_additivity_on_lattice():
    one, z = DiffOp.scalar(Q1, 1), DiffOp.zero(Q1)
    rel = OpMatrix(Q1, [[-(dpow(Q1, 3) - dpow(Q1, 1)), dpow(Q1, 5) + dpow(Q1, 4, 3) - dpow(Q1, 2, 4)]], 2)
    N = PresentedModule(rel)
    L = OpMatrix(Q1, [[one, z]], 2)
    M = OpMatrix(Q1, [[z, dpow(Q1, 2)]], 2)
    I = submodule_intersection(L, M, N)
    NI = PresentedModule(rel.stack(I))
    rk = differential_rank
    for G in (L, M):
        assert rk(NI) == rk(generated_submodule(G, NI)) + rk(PresentedModule(rel.stack(G)))
    assert rk(N) == rk(generated_submodule(L, N)) + rk(PresentedModule(rel.stack(L)))
    assert rk(N) == 1


def test_differential_rank_transport_pair():
    assert differential_rank(PresentedModule(transport_pair())) == 1


def test_width_mismatch():
    with pytest.raises(ValueError):
        submodule_sum(OpMatrix(Q1, [[op(Q1, "d1"), op(Q1, "1")]], 2), OpMatrix(Q1, [], 1), PresentedModule.free(Q1, 1))


def test_second_isomorphism_when_sum_is_everything():
    # L + M = D since (d + 1) - d = 1, so L/(L cap M) and N/M present the same module
    N = PresentedModule.free(Q1, 1)
    L = OpMatrix(Q1, [[op(Q1, "d1")]], 1)
    M = OpMatrix(Q1, [[op(Q1, "d1 + 1")]], 1)
    I = submodule_intersection(L, M, N)
    quotient_L = generated_submodule(L, PresentedModule(I))
    quotient_N = submodule_sum(OpMatrix(Q1, [], 1), M, N)
    assert quotient_L.relations.rows == quotient_N.relations.rows == [[op(Q1, "d1 + 1")]]
