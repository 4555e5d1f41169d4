from cases import Q1, Q2, Q3, op, rational_curve, sc, three_curves
from dmodkit.operator import DiffOp, OpMatrix, adjoint, compose, left_inverse, ore_pair


def test_one_leibniz_step():
    assert compose(op(Q2, "d2"), sc(Q2, "x2")) == op(Q2, "x2*d2 + 1")


def test_ore_identities():
    assert compose(op(Q2, "d22"), op(Q2, "d1 + x2")) == compose(op(Q2, "d12 + x2*d2 + 2"), op(Q2, "d2"))
    assert compose(op(Q2, "d12 + x2*d2 - 1"), op(Q2, "d1 + x2")) == \
        compose(op(Q2, "d11 + 2*x2*d1 + x2^2"), op(Q2, "d2"))


def test_adjoint_of_identity():
    lhs = adjoint(compose(op(Q2, "d22"), op(Q2, "d1 + x2")))
    rhs = adjoint(compose(op(Q2, "d12 + x2*d2 + 2"), op(Q2, "d2")))
    # both sides pick up the same overall sign
    assert lhs == rhs == -compose(op(Q2, "d1 - x2"), op(Q2, "d22"))
    assert compose(op(Q2, "d1 - x2"), op(Q2, "d22")) == compose(op(Q2, "d2"), op(Q2, "d12 - x2*d2 + 1"))


def test_adjoint_basics():
    assert adjoint(op(Q3, "d2")) == -op(Q3, "d2")
    a = sc(Q3, "x1*x3/(1+x2)")
    assert adjoint(a) == a


def test_unit():
    P = op(Q2, "x1*d12 + d2 - 3")
    assert compose(P, DiffOp.scalar(Q2, 1)) == P


def test_ore_pair_transport_operators():
    P, U = op(Q2, "d1 + x2"), op(Q2, "d2")
    V, Q = ore_pair(P, U)
    assert not V.is_zero()
    assert compose(V, P) == compose(Q, U)
    assert V == op(Q2, "d22") and Q == op(Q2, "d12 + x2*d2 + 2")


def test_ore_pair_unit_and_commuting():
    P = op(Q2, "x1*d1 + d2")
    V, Q = ore_pair(P, DiffOp.scalar(Q2, 1))
    assert V == DiffOp.scalar(Q2, 1) and Q == P
    V, Q = ore_pair(op(Q2, "d1"), op(Q2, "d2"))
    assert V == op(Q2, "d2") and Q == op(Q2, "d1")


def test_left_inverse_identity():
    I = OpMatrix.identity(Q1, 2)
    assert left_inverse(I) == I


def test_left_inverse_none():
    A = OpMatrix(Q1, [[op(Q1, "d1")]], 1)
    assert left_inverse(A, 2) is None


def test_order_of_product():
    P, Q = op(Q3, "x1*d12 + d3"), op(Q3, "d233 + x2")
    assert compose(P, Q).order == P.order + Q.order


def test_matrix_shapes():
    A = OpMatrix(Q1, [[op(Q1, "d1"), sc(Q1, "x1")]], 2)
    assert adjoint(A).shape == (2, 1)
    assert compose(A, adjoint(A)).shape == (1, 1)
