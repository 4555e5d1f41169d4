"""Worked systems shared by the test modules."""

from dmodkit.field import DiffFieldPresentation, Generator as G, deriv
from dmodkit.operator import DiffOp, OpMatrix, compose
from dmodkit.system import LinearSystem

Q1 = DiffFieldPresentation.trivial(1)
Q2 = DiffFieldPresentation.trivial(2)
Q3 = DiffFieldPresentation.trivial(3)


def J(k, *mu):
    return (k, tuple(mu))


def row(pres, *terms):
    """row(pres, (coeff, k, mu), ...) with coefficients given as text."""
    return {(k, tuple(mu)): pres.parse(c) if isinstance(c, str) else pres.const(c) for c, k, mu in terms}


def sc(pres, text):
    return DiffOp.scalar(pres, pres.parse(text))


def dpow(pres, k, c=1, i=1):
    out = DiffOp.scalar(pres, 1)
    for _ in range(k):
        out = compose(out, DiffOp.d(pres, i))
    return out.scale(pres.const(c))


def op(pres, text):
    """Scalar operator from text, d1, d2, d12 ... standing for derivations."""
    from dmodkit.cli import SystemFile, _op_entry
    sf = SystemFile(coords=pres.coord_names)
    return _op_entry(sf, pres, text, None)


# -- linear systems over Q(x)

def macaulay():
    o = Q3.one
    return LinearSystem(Q3, 1, [{J(0, 0, 0, 2): o}, {J(0, 0, 1, 1): o, J(0, 2, 0, 0): -o}, {J(0, 0, 2, 0): o}])


def janet():
    o = Q3.one
    return LinearSystem(Q3, 1, [{J(0, 0, 0, 2): o, J(0, 2, 0, 0): -Q3.coord(2)}, {J(0, 0, 2, 0): o}])


def janet_operator():
    x2 = sc(Q3, "x2")
    d = [None] + [DiffOp.d(Q3, i) for i in (1, 2, 3)]
    return OpMatrix(Q3, [[d[3] * d[3] - x2 * d[1] * d[1]], [d[2] * d[2]]], 1)


def ore_column():
    """The operator y -> ((d1 + x2) y, d2 y)."""
    return OpMatrix(Q2, [[op(Q2, "d1 + x2")], [op(Q2, "d2")]], 1)


def airy():
    return LinearSystem(Q1, 1, [{J(0, 2): Q1.one, J(0, 0): -Q1.coord(1)}])


def third_order():
    """y_xxx - y_x = 0."""
    return LinearSystem(Q1, 1, [{J(0, 3): Q1.one, J(0, 1): -Q1.one}])


def spencer_three():
    """z1_x - z2 = 0, z2_x - z1 = 0, z3_x = 0."""
    o = Q1.one
    return LinearSystem(Q1, 3, [{J(0, 1): o, J(1, 0): -o}, {J(1, 1): o, J(0, 0): -o}, {J(2, 1): o}])


def two_unknowns():
    """y1_xx - y1 = 0, y2_x = 0."""
    o = Q1.one
    return LinearSystem(Q1, 2, [{J(0, 2): o, J(0, 0): -o}, {J(1, 1): o}])


def line_relation():
    """d^3 y + 3 d^2 y - 4 y = d^3 u - d u, unknowns (y, u)."""
    return OpMatrix(Q1, [[dpow(Q1, 3) + dpow(Q1, 2, 3) - dpow(Q1, 0, 4), -(dpow(Q1, 3) - dpow(Q1, 1))]], 2)


# -- presentations of nonlinear solutions

def kdv():
    pres = DiffFieldPresentation(
        2, [G("y", "y", (0, 0)), G("z", "z", (0, 0)), G("y_2", "y", (0, 1)), G("z_1", "z", (1, 0))],
        {("z", 2): "-z^2-2*y", ("y_2", 2): "-2*y*z^2-4*y^2+2*z*y_2+z_1/2", ("z_1", 2): "-2*z*z_1-2*y_1"},
        auto_close=True, order_bound=4)
    z2 = "(-z^2-2*y)"
    rows = [row(pres, ("1", 1, (0, 2)), ("2*z", 1, (0, 1)), ("2*" + z2, 1, (0, 0)), ("2", 0, (0, 1))),
            row(pres, ("1", 0, (0, 2)), ("2*z^2+8*y", 0, (0, 0)), ("4*y*z-2*y_2", 1, (0, 0)),
                ("-2*z", 0, (0, 1)), ("-1/2", 1, (1, 0))),
            row(pres, ("1", 1, (1, 1)), ("2*z", 1, (1, 0)), ("2*z_1", 1, (0, 0)), ("2", 0, (1, 0))),
            row(pres, ("1", 1, (0, 1)), ("2*z", 1, (0, 0)), ("2", 0, (0, 0)))]
    return LinearSystem(pres, 2, rows, names=["eta", "zeta"])


def burgers():
    pres = DiffFieldPresentation(2, [G("y", "y", (0, 0)), G("z", "z", (0, 0)), G("z_1", "z", (1, 0))],
                                 {("z", 2): "y", ("y", 2): "z_1-y^2"}, auto_close=True, order_bound=4)
    rows = [row(pres, ("1", 1, (0, 1)), ("-1", 0, (0, 0))),
            row(pres, ("1", 0, (0, 1)), ("-1", 1, (1, 0)), ("2*y", 0, (0, 0)))]
    return LinearSystem(pres, 2, rows, names=["eta", "zeta"])


def pd1_presentation():
    return DiffFieldPresentation(
        2, [G("y", "y", (0, 0)), G("y_1", "y", (1, 0)), G("y_2", "y", (0, 1)), G("y_11", "y", (2, 0))],
        {("y", 1): "y_1", ("y_1", 1): "y_11", ("y_11", 1): "0", ("y", 2): "y_2", ("y_1", 2): "y_11",
         ("y_11", 2): "0", ("y_2", 1): "y_11", ("y_2", 2): "y_11^2/2"})


def pd1():
    pres = pd1_presentation()
    rows = [row(pres, ("1", 0, (0, 2)), ("-y_11", 0, (2, 0))), row(pres, ("1", 0, (1, 1)), ("-1", 0, (2, 0)))]
    return LinearSystem(pres, 1, rows, names=["eta"])


def staircase():
    """Linearization with eta_22 - x2 eta = 0, eta_12 - 2 y eta = 0."""
    pres = DiffFieldPresentation(2, [G("y", "y", (0, 0)), G("y_1", "y", (1, 0)), G("y_2", "y", (0, 1))],
                                 {("y_1", 2): "y^2", ("y_2", 1): "y^2", ("y_2", 2): "x2*y"},
                                 auto_close=True, order_bound=6)
    rows = [row(pres, ("1", 0, (0, 2)), ("-x2", 0, (0, 0))), row(pres, ("1", 0, (1, 1)), ("-2*y", 0, (0, 0)))]
    return LinearSystem(pres, 1, rows, names=["eta"])


def rational_curve(a):
    """Linearization of y1_x - y1 y2_x + a = 0; unknowns (eta1, eta2)."""
    pres = DiffFieldPresentation(1, [G("y1", "y1", (0,)), G("y2", "y2", (0,))],
                                 {("y1", 1): f"y1*y2_1-{a}"}, auto_close=True)
    d = DiffOp.d(pres, 1)
    return OpMatrix(pres, [[sc(pres, "y2_1") - d, compose(sc(pres, "y1"), d)]], 2)


def three_curves():
    """Linearization of y3_x = ((y1_x)^2 - (y2_x)^2)/2."""
    pres = DiffFieldPresentation(1, [G("y1", "y1", (0,)), G("y2", "y2", (0,)), G("y3", "y3", (0,))],
                                 {("y3", 1): "(y1_1^2-y2_1^2)/2"}, auto_close=True)
    d = DiffOp.d(pres, 1)
    return OpMatrix(pres, [[compose(sc(pres, "-y1_1"), d), compose(sc(pres, "y2_1"), d), d]], 3)


def transport_pair(variant=False):
    """Linearization of y1_2 = y3 y1_1, y2_2 = y3 y2_1 (or y1_1 y2_2 - y1_2 y2_1 = 1)."""
    if not variant:
        pres = DiffFieldPresentation(2, [G("y1", "y1", (0, 0)), G("y2", "y2", (0, 0)), G("y3", "y3", (0, 0))],
                                     {("y1", 2): "y3*y1_1", ("y2", 2): "y3*y2_1"}, auto_close=True, order_bound=5)
        d1, d2, z = DiffOp.d(pres, 1), DiffOp.d(pres, 2), DiffOp.zero(pres)
        T = d2 - compose(sc(pres, "y3"), d1)
        return OpMatrix(pres, [[T, z, sc(pres, "-y1_1")], [z, T, sc(pres, "-y2_1")]], 3)
    pres = DiffFieldPresentation(2, [G("y1", "y1", (0, 0)), G("y2", "y2", (0, 0))],
                                 {("y2", 2): "(1+y1_2*y2_1)/y1_1"}, auto_close=True, order_bound=5)
    d1, d2 = DiffOp.d(pres, 1), DiffOp.d(pres, 2)
    y2_2 = DiffOp.scalar(pres, deriv(pres, pres.gen("y2"), 2))
    return OpMatrix(pres, [[compose(y2_2, d1) - compose(sc(pres, "y2_1"), d2),
                            compose(sc(pres, "y1_1"), d2) - compose(sc(pres, "y1_2"), d1)]], 2)
