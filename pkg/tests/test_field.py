import pytest

from cases import Q2, pd1_presentation
from dmodkit.field import (DiffFieldPresentation, FieldError, Generator, NonCommutingPresentation,
                           PresentationBoundError, RatFun, deriv, validate_presentation)


def test_coordinate_partial():
    assert deriv(Q2, Q2.coord(2), 2) == 1
    assert deriv(Q2, Q2.coord(2), 1) == 0


def test_quotient_rule():
    x1, x2 = Q2.coord(1), Q2.coord(2)
    f = x1 / (x1 + x2)
    assert deriv(Q2, f, 1) == x2 / ((x1 + x2) * (x1 + x2))


def test_canonical_form():
    x1, x2 = Q2.coord(1), Q2.coord(2)
    a = (x1 * x1 - x2 * x2) / (2 * x1 - 2 * x2)
    b = (x1 + x2) / 2
    assert a == b
    assert str(a) == str(b)
    assert hash(a) == hash(b)


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        Q2.zero.inverse()


def test_pd1_rules():
    P = pd1_presentation()
    assert deriv(P, P.gen("y_11"), 1) == 0
    assert deriv(P, P.gen("y_1"), 2) == P.gen("y_11")


def test_pd1_commutes():
    assert validate_presentation(pd1_presentation()).accepted


def test_trivial_presentation_accepted():
    assert validate_presentation(Q2).accepted


def test_noncommuting_rejected():
    P = DiffFieldPresentation(2, [Generator("w", "w", (0, 0))], {("w", 1): "w", ("w", 2): "x1*w"})
    rep = validate_presentation(P)
    assert not rep.accepted
    assert rep.offending == ("w", 1, 2)
    with pytest.raises(NonCommutingPresentation):
        rep.raise_if_rejected()


def test_bound_exceeded():
    P = DiffFieldPresentation(1, [Generator("u", "u", (0,))], {}, auto_close=True, order_bound=2)
    u2 = deriv(P, deriv(P, P.gen("u"), 1), 1)
    assert u2 == P.gen("u_11")
    with pytest.raises(PresentationBoundError):
        deriv(P, u2, 1)


def test_undeclared_rule_symbol():
    with pytest.raises(Exception):
        DiffFieldPresentation(1, [Generator("u", "u", (0,))], {("u", 1): "v"})
    with pytest.raises(FieldError):
        DiffFieldPresentation(1, [Generator("u", "u", (0,))], {("v", 1): "u"})


def test_ratfun_mixed_arithmetic():
    x = Q2.coord(1)
    assert (x + 1) - x == 1
    assert 1 / (1 / x) == x
    assert isinstance(x ** -2, RatFun)
