import pytest

from nahcharp import matrix as mx
from nahcharp.errors import NotLiftPair, ShapeMismatch
from nahcharp.forms import (
    FormMatrix,
    LogOneForm,
    TwistedDerivation,
    differential,
    hom_difference_derivation,
    pullback_form,
    pulled_basis,
)
from nahcharp.ring import Ring, RingDescriptor, RingHom

ORD = Ring(RingDescriptor.make(["x"]), 5)
LOG = Ring(RingDescriptor.make([("x", True)], ["x"]), 5)
PLANE = Ring(RingDescriptor.make(["x", "y"]), 5)


def test_differential_in_ordinary_and_log_bases():
    assert differential(ORD("x^2")).coeffs == (ORD("2*x"),)
    # d(x^2) = 2x dx = 2x^2 dlog x
    assert differential(LOG("x^2")).coeffs == (LOG("2*x^2"),)
    assert differential(PLANE("x*y")).coeffs == (PLANE("y"), PLANE("x"))


def test_log_pullback_of_dlog():
    h = RingHom(LOG, LOG, ["3*x^2"])
    # dlog(3x^2) = 2 dlog x
    assert pulled_basis(h, 0) == LogOneForm(LOG, [2])


def test_pullback_of_ordinary_form():
    h = RingHom(ORD, ORD, ["x^2"])
    # x dx -> x^2 * 2x dx
    assert pullback_form(h, LogOneForm(ORD, ["x"])) == LogOneForm(ORD, ["2*x^3"])


def test_difference_derivation_ordinary():
    R2 = ORD.lifted()
    a = RingHom(R2, R2, ["x^5 + 5*x"])
    b = RingHom(R2, R2, ["x^5"])
    d = hom_difference_derivation(a, b)
    assert d.values == (ORD("x"),)
    assert d.base == ORD.frobenius()


def test_difference_derivation_log_divides_by_base():
    L2 = LOG.lifted()
    a = RingHom(L2, L2, ["x^5*(1 + 5*x)"])
    b = RingHom(L2, L2, ["x^5"])
    d = hom_difference_derivation(a, b)
    # (a - b)(x)/p = x^6 and dx = x dlog x, so d(dlog x) = x^6 / x^5
    assert d(LogOneForm.basis(LOG, 0)) == LOG("x")
    assert d(differential(LOG("x"))) == LOG("x^6")


def test_difference_derivation_requires_agreement_mod_p():
    R2 = ORD.lifted()
    with pytest.raises(NotLiftPair):
        hom_difference_derivation(RingHom(R2, R2, ["x^5"]), RingHom(R2, R2, ["x^5 + 1"]))


def test_derivation_is_twisted_linear():
    base = RingHom(ORD, ORD, ["x^2"])
    d = TwistedDerivation(base, ["1"])
    # d(x dx) = base(x) * d(dx) = x^2
    assert d(LogOneForm(ORD, ["x"])) == ORD("x^2")
    # on elements: d(x^3) = 3 base(x)^2 d(dx) = 3x^4
    assert d.on_element(ORD("x^3")) == ORD("3*x^4")


def test_form_matrix_d_and_curvature():
    M = mx.from_rows(ORD, [["x^2", "1"], ["0", "x"]])
    assert FormMatrix.d(M).comps[0] == mx.from_rows(ORD, [["2*x", "0"], ["0", "1"]])
    # A = [[0, y dx], [0, 0]]: dA = dy ^ dx = -dx ^ dy, A ^ A = 0
    A = FormMatrix(PLANE, [mx.from_rows(PLANE, [["0", "y"], ["0", "0"]]), mx.zeros(PLANE, 2)])
    assert A.curvature()[(0, 1)] == mx.from_rows(PLANE, [["0", "-1"], ["0", "0"]])


def test_curvature_sees_the_commutator():
    e = mx.from_rows(PLANE, [["0", "1"], ["0", "0"]])
    f = mx.from_rows(PLANE, [["0", "0"], ["1", "0"]])
    K = FormMatrix(PLANE, [e, f]).curvature()[(0, 1)]
    assert K == mx.from_rows(PLANE, [["1", "0"], ["0", "-1"]])


def test_contract_uses_base_on_coefficients():
    A = FormMatrix(ORD, [mx.from_rows(ORD, [["0", "x"], ["0", "0"]])])
    d = TwistedDerivation(RingHom(ORD, ORD, ["x^2"]), ["3"])
    assert A.contract(d) == mx.from_rows(ORD, [["0", "3*x^2"], ["0", "0"]])


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        LogOneForm(PLANE, ["1"])
    with pytest.raises(ShapeMismatch):
        pullback_form(RingHom(ORD, ORD, ["x"]), LogOneForm(PLANE, ["1", "0"]))
