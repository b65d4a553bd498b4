import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nahcharp import matrix as mx
from nahcharp.errors import (
    ExponentTooLarge,
    FactorialNotInvertible,
    NotCommuting,
    NotNilpotent,
    NotNilpotentEnough,
)
from nahcharp.forms import FormMatrix
from nahcharp.higgs import (
    ArModule,
    HiggsLocal,
    TruncSymAlgebra,
    armodule_to_higgs,
    check_nilpotent,
    direct_sum_higgs,
    higgs_to_armodule,
    tensor_higgs,
    trunc_exp,
)
from nahcharp.ring import Ring, RingDescriptor


def jordan(R, n):
    return tuple(tuple(R.one if j == i + 1 else R.zero for j in range(n)) for i in range(n))


def test_trunc_exp_jordan_block_p7():
    R = Ring(RingDescriptor.make(["x"]), 7)
    E = trunc_exp(jordan(R, 3))
    # 1/2 = 4 mod 7
    assert E == mx.from_rows(R, [[1, 1, 4], [0, 1, 1], [0, 0, 1]])


def test_trunc_exp_gates():
    R = Ring(RingDescriptor.make(["x"]), 5)
    with pytest.raises(FactorialNotInvertible):
        trunc_exp(jordan(R, 2), 5)
    with pytest.raises(NotNilpotentEnough):
        trunc_exp(jordan(R, 3), 1)
    with pytest.raises(NotNilpotentEnough):
        trunc_exp(jordan(R, 6))


def test_higgs_field_errors():
    P = Ring(RingDescriptor.make(["x", "y"]), 5)
    e = mx.from_rows(P, [[0, 1], [0, 0]])
    f = mx.from_rows(P, [[0, 0], [1, 0]])
    with pytest.raises(NotCommuting):
        HiggsLocal(P, FormMatrix(P, [e, f]))
    R = Ring(RingDescriptor.make(["x"]), 5)
    with pytest.raises(NotNilpotent):
        check_nilpotent(HiggsLocal(R, FormMatrix(R, [mx.identity(R, 1)])))


def test_exponents_of_sums_and_products():
    R = Ring(RingDescriptor.make(["x"]), 5)
    J2 = HiggsLocal(R, FormMatrix(R, [jordan(R, 2)]))
    assert J2.exponent() == 1
    assert tensor_higgs(J2, J2).exponent() == 2
    assert direct_sum_higgs(J2, J2).exponent() == 1


def test_trunc_sym_basis_order():
    R = Ring(RingDescriptor.make(["x", "y"]), 5)
    A = TruncSymAlgebra(R, 2, 2)
    assert A.basis == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert A.dimension == A.expected_dimension() == 6


def test_exp_of_linear_element():
    R = Ring(RingDescriptor.make(["x"], ["x"]), 5)
    A = TruncSymAlgebra(R, 1, 2)
    a = R("1/x")
    e = A.linear([a]).exp()
    # 1 + a d + a^2/2 d^2 with 1/2 = 3 mod 5
    assert e.vector() == [R.one, a, R("3/x^2")]


def test_armodule_rejections():
    R = Ring(RingDescriptor.make(["x"]), 3)
    J3 = HiggsLocal(R, FormMatrix(R, [jordan(R, 3)]))
    with pytest.raises(ExponentTooLarge):
        higgs_to_armodule(J3, 1)
    with pytest.raises(ExponentTooLarge):
        higgs_to_armodule(J3, 3)
    with pytest.raises(ExponentTooLarge):
        ArModule(TruncSymAlgebra(R, 1, 1), [jordan(R, 3)])


def test_armodule_action_of_exponential():
    R = Ring(RingDescriptor.make(["x"]), 5)
    N = jordan(R, 3)
    M = higgs_to_armodule(HiggsLocal(R, FormMatrix(R, [N])), 2)
    t = R("x")
    # exp(t d) acts as exp(t N)
    assert M.act(M.algebra.linear([t]).exp()) == trunc_exp(mx.scale(t, N))


# -- properties over random nilpotent data


@st.composite
def upper_nilpotent(draw, R, n):
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if j > i:
                c = draw(st.integers(0, R.N - 1))
                k = draw(st.integers(0, 2))
                row.append(R.const(c) * R.var(0) ** k)
            else:
                row.append(R.zero)
        rows.append(tuple(row))
    return tuple(rows)


@pytest.mark.parametrize("p,level", [(3, 1), (5, 2), (7, 1)])
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_exp_identities(p, level, data):
    R = Ring(RingDescriptor.make(["x"]), p, level)
    n = data.draw(st.integers(1, min(p, 4)))
    A = data.draw(upper_nilpotent(R, n))
    c = data.draw(st.integers(0, R.N - 1))
    B = mx.add(mx.scale(c, A), mx.mul(A, A))
    assert mx.equal(mx.mul(trunc_exp(A), trunc_exp(mx.neg(A))), mx.identity(R, n))
    assert mx.equal(trunc_exp(mx.add(A, B)), mx.mul(trunc_exp(A), trunc_exp(B)))


@pytest.mark.parametrize("p", [3, 5, 7])
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_armodule_round_trip(p, data):
    R = Ring(RingDescriptor.make(["x", "y"]), p)
    n = data.draw(st.integers(1, min(p, 4)))
    N = data.draw(upper_nilpotent(R, n))
    comps = [mx.scale(data.draw(st.integers(0, p - 1)), N), mx.scale(R("y"), mx.mul(N, N))]
    E = HiggsLocal(R, FormMatrix(R, comps))
    r = E.exponent()
    M = higgs_to_armodule(E, max(r, 0))
    assert armodule_to_higgs(M) == E
