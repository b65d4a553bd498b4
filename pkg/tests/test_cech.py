import pytest

from nahcharp import matrix as mx
from nahcharp.cech import (
    Covering,
    DerivationCochain,
    LiftData,
    bundle_iso_check,
    check_cocycle,
    coboundary,
    cocycle_failure,
    glue_connection,
    glue_higgs,
    obstruction_class,
    push_derivation,
    require_cocycle,
)
from nahcharp.errors import CocycleFailure, HiggsMismatch, NotLiftPair
from nahcharp.forms import FormMatrix, LogOneForm, TwistedDerivation
from nahcharp.higgs import HiggsLocal
from nahcharp.ring import Ring, RingDescriptor, RingHom
from nahcharp.scenarios import AFFINE_2, AFFINE_3, P1

P = 5


def cov(obj, p=P):
    return Covering.from_json(obj, p)


def lifts(C, images):
    return LiftData(C, C, [RingHom(C.chart(s, 2), C.chart(s, 2), im) for s, im in enumerate(images)])


def test_p1_obstruction_of_frobenius_lifts():
    C = cov(P1)
    ob = obstruction_class(lifts(C, [["x^5*(1 + 5*x)"], ["y^5"]]))
    # lift_0 - lift_1 = x^5 * 5x on x, divided by p and by base(x) = x^5
    assert ob.get(0, 1)(LogOneForm.basis(C.overlap(0, 1), 0)) == C.overlap(0, 1)("x")


def test_obstruction_sign_is_chart_i_minus_chart_j():
    C = cov(AFFINE_2)
    ob = obstruction_class(lifts(C, [["x^5"], ["x^5 + 5*x"]]))
    R = C.overlap(0, 1)
    # (x^5 - (x^5 + 5x)) / 5 = -x
    assert ob.get(0, 1).values == (R("-x"),)
    assert ob.get(1, 0).values == (R("x"),)


def test_obstruction_rejects_lifts_of_different_maps():
    C = cov(AFFINE_2)
    with pytest.raises(NotLiftPair):
        obstruction_class(lifts(C, [["x^5"], ["x"]]))


def test_three_chart_obstruction_is_a_cocycle():
    C = cov(AFFINE_3)
    ob = obstruction_class(lifts(C, [[f"x^5 + 5*x^{s}"] for s in range(3)]))
    assert check_cocycle(ob)
    R = C.overlap(0, 2)
    # ob_02(dx) = x^0 - x^2
    assert ob.get(0, 2).values == (R("1 - x^2"),)


def test_broken_cochain_names_the_triple():
    C = cov(AFFINE_3)
    ident = {k: RingHom(C.overlap(*k), C.overlap(*k), ["x"]) for k in C.pairs()}
    vals = {(0, 1): "1", (0, 2): "1", (1, 2): "1"}
    c = DerivationCochain(C, C, {k: TwistedDerivation(ident[k], [vals[k]]) for k in C.pairs()})
    assert cocycle_failure(c) == (0, 1, 2)
    with pytest.raises(CocycleFailure) as ei:
        require_cocycle(c)
    assert ei.value.location == (0, 1, 2)


def test_coboundary_is_a_cocycle():
    C = cov(AFFINE_3)
    secs = [TwistedDerivation(C.chart(s).identity(), [f"x^{s}"]) for s in range(3)]
    d = coboundary(C, C, secs)
    assert check_cocycle(d)
    # (delta s)_01 = s_1 - s_0
    assert d.get(0, 1).values == (C.overlap(0, 1)("x - 1"),)


def test_tangent_map_transport():
    Ry = Ring(RingDescriptor.make(["y"]), 5)
    Rx = Ring(RingDescriptor.make(["x"]), 5)
    d = TwistedDerivation(Ry.identity(), ["1"])
    # d(f^* dx) = d(2y dy) = 2y
    out = push_derivation(d, "tangent-map-f", RingHom(Rx, Ry, ["y^2"]))
    assert out.values == (Ry("2*y"),)
    fr = push_derivation(TwistedDerivation(Ry.identity(), ["y + 1"]), "precompose-F_Y")
    assert fr.values == (Ry("y^5 + 1"),)


def test_covering_json_round_trip():
    C = cov(AFFINE_3)
    D = Covering.from_json(C.to_json(), P)
    assert D.pairs() == C.pairs() and D.triple_keys() == C.triple_keys()
    assert D.chart(1) is C.chart(1)


def _jordan(R, sign=1):
    return HiggsLocal(R, FormMatrix(R, [mx.from_rows(R, [[0, sign], [0, 0]])]))


def test_p1_higgs_gluing_needs_the_frame_sign():
    C = cov(P1)
    ok = glue_higgs(C, [_jordan(C.chart(0)), _jordan(C.chart(1), -1)], {(0, 1): [[1, 0], [0, 1]]})
    assert ok.rank == 2
    with pytest.raises(HiggsMismatch) as ei:
        glue_higgs(C, [_jordan(C.chart(0)), _jordan(C.chart(1))], {(0, 1): [[1, 0], [0, 1]]})
    assert ei.value.location == (0, 1)


def test_transition_cocycle_failure():
    C = cov(AFFINE_3)
    zero = [HiggsLocal.zero(C.chart(s), 2) for s in range(3)]
    T = {(0, 1): [[1, 1], [0, 1]], (0, 2): [[1, 0], [0, 1]], (1, 2): [[1, 0], [0, 1]]}
    with pytest.raises(CocycleFailure) as ei:
        glue_higgs(C, zero, T)
    assert ei.value.location == (0, 1, 2)


def test_gauge_compatibility_is_checked():
    C = cov(AFFINE_2)
    R0, R1 = C.chart(0), C.chart(1)
    A0 = FormMatrix(R0, [mx.from_rows(R0, [["0", "1"], ["0", "0"]])])
    zero1 = FormMatrix.zero(R1, 2)
    with pytest.raises(HiggsMismatch):
        glue_connection(C, [A0, zero1], {(0, 1): [[1, 0], [0, 1]]})
    # T = [[1, x], [0, 1]] has dT = [[0, dx], [0, 0]] = T A_0 - A_1 T with A_1 = 0
    V = glue_connection(C, [A0, zero1], {(0, 1): [["1", "x"], ["0", "1"]]})
    assert V.flat()


def test_iso_check_localizes_failures():
    C = cov(P1)
    B = glue_higgs(C, [_jordan(C.chart(0)), _jordan(C.chart(1), -1)], {(0, 1): [[1, 0], [0, 1]]})
    I0, I1 = mx.identity(C.chart(0), 2), mx.identity(C.chart(1), 2)
    assert bundle_iso_check(B, B, [I0, I1])
    U = mx.from_rows(C.chart(0), [[1, 1], [0, 1]])
    res = bundle_iso_check(B, B, [U, I1])
    assert not res and res.location == (0, 1)
    S = mx.from_rows(C.chart(0), [[1, 0], [1, 1]])
    res = bundle_iso_check(B, B, [S, I1])
    assert not res and res.location == "chart 0"
