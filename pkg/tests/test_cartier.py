import pytest

from nahcharp import matrix as mx
from nahcharp.cartier import (
    _v1,
    _v2,
    LiftSystem,
    compute_nu,
    dF_over_p,
    frobenius_lifts,
    frobenius_lift_check,
    inverse_cartier,
    local_connection,
    nu_invariant_holds,
    pullback_connection_bundle,
    verify_chart_intertwining,
    verify_descent,
    verify_functoriality,
    verify_nu_cochain,
)
from nahcharp.cech import Covering, bundle_iso_check, glue_higgs
from nahcharp.errors import ExponentTooLarge, NotAFrobeniusLift, NotLiftPair
from nahcharp.forms import FormMatrix, LogOneForm
from nahcharp.higgs import HiggsLocal
from nahcharp.ring import Ring, RingDescriptor, RingHom
from nahcharp.scenarios import AFFINE_2, P1, REGISTRY, registry_scenario

AFF = RingDescriptor.make(["x"])
LOGX = RingDescriptor.make([("x", True)])


def test_frobenius_lift_check():
    R2 = Ring(AFF, 5, 2)
    assert frobenius_lift_check(RingHom(R2, R2, ["x^5 + 5*x"])) == {}
    L2 = Ring(LOGX, 5, 2)
    assert frobenius_lift_check(RingHom(L2, L2, ["x^5"])) == {"x": Ring(LOGX, 5).zero}
    # x^5 (1 + 5 x^2) has h = x^2
    assert frobenius_lift_check(RingHom(L2, L2, ["x^5 + 5*x^7"])) == {"x": Ring(LOGX, 5)("x^2")}
    with pytest.raises(NotAFrobeniusLift):
        frobenius_lift_check(RingHom(R2, R2, ["x^2"]))


def test_dF_over_p_ordinary():
    R = Ring(AFF, 5)
    R2 = R.lifted()
    dx = LogOneForm.basis(R, 0)
    assert dF_over_p(RingHom(R2, R2, ["x^5"]), dx) == LogOneForm(R, ["x^4"])
    # d(x^5 + 5 x^3)/5 = x^4 dx + 3x^2 dx
    assert dF_over_p(RingHom(R2, R2, ["x^5 + 5*x^3"]), dx) == LogOneForm(R, ["x^4 + 3*x^2"])


def test_dF_over_p_log():
    L = Ring(LOGX, 5)
    L2 = L.lifted()
    dlog = LogOneForm.basis(L, 0)
    assert dF_over_p(RingHom(L2, L2, ["x^5"]), dlog) == dlog
    # dlog(x^5 (1 + 5x))/5 = dlog x + dx/(1 + 5x) = (1 + x) dlog x mod 5
    assert dF_over_p(RingHom(L2, L2, ["x^5 + 25*x + 5*x^6"]), dlog) == LogOneForm(L, ["1 + x"])


def test_local_connection_of_nilpotent_field():
    R = Ring(AFF, 5)
    theta = FormMatrix(R, [mx.from_rows(R, [["0", "1"], ["0", "0"]])])
    A = local_connection(theta, RingHom(R.lifted(), R.lifted(), ["x^5"]))
    assert A.comps[0] == mx.from_rows(R, [["0", "x^4"], ["0", "0"]])
    assert local_connection(FormMatrix.zero(R, 2), RingHom(R.lifted(), R.lifted(), ["x^5"])).is_zero()


def _jordan_bundle(C, signs, n=2):
    locs = []
    for s, sign in enumerate(signs):
        R = C.chart(s)
        rows = [[sign if j == i + 1 else 0 for j in range(n)] for i in range(n)]
        locs.append(HiggsLocal(R, FormMatrix(R, [mx.from_rows(R, rows)])))
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return glue_higgs(C, locs, {k: ident for k in C.pairs()})


def _standard(C):
    return frobenius_lifts(C, [RingHom(C.chart(s, 2), C.chart(s, 2), [f"{v}^{C.p}" for v in C.chart(s).desc.names]) for s in range(C.n)])


def test_inverse_cartier_on_p1_with_standard_lifts():
    C = Covering.from_json(P1, 5)
    V = inverse_cartier(_jordan_bundle(C, [1, -1]), _standard(C))
    # dlog(x^p)/p = dlog x, so the connection is N dlog x and ob(F) = 0 keeps T = I
    assert V.locals[0].comps[0] == mx.from_rows(C.chart(0), [["0", "1"], ["0", "0"]])
    assert mx.is_identity(V.T[(0, 1)])
    assert V.flat()


def test_inverse_cartier_exponent_gate():
    C = Covering.from_json(AFFINE_2, 3)
    inverse_cartier(_jordan_bundle(C, [1, 1], 3), _standard(C))
    with pytest.raises(ExponentTooLarge) as ei:
        inverse_cartier(_jordan_bundle(C, [1, 1], 4), _standard(C))
    assert ei.value.location == "chart 0"


def test_nu_values():
    R2 = Ring(AFF, 5, 2)
    ident = R2.identity()
    std = RingHom(R2, R2, ["x^5"])
    assert compute_nu(ident, std, std).is_zero()
    # (x^5 + 5x - x^5)/5 = x
    nu = compute_nu(ident, std, RingHom(R2, R2, ["x^5 + 5*x"]))
    assert nu.values == (Ring(AFF, 5)("x"),)
    sq = RingHom(R2, R2, ["x^2"])
    assert compute_nu(sq, std, std).is_zero()
    assert nu_invariant_holds(nu, ident, std, RingHom(R2, R2, ["x^5 + 5*x"]))
    with pytest.raises(NotLiftPair):
        compute_nu(ident, std, RingHom(R2, R2, ["x^5 + 1"]))


def test_nu_on_affine_example():
    L = registry_scenario("affine-2chart", 5).lifts
    # chart 0: F_Y(f~(x)) - f~(F_X(x)) = (x^5 + 5) + 5 x^10 - (x + 5x^2)^5
    assert L.nu[0].values == (L.X.chart(0)("x^10 + 1"),)


@pytest.mark.parametrize("name", sorted(REGISTRY))
@pytest.mark.parametrize("p", [3, 5])
def test_registry_checks_hold(name, p):
    sc = registry_scenario(name, p)
    L = sc.lifts
    for s in range(L.X.n):
        rep = verify_chart_intertwining(sc.E, L, s)
        assert rep["result"] and rep["nu_invariant"]
    assert verify_nu_cochain(L)["result"]
    assert verify_descent(sc.E, L)["result"]
    assert verify_functoriality(sc.E, L)["result"]


def test_identity_witness_fails_when_nu_is_nonzero():
    sc = registry_scenario("affine-2chart", 5)
    L = sc.lifts
    V1, V2 = _v1(sc.E, L), _v2(sc.E, L)
    assert bundle_iso_check(V1, V2, L.witness(sc.E))
    ident = [mx.identity(L.Y.chart(s), sc.E.rank) for s in range(L.Y.n)]
    assert not bundle_iso_check(V1, V2, ident)


def test_doubled_nu_breaks_intertwining():
    sc = registry_scenario("affine-2chart", 5)
    L = sc.lifts
    L.__dict__["nu"] = [n + n for n in L.nu]
    # on chart 0 nu = 1 + x^10 has zero differential, so doubling it goes unseen there
    assert verify_chart_intertwining(sc.E, L, 0)["result"]
    rep = verify_chart_intertwining(sc.E, L, 1)
    assert not rep["result"] and not rep["nu_invariant"]
    assert not verify_nu_cochain(L)["result"]


def test_pullback_of_connection_along_identity():
    C = Covering.from_json(AFFINE_2, 5)
    V = inverse_cartier(_jordan_bundle(C, [1, 1]), _standard(C))
    L = LiftSystem(C, C, [C.chart(s).identity() for s in range(2)], _standard(C).lifts, _standard(C).lifts, [C.chart(s, 2).identity() for s in range(2)])
    W = pullback_connection_bundle(V, L.plain_ctx)
    assert W.locals[0] == V.locals[0] and W.T == V.T
