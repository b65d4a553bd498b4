import pytest

from nahcharp import matrix as mx
from nahcharp.cech import Covering, DerivationCochain, LiftData, bundle_iso_check, glue_higgs, obstruction_class
from nahcharp.errors import ExponentTooLarge, ShapeMismatch
from nahcharp.forms import FormMatrix, TwistedDerivation
from nahcharp.higgs import HiggsLocal
from nahcharp.ring import RingHom
from nahcharp.scenarios import AFFINE_2, P1, registry_scenario
from nahcharp.twisted import (
    PullbackContext,
    build_extension,
    check_coboundary_invariance,
    check_direct_sum,
    check_rank,
    check_tensor_compat,
    check_tp_compare,
    identity_witness,
    pullback_bundle,
    sym_filtration,
    sym_power_matrices,
    sym_power_report,
    tp1,
    tp2,
    tp3,
)

P = 5


def p1_setup(p=P):
    C = Covering.from_json(P1, p)
    lifts = [RingHom(C.chart(0, 2), C.chart(0, 2), ["x"]), RingHom(C.chart(1, 2), C.chart(1, 2), [f"y + {p}*y^2"])]
    tau = obstruction_class(LiftData(C, C, lifts))
    ctx = PullbackContext(C, C, [C.chart(0).identity(), C.chart(1).identity()], tau)
    N0 = FormMatrix(C.chart(0), [mx.from_rows(C.chart(0), [[0, 1], [0, 0]])])
    N1 = FormMatrix(C.chart(1), [mx.from_rows(C.chart(1), [[0, -1], [0, 0]])])
    E = glue_higgs(C, [HiggsLocal(C.chart(0), N0), HiggsLocal(C.chart(1), N1)], {(0, 1): [[1, 0], [0, 1]]})
    return C, ctx, E


def test_p1_twist_value():
    C, ctx, _ = p1_setup()
    # lift_1(x) = 1/(y + 5y^2) = x - 5, so (lift_0 - lift_1)(x)/5 = 1, divided by base(x) = x
    assert ctx.tau_in_frame(0, 1, 0) == [C.overlap(0, 1)("1/x")]
    # in the chart-1 frame dlog y = -dlog x
    assert ctx.tau_in_frame(0, 1, 1) == [C.overlap(0, 1)("-1/x")]


def test_tp2_transition_is_identity_plus_twist():
    C, ctx, E = p1_setup()
    B = tp2(E, ctx, 1)
    # theta_1 on the overlap is N dlog x, so G = I + tau(dlog x) N
    assert B.T[(0, 1)] == mx.from_rows(C.overlap(0, 1), [["1", "1/x"], ["0", "1"]])
    assert B.locals[0] == E.locals[0]


def test_zero_twist_gives_plain_pullback():
    C, ctx, E = p1_setup()
    plain = pullback_bundle(E, ctx)
    zero = tp2(E, PullbackContext(C, C, ctx.f), 1)
    assert all(mx.equal(plain.T[k], zero.T[k]) for k in plain.T)


@pytest.mark.parametrize("r", [1, 2])
def test_three_constructions_agree(r):
    _, ctx, E = p1_setup()
    rep = check_tp_compare(E, ctx, r)
    assert rep["result"], rep
    assert bundle_iso_check(tp1(E, ctx, r), tp3(E, ctx, r), identity_witness(tp2(E, ctx, r)))


def test_non_cohomologous_twists_are_distinguished():
    C, ctx, E = p1_setup()
    doubled = ctx.with_tau(ctx.tau + ctx.tau)
    A, B = tp2(E, ctx, 1), tp2(E, doubled, 1)
    assert not bundle_iso_check(A, B, identity_witness(A))


def test_coboundary_shift_is_absorbed_by_section_exponentials():
    C, ctx, E = p1_setup()
    secs = [TwistedDerivation(ctx.f[s], [C.chart(s).var(0) + 2]) for s in range(2)]
    assert check_coboundary_invariance(E, ctx, secs, 1)["result"]


def test_exponent_gate():
    _, ctx, E = p1_setup(3)
    with pytest.raises(ExponentTooLarge):
        tp2(E, ctx, 3)
    with pytest.raises(ExponentTooLarge):
        tp2(E, ctx, 0)


def test_rank_direct_sum_and_tensor():
    sc = registry_scenario("tensor-pair", P)
    assert check_rank(sc.E, sc.ctx, 1)
    assert check_direct_sum(sc.E, sc.E2, sc.ctx, 1)["result"]
    assert check_tensor_compat(sc.E, sc.E2, sc.ctx, 1, 1)["result"]
    assert tp2(sc.E, sc.ctx, 1).rank == 2


def curve_ctx(p):
    C = Covering.from_json(AFFINE_2, p)
    f = [C.chart(0).identity(), C.chart(1).identity()]
    base = RingHom(C.overlap(0, 1), C.overlap(0, 1), ["x"])
    tau = DerivationCochain(C, C, {(0, 1): TwistedDerivation(base, ["1/x"])})
    return C, PullbackContext(C, C, f, tau)


def test_extension_gluing():
    C, ctx = curve_ctx(P)
    ext = build_extension(ctx)
    # coordinates (c0, c1) change by c1 -> a c0 + c1
    assert ext.G[(0, 1)] == mx.from_rows(C.overlap(0, 1), [["1", "0"], ["1/x", "1"]])


@pytest.mark.parametrize("p,half", [(5, 3), (7, 4)])
def test_sym_power_displays_at_r2(p, half):
    C, ctx = curve_ctx(p)
    R = C.overlap(0, 1)
    m = sym_power_matrices(ctx, 2)
    row = [R.one, R("1/x"), R(f"{half}/x^2")]
    assert list(m["gluingF"][0]) == row
    assert list(m["gluingE"][0]) == row
    assert m["higgsF"] == mx.from_rows(R, [[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    assert m["higgsE"] == mx.from_rows(R, [[0, half, 0], [0, 0, 1], [0, 0, 0]])
    assert m["higgsE_derivation"] == m["higgsF"]


@pytest.mark.parametrize("p", [5, 7])
def test_sym_power_search(p):
    _, ctx = curve_ctx(p)
    one = sym_power_report(ctx, 1)
    assert one["iso_search"]["found"] and one["result"]
    two = sym_power_report(ctx, 2)
    assert not two["iso_search"]["found"] and two["iso_search"]["conclusive"]
    assert not two["displayed_action_commutes_with_gluing"]
    assert two["iso_search_derivation"]["found"]


def test_sym_power_needs_a_curve():
    sc = registry_scenario("plane-2chart", P)
    with pytest.raises(ShapeMismatch):
        sym_power_matrices(sc.ctx, 1)


@pytest.mark.parametrize("r", [0, 1, 2])
def test_filtration_graded_pieces(r):
    _, ctx = curve_ctx(P)
    rep = sym_filtration(build_extension(ctx), r)
    assert rep["graded_ranks"] == [1] * (r + 1)
    assert rep["result"]
