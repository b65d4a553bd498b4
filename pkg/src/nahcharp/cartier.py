"""Local inverse Cartier transform and the twisted functoriality checks.

Given Frobenius lifts ``F_X``, ``F_Y`` and chart lifts ``f~_s`` of
``f: Y -> X`` modulo ``p^2``:

* ``C^{-1}(E)`` on a chart is ``F^*E`` with ``nabla = d + sum_v F(theta_v) dF/p(omega_v)``,
  glued by ``exp(ob(F)_ij . F^*theta_j) F(T_ij)``;
* ``nu_s = (F~_Y f~_s - f~_s F~_X) / p`` is a derivation over ``g = F_Y f = f F_X``;
* ``exp(nu . theta)`` identifies ``C^{-1}_Y(f°E)`` with ``f^*C^{-1}_X(E)``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Sequence

from . import matrix as mx
from .cech import (
    Covering,
    DerivationCochain,
    GluedConnectionBundle,
    GluedHiggsBundle,
    LiftData,
    bundle_iso_check,
    glue_connection,
    obstruction_class,
    pushforward_cochain,
    restrict_derivation,
)
from .errors import ExponentTooLarge, NotLiftPair, ShapeMismatch
from .forms import FormMatrix, LogOneForm, TwistedDerivation, differential, hom_difference_derivation
from .frobenius import dF_over_p, frobenius_lift_check
from .higgs import check_nilpotent, trunc_exp
from .ring import RingHom
from .twisted import PullbackContext, tp2

__all__ = [
    "frobenius_lift_check",
    "dF_over_p",
    "LiftSystem",
    "local_connection",
    "inverse_cartier",
    "compute_nu",
    "nu_invariant_holds",
    "pullback_connection_bundle",
    "verify_chart_intertwining",
    "verify_nu_cochain",
    "verify_descent",
    "verify_functoriality",
]


def local_connection(theta: FormMatrix, Ft: RingHom) -> FormMatrix:
    """``sum_v F(theta_v) . dF~/p(omega_v)`` on one chart."""
    R = theta.ring
    if Ft.source.reduced() is not R:
        raise ShapeMismatch("lift and Higgs field live on different charts")
    frob = R.frobenius()
    acc = [mx.zeros(R, theta.n) for _ in range(R.nvars)]
    for v, A in enumerate(theta.comps):
        if mx.is_zero(A):
            continue
        FA = mx.apply(frob, A)
        eta = dF_over_p(Ft, LogOneForm.basis(R, v))
        for y, c in enumerate(eta.coeffs):
            if c.num:
                acc[y] = mx.add(acc[y], mx.scale(c, FA))
    return FormMatrix(R, acc)


def frobenius_lifts(cov: Covering, lifts: Sequence[RingHom], kind: str = "F") -> LiftData:
    for s, Ft in enumerate(lifts):
        frobenius_lift_check(Ft, where=f"{kind} chart {s}")
    return LiftData(cov, cov, lifts, [cov.chart(s).frobenius() for s in range(cov.n)], kind=kind)


def inverse_cartier(E: GluedHiggsBundle, FL: LiftData) -> GluedConnectionBundle:
    cov = E.cov
    p = cov.p
    if FL.X is not cov:
        raise ShapeMismatch("lifts live on a different covering")
    for s, loc in enumerate(E.locals):
        if check_nilpotent(loc) > p - 1:
            raise ExponentTooLarge(f"Higgs exponent exceeds p - 1 = {p - 1}", location=f"chart {s}")
    ob = obstruction_class(FL)
    locals_ = [local_connection(E.locals[s].theta, FL.lifts[s]) for s in range(cov.n)]
    T = {}
    for i, j in cov.pairs():
        theta_j = cov.link(i, j, j).push_forms(E.locals[j].theta)
        G = trunc_exp(theta_j.contract(ob.get(i, j)), p - 1)
        T[(i, j)] = mx.mul(G, mx.apply(cov.overlap(i, j).frobenius(), E.T[(i, j)]))
    return glue_connection(cov, locals_, T)


def pullback_connection_bundle(V: GluedConnectionBundle, ctx: PullbackContext) -> GluedConnectionBundle:
    """Pull back connection matrices (entries and forms) and transitions along ``f``."""
    locals_ = [V.locals[s].pullback(ctx.f[s]) for s in range(ctx.X.n)]
    T = {(i, j): mx.apply(ctx.f_on(i, j), V.T[(i, j)]) for i, j in ctx.X.pairs()}
    return glue_connection(ctx.Y, locals_, T)


def compute_nu(ft: RingHom, FX: RingHom, FY: RingHom) -> TwistedDerivation:
    """``(F~_Y f~ - f~ F~_X) / p`` as a derivation over ``g``."""
    try:
        return hom_difference_derivation(FY.compose(ft), ft.compose(FX))
    except NotLiftPair as e:
        raise NotLiftPair(f"lifts do not satisfy f F_X = F_Y f modulo p: {e}") from None


def nu_invariant_holds(nu: TwistedDerivation, ft: RingHom, FX: RingHom, FY: RingHom) -> bool:
    """``nu(d x) = (F~_Y f~ - f~ F~_X)(x) / p`` on every generator."""
    a, b = FY.compose(ft), ft.compose(FX)
    R = nu.source
    for i in range(R.nvars):
        lhs = nu(differential(R.var(i)))
        rhs = (a.images[i] - b.images[i]).divide_by_p()
        if lhs != rhs:
            return False
    return True


class LiftSystem:
    """All lifts of a scenario together with the derived cochains and ``nu``."""

    def __init__(self, X: Covering, Y: Covering, f: Sequence[RingHom], FX: Sequence[RingHom], FY: Sequence[RingHom], ft: Sequence[RingHom]):
        self.X, self.Y = X, Y
        self.f = tuple(f)
        self.FX = frobenius_lifts(X, FX, "F_X")
        self.FY = frobenius_lifts(Y, FY, "F_Y")
        self.ft = LiftData(X, Y, ft, f, kind="f")
        for s in range(X.n):
            lhs = Y.chart(s).frobenius().compose(f[s])
            rhs = f[s].compose(X.chart(s).frobenius())
            if lhs != rhs:
                raise NotLiftPair("F_Y f and f F_X differ", location=f"chart {s}")

    @cached_property
    def ob_FX(self) -> DerivationCochain:
        return obstruction_class(self.FX)

    @cached_property
    def ob_FY(self) -> DerivationCochain:
        return obstruction_class(self.FY)

    @cached_property
    def ob_f(self) -> DerivationCochain:
        return obstruction_class(self.ft)

    @cached_property
    def ctx(self) -> PullbackContext:
        return PullbackContext(self.X, self.Y, self.f, self.ob_f)

    @cached_property
    def plain_ctx(self) -> PullbackContext:
        return PullbackContext(self.X, self.Y, self.f)

    @cached_property
    def nu(self) -> list:
        return [compute_nu(self.ft.lifts[s], self.FX.lifts[s], self.FY.lifts[s]) for s in range(self.X.n)]

    def witness(self, E: GluedHiggsBundle) -> list:
        """Chartwise ``exp(nu_s . theta_s)``."""
        p = self.X.p
        return [trunc_exp(E.locals[s].theta.contract(self.nu[s]), p - 1) for s in range(self.X.n)]


def _v1(E: GluedHiggsBundle, L: LiftSystem) -> GluedConnectionBundle:
    return inverse_cartier(tp2(E, L.ctx, L.X.p - 1), L.FY)


def _v2(E: GluedHiggsBundle, L: LiftSystem) -> GluedConnectionBundle:
    return pullback_connection_bundle(inverse_cartier(E, L.FX), L.plain_ctx)


def verify_chart_intertwining(E: GluedHiggsBundle, L: LiftSystem, s: int) -> dict:
    """``nabla_2 exp(nu.theta) = exp(nu.theta) nabla_1`` on chart ``s`` of ``Y``, per basis section."""
    p = L.X.p
    theta = E.locals[s].theta
    phi = theta.pullback(L.f[s])  # Higgs field of f°E on this chart
    A1 = local_connection(phi, L.FY.lifts[s])
    A2 = local_connection(theta, L.FX.lifts[s]).pullback(L.f[s])
    W = trunc_exp(theta.contract(L.nu[s]), p - 1)
    lhs = FormMatrix.d(W) + A2.rmul(W)
    rhs = A1.lmul(W)
    trace = []
    ok = True
    for c in range(E.rank):
        left = [lhs.entry(r_, c) for r_ in range(E.rank)]
        right = [rhs.entry(r_, c) for r_ in range(E.rank)]
        same = all(a == b for a, b in zip(left, right))
        ok = ok and same
        trace.append({"section": c, "nabla2(W e)": [str(w) for w in left], "W nabla1(e)": [str(w) for w in right], "equal": same})
    return {"chart": s, "result": ok, "trace": trace, "nu_invariant": nu_invariant_holds(L.nu[s], L.ft.lifts[s], L.FX.lifts[s], L.FY.lifts[s])}


def verify_nu_cochain(L: LiftSystem) -> dict:
    """``nu_i - nu_j = ob(F_Y) + ob(f) - ob(F_X)`` as cochains of derivations over ``g``."""
    X, Y = L.X, L.Y
    lhs = {}
    for i, j in X.pairs():
        ni = restrict_derivation(L.nu[i], X.link(i, j, i), Y.link(i, j, i))
        nj = restrict_derivation(L.nu[j], X.link(i, j, j), Y.link(i, j, j))
        lhs[(i, j)] = ni - nj
    lhs = DerivationCochain(X, Y, lhs)
    fmap = L.ctx.f_on
    t1 = pushforward_cochain(L.ob_FY, "tangent-map-f", fmap, src=X, tgt=Y)
    t2 = pushforward_cochain(L.ob_f, "precompose-F_Y", None, src=X, tgt=Y)
    t3 = pushforward_cochain(L.ob_FX, "pullback-by-f", fmap, src=X, tgt=Y)
    rhs = t1 + t2 - t3
    bad = lhs.first_difference(rhs)
    trace = {
        f"{i},{j}": {
            "nu_i - nu_j": lhs.get(i, j).to_json(),
            "ob(F_Y)": t1.get(i, j).to_json(),
            "ob(f)": t2.get(i, j).to_json(),
            "ob(F_X)": t3.get(i, j).to_json(),
        }
        for i, j in X.pairs()
    }
    return {"result": bad is None, "first_failure": list(bad) if bad else None, "trace": trace}


def descent_matrices(E: GluedHiggsBundle, L: LiftSystem, i: int, j: int) -> tuple:
    """``(a_ij, b_ij)``: transitions of ``C^{-1}_Y(f°E)`` and ``f^*C^{-1}_X(E)``
    assembled factor by factor."""
    p = L.X.p
    X, Y = L.X, L.Y
    fij = L.ctx.f_on(i, j)
    frobY = Y.overlap(i, j).frobenius()
    theta_j = X.link(i, j, j).push_forms(E.locals[j].theta)
    phi_j = theta_j.pullback(fij)
    a = mx.mul(
        trunc_exp(phi_j.contract(L.ob_FY.get(i, j)), p - 1),
        mx.apply(frobY, trunc_exp(theta_j.contract(L.ob_f.get(i, j)), p - 1)),
    )
    a = mx.mul(a, mx.apply(frobY, mx.apply(fij, E.T[(i, j)])))
    frobX = X.overlap(i, j).frobenius()
    b = mx.apply(fij, mx.mul(trunc_exp(theta_j.contract(L.ob_FX.get(i, j)), p - 1), mx.apply(frobX, E.T[(i, j)])))
    return a, b


def verify_descent(E: GluedHiggsBundle, L: LiftSystem) -> dict:
    """The square ``exp(nu_j theta) a_ij = b_ij exp(nu_i theta)`` on each overlap."""
    V1, V2 = _v1(E, L), _v2(E, L)
    W = L.witness(E)
    trace = {}
    ok = True
    for i, j in L.X.pairs():
        a, b = descent_matrices(E, L, i, j)
        Wi = L.Y.link(i, j, i).push(W[i])
        Wj = L.Y.link(i, j, j).push(W[j])
        square = mx.equal(mx.mul(Wj, a), mx.mul(b, Wi))
        a_matches = mx.equal(a, V1.T[(i, j)])
        b_matches = mx.equal(b, V2.T[(i, j)])
        trace[f"{i},{j}"] = {
            "a": mx.to_str(a),
            "b": mx.to_str(b),
            "square": square,
            "a_is_V1_transition": a_matches,
            "b_is_V2_transition": b_matches,
        }
        ok = ok and square and a_matches and b_matches
    return {"result": ok, "trace": trace}


def verify_functoriality(E: GluedHiggsBundle, L: LiftSystem) -> dict:
    """``C^{-1}_Y(f°E) ≅ f^*C^{-1}_X(E)`` with the witness ``exp(nu_s . theta_s)``."""
    V1, V2 = _v1(E, L), _v2(E, L)
    W = L.witness(E)
    iso = bundle_iso_check(V1, V2, W)
    intertwining = [verify_chart_intertwining(E, L, s) for s in range(L.X.n)]
    nu_cochain = verify_nu_cochain(L)
    descent = verify_descent(E, L)
    flat = V1.flat() and V2.flat()
    result = bool(iso) and all(r["result"] for r in intertwining) and nu_cochain["result"] and descent["result"] and flat
    return {
        "statement": "inverse Cartier of the twisted pullback is the pullback of inverse Cartier",
        "result": result,
        "iso": iso.to_json(),
        "witness": [mx.to_str(w) for w in W],
        "witness_is_identity": all(mx.is_identity(w) for w in W),
        "ob_f_zero": L.ob_f.is_zero(),
        "flat": flat,
        "chart_intertwining": intertwining,
        "nu_cochain": nu_cochain,
        "descent": descent,
    }
