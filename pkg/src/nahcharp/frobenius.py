"""Frobenius lifts modulo ``p^2`` and the divided differential ``dF/p``."""

from __future__ import annotations

from .errors import LogShapeViolation, NotAFrobeniusLift, NotDivisible, ShapeMismatch
from .forms import LogOneForm, pullback_form
from .ring import RingElem, RingHom, divide_by_monomial


def frobenius_lift_check(Ft: RingHom, where=None) -> dict:
    """Validate a level-2 Frobenius lift.

    Returns ``{var: h}`` for the log variables, where ``F(x) = x^p (1 + p h)``.
    """
    R = Ft.source
    if Ft.target is not R or R.level != 2:
        raise ShapeMismatch("a Frobenius lift is a level-2 endomorphism", location=where)
    F1 = R.reduced().frobenius()
    if Ft.reduce_mod_p() != F1:
        raise NotAFrobeniusLift("does not reduce to the p-th power map", location=where)
    hs = {}
    for i, (name, is_log) in enumerate(R.desc.vars):
        if not is_log:
            continue
        m = tuple(R.p if t == i else 0 for t in range(R.nvars))
        try:
            q = divide_by_monomial(Ft.images[i], m)
        except NotDivisible:
            raise LogShapeViolation(f"image of {name} is not x^p times a unit", location=where) from None
        try:
            hs[name] = (q - 1).divide_by_p()
        except NotDivisible:
            raise LogShapeViolation(f"image of {name} is not x^p(1 + p h)", location=where) from None
    return hs


def dF_over_p(Ft: RingHom, w: LogOneForm) -> LogOneForm:
    """``F^* w / p`` for a level-1 form ``w``: additive and Frobenius-semilinear."""
    if w.ring is not Ft.source.reduced():
        raise ShapeMismatch("form must live on the level-1 ring of the lift")
    pulled = pullback_form(Ft, w.lift())
    try:
        return pulled.divide_by_p()
    except NotDivisible:  # pragma: no cover - excluded by frobenius_lift_check
        raise AssertionError("F^* w is not divisible by p for a valid lift") from None


def dF_over_p_basis(Ft: RingHom, i: int) -> LogOneForm:
    R = Ft.source.reduced()
    return dF_over_p(Ft, LogOneForm.basis(R, i))


def frobenius_twist(e: RingElem) -> RingElem:
    """Entrywise ``F^*`` on a level-1 element: ``c -> c^p`` on coefficients' variables."""
    return e.ring.frobenius()(e)
