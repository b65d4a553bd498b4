"""Logarithmic one-forms, twisted derivations and matrices of one-forms.

A ring's one-forms are free on ``dlog x`` for log variables and ``dx`` for the
others.  Everything here is expressed in that basis, ordered like the ring's
variables.
"""

from __future__ import annotations

from typing import Sequence

from . import matrix as mx
from .errors import NotLiftPair, ShapeMismatch
from .ring import Ring, RingElem, RingHom, divide_by_monomial


def form_coeffs(e: RingElem) -> list:
    """Coefficients of ``de`` in the basis; ``d x = x dlog x`` for log ``x``."""
    R = e.ring
    out = []
    for i, is_log in enumerate(R.log_flags):
        c = e.partial(i)
        if is_log and c.num:
            c = c * R.var(i)
        out.append(c)
    return out


class LogOneForm:
    """``sum_v coeffs[v] * omega_v`` with ``omega_v`` the basis form of variable ``v``."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: Ring, coeffs: Sequence):
        if len(coeffs) != ring.nvars:
            raise ShapeMismatch("coefficient vector has wrong length")
        self.ring = ring
        self.coeffs = tuple(ring(c) for c in coeffs)

    @classmethod
    def zero(cls, ring: Ring) -> "LogOneForm":
        return cls(ring, [ring.zero] * ring.nvars)

    @classmethod
    def basis(cls, ring: Ring, v) -> "LogOneForm":
        i = v if isinstance(v, int) else ring.index(v)
        return cls(ring, [ring.one if j == i else ring.zero for j in range(ring.nvars)])

    def __add__(self, other: "LogOneForm") -> "LogOneForm":
        return LogOneForm(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "LogOneForm") -> "LogOneForm":
        return LogOneForm(self.ring, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "LogOneForm":
        return LogOneForm(self.ring, [-a for a in self.coeffs])

    def scale(self, c) -> "LogOneForm":
        return LogOneForm(self.ring, [c * a for a in self.coeffs])

    def __rmul__(self, c) -> "LogOneForm":
        return self.scale(c)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LogOneForm)
            and other.ring is self.ring
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    __hash__ = None

    def is_zero(self) -> bool:
        return all(not c.num for c in self.coeffs)

    def reduce_mod_p(self) -> "LogOneForm":
        return LogOneForm(self.ring.reduced(), [c.reduce_mod_p() for c in self.coeffs])

    def lift(self) -> "LogOneForm":
        return LogOneForm(self.ring.lifted(), [c.lift() for c in self.coeffs])

    def divide_by_p(self) -> "LogOneForm":
        return LogOneForm(self.ring.reduced(), [c.divide_by_p() for c in self.coeffs])

    def to_json(self) -> dict:
        return {n: c.to_json() for n, c in zip(self.ring.names, self.coeffs)}

    def __str__(self) -> str:
        terms = []
        for (n, is_log), c in zip(self.ring.desc.vars, self.coeffs):
            if c.num:
                terms.append(f"({c})*{'dlog ' if is_log else 'd'}{n}")
        return " + ".join(terms) or "0"

    __repr__ = __str__


def differential(e: RingElem) -> LogOneForm:
    return LogOneForm(e.ring, form_coeffs(e))


def pulled_basis(h: RingHom, i: int) -> LogOneForm:
    """``h^* omega_i`` expressed in the target basis (cached on ``h``)."""
    cache = h._form_cache
    if i in cache:
        return cache[i]
    T = h.target
    if h.source.log_flags[i]:
        m, u = h.log_parts[i]
        coeffs = form_coeffs(u)
        uinv = u.inverse()
        coeffs = [c * uinv for c in coeffs]
        for j, k in enumerate(m):
            if k:
                coeffs[j] = coeffs[j] + k
        out = LogOneForm(T, coeffs)
    else:
        out = differential(h.images[i])
    cache[i] = out
    return out


def pullback_form(h: RingHom, w: LogOneForm) -> LogOneForm:
    if w.ring is not h.source:
        raise ShapeMismatch("form does not live on the source of the hom")
    T = h.target
    acc = [T.zero] * T.nvars
    for i, c in enumerate(w.coeffs):
        if not c.num:
            continue
        hc = h(c)
        b = pulled_basis(h, i)
        for j, bj in enumerate(b.coeffs):
            if bj.num:
                acc[j] = acc[j] + hc * bj
    return LogOneForm(T, acc)


class TwistedDerivation:
    """A map on forms of ``base.source`` with values in ``base.target``,
    linear over ``base``: ``delta(h * w) = base(h) * delta(w)``.

    ``values[i]`` is the value on the ``i``-th basis form.
    """

    __slots__ = ("base", "values")

    def __init__(self, base: RingHom, values: Sequence):
        if len(values) != base.source.nvars:
            raise ShapeMismatch("derivation needs one value per source variable")
        self.base = base
        self.values = tuple(base.target(v) for v in values)

    @classmethod
    def zero(cls, base: RingHom) -> "TwistedDerivation":
        return cls(base, [base.target.zero] * base.source.nvars)

    @property
    def source(self) -> Ring:
        return self.base.source

    @property
    def target(self) -> Ring:
        return self.base.target

    def __call__(self, w: LogOneForm) -> RingElem:
        if w.ring is not self.source:
            raise ShapeMismatch("form does not live on the derivation's source")
        acc = self.target.zero
        for c, v in zip(w.coeffs, self.values):
            if c.num and v.num:
                acc = acc + self.base(c) * v
        return acc

    def on_element(self, e: RingElem) -> RingElem:
        return self(differential(e))

    def _check(self, other: "TwistedDerivation"):
        if self.base != other.base:
            raise ShapeMismatch("derivations over different bases")

    def __add__(self, other: "TwistedDerivation") -> "TwistedDerivation":
        self._check(other)
        return TwistedDerivation(self.base, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other: "TwistedDerivation") -> "TwistedDerivation":
        self._check(other)
        return TwistedDerivation(self.base, [a - b for a, b in zip(self.values, other.values)])

    def __neg__(self) -> "TwistedDerivation":
        return TwistedDerivation(self.base, [-a for a in self.values])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TwistedDerivation)
            and self.base == other.base
            and all(a == b for a, b in zip(self.values, other.values))
        )

    __hash__ = None

    def is_zero(self) -> bool:
        return all(not v.num for v in self.values)

    def to_json(self) -> dict:
        return {n: v.to_json() for n, v in zip(self.source.names, self.values)}

    def __repr__(self) -> str:
        body = ", ".join(f"{n}: {v}" for n, v in zip(self.source.names, self.values))
        return f"TwistedDerivation({body})"


def hom_difference_derivation(a: RingHom, b: RingHom) -> TwistedDerivation:
    """The derivation ``(a - b) / p`` for two level-2 homs agreeing mod ``p``.

    On an ordinary variable the value is ``(a(x) - b(x)) / p``; on a log
    variable it is that quantity divided by ``base(x)``, so that composing with
    ``d`` recovers ``(a - b) / p`` on every element.
    """
    if a.source is not b.source or a.target is not b.target:
        raise ShapeMismatch("homs must share source and target")
    if a.source.level != 2:
        raise ShapeMismatch("difference derivations need level-2 homs")
    ra, rb = a.reduce_mod_p(), b.reduce_mod_p()
    if ra != rb:
        raise NotLiftPair("homs do not agree modulo p")
    base = rb
    values = []
    for i, is_log in enumerate(a.source.log_flags):
        w = (a.images[i] - b.images[i]).divide_by_p()
        if is_log and w.num:
            m, u = base.log_parts[i]
            w = divide_by_monomial(w * u.inverse(), m)
        values.append(w)
    return TwistedDerivation(base, values)


# --------------------------------------------------------------------------
# matrices of one-forms


class FormMatrix:
    """``sum_v comps[v] * omega_v`` with matrix-valued components.

    Used for Higgs fields (components ``theta_v``) and connection matrices.
    A connection acts on coordinate columns by ``s -> ds + A s``.
    """

    __slots__ = ("ring", "n", "comps")

    def __init__(self, ring: Ring, comps: Sequence):
        if len(comps) != ring.nvars:
            raise ShapeMismatch("need one component per variable")
        self.ring = ring
        self.comps = tuple(comps)
        self.n = len(comps[0]) if comps else 0

    @classmethod
    def zero(cls, ring: Ring, n: int) -> "FormMatrix":
        z = mx.zeros(ring, n)
        return cls(ring, [z] * ring.nvars)

    @classmethod
    def from_forms(cls, ring: Ring, entries: Sequence[Sequence[LogOneForm]]) -> "FormMatrix":
        n = len(entries)
        comps = []
        for v in range(ring.nvars):
            comps.append(tuple(tuple(entries[i][j].coeffs[v] for j in range(n)) for i in range(n)))
        return cls(ring, comps)

    def entry(self, i: int, j: int) -> LogOneForm:
        return LogOneForm(self.ring, [c[i][j] for c in self.comps])

    def __add__(self, other: "FormMatrix") -> "FormMatrix":
        return FormMatrix(self.ring, [mx.add(a, b) for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "FormMatrix") -> "FormMatrix":
        return FormMatrix(self.ring, [mx.sub(a, b) for a, b in zip(self.comps, other.comps)])

    def lmul(self, M) -> "FormMatrix":
        return FormMatrix(self.ring, [mx.mul(M, a) for a in self.comps])

    def rmul(self, M) -> "FormMatrix":
        return FormMatrix(self.ring, [mx.mul(a, M) for a in self.comps])

    def map_entries(self, f) -> "FormMatrix":
        """Apply ``f`` to every coefficient, keeping the basis (target ring taken from f's output)."""
        comps = [mx.apply(f, a) for a in self.comps]
        return FormMatrix(mx.ring_of(comps[0]) if comps and comps[0] else self.ring, comps)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FormMatrix)
            and other.ring is self.ring
            and all(mx.equal(a, b) for a, b in zip(self.comps, other.comps))
        )

    __hash__ = None

    def is_zero(self) -> bool:
        return all(mx.is_zero(a) for a in self.comps)

    def pullback(self, h: RingHom) -> "FormMatrix":
        """Pull back entries and basis forms along ``h``."""
        T = h.target
        acc = [mx.zeros(T, self.n) for _ in range(T.nvars)]
        for i, A in enumerate(self.comps):
            if mx.is_zero(A):
                continue
            hA = mx.apply(h, A)
            b = pulled_basis(h, i)
            for j, bj in enumerate(b.coeffs):
                if bj.num:
                    acc[j] = mx.add(acc[j], mx.scale(bj, hA))
        return FormMatrix(T, acc)

    def contract(self, delta: TwistedDerivation):
        """``sum_v base(A_v) * delta(omega_v)``: an endomorphism matrix over the target."""
        if delta.source is not self.ring:
            raise ShapeMismatch("derivation and form matrix live on different rings")
        T = delta.target
        acc = mx.zeros(T, self.n)
        for A, val in zip(self.comps, delta.values):
            if val.num and not mx.is_zero(A):
                acc = mx.add(acc, mx.scale(val, mx.apply(delta.base, A)))
        return acc

    @classmethod
    def d(cls, M) -> "FormMatrix":
        """Entrywise differential of an element matrix."""
        R = mx.ring_of(M)
        n = len(M)
        coeffs = [[form_coeffs(a) if a.num else None for a in row] for row in M]
        comps = []
        for v in range(R.nvars):
            comps.append(
                tuple(
                    tuple(coeffs[i][j][v] if coeffs[i][j] else R.zero for j in range(n))
                    for i in range(n)
                )
            )
        return cls(R, comps)

    def curvature(self) -> dict:
        """``dA + A ^ A`` as components on ``omega_a ^ omega_b`` for ``a < b``."""
        R = self.ring
        n = self.n
        dcomp = [FormMatrix.d(A) for A in self.comps]
        out = {}
        for a in range(R.nvars):
            for b in range(a + 1, R.nvars):
                K = mx.sub(dcomp[b].comps[a], dcomp[a].comps[b])
                K = mx.add(K, mx.commutator(self.comps[a], self.comps[b]))
                out[(a, b)] = K
        return out

    def to_json(self) -> dict:
        return {n: mx.to_json(A) for n, A in zip(self.ring.names, self.comps)}

    def __repr__(self) -> str:
        return f"FormMatrix({self.ring!r}, {[mx.to_str(A) for A in self.comps]})"
