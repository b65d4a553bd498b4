"""Nilpotent Higgs modules on one chart and the truncated symmetric algebra.

A Higgs field on a free module of rank ``n`` is a :class:`FormMatrix` whose
components commute.  Its exponent is the smallest ``r`` such that every
product of ``r + 1`` components vanishes.  Such a module is the same thing as
a module over ``A_r = Sym(T) / Sym^{>r}(T)``, where the basis vector field
``d_v`` dual to ``omega_v`` acts through the component ``theta_v``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

from . import matrix as mx
from .errors import (
    ExponentTooLarge,
    FactorialNotInvertible,
    NotCommuting,
    NotNilpotent,
    NotNilpotentEnough,
    ShapeMismatch,
)
from .forms import FormMatrix, TwistedDerivation
from .ring import Ring, RingElem, RingHom


@lru_cache(maxsize=None)
def factorial_inverses(p: int, level: int) -> tuple:
    """``1/n!`` modulo ``p**level`` for ``n < p``."""
    N = p**level
    out = []
    f = 1
    for n in range(p):
        if n:
            f *= n
        out.append(pow(f, -1, N))
    return tuple(out)


def trunc_exp(A, r: int | None = None):
    """``sum_{n <= r} A^n / n!`` for a nilpotent matrix with ``A^(r+1) = 0``.

    ``r`` defaults to ``p - 1``.
    """
    R = mx.ring_of(A)
    p = R.p
    if r is None:
        r = p - 1
    if r >= p:
        raise FactorialNotInvertible(f"{r}! is not invertible modulo {p}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    inv = factorial_inverses(p, R.level)
    n = len(A)
    out = mx.identity(R, n)
    term = mx.identity(R, n)
    for k in range(1, r + 1):
        term = mx.mul(term, A)
        if mx.is_zero(term):
            return out
        out = mx.add(out, mx.scale(inv[k], term))
    if not mx.is_zero(mx.mul(term, A)):
        raise NotNilpotentEnough(f"matrix is not nilpotent of exponent <= {r}")
    return out


def _commute_check(comps: Sequence) -> None:
    for a in range(len(comps)):
        for b in range(a + 1, len(comps)):
            if not mx.is_zero(mx.commutator(comps[a], comps[b])):
                raise NotCommuting(f"components {a} and {b} do not commute")


def nilpotency_exponent(comps: Sequence, bound: int):
    """Smallest ``r`` with all ``(r+1)``-fold products zero, or None above ``bound``."""
    if not comps:
        return 0
    R = mx.ring_of(comps[0])
    n = len(comps[0])
    level = {(): mx.identity(R, n)}
    for k in range(1, bound + 2):
        nxt = {}
        for key, P in level.items():
            start = key[-1] if key else 0
            for v in range(start, len(comps)):
                if mx.is_zero(comps[v]):
                    continue
                Q = mx.mul(comps[v], P)
                if not mx.is_zero(Q):
                    nxt[key + (v,)] = Q
        if not nxt:
            return k - 1
        level = nxt
    return None


class HiggsLocal:
    """Free module of rank ``n`` on one chart with a commuting Higgs field."""

    def __init__(self, ring: Ring, theta: FormMatrix, exponent_bound: int | None = None):
        if theta.ring is not ring:
            raise ShapeMismatch("Higgs field lives on a different ring")
        _commute_check(theta.comps)
        self.ring = ring
        self.theta = theta
        self.rank = theta.n
        self.exponent_bound = exponent_bound

    @classmethod
    def from_components(cls, ring: Ring, comps: Sequence, exponent_bound=None) -> "HiggsLocal":
        comps = [mx.from_rows(ring, c) if not isinstance(c[0][0], RingElem) else c for c in comps]
        return cls(ring, FormMatrix(ring, comps), exponent_bound)

    @classmethod
    def zero(cls, ring: Ring, n: int) -> "HiggsLocal":
        return cls(ring, FormMatrix.zero(ring, n), 0)

    def component(self, v):
        i = v if isinstance(v, int) else self.ring.index(v)
        return self.theta.comps[i]

    def exponent(self) -> int:
        return check_nilpotent(self)

    def pullback(self, h: RingHom) -> "HiggsLocal":
        return HiggsLocal(h.target, self.theta.pullback(h), self.exponent_bound)

    def contract(self, delta: TwistedDerivation):
        return self.theta.contract(delta)

    def __eq__(self, other) -> bool:
        return isinstance(other, HiggsLocal) and self.ring is other.ring and self.theta == other.theta

    __hash__ = None

    def to_json(self) -> dict:
        return {"rank": self.rank, "theta": self.theta.to_json()}


def check_nilpotent(E: HiggsLocal) -> int:
    _commute_check(E.theta.comps)
    bound = E.rank * max(E.ring.nvars, 1)
    r = nilpotency_exponent(E.theta.comps, bound)
    if r is None:
        raise NotNilpotent(f"Higgs field is not nilpotent within exponent {bound}")
    return r


def tensor_higgs(E1: HiggsLocal, E2: HiggsLocal) -> HiggsLocal:
    if E1.ring is not E2.ring:
        raise ShapeMismatch("tensor product needs a common ring")
    R = E1.ring
    I1, I2 = mx.identity(R, E1.rank), mx.identity(R, E2.rank)
    comps = [mx.add(mx.kron(a, I2), mx.kron(I1, b)) for a, b in zip(E1.theta.comps, E2.theta.comps)]
    bound = None
    if E1.exponent_bound is not None and E2.exponent_bound is not None:
        bound = E1.exponent_bound + E2.exponent_bound
    return HiggsLocal(R, FormMatrix(R, comps), bound)


def direct_sum_higgs(E1: HiggsLocal, E2: HiggsLocal) -> HiggsLocal:
    if E1.ring is not E2.ring:
        raise ShapeMismatch("direct sum needs a common ring")
    R = E1.ring
    comps = [mx.block_diag(a, b) for a, b in zip(E1.theta.comps, E2.theta.comps)]
    bound = None
    if E1.exponent_bound is not None and E2.exponent_bound is not None:
        bound = max(E1.exponent_bound, E2.exponent_bound)
    return HiggsLocal(R, FormMatrix(R, comps), bound)


# --------------------------------------------------------------------------
# truncated symmetric algebra


class TruncSymAlgebra:
    """``Sym(T)/Sym^{>r}(T)`` over ``ring`` on ``m`` generators.

    Basis monomials are exponent tuples, ordered by total degree and then
    lexicographically (largest first).
    """

    def __init__(self, ring: Ring, m: int, r: int):
        self.ring = ring
        self.m = m
        self.r = r
        basis = []
        for deg in range(r + 1):
            block = []
            for combo in combinations_with_replacement(range(m), deg):
                e = [0] * m
                for c in combo:
                    e[c] += 1
                block.append(tuple(e))
            basis.extend(sorted(block, reverse=True))
        self.basis = tuple(basis)
        self.index = {b: i for i, b in enumerate(self.basis)}

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def expected_dimension(self) -> int:
        return comb(self.m + self.r, self.r)

    def element(self, coeffs: dict) -> "ArElement":
        return ArElement(self, coeffs)

    def one(self) -> "ArElement":
        return ArElement(self, {(0,) * self.m: self.ring.one})

    def generator(self, i: int) -> "ArElement":
        return ArElement(self, {tuple(int(j == i) for j in range(self.m)): self.ring.one})

    def linear(self, values: Sequence[RingElem]) -> "ArElement":
        """The degree-one element ``sum_i values[i] * d_i``."""
        return ArElement(
            self,
            {tuple(int(j == i) for j in range(self.m)): v for i, v in enumerate(values) if v.num},
        )


class ArElement:
    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: TruncSymAlgebra, coeffs: dict):
        self.algebra = algebra
        self.coeffs = {k: v for k, v in coeffs.items() if v.num and sum(k) <= algebra.r}

    def __add__(self, other: "ArElement") -> "ArElement":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return ArElement(self.algebra, out)

    def __mul__(self, other) -> "ArElement":
        if isinstance(other, RingElem):
            return ArElement(self.algebra, {k: v * other for k, v in self.coeffs.items()})
        r = self.algebra.r
        out: dict = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                if sum(k) > r:
                    continue
                t = va * vb
                out[k] = out[k] + t if k in out else t
        return ArElement(self.algebra, out)

    def scale_int(self, c: int) -> "ArElement":
        return ArElement(self.algebra, {k: v * c for k, v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArElement):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        R = self.algebra.ring
        return all(self.coeffs.get(k, R.zero) == other.coeffs.get(k, R.zero) for k in keys)

    __hash__ = None

    def vector(self) -> list:
        R = self.algebra.ring
        return [self.coeffs.get(b, R.zero) for b in self.algebra.basis]

    def exp(self) -> "ArElement":
        """Truncated exponential of an element without constant term."""
        A = self.algebra
        if (0,) * A.m in self.coeffs:
            raise ValueError("exp needs an element without constant term")
        p = A.ring.p
        if A.r >= p:
            raise FactorialNotInvertible(f"{A.r}! is not invertible modulo {p}")
        inv = factorial_inverses(p, A.ring.level)
        out = A.one()
        term = A.one()
        for k in range(1, A.r + 1):
            term = term * self
            out = out + term.scale_int(inv[k])
        return out


class ArModule:
    """Free ``ring``-module of rank ``n`` with commuting generator actions."""

    def __init__(self, algebra: TruncSymAlgebra, action: Sequence):
        if len(action) != algebra.m:
            raise ShapeMismatch("need one action matrix per generator")
        self.algebra = algebra
        self.action = tuple(action)
        self.rank = len(action[0]) if action else 0
        _commute_check(self.action)
        r = nilpotency_exponent(self.action, algebra.r)
        if r is None:
            raise ExponentTooLarge(f"degree-{algebra.r + 1} monomials do not act as zero")

    def monomial_action(self, k: tuple):
        R = self.algebra.ring
        out = mx.identity(R, self.rank)
        for i, e in enumerate(k):
            for _ in range(e):
                out = mx.mul(self.action[i], out)
        return out

    def act(self, a: ArElement):
        R = self.algebra.ring
        out = mx.zeros(R, self.rank)
        for k, c in a.coeffs.items():
            out = mx.add(out, mx.scale(c, self.monomial_action(k)))
        return out


def higgs_to_armodule(E: HiggsLocal, r: int) -> ArModule:
    p = E.ring.p
    if r > p - 1:
        raise ExponentTooLarge(f"r = {r} exceeds p - 1 = {p - 1}")
    e = check_nilpotent(E)
    if e > r:
        raise ExponentTooLarge(f"Higgs exponent {e} exceeds r = {r}")
    return ArModule(TruncSymAlgebra(E.ring, E.ring.nvars, r), E.theta.comps)


def armodule_to_higgs(M: ArModule) -> HiggsLocal:
    R = M.algebra.ring
    if M.algebra.m != R.nvars:
        raise ShapeMismatch("generators must match the ring's basis forms")
    return HiggsLocal(R, FormMatrix(R, M.action), M.algebra.r)
