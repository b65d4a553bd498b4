"""Localized multivariate polynomial rings over Z/p and Z/p^2.

A ring is a polynomial ring in declared variables (each optionally flagged as
logarithmic) with a finite list of monic polynomials inverted.  Elements are
stored as ``numerator / prod(g_i ** e_i)`` where the ``g_i`` are the inverted
polynomials.  Coefficients live in ``Z/p`` (level 1) or ``Z/p^2`` (level 2).

Polynomials are plain ``dict`` objects mapping exponent tuples (indexed by the
declared variable order) to integer coefficients.  Monomials compare
lexicographically, which is Python tuple order.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import LogViolation, NotAUnit, NotDivisible, ShapeMismatch

Poly = dict


# --------------------------------------------------------------------------
# raw polynomial helpers


def _padd(a: Poly, b: Poly, N: int) -> Poly:
    r = dict(a)
    for k, c in b.items():
        v = (r.get(k, 0) + c) % N
        if v:
            r[k] = v
        else:
            r.pop(k, None)
    return r


def _pscale(a: Poly, c: int, N: int) -> Poly:
    c %= N
    if not c:
        return {}
    r = {}
    for k, v in a.items():
        w = v * c % N
        if w:
            r[k] = w
    return r


def _pmul(a: Poly, b: Poly, N: int) -> Poly:
    if len(a) > len(b):
        a, b = b, a
    r: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            r[k] = r.get(k, 0) + ca * cb
    return {k: v % N for k, v in r.items() if v % N}


def _pdiv_exact(a: Poly, g: Poly, N: int):
    """Return ``a / g`` if the monic ``g`` divides ``a`` exactly, else None."""
    lg = max(g)
    rem = dict(a)
    q = {}
    while rem:
        lt = max(rem)
        m = tuple(x - y for x, y in zip(lt, lg))
        if any(x < 0 for x in m):
            return None
        c = rem[lt]
        q[m] = c
        for kg, cg in g.items():
            k = tuple(x + y for x, y in zip(m, kg))
            v = (rem.get(k, 0) - c * cg) % N
            if v:
                rem[k] = v
            else:
                rem.pop(k, None)
    return q


def _pderiv(a: Poly, j: int, N: int) -> Poly:
    r = {}
    for k, c in a.items():
        if k[j]:
            v = c * k[j] % N
            if v:
                kk = list(k)
                kk[j] -= 1
                r[tuple(kk)] = v
    return r


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# --------------------------------------------------------------------------
# descriptors and rings


@dataclass(frozen=True)
class RingDescriptor:
    """Variables ``((name, is_log), ...)`` and inverted monic polynomials.

    ``inverted`` holds each polynomial as a sorted tuple of
    ``(exponent_tuple, int_coefficient)`` pairs.
    """

    vars: tuple
    inverted: tuple = ()

    def __post_init__(self):
        names = [v[0] for v in self.vars]
        if len(set(names)) != len(names):
            raise ShapeMismatch(f"duplicate variable names in {names}")
        n = len(names)
        for g in self.inverted:
            gd = {k: c for k, c in g if c}
            if not gd or any(len(k) != n for k in gd):
                raise ShapeMismatch("inverted polynomial has wrong arity")
            lead = max(gd)
            if not any(lead):
                raise ShapeMismatch("inverted polynomial must be nonconstant")
            if gd[lead] != 1:
                raise ShapeMismatch("inverted polynomial must be monic in lex order")

    @classmethod
    def make(cls, vars: Sequence, inverted: Iterable = ()) -> "RingDescriptor":
        """Build from ``[(name, is_log), ...]`` or plain names, and polynomials
        given as dicts or expression strings."""
        vs = tuple((v, False) if isinstance(v, str) else (str(v[0]), bool(v[1])) for v in vars)
        names = [v[0] for v in vs]
        inv = []
        for g in inverted:
            if isinstance(g, str):
                g = _parse_poly(g, names)
            elif isinstance(g, Mapping) and "num" in g:
                g = {tuple(t["e"]): int(t["c"]) for t in g["num"]}
            inv.append(tuple(sorted((tuple(k), int(c)) for k, c in dict(g).items() if c)))
        return cls(vs, tuple(inv))

    @property
    def names(self) -> tuple:
        return tuple(v[0] for v in self.vars)

    @property
    def log_flags(self) -> tuple:
        return tuple(v[1] for v in self.vars)

    def with_inverted(self, extra: Iterable) -> "RingDescriptor":
        d = RingDescriptor.make(self.vars, list(extra))
        inv = list(self.inverted)
        for g in d.inverted:
            if g not in inv:
                inv.append(g)
        return RingDescriptor(self.vars, tuple(inv))

    def to_json(self) -> dict:
        return {
            "vars": [{"name": n, "log": l} for n, l in self.vars],
            "inverted": [
                {"num": [{"c": c, "e": list(k)} for k, c in g], "den": []} for g in self.inverted
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "RingDescriptor":
        vs = [(v["name"], bool(v.get("log", False))) for v in obj["vars"]]
        return cls.make(vs, obj.get("inverted", []))


class Ring:
    """A descriptor together with a coefficient modulus ``p ** level``.

    Rings are interned, so identity comparison is equality.
    """

    _interned: dict = {}

    def __new__(cls, desc: RingDescriptor, p: int, level: int = 1):
        key = (desc, p, level)
        r = cls._interned.get(key)
        if r is not None:
            return r
        if not (_is_prime(p) and 3 <= p <= 31):
            raise ValueError(f"p must be an odd prime at most 31, got {p}")
        if level not in (1, 2):
            raise ValueError("level must be 1 or 2")
        r = super().__new__(cls)
        r.desc = desc
        r.p = p
        r.level = level
        r.N = p**level
        r.nvars = len(desc.vars)
        r.names = desc.names
        r.log_flags = desc.log_flags
        r.inv = [_pscale(dict(g), 1, r.N) for g in desc.inverted]
        r.ninv = len(r.inv)
        r._gprod_cache = {}
        r._dg_cache = {}
        r._inverse_cache = {}
        cls._interned[key] = r
        return r

    def __reduce__(self):
        return (Ring, (self.desc, self.p, self.level))

    def __repr__(self) -> str:
        vs = ",".join(("log " if l else "") + n for n, l in self.desc.vars)
        inv = ",".join(_poly_str(g, self.names) for g in self.inv)
        base = "Z/%d" % self.N
        return f"{base}[{vs}]" + (f"[1/({inv})]" if inv else "")

    # -- construction helpers
    @property
    def zero_exp(self) -> tuple:
        return (0,) * self.nvars

    @property
    def zero_den(self) -> tuple:
        return (0,) * self.ninv

    @property
    def zero(self) -> "RingElem":
        return RingElem(self, {}, None, _canonical=True)

    @property
    def one(self) -> "RingElem":
        return self.const(1)

    def const(self, c: int) -> "RingElem":
        c %= self.N
        return RingElem(self, {self.zero_exp: c} if c else {}, None, _canonical=True)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ShapeMismatch(f"unknown variable {name!r} in {self!r}") from None

    def var(self, v) -> "RingElem":
        i = v if isinstance(v, int) else self.index(v)
        e = [0] * self.nvars
        e[i] = 1
        return RingElem(self, {tuple(e): 1}, None, _canonical=True)

    def gens(self) -> list:
        return [self.var(i) for i in range(self.nvars)]

    def __call__(self, x) -> "RingElem":
        """Coerce an int, expression string, JSON encoding or element."""
        if isinstance(x, RingElem):
            if x.ring is not self:
                raise ShapeMismatch(f"element of {x.ring!r} used in {self!r}")
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not a ring element")
        if isinstance(x, int):
            return self.const(x)
        if isinstance(x, str):
            return _parse_elem(self, x)
        if isinstance(x, Mapping):
            return RingElem.from_json(self, x)
        raise TypeError(f"cannot coerce {x!r} into {self!r}")

    def at_level(self, level: int) -> "Ring":
        return Ring(self.desc, self.p, level)

    def reduced(self) -> "Ring":
        return self.at_level(1)

    def lifted(self) -> "Ring":
        return self.at_level(2)

    def frobenius(self) -> "RingHom":
        """The absolute Frobenius ``x -> x^p`` (level 1 only)."""
        if self.level != 1:
            raise ShapeMismatch("absolute Frobenius is a level-1 map")
        fr = self.__dict__.get("_frob")
        if fr is None:
            fr = self._frob = RingHom(self, self, [v**self.p for v in self.gens()])
        return fr

    def identity(self) -> "RingHom":
        ident = self.__dict__.get("_ident")
        if ident is None:
            ident = self._ident = RingHom(self, self, self.gens())
        return ident

    # -- cached products of inverted polynomials
    def gprod(self, exps: tuple) -> Poly:
        r = self._gprod_cache.get(exps)
        if r is None:
            r = {self.zero_exp: 1}
            for g, e in zip(self.inv, exps):
                for _ in range(e):
                    r = _pmul(r, g, self.N)
            self._gprod_cache[exps] = r
        return r

    def dg(self, i: int, j: int) -> Poly:
        key = (i, j)
        r = self._dg_cache.get(key)
        if r is None:
            r = _pderiv(self.inv[i], j, self.N)
            self._dg_cache[key] = r
        return r

    def to_json(self) -> dict:
        return self.desc.to_json()


# --------------------------------------------------------------------------
# elements


class RingElem:
    """Immutable element ``num / prod(g_i ** den_i)`` in canonical form."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: Ring, num: Poly, den=None, *, _canonical: bool = False):
        self.ring = ring
        if den is None:
            den = ring.zero_den
        if not _canonical:
            N = ring.N
            num = {k: c % N for k, c in num.items() if c % N}
            den = tuple(den)
            if any(den) and num:
                num, den = _cancel(ring, num, den)
            elif not num:
                den = ring.zero_den
        self.num = num
        self.den = den

    # -- predicates
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_constant(self) -> bool:
        return not any(self.den) and all(not any(k) for k in self.num)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.get(self.ring.zero_exp, 0)

    # -- coercion
    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring is not self.ring:
                raise ShapeMismatch(f"mixing {self.ring!r} and {other.ring!r}")
            return other
        if isinstance(other, int) and not isinstance(other, bool):
            return self.ring.const(other)
        return NotImplemented

    # -- arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        R = self.ring
        if self.den == other.den:
            return RingElem(R, _padd(self.num, other.num, R.N), self.den)
        D = tuple(max(a, b) for a, b in zip(self.den, other.den))
        a = _pmul(self.num, R.gprod(tuple(d - e for d, e in zip(D, self.den))), R.N)
        b = _pmul(other.num, R.gprod(tuple(d - e for d, e in zip(D, other.den))), R.N)
        return RingElem(R, _padd(a, b, R.N), D)

    __radd__ = __add__

    def __neg__(self) -> "RingElem":
        return RingElem(self.ring, _pscale(self.num, -1, self.ring.N), self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        R = self.ring
        if not self.num or not other.num:
            return R.zero
        den = tuple(a + b for a, b in zip(self.den, other.den))
        return RingElem(R, _pmul(self.num, other.num, R.N), den)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RingElem":
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            other = self.ring.const(other)
        if not isinstance(other, RingElem) or other.ring is not self.ring:
            return False
        if self.den == other.den:
            return self.num == other.num
        R = self.ring
        D = tuple(max(a, b) for a, b in zip(self.den, other.den))
        a = _pmul(self.num, R.gprod(tuple(d - e for d, e in zip(D, self.den))), R.N)
        b = _pmul(other.num, R.gprod(tuple(d - e for d, e in zip(D, other.den))), R.N)
        return a == b

    __hash__ = None  # equality is decided by cross-multiplication

    # -- units
    def _unit_split(self):
        """Write the level-1 numerator as ``c * prod(g_i ** k_i)``; None if impossible."""
        R = self.ring
        a = self.num
        if not a:
            return None
        ks = [0] * R.ninv
        for i, g in enumerate(R.inv):
            while True:
                q = _pdiv_exact(a, g, R.N)
                if q is None:
                    break
                a = q
                ks[i] += 1
        if len(a) != 1 or any(next(iter(a))):
            return None
        c = next(iter(a.values()))
        if c % R.p == 0:
            return None
        return c, tuple(ks)

    def is_unit(self) -> bool:
        e = self.reduce_mod_p() if self.ring.level == 2 else self
        return e._unit_split() is not None

    def inverse(self) -> "RingElem":
        """Multiplicative inverse.

        Level 1 inverts ``c * prod(g_i ** k_i)`` directly; level 2 lifts the
        level-1 inverse and applies one Newton step ``x (2 - a x)``.
        """
        R = self.ring
        if R.level == 2:
            x0 = self.reduce_mod_p().inverse().lift()
            return x0 * (2 - self * x0)
        split = self._unit_split()
        if split is None:
            raise NotAUnit(f"{self} is not a unit in {R!r}")
        c, ks = split
        cinv = pow(c, -1, R.N)
        return RingElem(R, _pscale(R.gprod(self.den), cinv, R.N), ks)

    # -- level changes
    def reduce_mod_p(self) -> "RingElem":
        R = self.ring
        if R.level == 1:
            return self
        return RingElem(R.reduced(), self.num, self.den)

    def lift(self) -> "RingElem":
        """Level-1 element with coefficients read as integers in ``[0, p)``."""
        R = self.ring
        if R.level == 2:
            return self
        return RingElem(R.lifted(), dict(self.num), self.den, _canonical=True)

    def divide_by_p(self) -> "RingElem":
        R = self.ring
        if R.level != 2:
            raise ShapeMismatch("divide_by_p expects a level-2 element")
        p = R.p
        for c in self.num.values():
            if c % p:
                raise NotDivisible(f"{self} is not divisible by {p}")
        return RingElem(R.reduced(), {k: c // p for k, c in self.num.items()}, self.den)

    def mul_p(self) -> "RingElem":
        """Multiplication by ``p`` as a map of the level-2 ring into itself."""
        R = self.ring
        if R.level != 2:
            raise ShapeMismatch("mul_p expects a level-2 element")
        return RingElem(R, _pscale(self.num, R.p, R.N), self.den)

    # -- calculus
    def partial(self, j) -> "RingElem":
        R = self.ring
        j = j if isinstance(j, int) else R.index(j)
        if not self.num:
            return R.zero
        out = RingElem(R, _pderiv(self.num, j, R.N), self.den)
        if any(self.den):
            corr = R.zero
            for i, e in enumerate(self.den):
                if e:
                    dg = R.dg(i, j)
                    if dg:
                        den = [0] * R.ninv
                        den[i] = 1
                        corr = corr + RingElem(R, _pscale(dg, e, R.N), tuple(den))
            if corr:
                out = out - self * corr
        return out

    def differential(self):
        from .forms import differential

        return differential(self)

    # -- encoding
    def to_json(self) -> dict:
        return {
            "num": [{"c": c, "e": list(k)} for k, c in sorted(self.num.items())],
            "den": list(self.den),
        }

    @classmethod
    def from_json(cls, ring: Ring, obj) -> "RingElem":
        if isinstance(obj, RingElem):
            return ring(obj)
        if isinstance(obj, (int, str)):
            return ring(obj)
        num = {}
        for t in obj.get("num", []):
            e = tuple(int(x) for x in t["e"])
            if len(e) != ring.nvars:
                raise ShapeMismatch(f"exponent vector {list(e)} has wrong length for {ring!r}")
            num[e] = num.get(e, 0) + int(t["c"])
        den = tuple(int(x) for x in obj.get("den", [])) or ring.zero_den
        if len(den) != ring.ninv or any(d < 0 for d in den):
            raise ShapeMismatch(f"denominator vector {list(den)} invalid for {ring!r}")
        return cls(ring, num, den)

    def __str__(self) -> str:
        R = self.ring
        s = _poly_str(self.num, R.names)
        if any(self.den):
            parts = []
            for g, e in zip(R.inv, self.den):
                if e:
                    gs = _poly_str(g, R.names)
                    parts.append(f"({gs})" + (f"^{e}" if e > 1 else ""))
            s = f"({s})/" + "*".join(parts)
        return s

    def __repr__(self) -> str:
        return f"RingElem({self})"


def _cancel(ring: Ring, num: Poly, den: tuple):
    den = list(den)
    N = ring.N
    for i, g in enumerate(ring.inv):
        while den[i]:
            q = _pdiv_exact(num, g, N)
            if q is None:
                break
            num = q
            den[i] -= 1
    return num, tuple(den)


def _poly_str(a: Poly, names: Sequence[str]) -> str:
    if not a:
        return "0"
    terms = []
    for k in sorted(a, reverse=True):
        c = a[k]
        mono = "*".join(n + (f"^{e}" if e > 1 else "") for n, e in zip(names, k) if e)
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms)


# --------------------------------------------------------------------------
# expression parsing


def _parse_poly(text: str, names: Sequence[str]) -> Poly:
    """Parse a polynomial with integer coefficients (no division)."""
    n = len(names)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return {(0,) * n: node.value} if node.value else {}
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ShapeMismatch(f"unknown variable {node.id!r}")
            e = [0] * n
            e[names.index(node.id)] = 1
            return {tuple(e): 1}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return {k: -c for k, c in ev(node.operand).items()}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return ev(node.operand)
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ShapeMismatch("exponent must be an integer literal")
                r = {(0,) * n: 1}
                for _ in range(node.right.value):
                    r = _imul(r, a)
                return r
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return _iadd(a, b, 1)
            if isinstance(node.op, ast.Sub):
                return _iadd(a, b, -1)
            if isinstance(node.op, ast.Mult):
                return _imul(a, b)
        raise ShapeMismatch(f"unsupported polynomial syntax: {ast.dump(node)}")

    return ev(ast.parse(text.replace("^", "**"), mode="eval"))


def _iadd(a, b, s):
    r = dict(a)
    for k, c in b.items():
        r[k] = r.get(k, 0) + s * c
    return {k: c for k, c in r.items() if c}


def _imul(a, b):
    r: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            r[k] = r.get(k, 0) + ca * cb
    return {k: c for k, c in r.items() if c}


def _parse_elem(ring: Ring, text: str) -> RingElem:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return ring.const(node.value)
        if isinstance(node, ast.Name):
            return ring.var(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return ev(node.operand)
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                if isinstance(node.right, ast.Constant) and isinstance(node.right.value, int):
                    return a ** node.right.value
                if (
                    isinstance(node.right, ast.UnaryOp)
                    and isinstance(node.right.op, ast.USub)
                    and isinstance(node.right.operand, ast.Constant)
                ):
                    return a ** (-node.right.operand.value)
                raise ShapeMismatch("exponent must be an integer literal")
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
        raise ShapeMismatch(f"unsupported expression syntax: {ast.dump(node)}")

    return ev(ast.parse(text.replace("^", "**"), mode="eval"))


# --------------------------------------------------------------------------
# homomorphisms


class RingHom:
    """Ring homomorphism given by images of the source variables.

    At construction every inverted polynomial of the source must map to a unit
    and every log variable to ``(monomial in target log variables) * unit``.
    """

    def __init__(self, source: Ring, target: Ring, images, *, name: str = ""):
        if source.p != target.p or source.level != target.level:
            raise ShapeMismatch(f"hom {source!r} -> {target!r} changes coefficients")
        self.source = source
        self.target = target
        self.name = name
        if isinstance(images, Mapping):
            missing = [n for n in source.names if n not in images]
            if missing:
                raise ShapeMismatch(f"missing images for {missing}")
            images = [images[n] for n in source.names]
        images = [target(x) if not isinstance(x, RingElem) else x for x in images]
        if len(images) != source.nvars:
            raise ShapeMismatch("wrong number of images")
        for x in images:
            if x.ring is not target:
                raise ShapeMismatch(f"image {x} does not live in {target!r}")
        self.images = tuple(images)
        self._pow: dict = {}
        self._inv_g = []
        for i, g in enumerate(source.inv):
            try:
                self._inv_g.append(self._eval_poly(g).inverse())
            except NotAUnit:
                raise NotAUnit(
                    f"inverted element {_poly_str(g, source.names)} does not map to a unit",
                    location=name or None,
                ) from None
        self.log_parts = {}
        for i, (vname, is_log) in enumerate(source.desc.vars):
            if is_log:
                self.log_parts[i] = log_decompose(self.images[i], where=f"{name or 'hom'}:{vname}")
        self._form_cache: dict = {}

    def _power(self, i: int, k: int) -> RingElem:
        key = (i, k)
        r = self._pow.get(key)
        if r is None:
            r = self.images[i] if k == 1 else self._power(i, k - 1) * self.images[i]
            self._pow[key] = r
        return r

    def _eval_poly(self, a: Poly) -> RingElem:
        T = self.target
        if not a:
            return T.zero
        # accumulate over a common denominator, canonicalize once
        maxk = [0] * self.source.nvars
        for k in a:
            for i, e in enumerate(k):
                if e > maxk[i]:
                    maxk[i] = e
        D = [0] * T.ninv
        for i, m in enumerate(maxk):
            if m:
                dv = self.images[i].den
                for j in range(T.ninv):
                    D[j] += m * dv[j]
        D = tuple(D)
        acc: dict = {}
        N = T.N
        for k, c in a.items():
            term = {T.zero_exp: c}
            tden = [0] * T.ninv
            for i, e in enumerate(k):
                if e:
                    pw = self._power(i, e)
                    term = _pmul(term, pw.num, N)
                    for j in range(T.ninv):
                        tden[j] += pw.den[j]
            if not term:
                continue
            if tuple(tden) != D:
                term = _pmul(term, T.gprod(tuple(d - t for d, t in zip(D, tden))), N)
            for kk, cc in term.items():
                acc[kk] = acc.get(kk, 0) + cc
        return RingElem(T, acc, D)

    def __call__(self, e) -> RingElem:
        if isinstance(e, int):
            return self.target.const(e)
        if e.ring is not self.source:
            raise ShapeMismatch(f"{e} is not in the source {self.source!r}")
        out = self._eval_poly(e.num)
        for i, k in enumerate(e.den):
            if k:
                out = out * self._inv_g[i] ** k
        return out

    apply = __call__

    def compose(self, other: "RingHom") -> "RingHom":
        """``self o other``: apply ``other`` first."""
        if other.target is not self.source:
            raise ShapeMismatch("composition of incompatible homs")
        return RingHom(other.source, self.target, [self(x) for x in other.images])

    def reduce_mod_p(self) -> "RingHom":
        if self.source.level == 1:
            return self
        return RingHom(
            self.source.reduced(),
            self.target.reduced(),
            [x.reduce_mod_p() for x in self.images],
            name=self.name,
        )

    def lift(self) -> "RingHom":
        if self.source.level == 2:
            return self
        return RingHom(self.source.lifted(), self.target.lifted(), [x.lift() for x in self.images], name=self.name)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RingHom)
            and self.source is other.source
            and self.target is other.target
            and all(a == b for a, b in zip(self.images, other.images))
        )

    __hash__ = None

    def to_json(self) -> dict:
        return {n: x.to_json() for n, x in zip(self.source.names, self.images)}

    def __repr__(self) -> str:
        body = ", ".join(f"{n}->{x}" for n, x in zip(self.source.names, self.images))
        return f"RingHom({body})"


def log_decompose(e: RingElem, where: str = "") -> tuple:
    """Split ``e`` as ``x^m * u`` with ``x^m`` a monomial in the log variables
    and ``u`` a unit; returns ``(m, u)``."""
    R = e.ring
    if not e.num:
        raise LogViolation("zero is not of log shape", location=where or None)
    m = [0] * R.nvars
    for i, is_log in enumerate(R.log_flags):
        if is_log:
            m[i] = min(k[i] for k in e.num)
    m = tuple(m)
    if any(m):
        num = {tuple(a - b for a, b in zip(k, m)): c for k, c in e.num.items()}
        u = RingElem(R, num, e.den)
    else:
        u = e
    if not u.is_unit():
        raise LogViolation(f"{e} is not a log monomial times a unit", location=where or None)
    return m, u


def divide_by_monomial(e: RingElem, m: tuple) -> RingElem:
    """Exact division by the monomial ``x^m``."""
    R = e.ring
    for i, k in enumerate(m):
        if not k:
            continue
        gi = None
        for j, g in enumerate(R.inv):
            if len(g) == 1 and next(iter(g)) == tuple(int(t == i) for t in range(R.nvars)):
                gi = j
        if gi is not None:
            e = e * RingElem(R, {R.zero_exp: 1}, tuple(k if t == gi else 0 for t in range(R.ninv)))
        else:
            if any(key[i] < k for key in e.num):
                raise NotDivisible(f"{e} is not divisible by {R.names[i]}^{k}")
            e = RingElem(R, {tuple(a - (k if t == i else 0) for t, a in enumerate(key)): c for key, c in e.num.items()}, e.den)
    return e
