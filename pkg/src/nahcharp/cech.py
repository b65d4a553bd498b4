"""Finite coverings, Čech cochains of twisted derivations and glued bundles.

Conventions (all sign and order choices live here):

==============================  ===============================================
transition ``T_ij``             chart-``i`` coordinates to chart-``j``
                                coordinates: ``s_j = T_ij s_i``
multiplicative cocycle          ``T_ik = T_jk T_ij`` on triple overlaps
additive cocycle                ``tau_ik = tau_ij + tau_jk``
coboundary of ``(s_i)``         ``(delta s)_ij = s_j - s_i``
obstruction cochain             ``ob_ij = (lift_i - lift_j) / p``
Higgs compatibility             ``T theta_i = theta_j T``
connection on columns           ``nabla s = ds + A s``
gauge compatibility             ``dT + A_j T = T A_i``
bundle isomorphism ``W``        ``W_j T^A_ij = T^B_ij W_i`` and ``W`` intertwines
                                the local Higgs fields or connections
==============================  ===============================================

A :class:`Link` is a restriction from a ring to a smaller open set (chart to
overlap, overlap to triple overlap).  Besides the restriction map it carries
*coordinates*: a map from the smaller ring into the larger one with a few more
elements inverted.  This is what lets a hom defined on a chart be extended to
the overlap, and lets a derivation be restricted.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Mapping, Sequence

from . import matrix as mx
from .errors import CocycleFailure, HiggsMismatch, NotAUnit, NotLiftPair, ShapeMismatch
from .forms import FormMatrix, LogOneForm, TwistedDerivation, hom_difference_derivation, pulled_basis, pullback_form
from .higgs import HiggsLocal
from .ring import Ring, RingDescriptor, RingElem, RingHom


class Link:
    """Restriction ``parent -> child`` together with coordinates ``child -> local``."""

    def __init__(
        self,
        parent: RingDescriptor,
        child: RingDescriptor,
        p: int,
        images: Mapping,
        coords: Mapping | None = None,
        where=None,
    ):
        self.parent = parent
        self.child = child
        self.p = p
        self.where = where
        P2, C2 = Ring(parent, p, 2), Ring(child, p, 2)
        self._res = {2: RingHom(P2, C2, {n: C2(images[n]) for n in parent.names}, name=str(where))}
        self._res[1] = self._res[2].reduce_mod_p()
        if coords is None:
            coords = self._auto_coords()
        extra = coords.get("inverted", [])
        self.local = parent.with_inverted(extra)
        L2 = Ring(self.local, p, 2)
        kappa = RingHom(C2, L2, {n: L2(coords["images"][n]) for n in child.names}, name=str(where))
        self._kappa = {2: kappa, 1: kappa.reduce_mod_p()}
        # res extended to the local ring, then composed with the coordinates, is the identity
        back = RingHom(L2, C2, self._res[2].images).compose(kappa)
        if back != C2.identity():
            raise ShapeMismatch("restriction and coordinates are not inverse", location=where)

    def _auto_coords(self) -> dict:
        if self.child.names != self.parent.names:
            raise ShapeMismatch("coordinates must be given when variable names differ", location=self.where)
        res = self._res[2]
        if any(img != res.target.var(i) for i, img in enumerate(res.images)):
            raise ShapeMismatch("coordinates must be given for a non-identity restriction", location=self.where)
        return {"inverted": list(self.child.inverted), "images": {n: n for n in self.child.names}}

    def res(self, level: int = 1) -> RingHom:
        return self._res[level]

    def coords(self, level: int = 1) -> RingHom:
        return self._kappa[level]

    def extend(self, psi: RingHom) -> RingHom:
        """Given ``psi`` on the parent ring, the map it induces on the child ring."""
        level = psi.source.level
        if psi.source is not Ring(self.parent, self.p, level):
            raise ShapeMismatch("hom does not start at the parent ring", location=self.where)
        kappa = self._kappa[level]
        return RingHom(kappa.target, psi.target, psi.images, name=psi.name).compose(kappa)

    def push(self, M, level: int = 1):
        """Restrict a matrix of elements."""
        return mx.apply(self._res[level], M)

    def push_forms(self, A: FormMatrix) -> FormMatrix:
        return A.pullback(self._res[A.ring.level])

    def to_json(self) -> dict:
        out = {"images": {n: x.to_json() for n, x in zip(self.parent.names, self._res[2].images)}}
        out["coords"] = {
            "inverted": [
                {"num": [{"c": c, "e": list(k)} for k, c in g], "den": []}
                for g in self.local.inverted[len(self.parent.inverted):]
            ],
            "images": self._kappa[2].to_json(),
        }
        return out


def transport_hom(src: Link, tgt: Link, phi: RingHom) -> RingHom:
    """Extend ``phi: src.parent -> tgt.parent`` to ``src.child -> tgt.child``."""
    return src.extend(tgt.res(phi.source.level).compose(phi))


def restrict_derivation(delta: TwistedDerivation, src: Link, tgt: Link) -> TwistedDerivation:
    """Restrict a derivation on ``src.parent`` forms (values in ``tgt.parent``)
    to one on ``src.child`` forms with values in ``tgt.child``.

    The value on a child basis form ``w`` is computed by writing ``w`` in the
    parent's coordinates and applying the derivation there.
    """
    level = delta.source.level
    kappa = src.coords(level)
    res_t = tgt.res(level)
    psi = res_t.compose(delta.base)
    psi_l = RingHom(kappa.target, psi.target, psi.images)
    base = psi_l.compose(kappa)
    pushed = [res_t(v) for v in delta.values]
    values = []
    for z in range(kappa.source.nvars):
        w = pulled_basis(kappa, z)
        acc = psi.target.zero
        for c, v in zip(w.coeffs, pushed):
            if c.num and v.num:
                acc = acc + psi_l(c) * v
        values.append(acc)
    return TwistedDerivation(base, values)


class Covering:
    """Charts, pairwise overlaps and (for three or more charts) triple overlaps."""

    def __init__(self, p: int, charts: Sequence[RingDescriptor], overlaps: Mapping, triples: Mapping | None = None):
        self.p = p
        self.charts = tuple(charts)
        n = len(self.charts)
        self.overlaps: dict = {}
        for (i, j), ov in overlaps.items():
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ShapeMismatch(f"bad overlap pair {(i, j)}")
            key = (min(i, j), max(i, j))
            self.overlaps[key] = ov
        for key in combinations(range(n), 2):
            if key not in self.overlaps:
                raise ShapeMismatch(f"missing overlap {key}")
        self.triples = dict(triples or {})
        for key in combinations(range(n), 3):
            if key not in self.triples:
                raise ShapeMismatch(f"missing triple overlap {key}")
        self._check_triples()

    # overlap entries: {"ring": desc, "links": {s: Link}}
    # triple entries: {"ring": desc, "links": {(a, b): Link}}

    @classmethod
    def single(cls, desc: RingDescriptor, p: int) -> "Covering":
        return cls(p, [desc], {})

    @classmethod
    def build(cls, p: int, charts: Sequence, overlaps: Sequence, triples: Sequence = ()) -> "Covering":
        """Build from plain data.

        ``overlaps`` entries: ``(i, j, ring, restrict_i, restrict_j)`` with an
        optional trailing dict ``{i: coords_i, j: coords_j}``; ``triples``
        entries ``(i, j, k, ring, {(a, b): restrict})``.
        """
        charts = [c if isinstance(c, RingDescriptor) else RingDescriptor.make(*c) for c in charts]
        ovs = {}
        for entry in overlaps:
            i, j, ring, ri, rj = entry[:5]
            coords = entry[5] if len(entry) > 5 else {}
            desc = ring if isinstance(ring, RingDescriptor) else RingDescriptor.make(*ring)
            ovs[(i, j)] = {
                "ring": desc,
                "links": {
                    i: Link(charts[i], desc, p, ri, coords.get(i), where=f"overlap {i},{j} from chart {i}"),
                    j: Link(charts[j], desc, p, rj, coords.get(j), where=f"overlap {i},{j} from chart {j}"),
                },
            }
        trs = {}
        for i, j, k, ring, rs in triples:
            desc = ring if isinstance(ring, RingDescriptor) else RingDescriptor.make(*ring)
            links = {}
            for a, b in ((i, j), (i, k), (j, k)):
                coords = None
                r = rs[(a, b)]
                if isinstance(r, Mapping) and "images" in r:
                    r, coords = r["images"], r.get("coords")
                links[(a, b)] = Link(ovs[(a, b)]["ring"], desc, p, r, coords, where=f"triple {i},{j},{k}")
            trs[(i, j, k)] = {"ring": desc, "links": links}
        return cls(p, charts, ovs, trs)

    def _check_triples(self) -> None:
        for (i, j, k), tr in self.triples.items():
            for s, (a, b), (c, d) in ((i, (i, j), (i, k)), (j, (i, j), (j, k)), (k, (i, k), (j, k))):
                lhs = tr["links"][(a, b)].res(2).compose(self.link(a, b, s).res(2))
                rhs = tr["links"][(c, d)].res(2).compose(self.link(c, d, s).res(2))
                if lhs != rhs:
                    raise ShapeMismatch(f"restrictions of chart {s} disagree", location=(i, j, k))

    @property
    def n(self) -> int:
        return len(self.charts)

    def chart(self, s: int, level: int = 1) -> Ring:
        return Ring(self.charts[s], self.p, level)

    def pairs(self) -> list:
        return sorted(self.overlaps)

    def triple_keys(self) -> list:
        return sorted(self.triples)

    def overlap(self, i: int, j: int, level: int = 1) -> Ring:
        return Ring(self.overlaps[(min(i, j), max(i, j))]["ring"], self.p, level)

    def link(self, i: int, j: int, s: int) -> Link:
        return self.overlaps[(min(i, j), max(i, j))]["links"][s]

    def triple(self, key, level: int = 1) -> Ring:
        return Ring(self.triples[tuple(sorted(key))]["ring"], self.p, level)

    def tlink(self, key, pair) -> Link:
        return self.triples[tuple(sorted(key))]["links"][tuple(sorted(pair))]

    def to_json(self) -> dict:
        ovs = []
        for (i, j), ov in sorted(self.overlaps.items()):
            li, lj = ov["links"][i].to_json(), ov["links"][j].to_json()
            ovs.append(
                {
                    "pair": [i, j],
                    "ring": ov["ring"].to_json(),
                    "restrict_i": li["images"],
                    "restrict_j": lj["images"],
                    "coords_i": li["coords"],
                    "coords_j": lj["coords"],
                }
            )
        out = {"charts": [c.to_json() for c in self.charts], "overlaps": ovs}
        if self.triples:
            out["triples"] = [
                {
                    "triple": list(key),
                    "ring": tr["ring"].to_json(),
                    "restrict": {f"{a},{b}": l.to_json() for (a, b), l in sorted(tr["links"].items())},
                }
                for key, tr in sorted(self.triples.items())
            ]
        return out

    @classmethod
    def from_json(cls, obj: Mapping, p: int) -> "Covering":
        charts = [RingDescriptor.from_json(c) for c in obj["charts"]]
        overlaps = []
        for ov in obj.get("overlaps", []):
            i, j = ov["pair"]
            coords = {}
            if "coords_i" in ov:
                coords[i] = ov["coords_i"]
            if "coords_j" in ov:
                coords[j] = ov["coords_j"]
            overlaps.append((i, j, RingDescriptor.from_json(ov["ring"]), ov["restrict_i"], ov["restrict_j"], coords))
        triples = []
        for tr in obj.get("triples", []):
            i, j, k = sorted(tr["triple"])
            rs = {}
            for key, val in tr["restrict"].items():
                a, b = sorted(int(t) for t in key.split(","))
                rs[(a, b)] = val
            triples.append((i, j, k, RingDescriptor.from_json(tr["ring"]), rs))
        return cls.build(p, charts, overlaps, triples)


def overlap_hom(X: Covering, Y: Covering, i: int, j: int, s: int, phi: RingHom) -> RingHom:
    """Extend a chart-``s`` hom ``X_s -> Y_s`` to the overlap ``X_ij -> Y_ij``."""
    return transport_hom(X.link(i, j, s), Y.link(i, j, s), phi)


def triple_hom(X: Covering, Y: Covering, key, pair, phi: RingHom) -> RingHom:
    return transport_hom(X.tlink(key, pair), Y.tlink(key, pair), phi)


# --------------------------------------------------------------------------
# cochains


class DerivationCochain:
    """Entries ``(i, j) -> derivation`` on ``src`` overlap forms valued in ``tgt``.

    Only ``i < j`` is stored; ``get(j, i)`` returns the negative.
    """

    def __init__(self, src: Covering, tgt: Covering, entries: Mapping, name: str = ""):
        self.src = src
        self.tgt = tgt
        self.name = name
        self.entries = {}
        for (i, j), d in entries.items():
            if i < j:
                self.entries[(i, j)] = d
            else:
                self.entries[(j, i)] = -d
        for (i, j), d in self.entries.items():
            if d.source is not src.overlap(i, j, d.source.level) or d.target is not tgt.overlap(i, j, d.target.level):
                raise ShapeMismatch("cochain entry lives on the wrong overlap", location=(i, j))

    def get(self, i: int, j: int) -> TwistedDerivation:
        if i < j:
            return self.entries[(i, j)]
        return -self.entries[(j, i)]

    def __add__(self, other: "DerivationCochain") -> "DerivationCochain":
        return DerivationCochain(self.src, self.tgt, {k: v + other.entries[k] for k, v in self.entries.items()})

    def __sub__(self, other: "DerivationCochain") -> "DerivationCochain":
        return DerivationCochain(self.src, self.tgt, {k: v - other.entries[k] for k, v in self.entries.items()})

    def __neg__(self) -> "DerivationCochain":
        return DerivationCochain(self.src, self.tgt, {k: -v for k, v in self.entries.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DerivationCochain)
            and set(self.entries) == set(other.entries)
            and all(v == other.entries[k] for k, v in self.entries.items())
        )

    __hash__ = None

    def first_difference(self, other: "DerivationCochain"):
        for k in sorted(self.entries):
            if self.entries[k] != other.entries[k]:
                return k
        return None

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.entries.values())

    def to_json(self) -> dict:
        return {f"{i},{j}": d.to_json() for (i, j), d in sorted(self.entries.items())}


def zero_cochain(src: Covering, tgt: Covering, bases: Mapping) -> DerivationCochain:
    return DerivationCochain(src, tgt, {k: TwistedDerivation.zero(b) for k, b in bases.items()})


def coboundary(src: Covering, tgt: Covering, sections: Sequence[TwistedDerivation]) -> DerivationCochain:
    """``(delta s)_ij = s_j - s_i`` restricted to each overlap."""
    entries = {}
    for i, j in src.pairs():
        si = restrict_derivation(sections[i], src.link(i, j, i), tgt.link(i, j, i))
        sj = restrict_derivation(sections[j], src.link(i, j, j), tgt.link(i, j, j))
        entries[(i, j)] = sj - si
    return DerivationCochain(src, tgt, entries)


def cocycle_failure(c: DerivationCochain):
    """First triple where ``c_ik = c_ij + c_jk`` fails, or None."""
    for key in c.src.triple_keys():
        i, j, k = key
        r = {
            pair: restrict_derivation(c.get(*pair), c.src.tlink(key, pair), c.tgt.tlink(key, pair))
            for pair in ((i, j), (j, k), (i, k))
        }
        if r[(i, k)] != r[(i, j)] + r[(j, k)]:
            return key
    return None


def check_cocycle(c: DerivationCochain) -> bool:
    return cocycle_failure(c) is None


def require_cocycle(c: DerivationCochain) -> None:
    bad = cocycle_failure(c)
    if bad is not None:
        raise CocycleFailure(f"cochain {c.name or ''} fails the additive cocycle identity".replace("  ", " "), location=bad)


def push_derivation(delta: TwistedDerivation, along: str, h: RingHom | None = None) -> TwistedDerivation:
    """Transport one derivation.

    ``pullback-by-f``: apply ``h`` to the values (``h`` leaves the target).
    ``precompose-F_Y``: apply the absolute Frobenius of the target to the values.
    ``tangent-map-f``: pull forms back along ``h`` first (``h`` enters the source).
    """
    if along == "precompose-F_Y":
        h = delta.target.frobenius()
        along = "pullback-by-f"
    if h is None:
        raise ShapeMismatch(f"{along} needs a map")
    if along == "pullback-by-f":
        if h.source is not delta.target:
            raise ShapeMismatch("map does not start at the derivation's target")
        return TwistedDerivation(h.compose(delta.base), [h(v) for v in delta.values])
    if along == "tangent-map-f":
        if h.target is not delta.source:
            raise ShapeMismatch("map does not end at the derivation's source")
        values = [delta(pulled_basis(h, i)) for i in range(h.source.nvars)]
        return TwistedDerivation(delta.base.compose(h), values)
    raise ShapeMismatch(f"unknown transport {along!r}")


def pushforward_cochain(
    c: DerivationCochain,
    along: str,
    maps: Callable | None = None,
    src: Covering | None = None,
    tgt: Covering | None = None,
) -> DerivationCochain:
    """Entrywise :func:`push_derivation`; ``maps(i, j)`` gives the overlap map."""
    src = src or c.src
    tgt = tgt or c.tgt
    entries = {}
    for (i, j), d in c.entries.items():
        h = maps(i, j) if maps is not None else None
        entries[(i, j)] = push_derivation(d, along, h)
    return DerivationCochain(src, tgt, entries)


# --------------------------------------------------------------------------
# lifts


class LiftData:
    """Level-2 chart lifts ``X_s -> Y_s`` and the covering data around them.

    For Frobenius lifts ``Y`` is ``X``; for morphism lifts ``reduction`` holds
    the level-1 morphism each lift must reduce to.
    """

    def __init__(self, X: Covering, Y: Covering, lifts: Sequence[RingHom], reduction: Sequence[RingHom] | None = None, kind: str = ""):
        if len(lifts) != X.n or X.n != Y.n:
            raise ShapeMismatch("need one lift per chart")
        self.X, self.Y, self.kind = X, Y, kind
        for s, h in enumerate(lifts):
            if h.source is not X.chart(s, 2) or h.target is not Y.chart(s, 2):
                raise ShapeMismatch("lift has the wrong source or target", location=f"chart {s}")
            if reduction is not None and h.reduce_mod_p() != reduction[s]:
                raise NotLiftPair(f"{kind or 'lift'} does not reduce to the given map", location=f"chart {s}")
        self.lifts = tuple(lifts)
        self.reduction = tuple(reduction) if reduction is not None else tuple(h.reduce_mod_p() for h in lifts)

    def on_overlap(self, i: int, j: int, s: int) -> RingHom:
        return overlap_hom(self.X, self.Y, i, j, s, self.lifts[s])

    def reduced_on_overlap(self, i: int, j: int) -> RingHom:
        return overlap_hom(self.X, self.Y, i, j, i, self.reduction[i])


def obstruction_class(L: LiftData) -> DerivationCochain:
    """``ob_ij = (lift_i - lift_j) / p`` on each overlap."""
    entries = {}
    for i, j in L.X.pairs():
        try:
            entries[(i, j)] = hom_difference_derivation(L.on_overlap(i, j, i), L.on_overlap(i, j, j))
        except NotLiftPair as e:
            raise NotLiftPair(str(e), location=(i, j)) from None
    return DerivationCochain(L.X, L.Y, entries, name=f"ob({L.kind})" if L.kind else "ob")


# --------------------------------------------------------------------------
# glued bundles


def _transitions(cov: Covering, transitions: Mapping, level: int = 1) -> dict:
    out = {}
    for (i, j), T in transitions.items():
        R = cov.overlap(i, j, level)
        T = mx.from_rows(R, T) if not isinstance(T[0][0], RingElem) else T
        if mx.ring_of(T) is not R:
            raise ShapeMismatch("transition lives on the wrong ring", location=(i, j))
        out[(min(i, j), max(i, j))] = T if i < j else mx.inverse(T)
    for key in cov.pairs():
        if key not in out:
            raise ShapeMismatch("missing transition", location=key)
    return out


class _Glued:
    cov: Covering
    rank: int
    T: dict

    def transition(self, i: int, j: int):
        if i < j:
            return self.T[(i, j)]
        key = (j, i)
        inv = self._inv.get(key)
        if inv is None:
            try:
                inv = self._inv[key] = mx.inverse(self.T[key])
            except NotAUnit:
                raise CocycleFailure("transition is not invertible", location=key) from None
        return inv

    def cocycle_failure(self):
        for key in self.cov.pairs():
            if not mx.is_invertible(self.T[key]):
                return key
        for key in self.cov.triple_keys():
            i, j, k = key
            r = {pair: self.cov.tlink(key, pair).push(self.T[pair]) for pair in ((i, j), (j, k), (i, k))}
            if not mx.equal(r[(i, k)], mx.mul(r[(j, k)], r[(i, j)])):
                return key
        return None


class GluedHiggsBundle(_Glued):
    def __init__(self, cov: Covering, locals: Sequence[HiggsLocal], transitions: Mapping):
        if len(locals) != cov.n:
            raise ShapeMismatch("need one local Higgs module per chart")
        ranks = {E.rank for E in locals}
        if len(ranks) != 1:
            raise ShapeMismatch("local ranks differ")
        for s, E in enumerate(locals):
            if E.ring is not cov.chart(s):
                raise ShapeMismatch("local Higgs module on the wrong ring", location=f"chart {s}")
        self.cov = cov
        self.locals = tuple(locals)
        self.rank = ranks.pop()
        self.T = _transitions(cov, transitions)
        self._inv: dict = {}

    def theta_on(self, i: int, j: int, s: int) -> FormMatrix:
        return self.cov.link(i, j, s).push_forms(self.locals[s].theta)

    def higgs_failure(self):
        for i, j in self.cov.pairs():
            T = self.T[(i, j)]
            lhs = self.theta_on(i, j, i).lmul(T)
            rhs = self.theta_on(i, j, j).rmul(T)
            if lhs != rhs:
                return (i, j)
        return None

    def exponent(self) -> int:
        return max(E.exponent() for E in self.locals)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "locals": [E.theta.to_json() for E in self.locals],
            "transitions": {f"{i},{j}": mx.to_json(T) for (i, j), T in sorted(self.T.items())},
        }


def glue_higgs(cov: Covering, locals: Sequence[HiggsLocal], transitions: Mapping) -> GluedHiggsBundle:
    B = GluedHiggsBundle(cov, locals, transitions)
    bad = B.cocycle_failure()
    if bad is not None:
        raise CocycleFailure("transitions fail the cocycle identity", location=bad)
    bad = B.higgs_failure()
    if bad is not None:
        raise HiggsMismatch("transition does not intertwine the Higgs fields", location=bad)
    return B


class GluedConnectionBundle(_Glued):
    def __init__(self, cov: Covering, locals: Sequence[FormMatrix], transitions: Mapping):
        if len(locals) != cov.n:
            raise ShapeMismatch("need one connection matrix per chart")
        ranks = {A.n for A in locals}
        if len(ranks) != 1:
            raise ShapeMismatch("local ranks differ")
        self.cov = cov
        self.locals = tuple(locals)
        self.rank = ranks.pop()
        self.T = _transitions(cov, transitions)
        self._inv: dict = {}

    def curvature(self, s: int) -> dict:
        return self.locals[s].curvature()

    def flat(self) -> bool:
        return all(mx.is_zero(K) for s in range(self.cov.n) for K in self.curvature(s).values())

    def gauge_failure(self):
        for i, j in self.cov.pairs():
            T = self.T[(i, j)]
            Ai = self.cov.link(i, j, i).push_forms(self.locals[i])
            Aj = self.cov.link(i, j, j).push_forms(self.locals[j])
            if FormMatrix.d(T) + Aj.rmul(T) != Ai.lmul(T):
                return (i, j)
        return None

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "locals": [A.to_json() for A in self.locals],
            "transitions": {f"{i},{j}": mx.to_json(T) for (i, j), T in sorted(self.T.items())},
        }


def glue_connection(cov: Covering, locals: Sequence[FormMatrix], transitions: Mapping) -> GluedConnectionBundle:
    B = GluedConnectionBundle(cov, locals, transitions)
    bad = B.cocycle_failure()
    if bad is not None:
        raise CocycleFailure("transitions fail the cocycle identity", location=bad)
    bad = B.gauge_failure()
    if bad is not None:
        raise HiggsMismatch("transition is not gauge compatible", location=bad)
    return B


class IsoResult:
    """Outcome of :func:`bundle_iso_check`; truthy iff the witness works."""

    def __init__(self, ok: bool, location=None, reason: str = ""):
        self.ok = ok
        self.location = location
        self.reason = reason

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        out = {"result": self.ok}
        if not self.ok:
            out["location"] = list(self.location) if isinstance(self.location, tuple) else self.location
            out["reason"] = self.reason
        return out

    def __repr__(self) -> str:
        return "IsoResult(ok)" if self.ok else f"IsoResult(failed at {self.location}: {self.reason})"


def bundle_iso_check(A, B, witness: Sequence) -> IsoResult:
    """Check that chartwise ``W_s: A_s -> B_s`` is an isomorphism of glued bundles."""
    if type(A) is not type(B) or A.cov is not B.cov or A.rank != B.rank:
        return IsoResult(False, None, "bundles are not comparable")
    cov = A.cov
    if len(witness) != cov.n:
        return IsoResult(False, None, "need one witness matrix per chart")
    for s, W in enumerate(witness):
        if mx.ring_of(W) is not cov.chart(s) or len(W) != A.rank:
            return IsoResult(False, f"chart {s}", "witness has the wrong shape")
        if not mx.is_invertible(W):
            return IsoResult(False, f"chart {s}", "witness is not invertible")
        if isinstance(A, GluedHiggsBundle):
            if A.locals[s].theta.lmul(W) != B.locals[s].theta.rmul(W):
                return IsoResult(False, f"chart {s}", "witness does not intertwine the Higgs fields")
        else:
            if FormMatrix.d(W) + B.locals[s].rmul(W) != A.locals[s].lmul(W):
                return IsoResult(False, f"chart {s}", "witness does not intertwine the connections")
    for i, j in cov.pairs():
        Wi = cov.link(i, j, i).push(witness[i])
        Wj = cov.link(i, j, j).push(witness[j])
        if not mx.equal(mx.mul(Wj, A.T[(i, j)]), mx.mul(B.T[(i, j)], Wi)):
            return IsoResult(False, (i, j), "witness does not commute with the transitions")
    return IsoResult(True)
