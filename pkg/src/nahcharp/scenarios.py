"""Scenario input: JSON parsing, validation and the built-in registry.

A scenario is plain JSON::

    {"name": ..., "prime": p, "X": covering, "Y": covering (default: X),
     "f": [chart map images], "lifts": {"FX": [...], "FY": [...], "f": [...]},
     "higgs": {"rank": n, "locals": [{var: matrix}], "transitions": {"i,j": matrix}},
     "higgs2": optional second bundle, "twist": optional {"i,j": [values]},
     "r": [exponents for the twisted pullback checks],
     "checks": [...], "citations": [...]}

Matrices are lists of rows of expression strings.  The registry builders below
emit exactly this format, so registry examples and files share one parser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import matrix as mx
from .cartier import LiftSystem
from .cech import Covering, DerivationCochain, GluedHiggsBundle, glue_higgs, overlap_hom
from .errors import AlgebraError, ScenarioError
from .forms import FormMatrix, TwistedDerivation
from .higgs import HiggsLocal
from .ring import RingHom

CHECKS = (
    "chart-intertwining",
    "nu-cochain",
    "descent",
    "functoriality",
    "flatness",
    "tp-compare",
    "coboundary",
    "tensor",
    "sym-power",
    "sym-filtration",
)

STATEMENTS = {
    "ar-modules": "nilpotent Higgs modules of exponent <= r are the same as A_r-modules",
    "exp-twisting": "the A_r-action and exponential-twisting constructions of the twisted pullback agree",
    "class-only": "the twisted pullback depends only on the cohomology class of the twisting cocycle",
    "tp-functorial": "the twisted pullback preserves rank, direct sums and tensor products",
    "sym-extension": "Sym^r of the extension bundle matches f^*A_r for r <= 1; with the displayed r >= 2 action no bounded-degree isomorphism exists",
    "sym-filtration": "the graded pieces of the Sym^r filtration of the extension bundle",
    "chart-intertwining": "exp(nu . theta) intertwines the two local inverse Cartier connections",
    "nu-cochain": "nu_i - nu_j = ob(F_Y) + ob(f) - ob(F_X) on overlaps",
    "descent": "the chartwise isomorphisms exp(nu_i . theta) glue",
    "functoriality": "inverse Cartier of the twisted pullback is the pullback of inverse Cartier",
    "liftable": "when f lifts globally the twisted pullback is the ordinary pullback",
    "flatness": "inverse Cartier outputs are flat connections",
}


@dataclass
class Scenario:
    name: str
    prime: int
    X: Covering
    Y: Covering
    lifts: LiftSystem
    E: GluedHiggsBundle
    E2: GluedHiggsBundle | None
    twist: DerivationCochain
    rs: tuple
    checks: tuple
    citations: tuple
    description: str = ""
    data: dict = field(default_factory=dict, repr=False)

    @property
    def ctx(self):
        """Pullback context twisted by ``twist`` (``ob(f)`` unless the file overrides it)."""
        if self.twist is self.lifts.ob_f:
            return self.lifts.ctx
        return self.lifts.ctx.with_tau(self.twist)


# --------------------------------------------------------------------------
# parsing


def _need(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise ScenarioError(f"missing key {key!r}", location=where)
    return obj[key]


def _located(where: str, fn: Callable, *args):
    """Run ``fn`` and attach ``where`` to malformed-input errors."""
    try:
        return fn(*args)
    except AlgebraError as e:
        if e.location is None:
            e.location = where
        raise
    except (ValueError, SyntaxError, TypeError, KeyError, IndexError) as e:
        raise ScenarioError(f"cannot parse: {e}", location=where) from None


def _pairs(obj: Mapping, where: str) -> dict:
    out = {}
    for key, val in obj.items():
        try:
            i, j = (int(t) for t in key.split(","))
        except ValueError:
            raise ScenarioError(f"overlap key {key!r} is not 'i,j'", location=where) from None
        out[(i, j)] = val
    return out


def _homs(items, src: Callable, tgt: Callable, n: int, where: str) -> list:
    if not isinstance(items, list) or len(items) != n:
        raise ScenarioError(f"need {n} chart maps", location=where)
    return [_located(f"{where}[{s}]", RingHom, src(s), tgt(s), items[s]) for s in range(n)]


def _bundle(obj: Mapping, cov: Covering, where: str) -> GluedHiggsBundle:
    rank = _need(obj, "rank", where)
    locs = _need(obj, "locals", where)
    if not isinstance(locs, list) or len(locs) != cov.n:
        raise ScenarioError(f"need {cov.n} local Higgs fields", location=f"{where}.locals")
    locals_ = []
    for s, comps in enumerate(locs):
        R = cov.chart(s)
        w = f"{where}.locals[{s}]"
        mats = []
        for name in R.names:
            m = comps.get(name) if isinstance(comps, Mapping) else None
            mats.append(mx.zeros(R, rank) if m is None else _located(f"{w}.{name}", mx.from_rows, R, m))
        if any(len(m) != rank or any(len(row) != rank for row in m) for m in mats):
            raise ScenarioError(f"Higgs components must be {rank}x{rank}", location=w)
        locals_.append(_located(w, HiggsLocal, R, FormMatrix(R, mats)))
    trans = _pairs(obj.get("transitions", {}), f"{where}.transitions")
    T = {}
    for i, j in cov.pairs():
        m = trans.get((i, j))
        R = cov.overlap(i, j)
        T[(i, j)] = mx.identity(R, rank) if m is None else _located(f"{where}.transitions[{i},{j}]", mx.from_rows, R, m)
    return glue_higgs(cov, locals_, T)


def _twist(obj: Mapping, L: LiftSystem, where: str) -> DerivationCochain:
    entries = {}
    given = _pairs(obj, where)
    for i, j in L.X.pairs():
        base = overlap_hom(L.X, L.Y, i, j, i, L.f[i])
        vals = given.get((i, j))
        if vals is None:
            entries[(i, j)] = TwistedDerivation.zero(base)
        else:
            T = base.target
            entries[(i, j)] = _located(f"{where}[{i},{j}]", TwistedDerivation, base, [T(v) for v in vals])
    return DerivationCochain(L.X, L.Y, entries, name="twist")


def parse_scenario(obj: Mapping, prime: int | None = None, name: str | None = None) -> Scenario:
    """Validate and build a scenario; raises :class:`AlgebraError` with a location."""
    if not isinstance(obj, Mapping):
        raise ScenarioError("scenario must be a JSON object", location="$")
    p = int(prime if prime is not None else _need(obj, "prime", "$"))
    if p < 3:
        raise ScenarioError(f"prime must be odd, got {p}", location="$.prime")
    X = _located("$.X", Covering.from_json, _need(obj, "X", "$"), p)
    Y = _located("$.Y", Covering.from_json, obj["Y"], p) if "Y" in obj else X
    if X.n != Y.n:
        raise ScenarioError("X and Y need the same number of charts", location="$.Y")
    n = X.n
    f = _homs(_need(obj, "f", "$"), X.chart, Y.chart, n, "$.f")
    lifts = _need(obj, "lifts", "$")
    FX = _homs(_need(lifts, "FX", "$.lifts"), lambda s: X.chart(s, 2), lambda s: X.chart(s, 2), n, "$.lifts.FX")
    FY = _homs(_need(lifts, "FY", "$.lifts"), lambda s: Y.chart(s, 2), lambda s: Y.chart(s, 2), n, "$.lifts.FY")
    ft = _homs(_need(lifts, "f", "$.lifts"), lambda s: X.chart(s, 2), lambda s: Y.chart(s, 2), n, "$.lifts.f")
    L = _located("$.lifts", LiftSystem, X, Y, f, FX, FY, ft)
    _located("$.lifts", lambda: L.ob_f)
    E = _bundle(_need(obj, "higgs", "$"), X, "$.higgs")
    E2 = _bundle(obj["higgs2"], X, "$.higgs2") if "higgs2" in obj else None
    twist = L.ob_f
    if "twist" in obj:
        twist = _twist(obj["twist"], L, "$.twist")
        _located("$.twist", L.ctx.with_tau, twist)
    checks = tuple(obj.get("checks", ()))
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise ScenarioError(f"unknown checks {bad}; known: {list(CHECKS)}", location="$.checks")
    rs = tuple(int(r) for r in obj.get("r", (1,)))
    for r in rs:
        if r > p - 1:
            raise ScenarioError(f"r = {r} needs r! invertible modulo {p}", location="$.r")
    cites = tuple(obj.get("citations", ()))
    return Scenario(
        name=name or obj.get("name", "scenario"),
        prime=p,
        X=X,
        Y=Y,
        lifts=L,
        E=E,
        E2=E2,
        twist=twist,
        rs=rs,
        checks=checks,
        citations=cites,
        description=obj.get("description", ""),
        data=dict(obj),
    )


def load_scenario(path: str, prime: int | None = None) -> Scenario:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON: {e.msg}", location=f"line {e.lineno} column {e.colno}") from None
    except OSError as e:
        raise ScenarioError(f"cannot read scenario: {e.strerror}", location=path) from None
    return parse_scenario(obj, prime)


# --------------------------------------------------------------------------
# registry

# JSON snippets for the coverings
AFFINE_2 = {
    "charts": [
        {"vars": [{"name": "x"}], "inverted": ["x"]},
        {"vars": [{"name": "x"}], "inverted": ["x-1"]},
    ],
    "overlaps": [
        {"pair": [0, 1], "ring": {"vars": [{"name": "x"}], "inverted": ["x", "x-1"]}, "restrict_i": {"x": "x"}, "restrict_j": {"x": "x"}},
    ],
}

AFFINE_3 = {
    "charts": [{"vars": [{"name": "x"}], "inverted": [g]} for g in ("x", "x-1", "x-2")],
    "overlaps": [
        {"pair": [i, j], "ring": {"vars": [{"name": "x"}], "inverted": [g, h]}, "restrict_i": {"x": "x"}, "restrict_j": {"x": "x"}}
        for (i, g), (j, h) in (((0, "x"), (1, "x-1")), ((0, "x"), (2, "x-2")), ((1, "x-1"), (2, "x-2")))
    ],
    "triples": [
        {
            "triple": [0, 1, 2],
            "ring": {"vars": [{"name": "x"}], "inverted": ["x", "x-1", "x-2"]},
            "restrict": {"0,1": {"x": "x"}, "0,2": {"x": "x"}, "1,2": {"x": "x"}},
        }
    ],
}

PLANE_2 = {
    "charts": [
        {"vars": [{"name": "x"}, {"name": "y"}], "inverted": ["x"]},
        {"vars": [{"name": "x"}, {"name": "y"}], "inverted": ["x-1"]},
    ],
    "overlaps": [
        {
            "pair": [0, 1],
            "ring": {"vars": [{"name": "x"}, {"name": "y"}], "inverted": ["x", "x-1"]},
            "restrict_i": {"x": "x", "y": "y"},
            "restrict_j": {"x": "x", "y": "y"},
        }
    ],
}

# P^1 with log poles at 0 and infinity; y = 1/x on the overlap
P1 = {
    "charts": [
        {"vars": [{"name": "x", "log": True}], "inverted": []},
        {"vars": [{"name": "y", "log": True}], "inverted": []},
    ],
    "overlaps": [
        {
            "pair": [0, 1],
            "ring": {"vars": [{"name": "x", "log": True}], "inverted": ["x"]},
            "restrict_i": {"x": "x"},
            "restrict_j": {"y": "1/x"},
            "coords_j": {"inverted": ["y"], "images": {"x": "1/y"}},
        }
    ],
}


def _jordan(var: str, c="1") -> dict:
    return {var: [["0", c], ["0", "0"]]}


def affine_2chart(p: int) -> dict:
    return {
        "name": "affine-2chart",
        "description": "A^1 covered by x != 0 and x != 1; f = id with chartwise lifts that disagree",
        "prime": p,
        "X": AFFINE_2,
        "f": [["x"], ["x"]],
        "lifts": {
            "FX": [[f"x^{p}"], [f"x^{p} + {p}*x"]],
            "FY": [[f"x^{p} + {p}"], [f"x^{p}"]],
            "f": [[f"x + {p}*x^2"], ["x"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("x")]},
        "r": [1, 2],
        "checks": ["tp-compare", "coboundary", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["exp-twisting", "class-only", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
    }


def affine_3chart(p: int) -> dict:
    return {
        "name": "affine-3chart",
        "description": "A^1 covered by x != 0, 1, 2; exercises triple overlaps",
        "prime": p,
        "X": AFFINE_3,
        "f": [["x"], ["x"], ["x"]],
        "lifts": {
            "FX": [[f"x^{p} + {p}*x^{s}"] for s in range(3)],
            "FY": [[f"x^{p}"], [f"x^{p} + {p}*x"], [f"x^{p}"]],
            "f": [["x"], [f"x + {p}"], [f"x + {p}*x^2"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x")] * 3},
        "r": [1],
        "checks": ["tp-compare", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["exp-twisting", "chart-intertwining", "nu-cochain", "descent", "functoriality"],
    }


def plane_2chart(p: int) -> dict:
    return {
        "name": "plane-2chart",
        "description": "A^2 covered by x != 0 and x != 1; f(x, y) = (x, y^2); a surface, so curvature is a real check",
        "prime": p,
        "X": PLANE_2,
        "f": [["x", "y^2"], ["x", "y^2"]],
        "lifts": {
            "FX": [[f"x^{p}", f"y^{p} + {p}*x*y"], [f"x^{p}", f"y^{p}"]],
            "FY": [[f"x^{p}", f"y^{p}"], [f"x^{p} + {p}*y", f"y^{p}"]],
            "f": [["x", "y^2"], ["x", f"y^2 + {p}*x"]],
        },
        "higgs": {"rank": 2, "locals": [{"x": [["0", "1"], ["0", "0"]], "y": [["0", "y"], ["0", "0"]]}] * 2},
        "r": [1],
        "checks": ["tp-compare", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["exp-twisting", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
    }


def p1_log_rank2(p: int) -> dict:
    return {
        "name": "p1-log-rank2",
        "description": "P^1 with log poles at 0 and infinity, O + O with theta = [[0, dlog x], [0, 0]], f = squaring",
        "prime": p,
        "X": P1,
        "f": [["x^2"], ["y^2"]],
        "lifts": {
            "FX": [[f"x^{p}*(1 + {p}*x)"], [f"y^{p}"]],
            "FY": [[f"x^{p}"], [f"y^{p}*(1 + {p}*y^2)"]],
            "f": [["x^2"], [f"y^2*(1 + {p}*y)"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("y", "-1")]},
        "r": [1, 2],
        "checks": ["tp-compare", "coboundary", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["exp-twisting", "class-only", "chart-intertwining", "nu-cochain", "descent", "functoriality"],
    }


def p1_frobenius_pullback(p: int) -> dict:
    return {
        "name": "p1-frobenius-pullback",
        "description": "P^1 log, f(x) = x^p: the plain pullback of theta vanishes but the twisted gluing does not",
        "prime": p,
        "X": P1,
        "f": [[f"x^{p}"], [f"y^{p}"]],
        "lifts": {
            "FX": [[f"x^{p}"], [f"y^{p}*(1 + {p}*y)"]],
            "FY": [[f"x^{p}*(1 + {p}*x)"], [f"y^{p}"]],
            "f": [[f"x^{p}*(1 + {p}*x^2)"], [f"y^{p}"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("y", "-1")]},
        "r": [1],
        "checks": ["tp-compare", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["exp-twisting", "chart-intertwining", "nu-cochain", "descent", "functoriality"],
    }


def p1_liftable(p: int) -> dict:
    return {
        "name": "p1-liftable",
        "description": "P^1 log, f = squaring with a global lift and standard Frobenius lifts: every obstruction and nu vanish",
        "prime": p,
        "X": P1,
        "f": [["x^2"], ["y^2"]],
        "lifts": {
            "FX": [[f"x^{p}"], [f"y^{p}"]],
            "FY": [[f"x^{p}"], [f"y^{p}"]],
            "f": [["x^2"], ["y^2"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("y", "-1")]},
        "r": [1],
        "checks": ["tp-compare", "chart-intertwining", "nu-cochain", "descent", "functoriality", "flatness"],
        "citations": ["liftable", "functoriality"],
    }


def sym_power_curve(p: int) -> dict:
    return {
        "name": "sym-power-curve",
        "description": "A^1 with two charts and ob(f)(dx) = 1/x: Sym^r of the extension bundle against f^*A_r",
        "prime": p,
        "X": AFFINE_2,
        "f": [["x"], ["x"]],
        "lifts": {
            "FX": [[f"x^{p}"], [f"x^{p}"]],
            "FY": [[f"x^{p}"], [f"x^{p}"]],
            "f": [[f"x + {p}/x"], ["x"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("x")]},
        "r": [1, 2],
        "checks": ["sym-power", "sym-filtration", "tp-compare", "chart-intertwining", "functoriality"],
        "citations": ["sym-extension", "sym-filtration", "ar-modules", "exp-twisting"],
    }


def tensor_pair(p: int) -> dict:
    return {
        "name": "tensor-pair",
        "description": "P^1 log with two exponent-1 rank-2 bundles; tensor and direct sum compatibility",
        "prime": p,
        "X": P1,
        "f": [["x^2"], ["y^2"]],
        "lifts": {
            "FX": [[f"x^{p}"], [f"y^{p}"]],
            "FY": [[f"x^{p}"], [f"y^{p}"]],
            "f": [["x^2"], [f"y^2*(1 + {p}*y)"]],
        },
        "higgs": {"rank": 2, "locals": [_jordan("x"), _jordan("y", "-1")]},
        "higgs2": {
            "rank": 2,
            "locals": [{"x": [["0", "0"], ["2", "0"]]}, {"y": [["0", "0"], ["-2", "0"]]}],
        },
        "r": [1],
        "checks": ["tensor", "tp-compare", "chart-intertwining", "functoriality"],
        "citations": ["tp-functorial", "exp-twisting"],
    }


REGISTRY: dict = {
    "affine-2chart": affine_2chart,
    "affine-3chart": affine_3chart,
    "plane-2chart": plane_2chart,
    "p1-log-rank2": p1_log_rank2,
    "p1-frobenius-pullback": p1_frobenius_pullback,
    "p1-liftable": p1_liftable,
    "sym-power-curve": sym_power_curve,
    "tensor-pair": tensor_pair,
}

DEFAULT_PRIME = 5


def registry_json(name: str, p: int = DEFAULT_PRIME) -> dict:
    try:
        return REGISTRY[name](p)
    except KeyError:
        raise ScenarioError(f"unknown example {name!r}", location="registry") from None


def registry_scenario(name: str, p: int = DEFAULT_PRIME) -> Scenario:
    return parse_scenario(registry_json(name, p))


def list_examples() -> list:
    out = []
    for name, build in REGISTRY.items():
        obj = build(DEFAULT_PRIME)
        out.append(
            {
                "name": name,
                "description": obj["description"],
                "checks": obj["checks"],
                "citations": [{"key": c, "statement": STATEMENTS[c]} for c in obj["citations"]],
            }
        )
    return out
