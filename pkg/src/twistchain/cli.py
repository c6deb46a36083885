"""Command line driver: JSON problem files in, deterministic reports out.

A problem file describes a finite group (multiplication table or
permutation generators), a right action on a finite carrier, a phase
2-cocycle on the action groupoid (integer exponents of a root of unity,
so parsing stays exact), graded-commutative models with twist data, and
truncation / seed settings.  Subcommands run the validations and the
chain-level computations and print one JSON report on stdout.

Reports are canonical: keys sorted, two-space indent, scalars rendered
through their exact string forms.  Two runs on the same problem file
with the same seed and options produce byte-identical output; anything
timing-related goes to stderr.  Reports are cached in a content-addressed
directory (TWISTCHAIN_CACHE or .twistchain-cache) keyed by a digest of
command, options, problem payload, seed and package version; writes are
atomic (temp file then rename).  --no-cache bypasses the cache and
--verify-cache recomputes cached entries and fails loudly on divergence.

Exit status: 0 when every requested identity passed, 1 when a
computation ran but an identity or validation failed, 2 on malformed
input, 3 on cache divergence.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .scalars import get_field, root_of_unity
from .groupoids import (
    GroupAction,
    action_groupoid,
    conjugacy_classes,
    group_from_table,
    trivial_action,
)
from .extensions import (
    ExtensionCocycle,
    TwistedConvolutionAlgebra,
    twisted_algebra,
    validate_extension,
)
from .transgression import delocalized_dimensions, transgress
from .cartan import (
    CDGAModel,
    TwistData,
    algebra_map_from_generators,
    cartan_complex,
    cohomology_dims,
)
from .cyclic import crossed_product_comparison, periodic_dims
from .hkr import flat_fixture, tau_family, verify_chain_map
from .fixtures import (
    curved_fixture_central_eta,
    curved_fixture_flat,
    curved_fixture_noncentral,
)

CURVED_FIXTURES = {
    "matrix-flat": curved_fixture_flat,
    "matrix-noncentral": curved_fixture_noncentral,
    "matrix-central-eta": curved_fixture_central_eta,
}

TOP_LEVEL_KEYS = {"name", "notes", "group", "action", "cocycle", "models",
                  "twist", "sectors", "truncation", "seed", "hkr"}


class SpecError(Exception):
    """Malformed problem file; path points at the offending entry."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__("%s: %s" % (path, message))


def elem_key(e) -> str:
    """Canonical string form of a group element or carrier point."""
    if isinstance(e, tuple):
        return ",".join(str(v) for v in e)
    return str(e)


def _check_name(name, path):
    if not isinstance(name, str) or not name:
        raise SpecError(path, "expected a nonempty string")
    if ";" in name or "|" in name:
        raise SpecError(path, "names must not contain ';' or '|'")
    return name


def _get_int(payload, key, path, default=None):
    v = payload.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        raise SpecError("%s.%s" % (path, key), "expected an integer")
    return v


def _fraction(v, path) -> Fraction:
    # coefficients are integers or strings like "-3/2"; floats would lie
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise SpecError(path, "expected an integer or a fraction string")
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError):
        raise SpecError(path, "cannot parse %r as a fraction" % (v,)) from None


def _scalar(v, path):
    return get_field(1).scalar(_fraction(v, path))


# -- group and action ---------------------------------------------------------


def parse_group(payload):
    """(group, element lookup by key).  Defaults to the trivial group."""
    if payload is None:
        grp = group_from_table(["e"], {("e", "e"): "e"}, "e")
        return grp, {"e": "e"}
    if not isinstance(payload, dict):
        raise SpecError("group", "expected an object")
    if "permutations" in payload:
        sub = payload["permutations"]
        deg = _get_int(sub, "degree", "group.permutations")
        if deg < 1:
            raise SpecError("group.permutations.degree", "degree must be >= 1")
        gens = sub.get("generators")
        if not isinstance(gens, list):
            raise SpecError("group.permutations.generators", "expected a list")
        perms = []
        for i, images in enumerate(gens):
            path = "group.permutations.generators[%d]" % i
            if (not isinstance(images, list) or len(images) != deg
                    or sorted(images) != list(range(deg))):
                raise SpecError(path, "expected a permutation of 0..%d" % (deg - 1))
            perms.append(tuple(images))
        identity = tuple(range(deg))
        els = {identity}
        frontier = [identity]
        while frontier:
            g = frontier.pop()
            for p in perms:
                gp = tuple(g[p[i]] for i in range(deg))
                if gp not in els:
                    els.add(gp)
                    frontier.append(gp)
        elements = sorted(els)
        table = {(g, h): tuple(g[h[i]] for i in range(deg))
                 for g in elements for h in elements}
        grp = group_from_table(elements, table, identity)
        return grp, {elem_key(g): g for g in elements}
    for key in ("elements", "identity", "table"):
        if key not in payload:
            raise SpecError("group.%s" % key, "missing")
    elements = payload["elements"]
    if not isinstance(elements, list) or not elements:
        raise SpecError("group.elements", "expected a nonempty list")
    for i, name in enumerate(elements):
        _check_name(name, "group.elements[%d]" % i)
    if len(set(elements)) != len(elements):
        raise SpecError("group.elements", "duplicate element names")
    byname = {name: name for name in elements}
    identity = payload["identity"]
    if identity not in byname:
        raise SpecError("group.identity", "unknown element %r" % (identity,))
    rows = payload["table"]
    if not isinstance(rows, dict):
        raise SpecError("group.table", "expected an object of objects")
    table = {}
    for g in elements:
        row = rows.get(g)
        if not isinstance(row, dict):
            raise SpecError("group.table.%s" % g, "missing row")
        for h in elements:
            gh = row.get(h)
            if gh not in byname:
                raise SpecError("group.table.%s.%s" % (g, h),
                                "missing or unknown product")
            table[(g, h)] = gh
    return group_from_table(list(elements), table, identity), byname


def parse_element(token, byname, path):
    if not isinstance(token, str) or token not in byname:
        raise SpecError(path, "unknown group element %r" % (token,))
    return byname[token]


def parse_action(payload, group, byname):
    """Right action from per-element carrier maps, closed under products."""
    if payload is None:
        return trivial_action(group)
    if not isinstance(payload, dict):
        raise SpecError("action", "expected an object")
    carrier = payload.get("carrier")
    if not isinstance(carrier, list) or not carrier:
        raise SpecError("action.carrier", "expected a nonempty list")
    for i, x in enumerate(carrier):
        _check_name(x, "action.carrier[%d]" % i)
    if len(set(carrier)) != len(carrier):
        raise SpecError("action.carrier", "duplicate carrier points")
    points = set(carrier)
    e = group.unit[group.objects[0]]
    known = {e: {x: x for x in carrier}}
    acts = payload.get("act", {})
    if not isinstance(acts, dict):
        raise SpecError("action.act", "expected an object")
    for token in sorted(acts):
        g = parse_element(token, byname, "action.act.%s" % token)
        mapping = acts[token]
        if not isinstance(mapping, dict):
            raise SpecError("action.act.%s" % token, "expected an object")
        table = {}
        for x in carrier:
            y = mapping.get(x)
            if y not in points:
                raise SpecError("action.act.%s.%s" % (token, x),
                                "missing or unknown image")
            table[x] = y
        known[g] = table
    # close under x.(gh) = (x.g).h; conflicts surface in GroupAction.validate
    changed = True
    while changed:
        changed = False
        for g in list(known):
            for h in list(known):
                gh = group.compose(g, h)
                if gh not in known:
                    known[gh] = {x: known[h][known[g][x]] for x in carrier}
                    changed = True
    for g in group.arrows:
        if g not in known:
            raise SpecError("action.act",
                            "maps do not determine element %s" % elem_key(g))
    act_table = {(x, g): known[g][x] for x in carrier for g in group.arrows}
    return GroupAction(group, tuple(carrier), act_table)


# -- cocycle ------------------------------------------------------------------


def parse_cocycle(payload, action, byname):
    """Phase cocycle on the action groupoid from integer exponents.

    Keys are either "g|h" (group pair, pulled back to every composable
    arrow pair over those elements) or "x;g|y;h" (one arrow pair, which
    must be composable: y = x.g).  Unlisted pairs get exponent 0.
    """
    H = action_groupoid(action)
    if payload is None:
        one = get_field(1).one
        theta = {pair: one for pair in H.composable_tuples(2)}
        return ExtensionCocycle(H, theta, 1)
    if not isinstance(payload, dict):
        raise SpecError("cocycle", "expected an object")
    order = _get_int(payload, "order", "cocycle", 1)
    if order < 1:
        raise SpecError("cocycle.order", "order must be >= 1")
    exponents = payload.get("exponents", {})
    if not isinstance(exponents, dict):
        raise SpecError("cocycle.exponents", "expected an object")
    carrier = set(action.carrier)
    exp = {pair: 0 for pair in H.composable_tuples(2)}

    def parse_arrow(token, path):
        x, _, g = token.partition(";")
        if x not in carrier:
            raise SpecError(path, "unknown carrier point %r" % (x,))
        return (x, parse_element(g, byname, path))

    for key in sorted(exponents):
        path = "cocycle.exponents.%s" % key
        value = exponents[key]
        if not isinstance(value, int) or isinstance(value, bool):
            raise SpecError(path, "expected an integer exponent")
        left, sep, right = key.partition("|")
        if not sep:
            raise SpecError(path, "expected 'g|h' or 'x;g|y;h'")
        if ";" in left or ";" in right:
            a = parse_arrow(left, path)
            b = parse_arrow(right, path)
            if H.source[a] != H.target[b]:
                raise SpecError(path, "arrows %r and %r are not composable"
                                % (a, b))
            exp[(a, b)] = value
        else:
            g = parse_element(left, byname, path)
            h = parse_element(right, byname, path)
            for x in action.carrier:
                a = (x, g)
                exp[(a, (action.act(x, g), h))] = value
    theta = {pair: root_of_unity(order, e % order) if order > 1
             else get_field(1).one
             for pair, e in exp.items()}
    return ExtensionCocycle(H, theta, order)


# -- models and twists --------------------------------------------------------


def _parse_mono(token, ngens, path):
    if token == "":
        parts = []
    else:
        parts = token.split(",")
    if len(parts) != ngens:
        raise SpecError(path, "monomial %r needs %d exponents" % (token, ngens))
    out = []
    for p in parts:
        try:
            out.append(int(p))
        except ValueError:
            raise SpecError(path, "bad exponent %r" % (p,)) from None
        if out[-1] < 0:
            raise SpecError(path, "negative exponent in %r" % (token,))
    return tuple(out)


def _parse_gen_element(payload, ngens, path):
    if not isinstance(payload, dict):
        raise SpecError(path, "expected an object of monomial coefficients")
    out = {}
    for token in sorted(payload):
        mono = _parse_mono(token, ngens, "%s.%s" % (path, token))
        out[mono] = _scalar(payload[token], "%s.%s" % (path, token))
    return out


def parse_model(payload, path):
    if not isinstance(payload, dict):
        raise SpecError(path, "expected an object")
    r = _get_int(payload, "r", path, 0)
    if r < 0:
        raise SpecError("%s.r" % path, "torus rank must be >= 0")
    gens = payload.get("generators")
    if not isinstance(gens, list) or not gens:
        raise SpecError("%s.generators" % path, "expected a nonempty list")
    generators = []
    names = set()
    for i, spec in enumerate(gens):
        gpath = "%s.generators[%d]" % (path, i)
        if not isinstance(spec, list) or len(spec) not in (3, 4):
            raise SpecError(gpath, "expected [name, degree, nilpotency] "
                                   "with optional weight list")
        name = _check_name(spec[0], gpath)
        if name in names:
            raise SpecError(gpath, "duplicate generator name %r" % name)
        names.add(name)
        deg = spec[1]
        nilp = spec[2]
        if not isinstance(deg, int) or not isinstance(nilp, int) or nilp < 2:
            raise SpecError(gpath, "degree must be an integer and "
                                   "nilpotency an integer >= 2")
        if len(spec) == 4:
            w = spec[3]
            if not isinstance(w, list) or len(w) != r \
                    or not all(isinstance(v, int) for v in w):
                raise SpecError(gpath, "weights must be %d integers" % r)
            generators.append((name, deg, nilp, tuple(w)))
        else:
            generators.append((name, deg, nilp))
    ngens = len(generators)

    def derivation(key):
        table = payload.get(key)
        if table is None:
            return None
        if not isinstance(table, dict):
            raise SpecError("%s.%s" % (path, key), "expected an object")
        out = {}
        for name in sorted(table):
            if name not in names:
                raise SpecError("%s.%s.%s" % (path, key, name),
                                "unknown generator")
            out[name] = _parse_gen_element(
                table[name], ngens, "%s.%s.%s" % (path, key, name))
        return out

    d_gen = derivation("d")
    iotas = payload.get("iota")
    iota_gen = None
    if iotas is not None:
        if not isinstance(iotas, list) or len(iotas) != r:
            raise SpecError("%s.iota" % path, "expected %d tables" % r)
        iota_gen = []
        for i, table in enumerate(iotas):
            if not isinstance(table, dict):
                raise SpecError("%s.iota[%d]" % (path, i), "expected an object")
            entry = {}
            for name in sorted(table):
                if name not in names:
                    raise SpecError("%s.iota[%d].%s" % (path, i, name),
                                    "unknown generator")
                entry[name] = _parse_gen_element(
                    table[name], ngens, "%s.iota[%d].%s" % (path, i, name))
            iota_gen.append(entry)
    try:
        return CDGAModel(generators, r=r, d_gen=d_gen, iota_gen=iota_gen)
    except ValueError as exc:
        raise SpecError(path, str(exc)) from None


def parse_complex_element(payload, model, path):
    """Element keyed "p|mono": torus exponents, then generator exponents."""
    if not isinstance(payload, dict):
        raise SpecError(path, "expected an object")
    out = {}
    for token in sorted(payload):
        epath = "%s.%s" % (path, token)
        left, sep, right = token.partition("|")
        if not sep:
            raise SpecError(epath, "expected 'p|mono' key")
        p = _parse_mono(left, model.r, epath)
        mono = _parse_mono(right, len(model.names), epath)
        out[(p, mono)] = _fraction(payload[token], epath)
    return out


def parse_twist(payload, models, path):
    """(model name, TwistData)."""
    if not isinstance(payload, dict):
        raise SpecError(path, "expected an object")
    name = payload.get("model", "main")
    if name not in models:
        raise SpecError("%s.model" % path, "unknown model %r" % (name,))
    model = models[name]
    parts = {}
    for key in ("eta_hat", "a", "B"):
        if key in payload:
            parts[key] = parse_complex_element(
                payload[key], model, "%s.%s" % (path, key))
    return name, TwistData(eta_hat=parts.get("eta_hat"),
                           a=parts.get("a"), B=parts.get("B"))


def parse_sectors(payload, models, byname):
    if payload is None:
        return {}
    if not isinstance(payload, dict):
        raise SpecError("sectors", "expected an object")
    sectors = {}
    for token in sorted(payload):
        path = "sectors.%s" % token
        g = parse_element(token, byname, path)
        entry = payload[token]
        if not isinstance(entry, dict):
            raise SpecError(path, "expected an object")
        of = entry.get("of", "main")
        small = entry.get("model")
        if of not in models:
            raise SpecError("%s.of" % path, "unknown model %r" % (of,))
        if small not in models:
            raise SpecError("%s.model" % path, "unknown model %r" % (small,))
        images_raw = entry.get("images")
        if not isinstance(images_raw, dict):
            raise SpecError("%s.images" % path, "expected an object")
        big = models[of]
        images = {}
        for name in big.names:
            if name not in images_raw:
                raise SpecError("%s.images.%s" % (path, name), "missing image")
            images[name] = _parse_gen_element(
                images_raw[name], len(models[small].names),
                "%s.images.%s" % (path, name))
        twist = None
        if "twist" in entry:
            _, twist = parse_twist(dict(entry["twist"], model=small),
                                   models, "%s.twist" % path)
        sectors[token] = {"element": g, "of": of, "model": small,
                          "images": images, "twist": twist}
    return sectors


# -- the parsed problem ---------------------------------------------------------


class Problem:
    __slots__ = ("payload", "group", "byname", "action", "theta", "models",
                 "twist_model", "twist", "sectors", "N", "k_max", "seed",
                 "curved")

    def __init__(self, payload):
        if not isinstance(payload, dict):
            raise SpecError("", "problem file must hold a JSON object")
        for key in payload:
            if key not in TOP_LEVEL_KEYS:
                raise SpecError(key, "unknown problem key")
        self.payload = payload
        self.group, self.byname = parse_group(payload.get("group"))
        self.action = parse_action(payload.get("action"), self.group,
                                   self.byname)
        self.theta = parse_cocycle(payload.get("cocycle"), self.action,
                                   self.byname)
        models_raw = payload.get("models", {})
        if not isinstance(models_raw, dict):
            raise SpecError("models", "expected an object")
        self.models = {}
        for name in sorted(models_raw):
            _check_name(name, "models.%s" % name)
            self.models[name] = parse_model(models_raw[name],
                                            "models.%s" % name)
        self.twist_model = None
        self.twist = None
        if "twist" in payload:
            self.twist_model, self.twist = parse_twist(
                payload["twist"], self.models, "twist")
        self.sectors = parse_sectors(payload.get("sectors"), self.models,
                                     self.byname)
        trunc = payload.get("truncation", {})
        if not isinstance(trunc, dict):
            raise SpecError("truncation", "expected an object")
        self.N = _get_int(trunc, "N", "truncation", 3)
        self.k_max = _get_int(trunc, "k_max", "truncation", 4)
        if self.N < 1:
            raise SpecError("truncation.N", "must be >= 1")
        if self.k_max < 4:
            raise SpecError("truncation.k_max", "must be >= 4")
        self.seed = _get_int(payload, "seed", "", 0)
        hkr = payload.get("hkr", {})
        if not isinstance(hkr, dict):
            raise SpecError("hkr", "expected an object")
        curved = hkr.get("curved", [])
        if not isinstance(curved, list):
            raise SpecError("hkr.curved", "expected a list")
        for i, name in enumerate(curved):
            if name not in CURVED_FIXTURES:
                raise SpecError("hkr.curved[%d]" % i,
                                "unknown fixture %r, expected one of %s"
                                % (name, sorted(CURVED_FIXTURES)))
        self.curved = list(curved)

    def group_order(self) -> int:
        return len(self.group.arrows)

    def plain_algebra(self) -> TwistedConvolutionAlgebra:
        return TwistedConvolutionAlgebra(self.theta)

    def equivariant_algebra(self) -> TwistedConvolutionAlgebra:
        return twisted_algebra(self.theta, None, self.action)

    def pick_model(self, name, path):
        if not self.models:
            raise SpecError("models", "no models defined")
        if name is None:
            if "main" in self.models:
                return "main", self.models["main"]
            if len(self.models) == 1:
                only = next(iter(self.models))
                return only, self.models[only]
            raise SpecError(path, "several models; pick one with --model")
        if name not in self.models:
            raise SpecError(path, "unknown model %r" % (name,))
        return name, self.models[name]


# -- command runners ------------------------------------------------------------


def run_validate(problem, opts):
    checks = []

    def add(name, errors):
        checks.append({"check": name, "errors": [str(e) for e in errors]})

    add("group", problem.group.validate())
    add("action", problem.action.validate())
    add("action-groupoid", problem.theta.groupoid.validate())
    add("cocycle", validate_extension(problem.theta, problem.action))
    algebra = problem.equivariant_algebra()
    add("algebra-action", algebra.validate_action())
    for name in sorted(problem.models):
        add("model:%s" % name, problem.models[name].validate())
    if problem.twist is not None:
        try:
            cartan_complex(problem.models[problem.twist_model], problem.N,
                           problem.twist)
            add("twist:%s" % problem.twist_model, [])
        except ValueError as exc:
            add("twist:%s" % problem.twist_model, [str(exc)])
    for token in sorted(problem.sectors):
        sec = problem.sectors[token]
        try:
            _sector_complex(problem, sec)
            add("sector:%s" % token, [])
        except ValueError as exc:
            add("sector:%s" % token, [str(exc)])
    passed = all(not c["errors"] for c in checks)
    return {"checks": checks}, passed


def run_transgress(problem, opts):
    element = opts.get("element")
    if element == "all":
        targets = list(problem.group.arrows)
    else:
        targets = [parse_element(element, problem.byname, "element")]
    sectors = []
    passed = True
    for g in targets:
        family = transgress(problem.theta, problem.action, g)
        errors = family.validate()
        passed = passed and not errors
        sectors.append({
            "element": elem_key(g),
            "fixed_points": [elem_key(x) for x in family.points],
            "character": {elem_key(h): str(v)
                          for h, v in family.character().items()},
            "invariant_dimension": str(family.invariant_dimension()),
            "errors": errors,
        })
    return {"order": problem.theta.order, "sectors": sectors}, passed


def _sector_complex(problem, sec):
    big = problem.models[sec["of"]]
    small = problem.models[sec["model"]]
    table = algebra_map_from_generators(big, small, sec["images"])
    return cartan_complex(small, problem.N, sec["twist"],
                          sector=(sec["element"], big, table))


def _dims_payload(raw):
    return {
        "grading": raw["grading"],
        "dims": {str(k): v for k, v in raw["dims"].items()},
        "truncation_sensitive": {str(k): v for k, v in raw["flags"].items()},
    }


def run_cohomology(problem, opts):
    sector = opts.get("sector")
    if sector is not None:
        if sector not in problem.sectors:
            raise SpecError("sector", "unknown sector %r" % (sector,))
        sec = problem.sectors[sector]
        try:
            cx = _sector_complex(problem, sec)
        except ValueError as exc:
            return {"sector": sector, "model": sec["model"],
                    "error": str(exc)}, False
        out = {"sector": sector, "model": sec["model"], "N": problem.N,
               "twisted": bool(sec["twist"] is not None
                               and (sec["twist"].eta_hat or sec["twist"].a))}
        out.update(_dims_payload(cohomology_dims(cx)))
        return out, True
    name, model = problem.pick_model(opts.get("model"), "model")
    twist = problem.twist if problem.twist_model == name else None
    try:
        cx = cartan_complex(model, problem.N, twist)
    except ValueError as exc:
        return {"model": name, "error": str(exc)}, False
    out = {"model": name, "N": problem.N,
           "twisted": bool(twist is not None and (twist.eta_hat or twist.a))}
    out.update(_dims_payload(cohomology_dims(cx)))
    return out, True


def run_cyclic(problem, opts):
    algebra = problem.plain_algebra()
    even, odd, stable = periodic_dims(algebra, opts["k_max"])
    return {
        "dimension": algebra.dim,
        "k_max": opts["k_max"],
        "dims": {"even": even, "odd": odd},
        "stabilized": stable,
    }, stable


def run_crossed_product(problem, opts):
    algebra = problem.equivariant_algebra()
    report = crossed_product_comparison(algebra, opts["k_max"])

    def fmt(triple):
        return {"dims": {"even": triple[0], "odd": triple[1]},
                "stabilized": triple[2]}

    passed = report["agree"] and report["equivariant"][2] and report["crossed"][2]
    return {
        "k_max": opts["k_max"],
        "equivariant": fmt(report["equivariant"]),
        "crossed": fmt(report["crossed"]),
        "agree": report["agree"],
    }, passed


def run_verify_hkr(problem, opts):
    trials = opts["trials"]
    seed = opts["seed"]
    out = {}
    passed = True
    if problem.group_order() > 1:
        algebra = problem.equivariant_algebra()
        family = tau_family(algebra, problem.action, trials=trials, seed=seed)
        out["trace_family"] = family
        passed = passed and family["passed"]
        chain_maps = []
        for cls in conjugacy_classes(problem.group):
            g = cls[0]
            fixture = flat_fixture(algebra, problem.action, g,
                                   name="sector:%s" % elem_key(g))
            report = verify_chain_map(fixture, trials=trials, seed=seed)
            chain_maps.append(report)
            passed = passed and report["passed"]
        out["sector_chain_maps"] = chain_maps
    if problem.curved:
        curved = []
        for name in problem.curved:
            fixture = CURVED_FIXTURES[name]()
            report = verify_chain_map(fixture, trials=trials, seed=seed)
            curved.append(report)
            passed = passed and report["passed"]
        out["curved_chain_maps"] = curved
    if not out:
        raise SpecError("hkr", "nothing to verify: no group action and no "
                               "curved fixtures requested")
    return out, passed


def run_delocalize(problem, opts):
    table = delocalized_dimensions(problem.theta, problem.action)
    sectors = {elem_key(g): str(dim) for g, dim in table.items()}
    total = sum(table.values(), Fraction(0))
    even, odd, stable = periodic_dims(problem.plain_algebra(), opts["k_max"])
    agree = stable and total == even
    return {
        "label": "EXPERIMENT: sector dimension count against periodic "
                 "homology; not an accepted identity",
        "sectors": sectors,
        "total": str(total),
        "hp_even": even,
        "hp_odd": odd,
        "stabilized": stable,
        "agree": agree,
    }, agree


def run_report(problem, opts):
    sections = {}
    passed = True

    def run(name, runner, ropts):
        nonlocal passed
        results, ok = runner(problem, ropts)
        sections[name] = {"results": results, "passed": ok}
        passed = passed and ok

    # crossed-product is left out: the crossed basis is |G| times larger
    # and its chain window can dwarf everything else; run it directly.
    run("validate", run_validate, {})
    run("cyclic", run_cyclic, {"k_max": problem.k_max})
    if problem.group_order() > 1:
        run("transgress", run_transgress, {"element": "all"})
        run("delocalize", run_delocalize, {"k_max": problem.k_max})
    for name in sorted(problem.models):
        run("cohomology:%s" % name, run_cohomology,
            {"model": name, "sector": None})
    for token in sorted(problem.sectors):
        run("cohomology:sector:%s" % token, run_cohomology, {"sector": token})
    if problem.group_order() > 1 or problem.curved:
        run("verify-hkr", run_verify_hkr,
            {"trials": opts["trials"], "seed": opts["seed"]})
    return {"sections": sections}, passed


RUNNERS = {
    "validate": run_validate,
    "transgress": run_transgress,
    "cohomology": run_cohomology,
    "cyclic": run_cyclic,
    "crossed-product": run_crossed_product,
    "verify-hkr": run_verify_hkr,
    "delocalize": run_delocalize,
    "report": run_report,
}


# -- canonical reports and the cache ----------------------------------------------


def canonical_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2,
                       ensure_ascii=True) + "\n").encode("ascii")


def request_digest(command, options, payload, seed) -> str:
    key = {
        "command": command,
        "options": options,
        "problem": payload,
        "seed": seed,
        "version": __version__,
    }
    return hashlib.sha256(canonical_bytes(key)).hexdigest()


def build_report(command, options, problem, seed):
    digest = request_digest(command, options, problem.payload, seed)
    results, passed = RUNNERS[command](problem, options)
    report = {
        "command": command,
        "version": __version__,
        "request": digest,
        "seed": seed,
        "options": options,
        "results": results,
        "passed": passed,
    }
    if "name" in problem.payload:
        report["problem"] = problem.payload["name"]
    return digest, canonical_bytes(report)


def cache_dir_from(args) -> str:
    if args.cache_dir:
        return args.cache_dir
    return os.environ.get("TWISTCHAIN_CACHE", ".twistchain-cache")


def cache_write(directory, digest, data) -> None:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, digest + ".json")
    tmp = path + ".tmp.%d" % os.getpid()
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def cache_read(directory, digest):
    path = os.path.join(directory, digest + ".json")
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError:
        return None


def render_markdown(report: dict) -> str:
    lines = ["# twistchain %s" % report["command"], ""]
    for key in ("problem", "version", "request", "seed"):
        if key in report:
            lines.append("- %s: %s" % (key, report[key]))
    lines.append("- passed: %s" % ("yes" if report["passed"] else "NO"))
    lines.append("")
    lines.append("## results")
    lines.extend(_markdown_lines(report["results"], 0))
    lines.append("")
    return "\n".join(lines)


def _markdown_lines(obj, depth):
    pad = "  " * depth
    if isinstance(obj, dict):
        for key in sorted(obj):
            value = obj[key]
            if isinstance(value, (dict, list)) and value:
                yield "%s- %s:" % (pad, key)
                yield from _markdown_lines(value, depth + 1)
            else:
                yield "%s- %s: %s" % (pad, key, json.dumps(value))
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            if isinstance(value, (dict, list)) and value:
                yield "%s- [%d]" % (pad, i)
                yield from _markdown_lines(value, depth + 1)
            else:
                yield "%s- %s" % (pad, json.dumps(value))
    else:
        yield "%s- %s" % (pad, json.dumps(obj))


# -- entry point ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twistchain",
        description="exact chain-level reports for twisted groupoid algebras")
    parser.add_argument("--cache-dir", default=None,
                        help="report cache directory (default: "
                             "$TWISTCHAIN_CACHE or .twistchain-cache)")
    parser.add_argument("--no-cache", action="store_true",
                        help="compute without reading or writing the cache")
    parser.add_argument("--verify-cache", action="store_true",
                        help="recompute cached reports and fail on divergence")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the seed recorded in the problem file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("problem", help="problem file (JSON)")
        return p

    add("validate", "run every structural validation and report errors")
    p = add("transgress", "sector characters of the transgressed families")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--element", default=None, help="one group element")
    group.add_argument("--all", action="store_true",
                       help="every group element (default)")
    p = add("cohomology", "equivariant cohomology of a model")
    p.add_argument("--model", default=None, help="model name (default: main)")
    p.add_argument("--sector", default=None,
                   help="restrict along a named sector entry")
    p.add_argument("--truncation", type=int, default=None,
                   help="override the polynomial truncation N")
    p = add("cyclic", "periodic dimensions of the twisted algebra")
    p.add_argument("--kmax", type=int, default=None,
                   help="override the chain window bound")
    p = add("crossed-product",
            "equivariant periodic dimensions against the crossed product")
    p.add_argument("--kmax", type=int, default=None)
    p = add("verify-hkr", "trace chain map on random invariant chains")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="override the seed recorded in the problem file")
    p = add("delocalize",
            "EXPERIMENT: sector dimension count against periodic homology")
    p.add_argument("--kmax", type=int, default=None)
    p = add("report", "bundle every applicable section except crossed-product")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="override the seed recorded in the problem file")
    return parser


def effective_options(args, problem):
    command = args.command
    if command == "validate":
        return {}
    if command == "transgress":
        element = "all" if args.element is None else args.element
        return {"element": element}
    if command == "cohomology":
        if args.truncation is not None:
            if args.truncation < 1:
                raise SpecError("truncation", "must be >= 1")
            problem.N = args.truncation
        return {"model": args.model, "sector": args.sector, "N": problem.N}
    if command in ("cyclic", "crossed-product", "delocalize"):
        k_max = args.kmax if args.kmax is not None else problem.k_max
        if k_max < 4:
            raise SpecError("kmax", "must be >= 4")
        return {"k_max": k_max}
    if command == "verify-hkr":
        if args.trials < 1:
            raise SpecError("trials", "must be >= 1")
        return {"trials": args.trials, "seed": problem.seed}
    if command == "report":
        if args.trials < 1:
            raise SpecError("trials", "must be >= 1")
        return {"trials": args.trials, "seed": problem.seed}
    raise AssertionError(command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.problem, "rb") as fh:
            payload = json.load(fh)
    except OSError as exc:
        print("twistchain: cannot read %s: %s" % (args.problem, exc),
              file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print("twistchain: %s is not JSON: %s" % (args.problem, exc),
              file=sys.stderr)
        return 2
    started = time.perf_counter()
    try:
        problem = Problem(payload)
        if args.seed is not None:
            problem.seed = args.seed
        options = effective_options(args, problem)
        digest = request_digest(args.command, options, problem.payload,
                                problem.seed)
        directory = cache_dir_from(args)
        cached = None if args.no_cache else cache_read(directory, digest)
        if cached is not None and not args.verify_cache:
            data = cached
            print("twistchain: %s: cache hit %s" % (args.command, digest[:12]),
                  file=sys.stderr)
        else:
            check, data = build_report(args.command, options, problem,
                                       problem.seed)
            assert check == digest
            if cached is not None and cached != data:
                print("twistchain: cache divergence at %s" % digest,
                      file=sys.stderr)
                return 3
            if not args.no_cache:
                cache_write(directory, digest, data)
            print("twistchain: %s computed in %.3fs"
                  % (args.command, time.perf_counter() - started),
                  file=sys.stderr)
    except SpecError as exc:
        print("twistchain: %s" % exc, file=sys.stderr)
        return 2
    report = json.loads(data)
    if args.command == "report" and args.format == "markdown":
        sys.stdout.write(render_markdown(report))
    else:
        sys.stdout.write(data.decode("ascii"))
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
