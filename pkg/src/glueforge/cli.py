"""JSON document ingestion, command dispatch, and deterministic reports.

Usage:
    glueforge <command> [--input FILE] [--side colimit|limit] [--cap N]
              [--ambient sets|top] [--covers default|exhaustive]
              [--output FILE]

Commands read one JSON document (stdin when no --input), run the matching
operation, and emit a report as JSON on standard output.  Exit status 0 means
every verdict passed, 1 means some verdict is false, 2 means the input was
structurally invalid or an enumeration hit the cap.  Identical input and
flags produce identical output bytes.  The environment variable
GLUEFORGE_CAP overrides the default enumeration cap.
"""

import argparse
import json
import os
import sys
from importlib import resources

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from .errors import DEFAULT_CAP, GlueforgeError, ResourceError, StructuralError
from .fincat import SEP, FinFn, FinSet, FinTop, TopMap
from .gluing import (
    FROM_OVERLAPS,
    TOWARD_OVERLAPS,
    GluingData,
    colimit_glue,
    hom_transport,
    limit_glue,
    universal_glue_check,
)
from .indexcat import IndexCat
from .presheaf import (
    GluingDatum,
    NatTrans,
    OpenLattice,
    PresheafStore,
    all_coverings,
    default_coverings,
    glue_nat_trans,
    glue_presheaves,
    is_separated,
    is_sheaf,
    presheaf_effective_check,
    restrict,
    validate_presheaf,
)
from .refine import Refinement, compose_via_sinks, induced_limit_map, \
    validate_refinement
from .site import (
    SiteSpec,
    Sink,
    covering_axioms_check,
    effective_gluing_check,
    universal_effective_epi_check,
)

KINDS = ("gluing", "sink", "site", "presheaf", "gluing-datum", "refinement")

COMMAND_KINDS = {
    "glue": "gluing",
    "hom": "gluing",
    "check-effective": "gluing",
    "check-cover": "sink",
    "compose": "sink",
    "check-site": "site",
    "check-sheaf": "presheaf",
    "glue-map": "presheaf",
    "glue-sheaves": "gluing-datum",
    "refine": "refinement",
}


class Document:
    __slots__ = ("kind", "payload", "version")

    def __init__(self, kind, payload, version):
        self.kind = kind
        self.payload = payload
        self.version = version


def _schema_registry():
    registry = Registry()
    for name in ("document", "defs", "gluing", "sink", "site", "presheaf",
                 "gluing-datum", "refinement"):
        text = resources.files("glueforge.schemas").joinpath(
            name + ".schema.json").read_text()
        schema = json.loads(text)
        registry = registry.with_resource(schema["$id"],
                                          Resource.from_contents(schema))
    return registry


_REGISTRY = _schema_registry()


def _validate_schema(instance, schema_id, where):
    validator = Draft202012Validator({"$ref": schema_id}, registry=_REGISTRY)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise StructuralError("schema violation at %s%s: %s"
                              % (where, err.json_path.lstrip("$"), err.message))


def _check_labels(payload):
    """Reject input labels carrying the reserved separator."""
    def walk(node):
        if isinstance(node, str):
            if SEP in node:
                raise StructuralError(
                    "reserved character %r in input label %r" % (SEP, node))
        elif isinstance(node, list):
            for item in node:
                walk(item)
        elif isinstance(node, dict):
            for key, value in node.items():
                walk(key)
                walk(value)
    walk(payload)


def load_document(stream_or_path):
    """Parse, schema-check, and label-check one document."""
    if hasattr(stream_or_path, "read"):
        text = stream_or_path.read()
        where = "<stream>"
    else:
        with open(stream_or_path, "r", encoding="utf-8") as handle:
            text = handle.read()
        where = str(stream_or_path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise StructuralError("parse error in %s at line %d column %d: %s"
                              % (where, err.lineno, err.colno, err.msg))
    _validate_schema(raw, "glueforge:document", "")
    kind = raw["kind"]
    _validate_schema(raw["payload"], "glueforge:" + kind, "payload")
    _check_labels(raw["payload"])
    return Document(kind, raw["payload"], raw["version"])


def parse_object(node, ambient):
    """An object node: a label list in sets, points plus opens in top."""
    if ambient == "sets":
        if not isinstance(node, list):
            raise StructuralError("set objects are label arrays")
        return FinSet(node), None
    if not isinstance(node, dict):
        raise StructuralError("top objects need points and opens")
    carrier = FinSet(node["points"])
    space = FinTop(carrier, [frozenset(o) for o in node["opens"]])
    return carrier, space


def _parse_objkey(key, mode, cat):
    parts = key.split(",")
    if len(parts) == 1:
        return (parts[0],)
    if len(parts) == 2:
        return cat.pair(parts[0], parts[1]) if mode == "nonsplit" \
            else (parts[0], parts[1])
    raise StructuralError("bad index object key %r" % key)


def parse_gluing(payload):
    mode = payload["mode"]
    ambient = payload["ambient"]
    direction = payload["direction"]
    index = FinSet(payload["index"])
    for label in index:
        if "," in label:
            raise StructuralError("index label %r may not contain ','" % label)
    cat = IndexCat(mode, index)
    objects = {}
    spaces = {}
    for key, node in payload["objects"].items():
        obj = _parse_objkey(key, mode, cat)
        carrier, space = parse_object(node, ambient)
        objects[obj] = carrier
        if space is not None:
            spaces[obj] = space
    arrows = {}
    for entry in payload["arrows"]:
        pair = _parse_objkey(entry["pair"], mode, cat)
        if len(pair) != 2:
            raise StructuralError("arrow pair %r is not a pair" % (entry["pair"],))
        if entry["kind"] == "edge":
            i = entry["from"]
            if i not in pair:
                raise StructuralError("edge source %r not in pair %r"
                                      % (i, entry["pair"]))
            if direction == FROM_OVERLAPS:
                dom, cod = objects[pair], objects[(i,)]
            else:
                dom, cod = objects[(i,)], objects[pair]
            arrows[("incl", i, pair)] = FinFn(dom, cod, entry["map"])
        else:
            i, j = pair
            if (j, i) not in objects:
                raise StructuralError("tau needs both pair orientations, "
                                      "%r is missing" % ((j, i),))
            fn = FinFn(objects[pair], objects[(j, i)], entry["map"])
            # the document stores the ambient bijection G(i,j) -> G(j,i);
            # the generator carrying that map depends on the direction
            key = ("tau", (j, i)) if direction == FROM_OVERLAPS \
                else ("tau", (i, j))
            arrows.setdefault(key, fn)
            inverse_key = ("tau", (i, j)) if direction == FROM_OVERLAPS \
                else ("tau", (j, i))
            arrows.setdefault(inverse_key, fn.inverse())
    return GluingData(cat, ambient, objects, arrows, direction,
                      spaces or None)


def parse_sink(payload):
    ambient = payload["ambient"]
    target, target_space = parse_object(payload["target"], ambient)
    sources = []
    for node in payload["sources"]:
        carrier, space = parse_object(node["object"], ambient)
        fn = FinFn(carrier, target, node["map"])
        sources.append((node["name"], space if ambient == "top" else carrier,
                        fn))
    sink = Sink(ambient, target, sources, target_space=target_space)
    tests = []
    for node in payload.get("tests", []):
        carrier, space = parse_object(node["object"], ambient)
        fn = FinFn(carrier, target, node["map"])
        tests.append((fn, space) if ambient == "top" else fn)
    inner = {}
    for name, body in payload.get("inner", {}).items():
        inner_target, inner_space = parse_object(body["target"], ambient)
        inner_sources = []
        for node in body["sources"]:
            carrier, space = parse_object(node["object"], ambient)
            fn = FinFn(carrier, inner_target, node["map"])
            inner_sources.append(
                (node["name"], space if ambient == "top" else carrier, fn))
        inner[name] = Sink(ambient, inner_target, inner_sources,
                           target_space=inner_space)
    return sink, tests, inner


def parse_site(payload):
    ambient = payload["ambient"]
    coverings = []
    for body in payload["coverings"]:
        target, target_space = parse_object(body["target"], ambient)
        sources = []
        for node in body["sources"]:
            carrier, space = parse_object(node["object"], ambient)
            fn = FinFn(carrier, target, node["map"])
            sources.append((node["name"],
                            space if ambient == "top" else carrier, fn))
        coverings.append(Sink(ambient, target, sources,
                              target_space=target_space))
    morphisms = []
    for node in payload["morphisms"]:
        dom, dom_space = parse_object(node["dom"], ambient)
        cod, cod_space = parse_object(node["cod"], ambient)
        fn = FinFn(dom, cod, node["map"])
        if ambient == "top":
            morphisms.append(TopMap(fn, dom_space, cod_space))
        else:
            morphisms.append(fn)
    return SiteSpec(ambient, coverings, morphisms)


def _parse_openkey(key, space):
    members = frozenset(k for k in key.split(",") if k)
    if not space.is_open(members):
        raise StructuralError("key %r does not name an open set" % key)
    return members


def _parse_presheaf_body(body, space):
    for p in space.carrier:
        if "," in p:
            raise StructuralError("point label %r may not contain ','" % p)
    lat = OpenLattice(space)
    sections = {}
    for key, labels in body["sections"].items():
        sections[_parse_openkey(key, space)] = FinSet(labels)
    res = {}
    for key, mapping in body["restrictions"].items():
        if ">" not in key:
            raise StructuralError("restriction key %r must look like 'W>V'"
                                  % key)
        wkey, vkey = key.split(">", 1)
        w = _parse_openkey(wkey, space)
        v = _parse_openkey(vkey, space)
        if not v <= w:
            raise StructuralError("restriction key %r is not an inclusion"
                                  % key)
        if w not in sections or v not in sections:
            raise StructuralError("restriction %r mentions opens without "
                                  "sections" % key)
        res[(w, v)] = FinFn(sections[w], sections[v], mapping)
    return PresheafStore(lat, sections, res)


def parse_presheaf(payload):
    _, space = parse_object(payload["space"], "top")
    store = _parse_presheaf_body(payload["presheaf"], space)
    coverings = None
    if "coverings" in payload:
        coverings = []
        for node in payload["coverings"]:
            u = _parse_openkey(node["open"], space)
            parts = [_parse_openkey(p, space) for p in node["parts"]]
            coverings.append((u, parts))
    glue_map = payload.get("glue_map")
    return space, store, coverings, glue_map


def parse_gluing_datum(payload):
    _, space = parse_object(payload["space"], "top")
    charts = [(node["name"], frozenset(node["members"]))
              for node in payload["charts"]]
    locals_ = {}
    for name, members in charts:
        if name not in payload["locals"]:
            raise StructuralError("no local presheaf for chart %r" % name)
        sub = space.subspace(members)
        locals_[name] = _parse_presheaf_body(payload["locals"][name], sub)
    transitions = {}
    for node in payload["transitions"]:
        a, b = node["from"], node["to"]
        sub = space.subspace(dict(charts)[a] & dict(charts)[b])
        comp = {}
        for key, mapping in node["components"].items():
            o = _parse_openkey(key, sub)
            comp[o] = FinFn(locals_[a].sections[o], locals_[b].sections[o],
                            mapping)
        transitions[(a, b)] = comp
    return GluingDatum(space, charts, locals_, transitions)


def parse_refinement(payload):
    source = parse_gluing(payload["source"])
    target = parse_gluing(payload["target"])
    gamma = FinFn(target.indexcat.index, source.indexcat.index,
                  payload["gamma"])
    stub = Refinement(source, target, gamma, {})
    components = {}
    for key, mapping in payload["components"].items():
        obj = _parse_objkey(key, target.indexcat.mode, target.indexcat)
        dom = source.carrier(stub.reindexed(obj))
        components[obj] = FinFn(dom, target.carrier(obj), mapping)
    return Refinement(source, target, gamma, components)


def jsonable_object(carrier, space):
    if space is None:
        return list(carrier.labels)
    return {"points": list(space.carrier.labels),
            "opens": [sorted(o, key=space.carrier.position)
                      for o in space.opens]}


def jsonable_fn(fn):
    return {x: fn.mapping[x] for x in fn.domain}


def glued_object_to_json(glued):
    out = {
        "side": glued.side,
        "apex": jsonable_object(glued.apex, glued.space),
        "legs": {",".join(obj): jsonable_fn(fn)
                 for obj, fn in sorted(glued.legs.items())},
    }
    if glued.leg_props:
        out["leg_properties"] = {
            ",".join(obj): {k: props[k] for k in sorted(props)}
            for obj, props in sorted(glued.leg_props.items())}
    return out


def _glue_command(doc, flags):
    data = parse_gluing(doc.payload)
    side = flags.get("side") or ("colimit" if data.direction == FROM_OVERLAPS
                                 else "limit")
    verdicts = {}
    if side == "colimit":
        if data.direction != FROM_OVERLAPS:
            raise StructuralError("colimit gluing needs from-overlaps data")
        glued = colimit_glue(data)
        classes = {}
        for i in data.indexcat.index:
            for x in data.carrier((i,)):
                classes.setdefault(glued.legs[(i,)](x), []).append(
                    "%s%s%s" % (i, SEP, x))
        artifacts = {
            "glued": glued_object_to_json(glued),
            "classes": {k: sorted(v) for k, v in sorted(classes.items())},
        }
        if "delta" in doc.payload:
            node = doc.payload["delta"]
            comp = node["component"]
            if (comp,) not in data.objects:
                raise StructuralError("delta component %r is not an index "
                                      "element" % comp)
            carrier, v_space = parse_object(node["object"], data.ambient)
            into_comp = FinFn(carrier, data.carrier((comp,)), node["map"])
            delta = into_comp.then(glued.legs[(comp,)])
            report = universal_glue_check(data, glued, delta, v_space=v_space,
                                          cap=flags.get("cap"))
            verdicts["universal_glued"] = report["is_glued_up"]
    else:
        if data.direction != TOWARD_OVERLAPS:
            raise StructuralError("limit gluing needs toward-overlaps data")
        glued = limit_glue(data, cap=flags.get("cap"))
        artifacts = {"glued": glued_object_to_json(glued)}
    artifacts["apex_size"] = len(glued.apex)
    return verdicts, artifacts, {}


def _hom_command(doc, flags):
    data = parse_gluing(doc.payload)
    if "hom_target" not in doc.payload:
        raise StructuralError("hom needs a hom_target label list in the payload")
    z = FinSet(doc.payload["hom_target"])
    result = hom_transport(data, z, cap=flags.get("cap"))
    verdicts = {"bijection_verified": result["bijection_verified"]}
    artifacts = {"family_count": result["family_count"],
                 "hom_count": result["hom_count"]}
    return verdicts, artifacts, {}


def _check_effective_command(doc, flags):
    data = parse_gluing(doc.payload)
    report = effective_gluing_check(data, cap=flags.get("cap"))
    verdicts = {
        "congruence_and_injective": report.congruence_and_injective,
        "intersection_characterization": report.intersection_characterization,
        "strong_bijections": report.strong_bijections,
        "all_equivalent": report.all_equivalent(),
    }
    diagnostics = {
        "pairs": {",".join(pair): {k: d[k] for k in sorted(d)}
                  for pair, d in sorted(report.diagnostics["pairs"].items())},
        "legs": {i: d for i, d in sorted(report.diagnostics["legs"].items())},
    }
    artifacts = {"apex_size": len(report.glued.apex)}
    return verdicts, artifacts, diagnostics


def _check_cover_command(doc, flags):
    sink, tests, _ = parse_sink(doc.payload)
    report = universal_effective_epi_check(sink, tests, cap=flags.get("cap"))
    verdicts = {"effective": report["base"],
                "all_effective": report["all_effective"]}
    if "jointly_surjective" in report:
        verdicts["jointly_surjective"] = report["jointly_surjective"]
    diagnostics = {"per_test": report["per_test"]}
    return verdicts, {}, diagnostics


def _compose_command(doc, flags):
    sink, _, inner = parse_sink(doc.payload)
    if not inner:
        raise StructuralError("compose needs an 'inner' sink per source")
    result = compose_via_sinks(sink, inner, cap=flags.get("cap"))
    verdicts = {"is_glued_up": result["is_glued_up"]}
    flat = result["sink"]
    artifacts = {
        "flattened_sources": {name: jsonable_fn(fn)
                              for name, _, fn in flat.sources},
    }
    return verdicts, artifacts, {}


def _check_site_command(doc, flags):
    spec = parse_site(doc.payload)
    report = covering_axioms_check(spec, cap=flags.get("cap"))
    return ({"axioms_hold": report["ok"]}, {},
            {"violations": report["violations"]})


def _check_sheaf_command(doc, flags):
    space, store, coverings, _ = parse_presheaf(doc.payload)
    problems = validate_presheaf(store)
    if problems:
        raise StructuralError("invalid presheaf: " + "; ".join(problems))
    if coverings is None:
        if flags.get("covers") == "exhaustive":
            coverings = all_coverings(store.lattice, cap=flags.get("cap"))
        else:
            coverings = default_coverings(store.lattice)
    separated, sep_counter = is_separated(store, coverings,
                                          cap=flags.get("cap"))
    sheaf, sheaf_counter = is_sheaf(store, coverings, cap=flags.get("cap"))
    lat = store.lattice

    def describe(counter):
        if counter is None:
            return None
        out = {"open": lat.key(counter["open"]),
               "parts": [lat.key(p) for p in counter["parts"]]}
        if "sections" in counter:
            out["sections"] = list(counter["sections"])
        if "family" in counter:
            out["family"] = list(counter["family"])
        if "kind" in counter:
            out["kind"] = counter["kind"]
        return out

    return ({"separated": separated, "sheaf": sheaf}, {},
            {"separation_counterexample": describe(sep_counter),
             "sheaf_counterexample": describe(sheaf_counter)})


def _glue_sheaves_command(doc, flags):
    datum = parse_gluing_datum(doc.payload)
    glued, projections = glue_presheaves(datum, cap=flags.get("cap"))
    report = presheaf_effective_check(datum, glued, projections,
                                      cap=flags.get("cap"))
    lat = glued.lattice
    artifacts = {
        "sections": {lat.key(o): list(glued.sections[o].labels)
                     for o in lat.opens},
        "restrictions": {
            "%s>%s" % (lat.key(w), lat.key(v)): jsonable_fn(glued.res[(w, v)])
            for w, v in lat.pairs_below() if v != w},
    }
    verdicts = {
        "identity_ok": report["identity_ok"],
        "cocycle_ok": report["cocycle_ok"],
        "psi_restriction_bijective": report["psi_restriction_bijective"],
        "effectiveness_equivalence": report["equivalence_holds"],
    }
    return verdicts, artifacts, {}


def _glue_map_command(doc, flags):
    space, store, _, glue_map = parse_presheaf(doc.payload)
    if glue_map is None:
        raise StructuralError("glue-map needs a glue_map block in the payload")
    target = _parse_presheaf_body(glue_map["target"], space)
    charts = [(node["name"], frozenset(node["members"]))
              for node in glue_map["charts"]]
    parts = {}
    for name, members in charts:
        if name not in glue_map["parts"]:
            raise StructuralError("no part for chart %r" % name)
        sub_s = restrict(store, members)
        sub_t = restrict(target, members)
        sub_space = space.subspace(members)
        comps = {}
        for key, mapping in glue_map["parts"][name].items():
            o = _parse_openkey(key, sub_space)
            comps[o] = FinFn(sub_s.sections[o], sub_t.sections[o], mapping)
        parts[name] = NatTrans(sub_s, sub_t, comps)
    glued = glue_nat_trans(space, charts, store, target, parts,
                           cap=flags.get("cap"))
    lat = store.lattice
    artifacts = {"components": {lat.key(o): jsonable_fn(glued.at(o))
                                for o in lat.opens}}
    return {"glued": True}, artifacts, {}


def _refine_command(doc, flags):
    ref = parse_refinement(doc.payload)
    problems = validate_refinement(ref)
    verdicts = {"valid": not problems}
    artifacts = {}
    diagnostics = {"violations": problems}
    if not problems:
        if ref.source.direction == TOWARD_OVERLAPS:
            gs = limit_glue(ref.source, cap=flags.get("cap"))
            gt = limit_glue(ref.target, cap=flags.get("cap"))
        else:
            gs = colimit_glue(ref.source)
            gt = colimit_glue(ref.target)
        med = induced_limit_map(ref, gs, gt)
        artifacts["induced_map"] = jsonable_fn(med)
        artifacts["source_apex_size"] = len(gs.apex)
        artifacts["target_apex_size"] = len(gt.apex)
    return verdicts, artifacts, diagnostics


_HANDLERS = {
    "glue": _glue_command,
    "hom": _hom_command,
    "check-effective": _check_effective_command,
    "check-cover": _check_cover_command,
    "compose": _compose_command,
    "check-site": _check_site_command,
    "check-sheaf": _check_sheaf_command,
    "glue-sheaves": _glue_sheaves_command,
    "glue-map": _glue_map_command,
    "refine": _refine_command,
}


def execute(command, doc, flags=None):
    """Dispatch a command against a loaded document; returns the report."""
    flags = dict(flags or {})
    if command not in _HANDLERS:
        raise StructuralError("unknown command %r" % command)
    expected = COMMAND_KINDS[command]
    if doc.kind != expected:
        raise StructuralError("command %r needs a %r document, got %r"
                              % (command, expected, doc.kind))
    if flags.get("ambient") and doc.payload.get("ambient") \
            and flags["ambient"] != doc.payload["ambient"]:
        raise StructuralError("--ambient %s contradicts the document ambient %s"
                              % (flags["ambient"], doc.payload["ambient"]))
    verdicts, artifacts, diagnostics = _HANDLERS[command](doc, flags)
    return {
        "command": command,
        "verdicts": verdicts,
        "artifacts": artifacts,
        "diagnostics": diagnostics,
    }


def report_exit_code(report):
    verdicts = report["verdicts"]
    return 0 if all(bool(v) for v in verdicts.values()) else 1


def render_report(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="glueforge",
        description="finite gluing engine: glued-up objects, effectiveness, "
                    "covering and sheaf checks over JSON documents")
    parser.add_argument("command", choices=sorted(_HANDLERS))
    parser.add_argument("--input", help="input document (default: stdin)")
    parser.add_argument("--side", choices=["colimit", "limit"])
    parser.add_argument("--cap", type=int,
                        default=int(os.environ.get("GLUEFORGE_CAP",
                                                   DEFAULT_CAP)))
    parser.add_argument("--ambient", choices=["sets", "top"])
    parser.add_argument("--covers", choices=["default", "exhaustive"],
                        default="default")
    parser.add_argument("--output", help="write the report here instead of "
                                         "stdout")
    args = parser.parse_args(argv)
    flags = {"side": args.side, "cap": args.cap, "ambient": args.ambient,
             "covers": args.covers}
    try:
        doc = load_document(args.input if args.input else sys.stdin)
        report = execute(args.command, doc, flags)
    except (GlueforgeError, OSError) as err:
        kind = "resource" if isinstance(err, ResourceError) else "structural"
        sys.stderr.write("glueforge: %s error: %s\n" % (kind, err))
        return 2
    text = render_report(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return report_exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
