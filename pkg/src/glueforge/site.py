"""Sinks, canonical gluing functors of sinks, base change, effective
epimorphism decisions, and the effectiveness criteria for split colimit-side
gluing data.

The universal quantifiers in the effective-epimorphism definitions are not
enumerable, so the decision procedures here use the mediating-map criterion
(the target is the glued-up object of the canonical functor) together with a
finite, caller-supplied family of base-change test maps; in the set ambient
joint surjectivity is recorded as the complete closed form.
"""

from itertools import permutations, product as iproduct

from .errors import StructuralError
from .fincat import (
    FinFn,
    FinSet,
    FinTop,
    TopMap,
    map_properties,
    pair_label,
    pullback,
    tag,
    top_pullback,
)
from .gluing import (
    FROM_OVERLAPS,
    ConeCandidate,
    GluingData,
    colimit_glue,
    colimit_relation_pairs,
    mediating_map,
    validate_gluing_data,
)
from .indexcat import SPLIT, IndexCat


class Sink:
    """A target object together with a finite family of maps into it."""

    __slots__ = ("ambient", "target", "target_space", "sources")

    def __init__(self, ambient, target, sources, target_space=None):
        if ambient not in ("sets", "top"):
            raise StructuralError("ambient must be 'sets' or 'top'")
        if ambient == "top" and target_space is None:
            raise StructuralError("top sinks need a target space")
        checked = []
        names = set()
        for entry in sources:
            name, obj, fn = entry
            if name in names:
                raise StructuralError("duplicate source name %r" % name)
            names.add(name)
            carrier = obj.carrier if isinstance(obj, FinTop) else obj
            if fn.domain != carrier or fn.codomain != target:
                raise StructuralError("source %r does not map into the target"
                                      % name)
            if ambient == "top":
                if not isinstance(obj, FinTop):
                    raise StructuralError("top sinks need source spaces")
                TopMap(fn, obj, target_space)
            checked.append((name, obj, fn))
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "target_space", target_space)
        object.__setattr__(self, "sources", tuple(checked))

    def __setattr__(self, name, value):
        raise AttributeError("Sink is immutable")

    def names(self):
        return [name for name, _, _ in self.sources]

    def source(self, name):
        for n, obj, fn in self.sources:
            if n == name:
                return obj, fn
        raise StructuralError("no source named %r" % name)

    def carrier(self, name):
        obj, _ = self.source(name)
        return obj.carrier if isinstance(obj, FinTop) else obj

    def space(self, name):
        obj, _ = self.source(name)
        if not isinstance(obj, FinTop):
            raise StructuralError("source %r carries no topology" % name)
        return obj

    def jointly_surjective(self):
        hit = set()
        for _, _, fn in self.sources:
            hit.update(fn.mapping.values())
        return hit == set(self.target.labels)


def canonical_sink_functor(sink, cap=None):
    """The split colimit-side gluing functor of a sink: components are the
    sources, overlaps are the fibered products over the target, the swap
    arrows are the canonical pullback symmetries."""
    names = sink.names()
    cat = IndexCat(SPLIT, FinSet(names))
    objects = {}
    spaces = {}
    arrows = {}
    pblegs = {}
    for i in names:
        objects[(i,)] = sink.carrier(i)
        if sink.ambient == "top":
            spaces[(i,)] = sink.space(i)
    for i in names:
        for j in names:
            _, fi = sink.source(i)
            _, fj = sink.source(j)
            if sink.ambient == "top":
                ps = top_pullback(fi, fj, sink.space(i), sink.space(j),
                                  sink.target_space, cap=cap)
                spaces[(i, j)] = ps.space
            else:
                ps = pullback(fi, fj, cap=cap)
            objects[(i, j)] = ps.members
            pblegs[(i, j)] = ps.legs
            arrows[("incl", i, (i, j))] = ps.legs["p1"]
    for i in names:
        for j in names:
            src = objects[(i, j)]
            dst = objects[(j, i)]
            mapping = {}
            for lab in src:
                a = pblegs[(i, j)]["p1"](lab)
                b = pblegs[(i, j)]["p2"](lab)
                mapping[lab] = pair_label(b, a)
            # stored at the generator whose source is (j, i): the ambient map
            # G(i,j) -> G(j,i) realizing the swap
            arrows[("tau", (j, i))] = FinFn(src, dst, mapping)
    return GluingData(cat, sink.ambient, objects, arrows, FROM_OVERLAPS,
                      spaces or None)


def base_change_sink(sink, fn, v_space=None, cap=None):
    """The sink over the source of ``fn`` with the pulled-back family."""
    if fn.codomain != sink.target:
        raise StructuralError("base change map must land in the sink target")
    if sink.ambient == "top" and v_space is None:
        raise StructuralError("top base change needs a topology on the source")
    sources = []
    for name, obj, leg in sink.sources:
        if sink.ambient == "top":
            ps = top_pullback(leg, fn, obj, v_space, sink.target_space, cap=cap)
            sources.append((name, ps.space, ps.legs["p2"]))
        else:
            ps = pullback(leg, fn, cap=cap)
            sources.append((name, ps.members, ps.legs["p2"]))
    return Sink(sink.ambient, fn.domain, sources,
                target_space=v_space if sink.ambient == "top" else None)


def base_change_functor(sink, fn, v_space=None, cap=None):
    """The canonical functor of the sink with every object pulled back along
    ``fn`` and every arrow paired with the identity of its source."""
    return canonical_sink_functor(
        base_change_sink(sink, fn, v_space=v_space, cap=cap), cap=cap)


def _target_cone(sink, data):
    legs = {}
    for i in sink.names():
        _, fn = sink.source(i)
        legs[(i,)] = fn
    for pair_obj in data.indexcat.pairs():
        i = pair_obj[0]
        legs[pair_obj] = data.edge(i, pair_obj).then(legs[(i,)])
    return ConeCandidate(sink.target, legs,
                         space=sink.target_space if sink.ambient == "top"
                         else None)


def effective_epi_check(sink, cap=None):
    """Whether the family is an effective epimorphism: the target, with its
    own maps as legs, is the glued-up object of the canonical functor."""
    data = canonical_sink_functor(sink, cap=cap)
    glued = colimit_glue(data)
    _, iso = mediating_map(data, glued, _target_cone(sink, data))
    return iso


def universal_effective_epi_check(sink, tests=(), cap=None):
    """Effectiveness after base change along each supplied test map.

    The report carries the base verdict, one verdict per test map, and in the
    set ambient the closed-form criterion (joint surjectivity), which decides
    effectiveness under arbitrary base change there.
    """
    report = {
        "base": effective_epi_check(sink, cap=cap),
        "per_test": [],
    }
    if sink.ambient == "sets":
        report["jointly_surjective"] = sink.jointly_surjective()
    for entry in tests:
        if sink.ambient == "top":
            fn, v_space = entry
        else:
            fn, v_space = entry, None
        changed = base_change_sink(sink, fn, v_space=v_space, cap=cap)
        report["per_test"].append({
            "map_domain": list(fn.domain.labels),
            "effective": effective_epi_check(changed, cap=cap),
        })
    report["all_effective"] = report["base"] and all(
        t["effective"] for t in report["per_test"])
    return report


class EffectivenessReport:
    """Independently computed flags for the three effectiveness readings of a
    split colimit-side gluing functor, plus per-pair diagnostics."""

    __slots__ = ("congruence_and_injective", "intersection_characterization",
                 "strong_bijections", "diagnostics", "glued")

    def __init__(self, c2, c3, c4, diagnostics, glued):
        object.__setattr__(self, "congruence_and_injective", c2)
        object.__setattr__(self, "intersection_characterization", c3)
        object.__setattr__(self, "strong_bijections", c4)
        object.__setattr__(self, "diagnostics", diagnostics)
        object.__setattr__(self, "glued", glued)

    def __setattr__(self, name, value):
        raise AttributeError("EffectivenessReport is immutable")

    def flags(self):
        return (self.congruence_and_injective,
                self.intersection_characterization,
                self.strong_bijections)

    def all_equivalent(self):
        return len(set(self.flags())) == 1


def _is_embedding_or_injective(data, fn, src_obj, dst_obj):
    if data.ambient == "top":
        rep = map_properties(TopMap(fn, data.space(src_obj), data.space(dst_obj)))
        return rep["embedding"]
    return fn.is_injective()


def effective_gluing_check(data, cap=None):
    """The three readings of effectiveness, evaluated independently.

    Congruence reading: the generated identification relation, symmetrized
    and with the diagonal added, is already transitive, and every
    overlap-to-component arrow is injective (a topological embedding in the
    top ambient).  Intersection reading: inside the glued object, the image
    of each overlap is exactly the intersection of the component images, and
    both the component legs and the overlap arrows are injective
    (embeddings).  Strong reading: for distinct indices the canonical
    comparison from each overlap to the fibered product of the two
    components over the glued object is a bijection (homeomorphism), with
    injective (embedded) overlap arrows.  Surjectivity of the overlap arrows
    onto their components is recorded per pair as the diagnostic
    ``edge_onto_component`` and does not enter the flags: in these ambients
    every map is a regular quotient onto its image.
    """
    if data.indexcat.mode != SPLIT:
        raise StructuralError("effectiveness is defined for split data")
    problems = validate_gluing_data(data)
    if problems:
        raise StructuralError("invalid gluing data: " + "; ".join(problems))
    cat = data.indexcat
    names = [obj[0] for obj in cat.singletons()]
    glued = colimit_glue(data)

    rel = set()
    for a, b in colimit_relation_pairs(data):
        rel.add((a, b))
        rel.add((b, a))
    for i in names:
        for x in data.carrier((i,)):
            rel.add((tag(i, x), tag(i, x)))
    transitive = all((a, d) in rel
                     for (a, b) in rel for (c, d) in rel if b == c)

    diagnostics = {"pairs": {}, "legs": {}}
    edge_emb = {}
    for pair_obj in cat.pairs():
        i, j = pair_obj
        e = data.edge(i, pair_obj)
        edge_emb[pair_obj] = _is_embedding_or_injective(data, e, pair_obj, (i,))
    leg_inj = {}
    for i in names:
        leg = glued.legs[(i,)]
        if data.ambient == "top":
            rep = map_properties(TopMap(leg, data.space((i,)), glued.space))
            leg_inj[i] = rep["embedding"]
        else:
            leg_inj[i] = leg.is_injective()
        diagnostics["legs"][i] = {"leg_embeds": leg_inj[i]}

    intersection_ok = {}
    canonical_bij = {}
    for pair_obj in cat.pairs():
        i, j = pair_obj
        e = data.edge(i, pair_obj)
        leg_i, leg_j = glued.legs[(i,)], glued.legs[(j,)]
        edge_image = {leg_i(e(u)) for u in data.carrier(pair_obj)}
        both = ({leg_i(x) for x in data.carrier((i,))}
                & {leg_j(y) for y in data.carrier((j,))})
        intersection_ok[pair_obj] = edge_image == both

        t = data.tau_from((j, i))
        into_j = t.then(data.edge(j, (j, i)))
        if data.ambient == "top":
            ps = top_pullback(leg_i, leg_j, data.space((i,)), data.space((j,)),
                              glued.space, cap=cap)
        else:
            ps = pullback(leg_i, leg_j, cap=cap)
        mapping = {u: pair_label(e(u), into_j(u)) for u in data.carrier(pair_obj)}
        try:
            canonical = FinFn(data.carrier(pair_obj), ps.members, mapping)
        except StructuralError:
            canonical_bij[pair_obj] = False
        else:
            bij = canonical.is_injective() and canonical.is_surjective()
            if bij and data.ambient == "top":
                fwd = TopMap(canonical, data.space(pair_obj), ps.space)
                bij = fwd.open
            canonical_bij[pair_obj] = bij
        diagnostics["pairs"][pair_obj] = {
            "edge_embeds": edge_emb[pair_obj],
            "edge_onto_component": e.is_surjective(),
            "intersection_ok": intersection_ok[pair_obj],
            "canonical_bijective": canonical_bij[pair_obj],
        }

    c2 = transitive and all(edge_emb.values())
    c3 = (all(intersection_ok.values()) and all(leg_inj.values())
          and all(edge_emb.values()))
    distinct = [p for p in cat.pairs() if p[0] != p[1]]
    c4 = (all(canonical_bij[p] for p in distinct)
          and all(edge_emb[p] for p in distinct))
    return EffectivenessReport(c2, c3, c4, diagnostics, glued)


class SiteSpec:
    """An explicitly declared fragment of a Grothendieck topology: a list of
    coverings and a list of morphisms available for base change."""

    __slots__ = ("ambient", "coverings", "morphisms")

    def __init__(self, ambient, coverings, morphisms):
        for s in coverings:
            if s.ambient != ambient:
                raise StructuralError("covering ambient mismatch")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "coverings", tuple(coverings))
        object.__setattr__(self, "morphisms", tuple(morphisms))

    def __setattr__(self, name, value):
        raise AttributeError("SiteSpec is immutable")

    def morphism_parts(self, entry):
        if self.ambient == "top":
            return entry.fn, entry.dom, entry.cod
        return entry, None, None


def _source_profile(fn, target):
    fibers = {}
    for x in fn.domain:
        fibers.setdefault(fn.mapping[x], 0)
        fibers[fn.mapping[x]] += 1
    return tuple(sorted((u, fibers.get(u, 0)) for u in target.labels))


def _fibered_iso_exists(obj_a, fn_a, obj_b, fn_b, ambient):
    if _source_profile(fn_a, fn_a.codomain) != _source_profile(fn_b, fn_b.codomain):
        return False
    if ambient == "sets":
        return True
    fibers_a = {}
    fibers_b = {}
    for x in fn_a.domain:
        fibers_a.setdefault(fn_a.mapping[x], []).append(x)
    for x in fn_b.domain:
        fibers_b.setdefault(fn_b.mapping[x], []).append(x)

    def assemble(keys, acc):
        if not keys:
            h = FinFn(fn_a.domain, fn_b.domain, acc)
            try:
                fwd = TopMap(h, obj_a, obj_b)
            except StructuralError:
                return False
            return fwd.open and h.is_injective() and h.is_surjective()
        u, rest = keys[0], keys[1:]
        fa = fibers_a.get(u, [])
        fb = fibers_b.get(u, [])
        for perm in permutations(fb):
            acc2 = dict(acc)
            acc2.update(zip(fa, perm))
            if assemble(rest, acc2):
                return True
        return False

    return assemble(list(fibers_a.keys()), {})


def sinks_equivalent(a, b):
    """Whether two sinks agree up to a bijection of their source families
    and fibered isomorphisms of the sources."""
    if a.ambient != b.ambient or a.target != b.target:
        return False
    if a.ambient == "top" and a.target_space != b.target_space:
        return False
    if len(a.sources) != len(b.sources):
        return False
    remaining = list(b.sources)

    def match(sources):
        if not sources:
            return True
        name, obj, fn = sources[0]
        for k, (_, obj2, fn2) in enumerate(remaining):
            if _fibered_iso_exists(obj, fn, obj2, fn2, a.ambient):
                kept = remaining.pop(k)
                if match(sources[1:]):
                    remaining.insert(k, kept)
                    return True
                remaining.insert(k, kept)
        return False

    return match(list(a.sources))


def _declared(spec, sink):
    return any(sinks_equivalent(sink, c) for c in spec.coverings)


def covering_axioms_check(spec, cap=None):
    """Checks the identity, composability, and base-change axioms on the
    declared fragment; every violation is named in the report."""
    violations = []
    for entry in spec.morphisms:
        fn, dom_space, cod_space = spec.morphism_parts(entry)
        if fn.is_injective() and fn.is_surjective():
            if spec.ambient == "top":
                fwd = TopMap(fn, dom_space, cod_space)
                if not fwd.open:
                    continue
                single = Sink("top", fn.codomain, [("v", dom_space, fn)],
                              target_space=cod_space)
            else:
                single = Sink("sets", fn.codomain, [("v", fn.domain, fn)])
            if not _declared(spec, single):
                violations.append(
                    "isomorphism sink onto %r is not declared"
                    % (list(fn.codomain.labels),))
    for cov in spec.coverings:
        options = []
        for name, obj, fn in cov.sources:
            carrier = obj.carrier if isinstance(obj, FinTop) else obj
            refinements = [c for c in spec.coverings if c.target == carrier]
            options.append((name, refinements))
        if any(not refs for _, refs in options):
            continue
        # enumerate all compatible families of declared refinements
        for combo in iproduct(*[refs for _, refs in options]):
            sources = []
            for (name, refinement) in zip(cov.names(), combo):
                _, outer_fn = cov.source(name)
                for rname, robj, rfn in refinement.sources:
                    sources.append(("%s.%s" % (name, rname), robj,
                                    rfn.then(outer_fn)))
            flattened = Sink(spec.ambient, cov.target, sources,
                             target_space=cov.target_space)
            if not _declared(spec, flattened):
                violations.append(
                    "composite of covering of %r is not declared"
                    % (list(cov.target.labels),))
    for cov in spec.coverings:
        for entry in spec.morphisms:
            fn, dom_space, cod_space = spec.morphism_parts(entry)
            if fn.codomain != cov.target:
                continue
            changed = base_change_sink(cov, fn, v_space=dom_space, cap=cap)
            if not _declared(spec, changed):
                violations.append(
                    "base change of a covering of %r along a map from %r "
                    "is not declared" % (list(cov.target.labels),
                                         list(fn.domain.labels)))
    return {"violations": violations, "ok": not violations}
