"""Refinement morphisms between gluing functors, the induced maps between
their glued-up objects, and composition of gluings (both the meta route over
node functors with concrete overlap identifications, and the sink route of
flattening covers of covers)."""

from .errors import StructuralError
from .fincat import SEP, FinFn, FinSet, quotient_by_pairs, tag
from .gluing import (
    FROM_OVERLAPS,
    TOWARD_OVERLAPS,
    GluedObject,
    GluingData,
    colimit_glue,
    colimit_relation_pairs,
    validate_gluing_data,
)
from .indexcat import NONSPLIT
from .site import Sink, canonical_sink_functor, effective_epi_check


class Refinement:
    """A map of index sets plus a natural family of component maps from the
    reindexed refining functor to the refined one.

    ``source`` is the refining functor (index set J), ``target`` the refined
    functor (index set I), ``gamma`` a map I -> J, and ``components`` assigns
    to every index object ``a`` of the target a map from the source carrier
    at the reindexed object to the target carrier at ``a``.
    """

    __slots__ = ("source", "target", "gamma", "components")

    def __init__(self, source, target, gamma, components):
        if source.indexcat.mode != NONSPLIT or target.indexcat.mode != NONSPLIT:
            raise StructuralError("refinements connect nonsplit gluing data")
        if source.direction != target.direction:
            raise StructuralError("refinement endpoints disagree on direction")
        if source.ambient != target.ambient:
            raise StructuralError("refinement endpoints disagree on ambient")
        if gamma.domain != target.indexcat.index \
                or gamma.codomain != source.indexcat.index:
            raise StructuralError("gamma must map the target index set into "
                                  "the source index set")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "components", dict(components))

    def __setattr__(self, name, value):
        raise AttributeError("Refinement is immutable")

    def reindexed(self, obj):
        """The source index object under the induced functor of gamma."""
        if len(obj) == 1:
            return (self.gamma(obj[0]),)
        gi, gj = self.gamma(obj[0]), self.gamma(obj[1])
        return (gi,) if gi == gj else self.source.indexcat.pair(gi, gj)

    def source_edge(self, i, pair_obj):
        """The source arrow matching the target inclusion i -> pair, after
        reindexing; the identity when the pair collapses."""
        gi = self.gamma(i)
        robj = self.reindexed(pair_obj)
        if len(robj) == 1:
            return FinFn.identity(self.source.carrier((gi,)))
        return self.source.edge(gi, robj)


def identity_refinement(data):
    comps = {obj: FinFn.identity(data.carrier(obj))
             for obj in data.indexcat.objects}
    return Refinement(data, data, FinFn.identity(data.indexcat.index), comps)


def validate_refinement(ref):
    """Every missing component, endpoint clash, or failed naturality square."""
    problems = []
    tcat = ref.target.indexcat
    for obj in tcat.objects:
        if obj not in ref.components:
            problems.append("no component at %r" % (obj,))
            continue
        comp = ref.components[obj]
        want_dom = ref.source.carrier(ref.reindexed(obj))
        want_cod = ref.target.carrier(obj)
        if comp.domain != want_dom or comp.codomain != want_cod:
            problems.append("component at %r has endpoints %r -> %r, expected "
                            "%r -> %r" % (obj, list(comp.domain),
                                          list(comp.codomain),
                                          list(want_dom), list(want_cod)))
    if problems:
        return problems
    for g in tcat.generators:
        _, i, pair_obj = g
        comp_i = ref.components[(i,)]
        comp_pair = ref.components[pair_obj]
        src_edge = ref.source_edge(i, pair_obj)
        tgt_edge = ref.target.arrow(g)
        if ref.target.direction == TOWARD_OVERLAPS:
            lhs = comp_i.then(tgt_edge)
            rhs = src_edge.then(comp_pair)
        else:
            lhs = src_edge.then(comp_i)
            rhs = comp_pair.then(tgt_edge)
        if lhs != rhs:
            problems.append("naturality square at %r does not commute" % (g,))
    return problems


def compose_refinements(outer, inner):
    """The composite refinement applying ``inner`` first, then ``outer``;
    gammas compose the other way around."""
    if inner.target is not outer.source and inner.target != outer.source:
        raise StructuralError("refinements are not composable")
    gamma = outer.gamma.then(inner.gamma)
    comps = {}
    for obj in outer.target.indexcat.objects:
        mid = outer.reindexed(obj)
        comps[obj] = inner.components[mid].then(outer.components[obj])
    return Refinement(inner.source, outer.target, gamma, comps)


def induced_limit_map(ref, glued_source, glued_target):
    """The canonical map between glued-up objects induced by a refinement.

    Limit side: a compatible source family is reindexed along gamma and pushed
    through the components.  Colimit side: the dual assignment on classes,
    checked to be total and well defined.  Commutation with every leg is
    verified exhaustively.
    """
    problems = validate_refinement(ref)
    if problems:
        raise StructuralError("invalid refinement: " + "; ".join(problems))
    tcat = ref.target.indexcat
    tcomps = [obj[0] for obj in tcat.singletons()]
    if ref.target.direction == TOWARD_OVERLAPS:
        mapping = {}
        for x in glued_source.apex:
            values = []
            for i in tcomps:
                s_gi = glued_source.legs[(ref.gamma(i),)](x)
                values.append(ref.components[(i,)](s_gi))
            label = SEP.join(values)
            if label not in glued_target.apex:
                raise StructuralError(
                    "induced family %r is not compatible in the target" % label)
            mapping[x] = label
        med = FinFn(glued_source.apex, glued_target.apex, mapping)
        for i in tcomps:
            lhs = med.then(glued_target.legs[(i,)])
            rhs = glued_source.legs[(ref.gamma(i),)].then(ref.components[(i,)])
            if lhs != rhs:
                raise StructuralError("induced map fails the leg square at %r"
                                      % i)
        return med
    mapping = {}
    for i in tcomps:
        gi = ref.gamma(i)
        comp = ref.components[(i,)]
        for x in ref.source.carrier((gi,)):
            cls = glued_source.legs[(gi,)](x)
            val = glued_target.legs[(i,)](comp(x))
            if mapping.setdefault(cls, val) != val:
                raise StructuralError(
                    "induced class map is not well defined at %r" % cls)
    missing = [c for c in glued_source.apex if c not in mapping]
    if missing:
        raise StructuralError(
            "induced class map is undefined on classes %r; gamma does not "
            "reach them" % missing)
    med = FinFn(glued_source.apex, glued_target.apex, mapping)
    for i in tcomps:
        lhs = glued_source.legs[(ref.gamma(i),)].then(med)
        rhs = ref.components[(i,)].then(glued_target.legs[(i,)])
        if lhs != rhs:
            raise StructuralError("induced map fails the leg square at %r" % i)
    return med


class MetaGluingData:
    """A family of colimit-side node functors with concrete overlap data:
    lists of identifications between elements of node components."""

    __slots__ = ("index", "nodes", "overlaps")

    def __init__(self, index, nodes, overlaps):
        index = list(index)
        nodes = dict(nodes)
        overlaps = {k: list(v) for k, v in overlaps.items()}
        for i in index:
            if i not in nodes:
                raise StructuralError("no node functor for %r" % i)
        for (i, j), idents in overlaps.items():
            if i not in nodes or j not in nodes:
                raise StructuralError("overlap (%r, %r) mentions unknown nodes"
                                      % (i, j))
            for (a, x), (b, y) in idents:
                if x not in nodes[i].carrier(a):
                    raise StructuralError(
                        "overlap entry %r is not in node %r component %r"
                        % (x, i, a))
                if y not in nodes[j].carrier(b):
                    raise StructuralError(
                        "overlap entry %r is not in node %r component %r"
                        % (y, j, b))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "overlaps", overlaps)

    def __setattr__(self, name, value):
        raise AttributeError("MetaGluingData is immutable")

    def validate(self):
        problems = []
        for i in self.index:
            if self.nodes[i].direction != FROM_OVERLAPS:
                problems.append("node %r is not colimit-side data" % i)
                continue
            problems.extend("node %s: %s" % (i, p)
                            for p in validate_gluing_data(self.nodes[i]))
        return problems


def _meta_tag(node, comp, x):
    return tag(node, tag(SEP.join(comp), x))


def compose_gluings(meta):
    """Glue the flattened diagram of all node components at once.

    The result equals the two-stage gluing (each node first, then the node
    apexes along the overlap identifications); the agreement of the two class
    partitions is verified before returning.
    """
    problems = meta.validate()
    if problems:
        raise StructuralError("invalid meta gluing data: " + "; ".join(problems))
    elements = []
    for i in meta.index:
        node = meta.nodes[i]
        for comp_obj in node.indexcat.singletons():
            for x in node.carrier(comp_obj):
                elements.append(_meta_tag(i, comp_obj, x))
    coproduct = FinSet(elements)
    pairs = []
    for i in meta.index:
        node = meta.nodes[i]
        for a, b in colimit_relation_pairs(node):
            ai, ax = a.split(SEP, 1)
            bi, bx = b.split(SEP, 1)
            pairs.append((_meta_tag(i, (ai,), ax), _meta_tag(i, (bi,), bx)))
    for (i, j), idents in meta.overlaps.items():
        for (a, x), (b, y) in idents:
            pairs.append((_meta_tag(i, a, x), _meta_tag(j, b, y)))
    apex, pi = quotient_by_pairs(coproduct, pairs)
    legs = {}
    for i in meta.index:
        node = meta.nodes[i]
        for comp_obj in node.indexcat.singletons():
            carrier = node.carrier(comp_obj)
            legs[(i, comp_obj)] = FinFn(
                carrier, apex, {x: pi(_meta_tag(i, comp_obj, x))
                                for x in carrier})

    # two-stage verification: node gluings first, then the apexes
    node_glued = {i: colimit_glue(meta.nodes[i]) for i in meta.index}
    stage2_elems = [tag(i, c) for i in meta.index
                    for c in node_glued[i].apex]
    stage2_pairs = []
    for (i, j), idents in meta.overlaps.items():
        for (a, x), (b, y) in idents:
            stage2_pairs.append((tag(i, node_glued[i].legs[a](x)),
                                 tag(j, node_glued[j].legs[b](y))))
    apex2, pi2 = quotient_by_pairs(FinSet(stage2_elems), stage2_pairs)

    def flat_class(i, comp_obj, x):
        return pi(_meta_tag(i, comp_obj, x))

    def staged_class(i, comp_obj, x):
        return pi2(tag(i, node_glued[i].legs[comp_obj](x)))

    flat_to_staged = {}
    for i in meta.index:
        node = meta.nodes[i]
        for comp_obj in node.indexcat.singletons():
            for x in node.carrier(comp_obj):
                f = flat_class(i, comp_obj, x)
                s = staged_class(i, comp_obj, x)
                if flat_to_staged.setdefault(f, s) != s:
                    raise StructuralError(
                        "flattened and two-stage gluings disagree at %r" % f)
    if len(set(flat_to_staged.values())) != len(apex2):
        raise StructuralError("flattened and two-stage gluings have different "
                              "class counts")
    witness = {"coproduct": coproduct, "projection": pi,
               "stage_apexes": {i: node_glued[i].apex for i in meta.index},
               "two_stage_apex": apex2}
    return GluedObject("colimit", apex, None, legs, {}, witness)


def compose_via_sinks(outer, inner, cap=None):
    """Flatten an outer sink with one inner sink per source and report.

    Returns the flattened sink, the canonical split gluing functor of the
    flattened sink, and whether the outer target is its glued-up object.
    """
    sources = []
    for name, obj, fn in outer.sources:
        if name not in inner:
            raise StructuralError("no inner sink for source %r" % name)
        sub = inner[name]
        carrier = obj.carrier if hasattr(obj, "carrier") else obj
        if sub.target != carrier:
            raise StructuralError("inner sink for %r does not target that "
                                  "source" % name)
        if outer.ambient == "top" and sub.target_space != obj:
            raise StructuralError("inner sink for %r carries a different "
                                  "topology" % name)
        for sub_name, sub_obj, sub_fn in sub.sources:
            sources.append(("%s.%s" % (name, sub_name), sub_obj,
                            sub_fn.then(fn)))
    flattened = Sink(outer.ambient, outer.target, sources,
                     target_space=outer.target_space)
    data = canonical_sink_functor(flattened, cap=cap)
    return {
        "sink": flattened,
        "data": data,
        "is_glued_up": effective_epi_check(flattened, cap=cap),
    }
