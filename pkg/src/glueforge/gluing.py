"""Gluing functors over (split) truncated power-set categories and their
glued-up objects.

A ``GluingData`` stores a functor into the ambient category on objects and
generating arrows.  Arrows are kept as plain maps of the ambient category,
with the orientation fixed by ``direction``:

* ``from-overlaps`` (colimit side, the functor lands in the opposite
  category): the arrow stored for a generator ``a -> b`` is the ambient map
  ``G(b) -> G(a)``, e.g. an overlap ``G(i,j)`` maps down into its component
  ``G(i)``.  The glued-up object is the quotient of the disjoint union of the
  components by the congruence closure of the overlap identifications.

* ``toward-overlaps`` (limit side): the arrow for ``a -> b`` is the ambient
  map ``G(a) -> G(b)``.  The glued-up object is the set of compatible
  families inside the product of the components.

In the topological ambient the colimit apex carries the final topology over
its legs and the limit apex the initial topology; openness of legs is
computed, never assumed.
"""

from itertools import product as iproduct

from .errors import StructuralError, check_cap
from .fincat import (
    SEP,
    FinFn,
    FinSet,
    TopMap,
    equalizer,
    induce_topology,
    map_properties,
    product_enumerate,
    pullback,
    quotient_by_pairs,
    tag,
    top_pullback,
)
from .indexcat import NONSPLIT, SPLIT, gen_endpoints

FROM_OVERLAPS = "from-overlaps"
TOWARD_OVERLAPS = "toward-overlaps"


class GluingData:
    """A functor from an index category into finite sets or finite spaces."""

    __slots__ = ("indexcat", "ambient", "objects", "arrows", "direction", "spaces")

    def __init__(self, indexcat, ambient, objects, arrows, direction, spaces=None):
        if ambient not in ("sets", "top"):
            raise StructuralError("ambient must be 'sets' or 'top'")
        if direction not in (FROM_OVERLAPS, TOWARD_OVERLAPS):
            raise StructuralError("direction must be %r or %r"
                                  % (FROM_OVERLAPS, TOWARD_OVERLAPS))
        objects = dict(objects)
        arrows = dict(arrows)
        spaces = dict(spaces) if spaces else {}
        if indexcat.mode == SPLIT:
            self._fill_split_defaults(indexcat, objects, arrows, spaces, direction)
        object.__setattr__(self, "indexcat", indexcat)
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "spaces", spaces)

    def __setattr__(self, name, value):
        raise AttributeError("GluingData is immutable")

    @staticmethod
    def _fill_split_defaults(cat, objects, arrows, spaces, direction):
        # classical split data: a missing diagonal object is the component
        # itself with identity structure, and tau on the diagonal defaults to
        # the identity involution
        for i in cat.index:
            diag = (i, i)
            if diag not in objects:
                if (i,) not in objects:
                    continue
                objects[diag] = objects[(i,)]
                if (i,) in spaces:
                    spaces[diag] = spaces[(i,)]
                arrows.setdefault(("incl", i, diag), FinFn.identity(objects[(i,)]))
            arrows.setdefault(("tau", diag), FinFn.identity(objects[diag]))

    def carrier(self, obj):
        try:
            return self.objects[obj]
        except KeyError:
            raise StructuralError("no carrier assigned to index object %r" % (obj,))

    def space(self, obj):
        if self.ambient != "top":
            raise StructuralError("spaces exist only in the top ambient")
        try:
            return self.spaces[obj]
        except KeyError:
            raise StructuralError("no space assigned to index object %r" % (obj,))

    def arrow(self, key):
        try:
            return self.arrows[key]
        except KeyError:
            raise StructuralError("no arrow assigned to generator %r" % (key,))

    def edge(self, i, pair):
        """The stored map between component i and the overlap ``pair``."""
        return self.arrow(("incl", i, pair))

    def tau_from(self, pair):
        """The stored map attached to the swap generator with source ``pair``."""
        return self.arrow(("tau", pair))

    def expected_endpoints(self, key):
        src, dst = gen_endpoints(key)
        if self.direction == FROM_OVERLAPS:
            src, dst = dst, src
        return self.carrier(src), self.carrier(dst)


def validate_gluing_data(data):
    """Every violated endpoint, continuity, or involution law, as strings."""
    problems = []
    cat = data.indexcat
    for obj in cat.objects:
        if obj not in data.objects:
            problems.append("index object %r has no carrier" % (obj,))
        elif data.ambient == "top":
            if obj not in data.spaces:
                problems.append("index object %r has no topology" % (obj,))
            elif data.spaces[obj].carrier != data.objects[obj]:
                problems.append("topology of %r disagrees with its carrier" % (obj,))
    if problems:
        return problems
    for g in cat.generators:
        if g not in data.arrows:
            problems.append("generator %r has no arrow" % (g,))
            continue
        fn = data.arrows[g]
        dom, cod = data.expected_endpoints(g)
        if fn.domain != dom or fn.codomain != cod:
            problems.append("arrow for %r has endpoints %r -> %r, expected %r -> %r"
                            % (g, list(fn.domain), list(fn.codomain),
                               list(dom), list(cod)))
    if problems:
        return problems
    if data.ambient == "top":
        for g in cat.generators:
            fn = data.arrows[g]
            src, dst = gen_endpoints(g)
            if data.direction == FROM_OVERLAPS:
                src, dst = dst, src
            try:
                TopMap(fn, data.spaces[src], data.spaces[dst])
            except StructuralError:
                problems.append("arrow for %r is not continuous" % (g,))
    if cat.mode == SPLIT:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            t1 = data.arrows[("tau", (i, j))]
            t2 = data.arrows[("tau", (j, i))]
            try:
                roundtrip = t2.then(t1) if data.direction == FROM_OVERLAPS \
                    else t1.then(t2)
            except StructuralError:
                problems.append("tau arrows at %r do not compose" % (pair_obj,))
                continue
            if any(roundtrip.mapping[x] != x for x in roundtrip.domain):
                problems.append("involution violated: tau%r then tau%r is not "
                                "the identity" % ((i, j), (j, i)))
    return problems


def _require_valid(data, direction):
    if data.direction != direction:
        raise StructuralError("operation needs %s data, got %s"
                              % (direction, data.direction))
    problems = validate_gluing_data(data)
    if problems:
        raise StructuralError("invalid gluing data: " + "; ".join(problems))


class GluedObject:
    """A computed (co)limit apex with its legs and construction witnesses."""

    __slots__ = ("side", "apex", "space", "legs", "leg_props", "witness")

    def __init__(self, side, apex, space, legs, leg_props, witness):
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "legs", dict(legs))
        object.__setattr__(self, "leg_props", dict(leg_props))
        object.__setattr__(self, "witness", dict(witness))

    def __setattr__(self, name, value):
        raise AttributeError("GluedObject is immutable")

    def leg(self, i):
        return self.legs[(i,)]


class ConeCandidate:
    """An apex with one leg per index object; validity is checked by the
    operations that consume it."""

    __slots__ = ("apex", "space", "legs")

    def __init__(self, apex, legs, space=None):
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "legs", dict(legs))

    def __setattr__(self, name, value):
        raise AttributeError("ConeCandidate is immutable")


def colimit_relation_pairs(data):
    """The generating identifications on the tagged disjoint union."""
    cat = data.indexcat
    pairs = []
    if cat.mode == NONSPLIT:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            e_i = data.edge(i, pair_obj)
            e_j = data.edge(j, pair_obj)
            for u in data.carrier(pair_obj):
                pairs.append((tag(i, e_i(u)), tag(j, e_j(u))))
    else:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            e_i = data.edge(i, pair_obj)
            t = data.tau_from((j, i))        # ambient map G(i,j) -> G(j,i)
            e_j = data.edge(j, (j, i))
            for u in data.carrier(pair_obj):
                pairs.append((tag(i, e_i(u)), tag(j, e_j(t(u)))))
    return pairs


def colimit_glue(data):
    """The standard colimit-side representative: disjoint union of the
    components modulo the congruence closure of the overlap identifications.

    Legs send a component element to its class; overlap legs factor through
    the stored edge maps.  In the top ambient the apex carries the final
    topology over the component legs.
    """
    _require_valid(data, FROM_OVERLAPS)
    cat = data.indexcat
    comps = [obj[0] for obj in cat.singletons()]
    coproduct = FinSet([tag(i, x) for i in comps for x in data.carrier((i,))])
    apex, pi = quotient_by_pairs(coproduct, colimit_relation_pairs(data))
    legs = {}
    for i in comps:
        carrier = data.carrier((i,))
        legs[(i,)] = FinFn(carrier, apex, {x: pi(tag(i, x)) for x in carrier})
    for pair_obj in cat.pairs():
        i = pair_obj[0]
        legs[pair_obj] = data.edge(i, pair_obj).then(legs[(i,)])
    space = None
    leg_props = {}
    if data.ambient == "top":
        space = induce_topology(
            "final", apex,
            [legs[(i,)] for i in comps], [data.space((i,)) for i in comps])
        for obj in legs:
            leg_props[obj] = map_properties(
                TopMap(legs[obj], data.space(obj), space))
    injections = {i: FinFn(data.carrier((i,)), coproduct,
                           {x: tag(i, x) for x in data.carrier((i,))})
                  for i in comps}
    witness = {"coproduct": coproduct, "projection": pi, "injections": injections}
    return GluedObject("colimit", apex, space, legs, leg_props, witness)


def _limit_constraints(data):
    cat = data.indexcat
    cons = []
    if cat.mode == NONSPLIT:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            cons.append((i, j, data.edge(i, pair_obj), data.edge(j, pair_obj)))
    else:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            into_ji = data.edge(i, pair_obj).then(data.tau_from(pair_obj))
            cons.append((i, j, into_ji, data.edge(j, (j, i))))
    return cons


def limit_glue(data, cap=None):
    """The standard limit-side representative: compatible families in the
    product of the components, with coordinate projections as legs."""
    _require_valid(data, TOWARD_OVERLAPS)
    cat = data.indexcat
    comps = [obj[0] for obj in cat.singletons()]
    carriers = [data.carrier((i,)) for i in comps]
    size = 1
    for c in carriers:
        size *= len(c)
    check_cap(size, cap, "limit over %d components" % len(comps))
    cons = _limit_constraints(data)
    members = []
    for combo in iproduct(*[c.labels for c in carriers]):
        s = dict(zip(comps, combo))
        if all(f(s[i]) == g(s[j]) for i, j, f, g in cons):
            members.append(combo)
    apex = FinSet([SEP.join(combo) for combo in members])
    legs = {}
    for k, i in enumerate(comps):
        legs[(i,)] = FinFn(apex, carriers[k],
                           {SEP.join(c): c[k] for c in members})
    for pair_obj in cat.pairs():
        i = pair_obj[0]
        legs[pair_obj] = legs[(i,)].then(data.edge(i, pair_obj))
    space = None
    leg_props = {}
    if data.ambient == "top":
        space = induce_topology(
            "initial", apex,
            [legs[(i,)] for i in comps], [data.space((i,)) for i in comps])
        for obj in legs:
            leg_props[obj] = map_properties(
                TopMap(legs[obj], space, data.space(obj)))
    prod = product_enumerate(carriers, cap=cap)
    include = FinFn(apex, prod, {x: x for x in apex})
    witness = {"product": prod, "inclusion": include}
    return GluedObject("limit", apex, space, legs, leg_props, witness)


def equalizer_glue_oracle(data, cap=None):
    """The limit recomputed literally as the equalizer of the two canonical
    maps between the component product and the overlap product; must agree
    with ``limit_glue`` elementwise."""
    _require_valid(data, TOWARD_OVERLAPS)
    cat = data.indexcat
    comps = [obj[0] for obj in cat.singletons()]
    carriers = [data.carrier((i,)) for i in comps]
    prod = product_enumerate(carriers, cap=cap)
    cons = _limit_constraints(data)
    if cat.mode == NONSPLIT:
        slot_carriers = [data.carrier(cat.pair(i, j)) for i, j, _, _ in cons]
    else:
        slot_carriers = [data.carrier((j, i)) for i, j, _, _ in cons]
    overlap_prod = product_enumerate(slot_carriers, cap=cap)
    pos = {i: k for k, i in enumerate(comps)}
    combos = {SEP.join(c): c for c in iproduct(*[c.labels for c in carriers])}

    def side_map(side):
        mapping = {}
        for label, combo in combos.items():
            values = [f(combo[pos[i]]) if side == 0 else g(combo[pos[j]])
                      for i, j, f, g in cons]
            mapping[label] = SEP.join(values) if values else "()"
        return FinFn(prod, overlap_prod, mapping)

    eq = equalizer(side_map(0), side_map(1))
    apex = FinSet(list(eq.members))
    legs = {}
    for k, i in enumerate(comps):
        legs[(i,)] = FinFn(apex, carriers[k], {x: combos[x][k] for x in apex})
    for pair_obj in cat.pairs():
        i = pair_obj[0]
        legs[pair_obj] = legs[(i,)].then(data.edge(i, pair_obj))
    space = None
    if data.ambient == "top":
        space = induce_topology("initial", apex,
                                [legs[(i,)] for i in comps],
                                [data.space((i,)) for i in comps])
    witness = {"product": prod, "inclusion": eq.legs["include"]}
    return GluedObject("limit", apex, space, legs, {}, witness)


def _check_cone(data, cone, side):
    """Raise naming the violated square unless the candidate is a cone."""
    cat = data.indexcat
    for obj in cat.objects:
        if obj not in cone.legs:
            raise StructuralError("cone has no leg at %r" % (obj,))
    for g in cat.generators:
        src, dst = gen_endpoints(g)
        fn = data.arrow(g)
        if data.direction == FROM_OVERLAPS:
            lhs = fn.then(cone.legs[src])
            rhs = cone.legs[dst]
        else:
            lhs = cone.legs[src].then(fn)
            rhs = cone.legs[dst]
        if lhs != rhs:
            raise StructuralError(
                "cone square for generator %r does not commute" % (g,))
    if data.ambient == "top" and cone.space is not None:
        for obj, leg in cone.legs.items():
            if side == "colimit":
                TopMap(leg, data.space(obj), cone.space)
            else:
                TopMap(leg, cone.space, data.space(obj))


def mediating_map(data, glued, cone):
    """The unique factoring map between a glued-up object and a cone.

    Colimit side: the map from the apex to the cone apex determined by the
    component legs, well defined by the congruence.  Limit side: the map from
    the cone apex into the compatible families.  The returned flag states
    whether the cone is isomorphic to the glued-up object (bijective factoring
    map; homeomorphism in the top ambient).
    """
    _check_cone(data, cone, glued.side)
    cat = data.indexcat
    comps = [obj[0] for obj in cat.singletons()]
    if glued.side == "colimit":
        mapping = {}
        for i in comps:
            leg = glued.legs[(i,)]
            cleg = cone.legs[(i,)]
            for x in data.carrier((i,)):
                q = leg(x)
                val = cleg(x)
                if mapping.setdefault(q, val) != val:
                    raise StructuralError(
                        "cone legs are not constant on the class %r" % q)
        med = FinFn(glued.apex, cone.apex, mapping)
        iso = med.is_injective() and med.is_surjective()
        if iso and data.ambient == "top" and cone.space is not None:
            fwd = TopMap(med, glued.space, cone.space)
            iso = fwd.open  # bijective, continuous, open = homeomorphism
        return med, iso
    mapping = {}
    for z in cone.apex:
        combo = [cone.legs[(i,)](z) for i in comps]
        label = SEP.join(combo)
        if label not in glued.apex:
            raise StructuralError(
                "cone leg values %r do not form a compatible family" % (combo,))
        mapping[z] = label
    med = FinFn(cone.apex, glued.apex, mapping)
    iso = med.is_injective() and med.is_surjective()
    if iso and data.ambient == "top" and cone.space is not None:
        fwd = TopMap(med, cone.space, glued.space)
        iso = fwd.open
    return med, iso


def hom_transport(data, z, cap=None):
    """Compatible families of maps into ``z`` versus maps out of the glued
    apex; verifies the canonical restriction assignment is a bijection.

    Returns a report with both cardinalities, the verified flag, and the
    family listing, all deterministically ordered.
    """
    _require_valid(data, FROM_OVERLAPS)
    cat = data.indexcat
    comps = [obj[0] for obj in cat.singletons()]
    carriers = {i: data.carrier((i,)) for i in comps}
    total = 1
    for i in comps:
        total *= len(z) ** len(carriers[i])
    check_cap(total, cap, "maps into the transport target")
    per_comp = {}
    for i in comps:
        labs = carriers[i].labels
        per_comp[i] = [dict(zip(labs, values))
                       for values in iproduct(z.labels, repeat=len(labs))]

    cons = []
    if cat.mode == NONSPLIT:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            cons.append((i, j, data.edge(i, pair_obj), data.edge(j, pair_obj),
                         data.carrier(pair_obj)))
    else:
        for pair_obj in cat.pairs():
            i, j = pair_obj
            t = data.tau_from((j, i))
            cons.append((i, j, data.edge(i, pair_obj),
                         t.then(data.edge(j, (j, i))), data.carrier(pair_obj)))

    def compatible(family):
        for i, j, f, g, overlap in cons:
            fi, fj = family[i], family[j]
            if any(fi[f(u)] != fj[g(u)] for u in overlap):
                return False
        return True

    families = []
    for combo in iproduct(*[per_comp[i] for i in comps]):
        family = dict(zip(comps, combo))
        if compatible(family):
            families.append(family)

    glued = colimit_glue(data)
    check_cap(len(z) ** len(glued.apex), cap, "maps out of the glued apex")
    seen = set()
    hom_count = 0
    hit_all = True
    for values in iproduct(z.labels, repeat=len(glued.apex)):
        h = dict(zip(glued.apex.labels, values))
        hom_count += 1
        restricted = tuple(
            tuple(h[glued.legs[(i,)](x)] for x in carriers[i]) for i in comps)
        if restricted in seen:
            hit_all = False
        seen.add(restricted)
    family_keys = {tuple(tuple(family[i][x] for x in carriers[i]) for i in comps)
                   for family in families}
    bijective = hit_all and seen == family_keys
    return {
        "glued": glued,
        "families": families,
        "family_count": len(families),
        "hom_count": hom_count,
        "bijection_verified": bijective,
    }


def universal_glue_check(data, glued, delta, v_space=None, cap=None):
    """Pull the whole diagram back along a map into the apex and report
    whether the target of that map is the glued-up object of the pulled-back
    diagram; in the set ambient this witnesses universality of the colimit.
    """
    _require_valid(data, FROM_OVERLAPS)
    if delta.codomain != glued.apex:
        raise StructuralError("delta must land in the glued apex")
    if data.ambient == "top" and v_space is None:
        raise StructuralError("the top ambient needs a topology on the source "
                              "of delta")
    cat = data.indexcat
    objects = {}
    spaces = {}
    members = {}
    for obj in cat.objects:
        if data.ambient == "top":
            ps = top_pullback(glued.legs[obj], delta, data.space(obj),
                              v_space, glued.space, cap=cap)
            spaces[obj] = ps.space
        else:
            ps = pullback(glued.legs[obj], delta, cap=cap)
        objects[obj] = ps.members
        members[obj] = ps
    arrows = {}
    for g in cat.generators:
        fn = data.arrow(g)
        src, dst = gen_endpoints(g)
        if data.direction == FROM_OVERLAPS:
            src, dst = dst, src
        mapping = {}
        for lab in objects[src]:
            x = members[src].legs["p1"](lab)
            w = members[src].legs["p2"](lab)
            mapping[lab] = fn(x) + SEP + w
        arrows[g] = FinFn(objects[src], objects[dst], mapping)
    pulled = GluingData(cat, data.ambient, objects, arrows, FROM_OVERLAPS,
                        spaces or None)
    pulled_glued = colimit_glue(pulled)
    cone_legs = {obj: members[obj].legs["p2"] for obj in cat.objects}
    cone = ConeCandidate(delta.domain, cone_legs,
                         space=v_space if data.ambient == "top" else None)
    med, iso = mediating_map(pulled, pulled_glued, cone)
    return {
        "pulled_data": pulled,
        "pulled_glued": pulled_glued,
        "mediating": med,
        "is_glued_up": iso,
        "fiber_sizes": {obj: len(objects[obj]) for obj in cat.objects},
    }


def reindex(data, fun):
    """Compose gluing data with a functor into its index category.

    ``fun`` maps some index category into ``data.indexcat``; the result is
    the gluing data of the composite diagram, with each generating arrow
    evaluated by chaining the stored ambient maps of the image word.
    """
    if fun.target != data.indexcat:
        raise StructuralError("functor does not land in the data's index "
                              "category")
    objects = {}
    spaces = {} if data.ambient == "top" else None
    for obj in fun.source.objects:
        image = fun.apply_obj(obj)
        objects[obj] = data.carrier(image)
        if spaces is not None:
            spaces[obj] = data.space(image)
    arrows = {}
    for g in fun.source.generators:
        _, _, word = fun.apply_mor(fun.source.gen_mor(g))
        fns = [data.arrow(key) for key in word]
        src, dst = gen_endpoints(g)
        if data.direction == FROM_OVERLAPS:
            out = FinFn.identity(objects[dst])
            for fn in reversed(fns):
                out = out.then(fn)
        else:
            out = FinFn.identity(objects[src])
            for fn in fns:
                out = out.then(fn)
        arrows[g] = out
    return GluingData(fun.source, data.ambient, objects, arrows,
                      data.direction, spaces)


def compose_with_sorting(data, sorting):
    """Restrict split colimit-side data to the nonsplit category along a
    pair sorting map; cones correspond one to one when the diagonal carries
    identity structure."""
    if data.indexcat.mode != SPLIT:
        raise StructuralError("sorting composition starts from split data")
    _require_valid(data, FROM_OVERLAPS)
    from .indexcat import sorting_functors
    funs = sorting_functors(data.indexcat.index, sorting)
    return reindex(data, funs["A_c"])
