"""Presheaves on the open-set lattice of a finite topological space.

This is the decidable concretization of presheaves on a localized site: the
objects are the opens of a finite space, a covering of an open is any family
of opens with that union, and all sheaf-theoretic conditions are checked by
exhaustive enumeration.  The default covering list per open is the trivial
cover, the cover by all maximal proper open subsets when they do cover, and
the empty cover of the empty open (which forces a one-point section set at
the empty open for sheaves; a flag drops it for presheaf-oriented workflows).
"""

from itertools import product as iproduct

from .errors import StructuralError, check_cap
from .fincat import SEP, FinFn, FinSet

EMPTY_SECTION = "()"


class OpenLattice:
    """The opens of a finite space, ordered by inclusion."""

    __slots__ = ("space", "opens")

    def __init__(self, space):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "opens", space.opens)

    def __setattr__(self, name, value):
        raise AttributeError("OpenLattice is immutable")

    def key(self, o):
        return ",".join(sorted(o, key=self.space.carrier.position))

    def is_open(self, o):
        return self.space.is_open(o)

    def pairs_below(self):
        """All comparable pairs (W, V) with V a subset of W."""
        return [(w, v) for w in self.opens for v in self.opens if v <= w]

    def __eq__(self, other):
        return isinstance(other, OpenLattice) and self.space == other.space

    def __hash__(self):
        return hash(self.space)


class PresheafStore:
    """Sections per open plus a restriction map for every inclusion."""

    __slots__ = ("lattice", "sections", "res")

    def __init__(self, lattice, sections, res):
        sections = dict(sections)
        res = dict(res)
        for o in lattice.opens:
            if o not in sections:
                raise StructuralError("no section set at open %r"
                                      % sorted(o))
        for w, v in lattice.pairs_below():
            if w == v:
                res.setdefault((w, v), FinFn.identity(sections[w]))
            elif (w, v) not in res:
                raise StructuralError("no restriction map from %r to %r"
                                      % (sorted(w), sorted(v)))
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "sections", sections)
        object.__setattr__(self, "res", res)

    def __setattr__(self, name, value):
        raise AttributeError("PresheafStore is immutable")

    def at(self, o):
        return self.sections[frozenset(o)]

    def restrict_map(self, w, v):
        try:
            return self.res[(frozenset(w), frozenset(v))]
        except KeyError:
            raise StructuralError("no restriction from %r to %r"
                                  % (sorted(w), sorted(v)))

    def restrict_section(self, s, w, v):
        return self.restrict_map(w, v)(s)


def validate_presheaf(store):
    """Violated identity or composition laws among the restriction maps."""
    problems = []
    lat = store.lattice
    for w, v in lat.pairs_below():
        fn = store.res[(w, v)]
        if fn.domain != store.sections[w] or fn.codomain != store.sections[v]:
            problems.append("restriction %r -> %r has wrong endpoints"
                            % (sorted(w), sorted(v)))
    if problems:
        return problems
    for o in lat.opens:
        fn = store.res[(o, o)]
        if any(fn.mapping[s] != s for s in store.sections[o]):
            problems.append("restriction at %r is not the identity" % sorted(o))
    for x in lat.opens:
        for w in lat.opens:
            if not w <= x:
                continue
            for v in lat.opens:
                if not v <= w:
                    continue
                direct = store.res[(x, v)]
                composed = store.res[(x, w)].then(store.res[(w, v)])
                if direct != composed:
                    problems.append(
                        "restriction composition %r -> %r -> %r disagrees "
                        "with the direct map"
                        % (sorted(x), sorted(w), sorted(v)))
    return problems


def function_presheaf(space, stalks):
    """The presheaf of sections of the family ``stalks``: a section over an
    open is a choice of one stalk value per point. This is a sheaf for every
    covering, including the empty cover of the empty open."""
    carrier = space.carrier
    for p in carrier:
        if p not in stalks or not stalks[p]:
            raise StructuralError("every point needs a nonempty stalk")
    lat = OpenLattice(space)
    labels = {}
    tuples = {}
    sections = {}
    for o in lat.opens:
        pts = sorted(o, key=carrier.position)
        opts = []
        for combo in iproduct(*[stalks[p] for p in pts]):
            lab = ";".join("%s=%s" % (p, v) for p, v in zip(pts, combo)) \
                if pts else EMPTY_SECTION
            opts.append(lab)
            tuples[(o, lab)] = dict(zip(pts, combo))
        labels[o] = opts
        sections[o] = FinSet(opts)
    res = {}
    for w, v in lat.pairs_below():
        pts_v = sorted(v, key=carrier.position)
        mapping = {}
        for lab in labels[w]:
            choice = tuples[(w, lab)]
            sub = ";".join("%s=%s" % (p, choice[p]) for p in pts_v) \
                if pts_v else EMPTY_SECTION
            mapping[lab] = sub
        res[(w, v)] = FinFn(sections[w], sections[v], mapping)
    return PresheafStore(lat, sections, res)


def constant_presheaf(space, values):
    """All restriction maps are the identity on a fixed value set."""
    lat = OpenLattice(space)
    vs = FinSet(values)
    sections = {o: vs for o in lat.opens}
    res = {(w, v): FinFn.identity(vs) for w, v in lat.pairs_below()}
    return PresheafStore(lat, sections, res)


def default_coverings(lattice, include_empty_cover=True):
    """The default covering list: trivial covers, maximal-proper-open covers
    where those cover, and the empty cover of the empty open."""
    covers = []
    for u in lattice.opens:
        covers.append((u, [u]))
        proper = [v for v in lattice.opens if v < u]
        maximal = [v for v in proper
                   if not any(v < w for w in proper)]
        if maximal and frozenset().union(*maximal) == u:
            covers.append((u, maximal))
    if include_empty_cover:
        covers.append((frozenset(), []))
    return covers


def all_coverings(lattice, cap=None):
    """Every covering of every open; exponential, so cap-guarded."""
    covers = []
    for u in lattice.opens:
        below = [v for v in lattice.opens if v <= u]
        check_cap(2 ** len(below), cap, "coverings of one open")
        for mask in range(2 ** len(below)):
            parts = [below[k] for k in range(len(below)) if mask >> k & 1]
            union = frozenset().union(*parts) if parts else frozenset()
            if union == u:
                covers.append((u, parts))
    return covers


def _check_covering(lattice, covering):
    u, parts = covering
    if not lattice.is_open(u):
        raise StructuralError("covered set %r is not open" % sorted(u))
    for v in parts:
        if not lattice.is_open(v):
            raise StructuralError("covering member %r is not open" % sorted(v))
        if not v <= u:
            raise StructuralError("covering member %r is not below %r"
                                  % (sorted(v), sorted(u)))
    union = frozenset().union(*parts) if parts else frozenset()
    if union != u:
        raise StructuralError("family does not cover %r" % sorted(u))


def _compatible_families(store, u, parts, cap=None):
    size = 1
    for v in parts:
        size *= len(store.sections[v])
    check_cap(size, cap, "families over a covering")
    out = []
    for combo in iproduct(*[store.sections[v].labels for v in parts]):
        ok = True
        for a in range(len(parts)):
            for b in range(a + 1, len(parts)):
                meet = parts[a] & parts[b]
                if store.restrict_section(combo[a], parts[a], meet) != \
                        store.restrict_section(combo[b], parts[b], meet):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(combo)
    return out


def is_separated(store, coverings, cap=None):
    """Injectivity of the joint restriction along every listed covering."""
    for covering in coverings:
        _check_covering(store.lattice, covering)
        u, parts = covering
        seen = {}
        for s in store.sections[u]:
            key = tuple(store.restrict_section(s, u, v) for v in parts)
            if key in seen:
                return False, {"open": u, "parts": parts,
                               "sections": (seen[key], s)}
            seen[key] = s
    return True, None


def is_sheaf(store, coverings, cap=None):
    """Bijectivity between sections and compatible families per covering."""
    for covering in coverings:
        _check_covering(store.lattice, covering)
        u, parts = covering
        families = _compatible_families(store, u, parts, cap=cap)
        image = {}
        for s in store.sections[u]:
            key = tuple(store.restrict_section(s, u, v) for v in parts)
            if key in image:
                return False, {"open": u, "parts": parts,
                               "sections": (image[key], s),
                               "kind": "separation"}
            image[key] = s
        for fam in families:
            if tuple(fam) not in image:
                return False, {"open": u, "parts": parts, "family": fam,
                               "kind": "gluing"}
    return True, None


def direct_image(topmap, store):
    """Transport a presheaf forward: sections over an open are the sections
    over its preimage."""
    if store.lattice.space != topmap.dom:
        raise StructuralError("presheaf does not live on the map source")
    lat = OpenLattice(topmap.cod)
    sections = {}
    res = {}
    for o in lat.opens:
        sections[o] = store.sections[topmap.fn.preimage(o)]
    for w, v in lat.pairs_below():
        res[(w, v)] = store.res[(topmap.fn.preimage(w), topmap.fn.preimage(v))]
    return PresheafStore(lat, sections, res)


def restrict(store, members):
    """The presheaf restricted to an open subset, on that subset's lattice."""
    members = frozenset(members)
    if not store.lattice.is_open(members):
        raise StructuralError("%r is not open" % sorted(members))
    sub = store.lattice.space.subspace(members)
    lat = OpenLattice(sub)
    sections = {o: store.sections[o] for o in lat.opens}
    res = {(w, v): store.res[(w, v)] for w, v in lat.pairs_below()}
    return PresheafStore(lat, sections, res)


class NatTrans:
    """A transformation between presheaves on one lattice, one component map
    per open; naturality with restrictions is a checked law."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components):
        if source.lattice != target.lattice:
            raise StructuralError("natural transformations need a shared lattice")
        components = {frozenset(k): v for k, v in components.items()}
        for o in source.lattice.opens:
            if o not in components:
                raise StructuralError("no component at open %r" % sorted(o))
            fn = components[o]
            if fn.domain != source.sections[o] or fn.codomain != target.sections[o]:
                raise StructuralError("component at %r has wrong endpoints"
                                      % sorted(o))
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("NatTrans is immutable")

    def at(self, o):
        return self.components[frozenset(o)]

    def validate(self):
        problems = []
        for w, v in self.source.lattice.pairs_below():
            lhs = self.components[w].then(self.target.res[(w, v)])
            rhs = self.source.res[(w, v)].then(self.components[v])
            if lhs != rhs:
                problems.append("naturality fails from %r to %r"
                                % (sorted(w), sorted(v)))
        return problems


class GluingDatum:
    """A cover of a space by named open charts, a presheaf per chart, and a
    natural family of transition bijections over the pairwise overlaps.

    Transitions are oriented chart-i side to chart-j side; the inverse
    orientation is filled in automatically and the convention that the two
    orientations are mutually inverse is enforced.  The diagonal transition
    defaults to the identity.
    """

    __slots__ = ("space", "charts", "locals", "transitions")

    def __init__(self, space, charts, locals_, transitions):
        charts = [(name, frozenset(members)) for name, members in charts]
        names = [name for name, _ in charts]
        if len(set(names)) != len(names):
            raise StructuralError("duplicate chart names")
        union = frozenset().union(*[m for _, m in charts]) if charts \
            else frozenset()
        if union != frozenset(space.carrier.labels):
            raise StructuralError("charts do not cover the space")
        for name, members in charts:
            if not space.is_open(members):
                raise StructuralError("chart %r is not open" % name)
            if name not in locals_:
                raise StructuralError("no local presheaf for chart %r" % name)
            expected = OpenLattice(space.subspace(members))
            if locals_[name].lattice != expected:
                raise StructuralError(
                    "local presheaf of chart %r lives on the wrong lattice"
                    % name)
        transitions = {k: {frozenset(o): fn for o, fn in v.items()}
                       for k, v in transitions.items()}
        full = {}
        for a, am in charts:
            for b, bm in charts:
                overlap_opens = [o for o in space.subspace(am & bm).opens]
                if (a, b) in transitions:
                    comp = transitions[(a, b)]
                elif (b, a) in transitions:
                    comp = {o: transitions[(b, a)][o].inverse()
                            for o in transitions[(b, a)]}
                elif a == b:
                    comp = {o: FinFn.identity(locals_[a].sections[o])
                            for o in overlap_opens}
                else:
                    raise StructuralError("no transition between charts %r "
                                          "and %r" % (a, b))
                for o in overlap_opens:
                    if o not in comp:
                        raise StructuralError(
                            "transition %r -> %r misses the overlap open %r"
                            % (a, b, sorted(o)))
                full[(a, b)] = comp
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "charts", tuple(charts))
        object.__setattr__(self, "locals", dict(locals_))
        object.__setattr__(self, "transitions", full)

    def __setattr__(self, name, value):
        raise AttributeError("GluingDatum is immutable")

    def names(self):
        return [name for name, _ in self.charts]

    def members(self, name):
        for n, m in self.charts:
            if n == name:
                return m
        raise StructuralError("no chart named %r" % name)

    def transition(self, a, b, o):
        return self.transitions[(a, b)][frozenset(o)]

    def validate(self):
        problems = []
        for name, _ in self.charts:
            problems.extend("chart %s: %s" % (name, p)
                            for p in validate_presheaf(self.locals[name]))
        for (a, b), comp in self.transitions.items():
            am, bm = self.members(a), self.members(b)
            overlap = am & bm
            for o, fn in comp.items():
                if fn.domain != self.locals[a].sections[o] \
                        or fn.codomain != self.locals[b].sections[o]:
                    problems.append("transition %r -> %r at %r has wrong "
                                    "endpoints" % (a, b, sorted(o)))
                    continue
                if not (fn.is_injective() and fn.is_surjective()):
                    problems.append("transition %r -> %r at %r is not a "
                                    "bijection" % (a, b, sorted(o)))
            inv = self.transitions[(b, a)]
            for o, fn in comp.items():
                roundtrip = fn.then(inv[o])
                if any(roundtrip.mapping[x] != x for x in roundtrip.domain):
                    problems.append("transitions %r <-> %r at %r are not "
                                    "mutually inverse" % (a, b, sorted(o)))
            sub = self.space.subspace(overlap)
            for w in sub.opens:
                for v in sub.opens:
                    if not v <= w:
                        continue
                    lhs = comp[w].then(self.locals[b].res[(w, v)])
                    rhs = self.locals[a].res[(w, v)].then(comp[v])
                    if lhs != rhs:
                        problems.append(
                            "transition %r -> %r is not natural from %r to %r"
                            % (a, b, sorted(w), sorted(v)))
        return problems


def glue_presheaves(datum, include_empty_cover=True, require_sheaf_locals=True,
                    cap=None):
    """The standard glued presheaf of a gluing datum.

    Sections over an open are the transition-compatible tuples of local
    sections over the chart traces; restrictions act componentwise.  Returns
    the glued presheaf together with the projection transformations onto the
    chart sides.
    """
    problems = datum.validate()
    if problems:
        raise StructuralError("invalid gluing datum: " + "; ".join(problems))
    names = datum.names()
    if require_sheaf_locals:
        for name in names:
            local = datum.locals[name]
            ok, counter = is_sheaf(
                local, default_coverings(local.lattice, include_empty_cover),
                cap=cap)
            if not ok:
                raise StructuralError(
                    "local presheaf of chart %r is not a sheaf: %r"
                    % (name, counter))
    lat = OpenLattice(datum.space)
    sections = {}
    tuples = {}
    for o in lat.opens:
        traces = [o & datum.members(n) for n in names]
        size = 1
        for n, tr in zip(names, traces):
            size *= len(datum.locals[n].sections[tr])
        check_cap(size, cap, "glued sections at one open")
        labels = []
        for combo in iproduct(*[datum.locals[n].sections[tr].labels
                                for n, tr in zip(names, traces)]):
            ok = True
            for a in range(len(names)):
                for b in range(len(names)):
                    na, nb = names[a], names[b]
                    meet = traces[a] & traces[b]
                    sa = datum.locals[na].restrict_section(
                        combo[a], traces[a], meet)
                    sb = datum.locals[nb].restrict_section(
                        combo[b], traces[b], meet)
                    if datum.transition(na, nb, meet)(sa) != sb:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                labels.append(SEP.join(combo) if combo else EMPTY_SECTION)
                tuples[(o, labels[-1])] = dict(zip(names, combo))
        sections[o] = FinSet(labels)
    res = {}
    for w, v in lat.pairs_below():
        mapping = {}
        for lab in sections[w]:
            combo = tuples[(w, lab)]
            restricted = []
            for n in names:
                tr_w = w & datum.members(n)
                tr_v = v & datum.members(n)
                restricted.append(datum.locals[n].restrict_section(
                    combo[n], tr_w, tr_v))
            target = SEP.join(restricted) if restricted else EMPTY_SECTION
            mapping[lab] = target
        res[(w, v)] = FinFn(sections[w], sections[v], mapping)
    glued = PresheafStore(lat, sections, res)
    projections = {}
    for n in names:
        comp = {}
        for o in lat.opens:
            tr = o & datum.members(n)
            comp[o] = FinFn(sections[o], datum.locals[n].sections[tr],
                            {lab: tuples[(o, lab)][n] for lab in sections[o]})
        projections[n] = comp
    if require_sheaf_locals:
        ok, counter = is_sheaf(glued, default_coverings(lat, include_empty_cover),
                               cap=cap)
        if not ok:
            raise StructuralError("glued presheaf failed its own sheaf check: "
                                  "%r" % (counter,))
    return glued, projections


def presheaf_effective_check(datum, glued, projections, cap=None):
    """The identity and triple-overlap cocycle conditions on the transitions,
    and, independently, whether every projection restricted to its own chart
    is a componentwise bijection; reports all three so their equivalence is
    observable."""
    names = datum.names()
    identity_ok = True
    for n in names:
        members = datum.members(n)
        for o in datum.space.subspace(members).opens:
            fn = datum.transition(n, n, o)
            if any(fn.mapping[x] != x for x in fn.domain):
                identity_ok = False
    cocycle_ok = True
    for a in names:
        for b in names:
            for c in names:
                triple = datum.members(a) & datum.members(b) & datum.members(c)
                for o in datum.space.subspace(triple).opens:
                    lhs = datum.transition(a, b, o).then(
                        datum.transition(b, c, o))
                    rhs = datum.transition(a, c, o)
                    if lhs != rhs:
                        cocycle_ok = False
    psi_ok = True
    for n in names:
        members = datum.members(n)
        for o in datum.space.subspace(members).opens:
            fn = projections[n][frozenset(o)]
            if not (fn.is_injective() and fn.is_surjective()):
                psi_ok = False
    return {
        "identity_ok": identity_ok,
        "cocycle_ok": cocycle_ok,
        "psi_restriction_bijective": psi_ok,
        "equivalence_holds": (identity_ok and cocycle_ok) == psi_ok,
    }


def glue_nat_trans(datum_space, charts, source, target, parts,
                   include_empty_cover=True, cap=None):
    """Glue chart-local transformations into one transformation.

    ``charts`` is the open cover, ``parts`` maps chart names to NatTrans on
    the chart lattices between the restrictions of ``source`` and ``target``.
    The parts must agree on pairwise overlaps and the target must satisfy the
    sheaf condition for all covers induced by the charts; both are checked.
    The glued transformation restricts back to every part, which is verified
    before returning.
    """
    charts = [(name, frozenset(m)) for name, m in charts]
    lat = source.lattice
    if lat != target.lattice or lat.space != datum_space:
        raise StructuralError("source and target must live on the cover space")
    union = frozenset().union(*[m for _, m in charts]) if charts else frozenset()
    if union != frozenset(datum_space.carrier.labels):
        raise StructuralError("charts do not cover the space")
    chart_lookup = dict(charts)
    for name, members in charts:
        if name not in parts:
            raise StructuralError("no part for chart %r" % name)
        part = parts[name]
        problems = part.validate()
        if problems:
            raise StructuralError("part %r is not natural: %s"
                                  % (name, "; ".join(problems)))
        if part.source.lattice.space != datum_space.subspace(members):
            raise StructuralError("part %r lives on the wrong chart" % name)
    for a, am in charts:
        for b, bm in charts:
            if a >= b:
                continue
            overlap = am & bm
            for o in datum_space.subspace(overlap).opens:
                if parts[a].at(o) != parts[b].at(o):
                    raise StructuralError(
                        "parts %r and %r disagree at the overlap open %r"
                        % (a, b, sorted(o)))
    # sheaf condition of the target on the induced covers
    for v in lat.opens:
        induced = (v, [v & m for _, m in charts])
        ok, counter = is_sheaf(target, [induced], cap=cap)
        if not ok:
            raise StructuralError(
                "target fails the sheaf condition on the induced cover of %r: "
                "%r" % (sorted(v), counter))
    components = {}
    for v in lat.opens:
        traces = [(name, v & chart_lookup[name]) for name, _ in charts]
        mapping = {}
        for s in source.sections[v]:
            wanted = {}
            for name, tr in traces:
                s_tr = source.restrict_section(s, v, tr)
                wanted[name] = parts[name].at(tr)(s_tr)
            candidates = [t for t in target.sections[v]
                          if all(target.restrict_section(t, v, tr) == wanted[name]
                                 for name, tr in traces)]
            if len(candidates) != 1:
                raise StructuralError(
                    "gluing failed at open %r: %d candidate sections"
                    % (sorted(v), len(candidates)))
            mapping[s] = candidates[0]
        components[v] = FinFn(source.sections[v], target.sections[v], mapping)
    glued = NatTrans(source, target, components)
    problems = glued.validate()
    if problems:
        raise StructuralError("glued transformation is not natural: "
                              + "; ".join(problems))
    for name, members in charts:
        for o in datum_space.subspace(members).opens:
            if glued.at(o) != parts[name].at(o):
                raise StructuralError(
                    "glued transformation does not restrict to part %r at %r"
                    % (name, sorted(o)))
    return glued


def canonical_presheaf_functor(store, charts):
    """The gluing datum of a presheaf and a cover: locals are the chart
    restrictions, transitions are identities on the shared overlap sections."""
    charts = [(name, frozenset(m)) for name, m in charts]
    locals_ = {name: restrict(store, members) for name, members in charts}
    transitions = {}
    for a, am in charts:
        for b, bm in charts:
            overlap = am & bm
            comp = {}
            for o in store.lattice.space.subspace(overlap).opens:
                comp[o] = FinFn.identity(store.sections[o])
            transitions[(a, b)] = comp
    return GluingDatum(store.lattice.space, charts, locals_, transitions)
