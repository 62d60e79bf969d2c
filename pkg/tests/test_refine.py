import pytest

from glueforge.errors import StructuralError
from glueforge.fincat import FinFn, FinSet
from glueforge.gluing import colimit_glue, limit_glue, mediating_map, ConeCandidate
from glueforge.refine import (
    MetaGluingData,
    Refinement,
    compose_gluings,
    compose_via_sinks,
    compose_refinements,
    identity_refinement,
    induced_limit_map,
    validate_refinement,
)
from glueforge.site import Sink

from fixtures import make_limit_data, make_nonsplit_colimit, seeded


def two_chart_limit(swapped=False):
    comps = {"1": ["a0", "a1"], "2": ["b0", "b1"]}
    return make_limit_data(
        ["1", "2"], comps,
        {("1", "2"): (["o0", "o1"],
                      {"a0": "o0", "a1": "o1"},
                      {"b0": "o1", "b1": "o0"} if swapped
                      else {"b0": "o0", "b1": "o1"})})


def test_identity_refinement_valid_and_identity_map():
    data = two_chart_limit()
    ref = identity_refinement(data)
    assert validate_refinement(ref) == []
    glued = limit_glue(data)
    med = induced_limit_map(ref, glued, glued)
    assert all(med(x) == x for x in glued.apex)


def test_component_endpoint_violation_is_named():
    data = two_chart_limit()
    wrong = FinSet(["zz"])
    comps = {obj: FinFn.identity(data.carrier(obj))
             for obj in data.indexcat.objects}
    comps[("1",)] = FinFn(data.carrier(("1",)), wrong,
                          {x: "zz" for x in data.carrier(("1",))})
    ref = Refinement(data, data, FinFn.identity(data.indexcat.index), comps)
    problems = validate_refinement(ref)
    assert any("endpoints" in p for p in problems)


def test_inclusion_induced_refinement_projects_families():
    source = two_chart_limit()
    target = make_limit_data(["1"], {"1": ["a0", "a1"]}, {})
    gamma = FinFn(target.indexcat.index, source.indexcat.index, {"1": "1"})
    comps = {("1",): FinFn.identity(source.carrier(("1",)))}
    ref = Refinement(source, target, gamma, comps)
    assert validate_refinement(ref) == []
    gs, gt = limit_glue(source), limit_glue(target)
    med = induced_limit_map(ref, gs, gt)
    for x in gs.apex:
        assert med(x) == gs.legs[("1",)](x)


def test_swap_refinement_is_family_bijection():
    source = two_chart_limit()
    target = make_limit_data(
        ["1", "2"], {"1": ["b0", "b1"], "2": ["a0", "a1"]},
        {("1", "2"): (["o0", "o1"],
                      {"b0": "o0", "b1": "o1"},
                      {"a0": "o0", "a1": "o1"})})
    gamma = FinFn(target.indexcat.index, source.indexcat.index,
                  {"1": "2", "2": "1"})
    comps = {
        ("1",): FinFn.identity(source.carrier(("2",))),
        ("2",): FinFn.identity(source.carrier(("1",))),
        ("1", "2"): FinFn.identity(source.carrier(("1", "2"))),
    }
    ref = Refinement(source, target, gamma, comps)
    assert validate_refinement(ref) == []
    gs, gt = limit_glue(source), limit_glue(target)
    med = induced_limit_map(ref, gs, gt)
    assert med.is_injective() and med.is_surjective()
    # cross-check against the factoring map through the target limit
    legs = {obj: gs.legs[ref.reindexed(obj)].then(ref.components[obj])
            for obj in target.indexcat.objects}
    med2, _ = mediating_map(target, gt, ConeCandidate(gs.apex, legs))
    assert med == med2


def test_refinement_functoriality_on_random_instances():
    rng = seeded(71)
    for _ in range(10):
        data = two_chart_limit(swapped=bool(rng.randint(0, 1)))
        ref = identity_refinement(data)
        composite = compose_refinements(ref, ref)
        glued = limit_glue(data)
        lhs = induced_limit_map(composite, glued, glued)
        a = induced_limit_map(ref, glued, glued)
        rhs = a.then(induced_limit_map(ref, glued, glued))
        assert lhs == rhs


def test_refinement_functoriality_through_restriction():
    # swap-shaped refinement followed by a restriction refinement
    source = two_chart_limit()
    mid = make_limit_data(
        ["1", "2"], {"1": ["b0", "b1"], "2": ["a0", "a1"]},
        {("1", "2"): (["o0", "o1"],
                      {"b0": "o0", "b1": "o1"},
                      {"a0": "o0", "a1": "o1"})})
    gamma_r = FinFn(mid.indexcat.index, source.indexcat.index,
                    {"1": "2", "2": "1"})
    r = Refinement(source, mid, gamma_r, {
        ("1",): FinFn.identity(source.carrier(("2",))),
        ("2",): FinFn.identity(source.carrier(("1",))),
        ("1", "2"): FinFn.identity(source.carrier(("1", "2"))),
    })
    tgt = make_limit_data(["1"], {"1": ["b0", "b1"]}, {})
    gamma_s = FinFn(tgt.indexcat.index, mid.indexcat.index, {"1": "1"})
    s = Refinement(mid, tgt, gamma_s,
                   {("1",): FinFn.identity(mid.carrier(("1",)))})
    assert validate_refinement(r) == []
    assert validate_refinement(s) == []
    composite = compose_refinements(s, r)
    assert validate_refinement(composite) == []
    g_source = limit_glue(source)
    g_mid = limit_glue(mid)
    g_tgt = limit_glue(tgt)
    lhs = induced_limit_map(composite, g_source, g_tgt)
    rhs = induced_limit_map(r, g_source, g_mid).then(
        induced_limit_map(s, g_mid, g_tgt))
    assert lhs == rhs


def grid_labels(rows, cols):
    return ["v%d_%d" % (r, c) for r in range(rows) for c in range(cols)]


def square_to_cylinder_node(n=4):
    """An n-by-n vertex grid with its left and right columns glued."""
    square = grid_labels(n, n)
    edge = ["e%d" % r for r in range(n)]
    seam = ["l%d" % r for r in range(n)] + ["r%d" % r for r in range(n)]
    to_square = {}
    to_edge = {}
    for r in range(n):
        to_square["l%d" % r] = "v%d_0" % r
        to_square["r%d" % r] = "v%d_%d" % (r, n - 1)
        to_edge["l%d" % r] = "e%d" % r
        to_edge["r%d" % r] = "e%d" % r
    return make_nonsplit_colimit(
        ["sq", "edge"], {"sq": square, "edge": edge},
        {("sq", "edge"): (seam, to_square, to_edge)})


def circle_node(n=4):
    return make_nonsplit_colimit(["circ"], {"circ": ["c%d" % k for k in range(n)]},
                                 {})


def torus_meta(n=4):
    node1 = square_to_cylinder_node(n)
    node2 = circle_node(n)
    idents = []
    for c in range(n):
        idents.append(((("sq",), "v0_%d" % c), (("circ",), "c%d" % c)))
        idents.append(((("sq",), "v%d_%d" % (n - 1, c)), (("circ",), "c%d" % c)))
    return MetaGluingData(["cyl", "circ"], {"cyl": node1, "circ": node2},
                          {("cyl", "circ"): idents})


def flat_identification_oracle(meta):
    """Independent union-find over the raw flat identification list."""
    from glueforge.fincat import UnionFind
    elements = []
    for i in meta.index:
        node = meta.nodes[i]
        for comp in node.indexcat.singletons():
            elements.extend("%s/%s/%s" % (i, comp[0], x)
                            for x in node.carrier(comp))
    uf = UnionFind(elements)
    for i in meta.index:
        node = meta.nodes[i]
        for pair_obj in node.indexcat.pairs():
            p, q = pair_obj
            e_p = node.edge(p, pair_obj)
            e_q = node.edge(q, pair_obj)
            for u in node.carrier(pair_obj):
                uf.union("%s/%s/%s" % (i, p, e_p(u)),
                         "%s/%s/%s" % (i, q, e_q(u)))
    for (i, j), idents in meta.overlaps.items():
        for (a, x), (b, y) in idents:
            uf.union("%s/%s/%s" % (i, a[0], x), "%s/%s/%s" % (j, b[0], y))
    return {frozenset(cls) for cls in uf.classes(elements)}


def test_torus_counts_16_12_9():
    meta = torus_meta(4)
    cylinder = colimit_glue(meta.nodes["cyl"])
    assert len(meta.nodes["cyl"].carrier(("sq",))) == 16
    assert len(cylinder.apex) == 12
    torus = compose_gluings(meta)
    assert len(torus.apex) == 9


def test_torus_flat_composition_matches_oracle():
    meta = torus_meta(4)
    torus = compose_gluings(meta)
    got = {}
    for i in meta.index:
        node = meta.nodes[i]
        for comp in node.indexcat.singletons():
            for x in node.carrier(comp):
                got.setdefault(torus.legs[(i, comp)](x), set()).add(
                    "%s/%s/%s" % (i, comp[0], x))
    assert {frozenset(c) for c in got.values()} == flat_identification_oracle(meta)


def test_single_node_composition_is_identity():
    meta = MetaGluingData(["only"], {"only": square_to_cylinder_node(3)}, {})
    glued = compose_gluings(meta)
    direct = colimit_glue(meta.nodes["only"])
    assert len(glued.apex) == len(direct.apex)


def test_disjoint_nodes_compose_to_disjoint_union():
    n1 = circle_node(3)
    n2 = circle_node(2)
    meta = MetaGluingData(["a", "b"], {"a": n1, "b": n2}, {})
    glued = compose_gluings(meta)
    assert len(glued.apex) == 5


def test_meta_validates_overlap_entries():
    with pytest.raises(StructuralError):
        MetaGluingData(
            ["a", "b"], {"a": circle_node(2), "b": circle_node(2)},
            {("a", "b"): [((("circ",), "missing"), (("circ",), "c0"))]})


def inclusion_sink(target_labels, parts, names=None):
    target = FinSet(target_labels)
    sources = []
    for k, labels in enumerate(parts):
        src = FinSet(labels)
        name = names[k] if names else str(k + 1)
        sources.append((name, src, FinFn(src, target, {x: x for x in labels})))
    return Sink("sets", target, sources)


def test_compose_identity_sinks():
    u = FinSet(["p", "q"])
    outer = Sink("sets", u, [("1", u, FinFn.identity(u))])
    inner = {"1": Sink("sets", u, [("1", u, FinFn.identity(u))])}
    result = compose_via_sinks(outer, inner)
    assert result["is_glued_up"] is True
    assert result["sink"].names() == ["1.1"]


def test_compose_two_point_cover():
    outer = inclusion_sink(["p", "q"], [["p"], ["q"]])
    inner = {name: Sink("sets", outer.carrier(name),
                        [("1", outer.carrier(name),
                          FinFn.identity(outer.carrier(name)))])
             for name in outer.names()}
    result = compose_via_sinks(outer, inner)
    assert result["is_glued_up"] is True


def test_compose_detects_non_surjective_inner():
    outer = inclusion_sink(["p", "q"], [["p", "q"]])
    sub = FinSet(["p"])
    inner = {"1": Sink("sets", outer.carrier("1"),
                       [("1", sub, FinFn(sub, outer.carrier("1"), {"p": "p"}))])}
    result = compose_via_sinks(outer, inner)
    assert result["is_glued_up"] is False


def test_compose_requires_matching_targets():
    outer = inclusion_sink(["p", "q"], [["p"], ["q"]])
    wrong = FinSet(["z"])
    inner = {"1": Sink("sets", wrong, [("1", wrong, FinFn.identity(wrong))]),
             "2": Sink("sets", outer.carrier("2"),
                       [("1", outer.carrier("2"),
                         FinFn.identity(outer.carrier("2")))])}
    with pytest.raises(StructuralError):
        compose_via_sinks(outer, inner)
