import pytest

from glueforge.errors import ResourceError, StructuralError
from glueforge.fincat import FinFn, FinSet, FinTop, TopMap, quotient_by_pairs, tag
from glueforge.gluing import (
    ConeCandidate,
    GluingData,
    colimit_glue,
    colimit_relation_pairs,
    compose_with_sorting,
    equalizer_glue_oracle,
    hom_transport,
    limit_glue,
    mediating_map,
    reindex,
    universal_glue_check,
    validate_gluing_data,
)
from glueforge.indexcat import IndexCat, SortingMap, sorting_functors

from fixtures import (
    e1,
    e2,
    e3,
    e4_nonsplit,
    make_limit_data,
    make_nonsplit_colimit,
    random_limit_data,
    random_nonsplit_colimit,
    random_split_colimit,
    seeded,
)


def classes_of(data, glued):
    """Partition of the tagged coproduct induced by the legs."""
    out = {}
    for i in data.indexcat.index:
        for x in data.carrier((i,)):
            out.setdefault(glued.legs[(i,)](x), set()).add(tag(i, x))
    return set(frozenset(c) for c in out.values())


def test_validate_accepts_e1():
    assert validate_gluing_data(e1()) == []


def test_validate_names_involution_violation():
    ov = FinSet(["w", "wp"])
    comp = FinSet(["x", "y"])
    cat = IndexCat("split", FinSet(["1"]))
    data = GluingData(
        cat, "sets",
        {("1",): comp, ("1", "1"): ov},
        {("incl", "1", ("1", "1")): FinFn(ov, comp, {"w": "x", "wp": "y"}),
         ("tau", ("1", "1")): FinFn(ov, ov, {"w": "wp", "wp": "wp"})},
        "from-overlaps")
    problems = validate_gluing_data(data)
    assert any("involution" in p for p in problems)


def test_validate_names_endpoint_violation():
    comp = FinSet(["x"])
    wrong = FinSet(["z"])
    cat = IndexCat("nonsplit", FinSet(["1", "2"]))
    data = GluingData(
        cat, "sets",
        {("1",): comp, ("2",): comp, ("1", "2"): FinSet(["u"])},
        {("incl", "1", ("1", "2")): FinFn(FinSet(["u"]), wrong, {"u": "z"}),
         ("incl", "2", ("1", "2")): FinFn(FinSet(["u"]), comp, {"u": "x"})},
        "from-overlaps")
    problems = validate_gluing_data(data)
    assert any("endpoints" in p for p in problems)


def test_e1_colimit_merges_the_overlap_class():
    data = e1()
    glued = colimit_glue(data)
    assert len(glued.apex) == 5
    assert glued.leg("1")("a2") == glued.leg("2")("b0")
    assert glued.leg("1")("a0") != glued.leg("2")("b1")


def test_e2_circle_has_four_classes():
    data = e2()
    glued = colimit_glue(data)
    assert len(glued.apex) == 4
    assert glued.leg("1")("a0") == glued.leg("2")("b2")
    assert glued.leg("1")("a2") == glued.leg("2")("b0")


def test_e3_split_self_gluing_collapses():
    data = e3()
    glued = colimit_glue(data)
    assert len(glued.apex) == 1


def test_colimit_matches_naive_closure_oracle():
    rng = seeded(101)
    for _ in range(40):
        data = random_nonsplit_colimit(rng)
        glued = colimit_glue(data)
        coproduct = glued.witness["coproduct"]
        q, pi = quotient_by_pairs(coproduct, colimit_relation_pairs(data))
        assert len(q) == len(glued.apex)
        got = classes_of(data, glued)
        oracle = {}
        for x in coproduct:
            oracle.setdefault(pi(x), set()).add(x)
        assert got == set(frozenset(c) for c in oracle.values())


def test_cocone_law_exhaustive():
    rng = seeded(102)
    for _ in range(25):
        data = random_nonsplit_colimit(rng, max_index=3, max_size=4)
        glued = colimit_glue(data)
        for pair_obj in data.indexcat.pairs():
            i, j = pair_obj
            e_i = data.edge(i, pair_obj)
            e_j = data.edge(j, pair_obj)
            for u in data.carrier(pair_obj):
                assert glued.leg(i)(e_i(u)) == glued.leg(j)(e_j(u))
                assert glued.legs[pair_obj](u) == glued.leg(i)(e_i(u))


def test_empty_components_allowed():
    data = make_nonsplit_colimit(
        ["1", "2"], {"1": [], "2": ["b"]}, {("1", "2"): ([], {}, {})})
    glued = colimit_glue(data)
    assert list(glued.apex) == [tag("2", "b")]


def test_limit_unconstrained_is_product():
    data = make_limit_data(
        ["1", "2"], {"1": ["0", "1"], "2": ["0", "1"]},
        {("1", "2"): (["s"], {"0": "s", "1": "s"}, {"0": "s", "1": "s"})})
    glued = limit_glue(data)
    assert len(glued.apex) == 4


def test_limit_identity_arrows_is_diagonal():
    data = make_limit_data(
        ["1", "2"], {"1": ["0", "1"], "2": ["0", "1"]},
        {("1", "2"): (["0", "1"], {"0": "0", "1": "1"}, {"0": "0", "1": "1"})})
    glued = limit_glue(data)
    assert list(glued.apex) == ["0|0", "1|1"]


def test_limit_single_index_is_component():
    data = make_limit_data(["1"], {"1": ["a", "b"]}, {})
    glued = limit_glue(data)
    assert list(glued.apex) == ["a", "b"]
    assert glued.leg("1").mapping == {"a": "a", "b": "b"}


def test_limit_cap():
    data = make_limit_data(
        ["1", "2"], {"1": ["0", "1"], "2": ["0", "1"]},
        {("1", "2"): (["s"], {"0": "s", "1": "s"}, {"0": "s", "1": "s"})})
    with pytest.raises(ResourceError):
        limit_glue(data, cap=3)


def test_equalizer_oracle_agrees_on_random_instances():
    rng = seeded(103)
    for k in range(60):
        mode = "nonsplit" if k % 2 == 0 else "split"
        data = random_limit_data(rng, mode=mode)
        a = limit_glue(data)
        b = equalizer_glue_oracle(data)
        assert a.apex == b.apex
        assert a.legs == b.legs


def test_mediating_identity_cone():
    data = e1()
    glued = colimit_glue(data)
    cone = ConeCandidate(glued.apex, glued.legs)
    med, iso = mediating_map(data, glued, cone)
    assert iso is True
    assert all(med(x) == x for x in glued.apex)


def test_mediating_point_cone_not_iso():
    data = e1()
    glued = colimit_glue(data)
    pt = FinSet(["*"])
    legs = {obj: FinFn.constant(data.carrier(obj), pt, "*")
            for obj in data.indexcat.objects}
    med, iso = mediating_map(data, glued, ConeCandidate(pt, legs))
    assert iso is False
    assert med.is_surjective()


def test_mediating_e2_isomorphic_wiring():
    data = e2()
    glued = colimit_glue(data)
    apex = FinSet(["c0", "c1", "c2", "c3"])
    wiring = {("1",): {"a0": "c0", "a1": "c1", "a2": "c2"},
              ("2",): {"b0": "c2", "b1": "c3", "b2": "c0"}}
    legs = {obj: FinFn(data.carrier(obj), apex, m) for obj, m in wiring.items()}
    pair = data.indexcat.pair("1", "2")
    legs[pair] = data.edge("1", pair).then(legs[("1",)])
    med, iso = mediating_map(data, glued, ConeCandidate(apex, legs))
    assert iso is True
    # exhaustive bijectivity witness
    assert sorted(med.mapping.values()) == ["c0", "c1", "c2", "c3"]


def test_mediating_rejects_non_cone():
    data = e1()
    glued = colimit_glue(data)
    apex = FinSet(["p", "q"])
    legs = {obj: FinFn.constant(data.carrier(obj), apex, "p")
            for obj in data.indexcat.objects}
    legs[("2",)] = FinFn.constant(data.carrier(("2",)), apex, "q")
    with pytest.raises(StructuralError) as err:
        mediating_map(data, glued, ConeCandidate(apex, legs))
    assert "does not commute" in str(err.value)


def test_hom_transport_e1_counts():
    res = hom_transport(e1(), FinSet(["0", "1"]))
    assert res["family_count"] == 32
    assert res["hom_count"] == 32
    assert res["bijection_verified"] is True


def test_hom_transport_singleton_target():
    res = hom_transport(e1(), FinSet(["z"]))
    assert res["family_count"] == 1 and res["hom_count"] == 1
    assert res["bijection_verified"] is True


def test_hom_transport_single_index():
    data = make_nonsplit_colimit(["1"], {"1": ["a", "b"]}, {})
    res = hom_transport(data, FinSet(["0", "1"]))
    assert res["family_count"] == 4 == res["hom_count"]
    assert res["bijection_verified"] is True


def test_hom_transport_random_bijection():
    rng = seeded(104)
    for _ in range(20):
        data = random_nonsplit_colimit(rng, max_index=3, max_size=3)
        z = FinSet(["z%d" % k for k in range(rng.randint(1, 3))])
        res = hom_transport(data, z)
        assert res["bijection_verified"] is True
        assert res["family_count"] == len(z) ** len(res["glued"].apex)


def test_universal_check_identity_delta():
    data = e1()
    glued = colimit_glue(data)
    rep = universal_glue_check(data, glued, FinFn.identity(glued.apex))
    assert rep["is_glued_up"] is True


def test_universal_check_point_over_merged_class():
    data = e1()
    glued = colimit_glue(data)
    v = FinSet(["pt"])
    delta = FinFn(v, glued.apex, {"pt": glued.leg("1")("a2")})
    rep = universal_glue_check(data, glued, delta)
    assert rep["is_glued_up"] is True
    assert rep["fiber_sizes"][("1",)] == 1
    assert rep["fiber_sizes"][("2",)] == 1


def test_universal_check_e4_outcome_recorded():
    data = e4_nonsplit()
    glued = colimit_glue(data)
    assert len(glued.apex) == 1
    v = FinSet(["pt"])
    delta = FinFn(v, glued.apex, {"pt": glued.apex.labels[0]})
    rep = universal_glue_check(data, glued, delta)
    # recorded, not asserted a priori; set colimits are universal so this
    # comes out true on every instance we have found
    assert isinstance(rep["is_glued_up"], bool)
    assert rep["is_glued_up"] is True


def test_split_agrees_with_sorted_nonsplit_composite():
    rng = seeded(105)
    for _ in range(20):
        data = random_split_colimit(rng)
        glued_split = colimit_glue(data)
        index = data.indexcat.index
        for flip in (False, True):
            choice = {}
            from itertools import combinations
            for i, j in combinations(index.labels, 2):
                choice[frozenset((i, j))] = (j, i) if flip else (i, j)
            sorting = SortingMap(index, choice) if len(index) > 1 \
                else SortingMap(index, {})
            restricted = compose_with_sorting(data, sorting)
            glued_nonsplit = colimit_glue(restricted)
            assert classes_of(data, glued_split) == \
                classes_of(restricted, glued_nonsplit)


def test_doubled_index_translation_preserves_classical_colimits():
    rng = seeded(106)
    for _ in range(10):
        data = random_split_colimit(rng)
        funs = sorting_functors(data.indexcat.index,
                                SortingMap.positional(data.indexcat.index))
        doubled = reindex(data, funs["A_prime_c"])
        assert validate_gluing_data(doubled) == []
        glued2 = colimit_glue(doubled)
        glued = colimit_glue(data)
        # with identity diagonal structure, both copies of an element land in
        # one class and the partitions correspond bijectively
        mapping = {}
        for copy_label in doubled.indexcat.index:
            _, i = copy_label.split("|", 1)
            for x in data.carrier((i,)):
                cls2 = glued2.legs[(copy_label,)](x)
                cls = glued.legs[(i,)](x)
                assert mapping.setdefault(cls2, cls) == cls
        assert len(set(mapping.values())) == len(glued.apex) == len(glued2.apex)


def test_topological_colimit_legs_open_and_embedding():
    # two discrete charts glued on one point
    u1 = FinSet(["a", "b"])
    u2 = FinSet(["bp", "c"])
    ov = FinSet(["o"])
    cat = IndexCat("nonsplit", FinSet(["1", "2"]))
    data = GluingData(
        cat, "top",
        {("1",): u1, ("2",): u2, ("1", "2"): ov},
        {("incl", "1", ("1", "2")): FinFn(ov, u1, {"o": "b"}),
         ("incl", "2", ("1", "2")): FinFn(ov, u2, {"o": "bp"})},
        "from-overlaps",
        {("1",): FinTop.discrete(u1), ("2",): FinTop.discrete(u2),
         ("1", "2"): FinTop.discrete(ov)})
    glued = colimit_glue(data)
    assert len(glued.apex) == 3
    assert len(glued.space.opens) == 8
    for obj in (("1",), ("2",)):
        assert glued.leg_props[obj]["open"] is True
        assert glued.leg_props[obj]["embedding"] is True


def test_limit_topology_is_initial():
    c = FinSet(["0", "1"])
    sier = FinTop(c, [frozenset(), frozenset(["1"]), frozenset(["0", "1"])])
    data = make_limit_data(
        ["1", "2"], {"1": ["0", "1"], "2": ["0", "1"]},
        {("1", "2"): (["s"], {"0": "s", "1": "s"}, {"0": "s", "1": "s"})},
        ambient="top",
        spaces={("1",): sier, ("2",): sier,
                ("1", "2"): FinTop.indiscrete(FinSet(["s"]))})
    glued = limit_glue(data)
    assert len(glued.apex) == 4
    for obj in (("1",), ("2",)):
        TopMap(glued.legs[obj], glued.space, data.space(obj))  # continuous
