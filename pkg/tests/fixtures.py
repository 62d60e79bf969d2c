"""Shared fixture builders and random-instance generators for the test suite.

Colimit-side data is always built here in the `from-overlaps` orientation
(overlap carriers map down into components); split overlaps are specified per
unordered pair and mirrored automatically with an identity swap, which is the
classical regime where the diagonal carries identity structure.
"""

import random

from glueforge.fincat import FinFn, FinSet, FinTop
from glueforge.gluing import FROM_OVERLAPS, TOWARD_OVERLAPS, GluingData
from glueforge.indexcat import IndexCat


def make_nonsplit_colimit(index, components, overlaps, ambient="sets", spaces=None):
    """components: i -> labels; overlaps: (i, j) -> (labels, to_i, to_j)."""
    cat = IndexCat("nonsplit", FinSet(index))
    objects = {(i,): FinSet(components[i]) for i in index}
    arrows = {}
    for (i, j), (labels, to_i, to_j) in overlaps.items():
        pair = cat.pair(i, j)
        ov = FinSet(labels)
        objects[pair] = ov
        arrows[("incl", i, pair)] = FinFn(ov, objects[(i,)], to_i)
        arrows[("incl", j, pair)] = FinFn(ov, objects[(j,)], to_j)
    return GluingData(cat, ambient, objects, arrows, FROM_OVERLAPS, spaces)


def make_split_colimit(index, components, overlaps, ambient="sets", spaces=None,
                       self_overlaps=None):
    """Split data in the classical regime: each unordered overlap is given
    once as (labels, to_i, to_j) and mirrored with identity swaps; diagonal
    objects default to the components themselves.  ``self_overlaps`` may give
    explicit (labels, to_i, tau_mapping) diagonal data."""
    cat = IndexCat("split", FinSet(index))
    objects = {(i,): FinSet(components[i]) for i in index}
    arrows = {}
    for (i, j), (labels, to_i, to_j) in overlaps.items():
        ov = FinSet(labels)
        objects[(i, j)] = ov
        objects[(j, i)] = ov
        arrows[("incl", i, (i, j))] = FinFn(ov, objects[(i,)], to_i)
        arrows[("incl", j, (j, i))] = FinFn(ov, objects[(j,)], to_j)
        arrows[("tau", (i, j))] = FinFn.identity(ov)
        arrows[("tau", (j, i))] = FinFn.identity(ov)
    for i, (labels, to_i, tau) in (self_overlaps or {}).items():
        ov = FinSet(labels)
        objects[(i, i)] = ov
        arrows[("incl", i, (i, i))] = FinFn(ov, objects[(i,)], to_i)
        arrows[("tau", (i, i))] = FinFn(ov, ov, tau)
    return GluingData(cat, ambient, objects, arrows, FROM_OVERLAPS, spaces)


def make_limit_data(index, components, overlaps, mode="nonsplit", ambient="sets",
                    spaces=None):
    """Limit-side data; overlaps: (i, j) -> (labels, from_i, from_j)."""
    cat = IndexCat(mode, FinSet(index))
    objects = {(i,): FinSet(components[i]) for i in index}
    arrows = {}
    for (i, j), (labels, from_i, from_j) in overlaps.items():
        ov = FinSet(labels)
        if mode == "nonsplit":
            pair = cat.pair(i, j)
            objects[pair] = ov
            arrows[("incl", i, pair)] = FinFn(objects[(i,)], ov, from_i)
            arrows[("incl", j, pair)] = FinFn(objects[(j,)], ov, from_j)
        else:
            objects[(i, j)] = ov
            objects[(j, i)] = ov
            arrows[("incl", i, (i, j))] = FinFn(objects[(i,)], ov, from_i)
            arrows[("incl", j, (j, i))] = FinFn(objects[(j,)], ov, from_j)
            arrows[("tau", (i, j))] = FinFn.identity(ov)
            arrows[("tau", (j, i))] = FinFn.identity(ov)
    if mode == "split":
        for i in index:
            if (i, i) not in objects:
                comp = objects[(i,)]
                objects[(i, i)] = comp
                arrows[("incl", i, (i, i))] = FinFn.identity(comp)
                arrows[("tau", (i, i))] = FinFn.identity(comp)
    return GluingData(cat, ambient, objects, arrows, TOWARD_OVERLAPS, spaces)


def e1():
    """Two three-point components glued along a single overlap point."""
    return make_nonsplit_colimit(
        ["1", "2"],
        {"1": ["a0", "a1", "a2"], "2": ["b0", "b1", "b2"]},
        {("1", "2"): (["u"], {"u": "a2"}, {"u": "b0"})})


def e2():
    """Circle: two arcs glued at both ends."""
    return make_nonsplit_colimit(
        ["1", "2"],
        {"1": ["a0", "a1", "a2"], "2": ["b0", "b1", "b2"]},
        {("1", "2"): (["u", "v"], {"u": "a0", "v": "a2"},
                      {"u": "b2", "v": "b0"})})


def e3():
    """Split self-gluing with a non-identity swap on the diagonal."""
    return make_split_colimit(
        ["1"], {"1": ["x", "y"]}, {},
        self_overlaps={"1": (["w", "wp"], {"w": "x", "wp": "y"},
                             {"w": "wp", "wp": "w"})})


def e4_nonsplit():
    """Three points chained through two overlaps; the (1,3) overlap is empty."""
    return make_nonsplit_colimit(
        ["1", "2", "3"],
        {"1": ["x1"], "2": ["x2"], "3": ["x3"]},
        {("1", "2"): (["p"], {"p": "x1"}, {"p": "x2"}),
         ("2", "3"): (["q"], {"q": "x2"}, {"q": "x3"}),
         ("1", "3"): ([], {}, {})})


def e4_split():
    return make_split_colimit(
        ["1", "2", "3"],
        {"1": ["x1"], "2": ["x2"], "3": ["x3"]},
        {("1", "2"): (["p"], {"p": "x1"}, {"p": "x2"}),
         ("2", "3"): (["q"], {"q": "x2"}, {"q": "x3"}),
         ("1", "3"): ([], {}, {})})


def random_nonsplit_colimit(rng, max_index=4, max_size=6):
    n = rng.randint(1, max_index)
    index = [str(k + 1) for k in range(n)]
    components = {i: ["c%s_%d" % (i, k) for k in range(rng.randint(0, max_size))]
                  for i in index}
    overlaps = {}
    for a in range(n):
        for b in range(a + 1, n):
            i, j = index[a], index[b]
            if not components[i] or not components[j]:
                size = 0
            else:
                size = rng.randint(0, max_size // 2)
            labels = ["o%s_%s_%d" % (i, j, k) for k in range(size)]
            overlaps[(i, j)] = (
                labels,
                {u: rng.choice(components[i]) for u in labels},
                {u: rng.choice(components[j]) for u in labels})
    return make_nonsplit_colimit(index, components, overlaps)


def random_split_colimit(rng, max_index=3, max_size=4, force_noneffective=False):
    """Classical-regime split data; with ``force_noneffective`` the instance
    is a chain of singletons with one empty overlap, like the e4 family."""
    if force_noneffective:
        n = rng.randint(3, max_index) if max_index >= 3 else 3
        index = [str(k + 1) for k in range(n)]
        components = {i: ["x%s" % i] for i in index}
        overlaps = {}
        for a in range(n):
            for b in range(a + 1, n):
                i, j = index[a], index[b]
                if b == a + 1:
                    lab = "o%s%s" % (i, j)
                    overlaps[(i, j)] = ([lab], {lab: "x%s" % i}, {lab: "x%s" % j})
                else:
                    overlaps[(i, j)] = ([], {}, {})
        return make_split_colimit(index, components, overlaps)
    n = rng.randint(1, max_index)
    index = [str(k + 1) for k in range(n)]
    components = {i: ["c%s_%d" % (i, k) for k in range(rng.randint(1, max_size))]
                  for i in index}
    overlaps = {}
    for a in range(n):
        for b in range(a + 1, n):
            i, j = index[a], index[b]
            size = rng.randint(0, max_size // 2)
            labels = ["o%s_%s_%d" % (i, j, k) for k in range(size)]
            overlaps[(i, j)] = (
                labels,
                {u: rng.choice(components[i]) for u in labels},
                {u: rng.choice(components[j]) for u in labels})
    return make_split_colimit(index, components, overlaps)


def random_limit_data(rng, max_index=3, max_size=4, mode="nonsplit"):
    n = rng.randint(1, max_index)
    index = [str(k + 1) for k in range(n)]
    components = {i: ["c%s_%d" % (i, k) for k in range(rng.randint(1, max_size))]
                  for i in index}
    overlaps = {}
    for a in range(n):
        for b in range(a + 1, n):
            i, j = index[a], index[b]
            labels = ["o%s_%s_%d" % (i, j, k) for k in range(rng.randint(1, max_size))]
            overlaps[(i, j)] = (
                labels,
                {x: rng.choice(labels) for x in components[i]},
                {x: rng.choice(labels) for x in components[j]})
    return make_limit_data(index, components, overlaps, mode=mode)


def random_topology(rng, labels):
    """A random topology: the union/intersection closure of random subsets."""
    carrier = FinSet(labels)
    fam = [frozenset(), frozenset(labels)]
    for _ in range(rng.randint(0, 3)):
        fam.append(frozenset(x for x in labels if rng.random() < 0.5))
    from glueforge.fincat import _close_family
    return FinTop(carrier, _close_family(carrier, fam))


def random_top_colimit(rng, max_index=3, max_size=3, effective=True):
    """Split top-ambient data with open continuous arrows.

    With ``effective`` the charts are open subspaces of one ambient space and
    the overlaps are the literal intersections.  Otherwise the components are
    discrete spaces with arbitrary injective or non-injective edge maps, where
    every map is automatically open continuous.
    """
    if effective:
        size = rng.randint(1, 2 * max_size)
        labels = ["p%d" % k for k in range(size)]
        total = random_topology(rng, labels)
        n = rng.randint(1, max_index)
        opens = list(total.opens)
        charts = [sorted(rng.choice(opens)) for _ in range(n)]
        index = [str(k + 1) for k in range(n)]
        components = {}
        spaces = {}
        objects = {}
        arrows = {}
        cat = IndexCat("split", FinSet(index))
        for k, i in enumerate(index):
            members = charts[k]
            spc = total.subspace(members)
            components[i] = list(spc.carrier.labels)
            objects[(i,)] = spc.carrier
            spaces[(i,)] = spc
        for a in range(n):
            for b in range(n):
                i, j = index[a], index[b]
                both = set(components[i]) & set(components[j])
                inter = [x for x in total.carrier if x in both]
                ov = FinSet(["%s~%s~%s" % (i, j, x) for x in inter])
                objects[(i, j)] = ov
                spaces[(i, j)] = FinTop(
                    ov, [frozenset("%s~%s~%s" % (i, j, x) for x in o & set(inter))
                         for o in total.opens])
                arrows[("incl", i, (i, j))] = FinFn(
                    ov, objects[(i,)],
                    {"%s~%s~%s" % (i, j, x): x for x in inter})
                arrows[("tau", (i, j))] = FinFn(
                    ov, FinSet(["%s~%s~%s" % (j, i, x) for x in inter]),
                    {"%s~%s~%s" % (i, j, x): "%s~%s~%s" % (j, i, x)
                     for x in inter})
        # tau arrows above were built pointing (i,j) -> (j,i); store the op
        fixed = {}
        for key, fn in arrows.items():
            if key[0] == "tau":
                i, j = key[1]
                fixed[("tau", (j, i))] = fn
            else:
                fixed[key] = fn
        return GluingData(cat, "top", objects, fixed, FROM_OVERLAPS, spaces)
    n = rng.randint(1, max_index)
    index = [str(k + 1) for k in range(n)]
    components = {i: ["c%s_%d" % (i, k) for k in range(rng.randint(1, max_size))]
                  for i in index}
    overlaps = {}
    for a in range(n):
        for b in range(a + 1, n):
            i, j = index[a], index[b]
            labels = ["o%s_%s_%d" % (i, j, k)
                      for k in range(rng.randint(0, max_size // 2))]
            overlaps[(i, j)] = (
                labels,
                {u: rng.choice(components[i]) for u in labels},
                {u: rng.choice(components[j]) for u in labels})
    data = make_split_colimit(index, components, overlaps)
    spaces = {obj: FinTop.discrete(data.objects[obj]) for obj in data.objects}
    return GluingData(data.indexcat, "top", data.objects, data.arrows,
                      FROM_OVERLAPS, spaces)


def seeded(seed):
    return random.Random(seed)
