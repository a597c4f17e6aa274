"""Geometric structures modeled on a site with a chosen automorphism group.

An atlas carves the structured site into slices, each identified with a
downward-closed part of the model through a chart; transitions between
charts live in the group and satisfy the cocycle law on every overlap
triple.  From that data the module builds the associated locally constant
sheaf, the holonomy representation, the germ space with its developing
labels, the structural bundle with its transverse sections, and the
discrete deformation space Hom(holonomy, G).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .errors import ToposforgeError, ValidationFailure, Verdict, fails, holds
from .fincat import (
    FiniteCategory,
    FunctorData,
    functor_compose,
    functor_equal,
    functor_identity,
    functor_is_invertible,
    slice_arrow_name,
    slice_category,
    validate_functor,
)
from .holonomy import (
    ORDER_BOUND,
    CayleyTable,
    PermutationGroup,
    cayley_of_perm_group,
    enumerate_homomorphisms,
    minimal_generators,
    table_closure,
)
from .nerve import NerveGraph, aut_generators, nerve_graph
from .sheaf import SheafOfSets, validate_presheaf
from .site import (
    CoveringFamily,
    GrothendieckTopology,
    Sieve,
    Site,
    family_sieve,
    generate_sieve,
    is_connected_object,
    is_covering_family,
)

GERM_LIMIT = 100_000


# ---------------------------------------------------------------------------
# induced topology on slices and the local-isomorphism notion


def slice_site(site: Site, x: str) -> Site:
    """Slice category with the topology carried over from the sources.

    A sieve on the slice object f: W -> x is a sieve on W read through the
    bijection between arrows into W and slice arrows into f.
    """
    sl = slice_category(site.cat, x)
    cat = site.cat
    covers = {}
    for f in sl.objects:
        w = cat.src(f)
        sieves = []
        for s in site.covers(w):
            arrows = frozenset(
                slice_arrow_name(u, cat.compose(f, u), f) for u in s.arrows
            )
            sieves.append(Sieve(f, arrows))
        covers[f] = tuple(sieves)
    return Site(sl, GrothendieckTopology(covers, ()))


def is_cover_preserving_functor(data: FunctorData, src: Site, dst: Site) -> Verdict:
    """Images of covering sieves must generate covering sieves."""
    for w in src.cat.objects:
        target = data.obj(w)
        wanted = {s.arrows for s in dst.covers(target)}
        for s in src.covers(w):
            image = generate_sieve(dst.cat, target, [data.arr(a) for a in s.arrows])
            if image.arrows not in wanted:
                return fails(
                    "NOT_COVER_PRESERVING",
                    (w, tuple(sorted(s.arrows)), target),
                    f"the image of a cover of {w!r} does not cover {target!r}",
                )
    return holds()


def validate_local_iso(data: FunctorData, src: Site, dst: Site) -> Verdict:
    """Isomorphism onto a downward-closed full subcategory, covers matching.

    This is the working notion of a local isomorphism between finite
    sites; charts and model changes are both screened through it.
    """
    try:
        validate_functor(data, src.cat, dst.cat)
    except ValidationFailure as err:
        return fails("NOT_LOCAL_ISO", err.witness, err.message)
    objs = list(src.cat.objects)
    arrs = src.cat.arrow_names()
    image_objs = [data.obj(o) for o in objs]
    if len(set(image_objs)) != len(objs):
        return fails("NOT_LOCAL_ISO", None, "not injective on objects")
    if len({data.arr(a) for a in arrs}) != len(arrs):
        return fails("NOT_LOCAL_ISO", None, "not injective on arrows")
    image = set(image_objs)
    for y in image:
        for a in dst.cat.arrows_into(y):
            if dst.cat.src(a) not in image:
                return fails(
                    "NOT_LOCAL_ISO", (y, a), "image is not downward closed"
                )
    preimage_arr = {}
    for o1 in objs:
        for o2 in objs:
            found = {data.arr(h) for h in src.cat.hom(o1, o2)}
            expected = set(dst.cat.hom(data.obj(o1), data.obj(o2)))
            if found != expected:
                return fails(
                    "NOT_LOCAL_ISO",
                    (o1, o2),
                    "not full onto the image subcategory",
                )
    for a in arrs:
        preimage_arr[data.arr(a)] = a
    for w in objs:
        target = data.obj(w)
        wanted = {s.arrows for s in dst.covers(target)}
        reachable = set()
        for s in src.covers(w):
            forward = frozenset(data.arr(a) for a in s.arrows)
            if forward not in wanted:
                return fails(
                    "NOT_LOCAL_ISO", (w, tuple(sorted(s.arrows))), "a cover is not sent to a cover"
                )
            reachable.add(forward)
        have = {s.arrows for s in src.covers(w)}
        for t in dst.covers(target):
            if not set(t.arrows) <= set(preimage_arr):
                return fails(
                    "NOT_LOCAL_ISO", (w, target), "a model cover leaves the image"
                )
            backward = frozenset(preimage_arr[a] for a in t.arrows)
            if backward not in have:
                return fails(
                    "NOT_LOCAL_ISO", (w, target), "a model cover does not pull back to a cover"
                )
    return holds()


# ---------------------------------------------------------------------------
# the model group


class AutomorphismGroup:
    """Named invertible cover-preserving endofunctors, closed under
    composition, with the multiplication table made explicit."""

    def __init__(self, site: Site, functors: dict):
        self.site = site
        self.names = tuple(sorted(functors))
        self.functors = {n: functors[n] for n in self.names}
        cat = site.cat
        ident = functor_identity(cat)
        for n in self.names:
            f = self.functors[n]
            validate_functor(f, cat, cat)
            if not functor_is_invertible(f):
                raise ValidationFailure("NOT_INVERTIBLE", f"element {n!r} is not invertible", n)
            preserving = is_cover_preserving_functor(f, site, site)
            if not preserving:
                raise ValidationFailure(
                    "NOT_COVER_PRESERVING", f"element {n!r} does not preserve covers", (n, preserving.witness)
                )
        for a, b in itertools.combinations(self.names, 2):
            if functor_equal(self.functors[a], self.functors[b]):
                raise ValidationFailure("DUPLICATE_LABEL", f"{a!r} and {b!r} are the same functor", (a, b))
        self.identity = None
        for n in self.names:
            if functor_equal(self.functors[n], ident):
                self.identity = n
        if self.identity is None:
            raise ValidationFailure("NOT_A_GROUP", "the identity functor is missing", None)
        self.mult = {}
        for a in self.names:
            for b in self.names:
                composite = functor_compose(self.functors[a], self.functors[b])
                match = [n for n in self.names if functor_equal(self.functors[n], composite)]
                if not match:
                    raise ValidationFailure("NOT_A_GROUP", f"({a!r}, {b!r}) composes outside the set", (a, b))
                self.mult[(a, b)] = match[0]
        self.inverse = {}
        for a in self.names:
            inv = [b for b in self.names if self.mult[(a, b)] == self.identity]
            if not inv:
                raise ValidationFailure("NOT_A_GROUP", f"{a!r} has no inverse", a)
            self.inverse[a] = inv[0]
        self._table = None

    def order(self) -> int:
        return len(self.names)

    def times(self, a: str, b: str) -> str:
        return self.mult[(a, b)]

    def inv(self, a: str) -> str:
        return self.inverse[a]

    def act_obj(self, g: str, x: str) -> str:
        return self.functors[g].obj(x)

    def act_arr(self, g: str, a: str) -> str:
        return self.functors[g].arr(a)

    def table(self) -> CayleyTable:
        if self._table is None:
            self._table = CayleyTable(names=self.names, identity=self.identity, mult=dict(self.mult))
        return self._table


def subgroup_table(group: AutomorphismGroup, elements) -> CayleyTable:
    """Multiplication table of a subset that is in fact a subgroup."""
    names = tuple(sorted(set(elements)))
    if group.identity not in names:
        raise ValidationFailure("NOT_A_GROUP", "subset misses the identity", names)
    mult = {}
    for a in names:
        for b in names:
            c = group.times(a, b)
            if c not in set(names):
                raise ValidationFailure("NOT_A_GROUP", f"({a!r}, {b!r}) leaves the subset", (a, b))
            mult[(a, b)] = c
    return CayleyTable(names=names, identity=group.identity, mult=mult)


def check_ppa(group: AutomorphismGroup) -> Verdict:
    """No two distinct elements may agree on everything over some object.

    Agreement over X means equality on every object that maps to X and on
    every arrow whose codomain does.
    """
    cat = group.site.cat
    above = {x: set(cat.objects_above(x)) for x in cat.objects}
    for g, h in itertools.combinations(group.names, 2):
        fg, fh = group.functors[g], group.functors[h]
        for x in cat.objects:
            objs = above[x]
            if any(fg.obj(w) != fh.obj(w) for w in objs):
                continue
            if any(fg.arr(a) != fh.arr(a) for a in cat.arrow_names() if cat.dst(a) in objs):
                continue
            return fails(
                "PPA_VIOLATION",
                (g, h, x),
                f"{g!r} and {h!r} agree on everything over {x!r}",
            )
    return holds()


# ---------------------------------------------------------------------------
# charts, atlases, cocycle validation


@dataclass(frozen=True)
class Chart:
    index: int
    domain: str
    functor: FunctorData
    image_objects: tuple[str, ...]


@dataclass(frozen=True)
class Atlas:
    site: Site
    model: AutomorphismGroup
    family: CoveringFamily
    charts: tuple[Chart, ...]
    transitions: dict  # ordered index pair -> model element name
    graph: NerveGraph

    def chart(self, i: int) -> Chart:
        return self.charts[i]

    def transition(self, i: int, j: int) -> str:
        return self.transitions[(i, j)]


def _overlap_elements(cat: FiniteCategory, first: str, second: str):
    out = []
    for w in cat.objects:
        for u in cat.hom(w, first):
            for v in cat.hom(w, second):
                out.append((w, u, v))
    return out


def _transition_compatible(atlas_parts, g: str, i: int, j: int):
    """First overlap element where g fails g∘(chart j) = chart i, or None."""
    site, model, members, charts = atlas_parts
    cat = site.cat
    for w, u, v in _overlap_elements(cat, members[i], members[j]):
        if model.act_obj(g, charts[j].obj(v)) != charts[i].obj(u):
            return (w, u, v)
        for a in cat.arrows_into(w):
            u2, v2 = cat.compose(u, a), cat.compose(v, a)
            name_i = slice_arrow_name(a, u2, u)
            name_j = slice_arrow_name(a, v2, v)
            if model.act_arr(g, charts[j].arr(name_j)) != charts[i].arr(name_i):
                return (w, u, v, a)
    return None


def validate_atlas(
    site: Site,
    model: AutomorphismGroup,
    family: CoveringFamily,
    charts,
    transitions: dict | None = None,
) -> Atlas:
    """Screen charts as local isomorphisms, then settle the transitions.

    Omitted transitions are derived one edge at a time as the unique group
    element matching the two charts on the overlap; supplied tables are kept
    but swept for the cocycle law first (so a corrupted entry surfaces as
    COCYCLE_VIOLATION) and for chart compatibility second.
    """
    ppa = check_ppa(model)
    if not ppa:
        raise ValidationFailure("PPA_VIOLATION", ppa.detail, ppa.witness)
    covering = is_covering_family(site, family)
    if not covering:
        raise ValidationFailure("NOT_COVERING", covering.detail, covering.witness)
    members = family.members
    for m in members:
        if not is_connected_object(site.cat, m):
            raise ValidationFailure("NOT_CONNECTED", f"family member {m!r} is not connected", m)
    charts = list(charts)
    if len(charts) != len(members):
        raise ValidationFailure(
            "BAD_FUNCTION_SHAPE",
            f"{len(charts)} charts for {len(members)} family members",
            None,
        )
    graph = nerve_graph(site, family)
    cat = site.cat
    built = []
    for i, functor in enumerate(charts):
        local = validate_local_iso(functor, slice_site(site, members[i]), model.site)
        if not local:
            raise ValidationFailure(
                "CHART_NOT_LOCAL_ISO",
                f"chart {i} over {members[i]!r}: {local.detail}",
                (i, local.witness),
            )
        image = tuple(sorted({functor.obj(o) for o in slice_category(cat, members[i]).objects}))
        built.append(Chart(i, members[i], functor, image))
    charts = tuple(built)
    # two arrows from one object into a member would make the identity
    # transition on the diagonal contradict chart injectivity
    for i, m in enumerate(members):
        for w in cat.objects:
            if len(cat.hom(w, m)) > 1:
                raise ValidationFailure(
                    "TRANSITION_INCOMPATIBLE",
                    f"{w!r} maps to {m!r} in two ways; the identity transition cannot match both",
                    (m, m, w),
                )

    parts = (site, model, members, tuple(c.functor for c in charts))
    n = len(members)
    pairs = {(i, i) for i in range(n)} | {(a, b) for a, b in graph.edges} | {
        (b, a) for a, b in graph.edges
    }

    def derive(a: int, b: int) -> str:
        found = [g for g in model.names if _transition_compatible(parts, g, a, b) is None]
        if not found:
            raise ValidationFailure(
                "NO_TRANSITION_EXISTS",
                f"no group element matches charts {a} and {b} on their overlap",
                (members[a], members[b]),
            )
        if len(found) > 1:
            raise ValidationFailure(
                "TRANSITION_NOT_UNIQUE",
                f"charts {a} and {b} agree with {len(found)} group elements; "
                "unique continuation fails",
                (members[a], members[b], tuple(found[:2])),
            )
        return found[0]

    table = {}
    if transitions is not None:
        for key, g in transitions.items():
            pair = (int(key[0]), int(key[1]))
            if pair not in pairs:
                raise ValidationFailure(
                    "DANGLING_REFERENCE", f"transition {pair} names a pair without overlap", pair
                )
            if g not in set(model.names):
                raise ValidationFailure(
                    "DANGLING_REFERENCE", f"transition {pair} names unknown element {g!r}", (pair, g)
                )
            table[pair] = g
    for i in range(n):
        table.setdefault((i, i), model.identity)
    for a, b in graph.edges:
        if (a, b) not in table and (b, a) in table:
            table[(a, b)] = model.inv(table[(b, a)])
        if (a, b) not in table:
            table[(a, b)] = derive(a, b)
        if (b, a) not in table:
            table[(b, a)] = model.inv(table[(a, b)])

    def triple_overlap(i: int, j: int, k: int) -> bool:
        return any(
            cat.hom(w, members[i]) and cat.hom(w, members[j]) and cat.hom(w, members[k])
            for w in cat.objects
        )

    for i in range(n):
        for j in range(n):
            for k in range(n):
                if (i, j) not in table or (j, k) not in table or (i, k) not in table:
                    continue
                if not triple_overlap(i, j, k):
                    continue
                if model.times(table[(i, j)], table[(j, k)]) != table[(i, k)]:
                    raise ValidationFailure(
                        "COCYCLE_VIOLATION",
                        f"g({i},{j})·g({j},{k}) ≠ g({i},{k})",
                        (
                            (members[i], members[j], members[k]),
                            (table[(i, j)], table[(j, k)], table[(i, k)]),
                        ),
                    )
    for i, j in sorted(pairs):
        if i == j:
            continue
        clash = _transition_compatible(parts, table[(i, j)], i, j)
        if clash is not None:
            raise ValidationFailure(
                "TRANSITION_INCOMPATIBLE",
                f"transition {table[(i, j)]!r} does not carry chart {j} to chart {i}",
                (members[i], members[j], clash),
            )
    return Atlas(site, model, family, charts, table, graph)


# ---------------------------------------------------------------------------
# the associated locally constant sheaf


def _member_indices(cat: FiniteCategory, members) -> dict:
    return {
        w: [i for i, m in enumerate(members) if cat.hom(w, m)] for w in cat.objects
    }


def _family_label(assignment: dict) -> str:
    return "{" + ";".join(f"{f}={assignment[f]}" for f in sorted(assignment)) + "}"


def structure_sheaf(atlas: Atlas) -> SheafOfSets:
    """Fiber G over every charted object, glued by left multiplication.

    Objects not over any family member get the limit of their covering
    sieve: families of charted values compatible under all restrictions.
    """
    site, model = atlas.site, atlas.model
    cat = site.cat
    members = atlas.family.members
    over = _member_indices(cat, members)
    labels = tuple(model.names)
    values = {w: labels for w in cat.objects if over[w]}
    restrictions = {}
    for f in cat.arrow_names():
        a, b = cat.src(f), cat.dst(f)
        if over[a] and over[b]:
            g = atlas.transitions[(over[a][0], over[b][0])]
            restrictions[f] = {s: model.times(g, s) for s in labels}

    bare = sorted(w for w in cat.objects if not over[w])
    families = {}
    for w in bare:
        arrows = sorted(family_sieve(site, atlas.family, w).arrows)
        found = []
        assign = {}

        def fits(k: int, arrows=arrows, assign=assign) -> bool:
            f = arrows[k]
            for m, x in assign.items():
                for u in cat.hom(cat.src(f), cat.src(m)):
                    if cat.compose(m, u) == f and restrictions[u][x] != assign[f]:
                        return False
                for u in cat.hom(cat.src(m), cat.src(f)):
                    if cat.compose(f, u) == m and restrictions[u][assign[f]] != x:
                        return False
            for u in cat.hom(cat.src(f), cat.src(f)):
                if cat.compose(f, u) == f and restrictions[u][assign[f]] != assign[f]:
                    return False
            return True

        def extend(k: int) -> None:
            if k == len(arrows):
                found.append(dict(assign))
                return
            f = arrows[k]
            for x in values[cat.src(f)]:
                assign[f] = x
                if fits(k):
                    extend(k + 1)
                del assign[f]

        extend(0)
        families[w] = {_family_label(x): x for x in found}
        values[w] = tuple(sorted(families[w]))

    for f in cat.arrow_names():
        a, b = cat.src(f), cat.dst(f)
        if over[b]:
            continue
        if over[a]:
            restrictions[f] = {
                label: fam[f] for label, fam in families[b].items()
            }
        else:
            arrows_a = sorted(family_sieve(site, atlas.family, a).arrows)
            m = {}
            for label, fam in families[b].items():
                image = {g: fam[cat.compose(f, g)] for g in arrows_a}
                m[label] = _family_label(image)
            restrictions[f] = m
    return validate_presheaf(cat, values, restrictions)


# ---------------------------------------------------------------------------
# holonomy representation of the structure


@dataclass(frozen=True)
class StructureHolonomy:
    base: int
    generator_walks: tuple
    generator_images: tuple[str, ...]
    image: tuple[str, ...]

    def order(self) -> int:
        return len(self.image)


def structure_holonomy(atlas: Atlas, base: int = 0) -> StructureHolonomy:
    """Walk products of transitions over the loop generators at base."""
    model = atlas.model
    walks = aut_generators(atlas.graph, base)
    images = []
    for walk in walks:
        g = model.identity
        for p, q in zip(walk.vertices, walk.vertices[1:]):
            g = model.times(g, atlas.transitions[(p, q)])
        images.append(g)
    closure = tuple(sorted(table_closure(model.table(), images)))
    return StructureHolonomy(
        base, tuple(w.vertices for w in walks), tuple(images), closure
    )


# ---------------------------------------------------------------------------
# germ space and the developing labels


@dataclass(frozen=True)
class GermComponent:
    germs: tuple[tuple[str, str], ...]
    base_vertex: int
    fiber: tuple[str, ...]
    degree: int
    object_counts: dict
    dev: dict
    dev_arrows: dict
    dev_counts: dict
    monodromy: PermutationGroup


@dataclass(frozen=True)
class GermSpace:
    atlas: Atlas
    sheaf: SheafOfSets
    germs: tuple[tuple[str, str], ...]
    components: tuple[GermComponent, ...]


def developing(atlas: Atlas, sheaf: SheafOfSets | None = None) -> GermSpace:
    """Split the germs of structure-sheaf sections into covering components.

    A germ is a pair (object, section); arrows are inherited from the site
    by restricting the section.  On charted objects each germ is labeled by
    a model object — the chart image translated back by the section — and
    the labeling is checked to be functorial along every germ arrow.
    """
    if sheaf is None:
        sheaf = structure_sheaf(atlas)
    site, model = atlas.site, atlas.model
    cat = site.cat
    members = atlas.family.members
    over = _member_indices(cat, members)
    total = sum(len(sheaf.value(w)) for w in cat.objects)
    if total > GERM_LIMIT:
        raise ValidationFailure(
            "SITE_TOO_LARGE", f"{total} germs exceed the materialization limit", total
        )
    germs = [(w, s) for w in cat.objects for s in sheaf.value(w)]
    index = {g: k for k, g in enumerate(germs)}
    parent = list(range(len(germs)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        parent[find(a)] = find(b)

    for f in cat.arrow_names():
        a, b = cat.src(f), cat.dst(f)
        for s in sheaf.value(b):
            union(index[(a, sheaf.restrict(f, s))], index[(b, s)])

    buckets: dict[int, list] = {}
    for g in germs:
        buckets.setdefault(find(index[g]), []).append(g)

    def chart_anchor(w: str):
        i0 = over[w][0]
        u = cat.hom(w, members[i0])[0]
        return i0, u

    components = []
    for bucket in sorted(buckets.values(), key=lambda b: min(b)):
        comp = tuple(sorted(bucket))
        comp_set = set(comp)
        counts = Counter(w for w, _ in comp)
        charted_counts = {counts[w] for w, _ in comp if over[w]}
        if len(charted_counts) != 1:
            raise ToposforgeError(
                f"germ counts over charted objects differ: {sorted(charted_counts)}"
            )
        degree = charted_counts.pop()
        base_vertex = min(
            i for i, m in enumerate(members) if any(w == m for w, _ in comp)
        )
        fiber = tuple(sorted(s for w, s in comp if w == members[base_vertex]))
        dev = {}
        for w, s in comp:
            if not over[w]:
                continue
            i0, u = chart_anchor(w)
            dev[(w, s)] = model.act_obj(model.inv(s), atlas.charts[i0].functor.obj(u))
        dev_arrows = {}
        for f in cat.arrow_names():
            a, b = cat.src(f), cat.dst(f)
            if not over[b]:
                continue
            for s in sheaf.value(b):
                if (b, s) not in comp_set:
                    continue
                i0, u_b = chart_anchor(b)
                v = cat.compose(u_b, f)
                name = slice_arrow_name(f, v, u_b)
                arrow = model.act_arr(model.inv(s), atlas.charts[i0].functor.arr(name))
                src_dev = dev[(a, sheaf.restrict(f, s))]
                dst_dev = dev[(b, s)]
                if model.site.cat.arrows[arrow] != (src_dev, dst_dev):
                    raise ToposforgeError(
                        f"developing labels break along {f!r} at section {s!r}"
                    )
                dev_arrows[(f, b, s)] = arrow
        hol = structure_holonomy(atlas, base_vertex)
        gens = [{s: model.times(g, s) for s in fiber} for g in hol.generator_images]
        monodromy = PermutationGroup(fiber, gens)
        components.append(
            GermComponent(
                germs=comp,
                base_vertex=base_vertex,
                fiber=fiber,
                degree=degree,
                object_counts=dict(counts),
                dev=dev,
                dev_arrows=dev_arrows,
                dev_counts=dict(Counter(dev.values())),
                monodromy=monodromy,
            )
        )
    return GermSpace(atlas, sheaf, tuple(germs), tuple(components))


# ---------------------------------------------------------------------------
# the structural bundle and its sections


@dataclass(frozen=True)
class StructuralBundle:
    site: Site
    model: AutomorphismGroup
    family: CoveringFamily
    graph: NerveGraph
    clutching: dict  # ordered index pair -> model element name


@dataclass(frozen=True)
class Section:
    functors: tuple[FunctorData, ...]


@dataclass(frozen=True)
class SectionReport:
    compatible: Verdict
    transverse: Verdict


def structural_bundle(atlas: Atlas) -> StructuralBundle:
    return StructuralBundle(
        atlas.site, atlas.model, atlas.family, atlas.graph, dict(atlas.transitions)
    )


def tautological_section(atlas: Atlas) -> Section:
    return Section(tuple(c.functor for c in atlas.charts))


def validate_section(bundle: StructuralBundle, section: Section) -> SectionReport:
    """Overlap compatibility against the clutching, then transversality.

    Both verdicts are computed; a section may be glueable yet collapse
    slices (compatible, not transverse), or vice versa.
    """
    site, model = bundle.site, bundle.model
    cat = site.cat
    members = bundle.family.members
    if len(section.functors) != len(members):
        raise ValidationFailure(
            "BAD_FUNCTION_SHAPE",
            f"{len(section.functors)} slice morphisms for {len(members)} members",
            None,
        )
    for i, f in enumerate(section.functors):
        validate_functor(f, slice_category(cat, members[i]), model.site.cat)
    parts = (site, model, members, section.functors)
    compatible = holds()
    for i, j in sorted(bundle.clutching):
        clash = _transition_compatible(parts, bundle.clutching[(i, j)], i, j)
        if clash is not None:
            compatible = fails(
                "SECTION_INCOMPATIBLE",
                (members[i], members[j], clash),
                f"clutching {bundle.clutching[(i, j)]!r} does not glue the "
                f"slice morphisms over ({members[i]!r}, {members[j]!r})",
            )
            break
    transverse = holds()
    for i, f in enumerate(section.functors):
        local = validate_local_iso(f, slice_site(site, members[i]), model.site)
        if not local:
            transverse = fails(
                "NOT_TRANSVERSE",
                (members[i], local.witness),
                f"slice morphism {i} over {members[i]!r}: {local.detail}",
            )
            break
    return SectionReport(compatible, transverse)


def structure_from_section(bundle: StructuralBundle, section: Section) -> Atlas:
    report = validate_section(bundle, section)
    if not report.compatible:
        raise ValidationFailure(
            "SECTION_INCOMPATIBLE", report.compatible.detail, report.compatible.witness
        )
    if not report.transverse:
        raise ValidationFailure(
            "NOT_TRANSVERSE", report.transverse.detail, report.transverse.witness
        )
    return validate_atlas(
        bundle.site, bundle.model, bundle.family, section.functors, dict(bundle.clutching)
    )


# ---------------------------------------------------------------------------
# model change


def check_group_homomorphism(source: AutomorphismGroup, target: AutomorphismGroup, mapping: dict) -> None:
    if set(mapping) != set(source.names):
        raise ValidationFailure("DANGLING_REFERENCE", "mapping is not total on the group", None)
    bad = [v for v in mapping.values() if v not in set(target.names)]
    if bad:
        raise ValidationFailure("DANGLING_REFERENCE", f"unknown target element {bad[0]!r}", bad[0])
    for a in source.names:
        for b in source.names:
            if mapping[source.times(a, b)] != target.times(mapping[a], mapping[b]):
                raise ValidationFailure(
                    "NOT_A_HOMOMORPHISM", f"multiplicativity fails on ({a!r}, {b!r})", (a, b)
                )


def change_model(
    atlas: Atlas,
    target: AutomorphismGroup,
    phi: FunctorData,
    group_map: dict,
) -> Atlas:
    """Push the structure through a local isomorphism of models.

    Equivariance phi∘g = group_map(g)∘phi is demanded for every element;
    charts are post-composed and transitions renamed, then the whole
    result is revalidated from scratch.
    """
    local = validate_local_iso(phi, atlas.model.site, target.site)
    if not local:
        raise ValidationFailure("NOT_LOCAL_ISO", local.detail, local.witness)
    check_group_homomorphism(atlas.model, target, group_map)
    for g in atlas.model.names:
        lhs = functor_compose(phi, atlas.model.functors[g])
        rhs = functor_compose(target.functors[group_map[g]], phi)
        if not functor_equal(lhs, rhs):
            raise ValidationFailure(
                "NOT_EQUIVARIANT", f"phi∘{g!r} differs from {group_map[g]!r}∘phi", g
            )
    charts = [functor_compose(phi, c.functor) for c in atlas.charts]
    transitions = {pair: group_map[g] for pair, g in atlas.transitions.items()}
    return validate_atlas(atlas.site, target, atlas.family, charts, transitions)


# ---------------------------------------------------------------------------
# morphisms of structured sites


@dataclass(frozen=True)
class CgMorphism:
    assignment: dict  # source chart index -> target chart index
    k: dict  # source chart index -> model element name


def check_cg_morphism(
    f: FunctorData,
    source: Atlas,
    target: Atlas,
    assignment: dict | None = None,
) -> CgMorphism:
    """Solve, chart by chart, for the group element matching f across charts.

    Each source chart needs a target chart receiving the image of its
    member; when that choice is not forced the caller must pass it in.
    """
    model = source.model
    if target.model.names != model.names or any(
        not functor_equal(target.model.functors[n], model.functors[n]) for n in model.names
    ):
        raise ValidationFailure("BAD_FUNCTION_SHAPE", "the two atlases use different models", None)
    validate_functor(f, source.site.cat, target.site.cat)
    preserving = is_cover_preserving_functor(f, source.site, target.site)
    if not preserving:
        raise ValidationFailure("NOT_COVER_PRESERVING", preserving.detail, preserving.witness)
    src_cat, dst_cat = source.site.cat, target.site.cat
    chosen = {}
    for i, m in enumerate(source.family.members):
        z = f.obj(m)
        candidates = [
            j for j, m2 in enumerate(target.family.members) if dst_cat.hom(z, m2)
        ]
        if assignment is not None and i in assignment:
            j = assignment[i]
            if j not in candidates:
                raise ValidationFailure(
                    "NO_K_EXISTS", f"assigned target chart {j} does not receive chart {i}", (i, j)
                )
            chosen[i] = j
        elif not candidates:
            raise ValidationFailure(
                "NO_K_EXISTS", f"no target chart receives the image of {m!r}", i
            )
        elif len(candidates) > 1:
            raise ValidationFailure(
                "AMBIGUOUS_TARGET_CHART",
                f"chart {i} could land in target charts {candidates}",
                (i, tuple(candidates)),
            )
        else:
            chosen[i] = candidates[0]
    k_table = {}
    for i, m in enumerate(source.family.members):
        j = chosen[i]
        m2 = target.family.members[j]
        a = dst_cat.hom(f.obj(m), m2)[0]
        sl = slice_category(src_cat, m)
        phi_i = source.charts[i].functor
        phi_j = target.charts[j].functor

        def push_obj(u: str, a=a) -> str:
            return dst_cat.compose(a, f.arr(u))

        def matches(g: str, a=a, sl=sl, phi_i=phi_i, phi_j=phi_j) -> bool:
            for u in sl.objects:
                if model.act_obj(g, phi_i.obj(u)) != phi_j.obj(push_obj(u)):
                    return False
            for name in sl.arrow_names():
                w = name.split("[", 1)[0]
                u2, u = sl.arrows[name]
                image = slice_arrow_name(f.arr(w), push_obj(u2), push_obj(u))
                if model.act_arr(g, phi_i.arr(name)) != phi_j.arr(image):
                    return False
            return True

        found = [g for g in model.names if matches(g)]
        if not found:
            raise ValidationFailure(
                "NO_K_EXISTS", f"no group element carries chart {i} into target chart {j}", (i, j)
            )
        if len(found) > 1:
            raise ValidationFailure(
                "TRANSITION_NOT_UNIQUE",
                f"{len(found)} group elements carry chart {i} into target chart {j}",
                (i, j, tuple(found[:2])),
            )
        k_table[i] = found[0]
    return CgMorphism(chosen, k_table)


# ---------------------------------------------------------------------------
# deformations: representations of the holonomy and flat bundles


@dataclass(frozen=True)
class DeformationSet:
    source: CayleyTable
    target: CayleyTable
    representations: tuple


def enumerate_representations(hol, model: AutomorphismGroup) -> DeformationSet:
    """All homomorphisms from a holonomy image into the model group."""
    if isinstance(hol, PermutationGroup):
        source = cayley_of_perm_group(hol)
    elif isinstance(hol, CayleyTable):
        source = hol
    else:
        raise ValidationFailure("BAD_FUNCTION_SHAPE", "expected a group or a table", type(hol).__name__)
    target = model.table()
    maps = enumerate_homomorphisms(source, target, bound=ORDER_BOUND)
    return DeformationSet(source, target, tuple(maps))


@dataclass(frozen=True)
class FlatBundle:
    component: GermComponent
    model: AutomorphismGroup
    representation: dict

    def gamma(self, h: str) -> FunctorData:
        return self.model.functors[self.representation[h]]


def flat_bundle(component: GermComponent, representation: dict, model: AutomorphismGroup) -> FlatBundle:
    """Twist the model fiber over a germ component by a representation.

    gamma acts as (x, y) -> (x, rep(h)(y)); the action law is checked on
    every pair through actual functor composition, not just the tables.
    """
    source = cayley_of_perm_group(component.monodromy)
    if set(representation) != set(source.names):
        raise ValidationFailure(
            "DANGLING_REFERENCE", "representation is not total on the deck group", None
        )
    for v in representation.values():
        if v not in set(model.names):
            raise ValidationFailure("DANGLING_REFERENCE", f"unknown element {v!r}", v)
    if representation[source.identity] != model.identity:
        raise ValidationFailure(
            "NOT_A_HOMOMORPHISM", "identity is not sent to the identity", source.identity
        )
    for a in source.names:
        for b in source.names:
            expected = representation[source.times(a, b)]
            composite = functor_compose(
                model.functors[representation[a]], model.functors[representation[b]]
            )
            if not functor_equal(composite, model.functors[expected]):
                raise ValidationFailure(
                    "NOT_A_HOMOMORPHISM", f"action law fails on ({a!r}, {b!r})", (a, b)
                )
    return FlatBundle(component, model, dict(representation))


def deformation_rigidity(deformations: DeformationSet) -> Verdict:
    """Two representations agreeing on a generating set agree everywhere.

    The discrete stand-in for deformation continuity: distance zero on
    generators forces equality.
    """
    gens = minimal_generators(deformations.source)
    reps = deformations.representations
    for a, b in itertools.combinations(range(len(reps)), 2):
        if all(reps[a][g] == reps[b][g] for g in gens) and reps[a] != reps[b]:
            return fails(
                "NOT_RIGID",
                (a, b),
                "representations agree on generators but differ elsewhere",
            )
    return holds(f"{len(reps)} representations separated by {len(gens)} generators")
