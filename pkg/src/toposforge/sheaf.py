"""Presheaves of finite sets, the sheaf condition, and local constancy.

A presheaf assigns each object a finite set of element labels and each
arrow f: a -> b a restriction map F(b) -> F(a).  The sheaf condition at a
covering sieve compares F(S) with the matching families over the sieve;
both sides are enumerated exactly.  Everything iterates in lexicographic
order so counts and witnesses are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ValidationFailure, Verdict, fails, holds
from .fincat import FiniteCategory
from .site import CoveringFamily, Sieve, Site, is_connected_object, is_covering_family


class SheafOfSets:
    """Validated presheaf of finite sets.  Build through validate_presheaf."""

    def __init__(self, cat: FiniteCategory, values, restrictions):
        self.cat = cat
        self.values: dict[str, tuple[str, ...]] = {x: tuple(sorted(vs)) for x, vs in values.items()}
        self.restrictions: dict[str, dict[str, str]] = {f: dict(m) for f, m in restrictions.items()}

    def value(self, x: str) -> tuple[str, ...]:
        return self.values[x]

    def restrict(self, f: str, elem: str) -> str:
        return self.restrictions[f][elem]

    def restriction(self, f: str) -> dict[str, str]:
        return self.restrictions[f]


def validate_presheaf(cat: FiniteCategory, values: dict, restrictions: dict) -> SheafOfSets:
    """Check shapes and contravariant functoriality.

    A missing restriction defaults to the identity when the two value sets
    are equal; anything else is a BAD_FUNCTION_SHAPE.
    """
    vals = {}
    for x in cat.objects:
        if x not in values:
            raise ValidationFailure("BAD_FUNCTION_SHAPE", f"no value set for object {x!r}", x)
        listed = list(values[x])
        if len(listed) != len(set(listed)):
            raise ValidationFailure("BAD_FUNCTION_SHAPE", f"duplicate element label at {x!r}", x)
        vals[x] = tuple(sorted(listed))
    for x in sorted(values):
        if x not in set(cat.objects):
            raise ValidationFailure("DANGLING_REFERENCE", f"value set listed for unknown object {x!r}", x)

    maps = {}
    for f in sorted(restrictions):
        if f not in cat.arrows:
            raise ValidationFailure("DANGLING_REFERENCE", f"restriction listed for unknown arrow {f!r}", f)
    for f in cat.arrow_names():
        src, dst = cat.arrows[f]
        if f in restrictions:
            m = dict(restrictions[f])
            if set(m) != set(vals[dst]):
                raise ValidationFailure("BAD_FUNCTION_SHAPE", f"restriction along {f!r} is not total on F({dst!r})", f)
            for e, img in sorted(m.items()):
                if img not in set(vals[src]):
                    raise ValidationFailure(
                        "BAD_FUNCTION_SHAPE", f"restriction along {f!r} sends {e!r} outside F({src!r})", (f, e)
                    )
        else:
            if set(vals[src]) != set(vals[dst]):
                raise ValidationFailure(
                    "BAD_FUNCTION_SHAPE",
                    f"no restriction along {f!r} and value sets differ, so no identity default",
                    f,
                )
            m = {e: e for e in vals[dst]}
        maps[f] = m

    for x in cat.objects:
        ident = cat.identities[x]
        for e in vals[x]:
            if maps[ident][e] != e:
                raise ValidationFailure("NOT_FUNCTORIAL", f"restriction along {ident!r} moves {e!r}", (ident, e))
    for f in cat.arrow_names():
        for g in cat.arrow_names():
            if not cat.composable(g, f):
                continue
            gf = cat.compose(g, f)
            for e in vals[cat.dst(g)]:
                if maps[gf][e] != maps[f][maps[g][e]]:
                    raise ValidationFailure(
                        "NOT_FUNCTORIAL", f"F({g!r}∘{f!r}) != F({f!r})∘F({g!r}) at {e!r}", (g, f, e)
                    )
    return SheafOfSets(cat, vals, maps)


def matching_families(sheaf: SheafOfSets, sieve: Sieve) -> list[tuple[str, ...]]:
    """All matching families over the sieve.

    A family picks x_f in F(dom f) for each arrow f of the sieve so that
    x_{f∘g} = F(g)(x_f) for every precomposition.  Families are tuples
    aligned with sorted(sieve.arrows), in lexicographic order.  The empty
    sieve has exactly one (empty) family.
    """
    cat = sheaf.cat
    arrows = sorted(sieve.arrows)
    index = {f: i for i, f in enumerate(arrows)}
    # constraints[(i, j)] holds maps m with x_j = m(x_i)
    constraints: dict[tuple[int, int], list[dict[str, str]]] = {}
    for f in arrows:
        for g in cat.arrows_into(cat.src(f)):
            fg = cat.compose(f, g)
            pair = (index[f], index[fg])
            constraints.setdefault(pair, []).append(sheaf.restriction(g))

    results: list[tuple[str, ...]] = []
    assignment: list[str] = []

    def consistent(k: int) -> bool:
        for (i, j), maps in constraints.items():
            hi = max(i, j)
            if hi != k or min(i, j) > k:
                continue
            for m in maps:
                if assignment[j] != m[assignment[i]]:
                    return False
        return True

    def extend(k: int) -> None:
        if k == len(arrows):
            results.append(tuple(assignment))
            return
        for x in sheaf.value(cat.src(arrows[k])):
            assignment.append(x)
            if consistent(k):
                extend(k + 1)
            assignment.pop()

    extend(0)
    return results


def restriction_family(sheaf: SheafOfSets, sieve: Sieve, x: str) -> tuple[str, ...]:
    """The family induced by a section: f |-> F(f)(x)."""
    return tuple(sheaf.restrict(f, x) for f in sorted(sieve.arrows))


def is_sheaf(sheaf: SheafOfSets, topology) -> Verdict:
    """Bijectivity of F(S) -> matching families at every listed cover."""
    for s in sheaf.cat.objects:
        for sieve in topology.on(s):
            families = matching_families(sheaf, sieve)
            image = [restriction_family(sheaf, sieve, x) for x in sheaf.value(s)]
            if len(set(image)) != len(image) or set(image) != set(families):
                return fails(
                    "NOT_A_SHEAF",
                    (s, tuple(sorted(sieve.arrows)), len(sheaf.value(s)), len(families)),
                    f"sections over {s!r} number {len(sheaf.value(s))}, matching families {len(families)}",
                )
    return holds()


# ---------------------------------------------------------------------------
# Sheaf objects: representables, products, terminal and empty objects.

def pair_label(x: str, y: str) -> str:
    return f"({x},{y})"


def representable_presheaf(cat: FiniteCategory, x: str) -> SheafOfSets:
    """hom(-, x) with precomposition as restriction."""
    if x not in set(cat.objects):
        raise ValidationFailure("DANGLING_REFERENCE", f"unknown object {x!r}", x)
    values = {w: tuple(cat.hom(w, x)) for w in cat.objects}
    restrictions = {}
    for f in cat.arrow_names():
        src, dst = cat.arrows[f]
        restrictions[f] = {u: cat.compose(u, f) for u in values[dst]}
    return SheafOfSets(cat, values, restrictions)


def is_subcanonical(site: Site) -> bool:
    """Every representable satisfies the sheaf condition.  Cached."""
    if site._subcanonical is None:
        site._subcanonical = all(
            is_sheaf(representable_presheaf(site.cat, x), site.topology) for x in site.cat.objects
        )
    return site._subcanonical


def require_subcanonical(site: Site) -> None:
    if not is_subcanonical(site):
        raise ValidationFailure(
            "NOT_SUBCANONICAL", "a representable fails the sheaf condition on this topology", None
        )


@dataclass(frozen=True)
class SheafObject:
    """Either a representable y(X) or an explicit presheaf."""

    kind: str  # "representable" | "explicit"
    obj: str | None = None
    data: SheafOfSets | None = None

    def materialize(self, site: Site) -> SheafOfSets:
        if self.kind == "representable":
            require_subcanonical(site)
            return representable_presheaf(site.cat, self.obj)
        return self.data


def representable(site: Site, x: str) -> SheafObject:
    require_subcanonical(site)
    if x not in set(site.cat.objects):
        raise ValidationFailure("DANGLING_REFERENCE", f"unknown object {x!r}", x)
    return SheafObject("representable", obj=x)


def explicit(sheaf: SheafOfSets) -> SheafObject:
    return SheafObject("explicit", data=sheaf)


def terminal_object(cat: FiniteCategory) -> SheafObject:
    values = {x: ("*",) for x in cat.objects}
    return SheafObject("explicit", data=SheafOfSets(cat, values, {f: {"*": "*"} for f in cat.arrows}))


def empty_object_of(cat: FiniteCategory) -> SheafObject:
    values = {x: () for x in cat.objects}
    return SheafObject("explicit", data=SheafOfSets(cat, values, {f: {} for f in cat.arrows}))


def product(site: Site, a: SheafObject, b: SheafObject) -> SheafObject:
    """Pointwise product, always returned as an explicit presheaf."""
    fa, fb = a.materialize(site), b.materialize(site)
    cat = site.cat
    values = {
        x: tuple(pair_label(u, v) for u in fa.value(x) for v in fb.value(x)) for x in cat.objects
    }
    restrictions = {}
    for f in cat.arrow_names():
        m = {}
        for u in fa.value(cat.dst(f)):
            for v in fb.value(cat.dst(f)):
                m[pair_label(u, v)] = pair_label(fa.restrict(f, u), fb.restrict(f, v))
        restrictions[f] = m
    return SheafObject("explicit", data=SheafOfSets(cat, values, restrictions))


def is_empty_object(site: Site, e: SheafObject) -> bool:
    """All value sets empty.  Refuses degenerate sites, where an empty
    cover would let a nonempty object have no sections anywhere."""
    if site.is_degenerate():
        raise ValidationFailure("DEGENERATE_SITE", "site lists an empty covering sieve", None)
    sheaf = e.materialize(site)
    return all(not sheaf.value(x) for x in site.cat.objects)


def sections_over(site: Site, e: SheafObject, f: SheafObject | SheafOfSets) -> list[dict]:
    """Natural transformations E -> F, canonically ordered.

    A section maps each element of E(W) to an element of F(W), naturally in
    W.  Returned as dicts keyed by (object, E-element).
    """
    fe = e.materialize(site)
    ff = f.materialize(site) if isinstance(f, SheafObject) else f
    cat = site.cat
    objs = list(cat.objects)
    partial: dict[str, dict[str, str]] = {}
    results: list[dict] = []

    def natural_ok(w: str, eta_w: dict[str, str]) -> bool:
        for v, eta_v in list(partial.items()) + [(w, eta_w)]:
            for g in cat.hom(w, v):
                # g: w -> v, naturality: F(g) ∘ eta_v = eta_w ∘ E(g)
                for elem in fe.value(v):
                    if ff.restrict(g, eta_v[elem]) != eta_w[fe.restrict(g, elem)]:
                        return False
            if v != w:
                for g in cat.hom(v, w):
                    for elem in fe.value(w):
                        if ff.restrict(g, eta_w[elem]) != eta_v[fe.restrict(g, elem)]:
                            return False
        return True

    def extend(k: int) -> None:
        if k == len(objs):
            results.append({(w, elem): img for w, m in partial.items() for elem, img in m.items()})
            return
        w = objs[k]
        elems = fe.value(w)
        for images in itertools.product(ff.value(w), repeat=len(elems)):
            eta_w = dict(zip(elems, images))
            if natural_ok(w, eta_w):
                partial[w] = eta_w
                extend(k + 1)
                del partial[w]

    extend(0)
    results.sort(key=lambda d: tuple(sorted(d.items())))
    return results


def section_key(section: dict) -> tuple:
    return tuple(sorted(section.items()))


# ---------------------------------------------------------------------------
# Local constancy.

def components(site: Site, family: CoveringFamily):
    """Connected components of the family's nerve: (partition, connected)."""
    from .nerve import nerve_graph

    graph = nerve_graph(site, family)
    n = len(family.members)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in graph.edges:
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    partition = sorted(sorted(g) for g in groups.values())
    return partition, len(partition) <= 1


def is_constant_on_slice(sheaf: SheafOfSets, x: str) -> bool:
    """Restrictions within the slice over x are bijections between
    equal-size fibers."""
    cat = sheaf.cat
    above = cat.objects_above(x)
    if not above:
        return True
    sizes = {len(sheaf.value(w)) for w in above}
    if len(sizes) != 1:
        return False
    above_set = set(above)
    for f in cat.arrow_names():
        if cat.dst(f) not in above_set:
            continue
        m = sheaf.restriction(f)
        if len(set(m.values())) != len(sheaf.value(cat.dst(f))):
            return False
    return True


def global_sections(sheaf: SheafOfSets) -> list[dict[str, str]]:
    """Families (x_W) compatible with every restriction."""
    cat = sheaf.cat
    objs = list(cat.objects)
    results: list[dict[str, str]] = []
    partial: dict[str, str] = {}

    def ok(w: str, x: str) -> bool:
        trial = dict(partial)
        trial[w] = x
        for v, y in trial.items():
            for u, z in trial.items():
                for g in cat.hom(u, v):
                    if sheaf.restrict(g, y) != z:
                        return False
        return True

    def extend(k: int) -> None:
        if k == len(objs):
            results.append(dict(partial))
            return
        w = objs[k]
        for x in sheaf.value(w):
            if ok(w, x):
                partial[w] = x
                extend(k + 1)
                del partial[w]

    extend(0)
    results.sort(key=lambda d: tuple(sorted(d.items())))
    return results


def is_constant(sheaf: SheafOfSets) -> bool:
    """Isomorphic to a constant presheaf, decided by enumerating jointly
    bijective tuples of global sections."""
    sizes = {len(sheaf.value(x)) for x in sheaf.cat.objects}
    if len(sizes) != 1:
        return False
    n = sizes.pop()
    if n == 0:
        return True
    sections = global_sections(sheaf)
    if len(sections) < n:
        return False
    for combo in itertools.combinations(sections, n):
        if all(len({s[w] for s in combo}) == n for w in sheaf.cat.objects):
            return True
    return False


def trivializing_family(sheaf: SheafOfSets, site: Site, cap: int = 4096) -> CoveringFamily | None:
    """First covering family with connected, slice-constant members.

    Tries the all-objects family, then subfamilies of the viable pool by
    size and lexicographic order, examining at most cap candidates.  None
    means no family was found, i.e. the presheaf is not locally constant
    relative to this site (assuming the cap was not the limit at desk
    scale the pool search is exhaustive).
    """
    objs = list(site.cat.objects)

    def viable(x: str) -> bool:
        return is_connected_object(site.cat, x) and is_constant_on_slice(sheaf, x)

    def qualifies(members) -> bool:
        fam = CoveringFamily(tuple(members))
        return bool(is_covering_family(site, fam)) and all(viable(m) for m in fam.members)

    examined = 0
    if qualifies(objs):
        return CoveringFamily(tuple(objs))
    examined += 1

    pool = [x for x in objs if viable(x)]
    for size in range(1, len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            if list(combo) == objs:
                continue
            examined += 1
            if examined > cap:
                return None
            fam = CoveringFamily(combo)
            if is_covering_family(site, fam):
                return fam
    return None
