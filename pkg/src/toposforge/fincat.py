"""Finite categories, slice categories, and functor validation.

A category is given by object labels, named arrows, chosen identities and
an explicit composition table.  compose((g, f)) means g-after-f and the
table is total on composable pairs and undefined elsewhere.  All iteration
orders are lexicographic so every reported witness is the first one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationFailure


def identity_name(obj: str) -> str:
    """Default name for an auto-generated identity arrow."""
    return f"id:{obj}"


def slice_arrow_name(underlying: str, src_obj: str, dst_obj: str) -> str:
    """Canonical name of a slice arrow: underlying arrow plus endpoints."""
    return f"{underlying}[{src_obj}>{dst_obj}]"


class FiniteCategory:
    """Validated finite category.  Construct through validate_category."""

    def __init__(self, objects, arrows, identities, compose):
        self.objects: tuple[str, ...] = tuple(sorted(objects))
        self.arrows: dict[str, tuple[str, str]] = dict(arrows)
        self.identities: dict[str, str] = dict(identities)
        self._compose: dict[tuple[str, str], str] = dict(compose)
        self._into: dict[str, list[str]] = {x: [] for x in self.objects}
        self._out: dict[str, list[str]] = {x: [] for x in self.objects}
        for name in sorted(self.arrows):
            src, dst = self.arrows[name]
            self._into[dst].append(name)
            self._out[src].append(name)
        self._identity_set = frozenset(self.identities.values())

    def src(self, f: str) -> str:
        return self.arrows[f][0]

    def dst(self, f: str) -> str:
        return self.arrows[f][1]

    def arrow_names(self) -> list[str]:
        return sorted(self.arrows)

    def arrows_into(self, x: str) -> list[str]:
        return list(self._into[x])

    def arrows_out_of(self, x: str) -> list[str]:
        return list(self._out[x])

    def hom(self, w: str, x: str) -> list[str]:
        return [f for f in self._into[x] if self.arrows[f][0] == w]

    def composable(self, g: str, f: str) -> bool:
        return self.dst(f) == self.src(g)

    def compose(self, g: str, f: str) -> str:
        return self._compose[(g, f)]

    def compose_table(self) -> dict[tuple[str, str], str]:
        return dict(self._compose)

    def is_identity(self, f: str) -> bool:
        return f in self._identity_set

    def objects_above(self, x: str) -> list[str]:
        """Objects admitting at least one arrow into x (x included)."""
        return sorted({self.arrows[f][0] for f in self._into[x]})


@dataclass
class FunctorData:
    """A functor as explicit object and arrow maps."""

    objects: dict[str, str]
    arrows: dict[str, str] = field(default_factory=dict)

    def obj(self, x: str) -> str:
        return self.objects[x]

    def arr(self, f: str) -> str:
        return self.arrows[f]


def _normalize_arrows(raw_arrows):
    out = {}
    for entry in raw_arrows:
        if isinstance(entry, dict):
            name, src, dst = entry["name"], entry["src"], entry["dst"]
        else:
            name, src, dst = entry
        if name in out:
            raise ValidationFailure("DUPLICATE_LABEL", f"arrow name {name!r} appears twice", name)
        out[name] = (src, dst)
    return out


def validate_category(raw: dict) -> FiniteCategory:
    """Check every category law on raw data and return the category.

    raw keys: objects, arrows, optional identities, optional compose.
    Missing identities are created as id:<object>; identity composites are
    filled in automatically and cross-checked against supplied entries.
    """
    objects = list(raw.get("objects", ()))
    if len(objects) != len(set(objects)):
        dup = sorted(x for x in set(objects) if objects.count(x) > 1)[0]
        raise ValidationFailure("DUPLICATE_LABEL", f"object label {dup!r} appears twice", dup)
    obj_set = set(objects)
    arrows = _normalize_arrows(raw.get("arrows", ()))

    for name in sorted(arrows):
        src, dst = arrows[name]
        if src not in obj_set:
            raise ValidationFailure("DANGLING_REFERENCE", f"arrow {name!r} has unknown source {src!r}", (name, src))
        if dst not in obj_set:
            raise ValidationFailure("DANGLING_REFERENCE", f"arrow {name!r} has unknown target {dst!r}", (name, dst))

    identities = dict(raw.get("identities") or {})
    for x, f in sorted(identities.items()):
        if x not in obj_set:
            raise ValidationFailure("DANGLING_REFERENCE", f"identity listed for unknown object {x!r}", x)
        if f not in arrows:
            raise ValidationFailure("DANGLING_REFERENCE", f"identity arrow {f!r} of {x!r} is not an arrow", (x, f))
        if arrows[f] != (x, x):
            raise ValidationFailure("IDENTITY_LAW", f"identity arrow {f!r} of {x!r} has endpoints {arrows[f]}", (x, f))
    for x in sorted(obj_set - set(identities)):
        name = identity_name(x)
        if name in arrows:
            if arrows[name] != (x, x):
                raise ValidationFailure(
                    "IDENTITY_LAW", f"arrow {name!r} is reserved for the identity of {x!r}", (x, name)
                )
        else:
            arrows[name] = (x, x)
        identities[x] = name

    compose = {}
    for key, h in (raw.get("compose") or {}).items():
        g, f = key if isinstance(key, tuple) else tuple(key.split(","))
        compose[(g, f)] = h
    for (g, f), h in sorted(compose.items()):
        for name in (g, f, h):
            if name not in arrows:
                raise ValidationFailure("DANGLING_REFERENCE", f"composite entry ({g},{f})->{h} names unknown arrow {name!r}", name)
        if arrows[f][1] != arrows[g][0]:
            raise ValidationFailure("NOT_COMPOSABLE", f"composite entry for non-composable pair ({g},{f})", (g, f))

    # Fill identity composites, checking supplied entries agree.
    for f in sorted(arrows):
        src, dst = arrows[f]
        for key, expect in (((identities[dst], f), f), ((f, identities[src]), f)):
            if key in compose:
                if compose[key] != expect:
                    raise ValidationFailure("IDENTITY_LAW", f"composite {key} is {compose[key]!r}, not {expect!r}", key)
            else:
                compose[key] = expect

    # Totality and endpoint correctness.
    arrow_names = sorted(arrows)
    for f in arrow_names:
        for g in arrow_names:
            if arrows[f][1] != arrows[g][0]:
                continue
            if (g, f) not in compose:
                raise ValidationFailure("MISSING_COMPOSITE", f"no composite listed for composable pair ({g},{f})", (g, f))
            h = compose[(g, f)]
            if arrows[h] != (arrows[f][0], arrows[g][1]):
                raise ValidationFailure(
                    "BAD_COMPOSITE", f"composite ({g},{f})->{h} has endpoints {arrows[h]}", (g, f, h)
                )

    # Associativity on every composable triple.
    for f in arrow_names:
        for g in arrow_names:
            if arrows[f][1] != arrows[g][0]:
                continue
            gf = compose[(g, f)]
            for h in arrow_names:
                if arrows[g][1] != arrows[h][0]:
                    continue
                if compose[(h, gf)] != compose[(compose[(h, g)], f)]:
                    raise ValidationFailure("ASSOCIATIVITY", f"(h∘g)∘f != h∘(g∘f) for ({h},{g},{f})", (h, g, f))

    return FiniteCategory(objects, arrows, identities, compose)


def slice_category(cat: FiniteCategory, x: str) -> FiniteCategory:
    """The slice over x: objects are arrows into x, arrows are commuting
    triangles, named canonically via slice_arrow_name."""
    if x not in set(cat.objects):
        raise ValidationFailure("DANGLING_REFERENCE", f"unknown object {x!r}", x)
    objs = cat.arrows_into(x)
    arrows = {}
    identities = {}
    compose = {}
    for f in objs:
        for g in objs:
            for h in cat.hom(cat.src(f), cat.src(g)):
                if cat.compose(g, h) == f:
                    arrows[slice_arrow_name(h, f, g)] = ((h, f, g), (f, g))
    for f in objs:
        identities[f] = slice_arrow_name(cat.identities[cat.src(f)], f, f)
    names = {}
    for name, ((h, f, g), _) in arrows.items():
        names[(h, f, g)] = name
    for n1, ((h1, f1, g1), _) in arrows.items():
        for n2, ((h2, f2, g2), _) in arrows.items():
            if g1 != f2:
                continue
            comp = cat.compose(h2, h1)
            compose[(n2, n1)] = names[(comp, f1, g2)]
    return FiniteCategory(
        objects=objs,
        arrows={n: ep for n, (_, ep) in arrows.items()},
        identities=identities,
        compose=compose,
    )


def slice_object_underlying(cat: FiniteCategory, slice_arrow: str) -> str:
    """Underlying arrow of cat wrapped by a slice arrow name."""
    return slice_arrow.split("[", 1)[0]


def full_subcategory(cat: FiniteCategory, objects) -> FiniteCategory:
    """Full subcategory on the given objects."""
    keep = set(objects)
    arrows = {n: ep for n, ep in cat.arrows.items() if ep[0] in keep and ep[1] in keep}
    compose = {k: v for k, v in cat.compose_table().items() if k[0] in arrows and k[1] in arrows}
    identities = {x: f for x, f in cat.identities.items() if x in keep}
    return FiniteCategory(sorted(keep), arrows, identities, compose)


def validate_functor(data: FunctorData, src: FiniteCategory, dst: FiniteCategory) -> FunctorData:
    """Check totality, endpoint preservation, identities and composition."""
    dst_objs = set(dst.objects)
    for x in src.objects:
        if x not in data.objects:
            raise ValidationFailure("NOT_FUNCTORIAL", f"no image for object {x!r}", x)
        if data.objects[x] not in dst_objs:
            raise ValidationFailure("NOT_FUNCTORIAL", f"object {x!r} maps to unknown {data.objects[x]!r}", x)
    for f in src.arrow_names():
        if f not in data.arrows:
            raise ValidationFailure("NOT_FUNCTORIAL", f"no image for arrow {f!r}", f)
        img = data.arrows[f]
        if img not in dst.arrows:
            raise ValidationFailure("NOT_FUNCTORIAL", f"arrow {f!r} maps to unknown {img!r}", f)
        want = (data.objects[src.src(f)], data.objects[src.dst(f)])
        if dst.arrows[img] != want:
            raise ValidationFailure("NOT_FUNCTORIAL", f"arrow {f!r} image {img!r} has endpoints {dst.arrows[img]}, wanted {want}", f)
    for x in src.objects:
        if data.arrows[src.identities[x]] != dst.identities[data.objects[x]]:
            raise ValidationFailure("NOT_FUNCTORIAL", f"identity of {x!r} not sent to an identity", x)
    for f in src.arrow_names():
        for g in src.arrow_names():
            if not src.composable(g, f):
                continue
            if data.arrows[src.compose(g, f)] != dst.compose(data.arrows[g], data.arrows[f]):
                raise ValidationFailure("NOT_FUNCTORIAL", f"composition not preserved on ({g},{f})", (g, f))
    return data


def functor_identity(cat: FiniteCategory) -> FunctorData:
    return FunctorData({x: x for x in cat.objects}, {f: f for f in cat.arrows})


def functor_compose(outer: FunctorData, inner: FunctorData) -> FunctorData:
    """outer after inner."""
    return FunctorData(
        {x: outer.objects[y] for x, y in inner.objects.items()},
        {f: outer.arrows[g] for f, g in inner.arrows.items()},
    )


def functor_equal(a: FunctorData, b: FunctorData) -> bool:
    return a.objects == b.objects and a.arrows == b.arrows


def functor_is_invertible(data: FunctorData) -> bool:
    return len(set(data.objects.values())) == len(data.objects) and len(set(data.arrows.values())) == len(data.arrows)


def functor_invert(data: FunctorData) -> FunctorData:
    return FunctorData(
        {y: x for x, y in data.objects.items()},
        {g: f for f, g in data.arrows.items()},
    )
