"""Sieves, Grothendieck topologies and covering families on finite sites.

A sieve on S is a set of arrows with codomain S closed under precomposition.
A topology assigns each object a nonempty set of covering sieves subject to
the stability and local-character axioms, both checked exhaustively (the
local-character sweep enumerates every sieve on the object, which is fine
at desk scale).  Degenerate data (a missing maximal sieve, an empty sieve
listed as a cover) is accepted with a warning; downstream constructions
that need better behaviour refuse it there.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationFailure, Verdict, fails, holds
from .fincat import FiniteCategory

LOCAL_CHECK_LIMIT = 14  # 2**14 generator subsets per object at most


@dataclass(frozen=True)
class Sieve:
    """target object plus a precomposition-closed set of arrows into it."""

    target: str
    arrows: frozenset[str]

    def key(self) -> tuple[int, tuple[str, ...]]:
        return (len(self.arrows), tuple(sorted(self.arrows)))


def maximal_sieve(cat: FiniteCategory, target: str) -> Sieve:
    return Sieve(target, frozenset(cat.arrows_into(target)))


def empty_sieve(target: str) -> Sieve:
    return Sieve(target, frozenset())


def check_sieve(cat: FiniteCategory, sieve: Sieve) -> None:
    """Raise unless the arrow set really is a sieve on its target."""
    for f in sorted(sieve.arrows):
        if f not in cat.arrows:
            raise ValidationFailure("DANGLING_REFERENCE", f"sieve on {sieve.target!r} lists unknown arrow {f!r}", f)
        if cat.dst(f) != sieve.target:
            raise ValidationFailure(
                "WRONG_CODOMAIN", f"arrow {f!r} targets {cat.dst(f)!r}, not {sieve.target!r}", f
            )
        for g in cat.arrows_into(cat.src(f)):
            if cat.compose(f, g) not in sieve.arrows:
                raise ValidationFailure(
                    "NOT_CLOSED", f"sieve on {sieve.target!r} lacks {f!r}∘{g!r}", (f, g)
                )


def generate_sieve(cat: FiniteCategory, target: str, generators) -> Sieve:
    """Smallest sieve on target containing the generators."""
    gens = sorted(set(generators))
    arrows = set()
    for f in gens:
        if f not in cat.arrows:
            raise ValidationFailure("DANGLING_REFERENCE", f"unknown generator arrow {f!r}", f)
        if cat.dst(f) != target:
            raise ValidationFailure("WRONG_CODOMAIN", f"generator {f!r} targets {cat.dst(f)!r}, not {target!r}", f)
        for g in cat.arrows_into(cat.src(f)):
            arrows.add(cat.compose(f, g))
    return Sieve(target, frozenset(arrows))


def pullback_sieve(cat: FiniteCategory, sieve: Sieve, f: str) -> Sieve:
    """Arrows g into dom(f) with f∘g in the sieve."""
    if f not in cat.arrows:
        raise ValidationFailure("DANGLING_REFERENCE", f"unknown arrow {f!r}", f)
    if cat.dst(f) != sieve.target:
        raise ValidationFailure("WRONG_CODOMAIN", f"cannot pull a sieve on {sieve.target!r} back along {f!r}", f)
    t = cat.src(f)
    arrows = frozenset(g for g in cat.arrows_into(t) if cat.compose(f, g) in sieve.arrows)
    return Sieve(t, arrows)


def all_sieves_on(cat: FiniteCategory, target: str) -> list[Sieve]:
    """Every sieve on target, canonically ordered.  Exhaustive, so guarded."""
    into = cat.arrows_into(target)
    if len(into) > LOCAL_CHECK_LIMIT:
        raise ValidationFailure(
            "SITE_TOO_LARGE",
            f"{target!r} has {len(into)} incoming arrows; exhaustive sieve enumeration is capped at {LOCAL_CHECK_LIMIT}",
            target,
        )
    seen = {empty_sieve(target)}
    for mask in range(1, 1 << len(into)):
        gens = [into[i] for i in range(len(into)) if mask >> i & 1]
        seen.add(generate_sieve(cat, target, gens))
    return sorted(seen, key=Sieve.key)


class GrothendieckTopology:
    """Covering sieves per object, with non-fatal degeneracy warnings."""

    def __init__(self, covers: dict[str, tuple[Sieve, ...]], warnings: tuple[tuple[str, str], ...]):
        self.covers = {x: tuple(sorted(set(rs), key=Sieve.key)) for x, rs in covers.items()}
        self.warnings = warnings

    def on(self, x: str) -> tuple[Sieve, ...]:
        return self.covers[x]

    def contains(self, sieve: Sieve) -> bool:
        return sieve in self.covers.get(sieve.target, ())


class Site:
    """A finite category together with a validated topology."""

    def __init__(self, cat: FiniteCategory, topology: GrothendieckTopology):
        self.cat = cat
        self.topology = topology
        self._subcanonical: bool | None = None

    def covers(self, x: str) -> tuple[Sieve, ...]:
        return self.topology.on(x)

    def is_degenerate(self) -> bool:
        return any(code == "DEGENERATE" for code, _ in self.topology.warnings)


def validate_topology(cat: FiniteCategory, raw_covers: dict) -> GrothendieckTopology:
    """Check nonemptiness, stability and local character exhaustively.

    raw_covers maps each object to an iterable of Sieve values (already
    closed; use generate_sieve to build them).  Warns, without failing, when
    some object lacks its maximal sieve or lists the empty sieve.
    """
    covers: dict[str, tuple[Sieve, ...]] = {}
    for x in cat.objects:
        listed = list(raw_covers.get(x, ()))
        if not listed:
            raise ValidationFailure("EMPTY_J", f"no covering sieve listed for {x!r}", x)
        for sieve in listed:
            if sieve.target != x:
                raise ValidationFailure("WRONG_CODOMAIN", f"sieve on {sieve.target!r} listed under {x!r}", x)
            check_sieve(cat, sieve)
        covers[x] = tuple(sorted(set(listed), key=Sieve.key))
    for x in sorted(raw_covers):
        if x not in set(cat.objects):
            raise ValidationFailure("DANGLING_REFERENCE", f"covers listed for unknown object {x!r}", x)

    # Stability: every pullback of a cover is a cover.
    for s in cat.objects:
        for sieve in covers[s]:
            for f in cat.arrows_into(s):
                pulled = pullback_sieve(cat, sieve, f)
                if pulled not in covers[pulled.target]:
                    raise ValidationFailure(
                        "NOT_STABLE",
                        f"pullback of a cover of {s!r} along {f!r} is not a cover of {pulled.target!r}",
                        (s, tuple(sorted(sieve.arrows)), f),
                    )

    # Local character: a sieve whose pullbacks along a cover are all covers
    # must itself be a cover.  Quantifies over every sieve on the object.
    for s in cat.objects:
        candidates = all_sieves_on(cat, s)
        for sieve in covers[s]:
            for cand in candidates:
                if cand in covers[s]:
                    continue
                if all(pullback_sieve(cat, cand, f) in covers[cat.src(f)] for f in sorted(sieve.arrows)):
                    raise ValidationFailure(
                        "NOT_LOCAL",
                        f"sieve on {s!r} covers locally over a cover but is not itself a cover",
                        (s, tuple(sorted(sieve.arrows)), tuple(sorted(cand.arrows))),
                    )

    warnings = []
    for x in cat.objects:
        if maximal_sieve(cat, x) not in covers[x]:
            warnings.append(("MISSING_MAXIMAL", x))
        if empty_sieve(x) in covers[x]:
            warnings.append(("DEGENERATE", x))
    return GrothendieckTopology(covers, tuple(warnings))


def minimal_topology(cat: FiniteCategory) -> GrothendieckTopology:
    """Only the maximal sieve covers each object."""
    return validate_topology(cat, {x: [maximal_sieve(cat, x)] for x in cat.objects})


@dataclass(frozen=True)
class CoveringFamily:
    """Ordered members of a candidate covering family (repeats allowed)."""

    members: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def family_sieve(site: Site, family: CoveringFamily, w: str) -> Sieve:
    """Arrows into w whose source admits an arrow to some member."""
    members = set(family.members)
    arrows = []
    for f in site.cat.arrows_into(w):
        v = site.cat.src(f)
        if any(site.cat.hom(v, m) for m in members):
            arrows.append(f)
    return Sieve(w, frozenset(arrows))


def is_covering_family(site: Site, family: CoveringFamily) -> Verdict:
    """True iff the induced sieve on every object is a cover there."""
    for m in family.members:
        if m not in set(site.cat.objects):
            raise ValidationFailure("DANGLING_REFERENCE", f"unknown family member {m!r}", m)
    for w in site.cat.objects:
        sieve = family_sieve(site, family, w)
        if sieve not in site.covers(w):
            return fails("NOT_COVERING", w, f"the induced sieve on {w!r} is not a cover")
    return holds()


def is_connected_object(cat: FiniteCategory, x: str) -> bool:
    """Zigzag connectivity of the slice over x.

    Slice objects are arrows into x; two are linked when some arrow of the
    category commutes over x.  Empty slices count as disconnected.
    """
    objs = cat.arrows_into(x)
    if not objs:
        return False
    parent = {o: o for o in objs}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for f in objs:
        for g in objs:
            for h in cat.hom(cat.src(f), cat.src(g)):
                if cat.compose(g, h) == f:
                    parent[find(f)] = find(g)
    return len({find(o) for o in objs}) == 1


def is_connected_family(site: Site, family: CoveringFamily) -> Verdict:
    """Every member's slice is zigzag connected."""
    for m in family.members:
        if not is_connected_object(site.cat, m):
            return fails("NOT_CONNECTED", m, f"the slice over {m!r} is not connected")
    return holds()
