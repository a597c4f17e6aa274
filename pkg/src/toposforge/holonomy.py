"""Transport of fibers along the nerve and the holonomy it generates.

A locally constant object restricted to a trivializing family is a bunch
of finite fibers glued by bijections over overlaps.  This module extracts
those bijections, folds them along walks, and closes the result into a
permutation group at a basepoint.  Groups are compared through explicit
multiplication tables, never by fishing for names.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import reduce

from . import _kernels
from .errors import ValidationFailure, Verdict, fails, holds
from .nerve import (
    NerveGraph,
    aut_generators,
    nerve_graph,
    reduce_walk,
    spanning_tree,
    tree_path,
)
from .sheaf import SheafOfSets, is_constant_on_slice, pair_label, section_key, sections_over
from .site import CoveringFamily, Site, is_connected_object, is_covering_family

ORDER_BOUND = 64


def closure_cap() -> int:
    raw = os.environ.get("TOPOSFORGE_CLOSURE_CAP", "")
    try:
        return int(raw) if raw else 1_000_000
    except ValueError:
        return 1_000_000


# ---------------------------------------------------------------------------
# permutations over a labelled ground set


def _check_bijection(ground: tuple[str, ...], mapping: dict) -> None:
    if set(mapping) != set(ground) or set(mapping.values()) != set(ground):
        raise ValidationFailure(
            "BAD_FUNCTION_SHAPE",
            "mapping is not a bijection of the ground set",
            (sorted(mapping.items()), list(ground)),
        )


def perm_of_mapping(ground: tuple[str, ...], mapping: dict) -> bytes:
    _check_bijection(ground, mapping)
    index = {x: i for i, x in enumerate(ground)}
    out = bytearray(len(ground))
    for x, y in mapping.items():
        out[index[x]] = index[y]
    return bytes(out)


def mapping_of_perm(ground: tuple[str, ...], perm: bytes) -> dict:
    return {ground[i]: ground[perm[i]] for i in range(len(ground))}


def cycle_label(ground: tuple[str, ...], perm: bytes) -> str:
    """Cycle notation over ground labels; identity prints as 'e'."""
    seen = [False] * len(ground)
    parts = []
    for i in range(len(ground)):
        if seen[i] or perm[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        parts.append("(" + " ".join(ground[k] for k in cyc) + ")")
    return "".join(parts) if parts else "e"


class PermutationGroup:
    """Closure of explicit bijections of a finite labelled set."""

    def __init__(self, ground, mappings):
        ground = tuple(sorted(ground))
        if len(set(ground)) != len(ground):
            raise ValidationFailure("DUPLICATE_LABEL", "ground set has repeated labels", ground)
        if len(ground) > 255:
            raise ValidationFailure(
                "CLOSURE_CAP_EXCEEDED", f"ground set of size {len(ground)} is out of range", len(ground)
            )
        self.ground = ground
        self.generators = tuple(perm_of_mapping(ground, m) for m in mappings)
        elements, capped = _kernels.close(self.generators, len(ground), closure_cap())
        if capped:
            raise ValidationFailure(
                "CLOSURE_CAP_EXCEEDED",
                f"closure exceeded {closure_cap()} elements",
                closure_cap(),
            )
        self.elements = tuple(elements)

    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> bytes:
        return _kernels.identity(len(self.ground))

    def compose(self, a: bytes, b: bytes) -> bytes:
        return _kernels.compose(a, b)

    def invert(self, a: bytes) -> bytes:
        return _kernels.invert(a)

    def element_order(self, p: bytes) -> int:
        n, q = 1, p
        while q != self.identity:
            q = _kernels.compose(p, q)
            n += 1
        return n

    def orders_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.element_order(p) for p in self.elements))

    def mapping(self, p: bytes) -> dict:
        return mapping_of_perm(self.ground, p)

    def label(self, p: bytes) -> str:
        return cycle_label(self.ground, p)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.label(p) for p in self.elements)

    def contains(self, mapping: dict) -> bool:
        return perm_of_mapping(self.ground, mapping) in set(self.elements)

    def is_trivial(self) -> bool:
        return len(self.elements) == 1

    def is_cyclic(self) -> bool:
        return any(self.element_order(p) == self.order() for p in self.elements)

    def __iter__(self):
        return iter(self.elements)


# ---------------------------------------------------------------------------
# abstract multiplication tables, for comparing holonomy images


@dataclass(frozen=True)
class CayleyTable:
    names: tuple[str, ...]
    identity: str
    mult: dict = field(compare=False)

    def times(self, a: str, b: str) -> str:
        return self.mult[(a, b)]

    def inverse(self, a: str) -> str:
        for b in self.names:
            if self.mult[(a, b)] == self.identity:
                return b
        raise ValidationFailure("BAD_FUNCTION_SHAPE", f"{a!r} has no inverse", a)

    def order_of(self, a: str) -> int:
        n, x = 1, a
        while x != self.identity:
            x = self.mult[(a, x)]
            n += 1
        return n

    def orders_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.order_of(a) for a in self.names))


def cayley_of_perm_group(group: PermutationGroup) -> CayleyTable:
    names = {p: group.label(p) for p in group.elements}
    mult = {}
    for a in group.elements:
        for b in group.elements:
            mult[(names[a], names[b])] = names[group.compose(a, b)]
    return CayleyTable(
        names=tuple(names[p] for p in group.elements),
        identity=names[group.identity],
        mult=mult,
    )


def check_cayley(table: CayleyTable) -> Verdict:
    names = set(table.names)
    if table.identity not in names:
        return fails("DANGLING_REFERENCE", table.identity, "identity is not an element")
    for a in table.names:
        for b in table.names:
            if (a, b) not in table.mult or table.mult[(a, b)] not in names:
                return fails("BAD_FUNCTION_SHAPE", (a, b), "multiplication table has a hole")
        if table.mult[(a, table.identity)] != a or table.mult[(table.identity, a)] != a:
            return fails("IDENTITY_LAW", a, "identity law fails")
    for a in table.names:
        for b in table.names:
            for c in table.names:
                if table.mult[(table.mult[(a, b)], c)] != table.mult[(a, table.mult[(b, c)])]:
                    return fails("ASSOCIATIVITY", (a, b, c), "multiplication is not associative")
    for a in table.names:
        images = {table.mult[(a, b)] for b in table.names}
        if images != names:
            return fails("BAD_FUNCTION_SHAPE", a, "left translation is not a bijection")
    return holds()


def table_closure(table: CayleyTable, gens) -> set:
    els = {table.identity}
    boundary = [table.identity]
    while boundary:
        fresh = []
        for g in gens:
            for b in boundary:
                c = table.mult[(g, b)]
                if c not in els:
                    els.add(c)
                    fresh.append(c)
        boundary = fresh
    return els


def minimal_generators(table: CayleyTable) -> list[str]:
    """Greedy small generating set, highest element order first."""
    gens: list[str] = []
    closed = {table.identity}
    for a in sorted(table.names, key=lambda x: (-table.order_of(x), x)):
        if a in closed:
            continue
        gens.append(a)
        closed = table_closure(table, gens)
        if len(closed) == len(table.names):
            break
    return gens


def _grow_homomorphism(src: CayleyTable, dst: CayleyTable, gens, images):
    """Extend generator images along left translations; None on conflict."""
    mapping = {src.identity: dst.identity}
    queue = [src.identity]
    while queue:
        h = queue.pop()
        for g, img in zip(gens, images):
            h2 = src.mult[(g, h)]
            v2 = dst.mult[(img, mapping[h])]
            if h2 in mapping:
                if mapping[h2] != v2:
                    return None
            else:
                mapping[h2] = v2
                queue.append(h2)
    if len(mapping) != len(src.names):
        return None
    for a in src.names:
        for b in src.names:
            if mapping[src.mult[(a, b)]] != dst.mult[(mapping[a], mapping[b])]:
                return None
    return mapping


def enumerate_homomorphisms(
    src: CayleyTable,
    dst: CayleyTable,
    *,
    surjective: bool = False,
    bijective: bool = False,
    first_only: bool = False,
    bound: int = ORDER_BOUND,
) -> list[dict]:
    if len(src.names) > bound or len(dst.names) > bound:
        raise ValidationFailure(
            "ORDER_BOUND_EXCEEDED",
            f"group comparison is capped at order {bound}",
            (len(src.names), len(dst.names)),
        )
    if bijective and len(src.names) != len(dst.names):
        return []
    gens = minimal_generators(src)
    if not gens:
        mapping = {src.identity: dst.identity}
        want = len(dst.names) if (surjective or bijective) else None
        if want is not None and want != 1:
            return []
        return [mapping]
    pools = [
        [x for x in dst.names if src.order_of(g) % dst.order_of(x) == 0]
        for g in gens
    ]
    out = []
    for images in itertools.product(*pools):
        mapping = _grow_homomorphism(src, dst, gens, images)
        if mapping is None:
            continue
        if (surjective or bijective) and len(set(mapping.values())) != len(dst.names):
            continue
        out.append(mapping)
        if first_only:
            break
    return out


def find_isomorphism(a: CayleyTable, b: CayleyTable, bound: int = ORDER_BOUND):
    if len(a.names) != len(b.names) or a.orders_multiset() != b.orders_multiset():
        return None
    found = enumerate_homomorphisms(a, b, bijective=True, first_only=True, bound=bound)
    return found[0] if found else None


# ---------------------------------------------------------------------------
# transition systems


@dataclass
class TransitionSystem:
    site: Site
    sheaf: SheafOfSets
    family: CoveringFamily
    graph: NerveGraph
    fibers: dict  # vertex -> tuple of fiber labels
    transports: dict  # (i, j) -> dict fiber(j) -> fiber(i), both directions

    def fiber(self, i: int) -> tuple[str, ...]:
        return self.fibers[i]

    def transport(self, i: int, j: int) -> dict:
        if (i, j) not in self.transports:
            raise ValidationFailure("INVALID_WALK", f"({i},{j}) is not an edge", (i, j))
        return dict(self.transports[(i, j)])

    def replace_transport(self, i: int, j: int, mapping: dict) -> None:
        """Overwrite one edge, keeping the two directions inverse."""
        if (i, j) not in self.transports:
            raise ValidationFailure("INVALID_WALK", f"({i},{j}) is not an edge", (i, j))
        if set(mapping) != set(self.fibers[j]) or set(mapping.values()) != set(self.fibers[i]):
            raise ValidationFailure(
                "BAD_FUNCTION_SHAPE",
                "replacement does not map the source fiber onto the target fiber",
                (i, j),
            )
        self.transports[(i, j)] = dict(mapping)
        self.transports[(j, i)] = {y: x for x, y in mapping.items()}


def _require_trivializing(site: Site, sheaf: SheafOfSets, family: CoveringFamily) -> None:
    covering = is_covering_family(site, family)
    if not covering:
        raise ValidationFailure("NOT_COVERING", covering.detail, covering.witness)
    for m in family.members:
        if not is_connected_object(site.cat, m):
            raise ValidationFailure("NOT_CONNECTED", f"family member {m!r} is not connected", m)
        if not is_constant_on_slice(sheaf, m):
            raise ValidationFailure(
                "NOT_TRIVIALIZING",
                f"the object is not constant over family member {m!r}",
                m,
            )


def _induced_overlap_section(site, sheaf, first_member, second_member, element, on_first):
    """Section of the overlap induced by a fiber element of one member."""
    cat = site.cat
    sec = {}
    for w in cat.objects:
        for u in cat.hom(w, first_member):
            for v in cat.hom(w, second_member):
                along = u if on_first else v
                sec[(w, pair_label(u, v))] = sheaf.restrict(along, element)
    return sec


def transition_isos(
    sheaf: SheafOfSets,
    site: Site,
    family: CoveringFamily,
    graph: NerveGraph | None = None,
) -> TransitionSystem:
    """Glue data of a locally constant object over a trivializing family.

    For each nerve edge the two fibers are matched through sections of the
    overlap; a mismatch in counts means the overlap sees more (or fewer)
    sections than one fiber and is reported as OVERLAP_NOT_TRIVIAL.
    """
    _require_trivializing(site, sheaf, family)
    if graph is None:
        graph = nerve_graph(site, family)
    fibers = {i: sheaf.value(m) for i, m in enumerate(family.members)}
    transports = {}
    for a, b in graph.edges:
        first, second = family.members[a], family.members[b]
        secs = sections_over(site, graph.overlap(a, b), sheaf)
        if len(fibers[a]) != len(fibers[b]) or len(secs) != len(fibers[a]):
            raise ValidationFailure(
                "OVERLAP_NOT_TRIVIAL",
                f"overlap of {first!r} and {second!r} carries {len(secs)} sections "
                f"against fibers of sizes {len(fibers[a])} and {len(fibers[b])}",
                ((first, second), len(fibers[a]), len(fibers[b]), len(secs)),
            )
        index_a = {}
        for x in fibers[a]:
            key = section_key(_induced_overlap_section(site, sheaf, first, second, x, True))
            if key in index_a:
                raise ValidationFailure(
                    "OVERLAP_NOT_TRIVIAL",
                    f"two fiber elements of {first!r} agree on the overlap with {second!r}",
                    ((first, second), index_a[key], x),
                )
            index_a[key] = x
        t_ab = {}
        for y in fibers[b]:
            key = section_key(_induced_overlap_section(site, sheaf, first, second, y, False))
            if key not in index_a:
                raise ValidationFailure(
                    "OVERLAP_NOT_TRIVIAL",
                    f"a section induced from {second!r} does not come from {first!r}",
                    ((first, second), y),
                )
            t_ab[y] = index_a[key]
        if len(set(t_ab.values())) != len(fibers[a]):
            raise ValidationFailure(
                "OVERLAP_NOT_TRIVIAL",
                f"two fiber elements of {second!r} agree on the overlap with {first!r}",
                (first, second),
            )
        transports[(a, b)] = t_ab
        transports[(b, a)] = {x: y for y, x in t_ab.items()}
    return TransitionSystem(site, sheaf, family, graph, fibers, transports)


def holonomy_of_walk(system: TransitionSystem, walk) -> dict:
    """Composite transport along a walk, mapping the last fiber to the first."""
    path = reduce_walk(system.graph, walk)
    acc = {x: x for x in system.fibers[path.vertices[0]]}
    for p, q in zip(path.vertices, path.vertices[1:]):
        step = system.transports[(p, q)]
        acc = {x: acc[step[x]] for x in system.fibers[q]}
    return acc


def system_holonomy_group(system: TransitionSystem, base: int = 0) -> PermutationGroup:
    gens = [holonomy_of_walk(system, g.vertices) for g in aut_generators(system.graph, base)]
    return PermutationGroup(system.fibers[base], gens)


def holonomy_group(
    sheaf: SheafOfSets,
    site: Site,
    family: CoveringFamily,
    base: int = 0,
    graph: NerveGraph | None = None,
) -> PermutationGroup:
    return system_holonomy_group(transition_isos(sheaf, site, family, graph), base)


def gauge_conjugate(system: TransitionSystem, vertex: int, mapping: dict) -> TransitionSystem:
    """Relabel one fiber by a bijection; holonomy changes by conjugation only."""
    _check_bijection(system.fibers[vertex], mapping)
    inverse = {y: x for x, y in mapping.items()}
    transports = {key: dict(t) for key, t in system.transports.items()}
    for (i, j), t in system.transports.items():
        if i == vertex:
            transports[(i, j)] = {x: mapping[t[x]] for x in t}
        elif j == vertex:
            transports[(i, j)] = {x: t[inverse[x]] for x in t}
    return TransitionSystem(
        system.site, system.sheaf, system.family, system.graph, dict(system.fibers), transports
    )


def closed_walk_transports(system: TransitionSystem, base: int = 0, max_steps: int | None = None):
    """Every transport realised by a closed walk of bounded length.

    Exhaustive dynamic programming over (vertex, accumulated transport)
    states; the default bound 2n+4 is enough to sweep a spanning tree out
    and back with a couple of extra edges.  Returns fiber self-maps.
    """
    if max_steps is None:
        max_steps = 2 * system.graph.n + 4
    ground = system.fibers[base]
    index = {i: {x: k for k, x in enumerate(fib)} for i, fib in system.fibers.items()}
    edges = []
    for (i, j), t in system.transports.items():
        enc = bytearray(len(ground))
        for x, y in t.items():
            enc[index[j][x]] = index[i][y]
        edges.append((i, j, bytes(enc)))
    perms = _kernels.closed_walk_perms(system.graph.n, base, max_steps, edges, len(ground))
    return [mapping_of_perm(ground, p) for p in perms]


def exhaustive_holonomy_group(
    system: TransitionSystem, base: int = 0, max_steps: int | None = None
) -> PermutationGroup:
    return PermutationGroup(system.fibers[base], closed_walk_transports(system, base, max_steps))


def chord_transports_in_tree_gauge(system: TransitionSystem, base: int = 0) -> dict:
    """Chord transports after trivializing along a spanning tree.

    Fibers are renumbered through tree transports so every tree edge becomes
    the identity; what is left on the chords generates the holonomy on the
    nose.  Keys are chord pairs, values index permutations as tuples.
    """
    parent, chords = spanning_tree(system.graph, base)
    renumber = {base: {x: k for k, x in enumerate(system.fibers[base])}}

    def number(v: int) -> dict:
        if v not in renumber:
            p = parent[v]
            step = system.transports[(p, v)]
            renumber[v] = {x: number(p)[step[x]] for x in system.fibers[v]}
        return renumber[v]

    out = {}
    for a, b in chords:
        t = system.transports[(a, b)]
        ra, rb = number(a), number(b)
        sigma = [0] * len(system.fibers[base])
        for x in system.fibers[b]:
            sigma[rb[x]] = ra[t[x]]
        out[(a, b)] = tuple(sigma)
    return out


# ---------------------------------------------------------------------------
# comparisons across refinements and across objects


@dataclass(frozen=True)
class ComparisonReport:
    isomorphic: bool
    order_first: int
    order_second: int
    isomorphism: dict | None


def compare_holonomy(
    first: PermutationGroup, second: PermutationGroup, bound: int = ORDER_BOUND
) -> ComparisonReport:
    iso = find_isomorphism(cayley_of_perm_group(first), cayley_of_perm_group(second), bound)
    return ComparisonReport(iso is not None, first.order(), second.order(), iso)


def refinement_invariance_check(
    sheaf: SheafOfSets,
    site: Site,
    family_a: CoveringFamily,
    family_b: CoveringFamily,
    base_a: int = 0,
    base_b: int = 0,
    system_a: TransitionSystem | None = None,
    system_b: TransitionSystem | None = None,
    bound: int = ORDER_BOUND,
) -> ComparisonReport:
    """Holonomy does not see which trivializing family was used.

    Precomputed transition systems may be passed in (that is how a corrupted
    table is smuggled into the negative tests); by default both are derived
    from the sheaf.
    """
    if system_a is None:
        system_a = transition_isos(sheaf, site, family_a)
    if system_b is None:
        system_b = transition_isos(sheaf, site, family_b)
    return compare_holonomy(
        system_holonomy_group(system_a, base_a), system_holonomy_group(system_b, base_b), bound
    )


JOINT = "joint"


@dataclass(frozen=True)
class ProGroupPresentation:
    names: tuple[str, ...]
    groups: dict
    joint: PermutationGroup
    surjections: dict  # (src, dst) -> tuple of mappings on element labels

    def order(self, name: str) -> int:
        return self.joint.order() if name == JOINT else self.groups[name].order()


def pro_pi1_presentation(
    site: Site,
    family: CoveringFamily,
    named_sheaves,
    base: int = 0,
    bound: int = ORDER_BOUND,
) -> ProGroupPresentation:
    """Holonomy of each listed object, their joint closure, and the
    surjections available between the images.

    The joint group acts on the product of the base fibers and dominates
    every factor; which factors dominate each other is part of the answer.
    """
    named_sheaves = list(named_sheaves)
    names = tuple(name for name, _ in named_sheaves)
    if len(set(names)) != len(names) or JOINT in names:
        raise ValidationFailure("DUPLICATE_LABEL", "object names must be distinct and not 'joint'", names)
    if not named_sheaves:
        raise ValidationFailure("EMPTY_J", "no objects to measure", None)
    graph = nerve_graph(site, family)
    systems = {name: transition_isos(sh, site, family, graph) for name, sh in named_sheaves}
    walks = aut_generators(graph, base)
    groups = {name: system_holonomy_group(systems[name], base) for name in names}

    def joint_label(xs) -> str:
        return reduce(pair_label, xs)

    factor_fibers = [systems[name].fibers[base] for name in names]
    ground = [joint_label(xs) for xs in itertools.product(*factor_fibers)]
    joint_gens = []
    for w in walks:
        per_factor = [holonomy_of_walk(systems[name], w.vertices) for name in names]
        joint_gens.append(
            {
                joint_label(xs): joint_label([h[x] for h, x in zip(per_factor, xs)])
                for xs in itertools.product(*factor_fibers)
            }
        )
    joint = PermutationGroup(ground, joint_gens)

    tables = {name: cayley_of_perm_group(groups[name]) for name in names}
    tables[JOINT] = cayley_of_perm_group(joint)
    surjections = {}
    for src in (JOINT, *names):
        for dst in names:
            if src == dst:
                continue
            surjections[(src, dst)] = tuple(
                enumerate_homomorphisms(tables[src], tables[dst], surjective=True, bound=bound)
            )
    return ProGroupPresentation(names, groups, joint, surjections)


def is_simply_connected_bounded(site: Site, family: CoveringFamily, max_fiber: int) -> Verdict:
    """No locally constant object with fiber size <= max_fiber has monodromy.

    Up to a relabelling of fibers every glueing is trivial on a spanning
    tree, so only chord assignments are enumerated.  The first nontrivial
    closure found is returned as a witness.
    """
    covering = is_covering_family(site, family)
    if not covering:
        raise ValidationFailure("NOT_COVERING", covering.detail, covering.witness)
    for m in family.members:
        if not is_connected_object(site.cat, m):
            raise ValidationFailure("NOT_CONNECTED", f"family member {m!r} is not connected", m)
    graph = nerve_graph(site, family)
    parent, chords = spanning_tree(graph, 0)
    if len(parent) != graph.n:
        missing = sorted(set(range(graph.n)) - set(parent))
        raise ValidationFailure("NOT_CONNECTED", "the nerve is disconnected", missing)
    if not chords:
        return holds(f"the nerve is a tree; every glueing with fiber <= {max_fiber} is trivial")
    cap = closure_cap()
    for m in range(1, max_fiber + 1):
        perms = [bytes(p) for p in itertools.permutations(range(m))]
        for assignment in itertools.product(perms, repeat=len(chords)):
            if all(p == _kernels.identity(m) for p in assignment):
                continue
            elements, capped = _kernels.close(list(assignment), m, cap)
            if capped:
                raise ValidationFailure("CLOSURE_CAP_EXCEEDED", f"closure exceeded {cap} elements", cap)
            if len(elements) > 1:
                witness = {
                    "fiber": m,
                    "chords": tuple((family.members[a], family.members[b]) for a, b in chords),
                    "assignment": tuple(tuple(p) for p in assignment),
                    "order": len(elements),
                }
                return fails(
                    "NOT_SIMPLY_CONNECTED",
                    witness,
                    f"a fiber of size {m} glued over the chords has holonomy of order {len(elements)}",
                )
    return holds(f"every chord assignment with fiber <= {max_fiber} closes trivially")
