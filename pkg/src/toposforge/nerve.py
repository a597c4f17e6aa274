"""Nerve graph of a covering family, walks, and loop generators.

Vertices are the indices of the family; an edge joins i and j when the
product of their representables has a section somewhere.  Walks are index
sequences; the path class of a walk only removes consecutive repeats, so
backtracking is NOT collapsed here.  Any group structure lives downstream
in holonomy images.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationFailure
from .sheaf import SheafObject, is_empty_object, product, representable, require_subcanonical
from .site import CoveringFamily, Site


@dataclass(frozen=True)
class NerveGraph:
    family: CoveringFamily
    edges: tuple[tuple[int, int], ...]  # i < j
    overlaps: object  # dict[(i, j) -> SheafObject], stored witnesses

    @property
    def n(self) -> int:
        return len(self.family.members)

    def adjacent(self, i: int, j: int) -> bool:
        a, b = min(i, j), max(i, j)
        return (a, b) in set(self.edges)

    def neighbors(self, i: int) -> list[int]:
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return sorted(out)

    def overlap(self, i: int, j: int) -> SheafObject:
        a, b = min(i, j), max(i, j)
        return self.overlaps[(a, b)]


def nerve_graph(site: Site, family: CoveringFamily) -> NerveGraph:
    """Edges wherever two members admit a common refinement."""
    require_subcanonical(site)
    members = family.members
    for m in members:
        if m not in set(site.cat.objects):
            raise ValidationFailure("DANGLING_REFERENCE", f"unknown family member {m!r}", m)
    edges = []
    overlaps = {}
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            o = product(site, representable(site, members[i]), representable(site, members[j]))
            if not is_empty_object(site, o):
                edges.append((i, j))
                overlaps[(i, j)] = o
    return NerveGraph(family, tuple(edges), overlaps)


@dataclass(frozen=True)
class PathClass:
    """Stutter-reduced walk representative."""

    vertices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)


def check_walk(graph: NerveGraph, walk) -> tuple[int, ...]:
    walk = tuple(walk)
    if not walk:
        raise ValidationFailure("INVALID_WALK", "a walk needs at least one vertex", walk)
    for v in walk:
        if not 0 <= v < graph.n:
            raise ValidationFailure("INVALID_WALK", f"vertex {v} outside the family", walk)
    for a, b in zip(walk, walk[1:]):
        if a != b and not graph.adjacent(a, b):
            raise ValidationFailure("INVALID_WALK", f"({a},{b}) is not an edge", walk)
    return walk


def reduce_walk(graph: NerveGraph, walk) -> PathClass:
    """Drop consecutive duplicates, nothing else."""
    walk = check_walk(graph, walk)
    out = [walk[0]]
    for v in walk[1:]:
        if v != out[-1]:
            out.append(v)
    return PathClass(tuple(out))


def compose_paths(graph: NerveGraph, first: PathClass, second: PathClass) -> PathClass:
    """Concatenate first-then-second; endpoints must meet."""
    if first.vertices[-1] != second.vertices[0]:
        raise ValidationFailure(
            "NOT_COMPOSABLE",
            f"path ending at {first.vertices[-1]} cannot continue with one starting at {second.vertices[0]}",
            (first.vertices, second.vertices),
        )
    return reduce_walk(graph, first.vertices + second.vertices[1:])


def invert_path(graph: NerveGraph, path: PathClass) -> PathClass:
    return reduce_walk(graph, tuple(reversed(path.vertices)))


def spanning_tree(graph: NerveGraph, base: int) -> tuple[dict[int, int], list[tuple[int, int]]]:
    """BFS tree (parent map) over base's component plus the chord list."""
    if not 0 <= base < graph.n:
        raise ValidationFailure("INVALID_WALK", f"basepoint {base} outside the family", base)
    parent = {base: base}
    order = [base]
    queue = [base]
    while queue:
        v = queue.pop(0)
        for w in graph.neighbors(v):
            if w not in parent:
                parent[w] = v
                order.append(w)
                queue.append(w)
    tree_edges = {(min(v, parent[v]), max(v, parent[v])) for v in parent if v != parent[v]}
    chords = sorted((a, b) for a, b in graph.edges if a in parent and (a, b) not in tree_edges)
    return parent, chords


def tree_path(parent: dict[int, int], base: int, v: int) -> tuple[int, ...]:
    out = [v]
    while out[-1] != base:
        out.append(parent[out[-1]])
    return tuple(reversed(out))


def aut_generators(graph: NerveGraph, base: int) -> list[PathClass]:
    """One closed walk at base per chord of the BFS spanning tree.

    The number of generators equals the cycle rank of base's component.
    """
    parent, chords = spanning_tree(graph, base)
    out = []
    for a, b in chords:
        walk = tree_path(parent, base, a) + tuple(reversed(tree_path(parent, base, b)))
        out.append(reduce_walk(graph, walk))
    return out
