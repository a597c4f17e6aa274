"""Shared builders for the test suite.

Cycle and interval sites, small local systems on them, the rotation model
group, and the wrap atlases.  Everything is built through the public
validators so a broken fixture fails loudly at construction time.
"""

from __future__ import annotations

from toposforge.fincat import FiniteCategory, FunctorData, slice_category, validate_category
from toposforge.geostruct import Atlas, AutomorphismGroup, Section, validate_atlas
from toposforge.sheaf import SheafOfSets, validate_presheaf
from toposforge.site import (
    CoveringFamily,
    GrothendieckTopology,
    Site,
    all_sieves_on,
    generate_sieve,
    minimal_topology,
    validate_topology,
)


# ---------------------------------------------------------------------------
# categories


def cycle_category(n: int, vertex: str = "v", edge: str = "e") -> FiniteCategory:
    """n-cycle incidence category: edge k sees vertices k-1 and k (mod n)."""
    objects = [f"{vertex}{i}" for i in range(1, n + 1)] + [f"{edge}{i}" for i in range(1, n + 1)]
    arrows = []
    for i in range(1, n + 1):
        k = i % n + 1
        arrows.append({"name": f"{vertex}{i}-{edge}{i}", "src": f"{vertex}{i}", "dst": f"{edge}{i}"})
        arrows.append({"name": f"{vertex}{i}-{edge}{k}", "src": f"{vertex}{i}", "dst": f"{edge}{k}"})
    return validate_category({"objects": objects, "arrows": arrows})


def interval_category(n_edges: int = 2, vertex: str = "v", edge: str = "e") -> FiniteCategory:
    """Path with n_edges segments: edge k sees vertices k-1 and k."""
    objects = [f"{vertex}{i}" for i in range(n_edges + 1)] + [f"{edge}{i}" for i in range(1, n_edges + 1)]
    arrows = []
    for k in range(1, n_edges + 1):
        arrows.append({"name": f"{vertex}{k - 1}-{edge}{k}", "src": f"{vertex}{k - 1}", "dst": f"{edge}{k}"})
        arrows.append({"name": f"{vertex}{k}-{edge}{k}", "src": f"{vertex}{k}", "dst": f"{edge}{k}"})
    return validate_category({"objects": objects, "arrows": arrows})


def bigon_category() -> FiniteCategory:
    """Two edges joining the same two vertices; overlaps are not points."""
    arrows = []
    for d in ("d1", "d2"):
        for u in ("u1", "u2"):
            arrows.append({"name": f"{u}-{d}", "src": u, "dst": d})
    return validate_category({"objects": ["u1", "u2", "d1", "d2"], "arrows": arrows})


# ---------------------------------------------------------------------------
# topologies and sites


def site_min(cat: FiniteCategory) -> Site:
    return Site(cat, minimal_topology(cat))


def fine_topology(cat: FiniteCategory, n: int, vertex: str = "v", edge: str = "e") -> GrothendieckTopology:
    """Vertex pairs cover edges, on a cycle category."""
    covers = {x: [generate_sieve(cat, x, [cat.identities[x]])] for x in cat.objects}
    for i in range(1, n + 1):
        e = f"{edge}{i}"
        pair = [a for a in cat.arrows_into(e) if not cat.is_identity(a)]
        covers[e].append(generate_sieve(cat, e, pair))
    return validate_topology(cat, covers)


def site_fine(cat: FiniteCategory, n: int, vertex: str = "v", edge: str = "e") -> Site:
    return Site(cat, fine_topology(cat, n, vertex, edge))


def degenerate_topology(cat: FiniteCategory) -> GrothendieckTopology:
    """Every sieve covers; only near-empty presheaves survive as sheaves."""
    return validate_topology(cat, {x: all_sieves_on(cat, x) for x in cat.objects})


def site_degenerate(cat: FiniteCategory) -> Site:
    return Site(cat, degenerate_topology(cat))


# ---------------------------------------------------------------------------
# local systems


def local_system(cat: FiniteCategory, fiber, twists: dict) -> SheafOfSets:
    """Same fiber everywhere; identity restrictions except the listed twists."""
    values = {x: list(fiber) for x in cat.objects}
    restrictions = {f: dict(m) for f, m in twists.items()}
    return validate_presheaf(cat, values, restrictions)


def swap_sheaf(cat: FiniteCategory, arrow: str = "v4-e1") -> SheafOfSets:
    return local_system(cat, ("a", "b"), {arrow: {"a": "b", "b": "a"}})


def rot3_sheaf(cat: FiniteCategory, arrow: str = "v4-e1") -> SheafOfSets:
    return local_system(cat, ("r0", "r1", "r2"), {arrow: {"r0": "r1", "r1": "r2", "r2": "r0"}})


def const_sheaf(cat: FiniteCategory, fiber=("a", "b")) -> SheafOfSets:
    return local_system(cat, fiber, {})


def double_swap_sheaf(cat: FiniteCategory, arrow: str = "v4-e1") -> SheafOfSets:
    """Fiber of four with a double transposition on one seam."""
    twist = {"x0": "x1", "x1": "x0", "x2": "x3", "x3": "x2"}
    return local_system(cat, ("x0", "x1", "x2", "x3"), {arrow: twist})


def edges_family(n: int, edge: str = "e") -> CoveringFamily:
    return CoveringFamily(tuple(f"{edge}{i}" for i in range(1, n + 1)))


def all_objects_family(cat: FiniteCategory) -> CoveringFamily:
    return CoveringFamily(tuple(cat.objects))


# ---------------------------------------------------------------------------
# the model group and wrap atlases


def _fill_arrows(src_cat: FiniteCategory, dst_cat: FiniteCategory, objects: dict) -> FunctorData:
    """Arrow map forced by the object map; homsets here are at most single."""
    arrows = {}
    for name in src_cat.arrow_names():
        s, d = src_cat.arrows[name]
        a, b = objects[s], objects[d]
        if src_cat.is_identity(name):
            arrows[name] = dst_cat.identities[a]
            continue
        hom = dst_cat.hom(a, b)
        if len(hom) != 1:
            raise AssertionError(f"cannot fill arrow {name!r}: hom({a!r},{b!r}) has {len(hom)} entries")
        arrows[name] = hom[0]
    return FunctorData(objects, arrows)


def rotation_functor(cat: FiniteCategory, n: int, k: int, vertex: str = "v", edge: str = "e") -> FunctorData:
    objects = {}
    for i in range(1, n + 1):
        j = (i + k - 1) % n + 1
        objects[f"{vertex}{i}"] = f"{vertex}{j}"
        objects[f"{edge}{i}"] = f"{edge}{j}"
    return _fill_arrows(cat, cat, objects)


def rotation_group(site: Site, n: int = 4, vertex: str = "v", edge: str = "e") -> AutomorphismGroup:
    """Cyclic rotations of the n-cycle: e, r, r2, ..."""
    functors = {"e": rotation_functor(site.cat, n, 0, vertex, edge)}
    for k in range(1, n):
        functors[f"r{k}" if k > 1 else "r"] = rotation_functor(site.cat, n, k, vertex, edge)
    return AutomorphismGroup(site, functors)


def c4_model(site4: Site | None = None) -> AutomorphismGroup:
    if site4 is None:
        site4 = site_min(cycle_category(4))
    return rotation_group(site4, 4)


def wrap_chart(site: Site, member: str, objects: dict, model_cat: FiniteCategory) -> FunctorData:
    sl = slice_category(site.cat, member)
    return _fill_arrows(sl, model_cat, objects)


def wrap_charts(site: Site, model: AutomorphismGroup, n: int, vertex: str = "v", edge: str = "e"):
    """Chart i sends edge i of the n-cycle onto edge ((i-1) mod 4)+1 of C4."""
    charts = []
    for i in range(1, n + 1):
        k = (i - 1) % 4 + 1
        member = f"{edge}{i}"
        prev = f"{vertex}{(i - 2) % n + 1}"
        objects = {
            f"id:{member}": f"e{k}",
            f"{prev}-{member}": f"v{(k - 2) % 4 + 1}",
            f"{vertex}{i}-{member}": f"v{k}",
        }
        charts.append(wrap_chart(site, member, objects, model.site.cat))
    return charts


def wrap_atlas(n: int, model: AutomorphismGroup | None = None, transitions: dict | None = None) -> Atlas:
    """WRAP(n,4): the n-cycle wrapped around the 4-cycle model."""
    if model is None:
        model = c4_model()
    vertex, edge = ("w", "f") if n != 4 else ("v", "e")
    cat = cycle_category(n, vertex, edge) if n != 4 else model.site.cat
    site = site_min(cat) if n != 4 else model.site
    family = edges_family(n, edge)
    charts = wrap_charts(site, model, n, vertex, edge)
    return validate_atlas(site, model, family, charts, transitions)


def collapsing_section(atlas: Atlas, target: str = "e1") -> Section:
    """Every slice squashed onto one model object; glueable, nowhere etale."""
    functors = []
    for chart in atlas.charts:
        sl = slice_category(atlas.site.cat, chart.domain)
        objects = {o: target for o in sl.objects}
        arrows = {a: atlas.model.site.cat.identities[target] for a in sl.arrow_names()}
        functors.append(FunctorData(objects, arrows))
    return Section(tuple(functors))


# ---------------------------------------------------------------------------
# a complete workspace document for CLI tests


def workspace_dict() -> dict:
    """C4 local systems plus the two wrap atlases, in workspace JSON form."""
    c4 = cycle_category(4)
    c6 = cycle_category(6, "w", "f")

    def cat_entry(cat: FiniteCategory) -> dict:
        arrows = [
            {"name": a, "src": cat.src(a), "dst": cat.dst(a)}
            for a in cat.arrow_names()
            if not cat.is_identity(a)
        ]
        return {"objects": list(cat.objects), "arrows": arrows, "compose": {}}

    def min_covers(cat: FiniteCategory) -> dict:
        return {x: [[cat.identities[x]]] for x in cat.objects}

    fine_covers = min_covers(c4)
    for i in range(1, 5):
        e = f"e{i}"
        fine_covers[e] = fine_covers[e] + [[a for a in c4.arrows_into(e) if not c4.is_identity(a)]]

    def chart_entries(n: int, vertex: str, edge: str) -> list:
        out = []
        for i in range(1, n + 1):
            k = (i - 1) % 4 + 1
            member = f"{edge}{i}"
            prev = f"{vertex}{(i - 2) % n + 1}"
            out.append(
                {
                    "object": member,
                    "targets": {
                        f"id:{member}": f"e{k}",
                        f"{prev}-{member}": f"v{(k - 2) % 4 + 1}",
                        f"{vertex}{i}-{member}": f"v{k}",
                    },
                }
            )
        return out

    rot_elements = {}
    for name, k in (("e", 0), ("r", 1), ("r2", 2), ("r3", 3)):
        rot_elements[name] = {
            "objects": {
                f"{p}{i}": f"{p}{(i + k - 1) % 4 + 1}" for p in ("v", "e") for i in range(1, 5)
            }
        }

    return {
        "categories": {"c4": cat_entry(c4), "c6": cat_entry(c6)},
        "topologies": {
            "c4min": {"on": "c4", "covers": min_covers(c4)},
            "fine": {"on": "c4", "covers": fine_covers},
            "c6min": {"on": "c6", "covers": min_covers(c6)},
        },
        "sheaves": {
            "swap": {
                "on": "c4",
                "values": {x: ["a", "b"] for x in c4.objects},
                "restrictions": {"v4-e1": {"a": "b", "b": "a"}},
            },
            "rot3": {
                "on": "c4",
                "values": {x: ["r0", "r1", "r2"] for x in c4.objects},
                "restrictions": {"v4-e1": {"r0": "r1", "r1": "r2", "r2": "r0"}},
            },
            "const2": {
                "on": "c4",
                "values": {x: ["a", "b"] for x in c4.objects},
                "restrictions": {},
            },
        },
        "families": {
            "edges": {"on": "c4", "members": ["e1", "e2", "e3", "e4"]},
            "hexedges": {"on": "c6", "members": ["f1", "f2", "f3", "f4", "f5", "f6"]},
        },
        "groups": {
            "rot4": {"category": "c4", "topology": "c4min", "elements": rot_elements},
        },
        "atlases": {
            "wrap44": {
                "category": "c4",
                "topology": "c4min",
                "model": "rot4",
                "family": "edges",
                "charts": chart_entries(4, "v", "e"),
            },
            "wrap64": {
                "category": "c6",
                "topology": "c6min",
                "model": "rot4",
                "family": "hexedges",
                "charts": chart_entries(6, "w", "f"),
            },
        },
        "sections": {
            "collapse44": {
                "atlas": "wrap44",
                "charts": [
                    {
                        "object": f"e{i}",
                        "targets": {
                            f"id:e{i}": "e1",
                            f"v{(i - 2) % 4 + 1}-e{i}": "e1",
                            f"v{i}-e{i}": "e1",
                        },
                        "arrows": {},
                    }
                    for i in range(1, 5)
                ],
            }
        },
    }
