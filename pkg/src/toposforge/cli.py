"""Workspace files, command dispatch, and reporting.

A workspace is one JSON document holding named categories, topologies,
sheaves, families, groups, atlases, and sections that reference each other
by name.  Everything structural is validated on load and failures come back
as diagnostics with a JSON pointer; atlas transition derivation is deferred
to the commands that need it so a broken cocycle is a reportable result
rather than a parse error.

Exit codes: 0 the checked property holds, 1 it fails (with at least one
witness in the report), 2 the input or invocation was unusable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from ._kernels import backend
from .errors import ToposforgeError, ValidationFailure
from .fincat import FiniteCategory, FunctorData, slice_category, validate_category
from .geostruct import (
    Atlas,
    AutomorphismGroup,
    Section,
    deformation_rigidity,
    developing,
    enumerate_representations,
    structural_bundle,
    structure_from_section,
    structure_holonomy,
    subgroup_table,
    tautological_section,
    validate_atlas,
    validate_section,
)
from .holonomy import holonomy_group, is_simply_connected_bounded, pro_pi1_presentation
from .sheaf import components, is_sheaf, is_subcanonical, validate_presheaf
from .site import CoveringFamily, GrothendieckTopology, Site, generate_sieve, validate_topology

TOP_LEVEL_KEYS = ("categories", "topologies", "sheaves", "families", "groups", "atlases", "sections")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    pointer: str = ""
    entity: str = ""
    line: int | None = None
    column: int | None = None

    def render(self) -> str:
        where = f" at {self.pointer}" if self.pointer else ""
        if self.line is not None:
            where = f" at line {self.line}, column {self.column}"
        who = f" in {self.entity!r}" if self.entity else ""
        return f"{self.code}{who}{where}: {self.message}"


class WorkspaceError(ToposforgeError):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class UsageError(ToposforgeError):
    """Bad flags or names; maps to exit code 2."""


def _fail(code: str, message: str, pointer: str, entity: str = "") -> None:
    raise WorkspaceError(Diagnostic(code, message, pointer, entity))


def _wrap(err: ValidationFailure, pointer: str, entity: str) -> None:
    # loader boundary: dangling names become unresolved references
    code = "UNRESOLVED_REFERENCE" if err.code == "DANGLING_REFERENCE" else err.code
    raise WorkspaceError(Diagnostic(code, err.message, pointer, entity))


# ---------------------------------------------------------------------------
# workspace model


class Workspace:
    def __init__(self, raw: dict, path: str, sha256: str):
        self.raw = raw
        self.path = path
        self.sha256 = sha256
        self.categories: dict[str, FiniteCategory] = {}
        self.topologies: dict[str, tuple[str, GrothendieckTopology]] = {}
        self.sheaves: dict[str, tuple[str, object]] = {}
        self.families: dict[str, tuple[str, CoveringFamily]] = {}
        self.groups: dict[str, AutomorphismGroup] = {}
        self.atlas_specs: dict[str, dict] = {}
        self.sections: dict[str, tuple[str, tuple[FunctorData, ...]]] = {}
        self._atlases: dict[str, Atlas] = {}

    def site(self, cat_name: str, top_name: str) -> Site:
        return Site(self.categories[cat_name], self.topologies[top_name][1])

    def atlas(self, name: str) -> Atlas:
        """Derive and verify transitions on first use; cached afterwards."""
        if name not in self._atlases:
            spec = self.atlas_specs[name]
            self._atlases[name] = validate_atlas(
                spec["site"], spec["model"], spec["family"], spec["charts"], spec["transitions"]
            )
        return self._atlases[name]


def _section_dict(raw: dict, key: str) -> dict:
    part = raw.get(key, {})
    if not isinstance(part, dict):
        _fail("SYNTAX", f"top-level {key!r} must be an object", f"/{key}")
    return part


def _complete_functor(src_cat: FiniteCategory, dst_cat: FiniteCategory, spec: dict, pointer: str, entity: str) -> FunctorData:
    """Object map from the file; arrow map filled in wherever it is forced.

    Identities go to identities and an arrow whose endpoints leave a single
    candidate takes it; anything still ambiguous must be listed explicitly
    under "arrows"/"targets_arrows".
    """
    objects = dict(spec.get("objects") or spec.get("targets") or {})
    explicit = dict(spec.get("arrows") or {})
    for x in src_cat.objects:
        if x not in objects:
            _fail("UNRESOLVED_REFERENCE", f"no image listed for object {x!r}", f"{pointer}/objects", entity)
        if objects[x] not in set(dst_cat.objects):
            _fail(
                "UNRESOLVED_REFERENCE",
                f"object {x!r} is sent to unknown object {objects[x]!r}",
                f"{pointer}/objects/{x}",
                entity,
            )
    for x in sorted(objects):
        if x not in set(src_cat.objects):
            _fail("UNRESOLVED_REFERENCE", f"image listed for unknown object {x!r}", f"{pointer}/objects/{x}", entity)
    for name in sorted(explicit):
        if name not in src_cat.arrows:
            _fail("UNRESOLVED_REFERENCE", f"image listed for unknown arrow {name!r}", f"{pointer}/arrows/{name}", entity)
        if explicit[name] not in dst_cat.arrows:
            _fail(
                "UNRESOLVED_REFERENCE",
                f"arrow {name!r} is sent to unknown arrow {explicit[name]!r}",
                f"{pointer}/arrows/{name}",
                entity,
            )
    arrows = {}
    for name in src_cat.arrow_names():
        s, d = src_cat.arrows[name]
        a, b = objects[s], objects[d]
        if name in explicit:
            arrows[name] = explicit[name]
        elif src_cat.is_identity(name) and a == b:
            arrows[name] = dst_cat.identities[a]
        else:
            hom = dst_cat.hom(a, b)
            if len(hom) != 1:
                _fail(
                    "UNRESOLVED_REFERENCE",
                    f"arrow {name!r} has {len(hom)} candidate images {a!r} -> {b!r}; list it explicitly",
                    f"{pointer}/arrows",
                    entity,
                )
            arrows[name] = hom[0]
    return FunctorData(objects, arrows)


def _load_charts(ws: Workspace, spec: dict, pointer: str, entity: str):
    site = spec["site"]
    model = spec["model"]
    family = spec["family"]
    raw_charts = spec["raw_charts"]
    if len(raw_charts) != len(family.members):
        _fail(
            "BAD_FUNCTION_SHAPE",
            f"{len(raw_charts)} charts for {len(family.members)} family members",
            f"{pointer}/charts",
            entity,
        )
    charts = []
    for i, chart in enumerate(raw_charts):
        member = family.members[i]
        if chart.get("object", member) != member:
            _fail(
                "UNRESOLVED_REFERENCE",
                f"chart {i} claims object {chart['object']!r} but member {i} is {member!r}",
                f"{pointer}/charts/{i}/object",
                entity,
            )
        sl = slice_category(site.cat, member)
        charts.append(_complete_functor(sl, model.site.cat, chart, f"{pointer}/charts/{i}", entity))
    return charts


def build_workspace(raw: dict, path: str, sha256: str) -> Workspace:
    if not isinstance(raw, dict):
        _fail("SYNTAX", "workspace must be a JSON object", "")
    for key in sorted(raw):
        if key not in TOP_LEVEL_KEYS:
            _fail("UNRESOLVED_REFERENCE", f"unknown top-level section {key!r}", f"/{key}")
    ws = Workspace(raw, path, sha256)

    for name in sorted(_section_dict(raw, "categories")):
        ptr = f"/categories/{name}"
        try:
            ws.categories[name] = validate_category(raw["categories"][name])
        except ValidationFailure as err:
            _wrap(err, ptr, name)

    def need_category(cat_name, ptr, entity):
        if cat_name not in ws.categories:
            _fail("UNRESOLVED_REFERENCE", f"unknown category {cat_name!r}", ptr, entity)
        return ws.categories[cat_name]

    for name in sorted(_section_dict(raw, "topologies")):
        spec = raw["topologies"][name]
        ptr = f"/topologies/{name}"
        cat = need_category(spec.get("on"), f"{ptr}/on", name)
        sieves: dict[str, list] = {}
        for obj in sorted(spec.get("covers", {})):
            if obj not in set(cat.objects):
                _fail("UNRESOLVED_REFERENCE", f"covers listed for unknown object {obj!r}", f"{ptr}/covers/{obj}", name)
            sieves[obj] = []
            for k, gens in enumerate(spec["covers"][obj]):
                for a in gens:
                    if a not in cat.arrows:
                        _fail(
                            "UNRESOLVED_REFERENCE",
                            f"unknown arrow {a!r} in a sieve generator list",
                            f"{ptr}/covers/{obj}/{k}",
                            name,
                        )
                    if cat.dst(a) != obj:
                        _fail(
                            "WRONG_CODOMAIN",
                            f"arrow {a!r} does not land in {obj!r}",
                            f"{ptr}/covers/{obj}/{k}",
                            name,
                        )
                sieves[obj].append(generate_sieve(cat, obj, gens))
        try:
            ws.topologies[name] = (spec["on"], validate_topology(cat, sieves))
        except ValidationFailure as err:
            _wrap(err, ptr, name)

    for name in sorted(_section_dict(raw, "sheaves")):
        spec = raw["sheaves"][name]
        ptr = f"/sheaves/{name}"
        cat = need_category(spec.get("on"), f"{ptr}/on", name)
        for x in sorted(spec.get("values", {})):
            if x not in set(cat.objects):
                _fail("UNRESOLVED_REFERENCE", f"value set listed for unknown object {x!r}", f"{ptr}/values/{x}", name)
        for f in sorted(spec.get("restrictions", {})):
            if f not in cat.arrows:
                _fail("UNRESOLVED_REFERENCE", f"restriction listed for unknown arrow {f!r}", f"{ptr}/restrictions/{f}", name)
        try:
            sheaf = validate_presheaf(cat, spec.get("values", {}), spec.get("restrictions", {}))
        except ValidationFailure as err:
            _wrap(err, ptr, name)
        ws.sheaves[name] = (spec["on"], sheaf)

    for name in sorted(_section_dict(raw, "families")):
        spec = raw["families"][name]
        ptr = f"/families/{name}"
        cat = need_category(spec.get("on"), f"{ptr}/on", name)
        members = list(spec.get("members", ()))
        for i, m in enumerate(members):
            if m not in set(cat.objects):
                _fail("UNRESOLVED_REFERENCE", f"unknown family member {m!r}", f"{ptr}/members/{i}", name)
        ws.families[name] = (spec["on"], CoveringFamily(tuple(members)))

    def need_site(spec, ptr, entity) -> Site:
        cat_name, top_name = spec.get("category"), spec.get("topology")
        need_category(cat_name, f"{ptr}/category", entity)
        if top_name not in ws.topologies:
            _fail("UNRESOLVED_REFERENCE", f"unknown topology {top_name!r}", f"{ptr}/topology", entity)
        if ws.topologies[top_name][0] != cat_name:
            _fail(
                "UNRESOLVED_REFERENCE",
                f"topology {top_name!r} is on {ws.topologies[top_name][0]!r}, not {cat_name!r}",
                f"{ptr}/topology",
                entity,
            )
        return ws.site(cat_name, top_name)

    for name in sorted(_section_dict(raw, "groups")):
        spec = raw["groups"][name]
        ptr = f"/groups/{name}"
        site = need_site(spec, ptr, name)
        functors = {}
        for g in sorted(spec.get("elements", {})):
            functors[g] = _complete_functor(site.cat, site.cat, spec["elements"][g], f"{ptr}/elements/{g}", name)
        try:
            ws.groups[name] = AutomorphismGroup(site, functors)
        except ValidationFailure as err:
            _wrap(err, ptr, name)

    for name in sorted(_section_dict(raw, "atlases")):
        spec = raw["atlases"][name]
        ptr = f"/atlases/{name}"
        site = need_site(spec, ptr, name)
        if spec.get("model") not in ws.groups:
            _fail("UNRESOLVED_REFERENCE", f"unknown group {spec.get('model')!r}", f"{ptr}/model", name)
        model = ws.groups[spec["model"]]
        if spec.get("family") not in ws.families:
            _fail("UNRESOLVED_REFERENCE", f"unknown family {spec.get('family')!r}", f"{ptr}/family", name)
        fam_cat, family = ws.families[spec["family"]]
        if fam_cat != spec.get("category"):
            _fail(
                "UNRESOLVED_REFERENCE",
                f"family {spec['family']!r} lives on {fam_cat!r}, not {spec.get('category')!r}",
                f"{ptr}/family",
                name,
            )
        transitions = None
        if "transitions" in spec:
            transitions = {}
            for key, g in spec["transitions"].items():
                try:
                    i, j = (int(part) for part in key.split(","))
                except ValueError:
                    _fail("SYNTAX", f"transition key {key!r} is not 'i,j'", f"{ptr}/transitions/{key}", name)
                if g not in set(model.names):
                    _fail(
                        "UNRESOLVED_REFERENCE",
                        f"transition {key!r} names unknown element {g!r}",
                        f"{ptr}/transitions/{key}",
                        name,
                    )
                transitions[(i, j)] = g
        loaded = {
            "site": site,
            "model": model,
            "family": family,
            "raw_charts": list(spec.get("charts", ())),
            "transitions": transitions,
        }
        loaded["charts"] = _load_charts(ws, loaded, ptr, name)
        ws.atlas_specs[name] = loaded

    for name in sorted(_section_dict(raw, "sections")):
        spec = raw["sections"][name]
        ptr = f"/sections/{name}"
        if spec.get("atlas") not in ws.atlas_specs:
            _fail("UNRESOLVED_REFERENCE", f"unknown atlas {spec.get('atlas')!r}", f"{ptr}/atlas", name)
        parent = ws.atlas_specs[spec["atlas"]]
        loaded = dict(parent, raw_charts=list(spec.get("charts", ())))
        ws.sections[name] = (spec["atlas"], tuple(_load_charts(ws, loaded, ptr, name)))

    return ws


def parse_workspace(path) -> Workspace:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise WorkspaceError(
            Diagnostic("SYNTAX", err.msg, line=err.lineno, column=err.colno)
        ) from err
    return build_workspace(raw, str(path), hashlib.sha256(text.encode("utf-8")).hexdigest())


def serialize_workspace(ws: Workspace) -> str:
    return json.dumps(ws.raw, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def canonical_workspace_text(raw: dict) -> str:
    """What serialize_workspace would emit for this data, without loading."""
    return json.dumps(raw, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# command helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return repr(x)


def _pick(table: dict, name: str, kind: str):
    if name not in table:
        raise UsageError(f"unknown {kind} {name!r} (have: {', '.join(sorted(table)) or 'none'})")
    return table[name]


def _pick_site(ws: Workspace, cat_name: str, topology_flag: str | None) -> Site:
    if topology_flag is not None:
        on, top = _pick(ws.topologies, topology_flag, "topology")
        if on != cat_name:
            raise UsageError(f"topology {topology_flag!r} is on category {on!r}, not {cat_name!r}")
        return Site(ws.categories[cat_name], top)
    matching = [n for n, (on, _) in sorted(ws.topologies.items()) if on == cat_name]
    if len(matching) != 1:
        raise UsageError(
            f"category {cat_name!r} has {len(matching)} topologies; pass --topology"
        )
    return ws.site(cat_name, matching[0])


def _base_index(family: CoveringFamily, base: str | None) -> int:
    if base is None:
        return 0
    if base not in family.members:
        raise UsageError(f"--base {base!r} is not a member of the family")
    return family.members.index(base)


def _family_and_site(ws: Workspace, args):
    cat_name, family = _pick(ws.families, args.family, "family")
    return family, _pick_site(ws, cat_name, args.topology)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, result, witnesses, human lines)


def cmd_check(ws: Workspace, args):
    if args.topology is not None:
        cat_name, top = _pick(ws.topologies, args.topology, "topology")
        site = Site(ws.categories[cat_name], top)
        sub = is_subcanonical(site)
        result = {
            "topology": args.topology,
            "category": cat_name,
            "valid": True,
            "subcanonical": sub,
            "warnings": [f"{code}:{obj}" for code, obj in top.warnings],
        }
        human = [
            f"topology {args.topology!r} on {cat_name!r} valid; "
            f"subcanonical: {'yes' if sub else 'no'}"
        ]
        for code, obj in top.warnings:
            human.append(f"warning: {code} at {obj!r}")
        return 0, result, [], human
    counts = {key: len(_section_dict(ws.raw, key)) for key in TOP_LEVEL_KEYS}
    result = {"valid": True, "entities": counts}
    human = ["workspace valid; " + ", ".join(f"{counts[k]} {k}" for k in TOP_LEVEL_KEYS if counts[k])]
    return 0, result, [], human


def cmd_components(ws: Workspace, args):
    family, site = _family_and_site(ws, args)
    partition, connected = components(site, family)
    named = [[family.members[i] for i in block] for block in partition]
    result = {"members": list(family.members), "partition": named, "connected": connected}
    human = [f"nerve on {len(family.members)} members has {len(named)} component(s)"]
    if connected:
        return 0, result, [], human
    return 1, result, [{"code": "NOT_CONNECTED", "partition": named}], human


def cmd_sheaf_check(ws: Workspace, args):
    cat_name, sheaf = _pick(ws.sheaves, args.sheaf, "sheaf")
    site = _pick_site(ws, cat_name, args.topology)
    verdict = is_sheaf(sheaf, site.topology)
    if verdict:
        return 0, {"sheaf": args.sheaf, "is_sheaf": True}, [], [
            f"sheaf condition holds for {args.sheaf!r}"
        ]
    obj, sieve, n_sections, n_families = verdict.witness
    witness = {
        "code": verdict.code,
        "object": obj,
        "sieve": list(sieve),
        "sections": n_sections,
        "matching_families": n_families,
    }
    human = [
        f"not a sheaf: over {obj!r} sections number {n_sections}, "
        f"matching families {n_families}"
    ]
    return 1, {"sheaf": args.sheaf, "is_sheaf": False}, [witness], human


def cmd_holonomy(ws: Workspace, args):
    cat_name, sheaf = _pick(ws.sheaves, args.sheaf, "sheaf")
    fam_cat, family = _pick(ws.families, args.family, "family")
    if fam_cat != cat_name:
        raise UsageError(f"family {args.family!r} and sheaf {args.sheaf!r} live on different categories")
    site = _pick_site(ws, cat_name, args.topology)
    base = _base_index(family, args.base)
    group = holonomy_group(sheaf, site, family, base)
    result = {
        "order": group.order(),
        "base": family.members[base],
        "fiber": list(group.ground),
        "elements": list(group.labels()),
    }
    return 0, result, [], [f"holonomy group order {group.order()}"]


def cmd_pi1(ws: Workspace, args):
    fam_cat, family = _pick(ws.families, args.family, "family")
    site = _pick_site(ws, fam_cat, args.topology)
    named = []
    for name in args.sheaves.split(","):
        cat_name, sheaf = _pick(ws.sheaves, name.strip(), "sheaf")
        if cat_name != fam_cat:
            raise UsageError(f"sheaf {name!r} lives on {cat_name!r}, not {fam_cat!r}")
        named.append((name.strip(), sheaf))
    base = _base_index(family, args.base)
    pres = pro_pi1_presentation(site, family, named, base)
    orders = {name: pres.order(name) for name in pres.names}
    orders["joint"] = pres.joint.order()
    surjections = {f"{a}->{b}": len(maps) for (a, b), maps in sorted(pres.surjections.items())}
    result = {"orders": orders, "surjections": surjections}
    human = [f"joint holonomy order {pres.joint.order()} over {len(pres.names)} object(s)"]
    for name in pres.names:
        human.append(f"  {name}: order {pres.order(name)}, surjections from joint: {surjections[f'joint->{name}']}")
    return 0, result, [], human


def cmd_simply_connected(ws: Workspace, args):
    family, site = _family_and_site(ws, args)
    verdict = is_simply_connected_bounded(site, family, args.max_fiber)
    if verdict:
        return 0, {"simply_connected": True, "max_fiber": args.max_fiber}, [], [
            f"simply connected for fibers up to {args.max_fiber}"
        ]
    witness = {"code": verdict.code, **_jsonable(verdict.witness)}
    human = [
        f"not simply connected: fiber {verdict.witness['fiber']} local system "
        f"with holonomy order {verdict.witness['order']}"
    ]
    return 1, {"simply_connected": False, "max_fiber": args.max_fiber}, [witness], human


def cmd_cg_check(ws: Workspace, args):
    _pick(ws.atlas_specs, args.atlas, "atlas")
    atlas = ws.atlas(args.atlas)
    hol = structure_holonomy(atlas)
    result = {
        "atlas": args.atlas,
        "charts": len(atlas.charts),
        "transitions": {f"{i},{j}": g for (i, j), g in sorted(atlas.transitions.items())},
        "holonomy_image": list(hol.image),
        "holonomy_order": len(hol.image),
    }
    human = [f"cocycle verified; holonomy image order {len(hol.image)}"]
    return 0, result, [], human


def cmd_develop(ws: Workspace, args):
    _pick(ws.atlas_specs, args.atlas, "atlas")
    atlas = ws.atlas(args.atlas)
    space = developing(atlas)
    comps = []
    for comp in space.components:
        comps.append(
            {
                "base_member": atlas.family.members[comp.base_vertex],
                "degree": comp.degree,
                "germs": len(comp.germs),
                "fiber": list(comp.fiber),
                "dev_counts": {str(k): v for k, v in sorted(comp.dev_counts.items())},
                "monodromy_order": comp.monodromy.order(),
            }
        )
    result = {"germs": len(space.germs), "components": comps}
    human = [f"germ space: {len(space.germs)} germs in {len(comps)} component(s)"]
    for k, comp in enumerate(comps):
        human.append(
            f"  component {k}: degree {comp['degree']}, {comp['germs']} germs, "
            f"monodromy order {comp['monodromy_order']}"
        )
    return 0, result, [], human


def cmd_bundle(ws: Workspace, args):
    _pick(ws.atlas_specs, args.atlas, "atlas")
    atlas = ws.atlas(args.atlas)
    bundle = structural_bundle(atlas)
    if args.section is not None:
        parent, functors = _pick(ws.sections, args.section, "section")
        if parent != args.atlas:
            raise UsageError(f"section {args.section!r} belongs to atlas {parent!r}")
        section = Section(functors)
    else:
        section = tautological_section(atlas)
    report = validate_section(bundle, section)
    result = {
        "atlas": args.atlas,
        "section": args.section or "(tautological)",
        "compatible": bool(report.compatible),
        "transverse": bool(report.transverse),
    }
    human = [
        f"section compatible: {'yes' if report.compatible else 'no'}; "
        f"transverse: {'yes' if report.transverse else 'no'}"
    ]
    if report.compatible and report.transverse:
        rebuilt = structure_from_section(bundle, section)
        result["holonomy_order"] = len(structure_holonomy(rebuilt).image)
        human.append(f"structure recovered; holonomy image order {result['holonomy_order']}")
        return 0, result, [], human
    witnesses = []
    for verdict in (report.compatible, report.transverse):
        if not verdict:
            witnesses.append({"code": verdict.code, "witness": _jsonable(verdict.witness), "detail": verdict.detail})
    return 1, result, witnesses, human


def cmd_deform(ws: Workspace, args):
    _pick(ws.atlas_specs, args.atlas, "atlas")
    atlas = ws.atlas(args.atlas)
    hol = structure_holonomy(atlas)
    table = subgroup_table(atlas.model, hol.image)
    deformations = enumerate_representations(table, atlas.model)
    rigid = deformation_rigidity(deformations)
    result = {
        "atlas": args.atlas,
        "holonomy_order": len(hol.image),
        "representations": len(deformations.representations),
        "rigid": bool(rigid),
    }
    human = [
        f"{len(deformations.representations)} representation(s) of the holonomy image "
        f"(order {len(hol.image)}) in the model group; "
        f"rigidity {'holds' if rigid else 'fails'}"
    ]
    if rigid:
        return 0, result, [], human
    return 1, result, [{"code": rigid.code, "witness": _jsonable(rigid.witness)}], human


_HANDLERS = {
    "check": cmd_check,
    "components": cmd_components,
    "sheaf-check": cmd_sheaf_check,
    "holonomy": cmd_holonomy,
    "pi1": cmd_pi1,
    "simply-connected": cmd_simply_connected,
    "cg-check": cmd_cg_check,
    "develop": cmd_develop,
    "bundle": cmd_bundle,
    "deform": cmd_deform,
}


# ---------------------------------------------------------------------------
# argument parsing and entry point


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workspace", "-w", required=True, help="path to a workspace JSON file")
    common.add_argument("--json", action="store_true", help="emit a machine-readable report")

    parser = argparse.ArgumentParser(prog="toposforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"toposforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate the workspace or one topology")
    p.add_argument("--topology", help="report on one topology")

    p = sub.add_parser("components", parents=[common], help="connected components of a family's nerve")
    p.add_argument("--family", required=True)
    p.add_argument("--topology")

    p = sub.add_parser("sheaf-check", parents=[common], help="sheaf condition for a named topology")
    p.add_argument("--sheaf", required=True)
    p.add_argument("--topology")

    p = sub.add_parser("holonomy", parents=[common], help="holonomy group over a trivializing family")
    p.add_argument("--sheaf", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--base", help="family member to base the loops at")
    p.add_argument("--topology")

    p = sub.add_parser("pi1", parents=[common], help="joint holonomy of several objects with surjection counts")
    p.add_argument("--family", required=True)
    p.add_argument("--sheaves", required=True, help="comma-separated sheaf names")
    p.add_argument("--base")
    p.add_argument("--topology")

    p = sub.add_parser("simply-connected", parents=[common], help="exhaustive bounded local-system search")
    p.add_argument("--family", required=True)
    p.add_argument("--max-fiber", type=int, default=3)
    p.add_argument("--topology")

    p = sub.add_parser("cg-check", parents=[common], help="verify an atlas and report its holonomy image")
    p.add_argument("--atlas", required=True)

    p = sub.add_parser("develop", parents=[common], help="germ components and developing labels")
    p.add_argument("--atlas", required=True)

    p = sub.add_parser("bundle", parents=[common], help="validate a section of the structural bundle")
    p.add_argument("--atlas", required=True)
    p.add_argument("--section", help="named section; defaults to the tautological one")

    p = sub.add_parser("deform", parents=[common], help="representations of the holonomy image, with rigidity")
    p.add_argument("--atlas", required=True)
    return parser


def _emit(args, report: dict, human: list[str]) -> None:
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in human:
            print(line)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    inputs = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "workspace", "json") and v is not None
    }

    try:
        ws = parse_workspace(args.workspace)
    except WorkspaceError as err:
        diag = err.diagnostic
        report = {
            "command": args.command,
            "tool": {"name": "toposforge", "version": __version__, "kernel": backend()},
            "workspace": {"path": str(args.workspace), "sha256": None},
            "inputs": inputs,
            "result": {"parsed": False},
            "witnesses": [
                {
                    "code": diag.code,
                    "message": diag.message,
                    "pointer": diag.pointer,
                    "entity": diag.entity,
                    "line": diag.line,
                    "column": diag.column,
                }
            ],
        }
        _emit(args, report, [diag.render()])
        return 2
    except OSError as err:
        print(f"error: cannot read workspace: {err}", file=sys.stderr)
        return 2

    try:
        code, result, witnesses, human = _HANDLERS[args.command](ws, args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValidationFailure as err:
        code = 1
        result = {"error": err.code}
        witnesses = [{"code": err.code, "message": err.message, "witness": _jsonable(err.witness)}]
        human = [f"{err.code}: {err.message}"]

    report = {
        "command": args.command,
        "tool": {"name": "toposforge", "version": __version__, "kernel": backend()},
        "workspace": {"path": ws.path, "sha256": ws.sha256},
        "inputs": inputs,
        "result": _jsonable(result),
        "witnesses": _jsonable(witnesses),
    }
    _emit(args, report, human)
    return code


if __name__ == "__main__":
    sys.exit(main())
