"""Component packs: the library of program-construction units.

A pack is a single UTF-8 JSON document (``*.pack.json``, ``format: 1``)
bundling components, their parameter schemas, step-label templates and
per-target code templates.  Packs carry no executable code; templates
are inert text.  Canonical key order is documented in docs/formats.md.

Loaded packs are immutable; a :class:`Registry` merges several packs and
answers browse/lookup queries for the rest of the engine.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator

from . import masks
from .errors import (
    ComponentNotFound,
    DuplicateComponentId,
    MalformedPack,
    MissingSocketSlot,
    NoTemplateForTarget,
    PackError,
    UnboundMaskVariable,
    UnknownCategory,
)

PACK_FORMAT = 1
FIELD_KINDS = ("text", "integer", "boolean", "enum", "list-of-text")
MAX_CATEGORY_DEPTH = 3
#: socket name every pack's root component must expose; goal roots anchor here
ROOT_SOCKET = "main"

_SEMVER_RE = re.compile(r"^\d+\.\d+\.\d+$")


# --- domain types -----------------------------------------------------------

@dataclass(frozen=True)
class ParamField:
    """One field of a component's interaction page."""

    name: str
    kind: str
    required: bool = False
    default: object | None = None
    constraint: dict | None = None

    def choices(self) -> list[str]:
        return list((self.constraint or {}).get("choices", []))


@dataclass(frozen=True)
class InteractionPageSchema:
    fields: tuple[ParamField, ...]

    def field_named(self, name: str) -> ParamField | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass(frozen=True)
class StepSpecNode:
    """Template for one steps-tree node a component instantiates."""

    label: str
    kind: str  # "container" | "leaf"
    socket: str | None = None
    children: tuple["StepSpecNode", ...] = ()

    def walk(self) -> Iterator["StepSpecNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class StepSpec:
    root: StepSpecNode

    def nodes(self) -> list[StepSpecNode]:
        return list(self.root.walk())

    def sockets(self) -> list[str]:
        return [n.socket for n in self.root.walk() if n.socket]


@dataclass(frozen=True)
class CodeTemplate:
    target: str
    section: str
    body: str
    socket_slots: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class TargetDecl:
    """Formatting contract for one target language, declared by the pack."""

    id: str
    display_name: str
    source_extension: str
    indent_unit: str
    empty_socket_fill: str = ""


@dataclass(frozen=True)
class ComponentDefinition:
    component_id: str
    display_name: str
    category_path: tuple[str, ...]
    page: InteractionPageSchema
    step_spec: StepSpec
    templates: tuple[CodeTemplate, ...]

    def targets(self) -> list[str]:
        seen: list[str] = []
        for t in self.templates:
            if t.target not in seen:
                seen.append(t.target)
        return seen

    def sections(self) -> list[str]:
        seen: list[str] = []
        for t in self.templates:
            if t.section not in seen:
                seen.append(t.section)
        return seen

    def template_for(self, target: str, section: str) -> CodeTemplate | None:
        for t in self.templates:
            if t.target == target and t.section == section:
                return t
        return None


@dataclass(frozen=True)
class Category:
    name: str
    children: tuple["Category", ...] = ()


@dataclass(frozen=True)
class ComponentPack:
    pack_id: str
    version: str
    root_component: str
    sections: tuple[str, ...]
    targets: tuple[TargetDecl, ...]
    categories: tuple[Category, ...]
    components: tuple[ComponentDefinition, ...]

    def target_ids(self) -> list[str]:
        return [t.id for t in self.targets]

    def component(self, component_id: str) -> ComponentDefinition | None:
        for c in self.components:
            if c.component_id == component_id:
                return c
        return None


@dataclass(frozen=True)
class Finding:
    """One validation result row; findings are data, not failures."""

    severity: str
    component_id: str | None
    code: str
    message: str


@dataclass(frozen=True)
class ComponentSummary:
    component_id: str
    display_name: str
    category_path: tuple[str, ...]


# --- parsing ----------------------------------------------------------------

def _need(obj: dict, key: str, typ, where: str):
    if key not in obj:
        raise MalformedPack(f"{where}: missing key '{key}'")
    value = obj[key]
    if typ is int and isinstance(value, bool):
        raise MalformedPack(f"{where}: key '{key}' must be {typ.__name__}")
    if not isinstance(value, typ):
        raise MalformedPack(f"{where}: key '{key}' must be {typ.__name__}")
    return value


def _parse_field(obj, where: str) -> ParamField:
    if not isinstance(obj, dict):
        raise MalformedPack(f"{where}: field must be an object")
    name = _need(obj, "name", str, where)
    kind = _need(obj, "kind", str, where)
    if kind not in FIELD_KINDS:
        raise MalformedPack(f"{where}: unknown field kind '{kind}'")
    required = obj.get("required", False)
    if not isinstance(required, bool):
        raise MalformedPack(f"{where}: 'required' must be a boolean")
    constraint = obj.get("constraint")
    if constraint is not None and not isinstance(constraint, dict):
        raise MalformedPack(f"{where}: 'constraint' must be an object")
    return ParamField(
        name=name,
        kind=kind,
        required=required,
        default=obj.get("default"),
        constraint=constraint,
    )


def _parse_spec_node(obj, where: str) -> StepSpecNode:
    if not isinstance(obj, dict):
        raise MalformedPack(f"{where}: step node must be an object")
    label = _need(obj, "label", str, where)
    kind = _need(obj, "kind", str, where)
    if kind not in ("container", "leaf"):
        raise MalformedPack(f"{where}: step node kind must be container or leaf")
    socket = obj.get("socket")
    if socket is not None and not isinstance(socket, str):
        raise MalformedPack(f"{where}: 'socket' must be a string")
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise MalformedPack(f"{where}: 'children' must be a list")
    children = tuple(
        _parse_spec_node(c, f"{where}.children[{i}]")
        for i, c in enumerate(raw_children)
    )
    return StepSpecNode(label=label, kind=kind, socket=socket, children=children)


def _parse_category(obj, where: str, depth: int) -> Category:
    if not isinstance(obj, dict):
        raise MalformedPack(f"{where}: category must be an object")
    name = _need(obj, "name", str, where)
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise MalformedPack(f"{where}: 'children' must be a list")
    children = tuple(
        _parse_category(c, f"{where}.children[{i}]", depth + 1)
        for i, c in enumerate(raw_children)
    )
    return Category(name=name, children=children)


def _parse_component(obj, where: str) -> ComponentDefinition:
    if not isinstance(obj, dict):
        raise MalformedPack(f"{where}: component must be an object")
    component_id = _need(obj, "component_id", str, where)
    display_name = _need(obj, "display_name", str, where)
    raw_path = _need(obj, "category_path", list, where)
    if not all(isinstance(p, str) for p in raw_path):
        raise MalformedPack(f"{where}: category_path must be a list of strings")
    page_obj = _need(obj, "page", dict, where)
    raw_fields = _need(page_obj, "fields", list, f"{where}.page")
    fields = tuple(
        _parse_field(f, f"{where}.page.fields[{i}]")
        for i, f in enumerate(raw_fields)
    )
    spec_obj = _need(obj, "step_spec", dict, where)
    root = _parse_spec_node(_need(spec_obj, "root", dict, f"{where}.step_spec"),
                            f"{where}.step_spec.root")
    raw_templates = _need(obj, "templates", list, where)
    templates = []
    for i, t in enumerate(raw_templates):
        t_where = f"{where}.templates[{i}]"
        if not isinstance(t, dict):
            raise MalformedPack(f"{t_where}: template must be an object")
        slots = t.get("socket_slots", {})
        if not isinstance(slots, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in slots.items()
        ):
            raise MalformedPack(f"{t_where}: socket_slots must map names to markers")
        templates.append(CodeTemplate(
            target=_need(t, "target", str, t_where),
            section=_need(t, "section", str, t_where),
            body=_need(t, "body", str, t_where),
            socket_slots=dict(slots),
        ))
    return ComponentDefinition(
        component_id=component_id,
        display_name=display_name,
        category_path=tuple(raw_path),
        page=InteractionPageSchema(fields=fields),
        step_spec=StepSpec(root=root),
        templates=tuple(templates),
    )


def parse_pack(data: bytes) -> ComponentPack:
    """Parse pack bytes into a ComponentPack without semantic validation."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedPack(f"pack file is not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedPack(f"pack file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedPack("pack document must be a JSON object")
    fmt = _need(doc, "format", int, "pack")
    if fmt != PACK_FORMAT:
        raise MalformedPack(f"unsupported pack format {fmt}, expected {PACK_FORMAT}")
    pack_id = _need(doc, "pack_id", str, "pack")
    version = _need(doc, "version", str, "pack")
    if not _SEMVER_RE.match(version):
        raise MalformedPack(f"pack version '{version}' is not MAJOR.MINOR.PATCH")
    sections = _need(doc, "sections", list, "pack")
    if not sections or not all(isinstance(s, str) for s in sections):
        raise MalformedPack("pack 'sections' must be a non-empty list of strings")
    raw_targets = _need(doc, "targets", list, "pack")
    targets = []
    for i, t in enumerate(raw_targets):
        t_where = f"pack.targets[{i}]"
        if not isinstance(t, dict):
            raise MalformedPack(f"{t_where}: target must be an object")
        targets.append(TargetDecl(
            id=_need(t, "id", str, t_where),
            display_name=_need(t, "display_name", str, t_where),
            source_extension=_need(t, "source_extension", str, t_where),
            indent_unit=_need(t, "indent_unit", str, t_where),
            empty_socket_fill=t.get("empty_socket_fill", ""),
        ))
    raw_categories = _need(doc, "categories", list, "pack")
    categories = tuple(
        _parse_category(c, f"pack.categories[{i}]", 1)
        for i, c in enumerate(raw_categories)
    )
    raw_components = _need(doc, "components", list, "pack")
    components = tuple(
        _parse_component(c, f"pack.components[{i}]")
        for i, c in enumerate(raw_components)
    )
    return ComponentPack(
        pack_id=pack_id,
        version=version,
        root_component=_need(doc, "root_component", str, "pack"),
        sections=tuple(sections),
        targets=tuple(targets),
        categories=categories,
        components=components,
    )


# --- serialization (inverse writer) ------------------------------------------

def _field_doc(f: ParamField) -> dict:
    doc: dict = {"name": f.name, "kind": f.kind, "required": f.required}
    if f.default is not None:
        doc["default"] = f.default
    if f.constraint is not None:
        doc["constraint"] = f.constraint
    return doc


def _spec_node_doc(n: StepSpecNode) -> dict:
    doc: dict = {"label": n.label, "kind": n.kind}
    if n.socket is not None:
        doc["socket"] = n.socket
    if n.children:
        doc["children"] = [_spec_node_doc(c) for c in n.children]
    return doc


def _category_doc(c: Category) -> dict:
    doc: dict = {"name": c.name}
    if c.children:
        doc["children"] = [_category_doc(ch) for ch in c.children]
    return doc


def serialize_pack(pack: ComponentPack) -> bytes:
    """Write a pack back to its canonical file form.

    ``load_pack(serialize_pack(p)) == p`` for every valid pack.
    """
    doc = {
        "format": PACK_FORMAT,
        "pack_id": pack.pack_id,
        "version": pack.version,
        "root_component": pack.root_component,
        "sections": list(pack.sections),
        "targets": [
            {
                "id": t.id,
                "display_name": t.display_name,
                "source_extension": t.source_extension,
                "indent_unit": t.indent_unit,
                "empty_socket_fill": t.empty_socket_fill,
            }
            for t in pack.targets
        ],
        "categories": [_category_doc(c) for c in pack.categories],
        "components": [
            {
                "component_id": c.component_id,
                "display_name": c.display_name,
                "category_path": list(c.category_path),
                "page": {"fields": [_field_doc(f) for f in c.page.fields]},
                "step_spec": {"root": _spec_node_doc(c.step_spec.root)},
                "templates": [
                    {
                        "target": t.target,
                        "section": t.section,
                        "body": t.body,
                        "socket_slots": dict(sorted(t.socket_slots.items())),
                    }
                    for t in c.templates
                ],
            }
            for c in pack.components
        ],
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# --- validation ---------------------------------------------------------------

def _category_paths(categories: tuple[Category, ...]) -> set[tuple[str, ...]]:
    paths: set[tuple[str, ...]] = set()

    def walk(cats, prefix):
        for c in cats:
            path = prefix + (c.name,)
            paths.add(path)
            walk(c.children, path)

    walk(categories, ())
    return paths


def _category_depth(categories: tuple[Category, ...]) -> int:
    if not categories:
        return 0
    return 1 + max(_category_depth(c.children) for c in categories)


def _check_default(f: ParamField) -> str | None:
    """Reason the default fails to type-check, or None."""
    d = f.default
    if d is None:
        return None
    if f.kind == "text":
        if not isinstance(d, str):
            return "default must be text"
        pattern = (f.constraint or {}).get("pattern")
        if pattern and not re.fullmatch(pattern, d):
            return f"default does not match pattern {pattern!r}"
    elif f.kind == "integer":
        if isinstance(d, bool) or not isinstance(d, int):
            return "default must be an integer"
        lo = (f.constraint or {}).get("min")
        hi = (f.constraint or {}).get("max")
        if lo is not None and d < lo:
            return f"default below minimum {lo}"
        if hi is not None and d > hi:
            return f"default above maximum {hi}"
    elif f.kind == "boolean":
        if not isinstance(d, bool):
            return "default must be a boolean"
    elif f.kind == "enum":
        if d not in f.choices():
            return "default is not one of the choices"
    elif f.kind == "list-of-text":
        if not isinstance(d, list) or not all(isinstance(x, str) for x in d):
            return "default must be a list of text values"
    return None


def _check_constraint(f: ParamField) -> str | None:
    """Reason the constraint is unsatisfiable or ill-formed, or None."""
    c = f.constraint or {}
    if f.kind == "integer":
        lo, hi = c.get("min"), c.get("max")
        for bound, label in ((lo, "min"), (hi, "max")):
            if bound is not None and (isinstance(bound, bool) or not isinstance(bound, int)):
                return f"{label} must be an integer"
        if lo is not None and hi is not None and lo > hi:
            return f"empty range {lo}..{hi}"
    if f.kind in ("text", "list-of-text"):
        pattern = c.get("pattern")
        if pattern is not None:
            if not isinstance(pattern, str):
                return "pattern must be a string"
            try:
                re.compile(pattern)
            except re.error as exc:
                return f"bad pattern: {exc}"
    if f.kind == "enum":
        choices = c.get("choices")
        if not isinstance(choices, list) or not choices:
            return None  # reported separately as empty_enum
        if not all(isinstance(x, str) for x in choices):
            return "choices must be text values"
        if len(set(choices)) != len(choices):
            return "duplicate choices"
    return None


def _validate_component(pack: ComponentPack, comp: ComponentDefinition,
                        out: list[Finding]) -> None:
    cid = comp.component_id

    def err(code: str, message: str):
        out.append(Finding("error", cid, code, message))

    # page schema
    seen_fields: set[str] = set()
    for f in comp.page.fields:
        if f.name in seen_fields:
            err("duplicate_field", f"field '{f.name}' declared twice")
        seen_fields.add(f.name)
        if f.kind == "enum" and not f.choices():
            err("empty_enum", f"enum field '{f.name}' has no choices")
        reason = _check_constraint(f)
        if reason:
            err("unsatisfiable_constraint", f"field '{f.name}': {reason}")
        reason = _check_default(f)
        if reason:
            err("bad_default", f"field '{f.name}': {reason}")

    # category
    if tuple(comp.category_path) not in _category_paths(pack.categories):
        err("unknown_category",
            "category " + "/".join(comp.category_path) + " is not in the tree")

    # step spec structure
    sockets: list[str] = []
    for node in comp.step_spec.root.walk():
        if node.socket:
            if node.socket in sockets:
                err("duplicate_socket", f"socket '{node.socket}' declared twice")
            sockets.append(node.socket)
            if node.kind != "container":
                err("socket_on_leaf",
                    f"socket '{node.socket}' sits on a leaf node")
            if node.children:
                err("socket_node_has_children",
                    f"socketed node '{node.socket}' has fixed children")
        if node.kind == "leaf" and node.children:
            err("invalid_step_spec", "leaf node has children")

    declared = set(seen_fields) | set(masks.BUILTIN_NAMES)

    # step labels
    for node in comp.step_spec.root.walk():
        try:
            used = masks.referenced_names(node.label)
            if masks.socket_markers(node.label):
                err("socket_in_label",
                    f"label {node.label!r} contains a socket marker")
        except PackError:
            raise
        except Exception as exc:
            err("malformed_template", f"label {node.label!r}: {exc}")
            continue
        for name in sorted(used - declared):
            err("unbound_mask_variable",
                f"label uses <%{name}%> which is not a field or builtin")

    # templates
    pack_targets = set(pack.target_ids())
    seen_templates: set[tuple[str, str]] = set()
    # (target, socket) -> how many templates carry its marker
    marker_count: dict[tuple[str, str], int] = {}
    for t in comp.templates:
        key = (t.target, t.section)
        if key in seen_templates:
            err("duplicate_template",
                f"two templates for target '{t.target}' section '{t.section}'")
        seen_templates.add(key)
        if t.target not in pack_targets:
            err("unknown_target_ref",
                f"template targets '{t.target}' which the pack does not declare")
        if t.section not in pack.sections:
            err("unknown_section", f"template section '{t.section}' unknown")
        try:
            used = masks.referenced_names(t.body)
            found_markers = masks.socket_markers(t.body)
        except Exception as exc:
            err("malformed_template",
                f"template ({t.target}, {t.section}): {exc}")
            continue
        for name in sorted(used - declared):
            err("unbound_mask_variable",
                f"template ({t.target}, {t.section}) uses <%{name}%> "
                "which is not a field or builtin")
        for socket in found_markers:
            if socket not in sockets:
                err("unknown_socket_ref",
                    f"template ({t.target}, {t.section}) has a marker for "
                    f"socket '{socket}' the step spec does not declare")
        if len(set(found_markers)) != len(found_markers):
            err("duplicate_socket_slot",
                f"template ({t.target}, {t.section}) repeats a socket marker")
        for socket in set(found_markers):
            marker_count[(t.target, socket)] = (
                marker_count.get((t.target, socket), 0) + 1
            )
        # declared slot table must mirror the markers in the body
        if set(t.socket_slots) != set(found_markers):
            err("socket_slot_mismatch",
                f"template ({t.target}, {t.section}) socket_slots "
                f"{sorted(t.socket_slots)} do not match body markers "
                f"{sorted(set(found_markers))}")
        else:
            for socket, marker in t.socket_slots.items():
                if marker != masks.marker_text(socket):
                    err("socket_slot_mismatch",
                        f"slot '{socket}' declares marker {marker!r}, "
                        f"expected {masks.marker_text(socket)!r}")
        # markers must sit alone on their line so splicing owns the line
        for socket in set(found_markers):
            marker = masks.marker_text(socket)
            for line in t.body.split("\n"):
                if marker in line and line.strip() != marker:
                    err("socket_marker_not_isolated",
                        f"marker for socket '{socket}' shares its line "
                        "with other text")

    # socket coverage per supported target
    for target in comp.targets():
        for socket in sockets:
            n = marker_count.get((target, socket), 0)
            if n == 0:
                err("missing_socket_slot",
                    f"socket '{socket}' has no slot marker in any "
                    f"template for target '{target}'")
            elif n > 1:
                err("duplicate_socket_slot",
                    f"socket '{socket}' has markers in {n} templates "
                    f"for target '{target}'")

    # at least one target must cover every section the component uses
    used_sections = set(comp.sections())
    if comp.templates:
        covered = False
        for target in comp.targets():
            have = {t.section for t in comp.templates if t.target == target}
            if used_sections <= have:
                covered = True
                break
        if not covered:
            err("incomplete_template_set",
                "no single target has templates for every section "
                f"the component uses ({sorted(used_sections)})")


def validate_pack(pack: ComponentPack) -> list[Finding]:
    """Check every pack invariant; empty report means the pack is valid."""
    out: list[Finding] = []

    if _category_depth(pack.categories) > MAX_CATEGORY_DEPTH:
        out.append(Finding("error", None, "category_too_deep",
                           f"category tree exceeds depth {MAX_CATEGORY_DEPTH}"))

    def check_sibling_names(cats: tuple[Category, ...], prefix: str):
        names = [c.name for c in cats]
        for name in sorted(set(n for n in names if names.count(n) > 1)):
            out.append(Finding("error", None, "duplicate_category",
                               f"category '{prefix}{name}' declared twice"))
        for c in cats:
            check_sibling_names(c.children, f"{prefix}{c.name}/")

    check_sibling_names(pack.categories, "")

    seen_ids: set[str] = set()
    for comp in pack.components:
        if comp.component_id in seen_ids:
            out.append(Finding("error", comp.component_id,
                               "duplicate_component_id",
                               f"component id '{comp.component_id}' reused"))
            continue
        seen_ids.add(comp.component_id)
        _validate_component(pack, comp, out)

    root = pack.component(pack.root_component)
    if root is None:
        out.append(Finding("error", None, "missing_root_component",
                           f"root component '{pack.root_component}' "
                           "is not in the pack"))
    else:
        spec_root = root.step_spec.root
        if spec_root.kind != "container" or spec_root.socket != ROOT_SOCKET:
            out.append(Finding("error", root.component_id,
                               "root_socket_not_main",
                               "root component must be a container with "
                               f"socket '{ROOT_SOCKET}'"))
        missing = [t for t in pack.target_ids() if t not in root.targets()]
        if missing:
            out.append(Finding("error", root.component_id,
                               "root_component_targets",
                               "root component lacks templates for "
                               f"targets {missing}"))
    return out


_FINDING_EXCEPTIONS = {
    "duplicate_component_id": DuplicateComponentId,
    "unknown_category": UnknownCategory,
    "unbound_mask_variable": UnboundMaskVariable,
    "missing_socket_slot": MissingSocketSlot,
}


def load_pack(data: bytes) -> ComponentPack:
    """Parse and fully validate pack bytes; raises on the first finding."""
    pack = parse_pack(data)
    findings = validate_pack(pack)
    for finding in findings:
        exc_class = _FINDING_EXCEPTIONS.get(finding.code)
        where = f" [{finding.component_id}]" if finding.component_id else ""
        if exc_class is not None:
            raise exc_class(finding.message + where)
        raise PackError(f"{finding.code}: {finding.message}{where}")
    return pack


# --- registry ------------------------------------------------------------------

class Registry:
    """The set of loaded packs the engine resolves against.

    Packs are immutable once loaded; adding a pack requires exclusive
    access (the service layer serializes loads), reads are unrestricted.
    """

    def __init__(self, packs: list[ComponentPack] | None = None):
        self._packs: dict[str, ComponentPack] = {}
        self._components: dict[str, tuple[ComponentPack, ComponentDefinition]] = {}
        for pack in packs or []:
            self.add_pack(pack)

    def add_pack(self, pack: ComponentPack) -> None:
        if pack.pack_id in self._packs:
            raise PackError(f"pack '{pack.pack_id}' already loaded")
        for decl in pack.targets:
            existing = self._target_decl(decl.id)
            if existing is not None and existing != decl:
                raise PackError(
                    f"target '{decl.id}' declared incompatibly by two packs"
                )
        for comp in pack.components:
            if comp.component_id in self._components:
                raise DuplicateComponentId(
                    f"component '{comp.component_id}' already registered"
                )
        self._packs[pack.pack_id] = pack
        for comp in pack.components:
            self._components[comp.component_id] = (pack, comp)

    @property
    def packs(self) -> list[ComponentPack]:
        return list(self._packs.values())

    def pack(self, pack_id: str) -> ComponentPack | None:
        return self._packs.get(pack_id)

    def component(self, component_id: str) -> ComponentDefinition:
        try:
            return self._components[component_id][1]
        except KeyError:
            raise ComponentNotFound(f"no component '{component_id}'") from None

    def pack_of(self, component_id: str) -> ComponentPack:
        try:
            return self._components[component_id][0]
        except KeyError:
            raise ComponentNotFound(f"no component '{component_id}'") from None

    def target_ids(self) -> set[str]:
        ids: set[str] = set()
        for pack in self._packs.values():
            ids.update(pack.target_ids())
        return ids

    def _target_decl(self, target: str) -> TargetDecl | None:
        for pack in self._packs.values():
            for decl in pack.targets:
                if decl.id == target:
                    return decl
        return None

    def target_decl(self, target: str) -> TargetDecl:
        decl = self._target_decl(target)
        if decl is None:
            raise NoTemplateForTarget(f"no pack declares target '{target}'")
        return decl

    def scaffold_pack(self, target: str) -> ComponentPack:
        """The pack owning the program scaffold for a target."""
        for pack in self._packs.values():
            if target in pack.target_ids():
                return pack
        raise NoTemplateForTarget(f"no pack declares target '{target}'")

    def category_paths(self) -> set[tuple[str, ...]]:
        paths: set[tuple[str, ...]] = set()
        for pack in self._packs.values():
            paths.update(_category_paths(pack.categories))
        return paths

    def browse(
        self,
        category_path: list[str] | None = None,
        query: str | None = None,
    ) -> list[ComponentSummary]:
        """Filter and sort the merged component listing.

        ``category_path`` selects a subtree (prefix match); ``query``
        matches case-insensitively on display-name substrings.  Both
        filters are conjunctive.
        """
        if category_path:
            wanted = tuple(category_path)
            if wanted not in self.category_paths():
                raise UnknownCategory("/".join(category_path))
        rows = []
        needle = query.lower() if query else None
        for pack in self._packs.values():
            for comp in pack.components:
                if category_path and comp.category_path[:len(category_path)] != tuple(category_path):
                    continue
                if needle is not None and needle not in comp.display_name.lower():
                    continue
                rows.append(ComponentSummary(
                    component_id=comp.component_id,
                    display_name=comp.display_name,
                    category_path=comp.category_path,
                ))
        rows.sort(key=lambda r: (r.category_path, r.display_name))
        return rows


def resolve_template(
    component: ComponentDefinition, target: str, section: str
) -> CodeTemplate:
    """Pick the unique template for (target, section).

    Raising here is how "this component cannot generate for that target"
    is surfaced before generation starts.
    """
    template = component.template_for(target, section)
    if template is None:
        raise NoTemplateForTarget(
            f"component '{component.component_id}' has no template for "
            f"target '{target}', section '{section}'"
        )
    return template
