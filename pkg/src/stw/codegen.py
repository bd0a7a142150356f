"""Source generation: turn a goal's steps tree into target-language text.

For each interaction the generator picks the component's templates for
the requested target (code matching), expands their masks over the bound
parameters (code masking), and splices child output into socket markers,
line by line, carrying the marker's indentation.  Output lands in two
streams: ``declarations`` fragments hoist to the top of the unit in tree
pre-order (so e.g. function definitions always precede the entry block,
whatever their tree position), ``body`` fragments splice where their
socket sits.  The pack's root component wraps both streams.

Generation is pure and deterministic; nothing is written to disk here.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import masks
from .errors import NoTemplateForTarget, TargetNotInProject
from .masks import expand_template  # re-exported: public half of this module
from .packs import ComponentPack, Registry, ROOT_SOCKET
from .tree import Goal, Project, StepNode, slugify

__all__ = [
    "GenerationManifest",
    "SourceUnit",
    "expand_template",
    "generate_goal",
    "generate_project",
]

DECLARATIONS = "declarations"
BODY = "body"


@dataclass(frozen=True)
class SourceUnit:
    target: str
    filename: str
    text: str
    #: (section id, first line, last line), 1-based inclusive, in order
    section_map: tuple[tuple[str, int, int], ...]


@dataclass(frozen=True)
class GenerationManifest:
    project_id: str
    project_revision: int
    target: str
    units: tuple[SourceUnit, ...]
    entry: str | None  # filename of the entry unit


def _splice(text: str, socket: str, child_text: str, fill: str) -> str:
    """Replace a socket's marker line with child lines at its indent."""
    marker = masks.marker_text(socket)
    out: list[str] = []
    replaced = False
    for line in text.split("\n"):
        if line.strip() != marker:
            out.append(line)
            continue
        replaced = True
        prefix = line[: len(line) - len(line.lstrip())]
        if child_text:
            child_lines = child_text.split("\n")
            if child_lines and child_lines[-1] == "":
                child_lines.pop()
            out.extend(prefix + cl if cl else "" for cl in child_lines)
        elif fill:
            out.append(prefix + fill)
        # an empty socket with no fill drops the marker line entirely
    if not replaced:
        raise NoTemplateForTarget(
            f"template is missing the slot marker for socket '{socket}'"
        )
    return "\n".join(out)


def _render_interaction(
    goal: Goal,
    registry: Registry,
    pack: ComponentPack,
    target: str,
    node: StepNode,
    indent_unit: str,
    fill: str,
) -> tuple[str, str]:
    """Render one interaction subtree; returns (hoisted decls, body text)."""
    assert node.owner is not None
    ix = goal.interaction(node.owner)
    assert ix is not None
    component = registry.component(ix.component_id)
    if target not in component.targets():
        raise NoTemplateForTarget(
            f"component '{component.component_id}' has no templates for "
            f"target '{target}'"
        )
    builtins = {
        "step_id": node.step_id,
        "goal_name": goal.name,
        "indent": indent_unit,
    }
    outputs: dict[str, str] = {}
    for section in pack.sections:
        template = component.template_for(target, section)
        if template is not None:
            outputs[section] = expand_template(
                template.body, ix.bindings, builtins
            )

    hoisted: list[str] = []
    for owned in goal.owned_nodes(ix.interaction_id):
        if owned.socket is None:
            continue
        parts: list[str] = []
        for child in owned.children:
            child_decl, child_body = _render_interaction(
                goal, registry, pack, target, child, indent_unit, fill
            )
            if child_decl:
                hoisted.append(child_decl)
            parts.append(child_body)
        child_text = "".join(parts)
        section = _section_with_marker(component, target, owned.socket)
        outputs[section] = _splice(
            outputs[section], owned.socket, child_text, fill
        )

    decl = outputs.get(DECLARATIONS, "") + "".join(hoisted)
    return decl, outputs.get(BODY, "")


def _section_with_marker(component, target: str, socket: str) -> str:
    for t in component.templates:
        if t.target == target and socket in t.socket_slots:
            return t.section
    raise NoTemplateForTarget(
        f"component '{component.component_id}' has no slot for socket "
        f"'{socket}' on target '{target}'"
    )


def _unique_filename(goal: Goal, ext: str, taken: set[str]) -> str:
    base = slugify(goal.name)
    name = base + ext
    n = 2
    while name in taken:
        name = f"{base}_{n}{ext}"
        n += 1
    return name


def generate_goal(
    goal: Goal,
    registry: Registry,
    target: str,
    *,
    filename: str | None = None,
) -> SourceUnit:
    """Assemble one goal's source unit for a target."""
    decl_target = registry.target_decl(target)
    pack = registry.scaffold_pack(target)
    root_component = pack.component(pack.root_component)
    assert root_component is not None
    indent_unit = decl_target.indent_unit
    fill = decl_target.empty_socket_fill

    hoisted: list[str] = []
    body_parts: list[str] = []
    for child in goal.root.children:
        child_decl, child_body = _render_interaction(
            goal, registry, pack, target, child, indent_unit, fill
        )
        if child_decl:
            hoisted.append(child_decl)
        body_parts.append(child_body)

    builtins = {
        "step_id": goal.root.step_id,
        "goal_name": goal.name,
        "indent": indent_unit,
    }
    decl_template = root_component.template_for(target, DECLARATIONS)
    decl_text = (
        expand_template(decl_template.body, {}, builtins)
        if decl_template is not None
        else ""
    )
    decl_text += "".join(hoisted)

    body_template = root_component.template_for(target, BODY)
    if body_template is None:
        raise NoTemplateForTarget(
            f"root component '{root_component.component_id}' has no body "
            f"template for target '{target}'"
        )
    body_text = expand_template(body_template.body, {}, builtins)
    body_text = _splice(body_text, ROOT_SOCKET, "".join(body_parts), fill)

    text = decl_text + body_text
    section_map: list[tuple[str, int, int]] = []
    line = 1
    for section, chunk in ((DECLARATIONS, decl_text), (BODY, body_text)):
        if not chunk:
            continue
        count = chunk.count("\n") + (0 if chunk.endswith("\n") else 1)
        section_map.append((section, line, line + count - 1))
        line += count

    return SourceUnit(
        target=target,
        filename=filename or (slug_filename(goal, decl_target.source_extension)),
        text=text,
        section_map=tuple(section_map),
    )


def slug_filename(goal: Goal, ext: str) -> str:
    return slugify(goal.name) + ext


def generate_project(
    project: Project, registry: Registry, target: str
) -> GenerationManifest:
    """One source unit per goal; the first goal is the entry unit."""
    if target not in project.targets:
        raise TargetNotInProject(
            f"project '{project.name}' does not include target '{target}'"
        )
    ext = registry.target_decl(target).source_extension
    taken: set[str] = set()
    units: list[SourceUnit] = []
    for goal in project.goals:
        name = _unique_filename(goal, ext, taken)
        taken.add(name)
        units.append(generate_goal(goal, registry, target, filename=name))
    return GenerationManifest(
        project_id=project.project_id,
        project_revision=project.revision,
        target=target,
        units=tuple(units),
        entry=units[0].filename if units else None,
    )


# --- wire/disk form -----------------------------------------------------------

def unit_doc(unit: SourceUnit) -> dict:
    return {
        "filename": unit.filename,
        "target": unit.target,
        "section_map": [
            {"section": s, "start_line": a, "end_line": b}
            for s, a, b in unit.section_map
        ],
        "text": unit.text,
    }


def manifest_doc(manifest: GenerationManifest) -> dict:
    return {
        "format": 1,
        "project_id": manifest.project_id,
        "project_revision": manifest.project_revision,
        "target": manifest.target,
        "entry": manifest.entry,
        "units": [unit_doc(u) for u in manifest.units],
    }
