"""The program under construction: steps tree plus interaction ledger.

A project holds goals; each goal holds a tree of steps and the ordered
ledger of component applications (interactions) that produced it.  Every
mutation validates fully before touching state, so a failed call leaves
tree, ledger and revision untouched; every successful mutation bumps the
project revision by exactly one.

Ids are deterministic: goal ``g<N>``, interaction ``i<N>``, step
``s<N>n<J>`` where N is a per-goal ordinal that is never reused and J is
the node's pre-order index inside its component's step spec.  Replaying
the same session therefore reproduces identical ids, which is what makes
persisted projects byte-stable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator

from . import masks
from .errors import (
    AnchorNotContainer,
    AnchorNotFound,
    DuplicateGoalName,
    EmptyTargetSet,
    FieldErrors,
    GoalNotFound,
    HasDependents,
    InteractionNotFound,
    UnknownTarget,
)
from .packs import (
    ComponentDefinition,
    InteractionPageSchema,
    Registry,
    ROOT_SOCKET,
    StepSpecNode,
)

ROOT_STEP_ID = "root"


@dataclass
class StepNode:
    step_id: str
    label: str
    kind: str  # "container" | "leaf"
    socket: str | None = None
    owner: str | None = None  # owning interaction id; None only for root
    children: list["StepNode"] = field(default_factory=list)

    def walk(self) -> Iterator["StepNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def is_anchor(self) -> bool:
        return self.kind == "container" and self.socket is not None


@dataclass
class Interaction:
    interaction_id: str
    component_id: str
    anchor: str  # step id of the container it was applied into
    bindings: dict[str, object]
    sequence: int  # ledger position at creation


@dataclass
class Goal:
    goal_id: str
    name: str
    root: StepNode
    interactions: list[Interaction] = field(default_factory=list)
    next_ordinal: int = 1

    def find_node(self, step_id: str) -> StepNode | None:
        for node in self.root.walk():
            if node.step_id == step_id:
                return node
        return None

    def parent_of(self, step_id: str) -> StepNode | None:
        for node in self.root.walk():
            for child in node.children:
                if child.step_id == step_id:
                    return node
        return None

    def interaction(self, interaction_id: str) -> Interaction | None:
        for ix in self.interactions:
            if ix.interaction_id == interaction_id:
                return ix
        return None

    def owned_root(self, interaction_id: str) -> StepNode | None:
        """The step node an interaction instantiated at its anchor."""
        for node in self.root.walk():
            if node.owner == interaction_id:
                return node
        return None

    def owned_nodes(self, interaction_id: str) -> list[StepNode]:
        """Nodes instantiated by one interaction, in spec pre-order."""
        start = self.owned_root(interaction_id)
        if start is None:
            return []
        out: list[StepNode] = []

        def walk(node: StepNode):
            if node.owner != interaction_id:
                return  # another interaction's subtree, anchored inside
            out.append(node)
            for child in node.children:
                walk(child)

        walk(start)
        return out


@dataclass
class Project:
    project_id: str
    name: str
    targets: list[str]
    goals: list[Goal] = field(default_factory=list)
    revision: int = 0
    next_goal_ordinal: int = 1

    def goal(self, goal_id: str) -> Goal:
        for g in self.goals:
            if g.goal_id == goal_id:
                return g
        raise GoalNotFound(f"no goal '{goal_id}'")

    def goal_named(self, name: str) -> Goal:
        for g in self.goals:
            if g.name == name:
                return g
        raise GoalNotFound(f"no goal named '{name}'")


@dataclass(frozen=True)
class OutlineRow:
    depth: int
    step_id: str
    label: str
    kind: str
    owner: str | None


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9_]+", "_", name.lower()).strip("_")
    return slug or "unnamed"


# --- operations ----------------------------------------------------------

def create_project(name: str, targets: list[str], registry: Registry) -> Project:
    """New empty project for the given targets, revision 0."""
    ordered: list[str] = []
    for t in targets:
        if t not in ordered:
            ordered.append(t)
    if not ordered:
        raise EmptyTargetSet("a project needs at least one target")
    known = registry.target_ids()
    for t in ordered:
        if t not in known:
            raise UnknownTarget(f"target '{t}' is not declared by any loaded pack")
    return Project(project_id=slugify(name), name=name, targets=ordered)


def create_goal(project: Project, name: str) -> str:
    """Append a goal with a bare root container; returns the goal id."""
    if not name:
        raise DuplicateGoalName("goal name must not be empty")
    if any(g.name == name for g in project.goals):
        raise DuplicateGoalName(f"goal '{name}' already exists")
    goal_id = f"g{project.next_goal_ordinal}"
    root = StepNode(
        step_id=ROOT_STEP_ID,
        label=name,
        kind="container",
        socket=ROOT_SOCKET,
    )
    project.goals.append(Goal(goal_id=goal_id, name=name, root=root))
    project.next_goal_ordinal += 1
    project.revision += 1
    return goal_id


def _parse_raw(f, raw):
    """Parse one raw value to its field kind; returns (value, reason)."""
    kind = f.kind
    if kind == "text":
        if not isinstance(raw, str):
            return None, "expected text"
        pattern = (f.constraint or {}).get("pattern")
        if pattern and not re.fullmatch(pattern, raw):
            return None, f"does not match pattern {pattern}"
        return raw, None
    if kind == "integer":
        if isinstance(raw, bool):
            return None, "expected an integer"
        if isinstance(raw, int):
            value = raw
        elif isinstance(raw, str):
            try:
                value = int(raw.strip())
            except ValueError:
                return None, "not an integer"
        else:
            return None, "expected an integer"
        lo = (f.constraint or {}).get("min")
        hi = (f.constraint or {}).get("max")
        if lo is not None and value < lo:
            return None, f"out of range: below {lo}"
        if hi is not None and value > hi:
            return None, f"out of range: above {hi}"
        return value, None
    if kind == "boolean":
        if isinstance(raw, bool):
            return raw, None
        if isinstance(raw, str) and raw.strip().lower() in ("true", "false"):
            return raw.strip().lower() == "true", None
        return None, "expected true or false"
    if kind == "enum":
        if not isinstance(raw, str):
            return None, "expected one of the choices"
        if raw not in f.choices():
            return None, f"must be one of {f.choices()}"
        return raw, None
    if kind == "list-of-text":
        if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
            return None, "expected a list of text values"
        pattern = (f.constraint or {}).get("pattern")
        if pattern:
            for item in raw:
                if not re.fullmatch(pattern, item):
                    return None, f"item {item!r} does not match pattern {pattern}"
        return list(raw), None
    return None, f"unknown field kind {kind}"


def validate_bindings(
    schema: InteractionPageSchema, raw: dict[str, object]
) -> dict[str, object]:
    """Parse raw form values into a complete, typed binding.

    Absent optional fields take their defaults; every failing field is
    reported at once via FieldErrors.
    """
    errors: list[tuple[str, str]] = []
    out: dict[str, object] = {}
    names = {f.name for f in schema.fields}
    for key in raw:
        if key not in names:
            errors.append((key, "unknown field"))
    for f in schema.fields:
        if f.name not in raw or raw[f.name] is None:
            if f.default is not None:
                out[f.name] = f.default
            elif f.required:
                errors.append((f.name, "required"))
            else:
                # absent optional field without default: kind-specific zero
                out[f.name] = {"text": "", "integer": 0, "boolean": False,
                               "enum": "", "list-of-text": []}[f.kind]
            continue
        value, reason = _parse_raw(f, raw[f.name])
        if reason:
            errors.append((f.name, reason))
        else:
            out[f.name] = value
    if errors:
        raise FieldErrors(errors)
    return out


def _label_builtins(goal: Goal, step_id: str) -> dict[str, object]:
    return {"step_id": step_id, "goal_name": goal.name, "indent": ""}


def _instantiate(
    goal: Goal, component: ComponentDefinition, bindings: dict[str, object],
    ordinal: int, interaction_id: str,
) -> StepNode:
    counter = itertools.count()

    def build(spec_node: StepSpecNode) -> StepNode:
        step_id = f"s{ordinal}n{next(counter)}"
        node = StepNode(
            step_id=step_id,
            label=masks.expand_template(
                spec_node.label, bindings,
                _label_builtins(goal, step_id), allow_sockets=False,
            ),
            kind=spec_node.kind,
            socket=spec_node.socket,
            owner=interaction_id,
        )
        node.children = [build(c) for c in spec_node.children]
        return node

    return build(component.step_spec.root)


def apply_interaction(
    project: Project,
    goal_id: str,
    anchor: str,
    component: ComponentDefinition,
    bindings: dict[str, object],
) -> str:
    """Instantiate a component's step spec under the anchor container.

    ``bindings`` must already be validated against the component's page.
    Returns the new interaction id.
    """
    goal = project.goal(goal_id)
    anchor_node = goal.find_node(anchor)
    if anchor_node is None:
        raise AnchorNotFound(f"no step '{anchor}' in goal '{goal.name}'")
    if not anchor_node.is_anchor():
        raise AnchorNotContainer(
            f"step '{anchor}' does not accept child interactions"
        )
    ordinal = goal.next_ordinal
    interaction_id = f"i{ordinal}"
    subtree = _instantiate(goal, component, bindings, ordinal, interaction_id)
    anchor_node.children.append(subtree)
    goal.interactions.append(Interaction(
        interaction_id=interaction_id,
        component_id=component.component_id,
        anchor=anchor,
        bindings=dict(bindings),
        sequence=len(goal.interactions),
    ))
    goal.next_ordinal = ordinal + 1
    project.revision += 1
    return interaction_id


def edit_interaction(
    project: Project,
    goal_id: str,
    interaction_id: str,
    new_raw: dict[str, object],
    registry: Registry,
) -> dict[str, object]:
    """Replace an interaction's bindings and re-render its step labels.

    Children anchored inside the interaction's sockets stay in place.
    """
    goal = project.goal(goal_id)
    ix = goal.interaction(interaction_id)
    if ix is None:
        raise InteractionNotFound(f"no interaction '{interaction_id}'")
    component = registry.component(ix.component_id)
    bindings = validate_bindings(component.page, new_raw)

    owned = goal.owned_nodes(interaction_id)
    spec_nodes = component.step_spec.nodes()
    # instantiation is structure-preserving, so these walk in lockstep
    assert len(owned) == len(spec_nodes)
    new_labels = [
        masks.expand_template(
            spec_node.label, bindings,
            _label_builtins(goal, node.step_id), allow_sockets=False,
        )
        for node, spec_node in zip(owned, spec_nodes)
    ]
    for node, label in zip(owned, new_labels):
        node.label = label
    ix.bindings = dict(bindings)
    project.revision += 1
    return dict(bindings)


def delete_interaction(
    project: Project,
    goal_id: str,
    interaction_id: str,
    cascade: bool = False,
) -> list[str]:
    """Remove an interaction and (with cascade) everything anchored inside.

    Without cascade the call refuses when any other interaction is
    anchored in the doomed subtree.  Returns removed ids in ledger order.
    """
    goal = project.goal(goal_id)
    ix = goal.interaction(interaction_id)
    if ix is None:
        raise InteractionNotFound(f"no interaction '{interaction_id}'")
    subtree_root = goal.owned_root(interaction_id)
    assert subtree_root is not None
    subtree_ids = {node.step_id for node in subtree_root.walk()}
    dependents = [
        other.interaction_id
        for other in goal.interactions
        if other.interaction_id != interaction_id and other.anchor in subtree_ids
    ]
    if dependents and not cascade:
        raise HasDependents(dependents)

    removed = {interaction_id, *dependents}
    parent = goal.parent_of(subtree_root.step_id)
    assert parent is not None
    parent.children = [
        c for c in parent.children if c.step_id != subtree_root.step_id
    ]
    removed_in_order = [
        i.interaction_id for i in goal.interactions
        if i.interaction_id in removed
    ]
    goal.interactions = [
        i for i in goal.interactions if i.interaction_id not in removed
    ]
    project.revision += 1
    return removed_in_order


def steps_outline(goal: Goal) -> list[OutlineRow]:
    """Depth-first pre-order rows of the rendered tree."""
    rows: list[OutlineRow] = []

    def walk(node: StepNode, depth: int):
        rows.append(OutlineRow(
            depth=depth,
            step_id=node.step_id,
            label=node.label,
            kind=node.kind,
            owner=node.owner,
        ))
        for child in node.children:
            walk(child, depth + 1)

    walk(goal.root, 0)
    return rows


def count_user_steps(goal: Goal) -> int:
    """Number of non-root step nodes (one per instantiated spec node)."""
    return sum(1 for _ in goal.root.walk()) - 1


def resolve_socket_anchor(
    goal: Goal, owner_ordinal: int | None, socket: str | None
) -> str:
    """Resolve a symbolic (owner ordinal, socket) selector to a step id.

    ``None`` ordinal addresses the goal root.  Ordinals index the current
    ledger, which is what makes session scripts id-independent.
    """
    if owner_ordinal is None:
        return goal.root.step_id
    if not 0 <= owner_ordinal < len(goal.interactions):
        raise AnchorNotFound(
            f"no interaction at ledger position {owner_ordinal}"
        )
    ix = goal.interactions[owner_ordinal]
    for node in goal.owned_nodes(ix.interaction_id):
        if node.socket == socket:
            return node.step_id
    raise AnchorNotFound(
        f"interaction at position {owner_ordinal} has no socket '{socket}'"
    )
