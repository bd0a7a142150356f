"""Durable storage: canonical project files and replayable session scripts.

Both formats are UTF-8 JSON with a fixed key order (see docs/formats.md)
so identical projects always produce identical bytes; that makes golden
tests, diffs and version control natural.  The project file embeds the
rendered steps tree alongside the interaction ledger; on load the tree
is recomputed from the ledger and compared, which catches template drift
between pack versions as well as hand-edited corruption.

Session scripts address anchors symbolically (goal name, owner ledger
position, socket name), never by raw step ids, so they survive id-scheme
changes and replay identically anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import tree as steps
from .errors import (
    CorruptLedger,
    EngineError,
    InteractionNotFound,
    MalformedFile,
    MissingPack,
    UnsupportedFormatVersion,
)
from .packs import Registry
from .tree import Goal, Interaction, Project, StepNode

FILE_FORMAT = 1
PROJECT_EXTENSION = ".stw.json"
SESSION_EXTENSION = ".session.json"


# --- canonical writer -----------------------------------------------------

def _node_doc(node: StepNode) -> dict:
    return {
        "step_id": node.step_id,
        "label": node.label,
        "kind": node.kind,
        "socket": node.socket,
        "owner": node.owner,
        "children": [_node_doc(c) for c in node.children],
    }


def _interaction_doc(ix: Interaction) -> dict:
    return {
        "interaction_id": ix.interaction_id,
        "component_id": ix.component_id,
        "anchor": ix.anchor,
        "sequence": ix.sequence,
        "bindings": {k: ix.bindings[k] for k in sorted(ix.bindings)},
    }


def _goal_doc(goal: Goal) -> dict:
    return {
        "goal_id": goal.goal_id,
        "name": goal.name,
        "next_ordinal": goal.next_ordinal,
        "interactions": [_interaction_doc(i) for i in goal.interactions],
        "root": _node_doc(goal.root),
    }


def _referenced_packs(project: Project, registry: Registry) -> list[dict]:
    """Packs the file depends on: component owners plus target scaffolds."""
    ids: set[str] = set()
    for target in project.targets:
        ids.add(registry.scaffold_pack(target).pack_id)
    for goal in project.goals:
        for ix in goal.interactions:
            ids.add(registry.pack_of(ix.component_id).pack_id)
    refs = []
    for pack_id in sorted(ids):
        pack = registry.pack(pack_id)
        assert pack is not None
        refs.append({"pack_id": pack.pack_id, "version": pack.version})
    return refs


def save_project(project: Project, registry: Registry) -> bytes:
    """Serialize to canonical bytes; stable across runs and platforms."""
    doc = {
        "format": FILE_FORMAT,
        "packs": _referenced_packs(project, registry),
        "project": {
            "project_id": project.project_id,
            "name": project.name,
            "targets": list(project.targets),
            "revision": project.revision,
            "next_goal_ordinal": project.next_goal_ordinal,
            "goals": [_goal_doc(g) for g in project.goals],
        },
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# --- loader ------------------------------------------------------------------

def _need(obj: dict, key: str, typ, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedFile(f"{where}: missing key '{key}'")
    value = obj[key]
    if typ is int and isinstance(value, bool):
        raise MalformedFile(f"{where}: '{key}' must be {typ.__name__}")
    if not isinstance(value, typ):
        raise MalformedFile(f"{where}: '{key}' must be {typ.__name__}")
    return value


def _parse_node(obj, where: str) -> StepNode:
    node = StepNode(
        step_id=_need(obj, "step_id", str, where),
        label=_need(obj, "label", str, where),
        kind=_need(obj, "kind", str, where),
        socket=obj.get("socket"),
        owner=obj.get("owner"),
    )
    if node.kind not in ("container", "leaf"):
        raise MalformedFile(f"{where}: bad node kind '{node.kind}'")
    children = _need(obj, "children", list, where)
    node.children = [
        _parse_node(c, f"{where}.children[{i}]") for i, c in enumerate(children)
    ]
    return node


def _parse_interaction(obj, where: str) -> Interaction:
    bindings = _need(obj, "bindings", dict, where)
    return Interaction(
        interaction_id=_need(obj, "interaction_id", str, where),
        component_id=_need(obj, "component_id", str, where),
        anchor=_need(obj, "anchor", str, where),
        bindings=dict(bindings),
        sequence=_need(obj, "sequence", int, where),
    )


def _ordinal(interaction_id: str, where: str) -> int:
    if not interaction_id.startswith("i"):
        raise MalformedFile(f"{where}: bad interaction id '{interaction_id}'")
    try:
        return int(interaction_id[1:])
    except ValueError:
        raise MalformedFile(
            f"{where}: bad interaction id '{interaction_id}'"
        ) from None


def _replay_goal(stored: Goal, registry: Registry) -> Goal:
    """Rebuild a goal's tree from its ledger alone, with stored ids."""
    rebuilt = Goal(
        goal_id=stored.goal_id,
        name=stored.name,
        root=StepNode(
            step_id=steps.ROOT_STEP_ID,
            label=stored.name,
            kind="container",
            socket=stored.root.socket,
        ),
        next_ordinal=1,
    )
    shell = Project(project_id="check", name="check", targets=["_"],
                    goals=[rebuilt])
    for ix in stored.interactions:
        component = registry.component(ix.component_id)
        rebuilt.next_ordinal = _ordinal(ix.interaction_id, "ledger")
        new_id = steps.apply_interaction(
            shell, rebuilt.goal_id, ix.anchor, component, ix.bindings
        )
        assert new_id == ix.interaction_id
    rebuilt.next_ordinal = stored.next_ordinal
    return rebuilt


def load_project(data: bytes, registry: Registry) -> Project:
    """Reconstruct a project, verifying packs and ledger/tree consistency."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise MalformedFile(f"project file unreadable: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedFile("project file must be a JSON object")
    fmt = doc.get("format")
    if fmt != FILE_FORMAT:
        raise UnsupportedFormatVersion(
            f"project file format {fmt!r}, this engine reads {FILE_FORMAT}"
        )

    for ref in _need(doc, "packs", list, "file"):
        pack_id = _need(ref, "pack_id", str, "packs[]")
        version = _need(ref, "version", str, "packs[]")
        loaded = registry.pack(pack_id)
        if loaded is None or loaded.version != version:
            raise MissingPack(
                f"project needs pack {pack_id}@{version}, "
                + ("not loaded" if loaded is None
                   else f"loaded version is {loaded.version}")
            )

    pdoc = _need(doc, "project", dict, "file")
    targets = _need(pdoc, "targets", list, "project")
    if not all(isinstance(t, str) for t in targets):
        raise MalformedFile("project targets must be strings")
    project = Project(
        project_id=_need(pdoc, "project_id", str, "project"),
        name=_need(pdoc, "name", str, "project"),
        targets=list(targets),
        revision=_need(pdoc, "revision", int, "project"),
        next_goal_ordinal=_need(pdoc, "next_goal_ordinal", int, "project"),
    )
    known = registry.target_ids()
    for t in project.targets:
        if t not in known:
            raise MissingPack(f"no loaded pack declares target '{t}'")

    seen_names: set[str] = set()
    for i, gdoc in enumerate(_need(pdoc, "goals", list, "project")):
        where = f"goals[{i}]"
        goal = Goal(
            goal_id=_need(gdoc, "goal_id", str, where),
            name=_need(gdoc, "name", str, where),
            root=_parse_node(_need(gdoc, "root", dict, where), f"{where}.root"),
            interactions=[
                _parse_interaction(x, f"{where}.interactions[{j}]")
                for j, x in enumerate(_need(gdoc, "interactions", list, where))
            ],
            next_ordinal=_need(gdoc, "next_ordinal", int, where),
        )
        if goal.name in seen_names:
            raise MalformedFile(f"{where}: duplicate goal name '{goal.name}'")
        seen_names.add(goal.name)

        ordinals = [_ordinal(x.interaction_id, where) for x in goal.interactions]
        if ordinals and goal.next_ordinal <= max(ordinals):
            raise CorruptLedger(
                f"goal '{goal.name}': next_ordinal {goal.next_ordinal} "
                "collides with existing interactions"
            )
        # sequence is a historical stamp (position at creation); deletions
        # may leave gaps or repeats, so only its bounds can be checked
        for ix in goal.interactions:
            if ix.sequence < 0 or ix.sequence >= goal.next_ordinal:
                raise CorruptLedger(
                    f"goal '{goal.name}': interaction {ix.interaction_id} "
                    f"has impossible sequence stamp {ix.sequence}"
                )

        try:
            rebuilt = _replay_goal(goal, registry)
        except EngineError as exc:
            raise CorruptLedger(
                f"goal '{goal.name}' does not replay: {exc}"
            ) from None
        if rebuilt.root != goal.root:
            raise CorruptLedger(
                f"goal '{goal.name}': stored tree does not match its ledger"
            )
        project.goals.append(goal)

    return project


# --- session scripts --------------------------------------------------------

@dataclass(frozen=True)
class AnchorSelector:
    """Symbolic anchor: ledger position of the owner, or None for root."""

    owner: int | None = None
    socket: str | None = None


@dataclass(frozen=True)
class Action:
    kind: str  # create_goal | apply | edit | delete
    goal: str
    name: str = ""                       # create_goal
    anchor: AnchorSelector | None = None  # apply
    component: str = ""                  # apply
    bindings: dict = field(default_factory=dict)  # apply | edit
    interaction: int = 0                 # edit | delete: ledger position
    cascade: bool = False                # delete


@dataclass(frozen=True)
class SessionScript:
    project_name: str
    targets: tuple[str, ...]
    actions: tuple[Action, ...]


class ReplayError(EngineError):
    """A scripted action failed; carries the action index and the cause."""

    code = "replay_failed"

    def __init__(self, index: int, cause: EngineError):
        self.index = index
        self.cause = cause
        super().__init__(f"action {index} failed: {cause.message}")


def _parse_anchor(obj, where: str) -> AnchorSelector:
    if obj == "root" or obj is None:
        return AnchorSelector()
    if isinstance(obj, dict):
        owner = obj.get("owner")
        socket = obj.get("socket")
        if owner is None:
            return AnchorSelector()
        if isinstance(owner, int) and not isinstance(owner, bool) \
                and isinstance(socket, str):
            return AnchorSelector(owner=owner, socket=socket)
    raise MalformedFile(f"{where}: bad anchor selector {obj!r}")


def load_session(data: bytes) -> SessionScript:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise MalformedFile(f"session file unreadable: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedFile("session file must be a JSON object")
    if doc.get("format") != FILE_FORMAT:
        raise UnsupportedFormatVersion(
            f"session format {doc.get('format')!r}, expected {FILE_FORMAT}"
        )
    header = _need(doc, "project", dict, "session")
    name = _need(header, "name", str, "session.project")
    targets = _need(header, "targets", list, "session.project")
    if not all(isinstance(t, str) for t in targets):
        raise MalformedFile("session targets must be strings")
    actions: list[Action] = []
    for i, adoc in enumerate(_need(doc, "actions", list, "session")):
        where = f"actions[{i}]"
        kind = _need(adoc, "action", str, where)
        if kind == "create_goal":
            actions.append(Action(
                kind=kind, goal=_need(adoc, "name", str, where),
                name=_need(adoc, "name", str, where),
            ))
        elif kind == "apply":
            actions.append(Action(
                kind=kind,
                goal=_need(adoc, "goal", str, where),
                anchor=_parse_anchor(adoc.get("anchor"), where),
                component=_need(adoc, "component", str, where),
                bindings=_need(adoc, "bindings", dict, where),
            ))
        elif kind == "edit":
            actions.append(Action(
                kind=kind,
                goal=_need(adoc, "goal", str, where),
                interaction=_need(adoc, "interaction", int, where),
                bindings=_need(adoc, "bindings", dict, where),
            ))
        elif kind == "delete":
            cascade = adoc.get("cascade", False)
            if not isinstance(cascade, bool):
                raise MalformedFile(f"{where}: cascade must be a boolean")
            actions.append(Action(
                kind=kind,
                goal=_need(adoc, "goal", str, where),
                interaction=_need(adoc, "interaction", int, where),
                cascade=cascade,
            ))
        else:
            raise MalformedFile(f"{where}: unknown action '{kind}'")
    return SessionScript(
        project_name=name, targets=tuple(targets), actions=tuple(actions)
    )


def _anchor_selector_doc(anchor: AnchorSelector) -> object:
    if anchor.owner is None:
        return "root"
    return {"owner": anchor.owner, "socket": anchor.socket}


def save_session(script: SessionScript) -> bytes:
    """Canonical session writer, the inverse of load_session."""
    actions = []
    for a in script.actions:
        if a.kind == "create_goal":
            actions.append({"action": a.kind, "name": a.name})
        elif a.kind == "apply":
            assert a.anchor is not None
            actions.append({
                "action": a.kind,
                "goal": a.goal,
                "anchor": _anchor_selector_doc(a.anchor),
                "component": a.component,
                "bindings": {k: a.bindings[k] for k in sorted(a.bindings)},
            })
        elif a.kind == "edit":
            actions.append({
                "action": a.kind,
                "goal": a.goal,
                "interaction": a.interaction,
                "bindings": {k: a.bindings[k] for k in sorted(a.bindings)},
            })
        else:
            actions.append({
                "action": a.kind,
                "goal": a.goal,
                "interaction": a.interaction,
                "cascade": a.cascade,
            })
    doc = {
        "format": FILE_FORMAT,
        "project": {
            "name": script.project_name,
            "targets": list(script.targets),
        },
        "actions": actions,
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _interaction_at(goal: Goal, position: int) -> Interaction:
    if not 0 <= position < len(goal.interactions):
        raise InteractionNotFound(
            f"no interaction at ledger position {position}"
        )
    return goal.interactions[position]


def replay_session(script: SessionScript, registry: Registry) -> Project:
    """Execute a script through the steps-tree operations, atomically.

    Any failure raises ReplayError with the failing action's index; no
    partial project escapes.
    """
    project = steps.create_project(script.project_name, list(script.targets),
                                   registry)
    for index, action in enumerate(script.actions):
        try:
            if action.kind == "create_goal":
                steps.create_goal(project, action.name)
                continue
            goal = project.goal_named(action.goal)
            if action.kind == "apply":
                component = registry.component(action.component)
                bindings = steps.validate_bindings(component.page,
                                                   action.bindings)
                assert action.anchor is not None
                anchor_id = steps.resolve_socket_anchor(
                    goal, action.anchor.owner, action.anchor.socket
                )
                steps.apply_interaction(
                    project, goal.goal_id, anchor_id, component, bindings
                )
            elif action.kind == "edit":
                ix = _interaction_at(goal, action.interaction)
                steps.edit_interaction(
                    project, goal.goal_id, ix.interaction_id,
                    action.bindings, registry,
                )
            elif action.kind == "delete":
                ix = _interaction_at(goal, action.interaction)
                steps.delete_interaction(
                    project, goal.goal_id, ix.interaction_id,
                    cascade=action.cascade,
                )
        except ReplayError:
            raise
        except EngineError as exc:
            raise ReplayError(index, exc) from exc
    return project


def read_file(path: Path | str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from None
