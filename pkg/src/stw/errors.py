"""Exception taxonomy shared by every engine module.

Each error class carries a stable machine ``code`` (snake_case); the
service layer maps codes to HTTP statuses, the CLI maps them to exit
codes.  Raising anything outside this hierarchy from engine code is a
bug.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "internal"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- component packs ---------------------------------------------------

class PackError(EngineError):
    code = "pack_invalid"


class MalformedPack(PackError):
    code = "malformed_pack"


class DuplicateComponentId(PackError):
    code = "duplicate_component_id"


class UnknownCategory(PackError):
    code = "unknown_category"


class UnboundMaskVariable(PackError):
    code = "unbound_mask_variable"


class MissingSocketSlot(PackError):
    code = "missing_socket_slot"


class ComponentNotFound(EngineError):
    code = "component_not_found"


class NoTemplateForTarget(EngineError):
    code = "no_template_for_target"


# --- steps tree ---------------------------------------------------------

class UnknownTarget(EngineError):
    code = "unknown_target"


class EmptyTargetSet(EngineError):
    code = "empty_target_set"


class DuplicateGoalName(EngineError):
    code = "duplicate_goal_name"


class GoalNotFound(EngineError):
    code = "goal_not_found"


class FieldErrors(EngineError):
    """Binding validation failures, all failing fields at once."""

    code = "field_errors"

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        detail = "; ".join(f"{name}: {reason}" for name, reason in self.errors)
        super().__init__(f"invalid bindings: {detail}")


class AnchorNotFound(EngineError):
    code = "anchor_not_found"


class AnchorNotContainer(EngineError):
    code = "anchor_not_container"


class InteractionNotFound(EngineError):
    code = "interaction_not_found"


class HasDependents(EngineError):
    """Non-cascade delete refused; lists the dependent interaction ids."""

    code = "has_dependents"

    def __init__(self, dependents: list[str]):
        self.dependents = list(dependents)
        super().__init__(
            "other interactions are anchored inside: " + ", ".join(self.dependents)
        )


# --- mask expansion / code generation ------------------------------------

class UnboundVariable(EngineError):
    code = "unbound_variable"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"mask variable <%{name}%> is not bound")


class MalformedConstruct(EngineError):
    code = "malformed_construct"


class TargetNotInProject(EngineError):
    code = "target_not_in_project"


# --- build runner ---------------------------------------------------------

class ToolchainMissing(EngineError):
    code = "toolchain_missing"


class IoFailure(EngineError):
    code = "io_failure"


class SpawnFailure(EngineError):
    code = "spawn_failure"


class TimeoutExceeded(EngineError):
    """Run killed at the timeout; carries whatever output was captured."""

    code = "timeout"

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


# --- persistence -----------------------------------------------------------

class MalformedFile(EngineError):
    code = "malformed_file"


class UnsupportedFormatVersion(EngineError):
    code = "unsupported_format_version"


class MissingPack(EngineError):
    code = "missing_pack"


class CorruptLedger(EngineError):
    code = "corrupt_ledger"


# --- service ----------------------------------------------------------------

class ProjectNotFound(EngineError):
    code = "project_not_found"


class RevisionConflict(EngineError):
    code = "revision_conflict"

    def __init__(self, expected: int, current: int):
        self.expected = expected
        self.current = current
        super().__init__(
            f"expected revision {expected} but project is at {current}"
        )


class MalformedRequest(EngineError):
    code = "malformed_request"


class BindFailure(EngineError):
    code = "bind_failure"
