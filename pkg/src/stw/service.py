"""HTTP facade over the engine for the web workbench.

All state lives in one :class:`EngineState`; per-project mutations are
serialized under a lock and guarded by optimistic revision checks: every
mutating request may carry ``expected_revision`` and gets a 409 with the
current revision when stale.  Responses are JSON throughout; engine
errors surface as ``{"error": {"code", "message", ...}}`` with a stable
machine code per engine error class.
"""

from __future__ import annotations

import socket
import tempfile
import threading
import time
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import codegen, projectfile, toolchains
from . import tree as steps
from .errors import (
    BindFailure,
    EngineError,
    InteractionNotFound,
    MalformedRequest,
    ProjectNotFound,
    RevisionConflict,
    TimeoutExceeded,
    ToolchainMissing,
)
from .packs import Registry
from .tree import Project

_STATUS_BY_CODE = {
    "field_errors": 422,
    "revision_conflict": 409,
    "has_dependents": 409,
    "duplicate_goal_name": 409,
    "project_not_found": 404,
    "goal_not_found": 404,
    "interaction_not_found": 404,
    "component_not_found": 404,
    "anchor_not_found": 404,
    "unknown_category": 404,
    "toolchain_missing": 424,
    "internal": 500,
    "spawn_failure": 500,
    "io_failure": 500,
}
_DEFAULT_STATUS = 400  # anything else engine-raised is a bad request


class EngineState:
    """Registry, toolchains, and the in-memory project store."""

    def __init__(
        self,
        registry: Registry,
        toolchain_specs: dict[str, toolchains.ToolchainSpec] | None = None,
        run_timeout: float = toolchains.DEFAULT_TIMEOUT,
    ):
        self.registry = registry
        self.toolchains = toolchain_specs or {}
        self.run_timeout = run_timeout
        self.projects: dict[str, Project] = {}
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._store_lock = threading.Lock()

    def lock(self, project_id: str) -> threading.Lock:
        with self._store_lock:
            return self._locks[project_id]

    def project(self, project_id: str) -> Project:
        try:
            return self.projects[project_id]
        except KeyError:
            raise ProjectNotFound(f"no project '{project_id}'") from None

    def add_project(self, project: Project) -> None:
        with self._store_lock:
            if project.project_id in self.projects:
                raise MalformedRequest(
                    f"project '{project.project_id}' already exists"
                )
            self.projects[project.project_id] = project


class _ProjectBody(BaseModel):
    name: str
    targets: list[str]


class _GoalBody(BaseModel):
    name: str
    expected_revision: int | None = None


class _InteractionBody(BaseModel):
    anchor: str
    component_id: str
    raw_bindings: dict
    expected_revision: int


class _EditBody(BaseModel):
    raw_bindings: dict
    expected_revision: int


class _GenerateBody(BaseModel):
    target: str


class _BuildRunBody(BaseModel):
    target: str
    stdin: str = ""


def _project_summary(project: Project) -> dict:
    return {
        "project_id": project.project_id,
        "name": project.name,
        "targets": list(project.targets),
        "revision": project.revision,
        "goals": [
            {"goal_id": g.goal_id, "name": g.name} for g in project.goals
        ],
    }


def _outline_rows(goal) -> list[dict]:
    rows: list[dict] = []

    def walk(node, depth: int):
        rows.append({
            "depth": depth,
            "step_id": node.step_id,
            "label": node.label,
            "kind": node.kind,
            "owner": node.owner,
            "socket": node.socket,
        })
        for child in node.children:
            walk(child, depth + 1)

    walk(goal.root, 0)
    return rows


def _check_revision(project: Project, expected: int | None) -> None:
    if expected is not None and expected != project.revision:
        raise RevisionConflict(expected, project.revision)


def create_app(
    state: EngineState,
    *,
    static_dir: Path | str | None = None,
    cors_origins: list[str] | None = None,
    enable_test_hooks: bool = False,
) -> FastAPI:
    app = FastAPI(title="stw service", docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(EngineError)
    def _engine_error(_request: Request, exc: EngineError):
        body: dict = {"error": {"code": exc.code, "message": exc.message}}
        if hasattr(exc, "errors"):
            body["error"]["fields"] = [
                {"field": f, "reason": r} for f, r in exc.errors
            ]
        if isinstance(exc, RevisionConflict):
            body["error"]["current_revision"] = exc.current
        if hasattr(exc, "dependents"):
            body["error"]["dependents"] = exc.dependents
        status = _STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS)
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {
                "code": "malformed_request",
                "message": str(exc.errors()[:3]),
            }},
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/components")
    def components(category: str = "", q: str = ""):
        path = [p for p in category.split("/") if p] if category else None
        rows = state.registry.browse(category_path=path, query=q or None)
        return {"components": [
            {
                "component_id": r.component_id,
                "display_name": r.display_name,
                "category_path": list(r.category_path),
            }
            for r in rows
        ]}

    @app.get("/api/components/{component_id}/page")
    def component_page(component_id: str):
        comp = state.registry.component(component_id)
        return {
            "component_id": comp.component_id,
            "display_name": comp.display_name,
            "fields": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    "required": f.required,
                    "default": f.default,
                    "constraint": f.constraint,
                }
                for f in comp.page.fields
            ],
        }

    @app.get("/api/projects")
    def list_projects():
        return {"projects": [
            _project_summary(p) for p in state.projects.values()
        ]}

    @app.post("/api/projects", status_code=201)
    def create_project(body: _ProjectBody):
        project = steps.create_project(body.name, body.targets, state.registry)
        state.add_project(project)
        return {"project": _project_summary(project)}

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str):
        with state.lock(project_id):
            return {"project": _project_summary(state.project(project_id))}

    @app.post("/api/projects/{project_id}/goals", status_code=201)
    def create_goal(project_id: str, body: _GoalBody):
        with state.lock(project_id):
            project = state.project(project_id)
            _check_revision(project, body.expected_revision)
            goal_id = steps.create_goal(project, body.name)
            return {"goal_id": goal_id, "revision": project.revision}

    @app.get("/api/projects/{project_id}/goals/{goal_id}/tree")
    def goal_tree(project_id: str, goal_id: str):
        with state.lock(project_id):
            project = state.project(project_id)
            goal = project.goal(goal_id)
            return {
                "goal_id": goal_id,
                "rows": _outline_rows(goal),
                "revision": project.revision,
            }

    @app.post(
        "/api/projects/{project_id}/goals/{goal_id}/interactions",
        status_code=201,
    )
    def apply_interaction(project_id: str, goal_id: str,
                          body: _InteractionBody):
        with state.lock(project_id):
            project = state.project(project_id)
            _check_revision(project, body.expected_revision)
            component = state.registry.component(body.component_id)
            bindings = steps.validate_bindings(component.page,
                                               body.raw_bindings)
            interaction_id = steps.apply_interaction(
                project, goal_id, body.anchor, component, bindings
            )
            return {
                "interaction_id": interaction_id,
                "revision": project.revision,
            }

    @app.get(
        "/api/projects/{project_id}/goals/{goal_id}/interactions/{interaction_id}"
    )
    def get_interaction(project_id: str, goal_id: str, interaction_id: str):
        with state.lock(project_id):
            project = state.project(project_id)
            goal = project.goal(goal_id)
            ix = goal.interaction(interaction_id)
            if ix is None:
                raise InteractionNotFound(f"no interaction '{interaction_id}'")
            return {
                "interaction_id": ix.interaction_id,
                "component_id": ix.component_id,
                "anchor": ix.anchor,
                "bindings": ix.bindings,
                "revision": project.revision,
            }

    @app.patch(
        "/api/projects/{project_id}/goals/{goal_id}/interactions/{interaction_id}"
    )
    def edit_interaction(project_id: str, goal_id: str, interaction_id: str,
                         body: _EditBody):
        with state.lock(project_id):
            project = state.project(project_id)
            _check_revision(project, body.expected_revision)
            bindings = steps.edit_interaction(
                project, goal_id, interaction_id, body.raw_bindings,
                state.registry,
            )
            return {"bindings": bindings, "revision": project.revision}

    @app.delete(
        "/api/projects/{project_id}/goals/{goal_id}/interactions/{interaction_id}"
    )
    def delete_interaction(project_id: str, goal_id: str, interaction_id: str,
                           cascade: bool = False,
                           expected_revision: int | None = None):
        with state.lock(project_id):
            project = state.project(project_id)
            _check_revision(project, expected_revision)
            removed = steps.delete_interaction(
                project, goal_id, interaction_id, cascade=cascade
            )
            return {"removed": removed, "revision": project.revision}

    @app.get("/api/projects/{project_id}/steps-count")
    def steps_count(project_id: str):
        with state.lock(project_id):
            project = state.project(project_id)
            goals = [
                {
                    "goal_id": g.goal_id,
                    "name": g.name,
                    "steps": steps.count_user_steps(g),
                }
                for g in project.goals
            ]
            return {
                "goals": goals,
                "total": sum(g["steps"] for g in goals),
                "revision": project.revision,
            }

    @app.post("/api/projects/{project_id}/generate")
    def generate(project_id: str, body: _GenerateBody):
        with state.lock(project_id):
            project = state.project(project_id)
            manifest = codegen.generate_project(
                project, state.registry, body.target
            )
        return {"manifest": codegen.manifest_doc(manifest)}

    @app.post("/api/projects/{project_id}/build-run")
    def build_run(project_id: str, body: _BuildRunBody):
        with state.lock(project_id):
            project = state.project(project_id)
            manifest = codegen.generate_project(
                project, state.registry, body.target
            )
        spec = state.toolchains.get(body.target)
        if spec is None:
            raise ToolchainMissing(
                f"no toolchain configured for target '{body.target}'"
            )
        if not toolchains.detect_toolchain(spec).found:
            raise ToolchainMissing(
                f"toolchain for target '{body.target}' not found "
                f"(probe: {spec.probe_command})"
            )
        builds = []
        run_doc = None
        with tempfile.TemporaryDirectory(prefix="stw-run-") as workdir:
            outcomes = {}
            for unit in manifest.units:
                outcome = toolchains.build(unit, spec, Path(workdir))
                outcomes[unit.filename] = outcome
                builds.append({
                    "filename": unit.filename,
                    "success": outcome.success,
                    "exit_code": outcome.exit_code,
                    "diagnostics": outcome.diagnostics,
                })
            entry = manifest.entry
            if entry is not None and outcomes[entry].success:
                try:
                    result = toolchains.run(
                        outcomes[entry], spec,
                        stdin=body.stdin.encode("utf-8"),
                        timeout=state.run_timeout,
                    )
                except TimeoutExceeded as exc:
                    result = exc.partial
                run_doc = {
                    "stdout": result.stdout.decode("utf-8", "replace"),
                    "stderr": result.stderr.decode("utf-8", "replace"),
                    "exit_code": result.exit_code,
                    "wall_time": result.wall_time,
                    "timed_out": result.timed_out,
                }
        return {
            "target": body.target,
            "builds": builds,
            "run": run_doc,
            "revision": manifest.project_revision,
        }

    @app.get("/api/projects/{project_id}/file")
    def export_file(project_id: str):
        with state.lock(project_id):
            project = state.project(project_id)
            data = projectfile.save_project(project, state.registry)
        return Response(content=data, media_type="application/json")

    @app.put("/api/projects/{project_id}/file")
    async def import_file(project_id: str, request: Request):
        data = await request.body()
        project = projectfile.load_project(data, state.registry)
        if project.project_id != project_id:
            raise MalformedRequest(
                f"file holds project '{project.project_id}', "
                f"endpoint addresses '{project_id}'"
            )
        with state.lock(project_id):
            state.projects[project_id] = project
            return {"project": _project_summary(project)}

    if enable_test_hooks:
        @app.get("/api/_slow")
        def slow(seconds: float = 1.0):
            time.sleep(seconds)
            return {"slept": seconds}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="workbench")

    return app


def check_port_free(host: str, port: int) -> None:
    """Raise BindFailure if the address is already taken."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from None
    finally:
        probe.close()


def serve(app: FastAPI, host: str, port: int) -> None:
    """Run until SIGINT/SIGTERM; in-flight requests drain on shutdown."""
    import uvicorn

    check_port_free(host, port)
    uvicorn.run(app, host=host, port=port, log_level="info")
