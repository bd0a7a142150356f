"""Batch command-line interface: the non-interactive path through the engine.

Exit codes: 0 success, 2 validation failure, 3 generation failure,
4 toolchain/build failure, 5 runtime failure, 64 usage error.
Every command accepts ``--json`` for a machine-readable report with
stable keys.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import codegen, packs, projectfile, toolchains
from . import tree as steps
from .errors import (
    EngineError,
    IoFailure,
    MalformedConstruct,
    NoTemplateForTarget,
    SpawnFailure,
    TargetNotInProject,
    TimeoutExceeded,
    ToolchainMissing,
    UnboundVariable,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GENERATION = 3
EXIT_TOOLCHAIN = 4
EXIT_RUNTIME = 5
EXIT_USAGE = 64

_GENERATION_ERRORS = (
    NoTemplateForTarget, TargetNotInProject, UnboundVariable, MalformedConstruct,
)
_TOOLCHAIN_ERRORS = (ToolchainMissing, IoFailure)
_RUNTIME_ERRORS = (SpawnFailure, TimeoutExceeded)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def default_packs_dir() -> Path:
    return Path(str(importlib.resources.files("stw") / "data"))


def load_registry(packs_dir: Path | None) -> packs.Registry:
    directory = packs_dir or default_packs_dir()
    registry = packs.Registry()
    for path in sorted(Path(directory).glob("*.pack.json")):
        registry.add_pack(packs.load_pack(path.read_bytes()))
    if not registry.packs:
        raise EngineError(f"no .pack.json files in {directory}")
    return registry


def _report(args, payload: dict, *, human: str | None = None) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    elif human:
        print(human)


def _load_project(path: str, registry) -> steps.Project:
    return projectfile.load_project(projectfile.read_file(path), registry)


# --- commands ------------------------------------------------------------

def cmd_init(args) -> int:
    registry = load_registry(args.packs)
    targets = [t for t in args.targets.split(",") if t]
    project = steps.create_project(args.name, targets, registry)
    data = projectfile.save_project(project, registry)
    Path(args.output).write_bytes(data)
    _report(args, {
        "command": "init", "ok": True,
        "project_id": project.project_id, "output": str(args.output),
    }, human=f"created {args.output} ({project.project_id})")
    return EXIT_OK


def cmd_pack_validate(args) -> int:
    try:
        pack = packs.parse_pack(projectfile.read_file(args.file))
    except EngineError as exc:
        _report(args, {
            "command": "pack_validate", "ok": False,
            "findings": [{"severity": "error", "component_id": None,
                          "code": exc.code, "message": exc.message}],
        }, human=f"error [{exc.code}] {exc.message}")
        return EXIT_VALIDATION
    findings = packs.validate_pack(pack)
    payload = {
        "command": "pack_validate",
        "ok": not findings,
        "pack_id": pack.pack_id,
        "findings": [
            {"severity": f.severity, "component_id": f.component_id,
             "code": f.code, "message": f.message}
            for f in findings
        ],
    }
    if args.json:
        _report(args, payload)
    else:
        for f in findings:
            where = f" [{f.component_id}]" if f.component_id else ""
            print(f"{f.severity}{where} {f.code}: {f.message}")
        if not findings:
            print(f"{pack.pack_id}@{pack.version}: "
                  f"{len(pack.components)} components, no findings")
    return EXIT_OK if not findings else EXIT_VALIDATION


def cmd_replay(args) -> int:
    registry = load_registry(args.packs)
    script = projectfile.load_session(projectfile.read_file(args.session))
    project = projectfile.replay_session(script, registry)
    data = projectfile.save_project(project, registry)
    Path(args.output).write_bytes(data)
    _report(args, {
        "command": "replay", "ok": True,
        "project_id": project.project_id,
        "revision": project.revision,
        "output": str(args.output),
    }, human=f"replayed {len(script.actions)} actions -> {args.output}")
    return EXIT_OK


def _write_generation(manifest, out_dir: Path) -> None:
    target_dir = out_dir / manifest.target
    target_dir.mkdir(parents=True, exist_ok=True)
    for unit in manifest.units:
        (target_dir / unit.filename).write_text(unit.text, encoding="utf-8")
    (target_dir / "manifest.json").write_text(
        json.dumps(codegen.manifest_doc(manifest), indent=2,
                   ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def cmd_gen(args) -> int:
    registry = load_registry(args.packs)
    project = _load_project(args.project, registry)
    targets = project.targets if args.all_targets else [args.target]
    if not args.all_targets and not args.target:
        raise EngineError("gen needs --target or --all-targets")
    out_dir = Path(args.output)
    results = []
    for target in targets:
        manifest = codegen.generate_project(project, registry, target)
        _write_generation(manifest, out_dir)
        results.append({
            "target": target,
            "dir": str(out_dir / target),
            "entry": manifest.entry,
            "units": [u.filename for u in manifest.units],
        })
    _report(args, {"command": "gen", "ok": True, "targets": results},
            human="\n".join(
                f"{r['target']}: {len(r['units'])} unit(s) -> {r['dir']}"
                for r in results
            ))
    return EXIT_OK


def _build_manifest_dir(target_dir: Path, spec) -> list[dict]:
    doc = json.loads((target_dir / "manifest.json").read_text("utf-8"))
    build_dir = target_dir / "build"
    results = []
    for unit_doc in doc["units"]:
        unit = codegen.SourceUnit(
            target=doc["target"],
            filename=unit_doc["filename"],
            text=unit_doc["text"],
            section_map=tuple(
                (m["section"], m["start_line"], m["end_line"])
                for m in unit_doc["section_map"]
            ),
        )
        outcome = toolchains.build(unit, spec, build_dir)
        results.append({
            "target": doc["target"],
            "filename": unit.filename,
            "success": outcome.success,
            "exit_code": outcome.exit_code,
            "diagnostics": outcome.diagnostics,
        })
    return results


def cmd_build(args) -> int:
    specs = toolchains.load_toolchains(args.toolchains)
    base = Path(args.dir)
    if args.all_targets:
        target_dirs = sorted(
            d for d in base.iterdir()
            if d.is_dir() and (d / "manifest.json").exists()
        )
    else:
        if not args.target:
            raise EngineError("build needs --target or --all-targets")
        target_dirs = [base / args.target]
    for d in target_dirs:
        if not (d / "manifest.json").exists():
            raise IoFailure(f"no manifest.json under {d}")

    all_results: list[dict] = []

    def build_one(d: Path) -> list[dict]:
        target = d.name
        spec = specs.get(target)
        if spec is None:
            raise ToolchainMissing(f"no toolchain configured for '{target}'")
        if not toolchains.detect_toolchain(spec).found:
            raise ToolchainMissing(f"toolchain for '{target}' not found")
        return _build_manifest_dir(d, spec)

    if len(target_dirs) > 1:
        with ThreadPoolExecutor(max_workers=len(target_dirs)) as pool:
            for rows in pool.map(build_one, target_dirs):
                all_results.extend(rows)
    else:
        all_results.extend(build_one(target_dirs[0]))

    ok = all(r["success"] for r in all_results)
    _report(args, {"command": "build", "ok": ok, "results": all_results},
            human="\n".join(
                f"{r['target']}/{r['filename']}: "
                + ("ok" if r["success"] else f"FAILED\n{r['diagnostics']}")
                for r in all_results
            ))
    return EXIT_OK if ok else EXIT_TOOLCHAIN


def cmd_run(args) -> int:
    registry = load_registry(args.packs)
    specs = toolchains.load_toolchains(args.toolchains)
    project = _load_project(args.project, registry)
    spec = specs.get(args.target)
    if spec is None:
        raise ToolchainMissing(f"no toolchain configured for '{args.target}'")
    if not toolchains.detect_toolchain(spec).found:
        raise ToolchainMissing(f"toolchain for '{args.target}' not found")
    manifest = codegen.generate_project(project, registry, args.target)
    if manifest.entry is None:
        raise EngineError("project has no goals, nothing to run")
    stdin = Path(args.stdin).read_bytes() if args.stdin else b""
    with tempfile.TemporaryDirectory(prefix="stw-run-") as workdir:
        entry_outcome = None
        for unit in manifest.units:
            outcome = toolchains.build(unit, spec, Path(workdir))
            if not outcome.success:
                message = outcome.diagnostics or "build failed"
                _report(args, {
                    "command": "run", "ok": False, "target": args.target,
                    "stage": "build", "filename": unit.filename,
                    "diagnostics": message,
                }, human=f"build failed for {unit.filename}:\n{message}")
                return EXIT_TOOLCHAIN
            if unit.filename == manifest.entry:
                entry_outcome = outcome
        assert entry_outcome is not None
        result = toolchains.run(entry_outcome, spec, stdin=stdin,
                                timeout=args.timeout)
    if args.json:
        _report(args, {
            "command": "run", "ok": result.exit_code == 0,
            "target": args.target,
            "exit_code": result.exit_code,
            "stdout": result.stdout.decode("utf-8", "replace"),
            "stderr": result.stderr.decode("utf-8", "replace"),
            "timed_out": result.timed_out,
            "wall_time": result.wall_time,
        })
    else:
        sys.stdout.buffer.write(result.stdout)
        sys.stdout.buffer.flush()
        sys.stderr.buffer.write(result.stderr)
        sys.stderr.buffer.flush()
    return EXIT_OK if result.exit_code == 0 else EXIT_RUNTIME


def cmd_steps(args) -> int:
    registry = load_registry(args.packs)
    project = _load_project(args.project, registry)
    goals = [
        {"goal_id": g.goal_id, "name": g.name,
         "steps": steps.count_user_steps(g)}
        for g in project.goals
    ]
    total = sum(g["steps"] for g in goals)
    _report(args, {
        "command": "steps", "ok": True, "goals": goals, "total": total,
    }, human="\n".join(
        [f"{g['name']}: {g['steps']}" for g in goals] + [f"total: {total}"]
    ))
    return EXIT_OK


def cmd_tree(args) -> int:
    registry = load_registry(args.packs)
    project = _load_project(args.project, registry)
    goal = project.goal_named(args.goal) if args.goal else project.goals[0]
    rows = steps.steps_outline(goal)
    _report(args, {
        "command": "tree", "ok": True, "goal": goal.name,
        "rows": [
            {"depth": r.depth, "step_id": r.step_id, "label": r.label,
             "kind": r.kind, "owner": r.owner}
            for r in rows
        ],
    }, human="\n".join("  " * r.depth + r.label for r in rows))
    return EXIT_OK


def cmd_serve(args) -> int:
    import os

    from . import service

    registry = load_registry(args.packs)
    specs = toolchains.load_toolchains(args.toolchains)
    state = service.EngineState(registry, specs,
                                run_timeout=args.run_timeout)
    app = service.create_app(
        state,
        static_dir=args.static,
        cors_origins=args.cors or None,
    )
    host = os.environ.get("STW_HOST", args.host)
    port = int(os.environ.get("STW_PORT", args.port))
    service.serve(app, host, port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="stw", description=__doc__)
    parser.add_argument("--json", action="store_true",
                        help="machine-readable report")
    parser.add_argument("--packs", type=Path, default=None,
                        help="directory of .pack.json files")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty project file")
    p.add_argument("name")
    p.add_argument("--targets", required=True,
                   help="comma-separated target ids")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("pack", help="component pack tools")
    pack_sub = p.add_subparsers(dest="pack_command", required=True)
    v = pack_sub.add_parser("validate", help="validate a pack file")
    v.add_argument("file")
    v.set_defaults(func=cmd_pack_validate)

    p = sub.add_parser("replay", help="build a project from a session script")
    p.add_argument("session")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("gen", help="generate source for a project")
    p.add_argument("project")
    p.add_argument("--target")
    p.add_argument("--all-targets", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build previously generated source")
    p.add_argument("dir")
    p.add_argument("--target")
    p.add_argument("--all-targets", action="store_true")
    p.add_argument("--toolchains", type=Path, default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("run", help="generate, build and run a project")
    p.add_argument("project")
    p.add_argument("--target", required=True)
    p.add_argument("--stdin", default=None,
                   help="file fed to the program's standard input")
    p.add_argument("--timeout", type=float,
                   default=toolchains.DEFAULT_TIMEOUT)
    p.add_argument("--toolchains", type=Path, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("steps", help="per-goal user-step counts")
    p.add_argument("project")
    p.set_defaults(func=cmd_steps)

    p = sub.add_parser("tree", help="print a goal's steps outline")
    p.add_argument("project")
    p.add_argument("--goal", default=None)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("serve", help="run the workbench HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--toolchains", type=Path, default=None)
    p.add_argument("--static", type=Path, default=None,
                   help="directory of built workbench assets")
    p.add_argument("--cors", action="append", default=[],
                   help="allowed CORS origin (repeatable)")
    p.add_argument("--run-timeout", type=float,
                   default=toolchains.DEFAULT_TIMEOUT)
    p.set_defaults(func=cmd_serve)

    return parser


def _exit_code_for(exc: EngineError) -> int:
    if isinstance(exc, _RUNTIME_ERRORS):
        return EXIT_RUNTIME
    if isinstance(exc, _TOOLCHAIN_ERRORS):
        return EXIT_TOOLCHAIN
    if isinstance(exc, _GENERATION_ERRORS):
        return EXIT_GENERATION
    return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
