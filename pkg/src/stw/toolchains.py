"""Invoke per-target compilers and interpreters on generated source.

Toolchains are configuration, not code: a ``toolchains.json`` file maps
target ids to probe/compile/run command templates, overridable through
``STW_TOOLCHAIN_<TARGET>_PROBE`` / ``..._COMPILE`` / ``..._RUN``
environment variables.  Commands run without shell interpretation;
``{src}``, ``{out}`` and ``{artifact}`` placeholders are substituted
literally into the already-split argument tokens.
"""

from __future__ import annotations

import importlib.resources
import json
import os
import re
import shlex
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from .codegen import SourceUnit
from .errors import (
    IoFailure,
    MalformedFile,
    SpawnFailure,
    TimeoutExceeded,
    ToolchainMissing,
)

DEFAULT_TIMEOUT = 30.0
DEFAULT_BUILD_TIMEOUT = 60.0
OUTPUT_CAP = 1 << 20  # bytes per stream
#: exit marker reported when a run is killed at its timeout
TIMEOUT_EXIT_CODE = -9

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")
_ALLOWED = {
    "probe_command": set(),
    "compile_command": {"src", "out"},
    "run_command": {"artifact", "src"},
}


@dataclass(frozen=True)
class ToolchainSpec:
    target: str
    mode: str  # "compiled" | "interpreted"
    run_command: str
    probe_command: str
    source_extension: str
    compile_command: str | None = None


@dataclass(frozen=True)
class Availability:
    target: str
    found: bool
    version: str = ""


@dataclass(frozen=True)
class BuildOutcome:
    target: str
    success: bool
    exit_code: int
    artifact: Path | None = None
    diagnostics: str | None = None


@dataclass(frozen=True)
class RunResult:
    stdout: bytes
    stderr: bytes
    exit_code: int
    wall_time: float
    timed_out: bool = False


def _check_command(name: str, command: str, target: str) -> None:
    used = set(_PLACEHOLDER_RE.findall(command))
    extra = used - _ALLOWED[name]
    if extra:
        raise MalformedFile(
            f"toolchain '{target}': {name} uses unknown placeholders {sorted(extra)}"
        )


def _parse_spec(obj: dict, where: str) -> ToolchainSpec:
    for key in ("target", "mode", "run_command", "probe_command",
                "source_extension"):
        if key not in obj or not isinstance(obj[key], str):
            raise MalformedFile(f"{where}: missing or non-text '{key}'")
    if obj["mode"] not in ("compiled", "interpreted"):
        raise MalformedFile(f"{where}: mode must be compiled or interpreted")
    compile_command = obj.get("compile_command")
    if obj["mode"] == "compiled" and not compile_command:
        raise MalformedFile(f"{where}: compiled mode requires compile_command")
    spec = ToolchainSpec(
        target=obj["target"],
        mode=obj["mode"],
        run_command=obj["run_command"],
        probe_command=obj["probe_command"],
        source_extension=obj["source_extension"],
        compile_command=compile_command,
    )
    _check_command("probe_command", spec.probe_command, spec.target)
    _check_command("run_command", spec.run_command, spec.target)
    if spec.compile_command:
        _check_command("compile_command", spec.compile_command, spec.target)
    return spec


def _env_override(spec: ToolchainSpec) -> ToolchainSpec:
    key = re.sub(r"[^A-Z0-9]", "_", spec.target.upper())
    run = os.environ.get(f"STW_TOOLCHAIN_{key}_RUN", spec.run_command)
    compile_ = os.environ.get(f"STW_TOOLCHAIN_{key}_COMPILE",
                              spec.compile_command)
    probe = os.environ.get(f"STW_TOOLCHAIN_{key}_PROBE", spec.probe_command)
    return ToolchainSpec(
        target=spec.target,
        mode=spec.mode,
        run_command=run,
        probe_command=probe,
        source_extension=spec.source_extension,
        compile_command=compile_,
    )


def default_config_path() -> Path:
    return Path(str(importlib.resources.files("stw") / "data" / "toolchains.json"))


def load_toolchains(path: Path | None = None) -> dict[str, ToolchainSpec]:
    """Read a toolchains config; environment overrides applied last."""
    config_path = path or default_config_path()
    try:
        doc = json.loads(Path(config_path).read_text("utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read toolchains config: {exc}") from None
    except ValueError as exc:
        raise MalformedFile(f"toolchains config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != 1:
        raise MalformedFile("toolchains config must be an object with format 1")
    entries = doc.get("toolchains")
    if not isinstance(entries, list):
        raise MalformedFile("toolchains config needs a 'toolchains' list")
    out: dict[str, ToolchainSpec] = {}
    for i, obj in enumerate(entries):
        if not isinstance(obj, dict):
            raise MalformedFile(f"toolchains[{i}] must be an object")
        spec = _parse_spec(obj, f"toolchains[{i}]")
        if spec.target in out:
            raise MalformedFile(f"duplicate toolchain for target '{spec.target}'")
        out[spec.target] = _env_override(spec)
    return out


def _tokens(command: str, subs: dict[str, str]) -> list[str]:
    tokens = shlex.split(command)
    if not tokens:
        raise MalformedFile("empty toolchain command")
    out = []
    for token in tokens:
        for name, value in subs.items():
            token = token.replace("{" + name + "}", value)
        out.append(token)
    return out


def detect_toolchain(spec: ToolchainSpec) -> Availability:
    """Probe for the toolchain; absence is data, never an exception."""
    try:
        proc = subprocess.run(
            _tokens(spec.probe_command, {}),
            capture_output=True,
            timeout=10,
        )
    except (OSError, subprocess.TimeoutExpired, MalformedFile):
        return Availability(target=spec.target, found=False)
    if proc.returncode != 0:
        return Availability(target=spec.target, found=False)
    first = (proc.stdout or proc.stderr).decode("utf-8", "replace")
    version = first.splitlines()[0].strip() if first.strip() else ""
    return Availability(target=spec.target, found=True, version=version)


def build(
    unit: SourceUnit,
    spec: ToolchainSpec,
    workdir: Path,
    *,
    timeout: float = DEFAULT_BUILD_TIMEOUT,
) -> BuildOutcome:
    """Write the unit's source and, for compiled targets, compile it."""
    assert spec.target == unit.target, "toolchain/unit target mismatch"
    workdir = Path(workdir)
    try:
        workdir.mkdir(parents=True, exist_ok=True)
        src = workdir / unit.filename
        src.write_text(unit.text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write source into {workdir}: {exc}") from None

    if spec.mode == "interpreted":
        return BuildOutcome(
            target=spec.target, success=True, exit_code=0, artifact=src
        )

    out_path = workdir / Path(unit.filename).stem
    assert spec.compile_command is not None
    try:
        proc = subprocess.run(
            _tokens(spec.compile_command,
                    {"src": str(src), "out": str(out_path)}),
            capture_output=True,
            timeout=timeout,
        )
    except FileNotFoundError as exc:
        raise ToolchainMissing(
            f"compiler for target '{spec.target}' not found: {exc}"
        ) from None
    except subprocess.TimeoutExpired:
        return BuildOutcome(
            target=spec.target, success=False, exit_code=TIMEOUT_EXIT_CODE,
            diagnostics=f"compile timed out after {timeout}s",
        )
    if proc.returncode != 0:
        diagnostics = (proc.stderr + proc.stdout).decode("utf-8", "replace")
        return BuildOutcome(
            target=spec.target, success=False, exit_code=proc.returncode,
            diagnostics=diagnostics or "compiler failed with no output",
        )
    return BuildOutcome(
        target=spec.target, success=True, exit_code=0, artifact=out_path
    )


def run(
    outcome: BuildOutcome,
    spec: ToolchainSpec,
    stdin: bytes = b"",
    timeout: float = DEFAULT_TIMEOUT,
    *,
    output_cap: int = OUTPUT_CAP,
) -> RunResult:
    """Execute a built artifact, capturing both streams up to the cap."""
    assert outcome.success and outcome.artifact is not None, \
        "run() needs a successful build"
    artifact = str(outcome.artifact)
    tokens = _tokens(spec.run_command, {"artifact": artifact, "src": artifact})
    start = time.monotonic()
    try:
        proc = subprocess.run(
            tokens, input=stdin, capture_output=True, timeout=timeout
        )
    except subprocess.TimeoutExpired as exc:
        wall = time.monotonic() - start
        partial = RunResult(
            stdout=(exc.stdout or b"")[:output_cap],
            stderr=(exc.stderr or b"")[:output_cap],
            exit_code=TIMEOUT_EXIT_CODE,
            wall_time=wall,
            timed_out=True,
        )
        raise TimeoutExceeded(
            f"run exceeded {timeout}s and was killed", partial=partial
        ) from None
    except OSError as exc:
        raise SpawnFailure(f"cannot execute {tokens[0]}: {exc}") from None
    return RunResult(
        stdout=proc.stdout[:output_cap],
        stderr=proc.stderr[:output_cap],
        exit_code=proc.returncode,
        wall_time=time.monotonic() - start,
    )
