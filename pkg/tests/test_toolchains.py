import json
import time

import pytest

from stw import toolchains
from stw.codegen import SourceUnit
from stw.errors import (
    MalformedFile,
    SpawnFailure,
    TimeoutExceeded,
    ToolchainMissing,
)


def unit(target, filename, text):
    return SourceUnit(target=target, filename=filename, text=text,
                      section_map=(("body", 1, text.count("\n") or 1),))


@pytest.fixture(scope="module")
def specs():
    return toolchains.load_toolchains()


class TestConfig:
    def test_bundled_config_has_both_targets(self, specs):
        assert specs["python"].mode == "interpreted"
        assert specs["c"].mode == "compiled"

    def test_compiled_without_compile_command_rejected(self, tmp_path):
        bad = {"format": 1, "toolchains": [{
            "target": "c", "mode": "compiled", "run_command": "{artifact}",
            "probe_command": "cc --version", "source_extension": ".c",
        }]}
        path = tmp_path / "t.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(MalformedFile):
            toolchains.load_toolchains(path)

    def test_unknown_placeholder_rejected(self, tmp_path):
        bad = {"format": 1, "toolchains": [{
            "target": "x", "mode": "interpreted",
            "run_command": "run {nope}", "probe_command": "true",
            "source_extension": ".x",
        }]}
        path = tmp_path / "t.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(MalformedFile):
            toolchains.load_toolchains(path)

    def test_env_override_wins(self, monkeypatch):
        monkeypatch.setenv("STW_TOOLCHAIN_PYTHON_RUN", "python3 -E {src}")
        specs = toolchains.load_toolchains()
        assert specs["python"].run_command == "python3 -E {src}"

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"format": 2, "toolchains": []}))
        with pytest.raises(MalformedFile):
            toolchains.load_toolchains(path)


class TestDetect:
    def test_local_interpreter_found(self, specs):
        report = toolchains.detect_toolchain(specs["python"])
        assert report.found
        assert report.version  # e.g. "Python 3.10.12"

    def test_local_compiler_found(self, specs):
        report = toolchains.detect_toolchain(specs["c"])
        assert report.found
        assert report.version

    def test_absent_tool_is_data_not_error(self):
        spec = toolchains.ToolchainSpec(
            target="ghost", mode="interpreted", run_command="ghost {src}",
            probe_command="definitely-not-a-tool --version",
            source_extension=".g",
        )
        report = toolchains.detect_toolchain(spec)
        assert not report.found

    def test_detection_is_idempotent(self, specs):
        first = toolchains.detect_toolchain(specs["python"])
        second = toolchains.detect_toolchain(specs["python"])
        assert first.found == second.found


class TestBuild:
    def test_interpreted_passthrough(self, specs, tmp_path):
        u = unit("python", "hello.py", 'print("Hello, World!")\n')
        outcome = toolchains.build(u, specs["python"], tmp_path)
        assert outcome.success
        assert outcome.artifact == tmp_path / "hello.py"
        assert outcome.artifact.read_text() == u.text

    def test_compiled_produces_runnable_artifact(self, specs, tmp_path):
        u = unit("c", "hello.c",
                 '#include <stdio.h>\nint main(void){puts("ok");return 0;}\n')
        outcome = toolchains.build(u, specs["c"], tmp_path)
        assert outcome.success
        assert outcome.artifact == tmp_path / "hello"
        assert outcome.artifact.exists()

    def test_broken_source_yields_compiler_diagnostics(self, specs, tmp_path):
        u = unit("c", "broken.c", "int main(void { return 0; }\n")
        outcome = toolchains.build(u, specs["c"], tmp_path)
        assert not outcome.success
        assert outcome.artifact is None
        assert outcome.diagnostics
        assert "error" in outcome.diagnostics.lower()

    def test_artifact_names_are_reproducible(self, specs, tmp_path):
        u = unit("c", "prog.c", "int main(void){return 0;}\n")
        first = toolchains.build(u, specs["c"], tmp_path / "a")
        second = toolchains.build(u, specs["c"], tmp_path / "b")
        assert first.artifact.name == second.artifact.name == "prog"

    def test_artifacts_confined_to_workdir(self, specs, tmp_path):
        u = unit("c", "prog.c", "int main(void){return 0;}\n")
        workdir = tmp_path / "sandbox"
        toolchains.build(u, specs["c"], workdir)
        produced = {p.name for p in workdir.iterdir()}
        assert produced == {"prog.c", "prog"}

    def test_missing_compiler_raises(self, tmp_path):
        spec = toolchains.ToolchainSpec(
            target="c", mode="compiled",
            compile_command="definitely-not-a-compiler -o {out} {src}",
            run_command="{artifact}", probe_command="true",
            source_extension=".c",
        )
        u = unit("c", "x.c", "int main(void){return 0;}\n")
        with pytest.raises(ToolchainMissing):
            toolchains.build(u, spec, tmp_path)


class TestRun:
    def test_hello_both_targets(self, specs, tmp_path):
        py = toolchains.build(
            unit("python", "h.py", 'print("Hello, World!")\n'),
            specs["python"], tmp_path / "py")
        c = toolchains.build(
            unit("c", "h.c",
                 '#include <stdio.h>\n'
                 'int main(void){puts("Hello, World!");return 0;}\n'),
            specs["c"], tmp_path / "c")
        for outcome, spec in ((py, specs["python"]), (c, specs["c"])):
            result = toolchains.run(outcome, spec, timeout=10)
            assert result.exit_code == 0
            assert result.stdout == b"Hello, World!\n"
            assert result.wall_time >= 0

    def test_stdin_reaches_program(self, specs, tmp_path):
        outcome = toolchains.build(
            unit("python", "echo.py", "print(input())\n"),
            specs["python"], tmp_path)
        result = toolchains.run(outcome, specs["python"], stdin=b"abc\n",
                                timeout=10)
        assert result.stdout == b"abc\n"

    def test_timeout_kills_and_reports_marker(self, specs, tmp_path):
        outcome = toolchains.build(
            unit("python", "spin.py",
                 "import sys\nprint('partial'); sys.stdout.flush()\n"
                 "while True: pass\n"),
            specs["python"], tmp_path)
        start = time.monotonic()
        with pytest.raises(TimeoutExceeded) as err:
            toolchains.run(outcome, specs["python"], timeout=1.0)
        elapsed = time.monotonic() - start
        assert 0.9 <= elapsed < 5
        partial = err.value.partial
        assert partial.timed_out
        assert partial.exit_code == toolchains.TIMEOUT_EXIT_CODE
        assert b"partial" in partial.stdout

    def test_output_capped(self, specs, tmp_path):
        outcome = toolchains.build(
            unit("python", "big.py", "print('x' * 100)\n"),
            specs["python"], tmp_path)
        result = toolchains.run(outcome, specs["python"], timeout=10,
                                output_cap=10)
        assert len(result.stdout) == 10

    def test_spawn_failure(self, tmp_path):
        spec = toolchains.ToolchainSpec(
            target="ghost", mode="interpreted",
            run_command="definitely-not-a-tool {src}",
            probe_command="true", source_extension=".g",
        )
        outcome = toolchains.BuildOutcome(
            target="ghost", success=True, exit_code=0,
            artifact=tmp_path / "x.g",
        )
        (tmp_path / "x.g").write_text("")
        with pytest.raises(SpawnFailure):
            toolchains.run(outcome, spec, timeout=5)

    def test_placeholders_substituted_literally_without_shell(self, specs,
                                                              tmp_path):
        # a $ in the source path must not be shell-expanded
        workdir = tmp_path / "has$dollar"
        outcome = toolchains.build(
            unit("python", "p.py", "print('ok')\n"), specs["python"], workdir)
        result = toolchains.run(outcome, specs["python"], timeout=10)
        assert result.stdout == b"ok\n"
        assert "$" in str(outcome.artifact)
