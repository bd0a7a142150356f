import json
from pathlib import Path

import pytest

from stw import packs, toolchains
from stw import tree as steps

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"
PACK_PATH = Path(packs.__file__).parent / "data" / "reference.pack.json"
SESSIONS_DIR = Path(packs.__file__).parent / "data" / "sessions"


@pytest.fixture(scope="session")
def reference_pack():
    return packs.load_pack(PACK_PATH.read_bytes())


@pytest.fixture(scope="session")
def registry(reference_pack):
    return packs.Registry([reference_pack])


@pytest.fixture(scope="session")
def toolchain_specs():
    return toolchains.load_toolchains()


@pytest.fixture(scope="session")
def reference_programs():
    """Frozen stdin/stdout/step-count goldens for the bundled sessions."""
    return json.loads((DATA_DIR / "reference_programs.json").read_text())


@pytest.fixture(scope="session")
def broken_pack_index():
    return json.loads(
        (DATA_DIR / "broken_packs" / "index.json").read_text()
    )


def session_path(name: str) -> Path:
    return SESSIONS_DIR / f"{name}.session.json"


@pytest.fixture
def project(registry):
    return steps.create_project("demo", ["python", "c"], registry)


@pytest.fixture
def goal(project):
    gid = steps.create_goal(project, "Main")
    return project.goal(gid)


class Workbench:
    """Small helper that applies raw bindings like the service would."""

    def __init__(self, project, registry):
        self.project = project
        self.registry = registry

    def apply(self, goal_id, anchor, component_id, raw):
        component = self.registry.component(component_id)
        bindings = steps.validate_bindings(component.page, raw)
        return steps.apply_interaction(
            self.project, goal_id, anchor, component, bindings
        )


@pytest.fixture
def bench(project, registry):
    return Workbench(project, registry)
