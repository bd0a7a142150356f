import json
import random

import pytest

from stw import codegen
from stw import tree as steps
from stw.errors import (
    CorruptLedger,
    MalformedFile,
    MissingPack,
    UnsupportedFormatVersion,
)
from stw.projectfile import (
    Action,
    AnchorSelector,
    ReplayError,
    SessionScript,
    load_project,
    load_session,
    replay_session,
    save_project,
    save_session,
)

from conftest import session_path
from session_random import grow


def hello_project(registry, bench_cls=None):
    project = steps.create_project("hello", ["python", "c"], registry)
    gid = steps.create_goal(project, "Main")
    component = registry.component("io.print")
    bindings = steps.validate_bindings(component.page,
                                       {"message": "Hello, World!"})
    steps.apply_interaction(project, gid, "root", component, bindings)
    return project


class TestSaveProject:
    def test_empty_project_saves_identically_twice(self, registry, project):
        assert save_project(project, registry) == save_project(project,
                                                               registry)

    def test_bytes_change_after_interaction(self, registry):
        project = hello_project(registry)
        empty = steps.create_project("hello", ["python", "c"], registry)
        assert save_project(project, registry) != save_project(empty, registry)

    def test_save_load_save_fixpoint(self, registry):
        project = hello_project(registry)
        once = save_project(project, registry)
        again = save_project(load_project(once, registry), registry)
        assert once == again

    def test_load_is_structural_identity(self, registry):
        project = hello_project(registry)
        loaded = load_project(save_project(project, registry), registry)
        assert loaded == project

    def test_rendered_labels_are_embedded(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        root = doc["project"]["goals"][0]["root"]
        assert root["children"][0]["label"] == "Print Hello, World!"


class TestLoadProjectErrors:
    def test_unsupported_format(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["format"] = 2
        with pytest.raises(UnsupportedFormatVersion):
            load_project(json.dumps(doc).encode(), registry)

    def test_missing_pack_is_named(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["packs"] = [{"pack_id": "x", "version": "9.9.9"}]
        with pytest.raises(MissingPack) as err:
            load_project(json.dumps(doc).encode(), registry)
        assert "x@9.9.9" in str(err.value)

    def test_pack_version_mismatch(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["packs"][0]["version"] = "9.9.9"
        with pytest.raises(MissingPack):
            load_project(json.dumps(doc).encode(), registry)

    def test_tampered_label_is_corrupt(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["project"]["goals"][0]["root"]["children"][0]["label"] = "Tampered"
        with pytest.raises(CorruptLedger):
            load_project(json.dumps(doc).encode(), registry)

    def test_tampered_bindings_are_corrupt(self, registry):
        # stored tree no longer matches what the ledger renders
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        ix = doc["project"]["goals"][0]["interactions"][0]
        ix["bindings"]["message"] = "Changed"
        with pytest.raises(CorruptLedger):
            load_project(json.dumps(doc).encode(), registry)

    def test_colliding_next_ordinal_is_corrupt(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["project"]["goals"][0]["next_ordinal"] = 1
        with pytest.raises(CorruptLedger):
            load_project(json.dumps(doc).encode(), registry)

    def test_bad_sequence_is_corrupt(self, registry):
        data = save_project(hello_project(registry), registry)
        doc = json.loads(data)
        doc["project"]["goals"][0]["interactions"][0]["sequence"] = 5
        with pytest.raises(CorruptLedger):
            load_project(json.dumps(doc).encode(), registry)

    def test_garbage_rejected(self, registry):
        with pytest.raises(MalformedFile):
            load_project(b"not json", registry)


class TestSessionScripts:
    def test_round_trip(self):
        script = SessionScript(
            project_name="p", targets=("python",),
            actions=(
                Action(kind="create_goal", goal="Main", name="Main"),
                Action(kind="apply", goal="Main", anchor=AnchorSelector(),
                       component="io.print", bindings={"message": "x"}),
                Action(kind="edit", goal="Main", interaction=0,
                       bindings={"message": "y"}),
                Action(kind="delete", goal="Main", interaction=0,
                       cascade=True),
            ),
        )
        assert load_session(save_session(script)) == script

    def test_empty_script_replays_to_empty_project(self, registry):
        script = SessionScript(project_name="p", targets=("python",),
                               actions=())
        project = replay_session(script, registry)
        assert project.goals == []
        assert project.revision == 0

    def test_bundled_hello_matches_generation_golden(self, registry):
        script = load_session(session_path("hello").read_bytes())
        project = replay_session(script, registry)
        unit = codegen.generate_goal(project.goals[0], registry, "python")
        assert unit.text == 'print("Hello, World!")\n'

    def test_replay_is_deterministic(self, registry):
        script = load_session(session_path("fizz_like").read_bytes())
        a = save_project(replay_session(script, registry), registry)
        b = save_project(replay_session(script, registry), registry)
        assert a == b
        ma = codegen.generate_project(replay_session(script, registry),
                                      registry, "c")
        mb = codegen.generate_project(replay_session(script, registry),
                                      registry, "c")
        assert ma == mb

    def test_error_carries_action_index(self, registry):
        script = SessionScript(
            project_name="p", targets=("python",),
            actions=(
                Action(kind="create_goal", goal="Main", name="Main"),
                Action(kind="apply", goal="Main", anchor=AnchorSelector(),
                       component="io.print", bindings={"message": "x"}),
                Action(kind="apply", goal="Main", anchor=AnchorSelector(),
                       component="io.print", bindings={"message": "y"}),
                Action(kind="apply", goal="Main",
                       anchor=AnchorSelector(owner=0, socket="nope"),
                       component="io.print", bindings={"message": "z"}),
            ),
        )
        with pytest.raises(ReplayError) as err:
            replay_session(script, registry)
        assert err.value.index == 3
        assert err.value.cause.code == "anchor_not_found"

    def test_unknown_action_rejected(self):
        doc = {"format": 1, "project": {"name": "p", "targets": ["python"]},
               "actions": [{"action": "teleport"}]}
        with pytest.raises(MalformedFile):
            load_session(json.dumps(doc).encode())

    def test_session_format_checked(self):
        doc = {"format": 3, "project": {"name": "p", "targets": []},
               "actions": []}
        with pytest.raises(UnsupportedFormatVersion):
            load_session(json.dumps(doc).encode())

    def test_all_bundled_sessions_load(self, reference_programs):
        for name in reference_programs:
            script = load_session(session_path(name).read_bytes())
            assert script.project_name == name


class TestRandomizedRoundTrip:
    @pytest.mark.parametrize("seed", range(10))
    def test_recorded_script_rebuilds_same_outline(self, registry, seed):
        rec = grow(registry, random.Random(seed), n_actions=12)
        replayed = replay_session(rec.script(), registry)
        assert len(replayed.goals) == len(rec.project.goals)
        for mine, theirs in zip(rec.project.goals, replayed.goals):
            assert steps.steps_outline(mine) == steps.steps_outline(theirs)

    @pytest.mark.parametrize("seed", range(10))
    def test_save_load_round_trip_random(self, registry, seed):
        rec = grow(registry, random.Random(seed + 50), n_actions=12)
        data = save_project(rec.project, registry)
        assert load_project(data, registry) == rec.project
        assert save_project(load_project(data, registry), registry) == data
