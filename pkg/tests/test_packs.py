import json

import pytest

from stw import packs
from stw.errors import (
    DuplicateComponentId,
    MalformedPack,
    NoTemplateForTarget,
    PackError,
    UnboundMaskVariable,
    UnknownCategory,
)

from conftest import DATA_DIR, PACK_PATH

BROKEN_DIR = DATA_DIR / "broken_packs"


def minimal_pack_doc(**overrides):
    doc = {
        "format": 1,
        "pack_id": "mini",
        "version": "0.1.0",
        "root_component": "root",
        "sections": ["declarations", "body"],
        "targets": [
            {"id": "py", "display_name": "Py", "source_extension": ".py",
             "indent_unit": "  ", "empty_socket_fill": "pass"},
        ],
        "categories": [{"name": "Misc"}],
        "components": [
            {
                "component_id": "root",
                "display_name": "Root",
                "category_path": ["Misc"],
                "page": {"fields": []},
                "step_spec": {"root": {"label": "Program",
                                       "kind": "container",
                                       "socket": "main"}},
                "templates": [
                    {"target": "py", "section": "body",
                     "body": "<%socket main%>\n",
                     "socket_slots": {"main": "<%socket main%>"}},
                ],
            },
        ],
    }
    doc.update(overrides)
    return doc


def load_doc(doc):
    return packs.load_pack(json.dumps(doc).encode())


class TestLoad:
    def test_reference_pack_loads(self, reference_pack):
        assert reference_pack.pack_id == "reference"
        assert len(reference_pack.components) == 18
        assert set(reference_pack.target_ids()) == {"python", "c"}

    def test_pack_with_only_root_component(self):
        pack = load_doc(minimal_pack_doc())
        assert len(pack.components) == 1

    def test_component_with_zero_fields_loads(self):
        # the empty-components case: nothing beyond the root scaffold
        pack = load_doc(minimal_pack_doc())
        assert pack.component("root").page.fields == ()

    def test_declared_variable_loads(self):
        doc = minimal_pack_doc()
        doc["components"].append({
            "component_id": "print",
            "display_name": "Print",
            "category_path": ["Misc"],
            "page": {"fields": [{"name": "message", "kind": "text",
                                 "required": True, "default": "hi"}]},
            "step_spec": {"root": {"label": "Print", "kind": "leaf"}},
            "templates": [{"target": "py", "section": "body",
                           "body": "print(<%message%>)\n",
                           "socket_slots": {}}],
        })
        assert load_doc(doc).component("print") is not None

    def test_undeclared_variable_rejected_by_name(self):
        doc = minimal_pack_doc()
        doc["components"].append({
            "component_id": "print",
            "display_name": "Print",
            "category_path": ["Misc"],
            "page": {"fields": [{"name": "message", "kind": "text",
                                 "required": True, "default": "hi"}]},
            "step_spec": {"root": {"label": "Print", "kind": "leaf"}},
            "templates": [{"target": "py", "section": "body",
                           "body": "print(<%msg%>)\n", "socket_slots": {}}],
        })
        with pytest.raises(UnboundMaskVariable) as err:
            load_doc(doc)
        assert "msg" in str(err.value)

    def test_not_json_rejected(self):
        with pytest.raises(MalformedPack):
            packs.load_pack(b"{ nope")

    def test_not_utf8_rejected(self):
        with pytest.raises(MalformedPack):
            packs.load_pack(b"\xff\xfe{}")

    def test_wrong_format_rejected(self):
        with pytest.raises(MalformedPack):
            load_doc(minimal_pack_doc(format=2))

    def test_bad_semver_rejected(self):
        with pytest.raises(MalformedPack):
            load_doc(minimal_pack_doc(version="1.0"))


class TestRoundTrip:
    def test_serialize_then_load_is_identity(self, reference_pack):
        data = packs.serialize_pack(reference_pack)
        assert packs.load_pack(data) == reference_pack

    def test_serialization_is_stable(self, reference_pack):
        once = packs.serialize_pack(reference_pack)
        again = packs.serialize_pack(packs.load_pack(once))
        assert once == again

    def test_checked_in_file_is_canonical(self, reference_pack):
        assert packs.serialize_pack(reference_pack) == PACK_PATH.read_bytes()


class TestValidate:
    def test_reference_pack_is_clean(self, reference_pack):
        assert packs.validate_pack(reference_pack) == []

    def test_validate_is_pure(self, reference_pack):
        first = packs.validate_pack(reference_pack)
        second = packs.validate_pack(reference_pack)
        assert first == second

    @pytest.mark.parametrize("filename", sorted(
        p.name for p in BROKEN_DIR.glob("*.pack.json")
    ))
    def test_broken_pack_triggers_its_finding(self, filename,
                                              broken_pack_index):
        expected = broken_pack_index[filename]
        raw = (BROKEN_DIR / filename).read_bytes()
        if expected == "malformed_pack":
            with pytest.raises(MalformedPack):
                packs.parse_pack(raw)
            return
        findings = packs.validate_pack(packs.parse_pack(raw))
        assert expected in {f.code for f in findings}

    def test_load_raises_typed_errors_for_named_findings(self,
                                                         broken_pack_index):
        expectations = {
            "duplicate_component_id.pack.json": DuplicateComponentId,
            "unknown_category.pack.json": UnknownCategory,
            "unbound_variable.pack.json": UnboundMaskVariable,
        }
        for filename, exc_class in expectations.items():
            with pytest.raises(exc_class):
                packs.load_pack((BROKEN_DIR / filename).read_bytes())

    def test_missing_slot_is_a_finding(self):
        raw = (BROKEN_DIR / "missing_socket_slot.pack.json").read_bytes()
        findings = packs.validate_pack(packs.parse_pack(raw))
        assert any(
            f.code == "missing_socket_slot" and f.component_id == "block"
            for f in findings
        )


class TestBrowse:
    def test_empty_registry_empty_result(self):
        assert packs.Registry().browse() == []

    def test_query_print_matches_reference_contents(self, registry,
                                                    reference_pack):
        rows = registry.browse(query="print")
        expected = sorted(
            (c.category_path, c.display_name, c.component_id)
            for c in reference_pack.components
            if "print" in c.display_name.lower()
        )
        assert [(r.category_path, r.display_name, r.component_id)
                for r in rows] == expected
        assert {r.component_id for r in rows} == {
            "io.print", "io.print_value", "io.print_var",
        }

    def test_category_filter_selects_form_family(self, registry):
        rows = registry.browse(category_path=["Forms"])
        assert {r.component_id for r in rows} == {
            "form.window", "form.label", "form.button", "form.textbox",
        }

    def test_category_filter_matches_subtree(self, registry):
        rows = registry.browse(category_path=["IO"])
        assert {r.component_id for r in rows} == {
            "io.print", "io.print_value", "io.print_var",
            "io.read_text", "io.read_number",
        }

    def test_filters_are_conjunctive(self, registry):
        rows = registry.browse(category_path=["IO"], query="read")
        assert {r.component_id for r in rows} == {
            "io.read_text", "io.read_number",
        }

    def test_sorted_by_category_then_name(self, registry):
        rows = registry.browse()
        keys = [(r.category_path, r.display_name) for r in rows]
        assert keys == sorted(keys)

    def test_unknown_category_rejected(self, registry):
        with pytest.raises(UnknownCategory):
            registry.browse(category_path=["Nowhere"])

    def test_query_is_case_insensitive(self, registry):
        assert registry.browse(query="PRINT") == registry.browse(query="print")


class TestResolve:
    def test_direct_lookup(self, registry):
        component = registry.component("io.print")
        template = packs.resolve_template(component, "python", "body")
        assert template.body == 'print("<%message%>")\n'

    def test_unsupported_target_rejected(self, registry):
        component = registry.component("io.print")
        with pytest.raises(NoTemplateForTarget):
            packs.resolve_template(component, "zz", "body")

    def test_every_component_resolves_for_both_targets(self, reference_pack):
        for component in reference_pack.components:
            for target in ("python", "c"):
                for section in component.sections():
                    template = packs.resolve_template(component, target,
                                                      section)
                    assert template.target == target
                    assert template.section == section


class TestRegistry:
    def test_duplicate_pack_id_rejected(self, reference_pack):
        registry = packs.Registry([reference_pack])
        with pytest.raises(PackError):
            registry.add_pack(reference_pack)

    def test_component_id_collision_across_packs_rejected(self,
                                                          reference_pack):
        doc = minimal_pack_doc(pack_id="other")
        doc["components"][0]["component_id"] = "io.print"
        doc["root_component"] = "io.print"
        other = load_doc(doc)
        registry = packs.Registry([reference_pack])
        with pytest.raises(DuplicateComponentId):
            registry.add_pack(other)

    def test_conflicting_target_decl_rejected(self, reference_pack):
        doc = minimal_pack_doc(pack_id="other")
        doc["targets"][0]["id"] = "python"  # different indent unit etc.
        with pytest.raises(PackError):
            packs.Registry([reference_pack, load_doc(doc)])

    def test_target_ids_union(self, registry):
        assert registry.target_ids() == {"python", "c"}
