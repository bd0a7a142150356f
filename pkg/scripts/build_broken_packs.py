#!/usr/bin/env python3
"""Rebuild the deliberately-broken pack corpus used by validation tests.

Each file mutates one thing in a minimal valid pack and is named after
the finding it must trigger; index.json maps filename to expected code.
"""

import copy
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from stw import packs  # noqa: E402

BASE = {
    "format": 1,
    "pack_id": "broken",
    "version": "0.0.1",
    "root_component": "root",
    "sections": ["declarations", "body"],
    "targets": [
        {"id": "py", "display_name": "Py", "source_extension": ".py",
         "indent_unit": "    ", "empty_socket_fill": "pass"},
    ],
    "categories": [{"name": "Misc"}],
    "components": [
        {
            "component_id": "root",
            "display_name": "Root",
            "category_path": ["Misc"],
            "page": {"fields": []},
            "step_spec": {"root": {"label": "Program", "kind": "container",
                                   "socket": "main"}},
            "templates": [
                {"target": "py", "section": "body",
                 "body": "<%socket main%>\n",
                 "socket_slots": {"main": "<%socket main%>"}},
            ],
        },
        {
            "component_id": "print",
            "display_name": "Print",
            "category_path": ["Misc"],
            "page": {"fields": [
                {"name": "message", "kind": "text", "required": True,
                 "default": "hi"},
            ]},
            "step_spec": {"root": {"label": "Print <%message%>",
                                   "kind": "leaf"}},
            "templates": [
                {"target": "py", "section": "body",
                 "body": "print(\"<%message%>\")\n", "socket_slots": {}},
            ],
        },
        {
            "component_id": "block",
            "display_name": "Block",
            "category_path": ["Misc"],
            "page": {"fields": []},
            "step_spec": {"root": {"label": "Block", "kind": "container",
                                   "socket": "body"}},
            "templates": [
                {"target": "py", "section": "body",
                 "body": "if True:\n    <%socket body%>\n",
                 "socket_slots": {"body": "<%socket body%>"}},
            ],
        },
    ],
}


def mutate(fn):
    doc = copy.deepcopy(BASE)
    fn(doc)
    return doc


def unbound_variable(doc):
    # template reads <%msg%> but the page declares only 'message'
    doc["components"][1]["templates"][0]["body"] = 'print("<%msg%>")\n'


def duplicate_socket(doc):
    doc["components"][2]["step_spec"] = {"root": {
        "label": "Block", "kind": "container",
        "children": [
            {"label": "A", "kind": "container", "socket": "body"},
            {"label": "B", "kind": "container", "socket": "body"},
        ],
    }}
    doc["components"][2]["templates"][0] = {
        "target": "py", "section": "body",
        "body": "if True:\n    <%socket body%>\n",
        "socket_slots": {"body": "<%socket body%>"},
    }


def missing_socket_slot(doc):
    doc["components"][2]["templates"][0] = {
        "target": "py", "section": "body",
        "body": "if True:\n    pass\n", "socket_slots": {},
    }


def duplicate_component_id(doc):
    clone = copy.deepcopy(doc["components"][1])
    doc["components"].append(clone)


def unknown_category(doc):
    doc["components"][1]["category_path"] = ["Nowhere", "AtAll"]


def bad_default(doc):
    doc["components"][1]["page"]["fields"].append(
        {"name": "count", "kind": "integer", "required": False,
         "default": 500, "constraint": {"min": 1, "max": 100}}
    )


def empty_enum(doc):
    doc["components"][1]["page"]["fields"].append(
        {"name": "style", "kind": "enum", "required": False,
         "constraint": {"choices": []}}
    )


def unsatisfiable_constraint(doc):
    doc["components"][1]["page"]["fields"].append(
        {"name": "count", "kind": "integer", "required": False,
         "constraint": {"min": 10, "max": 1}}
    )


def socket_in_label(doc):
    doc["components"][1]["step_spec"]["root"]["label"] = \
        "Print <%socket body%>"


def unknown_target_ref(doc):
    doc["components"][1]["templates"].append(
        {"target": "rb", "section": "body", "body": "puts\n",
         "socket_slots": {}}
    )


def socket_slot_mismatch(doc):
    doc["components"][2]["templates"][0]["socket_slots"] = {}


def duplicate_field(doc):
    doc["components"][1]["page"]["fields"].append(
        {"name": "message", "kind": "text", "required": False}
    )


CASES = {
    "unbound_variable": ("unbound_mask_variable", unbound_variable),
    "duplicate_socket": ("duplicate_socket", duplicate_socket),
    "missing_socket_slot": ("missing_socket_slot", missing_socket_slot),
    "duplicate_component_id": ("duplicate_component_id",
                               duplicate_component_id),
    "unknown_category": ("unknown_category", unknown_category),
    "bad_default": ("bad_default", bad_default),
    "empty_enum": ("empty_enum", empty_enum),
    "unsatisfiable_constraint": ("unsatisfiable_constraint",
                                 unsatisfiable_constraint),
    "socket_in_label": ("socket_in_label", socket_in_label),
    "unknown_target_ref": ("unknown_target_ref", unknown_target_ref),
    "socket_slot_mismatch": ("socket_slot_mismatch", socket_slot_mismatch),
    "duplicate_field": ("duplicate_field", duplicate_field),
}


def main():
    out = (pathlib.Path(__file__).resolve().parents[1]
           / "tests" / "data" / "broken_packs")
    out.mkdir(parents=True, exist_ok=True)

    # the base itself must be valid, or the corpus proves nothing
    base_findings = packs.validate_pack(packs.parse_pack(
        json.dumps(BASE).encode()))
    assert not base_findings, base_findings

    index = {}
    for name, (expected_code, fn) in CASES.items():
        doc = mutate(fn)
        raw = (json.dumps(doc, indent=2) + "\n").encode()
        findings = packs.validate_pack(packs.parse_pack(raw))
        codes = {f.code for f in findings}
        assert expected_code in codes, (name, expected_code, codes)
        (out / f"{name}.pack.json").write_bytes(raw)
        index[f"{name}.pack.json"] = expected_code

    # one syntactically broken file on top of the semantic corpus
    (out / "malformed.pack.json").write_text("{ not json", encoding="utf-8")
    index["malformed.pack.json"] = "malformed_pack"

    (out / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(index)} broken packs to {out}")


if __name__ == "__main__":
    main()
