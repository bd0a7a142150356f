#!/usr/bin/env python3
"""Rebuild the bundled reference pack from its Python description.

The checked-in pack file is the artifact; this script exists so edits to
the component set stay reviewable and re-serializable in canonical form.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from stw import packs  # noqa: E402

IDENT = r"^[A-Za-z_][A-Za-z0-9_]*$"
LITERAL = "^[^\"\\\\\n]*$"  # no quotes, backslashes or newlines
EXPR = r"^[A-Za-z0-9_ ()+*/%<>=!.-]*$"


def text_field(name, *, required=True, default=None, pattern=LITERAL):
    f = {"name": name, "kind": "text", "required": required}
    if default is not None:
        f["default"] = default
    if pattern:
        f["constraint"] = {"pattern": pattern}
    return f


def leaf(label):
    return {"root": {"label": label, "kind": "leaf"}}


def block(label, socket):
    return {"root": {"label": label, "kind": "container", "socket": socket}}


def tmpl(target, section, body, *sockets):
    return {
        "target": target,
        "section": section,
        "body": body,
        "socket_slots": {s: f"<%socket {s}%>" for s in sockets},
    }


COMPONENTS = [
    {
        "component_id": "program.main",
        "display_name": "Program",
        "category_path": ["Program"],
        "page": {"fields": []},
        "step_spec": block("Program", "main"),
        "templates": [
            tmpl("python", "declarations", ""),
            tmpl("python", "body", "<%socket main%>\n", "main"),
            tmpl("c", "declarations",
                 "#include <stdio.h>\n#include <stdlib.h>\n"
                 "#include <string.h>\n\n"),
            tmpl("c", "body",
                 "int main(void) {\n"
                 "    <%socket main%>\n"
                 "    return 0;\n"
                 "}\n",
                 "main"),
        ],
    },
    {
        "component_id": "comment",
        "display_name": "Comment",
        "category_path": ["Program"],
        "page": {"fields": [text_field("text", default="")]},
        "step_spec": leaf("# <%text%>"),
        "templates": [
            tmpl("python", "body", "# <%text%>\n"),
            tmpl("c", "body", "// <%text%>\n"),
        ],
    },
    {
        "component_id": "io.print",
        "display_name": "Print message",
        "category_path": ["IO", "Output"],
        "page": {"fields": [text_field("message", default="Hello, World!")]},
        "step_spec": leaf("Print <%message%>"),
        "templates": [
            tmpl("python", "body", 'print("<%message%>")\n'),
            tmpl("c", "body", 'fputs("<%message%>\\n", stdout);\n'),
        ],
    },
    {
        "component_id": "io.print_value",
        "display_name": "Print value",
        "category_path": ["IO", "Output"],
        "page": {"fields": [text_field("expression", pattern=EXPR)]},
        "step_spec": leaf("Print value <%expression%>"),
        "templates": [
            tmpl("python", "body", "print(<%expression%>)\n"),
            tmpl("c", "body",
                 'printf("%ld\\n", (long)(<%expression%>));\n'),
        ],
    },
    {
        "component_id": "io.print_var",
        "display_name": "Print text variable",
        "category_path": ["IO", "Output"],
        "page": {"fields": [text_field("name", pattern=IDENT)]},
        "step_spec": leaf("Print variable <%name%>"),
        "templates": [
            tmpl("python", "body", "print(<%name%>)\n"),
            tmpl("c", "body", 'printf("%s\\n", <%name%>);\n'),
        ],
    },
    {
        "component_id": "io.read_text",
        "display_name": "Read text line",
        "category_path": ["IO", "Input"],
        "page": {"fields": [text_field("name", pattern=IDENT)]},
        "step_spec": leaf("Read line into <%name%>"),
        "templates": [
            tmpl("python", "body", "<%name%> = input()\n"),
            tmpl("c", "body",
                 "char <%name%>[1024] = {0};\n"
                 "if (fgets(<%name%>, 1024, stdin)) {\n"
                 "    size_t n<%step_id%> = strlen(<%name%>);\n"
                 "    if (n<%step_id%> > 0 && "
                 "<%name%>[n<%step_id%> - 1] == '\\n') {\n"
                 "        <%name%>[n<%step_id%> - 1] = 0;\n"
                 "    }\n"
                 "}\n"),
        ],
    },
    {
        "component_id": "io.read_number",
        "display_name": "Read number",
        "category_path": ["IO", "Input"],
        "page": {"fields": [text_field("name", pattern=IDENT)]},
        "step_spec": leaf("Read number into <%name%>"),
        "templates": [
            tmpl("python", "body", "<%name%> = int(input())\n"),
            tmpl("c", "body",
                 "long <%name%> = 0;\n"
                 'if (scanf("%ld", &<%name%>) != 1) {\n'
                 "    <%name%> = 0;\n"
                 "}\n"
                 "int ch<%step_id%> = 0;\n"
                 "while ((ch<%step_id%> = getchar()) != '\\n' "
                 "&& ch<%step_id%> != EOF) {\n"
                 "}\n"),
        ],
    },
    {
        "component_id": "var.assign",
        "display_name": "Set variable",
        "category_path": ["Variables"],
        "page": {"fields": [
            text_field("name", pattern=IDENT),
            text_field("value", default="0", pattern=EXPR),
            {"name": "declare", "kind": "boolean", "required": False,
             "default": True},
        ]},
        "step_spec": leaf("Set <%name%> = <%value%>"),
        "templates": [
            tmpl("python", "body", "<%name%> = <%value%>\n"),
            tmpl("c", "body",
                 "<%if declare%>long <%end%><%name%> = <%value%>;\n"),
        ],
    },
    {
        "component_id": "flow.if",
        "display_name": "If / else",
        "category_path": ["Control"],
        "page": {"fields": [text_field("condition", pattern=EXPR)]},
        "step_spec": {"root": {
            "label": "If <%condition%>", "kind": "container",
            "children": [
                {"label": "Then", "kind": "container", "socket": "then"},
                {"label": "Else", "kind": "container", "socket": "else"},
            ],
        }},
        "templates": [
            tmpl("python", "body",
                 "if <%condition%>:\n"
                 "    <%socket then%>\n"
                 "else:\n"
                 "    <%socket else%>\n",
                 "then", "else"),
            tmpl("c", "body",
                 "if (<%condition%>) {\n"
                 "    <%socket then%>\n"
                 "} else {\n"
                 "    <%socket else%>\n"
                 "}\n",
                 "then", "else"),
        ],
    },
    {
        "component_id": "flow.while",
        "display_name": "While loop",
        "category_path": ["Control"],
        "page": {"fields": [text_field("condition", pattern=EXPR)]},
        "step_spec": block("While <%condition%>", "body"),
        "templates": [
            tmpl("python", "body",
                 "while <%condition%>:\n    <%socket body%>\n", "body"),
            tmpl("c", "body",
                 "while (<%condition%>) {\n    <%socket body%>\n}\n", "body"),
        ],
    },
    {
        "component_id": "flow.for_count",
        "display_name": "For counter",
        "category_path": ["Control"],
        "page": {"fields": [
            text_field("var", pattern=IDENT),
            text_field("start", required=False, default="0", pattern=EXPR),
            text_field("stop", pattern=EXPR),
        ]},
        "step_spec": block("For <%var%> from <%start%> to <%stop%>", "body"),
        "templates": [
            tmpl("python", "body",
                 "for <%var%> in range(<%start%>, <%stop%>):\n"
                 "    <%socket body%>\n",
                 "body"),
            tmpl("c", "body",
                 "for (long <%var%> = <%start%>; <%var%> < <%stop%>; "
                 "<%var%>++) {\n"
                 "    <%socket body%>\n"
                 "}\n",
                 "body"),
        ],
    },
    {
        "component_id": "flow.repeat",
        "display_name": "Repeat N times",
        "category_path": ["Control"],
        "page": {"fields": [
            {"name": "count", "kind": "integer", "required": True,
             "default": 1, "constraint": {"min": 1, "max": 100}},
        ]},
        "step_spec": block("Repeat <%count%> times", "body"),
        "templates": [
            tmpl("python", "body",
                 "for _ in range(<%count%>):\n    <%socket body%>\n", "body"),
            tmpl("c", "body",
                 "for (long r<%step_id%> = 0; r<%step_id%> < <%count%>; "
                 "r<%step_id%>++) {\n"
                 "    <%socket body%>\n"
                 "}\n",
                 "body"),
        ],
    },
    {
        "component_id": "func.define",
        "display_name": "Define function",
        "category_path": ["Functions"],
        "page": {"fields": [text_field("name", pattern=IDENT)]},
        "step_spec": block("Function <%name%>", "body"),
        "templates": [
            tmpl("python", "declarations",
                 "def <%name%>():\n    <%socket body%>\n\n", "body"),
            tmpl("c", "declarations",
                 "void <%name%>(void) {\n    <%socket body%>\n}\n\n", "body"),
        ],
    },
    {
        "component_id": "func.call",
        "display_name": "Call function",
        "category_path": ["Functions"],
        "page": {"fields": [text_field("name", pattern=IDENT)]},
        "step_spec": leaf("Call <%name%>"),
        "templates": [
            tmpl("python", "body", "<%name%>()\n"),
            tmpl("c", "body", "<%name%>();\n"),
        ],
    },
    {
        "component_id": "form.window",
        "display_name": "Form window",
        "category_path": ["Forms"],
        "page": {"fields": [
            text_field("title", default="Window"),
            {"name": "menu", "kind": "list-of-text", "required": False,
             "default": [], "constraint": {"pattern": LITERAL}},
        ]},
        "step_spec": block("Window <%title%>", "content"),
        "templates": [
            tmpl("python", "body",
                 'print("=== <%title%> ===")\n'
                 '<%for item in menu%>print("* <%item%>")\n<%end%>'
                 "if True:\n"
                 "    <%socket content%>\n"
                 'print("=== end <%title%> ===")\n',
                 "content"),
            tmpl("c", "body",
                 'fputs("=== <%title%> ===\\n", stdout);\n'
                 '<%for item in menu%>fputs("* <%item%>\\n", stdout);\n'
                 "<%end%>{\n"
                 "    <%socket content%>\n"
                 "}\n"
                 'fputs("=== end <%title%> ===\\n", stdout);\n',
                 "content"),
        ],
    },
    {
        "component_id": "form.label",
        "display_name": "Form label",
        "category_path": ["Forms"],
        "page": {"fields": [
            text_field("text", default=""),
            {"name": "style", "kind": "enum", "required": False,
             "default": "label",
             "constraint": {"choices": ["label", "heading"]}},
        ]},
        "step_spec": leaf("Label <%text%>"),
        "templates": [
            tmpl("python", "body", 'print("[<%style%>] <%text%>")\n'),
            tmpl("c", "body",
                 'fputs("[<%style%>] <%text%>\\n", stdout);\n'),
        ],
    },
    {
        "component_id": "form.button",
        "display_name": "Form button",
        "category_path": ["Forms"],
        "page": {"fields": [text_field("caption", default="OK")]},
        "step_spec": leaf("Button <%caption%>"),
        "templates": [
            tmpl("python", "body", 'print("[button] <%caption%>")\n'),
            tmpl("c", "body", 'fputs("[button] <%caption%>\\n", stdout);\n'),
        ],
    },
    {
        "component_id": "form.textbox",
        "display_name": "Form textbox",
        "category_path": ["Forms"],
        "page": {"fields": [
            text_field("name", pattern=IDENT),
            text_field("placeholder", required=False, default=""),
        ]},
        "step_spec": leaf("Textbox <%name%>"),
        "templates": [
            tmpl("python", "body",
                 'print("[textbox <%name%>] <%placeholder%>")\n'),
            tmpl("c", "body",
                 'fputs("[textbox <%name%>] <%placeholder%>\\n", stdout);\n'),
        ],
    },
]

DOC = {
    "format": 1,
    "pack_id": "reference",
    "version": "1.0.0",
    "root_component": "program.main",
    "sections": ["declarations", "body"],
    "targets": [
        {
            "id": "c",
            "display_name": "C",
            "source_extension": ".c",
            "indent_unit": "    ",
            "empty_socket_fill": "",
        },
        {
            "id": "python",
            "display_name": "Python",
            "source_extension": ".py",
            "indent_unit": "    ",
            "empty_socket_fill": "pass",
        },
    ],
    "categories": [
        {"name": "Program"},
        {"name": "IO", "children": [{"name": "Output"}, {"name": "Input"}]},
        {"name": "Variables"},
        {"name": "Control"},
        {"name": "Functions"},
        {"name": "Forms"},
    ],
    "components": COMPONENTS,
}


def main():
    import json

    raw = json.dumps(DOC).encode("utf-8")
    pack = packs.load_pack(raw)  # raises if the description is invalid
    out = pathlib.Path(__file__).resolve().parents[1] / "src" / "stw" / "data"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "reference.pack.json"
    path.write_bytes(packs.serialize_pack(pack))
    reloaded = packs.load_pack(path.read_bytes())
    assert reloaded == pack, "pack round-trip mismatch"
    print(f"wrote {path} ({len(pack.components)} components)")


if __name__ == "__main__":
    main()
