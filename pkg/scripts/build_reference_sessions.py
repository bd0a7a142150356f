#!/usr/bin/env python3
"""Rebuild the bundled reference session scripts in canonical form."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from stw.projectfile import Action, AnchorSelector, SessionScript, save_session  # noqa: E402

ROOT = AnchorSelector()


def goal(name):
    return Action(kind="create_goal", goal=name, name=name)


def apply(component, bindings, owner=None, socket=None, goal="Main"):
    anchor = ROOT if owner is None else AnchorSelector(owner=owner, socket=socket)
    return Action(kind="apply", goal=goal, anchor=anchor,
                  component=component, bindings=bindings)


def edit(interaction, bindings, goal="Main"):
    return Action(kind="edit", goal=goal, interaction=interaction,
                  bindings=bindings)


def delete(interaction, cascade=False, goal="Main"):
    return Action(kind="delete", goal=goal, interaction=interaction,
                  cascade=cascade)


SESSIONS = {
    "hello": [
        goal("Main"),
        apply("io.print", {"message": "Hello, World!"}),
    ],
    "echo_input": [
        goal("Main"),
        apply("io.read_text", {"name": "line"}),
        apply("io.print_var", {"name": "line"}),
    ],
    "fizz_like": [
        goal("Main"),
        apply("flow.for_count", {"var": "i", "start": "1", "stop": "16"}),
        apply("flow.if", {"condition": "i % 15 == 0"}, owner=0, socket="body"),
        apply("io.print", {"message": "FizzBuzz"}, owner=1, socket="then"),
        apply("flow.if", {"condition": "i % 3 == 0"}, owner=1, socket="else"),
        apply("io.print", {"message": "Fizz"}, owner=3, socket="then"),
        apply("flow.if", {"condition": "i % 5 == 0"}, owner=3, socket="else"),
        apply("io.print", {"message": "Buzz"}, owner=5, socket="then"),
        apply("io.print_value", {"expression": "i"}, owner=5, socket="else"),
    ],
    "sum_of_inputs": [
        goal("Main"),
        apply("io.read_number", {"name": "n"}),
        apply("var.assign", {"name": "total", "value": "0"}),
        apply("flow.for_count", {"var": "i", "start": "0", "stop": "n"}),
        apply("io.read_number", {"name": "x"}, owner=2, socket="body"),
        apply("var.assign",
              {"name": "total", "value": "total + x", "declare": False},
              owner=2, socket="body"),
        apply("io.print_value", {"expression": "total"}),
    ],
    "countdown": [
        goal("Main"),
        apply("var.assign", {"name": "n", "value": "5"}),
        apply("flow.while", {"condition": "n > 0"}),
        apply("io.print_value", {"expression": "n"}, owner=1, socket="body"),
        apply("var.assign", {"name": "n", "value": "n - 1", "declare": False},
              owner=1, socket="body"),
        apply("io.print", {"message": "Liftoff!"}),
    ],
    "func_mix": [
        goal("Main"),
        apply("func.define", {"name": "greet"}),
        apply("io.print", {"message": "Hello from function"},
              owner=0, socket="body"),
        apply("func.call", {"name": "greet"}),
        apply("func.call", {"name": "greet"}),
        apply("io.print", {"message": "done"}),
    ],
    "form_demo": [
        goal("Main"),
        apply("form.window", {"title": "Settings", "menu": ["File", "Edit"]}),
        apply("form.label", {"text": "Options", "style": "heading"},
              owner=0, socket="content"),
        apply("form.textbox", {"name": "username", "placeholder": "enter name"},
              owner=0, socket="content"),
        apply("form.button", {"caption": "OK"}, owner=0, socket="content"),
    ],
    "repeat_demo": [
        goal("Main"),
        apply("flow.repeat", {"count": 3}),
        apply("io.print", {"message": "tick"}, owner=0, socket="body"),
        apply("io.print", {"message": "done"}),
    ],
    "nested_math": [
        goal("Main"),
        apply("flow.for_count", {"var": "i", "start": "1", "stop": "4"}),
        apply("flow.for_count", {"var": "j", "start": "1", "stop": "4"},
              owner=0, socket="body"),
        apply("io.print_value", {"expression": "i * 10 + j"},
              owner=1, socket="body"),
    ],
    # exercises edit and delete actions in a replayed session
    "branching": [
        goal("Main"),
        apply("comment", {"text": "decide size"}),
        apply("io.read_number", {"name": "x"}),
        apply("flow.if", {"condition": "x > 5"}),
        apply("io.print", {"message": "big"}, owner=2, socket="then"),
        apply("io.print", {"message": "medium"}, owner=2, socket="else"),
        edit(2, {"condition": "x > 10"}),
        delete(4),
        apply("io.print", {"message": "small"}, owner=2, socket="else"),
    ],
}


def main():
    out = (pathlib.Path(__file__).resolve().parents[1]
           / "src" / "stw" / "data" / "sessions")
    out.mkdir(parents=True, exist_ok=True)
    for name, actions in SESSIONS.items():
        script = SessionScript(
            project_name=name,
            targets=("c", "python"),
            actions=tuple(actions),
        )
        (out / f"{name}.session.json").write_bytes(save_session(script))
    print(f"wrote {len(SESSIONS)} sessions to {out}")


if __name__ == "__main__":
    main()
