import pytest

from stw import codegen
from stw import tree as steps
from stw.errors import NoTemplateForTarget, TargetNotInProject
from stw.masks import expand_template

# hand-derived expansions of the reference pack's root + print templates
HELLO_PY = 'print("Hello, World!")\n'
HELLO_C = """#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(void) {
    fputs("Hello, World!\\n", stdout);
    return 0;
}
"""

EMPTY_PY = "pass\n"
EMPTY_C = """#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(void) {
    return 0;
}
"""


class TestGenerateGoal:
    def test_empty_goal_is_just_the_scaffold(self, registry, goal):
        py = codegen.generate_goal(goal, registry, "python")
        c = codegen.generate_goal(goal, registry, "c")
        assert py.text == EMPTY_PY
        assert c.text == EMPTY_C

    def test_hello_python(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "io.print",
                    {"message": "Hello, World!"})
        unit = codegen.generate_goal(goal, registry, "python")
        assert unit.text == HELLO_PY
        assert unit.filename == "main.py"
        assert unit.section_map == (("body", 1, 1),)

    def test_hello_c(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "io.print",
                    {"message": "Hello, World!"})
        unit = codegen.generate_goal(goal, registry, "c")
        assert unit.text == HELLO_C
        assert unit.section_map == (("declarations", 1, 4), ("body", 5, 8))

    def test_section_map_covers_whole_text(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "func.define", {"name": "f"})
        bench.apply(goal.goal_id, "root", "io.print", {"message": "x"})
        for target in ("python", "c"):
            unit = codegen.generate_goal(goal, registry, target)
            total_lines = unit.text.count("\n")
            spans = [(a, b) for _, a, b in unit.section_map]
            assert spans[0][0] == 1
            for (_, end), (start, _) in zip(spans, spans[1:]):
                assert start == end + 1
            assert spans[-1][1] == total_lines

    def test_unsupported_target_names_component(self, registry, goal, bench,
                                                reference_pack):
        bench.apply(goal.goal_id, "root", "io.print", {"message": "x"})
        with pytest.raises(NoTemplateForTarget):
            codegen.generate_goal(goal, registry, "harbour")

    def test_no_residual_markers(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "flow.if", {"condition": "1 > 0"})
        for target in ("python", "c"):
            text = codegen.generate_goal(goal, registry, target).text
            assert "<%" not in text

    def test_declarations_hoist_above_body(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "io.print", {"message": "first"})
        bench.apply(goal.goal_id, "root", "func.define", {"name": "late"})
        unit = codegen.generate_goal(goal, registry, "python")
        assert unit.text.index("def late") < unit.text.index('print("first")')

    def test_nested_function_still_hoists(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "flow.if", {"condition": "1 > 0"})
        then_id = steps.resolve_socket_anchor(goal, 0, "then")
        bench.apply(goal.goal_id, then_id, "func.define", {"name": "inner"})
        unit = codegen.generate_goal(goal, registry, "c")
        # the definition must end up at file scope, not inside main
        assert unit.text.index("void inner(void)") \
            < unit.text.index("int main(void)")


class TestIndentation:
    def nested_goal(self, registry, goal, bench):
        bench.apply(goal.goal_id, "root", "flow.while", {"condition": "1 > 0"})
        body = steps.resolve_socket_anchor(goal, 0, "body")
        bench.apply(goal.goal_id, body, "flow.if", {"condition": "2 > 1"})
        then_id = steps.resolve_socket_anchor(goal, 1, "then")
        bench.apply(goal.goal_id, then_id, "io.print", {"message": "deep"})
        return goal

    def test_each_nesting_level_adds_one_unit(self, registry, goal, bench):
        goal = self.nested_goal(registry, goal, bench)
        unit = codegen.generate_goal(goal, registry, "python")
        indents = {
            line.strip(): len(line) - len(line.lstrip())
            for line in unit.text.splitlines()
        }
        assert indents["while 1 > 0:"] == 0
        assert indents["if 2 > 1:"] == 4
        assert indents['print("deep")'] == 8

    def test_c_indentation_tracks_depth_inside_main(self, registry, goal,
                                                    bench):
        goal = self.nested_goal(registry, goal, bench)
        unit = codegen.generate_goal(goal, registry, "c")
        indents = {
            line.strip(): len(line) - len(line.lstrip())
            for line in unit.text.splitlines()
        }
        assert indents["while (1 > 0) {"] == 4
        assert indents["if (2 > 1) {"] == 8
        assert indents['fputs("deep\\n", stdout);'] == 12


class TestGenerateProject:
    def test_two_goals_entry_is_first(self, registry, project, bench):
        steps.create_goal(project, "Main")
        steps.create_goal(project, "Util")
        manifest = codegen.generate_project(project, registry, "python")
        assert [u.filename for u in manifest.units] == ["main.py", "util.py"]
        assert manifest.entry == "main.py"
        assert manifest.project_revision == project.revision

    def test_generation_is_deterministic(self, registry, project, bench):
        gid = steps.create_goal(project, "Main")
        bench.apply(gid, "root", "io.print", {"message": "x"})
        first = codegen.generate_project(project, registry, "c")
        second = codegen.generate_project(project, registry, "c")
        assert first == second
        assert codegen.manifest_doc(first) == codegen.manifest_doc(second)

    def test_target_not_in_project(self, registry, project):
        with pytest.raises(TargetNotInProject):
            codegen.generate_project(project, registry, "harbour")

    def test_filename_collisions_disambiguated(self, registry, project):
        steps.create_goal(project, "My Goal")
        steps.create_goal(project, "My_Goal")
        manifest = codegen.generate_project(project, registry, "python")
        names = [u.filename for u in manifest.units]
        assert len(set(names)) == 2

    def test_empty_project_has_no_entry(self, registry, project):
        manifest = codegen.generate_project(project, registry, "python")
        assert manifest.units == ()
        assert manifest.entry is None


class TestExpandReexport:
    def test_same_function_as_masks(self):
        assert codegen.expand_template is expand_template
