import pytest
from hypothesis import given
from hypothesis import strategies as st

from stw.errors import MalformedConstruct, UnboundVariable
from stw.masks import (
    expand_template,
    marker_text,
    referenced_names,
    socket_markers,
)


def expand(body, bindings=None, builtins=None, **kw):
    return expand_template(body, bindings or {}, builtins or {}, **kw)


class TestSubstitution:
    def test_identity_without_masks(self):
        assert expand("x = 1") == "x = 1"

    def test_single_substitution(self):
        assert expand('print(<%message%>)', {"message": '"Hi"'}) == 'print("Hi")'

    def test_integer_renders_decimal(self):
        assert expand("n = <%n%>", {"n": 42}) == "n = 42"

    def test_boolean_renders_lowercase(self):
        assert expand("<%a%> <%b%>", {"a": True, "b": False}) == "true false"

    def test_list_joins_with_comma(self):
        assert expand("f(<%args%>)", {"args": ["a", "b"]}) == "f(a, b)"

    def test_whitespace_inside_tag_tolerated(self):
        assert expand("<% name %>", {"name": "v"}) == "v"

    def test_unbound_variable_is_named(self):
        with pytest.raises(UnboundVariable) as err:
            expand("print(<%msg%>)", {"message": "x"})
        assert "msg" in str(err.value)

    def test_builtins_available(self):
        out = expand("<%step_id%>/<%goal_name%>",
                     builtins={"step_id": "s1n0", "goal_name": "Main",
                               "indent": "    "})
        assert out == "s1n0/Main"

    def test_bindings_shadow_builtins(self):
        out = expand("<%goal_name%>", {"goal_name": "mine"},
                     builtins={"goal_name": "theirs"})
        assert out == "mine"


class TestEscape:
    def test_escape_emits_literal_open(self):
        assert expand("a <%% b") == "a <% b"

    def test_escape_adjacent_to_tag(self):
        assert expand("<%%<%x%>", {"x": "1"}) == "<%1"


class TestConditional:
    def test_if_true_takes_then(self):
        assert expand("<%if flag%>yes<%else%>no<%end%>", {"flag": True}) == "yes"

    def test_if_false_takes_else(self):
        assert expand("<%if flag%>yes<%else%>no<%end%>", {"flag": False}) == "no"

    def test_if_without_else(self):
        assert expand("<%if flag%>long <%end%>x", {"flag": False}) == "x"

    def test_nested_if(self):
        body = "<%if a%><%if b%>ab<%end%><%end%>"
        assert expand(body, {"a": True, "b": True}) == "ab"

    def test_if_on_non_boolean_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%if n%>x<%end%>", {"n": 3})

    def test_unbalanced_if_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%if flag%>x", {"flag": True})

    def test_stray_else_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%else%>")

    def test_stray_end_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%end%>")

    def test_double_else_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%if f%>a<%else%>b<%else%>c<%end%>", {"f": True})


class TestRepetition:
    def test_for_over_list(self):
        # hand-derived from a single pass over the construct grammar
        body = "<%for n in names%>- <%n%>\n<%end%>"
        assert expand(body, {"names": ["a", "b"]}) == "- a\n- b\n"

    def test_for_over_empty_list(self):
        assert expand("<%for n in names%>- <%n%>\n<%end%>", {"names": []}) == ""

    def test_loop_variable_shadows(self):
        out = expand("<%for x in xs%><%x%><%end%><%x%>",
                     {"xs": ["1"], "x": "outer"})
        assert out == "1outer"

    def test_nested_for(self):
        body = "<%for a in xs%><%for b in ys%><%a%><%b%> <%end%><%end%>"
        out = expand(body, {"xs": ["1", "2"], "ys": ["a", "b"]})
        assert out == "1a 1b 2a 2b "

    def test_for_on_non_list_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%for x in n%><%end%>", {"n": 5})

    def test_malformed_for_rejected(self):
        with pytest.raises(MalformedConstruct):
            expand("<%for x of xs%><%end%>", {"xs": []})


class TestSockets:
    def test_socket_passes_through(self):
        assert expand("a\n<%socket body%>\nb") == "a\n<%socket body%>\nb"

    def test_socket_forbidden_where_disallowed(self):
        with pytest.raises(MalformedConstruct):
            expand("<%socket body%>", allow_sockets=False)

    def test_marker_text(self):
        assert marker_text("then") == "<%socket then%>"


class TestIntrospection:
    def test_referenced_names_sees_all_reads(self):
        body = "<%a%><%if f%><%b%><%end%><%for x in xs%><%x%><%c%><%end%>"
        assert referenced_names(body) == {"a", "f", "b", "xs", "c"}

    def test_loop_variable_not_a_read(self):
        assert "x" not in referenced_names("<%for x in xs%><%x%><%end%>")

    def test_socket_markers_in_order(self):
        body = "<%socket then%>mid<%socket else%>"
        assert socket_markers(body) == ["then", "else"]

    def test_unterminated_tag_rejected(self):
        with pytest.raises(MalformedConstruct):
            referenced_names("a <%oops")

    def test_blank_tag_rejected(self):
        # note <%%> is the escape plus a literal '>', not an empty tag
        with pytest.raises(MalformedConstruct):
            referenced_names("<% %>")


plain_text = st.text(
    alphabet=st.characters(blacklist_characters="<%"), max_size=80
)


@given(plain_text)
def test_plain_text_expands_to_itself(text):
    assert expand(text) == text


@given(plain_text, plain_text)
def test_substitution_is_literal(prefix, value):
    assert expand(prefix + "<%v%>", {"v": value}) == prefix + value


@given(st.lists(st.text(alphabet="abc xyz", max_size=8), max_size=6))
def test_for_expands_once_per_item(items):
    out = expand("<%for i in xs%>[<%i%>]<%end%>", {"xs": items})
    assert out == "".join(f"[{i}]" for i in items)
