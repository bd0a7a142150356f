"""Mask-template engine: the text-expansion half of code generation.

Template bodies are literal text with mask constructs:

    <%name%>                       substitute a bound value
    <%if flag%>...<%else%>...<%end%>   conditional on a boolean field
    <%for x in items%>...<%end%>       repeat over a list field, binding x
    <%socket name%>                    splice point, left intact here and
                                       replaced by generated child code
    <%%                            literal ``<%``

Substituted values render as: text verbatim, integers in decimal,
booleans as ``true``/``false``, lists joined with ``", "``.

Expansion is a pure function of (body, bindings, builtins); socket
markers pass through untouched so the generator can splice child output
later.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import MalformedConstruct, UnboundVariable

OPEN = "<%"
CLOSE = "%>"
ESCAPE = "<%%"

#: names always available to templates, besides the page's fields
BUILTIN_NAMES = ("step_id", "goal_name", "indent")


@dataclass
class _Lit:
    text: str


@dataclass
class _Var:
    name: str


@dataclass
class _Socket:
    name: str


@dataclass
class _If:
    flag: str
    then: list = field(default_factory=list)
    orelse: list = field(default_factory=list)


@dataclass
class _For:
    var: str
    items: str
    body: list = field(default_factory=list)


_Node = Union[_Lit, _Var, _Socket, _If, _For]


def _tokenize(body: str):
    """Yield ('lit', text) and ('tag', content) tokens."""
    i = 0
    n = len(body)
    while i < n:
        j = body.find(OPEN, i)
        if j < 0:
            yield ("lit", body[i:])
            return
        if j > i:
            yield ("lit", body[i:j])
        if body.startswith(ESCAPE, j):
            yield ("lit", OPEN)
            i = j + len(ESCAPE)
            continue
        k = body.find(CLOSE, j + len(OPEN))
        if k < 0:
            raise MalformedConstruct(f"unterminated mask tag at offset {j}")
        yield ("tag", body[j + len(OPEN):k].strip())
        i = k + len(CLOSE)


def parse(body: str) -> list[_Node]:
    """Parse a template body into a construct tree."""
    root: list[_Node] = []
    # stack of (node list to append into, open construct or None)
    stack: list[tuple[list, _Node | None]] = [(root, None)]

    for kind, value in _tokenize(body):
        top, opener = stack[-1]
        if kind == "lit":
            top.append(_Lit(value))
            continue
        if not value:
            raise MalformedConstruct("empty mask tag <%%>")
        words = value.split()
        if words[0] == "if":
            if len(words) != 2:
                raise MalformedConstruct(f"malformed if tag: <%{value}%>")
            node = _If(words[1])
            top.append(node)
            stack.append((node.then, node))
        elif words[0] == "for":
            if len(words) != 4 or words[2] != "in":
                raise MalformedConstruct(f"malformed for tag: <%{value}%>")
            node = _For(words[1], words[3])
            top.append(node)
            stack.append((node.body, node))
        elif words[0] == "else":
            if not isinstance(opener, _If):
                raise MalformedConstruct("<%else%> outside of <%if%>")
            if stack[-1][0] is opener.orelse:
                raise MalformedConstruct("second <%else%> in one <%if%>")
            stack[-1] = (opener.orelse, opener)
        elif words[0] == "end":
            if opener is None:
                raise MalformedConstruct("<%end%> with no open construct")
            stack.pop()
        elif words[0] == "socket":
            if len(words) != 2:
                raise MalformedConstruct(f"malformed socket tag: <%{value}%>")
            top.append(_Socket(words[1]))
        else:
            if len(words) != 1:
                raise MalformedConstruct(f"malformed mask tag: <%{value}%>")
            top.append(_Var(words[0]))

    if len(stack) > 1:
        opener = stack[-1][1]
        what = "if" if isinstance(opener, _If) else "for"
        raise MalformedConstruct(f"unclosed <%{what}%> construct")
    return root


def referenced_names(body: str, *, include_loop_vars: bool = False) -> set[str]:
    """Names a template reads from its bindings (loop-locals excluded)."""
    names: set[str] = set()

    def walk(nodes, bound: frozenset[str]):
        for node in nodes:
            if isinstance(node, _Var):
                if node.name not in bound or include_loop_vars:
                    names.add(node.name)
            elif isinstance(node, _If):
                names.add(node.flag)
                walk(node.then, bound)
                walk(node.orelse, bound)
            elif isinstance(node, _For):
                names.add(node.items)
                walk(node.body, bound | {node.var})

    walk(parse(body), frozenset())
    return names


def socket_markers(body: str) -> list[str]:
    """Socket names referenced by a template, in order of appearance."""
    found: list[str] = []

    def walk(nodes):
        for node in nodes:
            if isinstance(node, _Socket):
                found.append(node.name)
            elif isinstance(node, _If):
                walk(node.then)
                walk(node.orelse)
            elif isinstance(node, _For):
                walk(node.body)

    walk(parse(body))
    return found


def marker_text(socket: str) -> str:
    """The literal marker string a socket occupies in expanded text."""
    return f"{OPEN}socket {socket}{CLOSE}"


def _render_value(name: str, value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return ", ".join(str(v) for v in value)
    raise MalformedConstruct(f"value of <%{name}%> is not renderable: {value!r}")


def expand_template(
    body: str,
    bindings: Mapping[str, object],
    builtins: Mapping[str, object] | None = None,
    *,
    allow_sockets: bool = True,
) -> str:
    """Expand every mask construct in ``body`` over the given bindings.

    Socket markers are re-emitted verbatim (the generator replaces them
    when splicing child output); pass ``allow_sockets=False`` where a
    marker would be meaningless, e.g. step labels.
    """
    env: dict[str, object] = dict(builtins or {})
    env.update(bindings)

    out: list[str] = []

    def emit(nodes, scope: dict[str, object]):
        for node in nodes:
            if isinstance(node, _Lit):
                out.append(node.text)
            elif isinstance(node, _Var):
                if node.name not in scope:
                    raise UnboundVariable(node.name)
                out.append(_render_value(node.name, scope[node.name]))
            elif isinstance(node, _Socket):
                if not allow_sockets:
                    raise MalformedConstruct(
                        f"socket marker <%socket {node.name}%> not allowed here"
                    )
                out.append(marker_text(node.name))
            elif isinstance(node, _If):
                if node.flag not in scope:
                    raise UnboundVariable(node.flag)
                flag = scope[node.flag]
                if not isinstance(flag, bool):
                    raise MalformedConstruct(
                        f"<%if {node.flag}%> needs a boolean, got {flag!r}"
                    )
                emit(node.then if flag else node.orelse, scope)
            elif isinstance(node, _For):
                if node.items not in scope:
                    raise UnboundVariable(node.items)
                items = scope[node.items]
                if not isinstance(items, list):
                    raise MalformedConstruct(
                        f"<%for .. in {node.items}%> needs a list, got {items!r}"
                    )
                for item in items:
                    emit(node.body, {**scope, node.var: item})

    emit(parse(body), env)
    return "".join(out)
