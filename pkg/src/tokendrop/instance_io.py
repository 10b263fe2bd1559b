"""Line-oriented text formats for instances and solutions.

Instance files start with ``kind graph|tokendrop|assignment`` and then hold
one record per line::

    node <id>
    level <id> <int>            (tokendrop)
    token <id>                  (tokendrop)
    edge <id> <id>              (tokendrop: child then parent)
    server <id>                 (assignment)
    customer <id> <server> ...  (assignment)

Solution files hold ``traversal v1 .. vd``, ``orient u v`` (toward v),
``assign c s`` or ``match u v`` lines.  ``#`` starts a comment line.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Union

from .errors import InvariantViolation, ParseError
from .graphs import AssignmentInstance, Customer, RegularTree, TokenDropInstance, UndirectedGraph

Instance = Union[UndirectedGraph, TokenDropInstance, AssignmentInstance]

_DIRECTIVES = {
    "graph": {"node": 1, "edge": 2},
    "tokendrop": {"node": 1, "edge": 2, "level": 2, "token": 1},
    "assignment": {"server": 1, "customer": None},
}


def _records(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield no, line.split()


def _int(tok: str, no: int, name: str) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", no, name) from None
    if v < 0:
        raise ParseError(f"ids must be non-negative, got {v}", no, name)
    return v


def parse_instance(text: str) -> Instance:
    recs = list(_records(text))
    if not recs or recs[0][1][0] != "kind":
        raise ParseError("first record must be 'kind <graph|tokendrop|assignment>'", recs[0][0] if recs else 1,
                         "kind")
    no, head = recs[0]
    if len(head) != 2 or head[1] not in _DIRECTIVES:
        raise ParseError(f"unknown instance kind {' '.join(head[1:])!r}", no, "kind")
    kind = head[1]
    allowed = _DIRECTIVES[kind]
    nodes, edges, level, tokens, servers, customers = [], [], {}, [], [], []
    for no, parts in recs[1:]:
        d = parts[0]
        if d not in allowed:
            raise ParseError(f"unknown directive {d!r} for kind {kind}", no, d)
        arity = allowed[d]
        args = parts[1:]
        if arity is not None and len(args) != arity:
            raise ParseError(f"{d} takes {arity} argument(s), got {len(args)}", no, d)
        if d == "node":
            nodes.append(_int(args[0], no, d))
        elif d == "edge":
            edges.append((_int(args[0], no, d), _int(args[1], no, d)))
        elif d == "level":
            v = _int(args[0], no, d)
            if v in level:
                raise InvariantViolation(f"line {no}: node {v} has two levels")
            level[v] = _int(args[1], no, d)
        elif d == "token":
            tokens.append(_int(args[0], no, d))
        elif d == "server":
            servers.append(_int(args[0], no, d))
        elif d == "customer":
            if len(args) < 2:
                raise ParseError("customer needs an id and at least one server", no, d)
            customers.append(Customer(_int(args[0], no, d), tuple(_int(a, no, d) for a in args[1:])))
    if kind == "graph":
        return UndirectedGraph(tuple(nodes), tuple(edges))
    if kind == "tokendrop":
        if len(set(tokens)) != len(tokens):
            raise InvariantViolation("a node holds at most one token")
        return TokenDropInstance(tuple(nodes), tuple(edges), level, frozenset(tokens))
    return AssignmentInstance(tuple(servers), tuple(customers))


def format_instance(value) -> str:
    if isinstance(value, RegularTree):
        value = value.graph
    if isinstance(value, UndirectedGraph):
        lines = ["kind graph"]
        lines += [f"node {v}" for v in value.nodes]
        lines += [f"edge {u} {v}" for u, v in value.edges]
    elif isinstance(value, TokenDropInstance):
        lines = ["kind tokendrop"]
        lines += [f"node {v}" for v in value.nodes]
        lines += [f"level {v} {value.level[v]}" for v in value.nodes]
        lines += [f"token {v}" for v in sorted(value.tokens)]
        lines += [f"edge {c} {p}" for c, p in value.edges]
    elif isinstance(value, AssignmentInstance):
        lines = ["kind assignment"]
        lines += [f"server {s}" for s in value.servers]
        lines += ["customer " + " ".join(map(str, (c.id,) + c.servers)) for c in value.customers]
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")
    return "\n".join(lines) + "\n"


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_instance(value, path) -> None:
    Path(path).write_text(format_instance(value), encoding="utf-8")


# --------------------------------------------------------------- solutions


def format_solution(kind: str, rows: Iterable[tuple]) -> str:
    return "".join(f"{kind} {' '.join(map(str, r))}\n" for r in rows)


def parse_solution(text: str, kind: str) -> list[tuple[int, ...]]:
    rows = []
    for no, parts in _records(text):
        if parts[0] != kind:
            raise ParseError(f"expected '{kind}' record, got {parts[0]!r}", no, parts[0])
        vals = tuple(_int(t, no, kind) for t in parts[1:])
        if kind == "traversal" and not vals:
            raise ParseError("traversal needs at least one node", no, kind)
        if kind != "traversal" and len(vals) != 2:
            raise ParseError(f"{kind} takes 2 arguments, got {len(vals)}", no, kind)
        rows.append(vals)
    return rows


def read_solution(path, kind: str) -> list[tuple[int, ...]]:
    return parse_solution(Path(path).read_text(encoding="utf-8"), kind)


def write_solution(path, kind: str, rows: Iterable[tuple]) -> None:
    Path(path).write_text(format_solution(kind, rows), encoding="utf-8")
