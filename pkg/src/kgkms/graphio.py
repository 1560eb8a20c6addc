"""Reading and writing graph spec files (JSON)."""

from __future__ import annotations

import json
from pathlib import Path as FsPath
from typing import Any, List, Tuple

from .errors import ParseError
from .kgraph import Edge, KGraph, Skeleton, Square, validate


def _need(obj: dict, key: str, where: str, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    val = obj[key]
    if kind is int and isinstance(val, bool):
        raise ParseError(f"{where}.{key}: expected int")
    if not isinstance(val, kind):
        raise ParseError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _pair(val: Any, where: str) -> Tuple[str, str]:
    if not (isinstance(val, list) and len(val) == 2 and all(isinstance(x, str) for x in val)):
        raise ParseError(f"{where}: expected a list of two edge ids")
    return (val[0], val[1])


def parse_spec(data: dict) -> Tuple[Skeleton, List[Square]]:
    rank = _need(data, "rank", "graph", int)
    vertices = _need(data, "vertices", "graph", list)
    for idx, v in enumerate(vertices):
        if not isinstance(v, str):
            raise ParseError(f"vertices[{idx}]: expected a string id")
    edges = []
    for idx, e in enumerate(_need(data, "edges", "graph", list)):
        where = f"edges[{idx}]"
        edges.append(Edge(
            _need(e, "id", where, str),
            _need(e, "color", where, int),
            _need(e, "range", where, str),
            _need(e, "source", where, str),
        ))
    squares = []
    for idx, s in enumerate(data.get("squares", [])):
        where = f"squares[{idx}]"
        squares.append(Square(
            _need(s, "i", where, int),
            _need(s, "j", where, int),
            _pair(_need(s, "ef", where, list), where + ".ef"),
            _pair(_need(s, "fe", where, list), where + ".fe"),
        ))
    return Skeleton(rank, tuple(vertices), tuple(edges)), squares


def loads(text: str) -> Tuple[Skeleton, List[Square]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    return parse_spec(data)


def load(path) -> Tuple[Skeleton, List[Square]]:
    try:
        text = FsPath(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def load_graph(path, degree_cap=None) -> KGraph:
    skeleton, squares = load(path)
    return validate(skeleton, squares, degree_cap)


def to_spec(skeleton: Skeleton, squares) -> dict:
    return {
        "rank": skeleton.k,
        "vertices": list(skeleton.vertices),
        "edges": [{"id": e.id, "color": e.color, "range": e.range, "source": e.source}
                  for e in skeleton.edges],
        "squares": [{"i": s.i, "j": s.j, "ef": list(s.ef), "fe": list(s.fe)} for s in squares],
    }


def dumps(skeleton: Skeleton, squares) -> str:
    return json.dumps(to_spec(skeleton, squares), indent=1) + "\n"
