"""JSON workspaces: a graph plus named divisors, points and point sets.

The on-disk layout is one JSON document::

    {"graph": {"vertices": [...], "edges": [{"id", "ends", "length"}]},
     "points": {"name": {"vertex": "w1"} | {"edge": "e1", "offset": "1/2"}},
     "divisors": {"name": [{<point>, "coeff": 2}, ...]},
     "sets": {"name": [<point>, ...]}}

Rationals are integers or "p/q" strings. Serialization sorts keys, writes
rationals in lowest terms and lists divisor terms in canonical point order,
so saving a parsed workspace reproduces a canonical file byte for byte.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

from divisor import Divisor
from errors import DuplicateId, InvalidParameter, UnknownReference, WorkspaceParseError
from metric_graph import MetricGraph, PointRef, as_rational, format_rational, validate_graph

logger = logging.getLogger(__name__)

SECTIONS = ('graph', 'points', 'divisors', 'sets')

_POINT_LITERAL = re.compile(r'^(?P<edge>[^@\s]+)@(?P<offset>-?\d+(?:/\d+)?)$')


@dataclass
class Workspace:
    graph: MetricGraph
    divisors: Dict[str, Divisor] = field(default_factory=dict)
    points: Dict[str, PointRef] = field(default_factory=dict)
    sets: Dict[str, Tuple[PointRef, ...]] = field(default_factory=dict)

    def divisor(self, name: str) -> Divisor:
        try:
            return self.divisors[name]
        except KeyError:
            raise UnknownReference(f"No divisor named {name!r}; known: {sorted(self.divisors)}") from None

    def point_set(self, name: str) -> Tuple[PointRef, ...]:
        try:
            return self.sets[name]
        except KeyError:
            raise UnknownReference(f"No set named {name!r}; known: {sorted(self.sets)}") from None

    def label(self, point: PointRef) -> str:
        """The smallest name given to ``point``, or its literal form."""
        names = [name for name, named in self.points.items() if named == point]
        return min(names) if names else str(point)

    def describe_points(self, points) -> str:
        return '{' + ', '.join(sorted(self.label(p) for p in points)) + '}'

    def describe_divisor(self, divisor: Divisor) -> str:
        return divisor.format(self.label)

    def resolve_point(self, text: str) -> PointRef:
        """A named point, a vertex id, or an ``edge@offset`` literal, in that order."""
        if text in self.points:
            return self.points[text]
        if self.graph.has_vertex(text):
            return self.graph.vertex_point(text)
        match = _POINT_LITERAL.match(text)
        if match:
            return self.graph.point(match.group('edge'), match.group('offset'))
        raise UnknownReference(f"{text!r} is neither a named point, a vertex nor an edge@offset literal")


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise DuplicateId(f"Duplicate name {key!r} in workspace")
        seen[key] = value
    return seen


def _expect(value, kind, path: str):
    if not isinstance(value, kind):
        expected = 'an object' if kind is dict else 'a list'
        raise WorkspaceParseError(f"Expected {expected}", path=path)
    return value


def parse_point(graph: MetricGraph, raw, path: str, extra_keys=()) -> PointRef:
    _expect(raw, dict, path)
    keys = set(raw) - set(extra_keys)
    if keys == {'vertex'}:
        return graph.vertex_point(str(raw['vertex']))
    if keys == {'edge', 'offset'}:
        return graph.point(str(raw['edge']), as_rational(raw['offset'], f"{path}.offset"))
    raise WorkspaceParseError("A point needs either 'vertex' or both 'edge' and 'offset'", path=path)


def _parse_graph(raw, subdivide_loops: bool) -> MetricGraph:
    _expect(raw, dict, 'graph')
    vertices = _expect(raw.get('vertices', []), list, 'graph.vertices')
    edges = _expect(raw.get('edges', []), list, 'graph.edges')
    for index, vertex in enumerate(vertices):
        if not isinstance(vertex, str):
            raise WorkspaceParseError("Vertex ids must be strings", path=f"graph.vertices[{index}]")
    for index, edge in enumerate(edges):
        _expect(edge, dict, f"graph.edges[{index}]")
        _expect(edge.get('ends', []), list, f"graph.edges[{index}].ends")
    return validate_graph(raw, subdivide_loops=subdivide_loops)


def _parse_divisor(graph: MetricGraph, raw, path: str) -> Divisor:
    terms = []
    for index, item in enumerate(_expect(raw, list, path)):
        where = f"{path}[{index}]"
        _expect(item, dict, where)
        if 'coeff' not in item:
            raise WorkspaceParseError("Divisor term is missing 'coeff'", path=where)
        coefficient = item['coeff']
        if isinstance(coefficient, bool) or not isinstance(coefficient, int):
            raise WorkspaceParseError("'coeff' must be an integer", path=f"{where}.coeff")
        terms.append((parse_point(graph, item, where, extra_keys=('coeff',)), coefficient))
    return Divisor(graph, terms)


def parse_workspace(text: str, subdivide_loops: bool = False) -> Workspace:
    try:
        document = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as error:
        raise WorkspaceParseError(error.msg, line=error.lineno) from None
    _expect(document, dict, '$')
    unknown = sorted(set(document) - set(SECTIONS))
    if unknown:
        raise WorkspaceParseError(f"Unknown sections {unknown}", path='$')
    if 'graph' not in document:
        raise WorkspaceParseError("Missing 'graph' section", path='$')

    graph = _parse_graph(document['graph'], subdivide_loops)
    points = {
        name: parse_point(graph, raw, f"points.{name}")
        for name, raw in _expect(document.get('points', {}), dict, 'points').items()
    }
    divisors = {
        name: _parse_divisor(graph, raw, f"divisors.{name}")
        for name, raw in _expect(document.get('divisors', {}), dict, 'divisors').items()
    }
    sets = {}
    for name, raw in _expect(document.get('sets', {}), dict, 'sets').items():
        members = _expect(raw, list, f"sets.{name}")
        sets[name] = tuple(parse_point(graph, p, f"sets.{name}[{i}]") for i, p in enumerate(members))
    workspace = Workspace(graph, divisors, points, sets)
    logger.debug(
        f"Parsed workspace: {len(graph.vertices)} vertices, {len(graph.edges)} edges, "
        f"{len(divisors)} divisors, {len(points)} points, {len(sets)} sets"
    )
    return workspace


def load_workspace(path: str, subdivide_loops: bool = False) -> Workspace:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as error:
        raise WorkspaceParseError(f"Cannot read workspace: {error}", path=path) from None
    return parse_workspace(text, subdivide_loops=subdivide_loops)


def point_to_raw(point: PointRef) -> dict:
    if point.is_vertex:
        return {'vertex': point.vertex}
    return {'edge': point.edge, 'offset': format_rational(point.offset)}


def points_to_raw(points) -> List[dict]:
    return [point_to_raw(p) for p in points]


def divisor_to_raw(divisor: Divisor) -> List[dict]:
    return [dict(point_to_raw(p), coeff=c) for p, c in divisor.items()]


def to_json(document: Mapping) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True) + '\n'


def serialize_workspace(workspace: Workspace) -> str:
    document = {
        'graph': workspace.graph.to_raw(),
        'points': {name: point_to_raw(p) for name, p in workspace.points.items()},
        'divisors': {name: divisor_to_raw(d) for name, d in workspace.divisors.items()},
        'sets': {name: points_to_raw(members) for name, members in workspace.sets.items()},
    }
    return to_json(document)


def save_workspace(workspace: Workspace, path: str) -> str:
    try:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(serialize_workspace(workspace))
    except OSError as error:
        raise InvalidParameter(f"Cannot write workspace to {path}: {error}") from None
    logger.info(f"Workspace saved to: {path}")
    return path
