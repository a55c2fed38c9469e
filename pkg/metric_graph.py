"""Exact metric graphs, points, refined models and regions.

Everything here is immutable and uses ``fractions.Fraction`` for lengths and
offsets, so every algorithm built on top of it is exact.
"""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from errors import (
    Disconnected, DuplicateId, InternalGeometry, InvalidParameter, LoopEdge,
    NoEdges, NonpositiveFactor, NonpositiveLength, UnknownReference,
)

logger = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[int, str, Fraction]

_RATIONAL_PATTERN = re.compile(r'^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$')


def as_rational(value: RationalLike, field: str = 'value') -> Fraction:
    """Parse an integer, a Fraction or a "p/q" string; floats are refused."""
    if isinstance(value, bool):
        raise InvalidParameter(f"{field} must be a rational, got a boolean")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL_PATTERN.match(value)
        if not match:
            raise InvalidParameter(f"{field} must look like 'p/q' or an integer, got {value!r}")
        denominator = int(match.group(2)) if match.group(2) else 1
        if denominator == 0:
            raise InvalidParameter(f"{field} has a zero denominator: {value!r}")
        return Fraction(int(match.group(1)), denominator)
    raise InvalidParameter(f"{field} must be exact (int or 'p/q' string), got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@total_ordering
@dataclass(frozen=True)
class PointRef:
    """A vertex, or an interior point of an edge at an offset from its tail.

    Build edge points through ``MetricGraph.point`` so that offsets 0 and
    ``length`` collapse to the vertex form.
    """
    vertex: Optional[str] = None
    edge: Optional[str] = None
    offset: Optional[Fraction] = None

    @classmethod
    def at_vertex(cls, vertex_id: str) -> 'PointRef':
        return cls(vertex=vertex_id)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def sort_key(self) -> Tuple[int, str, Fraction]:
        if self.vertex is not None:
            return (0, self.vertex, Fraction(0))
        return (1, self.edge, self.offset)

    def __lt__(self, other: 'PointRef') -> bool:
        if not isinstance(other, PointRef):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.vertex is not None:
            return self.vertex
        return f"{self.edge}@{format_rational(self.offset)}"


@dataclass(frozen=True)
class Edge:
    id: str
    ends: Tuple[str, str]
    length: Fraction

    @property
    def tail(self) -> str:
        """The canonically smaller end; offsets are measured from here."""
        return min(self.ends)

    @property
    def head(self) -> str:
        return max(self.ends)

    def other_end(self, vertex_id: str) -> str:
        return self.ends[1] if self.ends[0] == vertex_id else self.ends[0]


class MetricGraph:
    """A finite connected loopless multigraph with positive rational lengths.

    The constructor validates; a ``MetricGraph`` that exists is valid.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge]):
        self._vertices: Tuple[str, ...] = tuple(vertices)
        self._edges: Tuple[Edge, ...] = tuple(edges)
        self._check()
        self._edge_by_id: Dict[str, Edge] = {e.id: e for e in self._edges}
        incident: Dict[str, List[Edge]] = {v: [] for v in self._vertices}
        for edge in sorted(self._edges, key=lambda e: e.id):
            incident[edge.ends[0]].append(edge)
            incident[edge.ends[1]].append(edge)
        self._incident = {v: tuple(es) for v, es in incident.items()}

    def _check(self):
        if len(set(self._vertices)) != len(self._vertices):
            dupes = sorted({v for v in self._vertices if self._vertices.count(v) > 1})
            raise DuplicateId(f"Duplicate vertex ids: {dupes}")
        edge_ids = [e.id for e in self._edges]
        if len(set(edge_ids)) != len(edge_ids):
            dupes = sorted({e for e in edge_ids if edge_ids.count(e) > 1})
            raise DuplicateId(f"Duplicate edge ids: {dupes}")
        if not self._edges:
            raise NoEdges("A metric graph needs at least one edge")
        known = set(self._vertices)
        for edge in self._edges:
            for end in edge.ends:
                if end not in known:
                    raise UnknownReference(f"Edge {edge.id!r} references unknown vertex {end!r}")
            if edge.ends[0] == edge.ends[1]:
                raise LoopEdge(edge.id)
            if edge.length <= 0:
                raise NonpositiveLength(f"Edge {edge.id!r} has nonpositive length {format_rational(edge.length)}")
        skeleton = nx.Graph()
        skeleton.add_nodes_from(self._vertices)
        skeleton.add_edges_from(e.ends for e in self._edges)
        if not nx.is_connected(skeleton):
            components = sorted(sorted(c) for c in nx.connected_components(skeleton))
            raise Disconnected(f"Graph has {len(components)} components: {components}")

    # Structure

    @property
    def vertices(self) -> Tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edges

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise UnknownReference(f"Unknown edge {edge_id!r}") from None

    def has_vertex(self, vertex_id: str) -> bool:
        return vertex_id in self._incident

    def incident(self, vertex_id: str) -> Tuple[Edge, ...]:
        if vertex_id not in self._incident:
            raise UnknownReference(f"Unknown vertex {vertex_id!r}")
        return self._incident[vertex_id]

    def degree(self, vertex_id: str) -> int:
        return len(self.incident(vertex_id))

    @property
    def genus(self) -> int:
        return len(self._edges) - len(self._vertices) + 1

    def vertex_points(self) -> Tuple[PointRef, ...]:
        return tuple(PointRef.at_vertex(v) for v in sorted(self._vertices))

    def is_unit(self) -> bool:
        return all(e.length == 1 for e in self._edges)

    # Points

    def vertex_point(self, vertex_id: str) -> PointRef:
        if vertex_id not in self._incident:
            raise UnknownReference(f"Unknown vertex {vertex_id!r}")
        return PointRef.at_vertex(vertex_id)

    def point(self, edge_id: str, offset: RationalLike) -> PointRef:
        """The canonical point at ``offset`` from the tail of ``edge_id``."""
        edge = self.edge(edge_id)
        offset = as_rational(offset, 'offset')
        if offset < 0 or offset > edge.length:
            raise InvalidParameter(
                f"Offset {format_rational(offset)} outside edge {edge_id!r} of length {format_rational(edge.length)}"
            )
        if offset == 0:
            return PointRef.at_vertex(edge.tail)
        if offset == edge.length:
            return PointRef.at_vertex(edge.head)
        return PointRef(edge=edge_id, offset=offset)

    def point_from_end(self, edge_id: str, end: str, distance: RationalLike) -> PointRef:
        edge = self.edge(edge_id)
        distance = as_rational(distance, 'distance')
        if end == edge.tail:
            return self.point(edge_id, distance)
        if end == edge.head:
            return self.point(edge_id, edge.length - distance)
        raise UnknownReference(f"Vertex {end!r} is not an end of edge {edge_id!r}")

    def midpoint(self, edge_id: str) -> PointRef:
        return self.point(edge_id, self.edge(edge_id).length / 2)

    def validate_point(self, point: PointRef) -> PointRef:
        """Check that ``point`` lies on this graph and return its canonical form."""
        if point.is_vertex:
            return self.vertex_point(point.vertex)
        return self.point(point.edge, point.offset)

    # Equality and serialization helpers

    def _signature(self):
        return (
            tuple(sorted(self._vertices)),
            tuple(sorted((e.id, tuple(sorted(e.ends)), e.length) for e in self._edges)),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return self is other or self._signature() == other._signature()

    def __hash__(self) -> int:
        return hash(self._signature())

    def __repr__(self) -> str:
        return f"MetricGraph(vertices={len(self._vertices)}, edges={len(self._edges)}, genus={self.genus})"

    def to_raw(self) -> dict:
        return {
            'vertices': list(self._vertices),
            'edges': [
                {'id': e.id, 'ends': list(e.ends), 'length': format_rational(e.length)}
                for e in self._edges
            ],
        }


def validate_graph(raw: Mapping, subdivide_loops: bool = False) -> MetricGraph:
    """Build a ``MetricGraph`` from a parsed description.

    ``raw`` has ``vertices`` (list of ids) and ``edges`` (list of mappings with
    ``id``, ``ends`` and ``length``). Loops are rejected unless
    ``subdivide_loops`` is set, in which case each loop gets a midpoint vertex.
    """
    vertices = [str(v) for v in raw.get('vertices', [])]
    edges = []
    taken_vertices = set(vertices)
    taken_edges = {str(item['id']) for item in raw.get('edges', []) if isinstance(item, Mapping) and 'id' in item}
    for index, item in enumerate(raw.get('edges', [])):
        try:
            ends = tuple(str(end) for end in item['ends'])
            edge_id = str(item['id'])
            length = as_rational(item['length'], f"edges[{index}].length")
        except KeyError as missing:
            raise InvalidParameter(f"edges[{index}] is missing field {missing}") from None
        if len(ends) != 2:
            raise InvalidParameter(f"edges[{index}].ends must name exactly two vertices")
        if length <= 0:
            raise NonpositiveLength(f"Edge {edge_id!r} has nonpositive length {format_rational(length)}")
        if ends[0] == ends[1] and subdivide_loops:
            middle = _fresh_id(f"{edge_id}.m", taken_vertices)
            logger.warning(f"Subdividing loop {edge_id!r} at new vertex {middle!r}")
            vertices.append(middle)
            edges.append(Edge(_fresh_id(f"{edge_id}.a", taken_edges), (ends[0], middle), length / 2))
            edges.append(Edge(_fresh_id(f"{edge_id}.b", taken_edges), (middle, ends[1]), length / 2))
            continue
        edges.append(Edge(edge_id, ends, length))
    return MetricGraph(vertices, edges)


def genus(graph: MetricGraph) -> int:
    return graph.genus


@dataclass(frozen=True)
class ModelEdge:
    """A segment of a base edge between two consecutive model vertices."""
    id: str
    base_edge: str
    start: PointRef
    end: PointRef
    lo: Fraction
    hi: Fraction

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def ends(self) -> Tuple[PointRef, PointRef]:
        return (self.start, self.end)

    def other_end(self, vertex: PointRef) -> PointRef:
        return self.end if vertex == self.start else self.start

    def offset_at(self, vertex: PointRef) -> Fraction:
        return self.lo if vertex == self.start else self.hi


class RefinedModel:
    """The combinatorial model whose vertices are the graph's vertices plus ``marks``."""

    def __init__(self, base: MetricGraph, marks: Iterable[PointRef] = ()):
        self.base = base
        canonical = {base.validate_point(p) for p in marks}
        self.marks: frozenset = frozenset(p for p in canonical if not p.is_vertex)
        self.vertices: Tuple[PointRef, ...] = tuple(sorted(set(base.vertex_points()) | self.marks))

        cuts_by_edge: Dict[str, List[PointRef]] = defaultdict(list)
        for mark in self.marks:
            cuts_by_edge[mark.edge].append(mark)

        edges: List[ModelEdge] = []
        self._segments: Dict[str, List[ModelEdge]] = {}
        for base_edge in sorted(base.edges, key=lambda e: e.id):
            inner = sorted(cuts_by_edge.get(base_edge.id, []), key=lambda p: p.offset)
            points = [PointRef.at_vertex(base_edge.tail)] + inner + [PointRef.at_vertex(base_edge.head)]
            offsets = [Fraction(0)] + [p.offset for p in inner] + [base_edge.length]
            segments = [
                ModelEdge(f"{base_edge.id}:{k}", base_edge.id, points[k], points[k + 1], offsets[k], offsets[k + 1])
                for k in range(len(points) - 1)
            ]
            self._segments[base_edge.id] = segments
            edges.extend(segments)
        self.edges: Tuple[ModelEdge, ...] = tuple(edges)
        self._edge_by_id = {e.id: e for e in edges}

        incident: Dict[PointRef, List[ModelEdge]] = {v: [] for v in self.vertices}
        for edge in edges:
            incident[edge.start].append(edge)
            incident[edge.end].append(edge)
        self._incident = {v: tuple(es) for v, es in incident.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, RefinedModel):
            return NotImplemented
        return self is other or (self.base == other.base and self.marks == other.marks)

    def __hash__(self) -> int:
        return hash((self.base, self.marks))

    def __repr__(self) -> str:
        return f"RefinedModel(vertices={len(self.vertices)}, edges={len(self.edges)}, marks={len(self.marks)})"

    @property
    def genus(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def edge(self, edge_id: str) -> ModelEdge:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise UnknownReference(f"Unknown model edge {edge_id!r}") from None

    def has_vertex(self, point: PointRef) -> bool:
        return point in self._incident

    def incident(self, vertex: PointRef) -> Tuple[ModelEdge, ...]:
        if vertex not in self._incident:
            raise UnknownReference(f"{vertex} is not a vertex of the refined model")
        return self._incident[vertex]

    def degree(self, vertex: PointRef) -> int:
        return len(self.incident(vertex))

    @cached_property
    def graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for edge in self.edges:
            g.add_edge(edge.start, edge.end, key=edge.id, weight=edge.length)
        return g

    def refine(self, extra_marks: Iterable[PointRef]) -> 'RefinedModel':
        extra = {self.base.validate_point(p) for p in extra_marks}
        if all(p.is_vertex or p in self.marks for p in extra):
            return self
        return RefinedModel(self.base, self.marks | extra)

    def edge_containing(self, point: PointRef) -> Optional[ModelEdge]:
        """The model edge whose open interior holds ``point``; None for model vertices."""
        point = self.base.validate_point(point)
        if point in self._incident:
            return None
        for segment in self._segments[point.edge]:
            if segment.lo < point.offset < segment.hi:
                return segment
        raise InternalGeometry(f"Point {point} is neither a model vertex nor inside a model edge")

    def edges_within(self, base_edge: str, lo: Fraction, hi: Fraction) -> List[ModelEdge]:
        return [s for s in self._segments[base_edge] if lo <= s.lo and s.hi <= hi]

    def point_along(self, edge: ModelEdge, from_vertex: PointRef, distance: Fraction) -> PointRef:
        """The base-graph point ``distance`` into ``edge`` starting at ``from_vertex``."""
        if from_vertex == edge.start:
            return self.base.point(edge.base_edge, edge.lo + distance)
        return self.base.point(edge.base_edge, edge.hi - distance)

    def midpoint(self, edge: ModelEdge) -> PointRef:
        return self.base.point(edge.base_edge, (edge.lo + edge.hi) / 2)

    def as_metric_graph(self) -> MetricGraph:
        return MetricGraph(
            [str(v) for v in self.vertices],
            [Edge(e.id, (str(e.start), str(e.end)), e.length) for e in self.edges],
        )


def refine(graph: MetricGraph, marks: Iterable[PointRef] = ()) -> RefinedModel:
    return RefinedModel(graph, marks)


def distance(model: RefinedModel, p: PointRef, q: PointRef) -> Fraction:
    """Exact shortest-path distance between two points of the base graph."""
    finer = model.refine([p, q])
    p = finer.base.validate_point(p)
    q = finer.base.validate_point(q)
    if p == q:
        return Fraction(0)
    return Fraction(nx.dijkstra_path_length(finer.graph, p, q, weight='weight'))


@dataclass(frozen=True)
class ClosedLocus:
    """A closed subset of the graph made of model vertices and closed model edges."""
    model: RefinedModel
    vertices: frozenset
    closed_edges: frozenset

    def __post_init__(self):
        for edge_id in self.closed_edges:
            edge = self.model.edge(edge_id)
            if edge.start not in self.vertices or edge.end not in self.vertices:
                raise InvalidParameter(f"Closed edge {edge_id!r} is missing an endpoint")
        for vertex in self.vertices:
            if not self.model.has_vertex(vertex):
                raise InvalidParameter(f"{vertex} is not a vertex of the model")

    @classmethod
    def from_vertices(cls, model: RefinedModel, vertices: Iterable[PointRef], induced: bool = True) -> 'ClosedLocus':
        vertices = frozenset(vertices)
        edges = frozenset(
            e.id for e in model.edges if induced and e.start in vertices and e.end in vertices
        )
        return cls(model, vertices, edges)

    @classmethod
    def whole(cls, model: RefinedModel) -> 'ClosedLocus':
        return cls(model, frozenset(model.vertices), frozenset(e.id for e in model.edges))

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def is_whole(self) -> bool:
        return len(self.closed_edges) == len(self.model.edges)

    def contains(self, point: PointRef) -> bool:
        edge = self.model.edge_containing(point)
        if edge is None:
            return self.model.base.validate_point(point) in self.vertices
        return edge.id in self.closed_edges

    def outgoing(self, vertex: PointRef) -> Tuple[ModelEdge, ...]:
        return tuple(e for e in self.model.incident(vertex) if e.id not in self.closed_edges)

    def outdeg(self, vertex: PointRef) -> int:
        return len(self.outgoing(vertex))

    def boundary(self) -> frozenset:
        return frozenset(v for v in self.vertices if self.outgoing(v))

    def _graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for edge_id in self.closed_edges:
            edge = self.model.edge(edge_id)
            g.add_edge(edge.start, edge.end, key=edge_id)
        return g

    def is_connected(self) -> bool:
        return bool(self.vertices) and nx.is_connected(self._graph())

    def components(self) -> Tuple['ClosedLocus', ...]:
        graph = self._graph()
        pieces = []
        for nodes in nx.connected_components(graph):
            nodes = frozenset(nodes)
            edges = frozenset(k for u, v, k in graph.subgraph(nodes).edges(keys=True))
            pieces.append(ClosedLocus(self.model, nodes, edges))
        return tuple(sorted(pieces, key=lambda c: min(c.vertices)))

    @property
    def genus(self) -> int:
        if not self.vertices:
            return 0
        graph = self._graph()
        return graph.number_of_edges() - graph.number_of_nodes() + nx.number_connected_components(graph)

    def refined(self, finer: RefinedModel) -> 'ClosedLocus':
        """The same closed set expressed on a finer model of the same graph."""
        if finer.base != self.model.base or not self.model.marks <= finer.marks:
            raise InvalidParameter("Target model does not refine the locus model")
        vertices = set(self.vertices)
        edges = set()
        for edge_id in self.closed_edges:
            edge = self.model.edge(edge_id)
            for piece in finer.edges_within(edge.base_edge, edge.lo, edge.hi):
                edges.add(piece.id)
                vertices.update(piece.ends)
        return ClosedLocus(finer, frozenset(vertices), frozenset(edges))

    def describe(self) -> str:
        if self.is_whole:
            return 'whole graph'
        parts = []
        for component in self.components():
            if not component.closed_edges:
                parts.append('{' + ', '.join(str(v) for v in sorted(component.vertices)) + '}')
            else:
                parts.append('[' + ', '.join(str(v) for v in sorted(component.vertices)) + ']')
        return ' ∪ '.join(parts) if parts else '∅'


@dataclass(frozen=True)
class OpenRegion:
    """A connected open set: interior model vertices with all their edges.

    Edges with both ends inside are ``full_edges``; edges leaving the region
    are ``stubs`` (model edge id, interior end), i.e. the open edge minus its
    outer end.
    """
    model: RefinedModel
    interior_vertices: frozenset
    full_edges: frozenset
    stubs: frozenset

    def __post_init__(self):
        for vertex in self.interior_vertices:
            for edge in self.model.incident(vertex):
                other = edge.other_end(vertex)
                if other in self.interior_vertices:
                    if edge.id not in self.full_edges:
                        raise InvalidParameter(f"Edge {edge.id!r} joins interior vertices but is not full")
                elif (edge.id, vertex) not in self.stubs:
                    raise InvalidParameter(f"Edge {edge.id!r} leaves {vertex} without a stub")

    @classmethod
    def from_vertices(cls, model: RefinedModel, vertices: Iterable[PointRef]) -> 'OpenRegion':
        vertices = frozenset(vertices)
        full, stubs = set(), set()
        for vertex in vertices:
            for edge in model.incident(vertex):
                if edge.other_end(vertex) in vertices:
                    full.add(edge.id)
                else:
                    stubs.add((edge.id, vertex))
        return cls(model, vertices, frozenset(full), frozenset(stubs))

    @property
    def is_empty(self) -> bool:
        return not self.interior_vertices

    @property
    def boundary(self) -> frozenset:
        return frozenset(self.model.edge(edge_id).other_end(v) for edge_id, v in self.stubs)

    def edges_into(self, vertex: PointRef) -> int:
        """Number of model edges at a boundary vertex that enter the region."""
        return sum(1 for e in self.model.incident(vertex) if e.other_end(vertex) in self.interior_vertices)

    def contains(self, point: PointRef) -> bool:
        edge = self.model.edge_containing(point)
        if edge is None:
            return self.model.base.validate_point(point) in self.interior_vertices
        return edge.id in self.full_edges or any(edge.id == s for s, _ in self.stubs)

    def is_connected(self) -> bool:
        if not self.interior_vertices:
            return True
        return nx.is_connected(self.model.graph.subgraph(self.interior_vertices))

    def complement(self) -> ClosedLocus:
        outside = [v for v in self.model.vertices if v not in self.interior_vertices]
        return ClosedLocus.from_vertices(self.model, outside)

    def complement_components(self) -> Tuple[ClosedLocus, ...]:
        complement = self.complement()
        return complement.components() if complement.vertices else ()

    def describe(self) -> str:
        return 'U{' + ', '.join(str(v) for v in sorted(self.interior_vertices)) + '}'


def component_region(model: RefinedModel, blocked: Iterable[PointRef], seed: PointRef) -> OpenRegion:
    """The connected component of (graph minus ``blocked``) that contains ``seed``.

    ``blocked`` and ``seed`` must be model vertices. A blocked seed yields the
    empty region.
    """
    blocked = frozenset(blocked)
    if not model.has_vertex(seed):
        raise UnknownReference(f"Seed {seed} is not a vertex of the refined model")
    if seed in blocked:
        return OpenRegion(model, frozenset(), frozenset(), frozenset())
    free = model.graph.subgraph(v for v in model.vertices if v not in blocked)
    return OpenRegion.from_vertices(model, nx.node_connected_component(free, seed))


class Homeomorphism:
    """A rescaled or subdivided copy of a graph together with its point map."""

    def __init__(self, source: MetricGraph, graph: MetricGraph, mapper):
        self.source = source
        self.graph = graph
        self._mapper = mapper

    def map_point(self, point: PointRef) -> PointRef:
        return self._mapper(self.source.validate_point(point))

    def map_points(self, points: Iterable[PointRef]) -> List[PointRef]:
        return [self.map_point(p) for p in points]


def _rescale(graph: MetricGraph, factors) -> Homeomorphism:
    if isinstance(factors, Mapping):
        table = {edge_id: as_rational(f, f"factor[{edge_id}]") for edge_id, f in factors.items()}
        for edge_id in table:
            graph.edge(edge_id)
    else:
        common = as_rational(factors, 'factor')
        table = {e.id: common for e in graph.edges}
    for edge_id, factor in table.items():
        if factor <= 0:
            raise NonpositiveFactor(f"Rescale factor for {edge_id!r} must be positive, got {format_rational(factor)}")
    target = MetricGraph(
        graph.vertices,
        [Edge(e.id, e.ends, e.length * table.get(e.id, 1)) for e in graph.edges],
    )

    def mapper(point: PointRef) -> PointRef:
        if point.is_vertex:
            return point
        return target.point(point.edge, point.offset * table.get(point.edge, 1))

    return Homeomorphism(graph, target, mapper)


def _fresh_id(candidate: str, taken: set) -> str:
    """``candidate``, primed until it collides with nothing in ``taken``."""
    name = candidate
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def _subdivide(graph: MetricGraph, cuts: Mapping[str, Sequence[RationalLike]]) -> Homeomorphism:
    vertices = list(graph.vertices)
    edges: List[Edge] = []
    layout: Dict[str, Tuple[List[Fraction], List[str], List[str]]] = {}
    taken_vertices = set(graph.vertices)
    taken_edges = {e.id for e in graph.edges}
    for edge in graph.edges:
        offsets = sorted({as_rational(o, f"cut[{edge.id}]") for o in cuts.get(edge.id, ())})
        if not offsets:
            edges.append(edge)
            continue
        if offsets[0] <= 0 or offsets[-1] >= edge.length:
            raise InvalidParameter(f"Subdivision points of {edge.id!r} must lie strictly inside the edge")
        new_vertices = [_fresh_id(f"{edge.id}~{k + 1}", taken_vertices) for k in range(len(offsets))]
        vertices.extend(new_vertices)
        nodes = [edge.tail] + new_vertices + [edge.head]
        bounds = [Fraction(0)] + offsets + [edge.length]
        pieces = [_fresh_id(f"{edge.id}.{k}", taken_edges) for k in range(len(nodes) - 1)]
        for k, piece in enumerate(pieces):
            edges.append(Edge(piece, (nodes[k], nodes[k + 1]), bounds[k + 1] - bounds[k]))
        layout[edge.id] = (bounds, nodes, pieces)
    for edge_id in cuts:
        graph.edge(edge_id)
    target = MetricGraph(vertices, edges)

    def mapper(point: PointRef) -> PointRef:
        if point.is_vertex or point.edge not in layout:
            return point
        bounds, nodes, pieces = layout[point.edge]
        for k, piece in enumerate(pieces):
            if point.offset == bounds[k]:
                return PointRef.at_vertex(nodes[k])
            if bounds[k] < point.offset < bounds[k + 1]:
                return target.point_from_end(piece, nodes[k], point.offset - bounds[k])
        raise InvalidParameter(f"Point {point} does not fit its edge")

    return Homeomorphism(graph, target, mapper)


def midpoint_cuts(graph: MetricGraph) -> Dict[str, List[Fraction]]:
    return {e.id: [e.length / 2] for e in graph.edges}


def transform(graph: MetricGraph, *, rescale=None, subdivide: Optional[Mapping[str, Sequence[RationalLike]]] = None) -> Homeomorphism:
    """Rescale edge lengths or subdivide edges, keeping track of points.

    ``rescale`` is one positive rational for every edge or a mapping
    edge id -> factor; ``subdivide`` maps edge ids to offsets (from the
    tail) of new vertices. Exactly one of the two must be given.
    """
    if (rescale is None) == (subdivide is None):
        raise InvalidParameter("transform takes exactly one of rescale= or subdivide=")
    if rescale is not None:
        return _rescale(graph, rescale)
    return _subdivide(graph, subdivide)
