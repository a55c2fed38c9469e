"""Divisors on a metric graph and principal perturbations by basic extremal functions."""

import logging
from collections import defaultdict
from collections.abc import Mapping
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

from errors import InvalidParameter, NotConnected, NotEffective, UnsafeEpsilon
from metric_graph import (
    ClosedLocus, MetricGraph, ModelEdge, PointRef, RationalLike, as_rational,
)

logger = logging.getLogger(__name__)


class Divisor(Mapping):
    """A finite integer combination of points of one metric graph.

    Zero coefficients are never stored. Missing points read as 0.
    """

    def __init__(self, graph: MetricGraph, coefficients=()):
        self.graph = graph
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        totals = defaultdict(int)
        for point, coefficient in items:
            if isinstance(coefficient, bool) or not isinstance(coefficient, int):
                raise InvalidParameter(f"Coefficient at {point} must be an integer, got {coefficient!r}")
            totals[graph.validate_point(point)] += coefficient
        self._coefficients = {p: c for p, c in sorted(totals.items()) if c != 0}
        self._hash: Optional[int] = None

    @classmethod
    def zero(cls, graph: MetricGraph) -> 'Divisor':
        return cls(graph)

    @classmethod
    def from_points(cls, graph: MetricGraph, points: Iterable[PointRef]) -> 'Divisor':
        """One chip per listed point, repeated points accumulate."""
        return cls(graph, [(p, 1) for p in points])

    # Mapping protocol

    def __getitem__(self, point: PointRef) -> int:
        return self._coefficients.get(point, 0)

    def __iter__(self) -> Iterator[PointRef]:
        return iter(self._coefficients)

    def __len__(self) -> int:
        return len(self._coefficients)

    def __contains__(self, point) -> bool:
        return point in self._coefficients

    # Basic quantities

    @property
    def degree(self) -> int:
        return sum(self._coefficients.values())

    @property
    def support(self) -> Tuple[PointRef, ...]:
        return tuple(self._coefficients)

    @property
    def is_effective(self) -> bool:
        return all(c > 0 for c in self._coefficients.values())

    @property
    def is_zero(self) -> bool:
        return not self._coefficients

    def positive_part(self) -> 'Divisor':
        return Divisor(self.graph, {p: c for p, c in self._coefficients.items() if c > 0})

    def negative_part(self) -> 'Divisor':
        """D⁻ with D = D⁺ − D⁻; the result is effective."""
        return Divisor(self.graph, {p: -c for p, c in self._coefficients.items() if c < 0})

    def without(self, point: PointRef) -> 'Divisor':
        return Divisor(self.graph, {p: c for p, c in self._coefficients.items() if p != point})

    # Arithmetic

    def _same_graph(self, other: 'Divisor'):
        if not isinstance(other, Divisor):
            raise InvalidParameter(f"Cannot combine a divisor with {type(other).__name__}")
        if self.graph is not other.graph and self.graph != other.graph:
            raise InvalidParameter("Divisors live on different graphs")

    def __add__(self, other: 'Divisor') -> 'Divisor':
        self._same_graph(other)
        return Divisor(self.graph, list(self._coefficients.items()) + list(other._coefficients.items()))

    def __neg__(self) -> 'Divisor':
        return Divisor(self.graph, {p: -c for p, c in self._coefficients.items()})

    def __sub__(self, other: 'Divisor') -> 'Divisor':
        return self + (-other)

    def __mul__(self, factor: int) -> 'Divisor':
        if isinstance(factor, bool) or not isinstance(factor, int):
            return NotImplemented
        return Divisor(self.graph, {p: c * factor for p, c in self._coefficients.items()})

    __rmul__ = __mul__

    def add_chips(self, point: PointRef, count: int = 1) -> 'Divisor':
        return Divisor(self.graph, list(self._coefficients.items()) + [(point, count)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Divisor):
            return NotImplemented
        return self._coefficients == other._coefficients and (self.graph is other.graph or self.graph == other.graph)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._coefficients.items()))
        return self._hash

    def format(self, label: Optional[Callable[[PointRef], str]] = None) -> str:
        """Render as "2(w1) + (e1@1/2) - (w2)"; with ``label``, terms are named and sorted by it."""
        if not self._coefficients:
            return '0'
        terms = [(str(p) if label is None else label(p), c) for p, c in self._coefficients.items()]
        if label is not None:
            terms.sort()
        parts = []
        for name, coefficient in terms:
            magnitude = abs(coefficient)
            term = f"({name})" if magnitude == 1 else f"{magnitude}({name})"
            if not parts:
                parts.append(term if coefficient > 0 else f"-{term}")
            else:
                parts.append(f"{'+' if coefficient > 0 else '-'} {term}")
        return ' '.join(parts)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Divisor({self})"


def degree(divisor: Divisor) -> int:
    return divisor.degree


def add(first: Divisor, second: Divisor) -> Divisor:
    return first + second


def negate(divisor: Divisor) -> Divisor:
    return -divisor


def is_effective(divisor: Divisor) -> bool:
    return divisor.is_effective


def canonical_divisor(graph: MetricGraph) -> Divisor:
    """K = sum over vertices of (deg(v) - 2)(v); interior points have degree 2."""
    return Divisor(graph, [(PointRef.at_vertex(v), graph.degree(v) - 2) for v in graph.vertices])


def safe_radius(locus: ClosedLocus) -> Optional[Fraction]:
    """Largest collar width the locus supports; None when it has no boundary.

    The bound is inclusive: ``apply_basic_extremal`` accepts any epsilon with
    0 < epsilon <= safe_radius(locus). A collar may reach the next model
    vertex; two collars on the same model edge may meet in its middle. Only
    the locus and its model count, so chips of a divisor lying inside a
    collar do not shorten it.
    """
    radius = None
    for vertex in sorted(locus.boundary()):
        for edge in locus.outgoing(vertex):
            reach = edge.length / 2 if edge.other_end(vertex) in locus.vertices else edge.length
            radius = reach if radius is None else min(radius, reach)
    return radius


def collar_directions(locus: ClosedLocus) -> List[Tuple[PointRef, ModelEdge]]:
    """Every (boundary point, outgoing model edge) pair in canonical order."""
    return [(v, e) for v in sorted(locus.boundary()) for e in locus.outgoing(v)]


def _check_collar(divisor: Divisor, locus: ClosedLocus, epsilon: Fraction):
    if locus.model.base != divisor.graph:
        raise InvalidParameter("Locus and divisor live on different graphs")
    if epsilon <= 0:
        raise UnsafeEpsilon(f"Collar width must be positive, got {epsilon}")
    if not locus.is_connected():
        raise NotConnected("The maximum locus of a basic extremal function must be connected")
    radius = safe_radius(locus)
    if radius is not None and epsilon > radius:
        raise UnsafeEpsilon(f"Collar width {epsilon} exceeds the safe radius {radius}")


def apply_basic_extremal(divisor: Divisor, locus: ClosedLocus, epsilon: RationalLike,
                         strict: bool = False) -> Divisor:
    """D + (f) for the basic extremal function with maximum locus X and collar width epsilon.

    Each boundary point of X loses one chip per outgoing direction and every
    direction deposits that chip at distance epsilon outside X.
    """
    epsilon = as_rational(epsilon, 'epsilon')
    _check_collar(divisor, locus, epsilon)
    directions = collar_directions(locus)
    if not directions:
        return divisor
    if strict:
        for vertex in sorted(locus.boundary()):
            if divisor[vertex] < locus.outdeg(vertex):
                raise NotEffective(
                    f"{vertex} holds {divisor[vertex]} chips but {locus.outdeg(vertex)} directions leave the locus"
                )
    model = locus.model
    moves = []
    for vertex, edge in directions:
        moves.append((vertex, -1))
        moves.append((model.point_along(edge, vertex, epsilon), 1))
    return divisor + Divisor(divisor.graph, moves)


def expand_locus(locus: ClosedLocus, epsilon: RationalLike) -> ClosedLocus:
    """The closed epsilon-neighbourhood of a locus, on a model refined at the collar ends."""
    epsilon = as_rational(epsilon, 'epsilon')
    _check_collar(Divisor.zero(locus.model.base), locus, epsilon)
    directions = collar_directions(locus)
    if not directions:
        return locus
    model = locus.model
    landings = [model.point_along(edge, vertex, epsilon) for vertex, edge in directions]
    finer = model.refine(landings)
    expanded = locus.refined(finer)
    vertices, edges = set(expanded.vertices), set(expanded.closed_edges)
    for vertex, edge in directions:
        start = edge.offset_at(vertex)
        stop = start + epsilon if vertex == edge.start else start - epsilon
        for piece in finer.edges_within(edge.base_edge, min(start, stop), max(start, stop)):
            edges.add(piece.id)
            vertices.update(piece.ends)
    return ClosedLocus(finer, frozenset(vertices), frozenset(edges))
