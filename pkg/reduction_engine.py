"""Dhar's burning algorithm on metric graphs, v0-moves and reduced divisors."""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from config import Config
from divisor import Divisor
from errors import (
    EmptySystem, InternalGeometry, InvalidParameter, IterationCapExceeded,
    NotBoundary, NotEffective, NotSaturated,
)
from metric_graph import (
    ClosedLocus, ModelEdge, OpenRegion, PointRef, RationalLike, RefinedModel,
    as_rational, component_region,
)

logger = logging.getLogger(__name__)


def working_model(divisor: Divisor, base_point: PointRef, extra: Iterable[PointRef] = ()) -> RefinedModel:
    """The graph refined at the support of ``divisor``, the base point and ``extra``."""
    return RefinedModel(divisor.graph, list(divisor.support) + [base_point] + list(extra))


def outdeg(model: RefinedModel, locus: ClosedLocus, vertex: PointRef) -> int:
    """Number of directions leaving ``locus`` at the boundary point ``vertex``."""
    if locus.model != model:
        raise InvalidParameter("Locus is not expressed on the given model")
    if vertex not in locus.vertices or not locus.outgoing(vertex):
        raise NotBoundary(f"{vertex} is not a boundary point of the locus")
    return locus.outdeg(vertex)


@dataclass(frozen=True)
class DharOutcome:
    output_set: frozenset
    burn_layers: Tuple[frozenset, ...]
    final_region: OpenRegion

    @property
    def is_reduced(self) -> bool:
        return not self.output_set


def dhar(divisor: Divisor, v0: PointRef, model: Optional[RefinedModel] = None) -> DharOutcome:
    """Burn non-saturated boundary points until nothing burns or nothing is left."""
    if not divisor.is_effective:
        raise NotEffective(f"Dhar's algorithm needs an effective divisor, got {divisor}")
    v0 = divisor.graph.validate_point(v0)
    model = model or working_model(divisor, v0)
    remaining = set(divisor.support) - {v0}
    layers: List[frozenset] = []
    while True:
        region = component_region(model, remaining, v0)
        if not remaining:
            break
        burning = frozenset(v for v in region.boundary if divisor[v] < region.edges_into(v))
        if not burning:
            break
        logger.debug(f"Dhar layer {len(layers)}: {sorted(str(v) for v in burning)}")
        layers.append(burning)
        remaining -= burning
    return DharOutcome(frozenset(remaining), tuple(layers), region)


def is_reduced(divisor: Divisor, v0: PointRef) -> bool:
    """True iff D is nonnegative away from v0 and Dhar's algorithm burns everything."""
    v0 = divisor.graph.validate_point(v0)
    rest = divisor.without(v0)
    if not rest.is_effective:
        return False
    return dhar(rest, v0).is_reduced


def is_reduced_exhaustive(divisor: Divisor, v0: PointRef, limit: int = 12) -> bool:
    """The subset criterion checked literally: every nonempty S in supp(D)∖v0
    leaves a non-saturated boundary point on the complement of U_{S,v0}."""
    v0 = divisor.graph.validate_point(v0)
    rest = divisor.without(v0)
    if not rest.is_effective:
        return False
    support = list(rest.support)
    if len(support) > limit:
        raise InvalidParameter(f"Exhaustive check limited to {limit} support points, got {len(support)}")
    model = working_model(rest, v0)
    for size in range(1, len(support) + 1):
        for blocked in itertools.combinations(support, size):
            region = component_region(model, blocked, v0)
            if not any(rest[v] < region.edges_into(v) for v in region.boundary):
                return False
    return True


@dataclass(frozen=True)
class SweptSegment:
    """The half-open piece of an edge a chip travels: start excluded, landing included."""
    start: PointRef
    landing: PointRef
    base_edge: str
    length: Fraction


@dataclass(frozen=True)
class ComponentMove:
    component: ClosedLocus
    distance: Fraction
    debits: Tuple[Tuple[PointRef, int], ...]
    landings: Divisor
    swept: Tuple[SweptSegment, ...]

    @property
    def principal(self) -> Divisor:
        """The divisor of the basic extremal function that performs this move."""
        return self.landings - Divisor(self.landings.graph, self.debits)


@dataclass(frozen=True)
class MoveOutcome:
    components: Tuple[ComponentMove, ...]
    result: Divisor
    t: Fraction

    @property
    def principal(self) -> Divisor:
        total = Divisor.zero(self.result.graph)
        for component in self.components:
            total = total + component.principal
        return total


def _reach(model: RefinedModel, region: OpenRegion, stops: frozenset,
           start: PointRef, edge: ModelEdge) -> Fraction:
    """Length of the branch-free walk from ``start`` along ``edge`` to the first stop."""
    travelled = Fraction(0)
    current, step = start, edge
    while True:
        nxt = step.other_end(current)
        travelled += step.length
        if nxt not in region.interior_vertices:
            raise InternalGeometry(f"Frontier from {start} reached {nxt} outside the free region")
        if nxt in stops:
            return travelled
        following = [e for e in model.incident(nxt) if e.id != step.id]
        if len(following) != 1:
            raise InternalGeometry(f"Frontier from {start} branches at {nxt}")
        current, step = nxt, following[0]


def move_step(divisor: Divisor, output_set: Iterable[PointRef], v0: PointRef,
              t: RationalLike = 1, model: Optional[RefinedModel] = None) -> MoveOutcome:
    """The v0-move of D with respect to S, evaluated at time t in (0, 1]."""
    graph = divisor.graph
    t = as_rational(t, 't')
    if not 0 < t <= 1:
        raise InvalidParameter(f"Move time must lie in (0, 1], got {t}")
    v0 = graph.validate_point(v0)
    blocked = frozenset(graph.validate_point(p) for p in output_set)
    if not blocked:
        raise InvalidParameter("A move needs a nonempty set S")
    if v0 in blocked:
        raise InvalidParameter("The base point cannot belong to S")
    model = model or working_model(divisor, v0, blocked)
    region = component_region(model, blocked, v0)
    complement = region.complement()
    for vertex in sorted(region.boundary):
        leaving = outdeg(model, complement, vertex)
        if divisor[vertex] < leaving:
            raise NotSaturated(f"{vertex} holds {divisor[vertex]} chips but {leaving} directions leave it")

    stops = frozenset(v for v in region.interior_vertices if v.is_vertex or v == v0)
    moves = []
    for component in region.complement_components():
        directions = [
            (vertex, edge, _reach(model, region, stops, vertex, edge))
            for vertex in sorted(component.boundary())
            for edge in component.outgoing(vertex)
        ]
        travel = t * min(reach for _, _, reach in directions)
        landings = []
        swept = []
        for vertex, edge, _ in directions:
            landing = model.point_along(edge, vertex, travel)
            landings.append(landing)
            swept.append(SweptSegment(vertex, landing, edge.base_edge, travel))
        debits = tuple((v, outdeg(model, component, v)) for v in sorted(component.boundary()))
        moves.append(ComponentMove(component, travel, debits, Divisor.from_points(graph, landings), tuple(swept)))
        logger.debug(f"Component {component.describe()} travels {travel}")

    result = divisor
    for move in moves:
        result = result + move.principal
    return MoveOutcome(tuple(moves), result, t)


def move_support_region(divisor: Divisor, v0: PointRef) -> OpenRegion:
    """U = the component of the graph minus supp(D)∖v0 that contains v0.

    Each v0-move keeps the result's region inside this one.
    """
    v0 = divisor.graph.validate_point(v0)
    model = working_model(divisor, v0)
    return component_region(model, set(divisor.support) - {v0}, v0)


@dataclass(frozen=True)
class ReductionTrace:
    divisors: Tuple[Divisor, ...]
    dhar_runs: Tuple[DharOutcome, ...] = field(repr=False)
    moves: Tuple[MoveOutcome, ...] = field(repr=False)
    base_point: PointRef = None

    @property
    def iterations(self) -> int:
        return len(self.moves)

    @property
    def chips_at_base(self) -> List[int]:
        return [d[self.base_point] for d in self.divisors]

    @property
    def component_counts(self) -> List[int]:
        return [len(m.components) for m in self.moves]


def reduce_effective(divisor: Divisor, v0: PointRef, cap: Optional[int] = None,
                     record: bool = True) -> Tuple[Divisor, ReductionTrace]:
    """Run Dhar's algorithm and v0-moves until the divisor is v0-reduced."""
    if not divisor.is_effective:
        raise NotEffective(f"Reduction needs an effective divisor, got {divisor}")
    cap = Config.iteration_cap() if cap is None else cap
    v0 = divisor.graph.validate_point(v0)
    current = divisor
    divisors, runs, moves = [current], [], []
    iterations = 0
    while True:
        outcome = dhar(current, v0)
        if record:
            runs.append(outcome)
        if outcome.is_reduced:
            break
        if iterations >= cap:
            raise IterationCapExceeded(f"Reduction at {v0} did not finish within {cap} moves")
        move = move_step(current, outcome.output_set, v0, model=outcome.final_region.model)
        iterations += 1
        current = move.result
        if record:
            moves.append(move)
            divisors.append(current)
    if iterations:
        logger.debug(f"Reduced at {v0} after {iterations} moves: {current}")
    if not record:
        divisors = [divisor, current] if current != divisor else [divisor]
    return current, ReductionTrace(tuple(divisors), tuple(runs), tuple(moves), v0)


@lru_cache(maxsize=65536)
def _reduced(divisor: Divisor, v0: PointRef, cap: int) -> Divisor:
    return reduce_effective(divisor, v0, cap=cap, record=False)[0]


def reduced_form(divisor: Divisor, v0: PointRef, cap: Optional[int] = None) -> Divisor:
    """The v0-reduced form of an effective divisor, memoized."""
    cap = Config.iteration_cap() if cap is None else cap
    return _reduced(divisor, divisor.graph.validate_point(v0), cap)


@dataclass(frozen=True)
class ReductionResult:
    divisor: Optional[Divisor]
    failing_point: Optional[PointRef] = None
    shortfall: int = 0

    @property
    def certified_empty(self) -> bool:
        return self.divisor is None


def reduce_or_empty(divisor: Divisor, v0: PointRef, cap: Optional[int] = None) -> ReductionResult:
    """The v0-reduced representative of |D|, or a certificate that |D| is empty.

    Writes D = D⁺ − D⁻ and removes the chips of D⁻ one point at a time: reduce
    the effective part at q, then subtract D⁻(q) at q. Reducedness at q says
    nothing about the sign at q, so a shortfall there proves |D| = ∅.
    """
    v0 = divisor.graph.validate_point(v0)
    current = divisor.positive_part()
    debt = divisor.negative_part()
    for q in debt.support:
        reduced = reduced_form(current, q, cap)
        if reduced[q] < debt[q]:
            logger.debug(f"|{divisor}| is empty: {q} holds {reduced[q]} < {debt[q]}")
            return ReductionResult(None, q, debt[q] - reduced[q])
        current = reduced.add_chips(q, -debt[q])
    return ReductionResult(reduced_form(current, v0, cap))


@dataclass(frozen=True)
class SupportLocus:
    locus: ClosedLocus
    regions: Tuple[OpenRegion, ...]
    representatives: Dict[PointRef, Divisor] = field(repr=False, compare=False)

    def contains(self, point: PointRef) -> bool:
        return self.locus.contains(point)


def support_locus(divisor: Divisor, cap: Optional[int] = None) -> SupportLocus:
    """supp|D| as a closed locus plus the special regions filling its complement."""
    graph = divisor.graph
    representatives: Dict[PointRef, Divisor] = {}
    for w in graph.vertex_points():
        result = reduce_or_empty(divisor, w, cap)
        if result.certified_empty:
            raise EmptySystem(f"|{divisor}| is empty")
        representatives[w] = result.divisor
    marks = set()
    for rep in representatives.values():
        marks.update(rep.support)
    model = RefinedModel(graph, marks)

    regions: List[OpenRegion] = []
    covered = set()
    for w, rep in representatives.items():
        if rep[w] > 0 or w in covered:
            continue
        region = component_region(model, rep.support, w)
        regions.append(region)
        covered |= region.interior_vertices
    locus = ClosedLocus.from_vertices(model, [v for v in model.vertices if v not in covered])
    regions.sort(key=lambda r: min(r.interior_vertices))
    logger.debug(f"supp|{divisor}| = {locus.describe()} with {len(regions)} special regions outside")
    return SupportLocus(locus, tuple(regions), representatives)
