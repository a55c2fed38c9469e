"""Special open sets, the closure L(A), and rank-determining sets.

A special open set that avoids a finite set A is represented, up to
homeomorphism, by the model vertices W it contains on the graph refined at
A: the region is W together with every model edge touching W. Such a W is
valid when it is connected and every component of the rest of the model has
a vertex joined to W by at least two edges.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from networkx.utils import UnionFind
from tqdm import tqdm

from config import Config
from divisor import Divisor
from errors import (
    EmptyRegion, EmptySet, InternalGeometry, InvalidParameter, InvalidWitness,
    NotConnected, NotRds, NotSpanningTree, SearchCapExceeded,
)
from metric_graph import (
    ClosedLocus, MetricGraph, ModelEdge, OpenRegion, PointRef, RationalLike,
    RefinedModel, as_rational,
)
from reduction_engine import is_reduced

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComplementCertificate:
    component: ClosedLocus
    vertex: PointRef
    edges_into_region: int


@dataclass(frozen=True)
class SpecialWitness:
    vertices: frozenset
    region: OpenRegion
    complement_report: Tuple[ComplementCertificate, ...]
    avoided: frozenset

    def describe(self) -> str:
        return '{' + ', '.join(str(v) for v in sorted(self.vertices)) + '}'


@dataclass(frozen=True)
class RdsVerdict:
    points: Tuple[PointRef, ...]
    is_rds: bool
    witness: Optional[SpecialWitness] = None
    witness_divisor: Optional[Divisor] = None


@dataclass(frozen=True)
class MinimalityVerdict:
    points: Tuple[PointRef, ...]
    minimal: bool
    removable: Tuple[PointRef, ...]
    witnesses: Tuple[Tuple[PointRef, SpecialWitness], ...]


def _subset_key(vertices: frozenset):
    return tuple(sorted(v.sort_key() for v in vertices))


def _non_tree_edges(locus: ClosedLocus) -> List[ModelEdge]:
    """Edges left out of the spanning forest grown in edge-id order."""
    forest = UnionFind(locus.vertices)
    left_out = []
    for edge_id in sorted(locus.closed_edges):
        edge = locus.model.edge(edge_id)
        if forest[edge.start] == forest[edge.end]:
            left_out.append(edge)
        else:
            forest.union(edge.start, edge.end)
    return left_out


class RdsAnalyzer:
    def __init__(self, graph: MetricGraph, search_cap: Optional[int] = None,
                 show_progress: Optional[bool] = None):
        self.graph = graph
        self.search_cap = Config.search_cap() if search_cap is None else search_cap
        self.show_progress = Config.SHOW_PROGRESS if show_progress is None else show_progress

    def _normalize(self, points: Iterable[PointRef]) -> Tuple[PointRef, ...]:
        listed = [self.graph.validate_point(p) for p in points]
        unique = tuple(sorted(set(listed)))
        if len(unique) != len(listed):
            logger.warning(f"Dropped {len(listed) - len(unique)} duplicate point(s) from the set")
        return unique

    # Special regions

    def _certify(self, model: RefinedModel, vertices: frozenset) -> Optional[Tuple[OpenRegion, Tuple[ComplementCertificate, ...]]]:
        region = OpenRegion.from_vertices(model, vertices)
        certificates = []
        for component in region.complement_components():
            chosen = next(
                ((v, region.edges_into(v)) for v in sorted(component.vertices) if region.edges_into(v) >= 2),
                None,
            )
            if chosen is None:
                return None
            certificates.append(ComplementCertificate(component, *chosen))
        return region, tuple(certificates)

    def is_special_region(self, region: OpenRegion) -> bool:
        """Every complement component has a boundary point with out-degree at least 2.

        Cross-checked against Dhar's algorithm: the sum of the boundary points
        must be reduced with respect to a point of the region.
        """
        if region.is_empty:
            raise EmptyRegion("A special region must be nonempty")
        if not region.is_connected():
            raise NotConnected("A special region must be connected")
        components = region.complement_components()
        direct = all(any(region.edges_into(v) >= 2 for v in c.vertices) for c in components)
        if not components:
            return True
        boundary_sum = Divisor.from_points(region.model.base, sorted(region.boundary))
        burnt = is_reduced(boundary_sum, min(region.interior_vertices))
        if burnt != direct:
            raise InternalGeometry(f"Special-region checks disagree on {region.describe()}")
        return direct

    def _connected_subsets(self, model: RefinedModel, free: Sequence[PointRef],
                           seed: Optional[PointRef]) -> Iterator[frozenset]:
        """Connected vertex subsets of the free part, smallest first, canonical order per size."""
        allowed = set(free)
        neighbours: Dict[PointRef, set] = {v: set() for v in free}
        for v in free:
            for edge in model.incident(v):
                other = edge.other_end(v)
                if other in allowed:
                    neighbours[v].add(other)
        level = {frozenset([seed])} if seed is not None else {frozenset([v]) for v in free}
        while level:
            yield from sorted(level, key=_subset_key)
            grown = set()
            for subset in level:
                for v in subset:
                    for u in neighbours[v]:
                        if u not in subset:
                            grown.add(subset | {u})
            level = grown

    def special_avoiding(self, points: Iterable[PointRef], containing: Optional[PointRef] = None,
                         enumerate_all: bool = False) -> List[SpecialWitness]:
        """Special regions disjoint from A (optionally through a given point)."""
        avoided = self._normalize(points)
        if containing is not None:
            containing = self.graph.validate_point(containing)
            if containing in avoided:
                return []
        elif not avoided:
            raise EmptySet("The avoided set must be nonempty")
        marks = list(avoided) + ([containing] if containing is not None else [])
        model = RefinedModel(self.graph, marks)
        free = [v for v in model.vertices if v not in avoided]
        if len(free) > self.search_cap:
            raise SearchCapExceeded(
                f"{len(free)} free model vertices exceed the search cap of {self.search_cap}"
            )
        found: List[SpecialWitness] = []
        checked = 0
        subsets = self._connected_subsets(model, free, containing)
        for vertices in tqdm(subsets, desc='special sets', disable=not self.show_progress, leave=False):
            checked += 1
            certified = self._certify(model, vertices)
            if certified is None:
                continue
            region, report = certified
            found.append(SpecialWitness(vertices, region, report, frozenset(avoided)))
            if not enumerate_all:
                break
        logger.debug(f"Checked {checked} connected subsets avoiding {len(avoided)} point(s); {len(found)} special")
        return found

    # Closure and verdicts

    def l_closure(self, points: Iterable[PointRef]) -> ClosedLocus:
        """L(A): the complement of every special region that avoids A."""
        avoided = self._normalize(points)
        if not avoided:
            raise EmptySet("L(A) needs a nonempty set")
        covered = set()
        for witness in self.special_avoiding(avoided, enumerate_all=True):
            covered |= witness.vertices
        model = RefinedModel(self.graph, avoided)
        return ClosedLocus.from_vertices(model, [v for v in model.vertices if v not in covered])

    def l_closure_extend(self, points: Iterable[PointRef], more: Iterable[PointRef]) -> ClosedLocus:
        return self.l_closure(list(points) + list(more))

    def witness_divisor(self, witness: SpecialWitness) -> Divisor:
        """A divisor whose linear system is supported exactly on the witness complement.

        Boundary points get one chip each; every complement component gets one
        chip at the midpoint of each edge left out of its spanning forest.
        """
        region = witness.region
        if region.is_empty or not region.complement_components():
            raise InvalidWitness("A witness region must be nonempty and proper")
        model = region.model
        chips = list(sorted(region.boundary))
        for component in region.complement_components():
            chips.extend(model.midpoint(edge) for edge in _non_tree_edges(component))
        divisor = Divisor.from_points(self.graph, chips)
        if any(region.contains(p) for p in divisor.support):
            raise InvalidWitness(f"Witness divisor {divisor} meets the special region")
        if not is_reduced(divisor, min(region.interior_vertices)):
            raise InvalidWitness(f"Witness divisor {divisor} is not reduced from inside the region")
        return divisor

    def is_rank_determining(self, points: Iterable[PointRef]) -> RdsVerdict:
        avoided = self._normalize(points)
        if not avoided:
            raise EmptySet("A rank-determining set must be nonempty")
        found = self.special_avoiding(avoided)
        if not found:
            logger.info(f"{{{', '.join(str(p) for p in avoided)}}} is rank-determining")
            return RdsVerdict(avoided, True)
        witness = found[0]
        logger.info(f"Not rank-determining: special region {witness.describe()} avoids the set")
        return RdsVerdict(avoided, False, witness, self.witness_divisor(witness))

    def is_minimal_rds(self, points: Iterable[PointRef]) -> MinimalityVerdict:
        """Minimal iff every point is the only point of the set in some special region."""
        avoided = self._normalize(points)
        if not self.is_rank_determining(avoided).is_rds:
            raise NotRds("Minimality is only defined for rank-determining sets")
        removable, witnesses = [], []
        for point in avoided:
            rest = [p for p in avoided if p != point]
            found = self.special_avoiding(rest, containing=point)
            if found:
                witnesses.append((point, found[0]))
            else:
                removable.append(point)
        return MinimalityVerdict(avoided, not removable, tuple(removable), tuple(witnesses))

    # Constructions

    def _check_tree(self, tree: Iterable[str]) -> frozenset:
        tree = frozenset(tree)
        for edge_id in tree:
            self.graph.edge(edge_id)
        if len(tree) != len(self.graph.vertices) - 1:
            raise NotSpanningTree(f"A spanning tree has {len(self.graph.vertices) - 1} edges, got {len(tree)}")
        forest = UnionFind(self.graph.vertices)
        for edge_id in sorted(tree):
            u, v = self.graph.edge(edge_id).ends
            if forest[u] == forest[v]:
                raise NotSpanningTree(f"Edge {edge_id!r} closes a cycle")
            forest.union(u, v)
        return tree

    def spanning_tree(self) -> frozenset:
        """The spanning tree grown greedily in edge-id order."""
        forest = UnionFind(self.graph.vertices)
        tree = set()
        for edge in sorted(self.graph.edges, key=lambda e: e.id):
            u, v = edge.ends
            if forest[u] != forest[v]:
                forest.union(u, v)
                tree.add(edge.id)
        return frozenset(tree)

    def construct_rds_spanning(self, tree: Optional[Iterable[str]] = None, base: Optional[PointRef] = None,
                               cycle_points: Optional[Mapping[str, RationalLike]] = None) -> Tuple[PointRef, ...]:
        """A base point plus one point inside every edge outside a spanning tree (g + 1 points)."""
        tree = self.spanning_tree() if tree is None else self._check_tree(tree)
        base = self.graph.vertex_points()[0] if base is None else self.graph.validate_point(base)
        cycle_points = cycle_points or {}
        chosen = {base}
        for edge in sorted(self.graph.edges, key=lambda e: e.id):
            if edge.id in tree:
                continue
            offset = as_rational(cycle_points.get(edge.id, edge.length / 2), f"cycle point on {edge.id}")
            if not 0 < offset < edge.length:
                raise InvalidParameter(f"Cycle point on {edge.id!r} must lie inside the edge")
            chosen.add(self.graph.point(edge.id, offset))
        return tuple(sorted(chosen))

    def minimal_rds_search(self, pool: Iterable[PointRef], max_size: int) -> List[Tuple[PointRef, ...]]:
        """Experimental: every minimal rank-determining subset of ``pool`` up to ``max_size`` points."""
        candidates = self._normalize(pool)
        if len(candidates) > self.search_cap:
            raise SearchCapExceeded(f"Pool of {len(candidates)} points exceeds the search cap of {self.search_cap}")
        found: List[Tuple[PointRef, ...]] = []
        for size in range(1, min(max_size, len(candidates)) + 1):
            subsets = itertools.combinations(candidates, size)
            for subset in tqdm(subsets, desc=f"minimal RDS size {size}", disable=not self.show_progress, leave=False):
                if any(set(smaller) <= set(subset) for smaller in found):
                    continue
                if self.is_rank_determining(subset).is_rds and self.is_minimal_rds(subset).minimal:
                    found.append(subset)
        logger.info(f"Experimental search found {len(found)} minimal rank-determining set(s)")
        return found
