"""Linear-system emptiness, divisor rank over finite test sets, and Riemann-Roch checks."""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from config import Config
from divisor import Divisor, canonical_divisor
from errors import EmptySet, InvalidVertexSet, NotUnitGraph, NotVertexSupported
from finite_graph_oracle import FiniteGraph
from metric_graph import MetricGraph, PointRef
from reduction_engine import reduce_or_empty

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankReport:
    rank: int
    failing_witness: Optional[Divisor]
    levels_checked: int


@dataclass(frozen=True)
class RiemannRochReport:
    divisor: Divisor
    rank: int
    dual_rank: int
    degree: int
    genus: int

    @property
    def lhs(self) -> int:
        return self.rank - self.dual_rank

    @property
    def rhs(self) -> int:
        return self.degree + 1 - self.genus

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


class RankEngine:
    """Rank computations on one graph, with a cache of emptiness tests."""

    def __init__(self, graph: MetricGraph, cap: Optional[int] = None, show_progress: Optional[bool] = None):
        self.graph = graph
        self.cap = cap
        self.show_progress = Config.SHOW_PROGRESS if show_progress is None else show_progress
        self._nonempty: Dict[Divisor, Optional[Divisor]] = {}

    def _witness(self, divisor: Divisor) -> Optional[Divisor]:
        if divisor not in self._nonempty:
            if divisor.degree < 0:
                self._nonempty[divisor] = None
            else:
                base = self.graph.vertex_points()[0]
                self._nonempty[divisor] = reduce_or_empty(divisor, base, self.cap).divisor
        return self._nonempty[divisor]

    def linear_system_nonempty(self, divisor: Divisor) -> Tuple[bool, Optional[Divisor]]:
        """Whether |D| has an element; the witness is the reduced representative."""
        witness = self._witness(divisor)
        return witness is not None, witness

    def _check_base_set(self, base_set: Optional[Iterable[PointRef]]) -> List[PointRef]:
        if base_set is None:
            return list(self.graph.vertex_points())
        points = sorted({self.graph.validate_point(p) for p in base_set})
        missing = set(self.graph.vertex_points()) - set(points)
        if missing:
            raise InvalidVertexSet(f"Vertex set misses graph vertices {sorted(str(v) for v in missing)}")
        return points

    def _rank_over(self, divisor: Divisor, points: Sequence[PointRef], label: str) -> RankReport:
        tests = 1
        witness = self._witness(divisor)
        if witness is None:
            return RankReport(-1, Divisor.zero(self.graph), tests)
        # Linearly equivalent divisors have the same rank; test against the reduced witness.
        size = 0
        while True:
            size += 1
            removals = itertools.combinations_with_replacement(points, size)
            for removal in tqdm(removals, total=comb(len(points) + size - 1, size),
                                desc=f"{label} level {size}", disable=not self.show_progress, leave=False):
                tests += 1
                taken = Divisor.from_points(self.graph, removal)
                if self._witness(witness - taken) is None:
                    logger.debug(f"{label}({divisor}) = {size - 1}; fails at E = {taken}")
                    return RankReport(size - 1, taken, tests)

    def rank(self, divisor: Divisor, base_set: Optional[Iterable[PointRef]] = None,
             shortcut: Optional[bool] = None) -> RankReport:
        """r(D), testing effective divisors supported on a vertex set."""
        shortcut = Config.RR_SHORTCUT if shortcut is None else shortcut
        points = self._check_base_set(base_set)
        if shortcut and divisor.degree > 2 * self.graph.genus - 2:
            return RankReport(divisor.degree - self.graph.genus, None, 0)
        return self._rank_over(divisor, points, 'r')

    def restricted_rank(self, divisor: Divisor, points: Iterable[PointRef]) -> RankReport:
        """r_A(D): the rank definition with E restricted to points of A."""
        points = sorted({self.graph.validate_point(p) for p in points})
        if not points:
            raise EmptySet("The restricted rank needs a nonempty set of points")
        return self._rank_over(divisor, points, 'r_A')

    def rr_verify(self, divisor: Divisor) -> RiemannRochReport:
        """Both sides of r(D) − r(K − D) = deg(D) + 1 − g, ranks computed in full."""
        dual = canonical_divisor(self.graph) - divisor
        report = RiemannRochReport(
            divisor=divisor,
            rank=self.rank(divisor, shortcut=False).rank,
            dual_rank=self.rank(dual, shortcut=False).rank,
            degree=divisor.degree,
            genus=self.graph.genus,
        )
        if not report.equal:
            logger.error(f"Riemann-Roch mismatch for {divisor}: {report.lhs} != {report.rhs}")
        return report

    def is_rank_preserved(self, divisor: Divisor, base_sets: Iterable[Iterable[PointRef]]) -> bool:
        """Whether every given vertex set yields the same rank."""
        ranks = {self.rank(divisor, base_set, shortcut=False).rank for base_set in base_sets}
        return len(ranks) <= 1

    def fg_rank(self, divisor: Divisor) -> int:
        """Baker-Norine rank of a vertex-supported divisor on the underlying finite graph."""
        return fg_rank(self.graph, divisor, self.cap)


def fg_rank(graph: MetricGraph, divisor: Divisor, cap: Optional[int] = None) -> int:
    if not graph.is_unit():
        raise NotUnitGraph("The finite-graph rank needs every edge length to be exactly 1")
    if any(not p.is_vertex for p in divisor.support):
        raise NotVertexSupported(f"{divisor} has chips off the vertices")
    finite = FiniteGraph.from_metric_graph(graph)
    return finite.rank({p.vertex: c for p, c in divisor.items()}, cap)


def linear_system_nonempty(divisor: Divisor, cap: Optional[int] = None) -> Tuple[bool, Optional[Divisor]]:
    return RankEngine(divisor.graph, cap).linear_system_nonempty(divisor)


def rank(divisor: Divisor, base_set: Optional[Iterable[PointRef]] = None, shortcut: Optional[bool] = None,
         cap: Optional[int] = None) -> RankReport:
    return RankEngine(divisor.graph, cap).rank(divisor, base_set, shortcut)


def restricted_rank(divisor: Divisor, points: Iterable[PointRef], cap: Optional[int] = None) -> RankReport:
    return RankEngine(divisor.graph, cap).restricted_rank(divisor, points)


def rr_verify(divisor: Divisor, cap: Optional[int] = None) -> RiemannRochReport:
    return RankEngine(divisor.graph, cap).rr_verify(divisor)
