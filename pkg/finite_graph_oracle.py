"""Chip-firing on finite multigraphs: q-reduced configurations and Baker-Norine rank.

It shares nothing with the metric machinery beyond graph import; ranks
computed on a unit-length metric graph are checked against it.
"""

import itertools
import logging
from collections import defaultdict
from typing import Dict, Iterable, Mapping, Optional, Tuple

from config import Config
from errors import IterationCapExceeded, UnknownReference
from metric_graph import MetricGraph

logger = logging.getLogger(__name__)

Chips = Dict[str, int]


class FiniteGraph:
    """A finite connected multigraph given by edge multiplicities."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[Tuple[str, str]]):
        self.vertices: Tuple[str, ...] = tuple(sorted(vertices))
        self._multiplicity: Dict[str, Dict[str, int]] = {v: defaultdict(int) for v in self.vertices}
        for u, v in edges:
            if u not in self._multiplicity or v not in self._multiplicity:
                raise UnknownReference(f"Edge ({u}, {v}) references an unknown vertex")
            self._multiplicity[u][v] += 1
            self._multiplicity[v][u] += 1

    @classmethod
    def from_metric_graph(cls, graph: MetricGraph) -> 'FiniteGraph':
        return cls(graph.vertices, [e.ends for e in graph.edges])

    @property
    def genus(self) -> int:
        edge_count = sum(sum(m.values()) for m in self._multiplicity.values()) // 2
        return edge_count - len(self.vertices) + 1

    def multiplicity(self, u: str, v: str) -> int:
        return self._multiplicity[u].get(v, 0)

    def degree(self, v: str) -> int:
        return sum(self._multiplicity[v].values())

    def _key(self, chips: Mapping[str, int]) -> Tuple[int, ...]:
        return tuple(chips.get(v, 0) for v in self.vertices)

    def unburnt(self, chips: Mapping[str, int], q: str) -> frozenset:
        """Run the burning process from q; return the vertices the fire never reaches."""
        burnt = {q}
        spreading = True
        while spreading:
            spreading = False
            for v in self.vertices:
                if v in burnt:
                    continue
                fire = sum(self._multiplicity[v].get(w, 0) for w in burnt)
                if chips.get(v, 0) < fire:
                    burnt.add(v)
                    spreading = True
        return frozenset(self.vertices) - burnt

    def is_q_reduced(self, chips: Mapping[str, int], q: str) -> bool:
        if any(chips.get(v, 0) < 0 for v in self.vertices if v != q):
            return False
        return not self.unburnt(chips, q)

    def fire(self, chips: Mapping[str, int], group: Iterable[str]) -> Chips:
        group = set(group)
        result = dict(chips)
        for v in group:
            for w, m in self._multiplicity[v].items():
                if w not in group:
                    result[v] = result.get(v, 0) - m
                    result[w] = result.get(w, 0) + m
        return result

    def reduce_effective(self, chips: Mapping[str, int], q: str, cap: Optional[int] = None) -> Chips:
        """Fire the unburnt set until the burning process reaches every vertex."""
        cap = Config.iteration_cap() if cap is None else cap
        current = dict(chips)
        for _ in range(cap + 1):
            stuck = self.unburnt(current, q)
            if not stuck:
                return {v: c for v, c in current.items() if c}
            current = self.fire(current, stuck)
        raise IterationCapExceeded(f"Finite reduction at {q} did not finish within {cap} firings")

    def reduce_or_empty(self, chips: Mapping[str, int], q: str, cap: Optional[int] = None) -> Optional[Chips]:
        current = {v: c for v, c in chips.items() if c > 0}
        debt = {v: -c for v, c in chips.items() if c < 0}
        for p in sorted(debt):
            reduced = self.reduce_effective(current, p, cap)
            if reduced.get(p, 0) < debt[p]:
                return None
            current = dict(reduced)
            current[p] = reduced.get(p, 0) - debt[p]
        return self.reduce_effective(current, q, cap)

    def rank(self, chips: Mapping[str, int], cap: Optional[int] = None) -> int:
        """Baker-Norine rank by increasing multiset size over the vertices."""
        memo: Dict[Tuple[int, ...], bool] = {}

        def nonempty(config: Mapping[str, int]) -> bool:
            key = self._key(config)
            if key not in memo:
                memo[key] = sum(key) >= 0 and self.reduce_or_empty(config, self.vertices[0], cap) is not None
            return memo[key]

        if not nonempty(chips):
            return -1
        degree = sum(chips.values())
        for size in range(1, degree + 2):
            for removal in itertools.combinations_with_replacement(self.vertices, size):
                config = dict(chips)
                for v in removal:
                    config[v] = config.get(v, 0) - 1
                if not nonempty(config):
                    return size - 1
        return degree
