import os
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from divisor import Divisor
from metric_graph import Edge, MetricGraph, PointRef, validate_graph
from workspace_io import load_workspace

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')

collect_ignore = ['examples']


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long randomized suites (deselect with -m "not slow")')


def V(name: str) -> PointRef:
    return PointRef.at_vertex(name)


@pytest.fixture
def fig2():
    return load_workspace(fixture_path('fig2.json'))


@pytest.fixture
def k4():
    return load_workspace(fixture_path('k4.json'))


@pytest.fixture
def cycle2():
    return load_workspace(fixture_path('cycle2.json'))


@pytest.fixture
def unit_path():
    """w1 - w2 - w3 with unit edges."""
    return validate_graph({
        'vertices': ['w1', 'w2', 'w3'],
        'edges': [
            {'id': 'e1', 'ends': ['w1', 'w2'], 'length': '1'},
            {'id': 'e2', 'ends': ['w2', 'w3'], 'length': '1'},
        ],
    })


@pytest.fixture
def star_tree():
    """A star with uneven rational arms."""
    return validate_graph({
        'vertices': ['c', 'a', 'b', 'd'],
        'edges': [
            {'id': 'ea', 'ends': ['c', 'a'], 'length': '1/2'},
            {'id': 'eb', 'ends': ['c', 'b'], 'length': '2'},
            {'id': 'ed', 'ends': ['c', 'd'], 'length': '3/4'},
        ],
    })


# Hypothesis strategies

lengths = st.builds(Fraction, st.integers(min_value=1, max_value=24), st.integers(min_value=1, max_value=12))


@st.composite
def metric_graphs(draw, max_vertices=6, max_edges=9, max_genus=None, unit=False):
    """Connected loopless multigraphs: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_value=2, max_value=max_vertices))
    vertices = [f"w{k}" for k in range(1, n + 1)]
    pairs = [(vertices[draw(st.integers(min_value=0, max_value=k - 1))], vertices[k]) for k in range(1, n)]
    extra_room = max_edges - len(pairs)
    if max_genus is not None:
        extra_room = min(extra_room, max_genus)
    extra = draw(st.integers(min_value=0, max_value=max(extra_room, 0)))
    for _ in range(extra):
        i = draw(st.integers(min_value=0, max_value=n - 1))
        j = draw(st.integers(min_value=0, max_value=n - 2))
        j = j if j < i else j + 1
        pairs.append((vertices[i], vertices[j]))
    edges = [
        Edge(f"e{k}", pair, Fraction(1) if unit else draw(lengths))
        for k, pair in enumerate(pairs, start=1)
    ]
    return MetricGraph(vertices, edges)


@st.composite
def points_on(draw, graph: MetricGraph, vertices_only=False):
    if vertices_only or draw(st.booleans()):
        return PointRef.at_vertex(draw(st.sampled_from(sorted(graph.vertices))))
    edge = draw(st.sampled_from(sorted(graph.edges, key=lambda e: e.id)))
    fraction = draw(st.builds(Fraction, st.integers(min_value=1, max_value=11), st.just(12)))
    return graph.point(edge.id, edge.length * fraction)


@st.composite
def divisors_on(draw, graph: MetricGraph, min_degree=0, max_degree=8, effective=True, vertices_only=False):
    degree = draw(st.integers(min_value=min_degree, max_value=max_degree))
    positive = [draw(points_on(graph, vertices_only)) for _ in range(max(degree, 0))]
    divisor = Divisor.from_points(graph, positive)
    if not effective:
        debt = draw(st.integers(min_value=0, max_value=2))
        negative = [draw(points_on(graph, vertices_only)) for _ in range(debt)]
        divisor = divisor - Divisor.from_points(graph, negative)
    return divisor


@st.composite
def graphs_with_divisors(draw, effective=True, max_degree=8, **graph_options):
    graph = draw(metric_graphs(**graph_options))
    return graph, draw(divisors_on(graph, max_degree=max_degree, effective=effective))


@st.composite
def rescale_factors(draw, graph: MetricGraph):
    """A positive rational factor for every edge, between 1/4 and 4."""
    factor = st.builds(Fraction, st.integers(min_value=1, max_value=16), st.just(4))
    return {e.id: draw(factor) for e in graph.edges}
