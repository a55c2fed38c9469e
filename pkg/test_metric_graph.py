from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import V, metric_graphs, points_on, rescale_factors
from errors import (
    Disconnected, DuplicateId, InvalidParameter, LoopEdge, NoEdges, NonpositiveFactor,
    NonpositiveLength, UnknownReference,
)
from metric_graph import (
    ClosedLocus, OpenRegion, PointRef, RefinedModel, as_rational, component_region, distance,
    format_rational, midpoint_cuts, transform, validate_graph,
)


def raw_graph(edges, vertices=('w1', 'w2')):
    return {
        'vertices': list(vertices),
        'edges': [{'id': i, 'ends': list(ends), 'length': length} for i, ends, length in edges],
    }


class TestValidation:
    def test_fig2_genus(self, fig2):
        assert fig2.graph.genus == 4
        assert len(fig2.graph.vertices) == 4

    def test_loop_rejected_by_default(self):
        with pytest.raises(LoopEdge) as error:
            validate_graph(raw_graph([('e1', ('w1', 'w2'), '1'), ('e2', ('w1', 'w1'), '1')]))
        assert error.value.edge_id == 'e2'

    def test_loop_subdivided_on_request(self):
        graph = validate_graph(raw_graph([('e1', ('w1', 'w2'), '1'), ('e2', ('w1', 'w1'), '1')]),
                               subdivide_loops=True)
        assert 'e2.m' in graph.vertices
        assert graph.edge('e2.a').length == Fraction(1, 2)
        assert graph.genus == 1

    @pytest.mark.parametrize('edges, vertices, error', [
        ([('e1', ('w1', 'w2'), '0')], ('w1', 'w2'), NonpositiveLength),
        ([('e1', ('w1', 'w2'), '1')], ('w1', 'w2', 'w3'), Disconnected),
        ([('e1', ('w1', 'w2'), '1'), ('e1', ('w1', 'w2'), '1')], ('w1', 'w2'), DuplicateId),
        ([], ('w1', 'w2'), NoEdges),
        ([('e1', ('w1', 'w9'), '1')], ('w1', 'w2'), UnknownReference),
    ])
    def test_invalid_graphs(self, edges, vertices, error):
        with pytest.raises(error):
            validate_graph(raw_graph(edges, vertices))

    def test_floats_are_refused(self):
        with pytest.raises(InvalidParameter):
            validate_graph(raw_graph([('e1', ('w1', 'w2'), 0.5)]))

    def test_rational_parsing(self):
        assert as_rational('6/4') == Fraction(3, 2)
        assert as_rational(3) == Fraction(3)
        assert format_rational(Fraction(6, 4)) == '3/2'
        with pytest.raises(InvalidParameter):
            as_rational('1/0')
        with pytest.raises(InvalidParameter):
            as_rational(True)


class TestPoints:
    def test_offsets_at_the_ends_become_vertices(self, unit_path):
        assert unit_path.point('e1', 0) == V('w1')
        assert unit_path.point('e1', '1') == V('w2')
        assert not unit_path.point('e1', '1/3').is_vertex

    def test_offset_outside_edge(self, unit_path):
        with pytest.raises(InvalidParameter):
            unit_path.point('e1', '3/2')

    def test_offsets_measured_from_smaller_end(self):
        graph = validate_graph(raw_graph([('e1', ('w2', 'w1'), '2')]))
        assert graph.point_from_end('e1', 'w2', '1/2') == graph.point('e1', '3/2')

    def test_canonical_order_puts_vertices_first(self, fig2):
        points = sorted([fig2.points['v1'], V('w4'), V('w1')])
        assert points == [V('w1'), V('w4'), fig2.points['v1']]
        assert str(fig2.points['v1']) == 'e1@1/2'

    def test_distance(self, star_tree):
        model = RefinedModel(star_tree)
        assert distance(model, V('a'), V('b')) == Fraction(5, 2)
        assert distance(model, star_tree.point_from_end('eb', 'c', '1/2'), V('d')) == Fraction(5, 4)


class TestRefinedModel:
    def test_refining_at_an_edge_point(self, fig2):
        model = RefinedModel(fig2.graph, [fig2.points['v1'], V('w2')])
        assert len(model.vertices) == 5
        assert len(model.edges) == 8
        assert model.genus == fig2.graph.genus
        assert model.edge_containing(fig2.points['v1']) is None
        assert model.edge_containing(fig2.graph.point('e1', '1/4')).id == 'e1:0'

    def test_point_along_runs_past_marks(self, cycle2):
        model = RefinedModel(cycle2.graph, [cycle2.points['p']])
        first = model.edge('e1:0')
        assert model.point_along(first, V('w1'), Fraction(1, 4)) == cycle2.graph.point('e1', '1/4')
        assert model.refine([cycle2.points['p']]) is model

    def test_regions_and_loci(self, cycle2):
        model = RefinedModel(cycle2.graph, [cycle2.points['p']])
        region = component_region(model, [cycle2.points['p']], V('w1'))
        assert region.interior_vertices == {V('w1'), V('w2')}
        assert region.boundary == {cycle2.points['p']}
        assert region.edges_into(cycle2.points['p']) == 2
        assert region.contains(cycle2.points['q'])
        assert not region.contains(cycle2.points['p'])
        complement = region.complement()
        assert complement.vertices == {cycle2.points['p']}
        assert complement.outdeg(cycle2.points['p']) == 2

    def test_blocked_seed_gives_empty_region(self, cycle2):
        model = RefinedModel(cycle2.graph)
        assert component_region(model, [V('w1')], V('w1')).is_empty

    def test_locus_components(self, fig2):
        model = RefinedModel(fig2.graph)
        locus = ClosedLocus.from_vertices(model, [V('w1'), V('w2'), V('w3')], induced=False)
        assert len(locus.components()) == 3
        assert not locus.is_connected()
        induced = ClosedLocus.from_vertices(model, [V('w1'), V('w2'), V('w3')])
        assert induced.is_connected()
        assert induced.genus == 2
        assert induced.boundary() == {V('w1'), V('w2'), V('w3')}

    def test_open_region_must_be_canonical(self, cycle2):
        model = RefinedModel(cycle2.graph)
        with pytest.raises(InvalidParameter):
            OpenRegion(model, frozenset([V('w1')]), frozenset(), frozenset())


class TestHomeomorphisms:
    def test_rescale_maps_offsets(self, cycle2):
        image = transform(cycle2.graph, rescale='2')
        assert image.graph.edge('e1').length == 2
        assert image.map_point(cycle2.points['p']) == image.graph.point('e1', 1)

    def test_rescale_rejects_nonpositive_factor(self, cycle2):
        with pytest.raises(NonpositiveFactor):
            transform(cycle2.graph, rescale={'e1': '0'})

    def test_midpoint_subdivision(self, cycle2):
        image = transform(cycle2.graph, subdivide=midpoint_cuts(cycle2.graph))
        assert image.map_point(cycle2.points['p']) == PointRef.at_vertex('e1~1')
        assert image.graph.genus == cycle2.graph.genus
        assert image.map_point(cycle2.graph.point('e2', '3/4')) == image.graph.point_from_end('e2.1', 'e2~1', '1/4')

    def test_exactly_one_transform(self, cycle2):
        with pytest.raises(InvalidParameter):
            transform(cycle2.graph)


@given(metric_graphs())
@settings(max_examples=50, deadline=None)
def test_genus_is_edges_minus_vertices_plus_one(graph):
    assert graph.genus == len(graph.edges) - len(graph.vertices) + 1
    midpoints = [graph.midpoint(e.id) for e in graph.edges]
    assert RefinedModel(graph, midpoints).genus == graph.genus


class TestFig2Geometry:
    def test_distance_from_v1_to_w3(self, fig2):
        assert distance(RefinedModel(fig2.graph), fig2.points['v1'], V('w3')) == Fraction(3, 2)

    @pytest.mark.parametrize('blocked, pieces', [
        (('v1', 'w3', 'w4'), ['[w3, w4, e3@1/2]', '{e1@1/2}']),
        (('v1', 'v2', 'w4'), ['[w4, e3@1/2]', '{e1@1/2}']),
    ])
    def test_region_around_v0(self, fig2, blocked, pieces):
        model = RefinedModel(fig2.graph, fig2.points.values())
        region = component_region(model, [fig2.resolve_point(name) for name in blocked], fig2.points['v0'])
        assert [c.describe() for c in region.complement_components()] == pieces

    def test_rescaling_one_edge(self, fig2):
        image = transform(fig2.graph, rescale={'e1': '7/3'})
        moved = image.map_point(fig2.points['v1'])
        assert moved == image.graph.point('e1', '7/6')
        assert image.map_point(fig2.points['v2']) == fig2.points['v2']
        back = transform(image.graph, rescale={'e1': '3/7'})
        assert back.map_point(moved) == fig2.points['v1']


class TestFreshNames:
    def test_subdivision_avoids_taken_ids(self):
        graph = validate_graph(raw_graph(
            [('e1', ('w1', 'w2'), '2'), ('e1.0', ('w2', 'e1~1'), '1')],
            vertices=('w1', 'w2', 'e1~1'),
        ))
        image = transform(graph, subdivide={'e1': ['1']})
        assert image.map_point(graph.point('e1', 1)) == V("e1~1'")
        assert image.graph.edge("e1.0'").length == 1
        assert image.map_point(graph.point('e1', '1/2')) == image.graph.point_from_end("e1.0'", 'w1', '1/2')
        assert image.graph.edge('e1.0').ends == ('w2', 'e1~1')
        assert image.graph.genus == 0

    def test_loop_subdivision_avoids_taken_ids(self):
        graph = validate_graph(raw_graph(
            [('e1', ('w1', 'w2'), '1'), ('e2', ('w1', 'w1'), '1'), ('e3', ('w2', 'e2.m'), '1')],
            vertices=('w1', 'w2', 'e2.m'),
        ), subdivide_loops=True)
        assert "e2.m'" in graph.vertices
        assert graph.edge('e2.a').ends == ('w1', "e2.m'")
        assert graph.genus == 1


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_distance_is_a_metric(data):
    graph = data.draw(metric_graphs(max_vertices=5, max_edges=7))
    p, q, r = (data.draw(points_on(graph)) for _ in range(3))
    model = RefinedModel(graph)
    assert distance(model, p, q) == distance(model, q, p)
    assert distance(model, p, r) <= distance(model, p, q) + distance(model, q, r)
    assert (distance(model, p, q) == 0) == (p == q)


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_rescaling_back_is_the_identity(data):
    graph = data.draw(metric_graphs())
    factors = data.draw(rescale_factors(graph))
    points = data.draw(st.lists(points_on(graph), min_size=1, max_size=4))
    image = transform(graph, rescale=factors)
    back = transform(image.graph, rescale={edge_id: 1 / f for edge_id, f in factors.items()})
    assert back.map_points(image.map_points(points)) == points
    for edge in graph.edges:
        assert back.graph.edge(edge.id).length == edge.length
