import json

import pytest

from conftest import V, fixture_path
from errors import (
    DuplicateId, InvalidParameter, LoopEdge, NonpositiveLength, UnknownReference, WorkspaceParseError,
)
from workspace_io import load_workspace, parse_workspace, save_workspace, serialize_workspace

MINIMAL_GRAPH = {'vertices': ['a', 'b'], 'edges': [{'id': 'e', 'ends': ['a', 'b'], 'length': '2'}]}


def document(**sections):
    return json.dumps(dict({'graph': MINIMAL_GRAPH}, **sections))


class TestFixtures:
    @pytest.mark.parametrize('name', ['fig2.json', 'k4.json', 'cycle2.json'])
    def test_saving_reproduces_the_file(self, name):
        path = fixture_path(name)
        with open(path, encoding='utf-8') as f:
            text = f.read()
        assert serialize_workspace(load_workspace(path)) == text

    def test_save_and_reload(self, fig2, tmp_path):
        target = tmp_path / 'copy.json'
        save_workspace(fig2, str(target))
        reloaded = load_workspace(str(target))
        assert reloaded.divisors == fig2.divisors
        assert reloaded.points == fig2.points
        assert reloaded.sets == fig2.sets


class TestParsing:
    def test_minimal_file(self):
        workspace = parse_workspace(document())
        assert workspace.graph.genus == 0
        assert workspace.divisors == workspace.points == workspace.sets == {}

    def test_rationals_are_normalized(self):
        workspace = parse_workspace(document(points={'m': {'edge': 'e', 'offset': '2/2'}}))
        assert workspace.points['m'] == workspace.graph.point('e', 1)
        assert '"offset": "1"' in serialize_workspace(workspace)

    def test_invalid_json_reports_the_line(self):
        with pytest.raises(WorkspaceParseError) as error:
            parse_workspace('{\n  "graph": \n}')
        assert error.value.line == 3

    def test_missing_graph(self):
        with pytest.raises(WorkspaceParseError) as error:
            parse_workspace('{"points": {}}')
        assert error.value.path == '$'

    def test_unknown_section(self):
        with pytest.raises(WorkspaceParseError):
            parse_workspace(document(notes={}))

    def test_zero_length(self):
        raw = {'vertices': ['a', 'b'], 'edges': [{'id': 'e', 'ends': ['a', 'b'], 'length': '0'}]}
        with pytest.raises(NonpositiveLength):
            parse_workspace(json.dumps({'graph': raw}))

    def test_float_length(self):
        raw = {'vertices': ['a', 'b'], 'edges': [{'id': 'e', 'ends': ['a', 'b'], 'length': 1.5}]}
        with pytest.raises(InvalidParameter):
            parse_workspace(json.dumps({'graph': raw}))

    def test_loops_need_opt_in(self):
        raw = {'vertices': ['a'], 'edges': [{'id': 'e', 'ends': ['a', 'a'], 'length': '1'}]}
        with pytest.raises(LoopEdge):
            parse_workspace(json.dumps({'graph': raw}))
        assert parse_workspace(json.dumps({'graph': raw}), subdivide_loops=True).graph.genus == 1

    def test_duplicate_names(self):
        text = '{"graph": %s, "points": {"p": {"vertex": "a"}, "p": {"vertex": "b"}}}' % json.dumps(MINIMAL_GRAPH)
        with pytest.raises(DuplicateId):
            parse_workspace(text)

    @pytest.mark.parametrize('raw', [
        {'vertex': 'a', 'edge': 'e'},
        {'edge': 'e'},
        ['a'],
    ])
    def test_malformed_points(self, raw):
        with pytest.raises(WorkspaceParseError) as error:
            parse_workspace(document(points={'p': raw}))
        assert error.value.path == 'points.p'

    def test_unknown_vertex(self):
        with pytest.raises(UnknownReference):
            parse_workspace(document(sets={'s': [{'vertex': 'z'}]}))

    def test_coefficients_must_be_integers(self):
        with pytest.raises(WorkspaceParseError) as error:
            parse_workspace(document(divisors={'D': [{'vertex': 'a', 'coeff': '2'}]}))
        assert error.value.path == 'divisors.D[0].coeff'

    def test_missing_coefficient(self):
        with pytest.raises(WorkspaceParseError):
            parse_workspace(document(divisors={'D': [{'vertex': 'a'}]}))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(WorkspaceParseError):
            load_workspace(str(tmp_path / 'missing.json'))


class TestNames:
    def test_resolve_point(self, fig2):
        assert fig2.resolve_point('v1') == fig2.graph.point('e1', '1/2')
        assert fig2.resolve_point('w3') == V('w3')
        assert fig2.resolve_point('e2@1/3') == fig2.graph.point('e2', '1/3')
        with pytest.raises(InvalidParameter):
            fig2.resolve_point('e2@3/2')
        with pytest.raises(UnknownReference):
            fig2.resolve_point('nowhere')

    def test_labels(self, fig2):
        assert fig2.label(V('w1')) == 'w1'
        assert fig2.label(fig2.graph.point('e1', '1/2')) == 'v1'
        assert fig2.label(fig2.graph.point('e7', '1/2')) == 'e7@1/2'
        assert fig2.describe_points([V('w4'), fig2.points['v1']]) == '{v1, w4}'

    def test_unknown_names(self, fig2):
        with pytest.raises(UnknownReference):
            fig2.divisor('D9')
        with pytest.raises(UnknownReference):
            fig2.point_set('nothing')
