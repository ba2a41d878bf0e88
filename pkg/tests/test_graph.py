import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from girgfpp.graph import SpatialGraph, read_sgx, write_sgx
from girgfpp.spatial import ContractError, PointSet


def small(lengths=None):
    pts = PointSet([[0.0], [0.1], [0.2], [0.3]])
    return SpatialGraph(pts, [1, 2, 3, 4], [(2, 1), (0, 1), (3, 2)], lengths)


def test_canonical_edges_and_lengths_follow():
    g = small([5.0, 1.0, 7.0])
    assert g.edges.tolist() == [[0, 1], [1, 2], [2, 3]]
    assert g.lengths.tolist() == [1.0, 5.0, 7.0]
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.degrees().tolist() == [1, 2, 2, 1]
    assert g.edge_index(2, 1) == 1 and g.edge_index(0, 3) == -1


def test_contracts():
    pts = PointSet([[0.0], [0.1]])
    with pytest.raises(ContractError):
        SpatialGraph(pts, [1, 1], [(0, 0)])
    with pytest.raises(ContractError):
        SpatialGraph(pts, [1, 1], [(0, 1), (1, 0)])
    with pytest.raises(ContractError):
        SpatialGraph(pts, [1, 0.5], [])
    with pytest.raises(ContractError):
        SpatialGraph(pts, [1, 1], [(0, 1)], [-1.0])


@given(st.sets(st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda t: t[0] < t[1]), max_size=30))
def test_adjacency_symmetric(edges):
    pts = PointSet(np.linspace(-0.4, 0.4, 10).reshape(-1, 1))
    g = SpatialGraph(pts, np.ones(10), sorted(edges) or np.zeros((0, 2)))
    for u in range(10):
        for v in g.neighbors(u).tolist():
            assert u in g.neighbors(v).tolist()
    assert g.edge_set(by_key=False) == set(edges)


def test_induced_keeps_keys():
    g = small([1.0, 2.0, 3.0])
    h = g.induced([1, 2, 3])
    assert h.keys.tolist() == [1, 2, 3]
    assert h.edges.tolist() == [[0, 1], [1, 2]]
    assert h.edge_set() == {(1, 2), (2, 3)}


def test_sgx_round_trip(tmp_path):
    g = small([1.0, float("inf"), 0.5]).induced([0, 1, 2])
    g = SpatialGraph(g.points, g.weights, g.edges, g.lengths, {"model": "x", "p": {"a": 1}}, g.keys)
    write_sgx(g, tmp_path / "g.sgx")
    h = read_sgx(tmp_path / "g.sgx")
    assert h.edges.tolist() == g.edges.tolist()
    np.testing.assert_array_equal(h.lengths, g.lengths)
    np.testing.assert_array_equal(h.weights, g.weights)
    np.testing.assert_array_equal(h.coords, g.coords)
    assert h.provenance == g.provenance
    text = (tmp_path / "g.sgx").read_text()
    assert text.startswith("SGX v1") and " inf" in text
