import json

import pytest
from hypothesis import given, settings, strategies as st

from floquet_memory.lattice import (COLORS, build_lattice, canonical_loop, cycle_winding, edge_boundary,
                                    string_class, super_cycle, superlattice)

sizes = st.tuples(st.integers(1, 4), st.integers(1, 4))


@pytest.mark.parametrize("size,counts", [((1, 1), (3, 6, 9)), ((2, 2), (12, 24, 36))])
def test_counts(size, counts):
    lat = build_lattice(*size)
    assert (lat.n_vertices, lat.n_qubits, lat.n_edges) == counts
    for c in COLORS:
        assert len(lat.edges_of_color(c)) == lat.n_edges // 3


def test_rejects_bad_size():
    with pytest.raises(ValueError):
        build_lattice(0, 2)
    with pytest.raises(ValueError):
        build_lattice(2, -1)


@given(sizes)
@settings(max_examples=15, deadline=None)
def test_coloring_and_adjacency(size):
    lat = build_lattice(*size)
    for e, (u, w) in enumerate(lat.edges):
        colors = {lat.vertex_color[u], lat.vertex_color[w], lat.edge_color[e]}
        assert colors == {0, 1, 2}
    for v in range(lat.n_vertices):
        assert len(set(lat.vertex_plaquettes[v])) == 6
        assert len(lat.vertex_edges[v]) == 6
    for p in range(lat.n_qubits):
        assert sorted(lat.vertex_color[v] for v in lat.plaquettes[p]) == [0, 1, 2]
    # Euler characteristic of the torus
    assert lat.n_vertices - lat.n_edges + lat.n_qubits == 0


@given(sizes)
@settings(max_examples=15, deadline=None)
def test_superlattices_partition_edges(size):
    lat = build_lattice(*size)
    seen = []
    for c in COLORS:
        sl = superlattice(lat, c)
        assert len(sl.superedges) == len(set(sl.superedges)) == len(lat.edges_of_color(c))
        seen += sl.superedges
        if min(size) >= 2:
            deg = [0] * sl.n_vertices
            for a, b in sl.superedge_ends:
                deg[a] += 1
                deg[b] += 1
            assert deg == [6] * sl.n_vertices
    assert sorted(seen) == list(range(lat.n_edges))


@given(sizes, st.sampled_from(COLORS), st.integers(0, 1))
@settings(max_examples=30, deadline=None)
def test_canonical_loop_is_a_winding_cycle(size, color, direction):
    lat = build_lattice(*size)
    loop = canonical_loop(lat, direction, color)
    assert all(lat.edge_color[e] == COLORS.index(color) for e in loop.edges)
    assert not edge_boundary(lat, loop.edges)
    assert cycle_winding(lat, list(loop.edges)) == loop.winding
    assert loop.winding == ((1, 0) if direction == 0 else (0, 1))


def test_loop_length_grows_linearly():
    lengths = [len(canonical_loop(build_lattice(l, l), 0, "B").edges) for l in (2, 3, 4)]
    assert lengths[1] - lengths[0] == lengths[2] - lengths[1] > 0


@pytest.mark.parametrize("color", COLORS)
def test_super_cycles_have_unit_class(lat33, color):
    assert string_class(lat33, color, super_cycle(lat33, 0, color)) == (1, 0)
    assert string_class(lat33, color, super_cycle(lat33, 1, color)) == (0, 1)


def test_json_export(lat11):
    doc = json.loads(lat11.to_json())
    assert len(doc["vertices"]) == 3 and len(doc["edges"]) == 9 and len(doc["plaquettes"]) == 6
