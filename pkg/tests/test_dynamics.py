"""Enumeration, flip/trit moves, and component partitions.

The object route (explicit Tiling values) and the packed route (int64 keys,
vectorized edges) are compared against each other and against the cube-DFS
oracle wherever the instance is small enough to brute-force.
"""

from collections import Counter

import numpy as np
import pytest

from dominotwist.dynamics import (
    _field_bits,
    _flip_edges_chunked,
    _packed_keys,
    _six_cycle_partitions,
    components,
    enumerate_tilings,
    fat_thin_census,
    flip_neighbors,
    floor_table,
    move_graph,
    tiling_from_dominoes,
    trit_neighbors,
)
from dominotwist.errors import EnumerationTooLarge
from dominotwist.plugfloor import plug_table
from dominotwist.twist import DEFAULT_KERNEL, tiling_twist, vertical_tiling

from _oracles import box_tilings, cube_matchings, domino_sets


def test_enumeration_matches_oracle_exactly(d22, d23, d44):
    for d, nx, ny, h in ((d22, 2, 2, 2), (d23, 2, 3, 2), (d44, 4, 4, 1)):
        ours = list(enumerate_tilings(d, h))
        oracle = box_tilings(nx, ny, h)
        assert len(ours) == len(oracle)
        assert domino_sets(ours) == set(oracle)


def test_enumeration_is_deterministic_and_duplicate_free(d23):
    keys = [t.key() for t in enumerate_tilings(d23, 3)]
    assert len(keys) == len(set(keys)) == 229
    assert keys == [t.key() for t in enumerate_tilings(d23, 3)]


def test_enumeration_bound(d23):
    with pytest.raises(EnumerationTooLarge):
        list(enumerate_tilings(d23, 4, bound=100))


def test_packed_keys_match_object_route(d23, ell6):
    for d, h in ((d23, 3), (ell6, 2)):
        ft = floor_table(d)
        fb = _field_bits(ft)
        packed = _packed_keys(ft, h)
        object_keys = []
        for t in enumerate_tilings(d, h):
            key = 0
            for k, f in enumerate(t.floors):
                key |= ft.floor_id(f) << (fb * k)
            object_keys.append(key)
        assert sorted(object_keys) == packed.tolist()


def test_floor_table_counts(d23, d44):
    ft = floor_table(d23)
    assert ft.count_cylinder(4) == 1845
    assert int(ft.is_vertical.sum()) == len(plug_table(d23))
    assert floor_table(d44).count_cylinder(2) == 2 + 256 + 31484 + 256 + 2


def test_all_vertical_tiling_has_four_flips(d22):
    t = vertical_tiling(d22, plug_table(d22), 2)
    nbs = flip_neighbors(t)
    assert len(nbs) == len({nb.key() for nb in nbs}) == 4
    assert all(nb.is_cylinder() for nb in nbs)


def test_flip_degree_profile_of_flat_box(d44):
    degs = sorted(
        Counter(len(flip_neighbors(t)) for t in enumerate_tilings(d44, 1)).items()
    )
    assert degs == [(1, 2), (3, 14), (4, 6), (5, 12), (6, 2)]


def test_unique_tiling_has_no_moves(ell6):
    ts = list(enumerate_tilings(ell6, 1))
    assert len(ts) == 1
    assert flip_neighbors(ts[0]) == []
    assert trit_neighbors(ts[0]) == []


def test_flip_adjacency_is_symmetric(d23):
    tilings = list(enumerate_tilings(d23, 3))
    index = {t.key(): i for i, t in enumerate(tilings)}
    adj = [sorted(index[nb.key()] for nb in flip_neighbors(t)) for t in tilings]
    half_edges = 0
    for i, nbs in enumerate(adj):
        assert i not in nbs
        assert len(set(nbs)) == len(nbs)
        for j in nbs:
            assert i in adj[j]
            half_edges += 1
    assert half_edges == 1256


def test_packed_flip_edges_match_object_route(d23):
    h = 3
    ft = floor_table(d23)
    fb = _field_bits(ft)
    keys = _packed_keys(ft, h)
    pos = {int(k): i for i, k in enumerate(keys)}

    packed_edges = set()
    for src, dst in _flip_edges_chunked(ft, keys, h):
        for i, j in zip(src.tolist(), dst.tolist()):
            if i != j:
                packed_edges.add((min(i, j), max(i, j)))

    tilings = list(enumerate_tilings(d23, h))
    index = {t.key(): i for i, t in enumerate(tilings)}

    def packed_index(t):
        key = 0
        for k, f in enumerate(t.floors):
            key |= ft.floor_id(f) << (fb * k)
        return pos[key]

    object_edges = set()
    for t in tilings:
        a = packed_index(t)
        for nb in flip_neighbors(t):
            b = packed_index(nb)
            object_edges.add((min(a, b), max(a, b)))
    assert packed_edges == object_edges


def test_trit_changes_three_dominoes(d23):
    found = 0
    for t in enumerate_tilings(d23, 4):
        tw = tiling_twist(DEFAULT_KERNEL, t)
        for nb, delta in trit_neighbors(t):
            found += 1
            assert delta in (-1, 1)
            assert tiling_twist(DEFAULT_KERNEL, nb) - tw == delta
            a, b = set(t.dominoes()), set(nb.dominoes())
            assert len(a - b) == 3 and len(b - a) == 3
    assert found == 160


def test_no_trits_in_flat_or_tiny_boxes(d22, d44):
    for t in enumerate_tilings(d22, 2):
        assert trit_neighbors(t) == []
    for t in enumerate_tilings(d44, 1):
        assert trit_neighbors(t) == []


def test_six_cycle_partitions_match_oracle():
    block = [(x, y, z) for x in range(2) for y in range(2) for z in range(2)]
    six = [c for c in block if c not in ((0, 0, 0), (1, 1, 1))]
    parts = _six_cycle_partitions(six)
    assert len(parts) == 2
    got = {frozenset(frozenset(dom) for dom in part) for part in parts}
    want = {frozenset(matching) for matching in cube_matchings(six)}
    assert got == want


def test_move_graph_trit_signs(d23):
    mg = move_graph(d23, 4)
    assert mg.n == 1845
    signs = Counter(dt for adj in mg.trit_adj for _, dt in adj)
    assert dict(signs) == {1: 80, -1: 80}
    for i, adj in enumerate(mg.trit_adj):
        for j, dt in adj:
            assert mg.twists[j] - mg.twists[i] == dt
            assert any(a == i and s == -dt for a, s in mg.trit_adj[j])


def test_components_packed_route(d23):
    rep = components(d23, 3)
    assert rep.n_tilings == 229
    assert rep.n_components == 3
    assert rep.twist_constant
    assert sorted(rep.sizes.tolist()) == [1, 1, 227]
    census = {row["twist"]: row for row in fat_thin_census(rep, 1)}
    assert set(census) == {-1, 0, 1}
    assert census[0]["fat"] == 1 and census[0]["tilings"] == 227
    assert census[-1]["fat"] == 0 and census[1]["fat"] == 0
    assert not any(row["violation"] for row in census.values())


def test_components_object_route_agrees(d23):
    packed = components(d23, 4)
    obj = components(d23, 4, with_trits=True)
    assert packed.n_tilings == obj.n_tilings == 1845
    assert packed.n_components == obj.n_components == 5
    assert sorted(packed.sizes.tolist()) == sorted(obj.sizes.tolist())
    assert fat_thin_census(packed, 1) == fat_thin_census(obj, 1)
    # trits join every flip component of this box into one class
    assert obj.flip_trit_components == 1


def test_components_bound(d23):
    with pytest.raises(EnumerationTooLarge):
        components(d23, 10, bound=10**6)


def test_component_report_json(d23):
    obj = components(d23, 3).to_json(1)
    assert obj["tilings"] == 229
    assert obj["twist_constant"] is True
    assert len(obj["census"]) == 3


def test_tiling_from_dominoes_roundtrip(d23):
    for i, t in enumerate(enumerate_tilings(d23, 3)):
        if i % 17 == 0:
            assert tiling_from_dominoes(d23, 3, t.dominoes()) == t
