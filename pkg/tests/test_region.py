"""Region parsing, validation, and symmetry."""

import pytest

from dominotwist.errors import (
    Disconnected,
    Empty,
    InvalidInput,
    NotSimplyConnected,
    Unbalanced,
)
from dominotwist.region import Disk, parse_disk, rectangle, reflect_disk, render_disk


def test_rectangle_basics():
    d = rectangle(4, 4)
    assert len(d) == 16
    assert d.n_black == d.n_white == 8
    assert d.width == d.height == 4
    assert rectangle(2, 3).n_cells == 6


def test_color_convention():
    d = rectangle(2, 2)
    by_coord = {(c.x, c.y): c.is_black for c in d.cells}
    assert by_coord[(0, 0)] is False
    assert by_coord[(1, 0)] is True
    assert by_coord[(0, 1)] is True
    assert by_coord[(1, 1)] is False
    assert d.cell(0).color == "white"


def test_parse_and_render_roundtrip():
    texts = ["##\n##", "##\n##\n##", "#.\n##\n##\n#.", "####\n####\n####\n####"]
    for text in texts:
        d = parse_disk(text)
        assert parse_disk(render_disk(d)) == d


def test_parse_translates_to_origin():
    assert parse_disk("...\n.##\n.##") == rectangle(2, 2)


def test_rejects_empty():
    with pytest.raises(Empty):
        parse_disk("...\n...")


def test_rejects_unbalanced():
    with pytest.raises(Unbalanced):
        parse_disk("###")
    with pytest.raises(Unbalanced):
        parse_disk("#")


def test_rejects_disconnected():
    with pytest.raises(Disconnected):
        parse_disk("##..\n..##")


def test_rejects_hole():
    with pytest.raises(NotSimplyConnected):
        parse_disk("###\n#.#\n###")


def test_rejects_bad_character():
    with pytest.raises(InvalidInput):
        parse_disk("#x\n##")


def test_reflection_involution():
    d = parse_disk("#.\n##\n##\n#.")
    r = reflect_disk(d)
    assert reflect_disk(r) == d
    assert len(r) == len(d)
    assert r.n_black == d.n_black


def test_reflection_preserves_rectangles():
    d = rectangle(4, 4)
    assert reflect_disk(d) == d


def test_adjacency_structure():
    d = rectangle(2, 3)
    assert len(d.edges) == 7
    assert all(i < j for i, j in d.edges)
    for i, adj in enumerate(d.neighbors):
        for j in adj:
            assert i in d.neighbors[j]


def test_nontrivial_flag():
    assert rectangle(2, 2).nontrivial is False
    assert rectangle(2, 3).nontrivial is True
    assert rectangle(4, 4).nontrivial is True


def test_disk_equality_and_hash():
    a = rectangle(2, 2)
    b = parse_disk("##\n##")
    assert a == b
    assert hash(a) == hash(b)
    assert a != rectangle(2, 3)


def test_disk_constructor_validates():
    with pytest.raises(Unbalanced):
        Disk([(0, 0), (1, 0), (2, 0)])
    with pytest.raises(Disconnected):
        Disk([(0, 0), (2, 0)])
