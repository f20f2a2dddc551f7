"""Twist values, cocycles, connectors, and kernel calibration plumbing."""

import random
from fractions import Fraction

import pytest

from dominotwist.dynamics import enumerate_tilings, flip_neighbors
from dominotwist.errors import InvalidInput
from dominotwist.plugfloor import plug_table
from dominotwist.twist import (
    DEFAULT_KERNEL,
    Domino3,
    TwistKernel,
    build_connector,
    floor_cocycle,
    kernel_candidates,
    make_connector_cocycle,
    make_kernel_cocycle,
    pair_interaction,
    reference_trit_pair,
    tiling_twist,
    twist_units,
    vertical_tiling,
)


def test_default_kernel_shape():
    k = DEFAULT_KERNEL
    assert k.u == (1, 0, 0)
    assert k.m == 4
    assert k.normalization == Fraction(1, 4)
    assert k.sign_flip == 1
    assert k.u_axis == 0 and k.u_sign == 1
    assert k.calibrated


def test_kernel_candidates():
    cands = kernel_candidates()
    assert len(cands) == 8
    assert not any(k.calibrated for k in cands)
    keys = {(k.u, k.shadow_mode, k.normalization, k.sign_flip) for k in cands}
    assert len(keys) == 8
    d = DEFAULT_KERNEL
    assert (d.u, d.shadow_mode, d.normalization, d.sign_flip) in keys


def test_kernel_validation():
    with pytest.raises(InvalidInput):
        TwistKernel(u=(1, 1, 0), shadow_mode="positive-only",
                    normalization=Fraction(1, 4), sign_flip=1)


def test_vertical_tilings_have_zero_twist(d23, d44):
    for d, h in ((d23, 2), (d23, 4), (d44, 2), (d44, 4)):
        t = vertical_tiling(d, plug_table(d), h)
        assert t.is_cylinder() and t.vert_count() == h
        assert tiling_twist(DEFAULT_KERNEL, t) == 0
    with pytest.raises(InvalidInput):
        vertical_tiling(d23, plug_table(d23), 3)


def test_twist_units_are_quarter_turns(d23):
    for t in enumerate_tilings(d23, 2):
        units = twist_units(DEFAULT_KERNEL, t.dominoes())
        assert units % 4 == 0
        assert units // 4 == tiling_twist(DEFAULT_KERNEL, t)


def test_reversal_negates_twist(d23):
    for h in (2, 3):
        for t in enumerate_tilings(d23, h):
            assert tiling_twist(DEFAULT_KERNEL, t.reversed()) == -tiling_twist(
                DEFAULT_KERNEL, t
            )


def test_twist_additive_under_stacking(d23):
    rng = random.Random(7)
    low = list(enumerate_tilings(d23, 2))
    high = list(enumerate_tilings(d23, 3))
    for _ in range(60):
        a, b = rng.choice(low), rng.choice(high)
        assert tiling_twist(DEFAULT_KERNEL, a.stack(b)) == tiling_twist(
            DEFAULT_KERNEL, a
        ) + tiling_twist(DEFAULT_KERNEL, b)


def test_flips_preserve_twist(d23):
    for t in enumerate_tilings(d23, 3):
        tw = tiling_twist(DEFAULT_KERNEL, t)
        for nb in flip_neighbors(t):
            assert tiling_twist(DEFAULT_KERNEL, nb) == tw


def test_pair_interaction_window(d23):
    t = next(iter(enumerate_tilings(d23, 3)))
    doms = [Domino3(w, b) for w, b in t.dominoes()]
    for i, a in enumerate(doms):
        for b in doms[i + 1:]:
            fwd = pair_interaction(DEFAULT_KERNEL, a, b)
            bwd = pair_interaction(DEFAULT_KERNEL, b, a)
            # positive-only shadow: a pair is seen from one side at most
            assert fwd == 0 or bwd == 0
            assert fwd.denominator in (1, 2, 4)
    along_u = Domino3((0, 0, 0), (1, 0, 0))
    assert all(pair_interaction(DEFAULT_KERNEL, along_u, d) == 0 for d in doms)


def test_domino_validation():
    with pytest.raises(InvalidInput):
        Domino3((0, 0, 0), (1, 1, 0))
    with pytest.raises(InvalidInput):
        Domino3((1, 0, 0), (0, 0, 0))  # first cube must be the white one


def test_reference_trit_pair_is_frozen():
    start, target = reference_trit_pair()
    assert tiling_twist(DEFAULT_KERNEL, start) == 0
    assert tiling_twist(DEFAULT_KERNEL, target) == 1
    a, b = set(start.dominoes()), set(target.dominoes())
    assert len(a - b) == 3 and len(b - a) == 3


def test_kernel_cocycle_on_floors(d23):
    plugs = plug_table(d23)
    coc = make_kernel_cocycle(d23, DEFAULT_KERNEL)
    from dominotwist.plugfloor import enumerate_floor_tilings

    seen_nonzero = False
    for p0 in plugs:
        for p1 in plugs:
            for f in enumerate_floor_tilings(d23, p0, p1):
                v = floor_cocycle(coc, f)
                assert floor_cocycle(coc, f.reversed()) == -v
                if f.is_vertical:
                    assert v == 0
                if v != 0:
                    seen_nonzero = True
    assert seen_nonzero


def test_cocycle_routes_agree(d22, d23):
    for d, heights in ((d22, (2,)), (d23, (2, 3))):
        plugs = plug_table(d)
        kernel_coc = make_kernel_cocycle(d, DEFAULT_KERNEL)
        conn_coc = make_connector_cocycle(d, plugs, DEFAULT_KERNEL)
        for h in heights:
            for t in enumerate_tilings(d, h):
                tw = tiling_twist(DEFAULT_KERNEL, t)
                assert sum(kernel_coc.value(f) for f in t.floors) == tw
                assert sum(conn_coc.value(f) for f in t.floors) == tw


def test_connector_cocycle_is_integer_valued(d23):
    plugs = plug_table(d23)
    coc = make_connector_cocycle(d23, plugs, DEFAULT_KERNEL)
    assert coc.m == 1
    t = next(iter(enumerate_tilings(d23, 3)))
    for f in t.floors:
        assert coc.value(f).denominator == 1


def test_build_connector(d23):
    plugs = plug_table(d23)
    for p in plugs:
        t = build_connector(d23, plugs, p, 2 * d23.n_cells)
        assert t.height == 2 * d23.n_cells
        assert t.floors[0].below == plugs.empty
        assert t.floors[-1].above == p
