"""The twist invariant: pairwise interaction kernel and per-floor cocycles.

The twist of a closed (cylinder) tiling is a sum of quarter-integer
contributions over ordered pairs of dominoes.  A pair contributes only when
the two domino directions together with a fixed horizontal base direction u
span space, and the second domino meets the open shadow of the first along u;
the contribution is then +-normalization with a determinant sign.  The exact
convention (shadow mode, normalization, global sign) is pinned by the
calibration suite in this module rather than hard-coded folklore: exactly one
candidate reproduces the published reference data, and that one ships as
DEFAULT_KERNEL.

Two per-floor decompositions of the twist are provided.  The kernel cocycle
evaluates the pair sum on a one-floor gadget (the floor's own planars plus
the vertical dominoes of its two plugs) and takes values in (1/m)Z.  The
connector cocycle splices the floor between fixed reference tilings that
join the empty plug to each boundary plug and takes the integer twist of the
resulting closed tiling.  Both sum to the same total over any closed tiling;
they are computed by different routes and cross-checked in the tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import (
    ConnectorNotFound,
    IntegralityViolation,
    InvalidInput,
    InvariantViolation,
    MultipleKernelsPass,
    NoKernelPasses,
)
from .plugfloor import (
    Floor,
    Plug,
    PlugTable,
    Tiling,
    count_floor_tilings,
    enumerate_floor_tilings,
    plug_table,
)
from .region import Disk, rectangle

AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


@dataclass(frozen=True)
class Domino3:
    """A 2x1x1 brick given by its white and black unit cube positions."""

    white: tuple[int, int, int]
    black: tuple[int, int, int]

    def __post_init__(self):
        if sum(self.white) % 2 != 0 or sum(self.black) % 2 != 1:
            raise InvalidInput(f"cube colors wrong in {self}")
        if sum(abs(a - b) for a, b in zip(self.white, self.black)) != 1:
            raise InvalidInput(f"cubes not adjacent in {self}")

    @property
    def v(self) -> tuple[int, int, int]:
        """Unit vector from the white cube to the black cube."""
        return tuple(b - a for a, b in zip(self.white, self.black))

    def box(self):
        lo = tuple(min(a, b) for a, b in zip(self.white, self.black))
        hi = tuple(max(a, b) + 1 for a, b in zip(self.white, self.black))
        return lo, hi


@dataclass(frozen=True)
class TwistKernel:
    """Convention choices for the pair kernel; see calibrate()."""

    u: tuple[int, int, int] = (1, 0, 0)
    shadow_mode: str = "positive-only"
    normalization: Fraction = Fraction(1, 4)
    sign_flip: int = 1
    calibrated: bool = False

    def __post_init__(self):
        if self.u not in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)):
            raise InvalidInput("base direction must be a horizontal unit vector")
        if self.shadow_mode not in ("positive-only", "bidirectional"):
            raise InvalidInput(f"unknown shadow mode {self.shadow_mode!r}")
        if self.normalization not in (Fraction(1, 4), Fraction(1, 2)):
            raise InvalidInput("normalization must be 1/4 or 1/2")
        if self.sign_flip not in (1, -1):
            raise InvalidInput("sign flip must be +1 or -1")

    @property
    def m(self) -> int:
        """Denominator scale: per-floor cocycle values lie in (1/m)Z."""
        return self.normalization.denominator

    @property
    def u_axis(self) -> int:
        return 0 if self.u[0] else 1

    @property
    def u_sign(self) -> int:
        return self.u[self.u_axis]


DEFAULT_KERNEL = TwistKernel(
    u=(1, 0, 0),
    shadow_mode="positive-only",
    normalization=Fraction(1, 4),
    sign_flip=1,
    calibrated=True,
)


def kernel_candidates():
    """The eight convention candidates screened by calibrate().

    The base direction is held fixed at +e1: the total twist of a closed
    tiling does not depend on it, so varying u would only manufacture ties.
    """
    out = []
    for mode in ("positive-only", "bidirectional"):
        for norm in (Fraction(1, 4), Fraction(1, 2)):
            for flip in (1, -1):
                out.append(TwistKernel((1, 0, 0), mode, norm, flip))
    return out


def _det3(a, b, c) -> int:
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


def _unit(kernel: TwistKernel, lo0, hi0, v0, lo1, hi1, v1) -> int:
    """Sign contribution (+1/0/-1) of the ordered pair, before normalization."""
    det = _det3(v0, v1, kernel.u)
    if det == 0:
        return 0
    ax = kernel.u_axis
    for t in range(3):
        if t == ax:
            continue
        if hi1[t] <= lo0[t] or hi0[t] <= lo1[t]:  # open intervals must overlap
            return 0
    if kernel.shadow_mode == "positive-only":
        if kernel.u_sign > 0:
            if hi1[ax] <= lo0[ax]:
                return 0
        else:
            if lo1[ax] >= hi0[ax]:
                return 0
    return kernel.sign_flip * (1 if det > 0 else -1)


def pair_interaction(kernel: TwistKernel, d0: Domino3, d1: Domino3) -> Fraction:
    """Interaction of an ordered domino pair; a quarter- or half-integer."""
    lo0, hi0 = d0.box()
    lo1, hi1 = d1.box()
    return kernel.normalization * _unit(kernel, lo0, hi0, d0.v, lo1, hi1, d1.v)


def _prepared(dominoes):
    """Split raw (white, black) cube pairs by direction axis, with boxes."""
    by_axis = ([], [], [])
    for w, b in dominoes:
        v = tuple(y - x for x, y in zip(w, b))
        ax = 0 if v[0] else (1 if v[1] else 2)
        lo = tuple(min(x, y) for x, y in zip(w, b))
        hi = tuple(max(x, y) + 1 for x, y in zip(w, b))
        by_axis[ax].append((lo, hi, v))
    return by_axis


def _pair_unit_sum(kernel: TwistKernel, dominoes) -> int:
    """Sum of pair units over all ordered pairs of the given dominoes.

    Only pairs whose direction axes are the two axes other than u's can
    contribute, so the quadratic loop runs over that block alone.
    """
    by_axis = _prepared(dominoes)
    a1, a2 = [t for t in range(3) if t != kernel.u_axis]
    total = 0
    for la, lb in ((by_axis[a1], by_axis[a2]), (by_axis[a2], by_axis[a1])):
        for lo0, hi0, v0 in la:
            for lo1, hi1, v1 in lb:
                total += _unit(kernel, lo0, hi0, v0, lo1, hi1, v1)
    return total


def twist_units(kernel: TwistKernel, dominoes) -> int:
    """Pair-unit sum of an arbitrary domino collection (internal currency)."""
    return _pair_unit_sum(kernel, dominoes)


def tiling_twist(kernel: TwistKernel, t: Tiling) -> int:
    """Integer twist of a closed cylinder tiling (sum over ordered pairs)."""
    if not t.is_cylinder():
        raise InvalidInput("twist is defined for cylinder tilings (empty boundary plugs)")
    units = _pair_unit_sum(kernel, t.dominoes())
    num = units * kernel.normalization.numerator
    den = kernel.normalization.denominator
    if num % den:
        raise IntegralityViolation(
            f"pair sum {num}/{den} is not an integer; kernel misconfigured"
        )
    return num // den


# -- per-floor decompositions --------------------------------------------------


def _floor_gadget(d: Disk, below_bits: int, above_bits: int, horizontals):
    """Dominoes of the one-floor gadget: floor at z in [0,1], plug verticals
    hanging below ([-1,1]) and above ([0,2])."""
    out = []
    for i, j in horizontals:
        ci, cj = d.cells[i], d.cells[j]
        a, b = (ci.x, ci.y, 0), (cj.x, cj.y, 0)
        if (ci.x + ci.y) % 2 == 1:
            a, b = b, a
        out.append((a, b))
    for i in range(d.n_cells):
        if below_bits >> i & 1:
            c = d.cells[i]
            lo, hi = (c.x, c.y, -1), (c.x, c.y, 0)
            out.append((lo, hi) if (c.x + c.y) % 2 else (hi, lo))
        if above_bits >> i & 1:
            c = d.cells[i]
            lo, hi = (c.x, c.y, 0), (c.x, c.y, 1)
            out.append((lo, hi) if (c.x + c.y) % 2 == 0 else (hi, lo))
    return out


def floor_units(d: Disk, kernel: TwistKernel, below_bits: int, above_bits: int, horizontals) -> int:
    """m times the per-floor cocycle value, as an exact integer."""
    return _pair_unit_sum(kernel, _floor_gadget(d, below_bits, above_bits, horizontals))


def edge_unit_table(d: Disk, kernel: TwistKernel):
    """table[c][(i, j)]: net pair units between a below-plug vertical at cell c
    and a planar domino on edge (i, j), both pair orders included.

    The transfer build composes floor exponents from this table; above-plug
    verticals contribute the negated value (they sit one level higher, which
    flips the determinant sign through the cube coloring).
    """
    table = [dict() for _ in range(d.n_cells)]
    for c in range(d.n_cells):
        vert = _floor_gadget(d, 1 << c, 0, ())[0]
        vlo = tuple(min(a, b) for a, b in zip(*vert))
        vhi = tuple(max(a, b) + 1 for a, b in zip(*vert))
        vv = tuple(b - a for a, b in zip(*vert))
        for i, j in d.edges:
            if c in (i, j):
                continue
            planar = _floor_gadget(d, 0, 0, ((i, j),))[0]
            plo = tuple(min(a, b) for a, b in zip(*planar))
            phi = tuple(max(a, b) + 1 for a, b in zip(*planar))
            pv = tuple(b - a for a, b in zip(*planar))
            u = _unit(kernel, vlo, vhi, vv, plo, phi, pv) + _unit(
                kernel, plo, phi, pv, vlo, vhi, vv
            )
            if u:
                table[c][(i, j)] = u
    return table


@dataclass(frozen=True)
class FloorCocycle:
    """A function on floors whose sums over closed tilings give the twist."""

    kind: str  # "perFloorKernel" or "connectorBased"
    kernel: TwistKernel
    m: int
    _value_units: object  # Floor -> int (value times m)
    connectors: object = None

    def value(self, f: Floor) -> Fraction:
        return Fraction(self._value_units(f), self.m)

    def value_units(self, f: Floor) -> int:
        return self._value_units(f)


def make_kernel_cocycle(d: Disk, kernel: TwistKernel = DEFAULT_KERNEL) -> FloorCocycle:
    def units(f: Floor) -> int:
        return floor_units(d, kernel, f.below.bits, f.above.bits, f.horizontals)

    return FloorCocycle("perFloorKernel", kernel, kernel.m, units)


def floor_cocycle(c: FloorCocycle, f: Floor) -> Fraction:
    """Value of a floor under the given cocycle; antisymmetric under reversal."""
    return c.value(f)


# -- connectors ----------------------------------------------------------------


def build_connector(d: Disk, plugs: PlugTable, p: Plug, length: int) -> Tiling:
    """Deterministic tiling joining the empty plug to p in exactly `length`
    floors: at each step take the first feasible next plug and first floor."""
    n = len(plugs)
    adj = _plug_adjacency(d, plugs)
    # reachable[r] = set of plug indices from which p is reachable in r steps
    reachable = [set() for _ in range(length + 1)]
    reachable[0].add(p.index)
    for r in range(1, length + 1):
        prev = reachable[r - 1]
        cur = reachable[r]
        for q in range(n):
            if not prev.isdisjoint(adj[q]):
                cur.add(q)
    if 0 not in reachable[length]:
        raise ConnectorNotFound(
            f"no tiling joins the empty plug to plug {p.index} in {length} floors"
        )
    floors = []
    cur = plugs.empty
    for r in range(length, 0, -1):
        for nxt in sorted(adj[cur.index]):
            if nxt in reachable[r - 1]:
                f = enumerate_floor_tilings(d, cur, plugs[nxt])[0]
                floors.append(f)
                cur = plugs[nxt]
                break
        else:  # pragma: no cover - reachability table guarantees progress
            raise ConnectorNotFound("reachability table inconsistent")
    return Tiling(d, floors)


def _plug_adjacency(d: Disk, plugs: PlugTable):
    adj = getattr(plugs, "floor_adjacency", None)
    if adj is None:
        n = len(plugs)
        adj = [set() for _ in range(n)]
        for a in range(n):
            for b in range(n):
                if count_floor_tilings(d, plugs[a], plugs[b]) > 0:
                    adj[a].add(b)
        plugs.floor_adjacency = adj
    return adj


def make_connector_cocycle(
    d: Disk, plugs: PlugTable, kernel: TwistKernel = DEFAULT_KERNEL
) -> FloorCocycle:
    """Integer-valued cocycle: value(f) is the twist of the closed tiling
    connector(below) * f * connector(above) reversed."""
    length = 2 * d.n_cells
    connectors = {}
    for p in plugs:
        connectors[p.bits] = build_connector(d, plugs, p, length)

    def units(f: Floor) -> int:
        t = connectors[f.below.bits].stack(Tiling(d, [f])).stack(
            connectors[f.above.bits].reversed()
        )
        return tiling_twist(kernel, t)

    return FloorCocycle("connectorBased", kernel, 1, units, connectors)


def vertical_tiling(d: Disk, plugs: PlugTable, n: int) -> Tiling:
    """The all-vertical tiling of even height n (plugs alternate empty/full)."""
    if n % 2:
        raise InvalidInput("all-vertical tilings exist only for even heights")
    floors = []
    for k in range(n):
        below, above = (plugs.empty, plugs.full) if k % 2 == 0 else (plugs.full, plugs.empty)
        floors.append(Floor(below, above, ()))
    return Tiling(d, floors)


# -- calibration ----------------------------------------------------------------

REFERENCE_TWIST_HISTOGRAM_4X4_H4 = {
    -4: 18,
    -3: 15144,
    -2: 8955822,
    -1: 310188792,
    0: 4413212553,
    1: 310188792,
    2: 8955822,
    3: 15144,
    4: 18,
}
"""Frozen reference: twist histogram of all 5051532105 tilings of the 4x4
box at height 4.  Exactly one kernel candidate reproduces it."""


def reference_trit_pair():
    """The frozen trit that pins the global sign of the twist.

    Returns (start, target): two tilings of the 4x4 box at height 2 that
    differ by a single trit (three dominoes inside one 2x2x2 block).  The
    calibrated kernel gives twist 0 to `start` and +1 to `target`.  Every
    other reference value in this module is mirror-symmetric, so this pair
    is what rules out the sign-flipped kernel during calibration.
    """
    d = rectangle(4, 4)
    plugs = plug_table(d)
    ix = d.index

    def pl(*cells):
        bits = 0
        for c in cells:
            bits |= 1 << ix[c]
        return plugs.plug(bits)

    def hz(pairs):
        return tuple(sorted((min(ix[a], ix[b]), max(ix[a], ix[b])) for a, b in pairs))

    # shared filler dominoes outside the 2x2x2 block at x,y in {1,2}
    lower = [((0, 0), (1, 0)), ((2, 0), (3, 0)), ((0, 1), (0, 2)),
             ((2, 2), (3, 2)), ((0, 3), (1, 3)), ((2, 3), (3, 3))]
    upper = [((0, 0), (1, 0)), ((2, 0), (3, 0)), ((0, 1), (1, 1)),
             ((0, 2), (0, 3)), ((1, 3), (2, 3)), ((3, 2), (3, 3))]
    p_start = pl((2, 1), (3, 1))
    start = Tiling(d, [
        Floor(plugs.empty, p_start, hz([((1, 1), (1, 2))] + lower)),
        Floor(p_start, plugs.empty, hz([((1, 2), (2, 2))] + upper)),
    ])
    p_target = pl((1, 2), (3, 1))
    target = Tiling(d, [
        Floor(plugs.empty, p_target, hz([((1, 1), (2, 1))] + lower)),
        Floor(p_target, plugs.empty, hz([((2, 1), (2, 2))] + upper)),
    ])
    return start, target


@dataclass
class CandidateOutcome:
    """Pass/fail record of one kernel candidate against the suite."""

    kernel: TwistKernel
    checks: dict
    notes: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "u": list(self.kernel.u),
            "shadow_mode": self.kernel.shadow_mode,
            "normalization": str(self.kernel.normalization),
            "sign_flip": self.kernel.sign_flip,
            "checks": dict(self.checks),
            "notes": dict(self.notes),
            "passed": self.passed,
        }


@dataclass
class CalibrationReport:
    outcomes: list
    winner: TwistKernel

    def to_json(self) -> dict:
        return {
            "candidates": [o.to_json() for o in self.outcomes],
            "winner": {
                "u": list(self.winner.u),
                "shadow_mode": self.winner.shadow_mode,
                "normalization": str(self.winner.normalization),
                "sign_flip": self.winner.sign_flip,
            },
        }


def _twist_or_none(kernel, t):
    try:
        return tiling_twist(kernel, t)
    except IntegralityViolation:
        return None


def calibrate(candidates=None, seed=20260814, n_pairs=200) -> CalibrationReport:
    """Screen the kernel candidates against frozen reference data.

    Per candidate: zero twist on all-vertical tilings; exhaustive flip
    invariance over two boxes (2x3 height 4 and 4x4 height 2); additivity
    under stacking on random tiling pairs; the frozen trit reference; and
    the exact height-4 twist histogram of the 4x4 box computed through the
    transfer build.  Exactly one candidate may pass; zero or several abort
    the build, because every downstream twist value would be unfounded.
    """
    from . import dynamics
    from .transfer import build_transfer, twist_polynomial

    if candidates is None:
        candidates = kernel_candidates()

    d23, d44 = rectangle(2, 3), rectangle(4, 4)
    p23, p44 = plug_table(d23), plug_table(d44)

    # shared, kernel-independent precomputation
    flip_sets = []
    for d, h in ((d23, 4), (d44, 2)):
        ts = list(dynamics.enumerate_tilings(d, h))
        idx = {t.key(): i for i, t in enumerate(ts)}
        edges = set()
        for i, t in enumerate(ts):
            for nb in dynamics.flip_neighbors(t):
                j = idx[nb.key()]
                edges.add((min(i, j), max(i, j)))
        flip_sets.append((ts, sorted(edges)))

    rng = random.Random(seed)
    small = list(dynamics.enumerate_tilings(d23, 2))
    tall = list(dynamics.enumerate_tilings(d23, 3))
    pair_picks = [(rng.randrange(len(small)), rng.randrange(len(tall)))
                  for _ in range(n_pairs)]
    verticals = [vertical_tiling(d23, p23, 2), vertical_tiling(d44, p44, 4)]
    trit_start, trit_target = reference_trit_pair()

    outcomes = []
    for kernel in candidates:
        checks, notes = {}, {}

        tws = [_twist_or_none(kernel, t) for t in verticals]
        checks["vertical_zero"] = all(tw == 0 for tw in tws)
        notes["vertical_zero"] = f"twists {tws}"

        ok, bad = True, 0
        for ts, edges in flip_sets:
            vals = [_twist_or_none(kernel, t) for t in ts]
            if any(v is None for v in vals):
                ok = False
                bad = -1
                break
            bad += sum(1 for i, j in edges if vals[i] != vals[j])
        checks["flip_invariance"] = ok and bad == 0
        notes["flip_invariance"] = f"{bad} flip edges change the value"

        ok, bad = True, 0
        for i, j in pair_picks:
            a, b = small[i], tall[j]
            va, vb, vs = (_twist_or_none(kernel, t) for t in (a, b, a.stack(b)))
            if None in (va, vb, vs):
                ok = False
                break
            if vs != va + vb:
                bad += 1
        checks["additivity"] = ok and bad == 0
        notes["additivity"] = f"{bad} of {len(pair_picks)} stacked pairs fail"

        pair = (_twist_or_none(kernel, trit_start), _twist_or_none(kernel, trit_target))
        checks["trit_reference"] = pair == (0, 1)
        notes["trit_reference"] = f"(start, target) twists {pair}"

        try:
            poly = twist_polynomial(build_transfer(d44, kernel), 4)
            hist = dict(poly.coeffs)
            checks["histogram_4x4_h4"] = hist == REFERENCE_TWIST_HISTOGRAM_4X4_H4
            notes["histogram_4x4_h4"] = (
                "exact match" if checks["histogram_4x4_h4"]
                else f"support {poly.degree_bounds()}, value at 1: {poly.coeff_sum()}"
            )
        except InvariantViolation as exc:
            checks["histogram_4x4_h4"] = False
            notes["histogram_4x4_h4"] = f"{type(exc).__name__}: {exc}"

        outcomes.append(CandidateOutcome(kernel, checks, notes))

    winners = [o for o in outcomes if o.passed]
    if not winners:
        raise NoKernelPasses("no kernel candidate passes the calibration suite")
    if len(winners) > 1:
        raise MultipleKernelsPass(
            f"{len(winners)} kernel candidates pass the calibration suite"
        )
    return CalibrationReport(outcomes, replace(winners[0].kernel, calibrated=True))
