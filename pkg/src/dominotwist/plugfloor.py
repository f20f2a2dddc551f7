"""Plugs, floors, and exact counting/enumeration of single-layer tilings.

A plug is a balanced subset of the disk's cells, stored as a bitset over the
fixed cell order.  A floor (p0, horizontals, p1) is one layer of a cylinder
tiling: p0 marks cells covered from below, p1 cells covered from above, and
`horizontals` is a planar domino tiling of whatever is left.  Counting floors
between two plugs is a perfect-matching count on the induced cell graph,
computed by profile recursion over the fixed cell order with memoization;
all counts are exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import TableTooLarge
from .region import Disk

PLUG_TABLE_BOUND = 10**6


@dataclass(frozen=True, order=True)
class Plug:
    bits: int
    index: int

    def cells(self, d: Disk):
        return [i for i in range(d.n_cells) if self.bits >> i & 1]

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def to_hex(self) -> str:
        return format(self.bits, "x")


class PlugTable:
    """All balanced cell subsets of a disk, in increasing bitset order.

    The empty plug comes first (index 0) and the full plug last; indices are
    the row/column labels used by every transfer matrix built on this disk.
    """

    def __init__(self, d: Disk, bound: int = PLUG_TABLE_BOUND):
        n = d.n_cells
        total = math.comb(n, n // 2)
        if total > bound:
            raise TableTooLarge(f"{total} plugs exceeds bound {bound}")
        self.disk = d
        whites = [i for i in range(n) if not d.is_black[i]]
        blacks = [i for i in range(n) if d.is_black[i]]
        masks = []
        for wsub in _subset_masks(whites):
            k = wsub.bit_count()
            for bsub in _subset_masks(blacks):
                if bsub.bit_count() == k:
                    masks.append(wsub | bsub)
        masks.sort()
        self.plugs: list[Plug] = [Plug(m, i) for i, m in enumerate(masks)]
        self._by_bits = {m: p for m, p in zip(masks, self.plugs)}
        self.full_bits = (1 << n) - 1

    @property
    def empty(self) -> Plug:
        return self.plugs[0]

    @property
    def full(self) -> Plug:
        return self.plugs[-1]

    def plug(self, bits: int) -> Plug:
        return self._by_bits[bits]

    def complement(self, p: Plug) -> Plug:
        return self._by_bits[self.full_bits ^ p.bits]

    def __len__(self):
        return len(self.plugs)

    def __iter__(self):
        return iter(self.plugs)

    def __getitem__(self, i):
        return self.plugs[i]


def _subset_masks(items: list[int]):
    """Bitmasks of all subsets of the given cell indices."""
    masks = [0]
    for i in items:
        masks += [m | (1 << i) for m in masks]
    return masks


def enumerate_plugs(d: Disk, bound: int = PLUG_TABLE_BOUND) -> PlugTable:
    """Build the ordered plug table for a disk."""
    return PlugTable(d, bound)


_TABLES: dict[Disk, PlugTable] = {}


def plug_table(d: Disk, bound: int = PLUG_TABLE_BOUND) -> PlugTable:
    """Shared plug table per disk; non-default bounds bypass the cache."""
    if bound != PLUG_TABLE_BOUND:
        return PlugTable(d, bound)
    t = _TABLES.get(d)
    if t is None:
        t = _TABLES[d] = PlugTable(d, bound)
    return t


@dataclass(frozen=True)
class Floor:
    below: Plug
    above: Plug
    horizontals: tuple[tuple[int, int], ...]

    @property
    def is_vertical(self) -> bool:
        return not self.horizontals

    def reversed(self) -> "Floor":
        return Floor(self.above, self.below, self.horizontals)

    def covered_bits(self) -> int:
        m = self.below.bits | self.above.bits
        for i, j in self.horizontals:
            m |= (1 << i) | (1 << j)
        return m

    def to_json(self) -> dict:
        return {
            "below": self.below.to_hex(),
            "above": self.above.to_hex(),
            "horizontals": [list(h) for h in self.horizontals],
        }


def _bits(p) -> int:
    return p.bits if isinstance(p, Plug) else int(p)


def _matching_counter(d: Disk):
    neighbors = d.neighbors

    @lru_cache(maxsize=None)
    def count(free: int) -> int:
        if free == 0:
            return 1
        i = (free & -free).bit_length() - 1  # lowest uncovered cell
        rest = free & ~(1 << i)
        total = 0
        for j in neighbors[i]:
            if rest >> j & 1:
                total += count(rest & ~(1 << j))
        return total

    return count


_COUNTERS: dict[Disk, object] = {}


def count_floor_tilings(d: Disk, p0, p1) -> int:
    """Number of planar domino tilings of the disk minus both plugs.

    Overlapping plugs give 0 (not an error): no floor joins them.
    """
    b0, b1 = _bits(p0), _bits(p1)
    if b0 & b1:
        return 0
    counter = _COUNTERS.get(d)
    if counter is None:
        counter = _COUNTERS[d] = _matching_counter(d)
    free = ((1 << d.n_cells) - 1) & ~(b0 | b1)
    return counter(free)


def enumerate_floor_tilings(d: Disk, p0: Plug, p1: Plug) -> list[Floor]:
    """All floors from p0 to p1, in deterministic (lexicographic) order."""
    if p0.bits & p1.bits:
        return []
    free = ((1 << d.n_cells) - 1) & ~(p0.bits | p1.bits)
    out = []
    chosen = []

    def walk(mask: int):
        if mask == 0:
            out.append(Floor(p0, p1, tuple(chosen)))
            return
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        for j in d.neighbors[i]:
            if rest >> j & 1:
                chosen.append((i, j))
                walk(rest & ~(1 << j))
                chosen.pop()

    walk(free)
    return out


class Tiling:
    """A stack of compatible floors; the unit every 3D operation consumes.

    `plugs` has length N+1; a cylinder tiling is one whose first and last
    plugs are empty, and a cork tiling declares other boundary plugs.
    Floor k (1-based) occupies the slab z in [k-1, k]; a cell covered by
    plug k stands for a vertical domino with cubes at z = k-1 and z = k.
    """

    def __init__(self, disk: Disk, floors):
        self.disk = disk
        self.floors: tuple[Floor, ...] = tuple(floors)
        for a, b in zip(self.floors, self.floors[1:]):
            if a.above.bits != b.below.bits:
                raise ValueError("floor plugs do not chain")
        self.height = len(self.floors)

    @property
    def plugs(self):
        if not self.floors:
            return []
        return [self.floors[0].below] + [f.above for f in self.floors]

    @property
    def boundary(self):
        ps = self.plugs
        return (ps[0], ps[-1]) if ps else None

    def is_cylinder(self) -> bool:
        b = self.boundary
        return b is not None and b[0].bits == 0 and b[1].bits == 0

    def vert_count(self) -> int:
        return sum(1 for f in self.floors if f.is_vertical)

    def dominoes(self):
        """All dominoes as ((white cube), (black cube)) integer triples."""
        d = self.disk
        out = []
        for k, f in enumerate(self.floors, start=1):
            z = k - 1
            for i, j in f.horizontals:
                ci, cj = d.cells[i], d.cells[j]
                a, b = (ci.x, ci.y, z), (cj.x, cj.y, z)
                # cube (x,y,z) is black when x+y+z is odd
                if (ci.x + ci.y + z) % 2 == 1:
                    a, b = b, a
                out.append((a, b))
            if k < self.height:
                # verticals crossing the interface z = k; the ones at the
                # declared boundary plugs of a cork lie outside the region
                for i in range(d.n_cells):
                    if f.above.bits >> i & 1:
                        c = d.cells[i]
                        lo, hi = (c.x, c.y, k - 1), (c.x, c.y, k)
                        if (c.x + c.y + k) % 2 == 1:
                            out.append((lo, hi))
                        else:
                            out.append((hi, lo))
        return out

    def stack(self, other: "Tiling") -> "Tiling":
        """Concatenate vertically; requires matching interface plugs."""
        if self.floors and other.floors:
            if self.floors[-1].above.bits != other.floors[0].below.bits:
                raise ValueError("boundary plugs do not match")
        return Tiling(self.disk, self.floors + other.floors)

    def reversed(self) -> "Tiling":
        """Upside-down copy (reflection in a horizontal plane)."""
        return Tiling(self.disk, [f.reversed() for f in reversed(self.floors)])

    def key(self):
        return tuple((f.below.bits, f.horizontals) for f in self.floors)

    def __eq__(self, other):
        return isinstance(other, Tiling) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "floors": [f.to_json() for f in self.floors],
        }
