"""Exhaustive dynamics over cylinder tilings: enumeration, flips, trits,
and flip components with twist statistics.

Local moves come in two flavors.  A flip exchanges two adjacent parallel
dominoes, either inside one floor (two planars spanning a 2x2 square change
direction) or across a floor boundary (two side-by-side verticals become two
stacked planars, or back).  A trit rearranges three mutually orthogonal
dominoes inside a 2x2x2 block that misses two opposite corner cubes; the six
remaining cubes form a 6-cycle, so exactly one other placement exists.

Component analysis at scale packs each tiling into a single integer of
fixed-width floor-id fields, generates every flip edge by vectorized array
arithmetic over those integers, and merges components by repeated min-label
hooking with pointer jumping.  Per-tiling twists come from summed per-floor
cocycle units, never from quadratic pair scans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EnumerationTooLarge,
    InvalidInput,
    InvariantViolation,
    TableTooLarge,
)
from .plugfloor import Floor, PlugTable, Tiling, plug_table
from .region import Disk
from .twist import DEFAULT_KERNEL, TwistKernel, edge_unit_table, tiling_twist

ENUMERATION_BOUND = 5 * 10**7
MOVE_GRAPH_BOUND = 200_000


class FloorTable:
    """Every floor of a disk, indexed and cross-referenced for moves.

    Floors are sorted by (below plug, above plug, planar bitmask) and named
    by their position in that order; all move tables are CSR-style
    (indptr, values) numpy arrays over these ids.
    """

    def __init__(self, d: Disk):
        from .transfer import _floor_events, _subsets_with_sums

        self.disk = d
        self.plugs: PlugTable = plug_table(d)
        elist = sorted(d.edges)
        if len(elist) > 62:
            raise TableTooLarge(f"{len(elist)} planar edges exceed the 62-bit floor mask")
        self.edge_list = tuple(elist)
        self.edge_index = {e: k for k, e in enumerate(elist)}

        n_cells = d.n_cells
        full = (1 << n_cells) - 1
        is_black = d.is_black
        by_bits = {p.bits: p.index for p in self.plugs.plugs}
        recs = []
        for edges, covered in _floor_events(d):
            hmask = 0
            for e in edges:
                hmask |= 1 << self.edge_index[e]
            free = full & ~covered
            cells = [i for i in range(n_cells) if free >> i & 1]
            whites = [c for c in cells if not is_black[c]]
            blacks = [c for c in cells if is_black[c]]
            wsub = _subsets_with_sums(whites, [0] * len(whites))
            bsub = _subsets_with_sums(blacks, [0] * len(blacks))
            for size in range(len(whites) + 1):
                for wb, _ in wsub[size]:
                    for bb, _ in bsub[size]:
                        below = wb | bb
                        recs.append((by_bits[below], by_bits[free ^ below], hmask))
        recs.sort()
        nf = self.n_floors = len(recs)
        self.below = np.fromiter((r[0] for r in recs), np.int32, nf)
        self.above = np.fromiter((r[1] for r in recs), np.int32, nf)
        self.hmask = np.fromiter((r[2] for r in recs), np.int64, nf)
        self.is_vertical = self.hmask == 0
        pb = max(len(self.plugs).bit_length(), 1)
        self.key2id = {
            ((r[2] << pb | r[0]) << pb) | r[1]: i for i, r in enumerate(recs)
        }
        self._fkey = lambda i0, i1, hm: ((hm << pb | i0) << pb) | i1
        n_plugs = len(self.plugs)
        self.by_below_indptr = np.searchsorted(self.below, np.arange(n_plugs + 1))
        self._floors: list = [None] * nf
        self._units: dict = {}
        self._build_flips(recs)
        self._build_couplings(recs, by_bits)

    # -- construction helpers --

    def _build_flips(self, recs):
        """Per floor: all floors one in-floor flip away (same plugs)."""
        d = self.disk
        sq = [[] for _ in self.edge_list]
        for k, (i, j) in enumerate(self.edge_list):
            ci, cj = d.cells[i], d.cells[j]
            dx, dy = cj.x - ci.x, cj.y - ci.y
            for px, py in ((dy, dx), (-dy, -dx)):
                a = d.index.get((ci.x + px, ci.y + py))
                b = d.index.get((cj.x + px, cj.y + py))
                if a is None or b is None:
                    continue
                e2 = self.edge_index[(min(a, b), max(a, b))]
                if e2 <= k:
                    continue
                c1 = self.edge_index[(min(i, a), max(i, a))]
                c2 = self.edge_index[(min(j, b), max(j, b))]
                sq[k].append((1 << k | 1 << e2, 1 << c1 | 1 << c2))
        indptr = np.zeros(self.n_floors + 1, np.int64)
        targets = []
        key2id = self.key2id
        fkey = self._fkey
        for fid, (i0, i1, hm) in enumerate(recs):
            rest = hm
            while rest:
                e = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                for pair, cross in sq[e]:
                    if hm & pair == pair:
                        targets.append(key2id[fkey(i0, i1, (hm ^ pair) | cross)])
            indptr[fid + 1] = len(targets)
        self.flip_indptr = indptr
        self.flip_targets = np.asarray(targets, np.int32)

    def _build_couplings(self, recs, by_bits):
        """Per floor: half-moves converting two plug cells into one planar.

        For each adjacent cell pair inside the above (resp. below) plug, in
        ascending edge order, the floor obtained by dropping the pair from
        that plug and laying the planar domino across it.  Both halves of a
        vertical pair at one boundary list the boundary plug's pairs in the
        same order, so aligned positions form the coupled flip.
        """
        d = self.disk
        n_plugs = len(self.plugs)
        pair_lists = []
        for p in self.plugs:
            bits = p.bits
            pair_lists.append(
                [k for k, (i, j) in enumerate(self.edge_list)
                 if bits >> i & 1 and bits >> j & 1]
            )
        self.plug_pair_count = np.fromiter(
            (len(x) for x in pair_lists), np.int64, n_plugs
        )
        key2id = self.key2id
        fkey = self._fkey
        edge_cells = self.edge_list
        up_indptr = np.zeros(self.n_floors + 1, np.int64)
        down_indptr = np.zeros(self.n_floors + 1, np.int64)
        up_t, down_t = [], []
        for fid, (i0, i1, hm) in enumerate(recs):
            for e in pair_lists[i1]:
                i, j = edge_cells[e]
                p2 = by_bits[self.plugs[i1].bits ^ (1 << i | 1 << j)]
                up_t.append(key2id[fkey(i0, p2, hm | 1 << e)])
            up_indptr[fid + 1] = len(up_t)
            for e in pair_lists[i0]:
                i, j = edge_cells[e]
                p2 = by_bits[self.plugs[i0].bits ^ (1 << i | 1 << j)]
                down_t.append(key2id[fkey(p2, i1, hm | 1 << e)])
            down_indptr[fid + 1] = len(down_t)
        self.up_indptr = up_indptr
        self.up_targets = np.asarray(up_t, np.int32)
        self.down_indptr = down_indptr
        self.down_targets = np.asarray(down_t, np.int32)

    # -- lookups --

    def floor(self, fid: int) -> Floor:
        f = self._floors[fid]
        if f is None:
            hm = int(self.hmask[fid])
            edges = tuple(
                self.edge_list[k] for k in range(hm.bit_length()) if hm >> k & 1
            )
            f = self._floors[fid] = Floor(
                self.plugs[int(self.below[fid])],
                self.plugs[int(self.above[fid])],
                edges,
            )
        return f

    def floor_id(self, f: Floor) -> int:
        hm = 0
        for e in f.horizontals:
            hm |= 1 << self.edge_index[e]
        return self.key2id[self._fkey(f.below.index, f.above.index, hm)]

    def units(self, kernel: TwistKernel) -> np.ndarray:
        """Per-floor cocycle units (value times m) for the given kernel."""
        u = self._units.get(kernel)
        if u is None:
            d = self.disk
            tbl = edge_unit_table(d, kernel)
            n_e = len(self.edge_list)
            T = np.zeros((d.n_cells, n_e), np.int64)
            for c in range(d.n_cells):
                for e, val in tbl[c].items():
                    T[c, self.edge_index[e]] = val
            P = np.zeros((len(self.plugs), d.n_cells), np.int64)
            for p in self.plugs:
                bits = p.bits
                for c in range(d.n_cells):
                    if bits >> c & 1:
                        P[p.index, c] = 1
            W = P @ T
            u = np.zeros(self.n_floors, np.int64)
            for e in range(n_e):
                has = (self.hmask >> e) & 1
                u += has * (W[self.below, e] - W[self.above, e])
            self._units[kernel] = u
        return u

    def counts_rows(self) -> list[dict]:
        """Exact per-plug-pair floor counts (the plain transfer matrix)."""
        rows: list[dict] = [dict() for _ in range(len(self.plugs))]
        for p in range(len(self.plugs)):
            s, e = int(self.by_below_indptr[p]), int(self.by_below_indptr[p + 1])
            if s == e:
                continue
            vals, cnts = np.unique(self.above[s:e], return_counts=True)
            rows[p] = {int(a): int(c) for a, c in zip(vals, cnts)}
        return rows

    def count_cylinder(self, height: int) -> int:
        if height < 0:
            raise InvalidInput("height must be nonnegative")
        rows = self.counts_rows()
        vec = {0: 1}
        for _ in range(height):
            new: dict = {}
            for i, v in vec.items():
                for j, c in rows[i].items():
                    new[j] = new.get(j, 0) + c * v
            vec = new
        return vec.get(0, 0)

    def reach_profile(self, height: int) -> np.ndarray:
        """reach[r, p]: some r-floor stack joins plug p to the empty plug."""
        from scipy.sparse import csr_matrix

        n = len(self.plugs)
        B = csr_matrix(
            (np.ones(self.n_floors, np.float64), (self.below, self.above)),
            shape=(n, n),
        )
        out = np.zeros((height + 1, n), bool)
        v = np.zeros(n)
        v[0] = 1.0
        out[0, 0] = True
        for r in range(1, height + 1):
            v = np.asarray(B @ (v > 0).astype(np.float64)).ravel()
            out[r] = v > 0
        return out


_FLOOR_TABLES: dict[Disk, FloorTable] = {}


def floor_table(d: Disk) -> FloorTable:
    ft = _FLOOR_TABLES.get(d)
    if ft is None:
        ft = _FLOOR_TABLES[d] = FloorTable(d)
    return ft


# -- enumeration -----------------------------------------------------------------


def enumerate_tilings(d: Disk, height: int, bound: int = ENUMERATION_BOUND):
    """Every cylinder tiling exactly once, as a deterministic stream.

    Order: lexicographic in the floor-id sequence, bottom floor first.  The
    exact count is checked against the bound before any tiling is built.
    """
    ft = floor_table(d)
    total = ft.count_cylinder(height)
    if total > bound:
        raise EnumerationTooLarge(f"{total} tilings exceed bound {bound}")
    return _object_stream(ft, height)


def _object_stream(ft: FloorTable, height: int):
    if height == 0:
        yield Tiling(ft.disk, [])
        return
    reach = ft.reach_profile(height)
    indptr = ft.by_below_indptr
    above = ft.above
    acc: list = []

    def rec(level: int, plug: int):
        remaining = height - level - 1
        ok = reach[remaining]
        for fid in range(int(indptr[plug]), int(indptr[plug + 1])):
            a = int(above[fid])
            if not ok[a]:
                continue
            acc.append(ft.floor(fid))
            if remaining == 0:
                yield Tiling(ft.disk, list(acc))
            else:
                yield from rec(level + 1, a)
            acc.pop()

    yield from rec(0, 0)


def _field_bits(ft: FloorTable) -> int:
    return max((ft.n_floors - 1).bit_length(), 1)


def _packed_keys(ft: FloorTable, height: int) -> np.ndarray:
    """All cylinder tilings as sorted int64 keys of packed floor ids."""
    if height == 0:
        return np.zeros(1, np.int64)
    fb = _field_bits(ft)
    if fb * height > 62:
        raise EnumerationTooLarge(
            f"{height} floors of {fb} id bits exceed the 62-bit tiling key"
        )
    reach = ft.reach_profile(height)
    indptr = ft.by_below_indptr
    above = ft.above

    def level_floors(plug: int, level: int):
        s, e = int(indptr[plug]), int(indptr[plug + 1])
        fids = np.arange(s, e, dtype=np.int64)
        ab = above[s:e]
        if level == height - 1:
            sel = ab == 0
        else:
            sel = reach[height - level - 1][ab]
        return fids[sel], ab[sel]

    keys, ab = level_floors(0, 0)
    for level in range(1, height):
        shift = fb * level
        order = np.argsort(ab, kind="stable")
        keys, ab = keys[order], ab[order]
        uniq, starts = np.unique(ab, return_index=True)
        bounds = np.append(starts, len(ab))
        k_chunks, a_chunks = [], []
        for gi, p in enumerate(uniq):
            fids, fab = level_floors(int(p), level)
            if len(fids) == 0:
                continue
            base = keys[bounds[gi]:bounds[gi + 1]]
            k_chunks.append((base[:, None] | (fids << shift)[None, :]).ravel())
            a_chunks.append(np.tile(fab, len(base)))
        keys = np.concatenate(k_chunks) if k_chunks else np.empty(0, np.int64)
        ab = np.concatenate(a_chunks) if a_chunks else np.empty(0, np.int32)
    keys.sort()
    return keys


def _expand_runs(counts: np.ndarray):
    """(row index, position within row) for CSR-style run expansion."""
    total = int(counts.sum())
    reps = np.repeat(np.arange(len(counts)), counts)
    starts = np.cumsum(counts) - counts
    within = np.arange(total, dtype=np.int64) - starts[reps]
    return reps, within


def _lookup(keys: np.ndarray, probes: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(keys, probes)
    if (pos >= len(keys)).any() or (keys[pos.clip(max=len(keys) - 1)] != probes).any():
        raise InvariantViolation("flip target is not an enumerated tiling")
    return pos.astype(np.int32)


def _flip_edges_chunked(ft: FloorTable, keys: np.ndarray, height: int,
                        chunk: int = 1 << 20):
    """Yield (src, dst) index arrays covering every flip edge at least once."""
    fb = _field_bits(ft)
    mask = (1 << fb) - 1
    n = len(keys)
    fi, ft_t = ft.flip_indptr, ft.flip_targets
    ui, ut = ft.up_indptr, ft.up_targets
    di, dt = ft.down_indptr, ft.down_targets
    ppc = ft.plug_pair_count
    above = ft.above
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        kc = keys[lo:hi]
        base = np.arange(lo, hi, dtype=np.int32)
        for k in range(height):
            shift = fb * k
            fids = (kc >> shift) & mask
            cnt = fi[fids + 1] - fi[fids]
            if cnt.sum():
                reps, within = _expand_runs(cnt)
                nf2 = ft_t[fi[fids[reps]] + within]
                nkeys = kc[reps] + ((nf2.astype(np.int64) - fids[reps]) << shift)
                sel = nkeys > kc[reps]  # reverse move is generated from the other side
                if sel.any():
                    yield base[reps[sel]], _lookup(keys, nkeys[sel])
        for k in range(height - 1):
            s0, s1 = fb * k, fb * (k + 1)
            flo = (kc >> s0) & mask
            fhi = (kc >> s1) & mask
            cnt = ppc[above[flo]]
            if not cnt.sum():
                continue
            reps, within = _expand_runs(cnt)
            lo2 = ut[ui[flo[reps]] + within].astype(np.int64)
            hi2 = dt[di[fhi[reps]] + within].astype(np.int64)
            nkeys = kc[reps] + ((lo2 - flo[reps]) << s0) + ((hi2 - fhi[reps]) << s1)
            yield base[reps], _lookup(keys, nkeys)


def _merge_components(n: int, edge_chunks: list) -> np.ndarray:
    """Min-label hooking with pointer jumping until a fixed point."""
    parent = np.arange(n, dtype=np.int32)
    while True:
        before = parent.copy()
        for src, dst in edge_chunks:
            a, b = parent[src], parent[dst]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            sel = lo < hi
            if sel.any():
                np.minimum.at(parent, hi[sel], lo[sel])
        while True:
            nxt = parent[parent]
            if np.array_equal(nxt, parent):
                break
            parent = nxt
        if np.array_equal(before, parent):
            return parent


# -- moves on tiling objects ------------------------------------------------------


def flip_neighbors(t: Tiling) -> list[Tiling]:
    """All tilings one flip away, each exactly once, deterministic order."""
    d = t.disk
    plugs = plug_table(d)
    floors = t.floors
    out = []
    for k, f in enumerate(floors):
        hs = set(f.horizontals)
        for (i, j) in f.horizontals:
            ci, cj = d.cells[i], d.cells[j]
            dx, dy = cj.x - ci.x, cj.y - ci.y
            for px, py in ((dy, dx), (-dy, -dx)):
                a = d.index.get((ci.x + px, ci.y + py))
                b = d.index.get((cj.x + px, cj.y + py))
                if a is None or b is None:
                    continue
                e2 = (min(a, b), max(a, b))
                if e2 <= (i, j) or e2 not in hs:
                    continue
                cross1 = (min(i, a), max(i, a))
                cross2 = (min(j, b), max(j, b))
                newh = tuple(sorted((hs - {(i, j), e2}) | {cross1, cross2}))
                nf = Floor(f.below, f.above, newh)
                out.append(Tiling(d, floors[:k] + (nf,) + floors[k + 1:]))
    for k in range(len(floors) - 1):
        f, g = floors[k], floors[k + 1]
        pbits = f.above.bits
        for (i, j) in d.edges:
            if not (pbits >> i & 1 and pbits >> j & 1):
                continue
            newp = plugs.plug(pbits ^ (1 << i | 1 << j))
            e = (i, j)
            nf = Floor(f.below, newp, tuple(sorted(f.horizontals + (e,))))
            ng = Floor(newp, g.above, tuple(sorted(g.horizontals + (e,))))
            out.append(Tiling(d, floors[:k] + (nf, ng) + floors[k + 2:]))
        for e in sorted(set(f.horizontals) & set(g.horizontals)):
            i, j = e
            newp = plugs.plug(pbits | 1 << i | 1 << j)
            nf = Floor(f.below, newp, tuple(x for x in f.horizontals if x != e))
            ng = Floor(newp, g.above, tuple(x for x in g.horizontals if x != e))
            out.append(Tiling(d, floors[:k] + (nf, ng) + floors[k + 2:]))
    return out


def tiling_from_dominoes(d: Disk, height: int, dominoes) -> Tiling:
    """Rebuild the floor stack from ((white cube), (black cube)) pairs."""
    plugs = plug_table(d)
    planars: list[list] = [[] for _ in range(height)]
    ifaces = [0] * max(height - 1, 0)
    for w, b in dominoes:
        if w[2] == b[2]:
            z = w[2]
            if not 0 <= z < height:
                raise InvalidInput(f"planar domino outside the cylinder at z={z}")
            i, j = d.index[(w[0], w[1])], d.index[(b[0], b[1])]
            planars[z].append((min(i, j), max(i, j)))
        else:
            z = min(w[2], b[2])
            if not 0 <= z < height - 1:
                raise InvalidInput(f"vertical domino crosses no boundary at z={z}")
            ifaces[z] |= 1 << d.index[(w[0], w[1])]
    floors = []
    for k in range(height):
        below = plugs.plug(ifaces[k - 1]) if k > 0 else plugs.empty
        above = plugs.plug(ifaces[k]) if k < height - 1 else plugs.empty
        floors.append(Floor(below, above, tuple(sorted(planars[k]))))
    return Tiling(d, floors)


def _six_cycle_partitions(six):
    """Partitions of the six cubes into three adjacent pairs (white first)."""
    cubes = sorted(six)

    def pair(a, b):
        return (a, b) if sum(a) % 2 == 0 else (b, a)

    def rec(rest):
        if not rest:
            return [frozenset()]
        a = rest[0]
        out = []
        for b in rest[1:]:
            if sum(abs(x - y) for x, y in zip(a, b)) == 1:
                sub = [c for c in rest if c not in (a, b)]
                for tail in rec(sub):
                    out.append(tail | {pair(a, b)})
        return out

    return rec(cubes)


def trit_neighbors(t: Tiling, kernel: TwistKernel = DEFAULT_KERNEL):
    """All tilings one trit away, with the twist change as the sign."""
    base = tiling_twist(kernel, t)
    out = []
    for nb in _trit_raw(t):
        out.append((nb, tiling_twist(kernel, nb) - base))
    return out


def _trit_raw(t: Tiling) -> list[Tiling]:
    d = t.disk
    height = t.height
    doms = t.dominoes()
    cube2dom = {}
    for idx, (w, b) in enumerate(doms):
        cube2dom[w] = idx
        cube2dom[b] = idx
    corners = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    out = []
    cols = {(c.x, c.y) for c in d.cells}
    for (x0, y0) in cols:
        if not all((x0 + sx, y0 + sy) in cols for sx in (0, 1) for sy in (0, 1)):
            continue
        for z0 in range(height - 1):
            block = [
                (x0 + sx, y0 + sy, z0 + sz)
                for sx in (0, 1) for sy in (0, 1) for sz in (0, 1)
            ]
            for (dx, dy, dz) in corners:
                c = (x0 + dx, y0 + dy, z0 + dz)
                opp = (x0 + 1 - dx, y0 + 1 - dy, z0 + 1 - dz)
                six = [q for q in block if q not in (c, opp)]
                ids = {cube2dom[q] for q in six}
                if len(ids) != 3:
                    continue
                current = {doms[i] for i in ids}
                if {q for w, b in current for q in (w, b)} != set(six):
                    continue
                parts = _six_cycle_partitions(six)
                if len(parts) != 2:
                    raise InvariantViolation(
                        "a 2x2x2 block minus opposite corners must tile in exactly 2 ways"
                    )
                fc = frozenset(current)
                if fc not in parts:
                    raise InvariantViolation("current trit placement missing from the pair")
                other = parts[0] if parts[1] == fc else parts[1]
                newdoms = [p for i, p in enumerate(doms) if i not in ids]
                newdoms.extend(sorted(other))
                out.append(tiling_from_dominoes(d, height, newdoms))
    return out


# -- move graph and components -----------------------------------------------------


@dataclass
class MoveGraph:
    """Explicit adjacency of a full tiling set under flips and trits."""

    disk: Disk
    height: int
    tilings: list
    index: dict
    flip_adj: list
    trit_adj: list  # entries (neighbor index, twist change)
    twists: list

    @property
    def n(self) -> int:
        return len(self.tilings)

    def flip_component_labels(self) -> list[int]:
        labels = [-1] * self.n
        comp = 0
        for s in range(self.n):
            if labels[s] != -1:
                continue
            stack = [s]
            labels[s] = comp
            while stack:
                i = stack.pop()
                for j in self.flip_adj[i]:
                    if labels[j] == -1:
                        labels[j] = comp
                        stack.append(j)
            comp += 1
        return labels

    def joint_component_count(self) -> int:
        labels = [-1] * self.n
        comp = 0
        for s in range(self.n):
            if labels[s] != -1:
                continue
            stack = [s]
            labels[s] = comp
            while stack:
                i = stack.pop()
                nbs = list(self.flip_adj[i]) + [j for j, _ in self.trit_adj[i]]
                for j in nbs:
                    if labels[j] == -1:
                        labels[j] = comp
                        stack.append(j)
            comp += 1
        return comp


def move_graph(d: Disk, height: int, kernel: TwistKernel = DEFAULT_KERNEL,
               with_trits: bool = True, bound: int = MOVE_GRAPH_BOUND) -> MoveGraph:
    """Build the explicit move graph (object-level; desk-scale instances)."""
    tilings = list(enumerate_tilings(d, height, bound=bound))
    index = {t.key(): i for i, t in enumerate(tilings)}
    twists = [tiling_twist(kernel, t) for t in tilings]
    flip_adj = []
    for t in tilings:
        flip_adj.append(sorted(index[nb.key()] for nb in flip_neighbors(t)))
    trit_adj: list = [[] for _ in tilings]
    if with_trits:
        for i, t in enumerate(tilings):
            trit_adj[i] = sorted(
                (index[nb.key()], twists[index[nb.key()]] - twists[i])
                for nb in _trit_raw(t)
            )
    return MoveGraph(d, height, tilings, index, flip_adj, trit_adj, twists)


@dataclass
class ComponentReport:
    """Flip components of one cylinder with per-component twist statistics."""

    disk: Disk
    height: int
    n_tilings: int
    sizes: np.ndarray
    twist_min: np.ndarray
    twist_max: np.ndarray
    max_vert: np.ndarray
    flip_trit_components: int | None = None

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    @property
    def twist_constant(self) -> bool:
        return bool(np.array_equal(self.twist_min, self.twist_max))

    @property
    def twists(self) -> np.ndarray:
        return self.twist_min

    def census(self, m_prime: int = 1) -> list[dict]:
        """Per twist value: component counts and fat counts at threshold."""
        out = []
        for tw in np.unique(self.twist_min):
            sel = self.twist_min == tw
            fat = int((self.max_vert[sel] >= m_prime).sum())
            out.append({
                "twist": int(tw),
                "components": int(sel.sum()),
                "tilings": int(self.sizes[sel].sum()),
                "fat": fat,
                "violation": fat > 1,
            })
        return out

    def to_json(self, m_prime: int = 1) -> dict:
        return {
            "height": self.height,
            "tilings": self.n_tilings,
            "components": self.n_components,
            "twist_constant": self.twist_constant,
            "m_prime": m_prime,
            "census": self.census(m_prime),
            "flip_trit_components": self.flip_trit_components,
        }


def fat_thin_census(report: ComponentReport, m_prime: int = 1) -> list[dict]:
    """Census of fat components per twist value at the given threshold."""
    return report.census(m_prime)


def components(d: Disk, height: int, with_trits: bool = False,
               kernel: TwistKernel = DEFAULT_KERNEL,
               bound: int = ENUMERATION_BOUND) -> ComponentReport:
    """Partition all cylinder tilings into flip components.

    The packed vectorized route handles desk-scale instances in the tens of
    millions.  With `with_trits`, the object-level graph is built instead
    (much smaller bound) and the joint flip+trit partition is reported too.
    """
    if with_trits:
        mg = move_graph(d, height, kernel=kernel)
        labels = mg.flip_component_labels()
        ncomp = max(labels) + 1 if labels else 0
        sizes = np.zeros(ncomp, np.int64)
        tmin = np.full(ncomp, 2**31, np.int64)
        tmax = np.full(ncomp, -(2**31), np.int64)
        vmax = np.zeros(ncomp, np.int64)
        for i, lab in enumerate(labels):
            sizes[lab] += 1
            tw = mg.twists[i]
            tmin[lab] = min(tmin[lab], tw)
            tmax[lab] = max(tmax[lab], tw)
            vmax[lab] = max(vmax[lab], mg.tilings[i].vert_count())
        return ComponentReport(
            d, height, mg.n, sizes, tmin, tmax, vmax,
            flip_trit_components=mg.joint_component_count(),
        )

    ft = floor_table(d)
    total = ft.count_cylinder(height)
    if total > bound:
        raise EnumerationTooLarge(f"{total} tilings exceed bound {bound}")
    keys = _packed_keys(ft, height)
    if len(keys) != total:
        raise InvariantViolation(
            f"packed enumeration found {len(keys)} tilings, counting says {total}"
        )
    fb = _field_bits(ft)
    mask = (1 << fb) - 1
    units = ft.units(kernel)
    m = kernel.m
    usum = np.zeros(len(keys), np.int64)
    vert = np.zeros(len(keys), np.int32)
    isv = ft.is_vertical.astype(np.int32)
    for k in range(height):
        fids = (keys >> (fb * k)) & mask
        usum += units[fids]
        vert += isv[fids]
    if height and (usum % m).any():
        raise InvariantViolation("per-floor units do not close to integer twists")
    twists = usum // m

    edge_chunks = list(_flip_edges_chunked(ft, keys, height))
    labels = _merge_components(len(keys), edge_chunks)
    del edge_chunks
    roots, inverse = np.unique(labels, return_inverse=True)
    ncomp = len(roots)
    sizes = np.bincount(inverse, minlength=ncomp).astype(np.int64)
    tmin = np.full(ncomp, np.iinfo(np.int64).max, np.int64)
    tmax = np.full(ncomp, np.iinfo(np.int64).min, np.int64)
    vmax = np.zeros(ncomp, np.int64)
    np.minimum.at(tmin, inverse, twists)
    np.maximum.at(tmax, inverse, twists)
    np.maximum.at(vmax, inverse, vert.astype(np.int64))
    return ComponentReport(d, height, len(keys), sizes, tmin, tmax, vmax)
