"""Transfer systems: the plug adjacency matrix and its twist-weighted form.

Building a system walks every floor of the disk exactly once: first every
set of disjoint planar dominoes (a partial matching of the cell graph), then
every balanced split of the uncovered cells into a below plug and an above
plug.  Each floor contributes 1 to the plain count matrix entry and one
monomial to the weighted entry, with exponent m times the per-floor cocycle
value (an exact integer).

The twist polynomial of height N is obtained by propagating a polynomial
vector N times from the empty plug.  Two interchangeable routes exist: a
plain dict-of-exponents route, and a packed route that stores each vector
entry as one big integer with fixed-width coefficient lanes (see
algebra.pack_poly).  Both are exact; the packed route is the fast one for
large heights and supports checkpoint/resume.
"""

from __future__ import annotations

import os
import pickle

import gmpy2
import numpy as np

from .algebra import LaurentPoly, PlugMatrix, unpack_poly
from .errors import InvalidInput
from .plugfloor import Floor, PlugTable, enumerate_plugs, plug_table
from .region import Disk
from .twist import DEFAULT_KERNEL, FloorCocycle, TwistKernel, edge_unit_table, make_kernel_cocycle


class TransferSystem:
    """Plug-indexed count matrix A and weighted matrix alpha for one disk."""

    def __init__(self, disk, plugs, kernel, m, a_rows, monos):
        self.disk: Disk = disk
        self.plugs: PlugTable = plugs
        self.kernel: TwistKernel = kernel
        self.m: int = m
        self.n: int = len(plugs)
        self.a_rows: list[dict] = a_rows
        # monomial arrays: alpha[row, col] = sum_k coef[k] * q~^exp[k]
        self.mono_row, self.mono_col, self.mono_exp, self.mono_coef = monos
        self._a_matrix = None
        self._alpha_matrix = None
        self._csr = None

    @property
    def A(self) -> PlugMatrix:
        if self._a_matrix is None:
            rows = [dict(r) for r in self.a_rows]
            self._a_matrix = PlugMatrix(self.n, rows)
        return self._a_matrix

    @property
    def alpha(self) -> PlugMatrix:
        if self._alpha_matrix is None:
            rows = [dict() for _ in range(self.n)]
            for r, c, e, co in zip(
                self.mono_row, self.mono_col, self.mono_exp, self.mono_coef
            ):
                d = rows[int(r)].setdefault(int(c), {})
                d[int(e)] = d.get(int(e), 0) + int(co)
            self._alpha_matrix = PlugMatrix(
                self.n, [{c: LaurentPoly(d) for c, d in row.items()} for row in rows]
            )
        return self._alpha_matrix

    def a_csr(self):
        """Float CSR copy of A for spectral work."""
        if self._csr is None:
            from scipy.sparse import csr_matrix

            rows, cols, vals = [], [], []
            for i, row in enumerate(self.a_rows):
                for j, v in row.items():
                    rows.append(i)
                    cols.append(j)
                    vals.append(float(v))
            self._csr = csr_matrix(
                (vals, (rows, cols)), shape=(self.n, self.n), dtype=np.float64
            )
        return self._csr

    def alpha_numeric(self, z: complex):
        """Dense complex evaluation of alpha at a unit-circle point."""
        from .algebra import UNIT_CIRCLE_TOL
        from .errors import NotOnUnitCircle

        if abs(abs(z) - 1.0) > UNIT_CIRCLE_TOL:
            raise NotOnUnitCircle(f"|z| = {abs(z)!r}")
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        zpow = {}
        for r, c, e, co in zip(self.mono_row, self.mono_col, self.mono_exp, self.mono_coef):
            e = int(e)
            w = zpow.get(e)
            if w is None:
                w = zpow[e] = complex(z) ** e
            out[int(r), int(c)] += int(co) * w
        return out


def _floor_events(d: Disk):
    """Yield (edges, covered_bits) for every set of disjoint planar dominoes."""
    n = d.n_cells
    neighbors = d.neighbors
    edges: list[tuple[int, int]] = []

    def walk(i: int, covered: int):
        while i < n and covered >> i & 1:
            i += 1
        if i == n:
            yield tuple(edges), covered
            return
        # cell i stays uncovered by planars (goes to one of the plugs)
        yield from walk(i + 1, covered)
        # or cell i is matched to a later neighbor
        base = covered | (1 << i)
        for j in neighbors[i]:
            if j > i and not covered >> j & 1:
                edges.append((i, j))
                yield from walk(i + 1, base | (1 << j))
                edges.pop()

    yield from walk(0, 0)


def _subsets_with_sums(cells: list[int], weights: list[int]):
    """Group subsets of `cells` by size as (bits, weight_sum) lists."""
    n = len(cells)
    out = [[(0, 0)]]
    prev = [(0, 0, -1)]  # (bits, weight sum, last position used)
    for _size in range(1, n + 1):
        cur = []
        for bits, ws, last in prev:
            for k in range(last + 1, n):
                cur.append((bits | (1 << cells[k]), ws + weights[k], k))
        prev = cur
        out.append([(b, w) for b, w, _ in cur])
    return out


def build_transfer(d: Disk, cocycle=None, bound: int | None = None) -> TransferSystem:
    """Build the transfer system for a disk under the given cocycle.

    `cocycle` may be a FloorCocycle, a TwistKernel (wrapped in the per-floor
    kernel cocycle), or None for the calibrated default kernel.
    """
    if cocycle is None:
        cocycle = DEFAULT_KERNEL
    if isinstance(cocycle, TwistKernel):
        kernel = cocycle
        cocycle = None  # fast path below
    elif isinstance(cocycle, FloorCocycle):
        kernel = cocycle.kernel
        if cocycle.kind == "perFloorKernel":
            cocycle = None
    else:
        raise InvalidInput(f"cannot build from {type(cocycle).__name__}")

    plugs = plug_table(d) if bound is None else enumerate_plugs(d, bound)
    n_cells = d.n_cells
    by_bits = {p.bits: p.index for p in plugs.plugs}
    m = kernel.m if cocycle is None else cocycle.m

    table = edge_unit_table(d, kernel) if cocycle is None else None

    a_rows: list[dict] = [dict() for _ in range(len(plugs))]
    mono: dict = {}
    full = (1 << n_cells) - 1
    is_black = d.is_black

    for edges, covered in _floor_events(d):
        free = full & ~covered
        cells = [i for i in range(n_cells) if free >> i & 1]
        whites = [c for c in cells if not is_black[c]]
        blacks = [c for c in cells if is_black[c]]
        if len(whites) != len(blacks):  # cannot happen: dominoes are balanced
            continue
        if cocycle is None:
            wgt = []
            for c in cells:
                t = table[c]
                wgt.append(sum(t.get(e, 0) for e in edges))
            total_w = sum(wgt)
            windex = {c: k for k, c in enumerate(cells)}
            wsub = _subsets_with_sums(whites, [wgt[windex[c]] for c in whites])
            bsub = _subsets_with_sums(blacks, [wgt[windex[c]] for c in blacks])
            for size in range(len(whites) + 1):
                for wb, ws in wsub[size]:
                    for bb, bs in bsub[size]:
                        below = wb | bb
                        i0 = by_bits[below]
                        i1 = by_bits[free ^ below]
                        exp = 2 * (ws + bs) - total_w
                        row = a_rows[i0]
                        row[i1] = row.get(i1, 0) + 1
                        key = (i0, i1, exp)
                        mono[key] = mono.get(key, 0) + 1
        else:
            wsub = _subsets_with_sums(whites, [0] * len(whites))
            bsub = _subsets_with_sums(blacks, [0] * len(blacks))
            for size in range(len(whites) + 1):
                for wb, _ in wsub[size]:
                    for bb, _ in bsub[size]:
                        below = wb | bb
                        i0 = by_bits[below]
                        i1 = by_bits[free ^ below]
                        f = Floor(plugs[i0], plugs[i1], edges)
                        exp = cocycle.value_units(f)
                        row = a_rows[i0]
                        row[i1] = row.get(i1, 0) + 1
                        key = (i0, i1, exp)
                        mono[key] = mono.get(key, 0) + 1

    keys = sorted(mono)
    mono_row = np.fromiter((k[0] for k in keys), dtype=np.int32, count=len(keys))
    mono_col = np.fromiter((k[1] for k in keys), dtype=np.int32, count=len(keys))
    mono_exp = np.fromiter((k[2] for k in keys), dtype=np.int64, count=len(keys))
    mono_coef = np.fromiter((mono[k] for k in keys), dtype=np.int64, count=len(keys))

    ts = TransferSystem(d, plugs, kernel, m, a_rows, (mono_row, mono_col, mono_exp, mono_coef))
    _check_build(ts)
    return ts


def _check_build(ts: TransferSystem):
    """A must be symmetric and must equal the coefficient sums of alpha."""
    from .errors import InvariantViolation

    sums: dict = {}
    for r, c, co in zip(ts.mono_row, ts.mono_col, ts.mono_coef):
        key = (int(r), int(c))
        sums[key] = sums.get(key, 0) + int(co)
    total = 0
    for i, row in enumerate(ts.a_rows):
        for j, v in row.items():
            total += 1
            if sums.get((i, j), 0) != v:
                raise InvariantViolation(f"alpha coefficient sum mismatch at {(i, j)}")
            if ts.a_rows[j].get(i, 0) != v:
                raise InvariantViolation(f"count matrix not symmetric at {(i, j)}")
    if total != len(sums):
        raise InvariantViolation("alpha has entries where A has none")


def apply_count(ts: TransferSystem, vec: list) -> list:
    """One exact integer transfer step (A applied to a plug vector)."""
    out = [0] * ts.n
    for i, row in enumerate(ts.a_rows):
        vi = vec[i]
        if vi:
            for j, v in row.items():
                out[j] += v * vi
    return out


def count_cylinder(ts: TransferSystem, height: int) -> int:
    """Exact number of tilings of the cylinder of the given height."""
    return count_cork(ts, height, ts.plugs.empty, ts.plugs.empty)


def count_cork(ts: TransferSystem, height: int, p0, p_n) -> int:
    """Exact number of tilings with the given boundary plugs removed."""
    if height < 0:
        raise InvalidInput("height must be nonnegative")
    vec = [0] * ts.n
    vec[p0.index] = 1
    for _ in range(height):
        vec = apply_count(ts, vec)
    return vec[p_n.index]


def count_vector_bits(ts: TransferSystem, height: int) -> int:
    """Max bit length over all entries of A^k e for k <= height (lane sizing)."""
    vec = [0] * ts.n
    vec[0] = 1
    worst = 1
    for _ in range(height):
        vec = apply_count(ts, vec)
        worst = max(worst, max(v.bit_length() for v in vec))
    return worst


def twist_polynomial(
    ts: TransferSystem,
    height: int,
    route: str = "auto",
    checkpoint_dir: str | None = None,
    checkpoint_every: int = 8,
) -> LaurentPoly:
    """The twist generating polynomial P_height in q, exactly.

    Exponents of the raw propagation live in the q~ scale and must all be
    multiples of m on the closed entry (CocycleNotClosed otherwise); the
    returned polynomial is rebased so that its exponents are twist values.
    """
    if height < 0:
        raise InvalidInput("height must be nonnegative")
    if route == "auto":
        route = "packed" if height * len(ts.mono_row) > 2_000_000 else "dict"
    if route == "dict":
        raw = _propagate_dict(ts, height)
    elif route == "packed":
        raw = _propagate_packed(ts, height, checkpoint_dir, checkpoint_every)
    else:
        raise InvalidInput(f"unknown route {route!r}")
    return raw.rebase(ts.m)


def _propagate_dict(ts: TransferSystem, height: int) -> LaurentPoly:
    vec: list = [None] * ts.n
    vec[0] = {0: 1}
    row = ts.mono_row
    col = ts.mono_col
    exp = ts.mono_exp
    coef = ts.mono_coef
    for _ in range(height):
        new: list = [None] * ts.n
        for k in range(len(row)):
            src = vec[row[k]]
            if src is None:
                continue
            j = col[k]
            e0 = int(exp[k])
            c0 = int(coef[k])
            dst = new[j]
            if dst is None:
                dst = new[j] = {}
            for e, c in src.items():
                ee = e + e0
                s = dst.get(ee, 0) + c * c0
                if s:
                    dst[ee] = s
                else:
                    del dst[ee]
        vec = new
    closed = vec[0] or {}
    return LaurentPoly(closed)


def _propagate_packed(
    ts: TransferSystem, height: int, checkpoint_dir: str | None, every: int
) -> LaurentPoly:
    lane = count_vector_bits(ts, height) + 2
    lane += (-lane) % 64  # byte-aligned lanes unpack cheaply
    offs: list = [0] * ts.n
    vals: list = [None] * ts.n
    vals[0] = gmpy2.mpz(1)
    start = 0

    if checkpoint_dir:
        state = _load_checkpoint(checkpoint_dir, ts, height, lane)
        if state is not None:
            start, offs, vals = state

    row = ts.mono_row
    col = ts.mono_col
    exp = ts.mono_exp
    coef = ts.mono_coef
    n_mono = len(row)
    for step in range(start, height):
        new_offs: list = [0] * ts.n
        new_vals: list = [None] * ts.n
        for k in range(n_mono):
            src = vals[row[k]]
            if src is None:
                continue
            j = col[k]
            t_off = offs[row[k]] + int(exp[k])
            term = src * int(coef[k])
            cur = new_vals[j]
            if cur is None:
                new_vals[j] = term
                new_offs[j] = t_off
            else:
                c_off = new_offs[j]
                if t_off < c_off:
                    new_vals[j] = (cur << (lane * (c_off - t_off))) + term
                    new_offs[j] = t_off
                else:
                    new_vals[j] = cur + (term << (lane * (t_off - c_off)))
        offs, vals = new_offs, new_vals
        if checkpoint_dir and ((step + 1) % every == 0 or step + 1 == height):
            _save_checkpoint(checkpoint_dir, ts, height, lane, step + 1, offs, vals)

    if vals[0] is None:
        return LaurentPoly.zero()
    return unpack_poly(offs[0], vals[0], lane)


def _checkpoint_path(directory: str, ts: TransferSystem, height: int) -> str:
    tag = f"h{height}_n{ts.n}_m{ts.m}_mono{len(ts.mono_row)}"
    return os.path.join(directory, f"propagation_{tag}.pkl")


def _save_checkpoint(directory, ts, height, lane, step, offs, vals):
    os.makedirs(directory, exist_ok=True)
    blob = {
        "step": step,
        "lane": lane,
        "offs": list(offs),
        "vals": [None if v is None else int(v) for v in vals],
    }
    path = _checkpoint_path(directory, ts, height)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        pickle.dump(blob, fh, protocol=pickle.HIGHEST_PROTOCOL)
    os.replace(tmp, path)


def _load_checkpoint(directory, ts, height, lane):
    path = _checkpoint_path(directory, ts, height)
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        blob = pickle.load(fh)
    if blob["lane"] != lane or blob["step"] > height:
        return None
    vals = [None if v is None else gmpy2.mpz(v) for v in blob["vals"]]
    return blob["step"], list(blob["offs"]), vals


def alpha_power(ts: TransferSystem, height: int) -> PlugMatrix:
    """Full matrix power of alpha with exact polynomial entries (small disks)."""
    cur = ts.alpha
    if height == 0:
        rows = [dict() for _ in range(ts.n)]
        for i in range(ts.n):
            rows[i][i] = LaurentPoly.const(1)
        return PlugMatrix(ts.n, rows)
    out = cur
    for _ in range(height - 1):
        out = _poly_matmul(out, cur)
    return out


def _poly_matmul(a: PlugMatrix, b: PlugMatrix) -> PlugMatrix:
    out = PlugMatrix(a.dim)
    for i, row in enumerate(a.rows):
        acc: dict = {}
        for k, pik in row.items():
            for j, pkj in b.rows[k].items():
                cur = acc.get(j)
                prod = pik * pkj
                acc[j] = prod if cur is None else cur + prod
        out.rows[i] = {j: p for j, p in acc.items() if not p.is_zero()}
    return out


def strict_contraction_report(ts: TransferSystem, max_height: int = 20, t_points=None) -> dict:
    """Find the smallest height at which every weighted entry is a genuine
    mixture: nonzero, not a monomial, and strictly smaller in modulus than
    the count entry at every test evaluation point off 1.

    Returns {"height": N0 or None, "checked": max_height, "points": [...]}.
    """
    import math as _math

    if t_points is None:
        t_points = (_math.pi / 4, _math.pi / 2, _math.pi)
    a_pow = None
    alpha_pow = None
    numeric = [ts.alpha_numeric(complex(_math.cos(t / ts.m), _math.sin(t / ts.m))) for t in t_points]
    num_pow = [np.eye(ts.n, dtype=np.complex128) for _ in t_points]
    a_int = ts.A
    for height in range(1, max_height + 1):
        alpha_pow = ts.alpha if alpha_pow is None else _poly_matmul(alpha_pow, ts.alpha)
        a_pow = a_int if a_pow is None else _int_matmul(a_pow, a_int)
        num_pow = [np_prev @ m for np_prev, m in zip(num_pow, numeric)]
        ok = True
        for i in range(ts.n):
            arow = a_pow.rows[i]
            prow = alpha_pow.rows[i]
            if len(arow) != ts.n:
                ok = False
                break
            for j, cnt in arow.items():
                p = prow.get(j)
                if p is None or p.is_zero() or p.is_monomial():
                    ok = False
                    break
                for mat in num_pow:
                    if not abs(mat[i, j]) < cnt * (1 - 1e-9):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return {"height": height, "checked": max_height, "points": list(t_points)}
    return {"height": None, "checked": max_height, "points": list(t_points)}


def _int_matmul(a: PlugMatrix, b: PlugMatrix) -> PlugMatrix:
    out = PlugMatrix(a.dim)
    for i, row in enumerate(a.rows):
        acc: dict = {}
        for k, vik in row.items():
            for j, vkj in b.rows[k].items():
                acc[j] = acc.get(j, 0) + vik * vkj
        out.rows[i] = acc
    return out


def cylinder_tilings_stream(ts: TransferSystem, height: int):
    """Deterministic stream of all cylinder tilings (delegated to dynamics)."""
    from .dynamics import enumerate_tilings

    return enumerate_tilings(ts.disk, height)
