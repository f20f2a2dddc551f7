"""Uniform random tilings and spectral analysis of the transfer operators.

Sampling is exact, not approximate.  A backward table counts the ways to
finish a partial floor stack from every plug at every level; one uniform
integer below the total count is then decoded level by level through those
counts, so each tiling corresponds to exactly one residue.  Randomness is
counter-based: every (seed, index) pair keys its own Philox stream, which
makes draws reproducible and independent of evaluation order.

The spectral side covers the plain count matrix (dominant eigenvalue,
positive eigenvector, gap) and the twist-weighted matrix evaluated on the
unit circle.  The normalized top eigenvalue curve of the latter is the
contraction profile of the twist distribution: its curvature at zero gives
the per-floor variance and hence the constants of the Gaussian local limit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import LaurentPoly
from .errors import (
    CurvatureNonNegative,
    InvalidInput,
    InvariantViolation,
    NotPrimitive,
)
from .plugfloor import Tiling
from .transfer import TransferSystem, twist_polynomial

RESIDUAL_TOL = 1e-12
_DENSE_LIMIT = 4096  # direct dense spectra up to this many plugs
_U64 = (1 << 64) - 1


# -- exact uniform sampling ---------------------------------------------------------


@dataclass(eq=False)
class SamplerState:
    """Backward completion counts for one cylinder, plus the stream seed.

    backward[k][p] is the exact number of ways to build floors k..height-1
    starting from plug p and ending at the empty plug.  backward[height] is
    the indicator of the empty plug and backward[0][0] is the tiling count.
    """

    ts: TransferSystem
    height: int
    backward: list
    seed: int

    @property
    def total(self) -> int:
        return self.backward[0][0]


def sampler_state(ts: TransferSystem, height: int, seed: int = 0) -> SamplerState:
    if height < 0:
        raise InvalidInput("height must be nonnegative")
    n = ts.n
    w = [0] * n
    w[0] = 1
    table = [list(w)]
    for _ in range(height):
        w = [
            sum(c * w[q] for q, c in ts.a_rows[p].items())
            for p in range(n)
        ]
        table.append(list(w))
    table.reverse()
    if table[-1][0] != 1 or sum(table[-1]) != 1:
        raise InvariantViolation("backward table does not end at the empty plug")
    return SamplerState(ts, height, table, seed)


def _uniform_below(bound: int, seed: int, index: int) -> int:
    """Uniform integer in [0, bound) from the (seed, index) Philox stream."""
    bits = max(bound.bit_length(), 1)
    words = (bits + 63) // 64
    excess = words * 64 - bits
    g = np.random.Generator(
        np.random.Philox(key=np.array([seed & _U64, index & _U64], np.uint64))
    )
    while True:
        val = 0
        for raw in g.integers(0, 1 << 64, size=words, dtype=np.uint64):
            val = val << 64 | int(raw)
        val >>= excess
        if val < bound:
            return val


def decode_floor_ids(st: SamplerState, r: int) -> tuple:
    """Floor-id sequence of the r-th tiling in enumeration order.

    The decode walks plugs in ascending order weighted by completion
    counts, so residues 0..total-1 map bijectively onto tilings in the
    same order the exhaustive enumeration produces them.
    """
    from .dynamics import floor_table

    if not 0 <= r < st.total:
        raise InvalidInput(f"residue {r} outside [0, {st.total})")
    ft = floor_table(st.ts.disk)
    out = []
    p = 0
    for k in range(st.height):
        nxt = st.backward[k + 1]
        row = st.ts.a_rows[p]
        for q in sorted(row):
            block = row[q] * nxt[q]
            if r < block:
                rank, r = divmod(r, nxt[q])
                out.append(_floor_of_rank(ft, p, q, rank))
                p = q
                break
            r -= block
        else:
            raise InvariantViolation("backward table disagrees with floor counts")
    return tuple(out)


def _floor_of_rank(ft, p: int, q: int, rank: int) -> int:
    s, e = int(ft.by_below_indptr[p]), int(ft.by_below_indptr[p + 1])
    sub = ft.above[s:e]
    lo = s + int(np.searchsorted(sub, q, side="left"))
    hi = s + int(np.searchsorted(sub, q, side="right"))
    if not 0 <= rank < hi - lo:
        raise InvariantViolation("floor rank outside its plug-pair block")
    return lo + rank


def decode_tiling(st: SamplerState, r: int) -> Tiling:
    from .dynamics import floor_table

    ft = floor_table(st.ts.disk)
    return Tiling(st.ts.disk, [ft.floor(i) for i in decode_floor_ids(st, r)])


def sample_tiling(st: SamplerState, index: int = 0) -> Tiling:
    """Draw the index-th tiling of this state's stream, exactly uniform."""
    if st.total <= 0:
        raise InvalidInput("the cylinder has no tilings to sample")
    return decode_tiling(st, _uniform_below(st.total, st.seed, index))


def empirical_histogram(st: SamplerState, n_samples: int) -> dict:
    """Counts of sampled outcomes, keyed by floor-id sequence."""
    out: dict = {}
    total = st.total
    for i in range(n_samples):
        ids = decode_floor_ids(st, _uniform_below(total, st.seed, i))
        out[ids] = out.get(ids, 0) + 1
    return out


def plug_marginal(st: SamplerState, j: int) -> list:
    """Exact distribution of the plug at interface j, as Fractions.

    Interface 0 is the bottom boundary (point mass at the empty plug) and
    interface height is the top.  The weight of plug p is (ways to reach p
    in j floors) times (ways to finish in height-j floors), over the total.
    """
    if not 0 <= j <= st.height:
        raise InvalidInput(f"interface {j} outside [0, {st.height}]")
    fwd = st.backward[st.height - j]  # the count matrix is symmetric
    bwd = st.backward[j]
    total = st.total
    return [Fraction(fwd[p] * bwd[p], total) for p in range(st.ts.n)]


# -- spectra of the count matrix ----------------------------------------------------


def _require_primitive(A) -> None:
    """Some power of A must be entrywise positive (pattern squaring check).

    Positivity of any single power is enough: the count matrix has no zero
    row, so positivity persists at all later exponents.  Conversely a
    primitive matrix of size n is positive at exponent (n-1)^2 + 1, so
    squaring past that bound decides the question.
    """
    n = A.shape[0]
    counts = np.asarray((A != 0).sum(axis=1)).ravel()
    if counts.min() == 0:
        raise NotPrimitive("the count matrix has an empty row")
    target = (n - 1) * (n - 1) + 1
    X = A != 0  # sparse bool pattern
    dense = None
    k = 1
    while True:
        if dense is None:
            if X.nnz == n * n:
                return
            if X.nnz > 0.15 * n * n:
                dense = X.toarray().astype(np.float32)
        else:
            if (dense > 0).all():
                return
        if k >= target:
            raise NotPrimitive(f"no positive power found up to exponent {k}")
        if dense is None:
            X = (X @ X).astype(bool)
        else:
            dense = (dense @ dense > 0).astype(np.float32)
        k *= 2


def perron(ts: TransferSystem):
    """(lambda1, v1, gap) of the count matrix by power iteration.

    v1 is the unit eigenvector with positive entries; gap is the ratio of
    the second largest eigenvalue modulus to lambda1.  On small systems the
    full symmetric spectrum double-checks the iteration.
    """
    A = ts.a_csr()
    _require_primitive(A)
    n = ts.n
    v = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    for _ in range(500_000):
        w = A @ v
        lam = float(v @ w)  # Rayleigh quotient; A is symmetric
        res = float(np.linalg.norm(w - lam * v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            raise NotPrimitive("power iteration collapsed to zero")
        v = w / nw
        if res <= RESIDUAL_TOL * max(lam, 1.0):
            break
    else:
        raise InvariantViolation("power iteration did not reach the residual target")
    if lam <= 0.0 or (v <= 0.0).any():
        raise NotPrimitive("dominant eigenpair is not strictly positive")

    if n <= _DENSE_LIMIT:
        spec = np.linalg.eigvalsh(A.toarray())
        if abs(spec[-1] - lam) > 1e-9 * max(lam, 1.0):
            raise InvariantViolation(
                f"power iteration {lam!r} disagrees with dense spectrum {spec[-1]!r}"
            )
        second = max(abs(float(spec[0])), abs(float(spec[-2]))) if n > 1 else 0.0
    else:
        second = _deflated_second(A, lam, v)
    gap = second / lam
    if not gap < 1.0:
        raise NotPrimitive(f"no spectral gap: ratio {gap!r}")
    return lam, v, gap


def _deflated_second(A, lam: float, v1: np.ndarray) -> float:
    """|second eigenvalue| by power iteration orthogonal to v1."""
    n = A.shape[0]
    rng = np.random.Generator(np.random.Philox(key=np.array([3, 14], np.uint64)))
    u = rng.standard_normal(n)
    u -= (v1 @ u) * v1
    u /= np.linalg.norm(u)
    est = 0.0
    for _ in range(20_000):
        w = A @ u
        w -= (v1 @ w) * v1
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        prev, est = est, nw
        u = w / nw
        if abs(est - prev) <= 1e-10 * max(est, 1.0):
            break
    return est


# -- the contraction curve and Gaussian constants -----------------------------------


def _top_eigenvalue(H: np.ndarray) -> float:
    """Largest (most positive) eigenvalue of a Hermitian matrix."""
    n = H.shape[0]
    if n <= _DENSE_LIMIT:
        return float(np.linalg.eigvalsh(H)[-1])
    # shift by a row-sum bound so the top eigenvalue dominates in modulus
    s = float(np.abs(H).sum(axis=1).max())
    rng = np.random.Generator(np.random.Philox(key=np.array([2, 71], np.uint64)))
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u /= np.linalg.norm(u)
    lam = 0.0
    for _ in range(500_000):
        w = H @ u + s * u
        lam = float((np.conj(u) @ w).real)
        res = float(np.linalg.norm(w - lam * u))
        u = w / np.linalg.norm(w)
        if res <= RESIDUAL_TOL * max(abs(lam), 1.0):
            break
    else:
        raise InvariantViolation("eigenvalue iteration did not converge")
    return lam - s


def eta_point(ts: TransferSystem, t: float, lambda1: float) -> float:
    """Normalized top eigenvalue of the twist-weighted matrix at frequency t."""
    z = cmath.exp(1j * t / ts.m)
    M = ts.alpha_numeric(z)
    drift = float(np.abs(M - M.conj().T).max())
    if drift > 1e-9 * max(lambda1, 1.0):
        raise InvariantViolation("twist-weighted matrix is not Hermitian on the circle")
    return _top_eigenvalue((M + M.conj().T) / 2.0) / lambda1


def eta_curve(ts: TransferSystem, samples, lambda1: float | None = None) -> list:
    """eta1 at each frequency in `samples` (precompute lambda1 to reuse it)."""
    if lambda1 is None:
        lambda1 = perron(ts)[0]
    return [eta_point(ts, float(t), lambda1) for t in samples]


def gaussian_constants(ts: TransferSystem, lambda1: float | None = None):
    """(sigma2, C0, C1) from the curvature of eta1 at frequency zero.

    sigma2 is the per-floor variance -eta1''(0), estimated by 5-point
    central differences over a sweep of step sizes with Richardson
    refinement; the sweep guards against both truncation and cancellation.
    """
    if lambda1 is None:
        lambda1 = perron(ts)[0]
    e0 = eta_point(ts, 0.0, lambda1)
    if abs(e0 - 1.0) > 1e-10:
        raise InvariantViolation(f"eta(0) = {e0!r}, expected 1")
    second = []
    for h in (0.4, 0.2, 0.1, 0.05):
        e1, e2 = eta_point(ts, h, lambda1), eta_point(ts, 2 * h, lambda1)
        second.append((-2 * e2 + 32 * e1 - 30 * e0) / (12 * h * h))
    refined = [(16 * b - a) / 15 for a, b in zip(second, second[1:])]
    d2 = refined[-1]
    if abs(refined[-1] - refined[-2]) > 1e-4 * abs(d2) + 1e-13:
        raise InvariantViolation(f"curvature estimates did not settle: {refined!r}")
    sigma2 = -d2
    if sigma2 <= 0.0:
        raise CurvatureNonNegative(f"flat contraction curve: eta1''(0) = {d2!r}")
    c1 = 1.0 / (2.0 * sigma2)
    c0 = 1.0 / math.sqrt(2.0 * math.pi * sigma2)
    if abs(c0 * math.sqrt(math.pi / c1) - 1.0) > 1e-12:
        raise InvariantViolation("Gaussian constants do not normalize to 1")
    return sigma2, c0, c1


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Perron data, contraction curve, and Gaussian constants of one disk."""

    lambda1: float
    v1: np.ndarray
    gap: float
    eta_curve: tuple  # (t, eta1(t)) pairs over [-pi, pi]
    sigma2: float
    c0: float
    c1: float

    def to_json(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "gap": self.gap,
            "sigma2": self.sigma2,
            "C0": self.c0,
            "C1": self.c1,
            "v1": [float(x) for x in self.v1],
            "etaCurve": [[t, e] for t, e in self.eta_curve],
        }


def spectral_report(ts: TransferSystem, eta_samples: int = 33) -> SpectralReport:
    """Full spectral summary; the frequency grid must include zero."""
    if eta_samples < 3 or eta_samples % 2 == 0:
        raise InvalidInput("eta_samples must be odd and at least 3")
    lambda1, v1, gap = perron(ts)
    grid = np.linspace(-math.pi, math.pi, eta_samples)
    grid[eta_samples // 2] = 0.0
    curve = tuple((float(t), eta_point(ts, float(t), lambda1)) for t in grid)
    mid = eta_samples // 2
    if abs(curve[mid][1] - 1.0) > 1e-10:
        raise InvariantViolation("eta(0) is not 1")
    for i in range(mid):
        if abs(curve[i][1] - curve[-1 - i][1]) > 1e-9:
            raise InvariantViolation("contraction curve is not even in t")
    for t, e in curve:
        if t != 0.0 and not e < 1.0:
            raise InvariantViolation(f"no contraction at t = {t}: eta = {e}")
    sigma2, c0, c1 = gaussian_constants(ts, lambda1)
    return SpectralReport(lambda1, v1, gap, curve, sigma2, c0, c1)


# -- exact distribution checks ------------------------------------------------------


def twist_moments(poly: LaurentPoly):
    """(total, mean, variance) of the twist distribution, exact."""
    total = sum(poly.coeffs.values())
    if total <= 0:
        raise InvalidInput("empty distribution")
    mean = Fraction(sum(t * c for t, c in poly.coeffs.items()), total)
    msq = Fraction(sum(t * t * c for t, c in poly.coeffs.items()), total)
    return total, mean, msq - mean * mean


def cdf_sup_gap(poly: LaurentPoly, sd: float, center: float = 0.0) -> float:
    """Sup distance between the exact twist CDF and a Gaussian fit.

    The twist law lives on the integers, so its CDF is compared to the
    Gaussian halfway between consecutive atoms (the standard continuity
    correction); sampling at the atoms themselves would only measure the
    largest atom mass, not the quality of the limit.
    """
    if sd <= 0.0:
        raise InvalidInput("standard deviation must be positive")
    total = sum(poly.coeffs.values())
    lo, hi = poly.degree_bounds()
    acc = 0
    worst = 0.0
    for t in range(lo - 1, hi + 1):
        acc += poly.coeffs.get(t, 0)
        x = (t + 0.5 - center) / sd
        g = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
        worst = max(worst, abs(acc / total - g))
    return worst


def mod_uniformity(ts: TransferSystem, n: int, height: int) -> float:
    """Largest deviation of the twist distribution mod n from uniform."""
    if n <= 0:
        raise InvalidInput("modulus must be positive")
    poly = twist_polynomial(ts, height)
    total = sum(poly.coeffs.values())
    agg = [0] * n
    for t, c in poly.coeffs.items():
        agg[t % n] += c
    share = Fraction(1, n)
    return float(max(abs(Fraction(a, total) - share) for a in agg))
