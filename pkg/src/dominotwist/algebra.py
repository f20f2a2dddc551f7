"""Exact Laurent-polynomial arithmetic and plug-indexed sparse matrices.

Coefficients are arbitrary-precision integers throughout; nothing in this
module rounds.  A LaurentPoly maps integer exponents of the working variable
to nonzero coefficients.  PlugMatrix stores one dict per row and is scalar
agnostic: entries may be ints, LaurentPoly, or complex numbers, as long as a
row's scalars support + and *.

For long vector propagations there is also a packed form: a polynomial with
nonnegative coefficients, each below 2**lane_bits, becomes a single big
integer with one lane of lane_bits bits per exponent.  Multiplying by a
monomial is then an integer multiply plus shift, and addition never carries
across lanes as long as the final coefficients stay below the lane bound.
Pack/unpack are exact inverses; callers choose lane_bits from an exact
coefficient bound.
"""

from __future__ import annotations

import cmath

import gmpy2

from .errors import NotOnUnitCircle

UNIT_CIRCLE_TOL = 1e-12


class LaurentPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        if coeffs is None:
            self.coeffs = {}
        else:
            self.coeffs = {int(e): int(c) for e, c in dict(coeffs).items() if c != 0}

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def monomial(cls, exp: int, coef: int = 1):
        return cls({exp: coef})

    @classmethod
    def const(cls, c: int):
        return cls({0: c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    def __getitem__(self, exp: int) -> int:
        return self.coeffs.get(exp, 0)

    def support(self):
        return sorted(self.coeffs)

    def degree_bounds(self):
        if not self.coeffs:
            return (0, 0)
        return (min(self.coeffs), max(self.coeffs))

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly({e: c * other for e, c in self.coeffs.items()})
        other = _as_poly(other)
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return LaurentPoly(out)

    __rmul__ = __mul__

    def mirror(self):
        """Substitute the variable by its inverse (exponent negation)."""
        return LaurentPoly({-e: c for e, c in self.coeffs.items()})

    def __call__(self, z: complex) -> complex:
        return sum(c * complex(z) ** e for e, c in self.coeffs.items())

    def coeff_sum(self) -> int:
        return sum(self.coeffs.values())

    def abs_coeff_sum(self) -> int:
        return sum(abs(c) for c in self.coeffs.values())

    def rebase(self, m: int) -> "LaurentPoly":
        """Divide all exponents by m; every exponent must be a multiple."""
        out = {}
        for e, c in self.coeffs.items():
            if e % m:
                from .errors import CocycleNotClosed

                raise CocycleNotClosed(f"exponent {e} not a multiple of {m}")
            out[e // m] = c
        return LaurentPoly(out)

    def to_json(self, m: int = 1) -> dict:
        return {"m": m, "coeffs": {str(e): str(c) for e, c in sorted(self.coeffs.items())}}

    @classmethod
    def from_json(cls, obj: dict) -> "LaurentPoly":
        return cls({int(e): int(c) for e, c in obj["coeffs"].items()})

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            return "LaurentPoly(0)"
        terms = " + ".join(f"{c}*q^{e}" for e, c in sorted(self.coeffs.items()))
        return f"LaurentPoly({terms})"


def _as_poly(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, int):
        return LaurentPoly.const(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to LaurentPoly")


def poly_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Exact product of two Laurent polynomials."""
    return _as_poly(a) * _as_poly(b)


class PlugMatrix:
    """Square sparse matrix indexed by plug ids; rows[i] maps j -> entry."""

    def __init__(self, dim: int, rows=None):
        self.dim = dim
        self.rows: list[dict] = rows if rows is not None else [dict() for _ in range(dim)]

    def entry(self, i: int, j: int):
        return self.rows[i].get(j, 0)

    def add_to(self, i: int, j: int, value):
        row = self.rows[i]
        cur = row.get(j)
        row[j] = value if cur is None else cur + value

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def transpose(self) -> "PlugMatrix":
        out = PlugMatrix(self.dim)
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                out.rows[j][i] = v
        return out

    def is_symmetric(self) -> bool:
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                if self.rows[j].get(i, 0) != v:
                    return False
        return True

    def apply(self, vec):
        """Matrix-vector product, exact for int/LaurentPoly scalars."""
        out = []
        for row in self.rows:
            total = 0
            for j, v in row.items():
                total = total + v * vec[j]
            out.append(total)
        return out

    def map_entries(self, fn) -> "PlugMatrix":
        return PlugMatrix(self.dim, [{j: fn(v) for j, v in row.items()} for row in self.rows])


def mat_apply(M: PlugMatrix, v):
    """Apply a plug matrix to a plug-indexed vector."""
    return M.apply(v)


def evaluate(M: PlugMatrix, z: complex):
    """Evaluate a LaurentPoly matrix at a point on the unit circle.

    Returns a dense complex numpy array; Hermitian whenever the matrix has
    the exponent-reversal symmetry between transposed entries.
    """
    import numpy as np

    z = complex(z)
    if abs(abs(z) - 1.0) > UNIT_CIRCLE_TOL:
        raise NotOnUnitCircle(f"|z| = {abs(z)!r}")
    out = np.zeros((M.dim, M.dim), dtype=np.complex128)
    for i, row in enumerate(M.rows):
        for j, v in row.items():
            out[i, j] = v(z) if isinstance(v, LaurentPoly) else complex(v)
    return out


def unit_vector(dim: int, i: int, one=1):
    v = [0] * dim
    v[i] = one
    return v


# -- packed lane representation ----------------------------------------------

def pack_poly(p: LaurentPoly, lane_bits: int):
    """Pack a nonnegative-coefficient polynomial into (offset, big integer).

    Lane k (k >= 0) of the integer holds the coefficient of exponent
    offset + k.  Requires every coefficient to fit in lane_bits bits.
    """
    if p.is_zero():
        return 0, gmpy2.mpz(0)
    lo, hi = p.degree_bounds()
    val = gmpy2.mpz(0)
    limit = 1 << lane_bits
    for e, c in p.coeffs.items():
        if c < 0 or c >= limit:
            raise ValueError(f"coefficient {c} does not fit in {lane_bits} lane bits")
        val += gmpy2.mpz(c) << (lane_bits * (e - lo))
    return lo, val


def unpack_poly(offset: int, val, lane_bits: int) -> LaurentPoly:
    """Inverse of pack_poly (lane_bits must be a multiple of 8)."""
    if val == 0:
        return LaurentPoly.zero()
    if lane_bits % 8:
        raise ValueError("lane_bits must be a multiple of 8")
    step = lane_bits // 8
    v = int(val)
    if v < 0:
        raise ValueError("packed values are nonnegative by construction")
    raw = v.to_bytes((v.bit_length() + 7) // 8, "little")
    coeffs = {}
    for k in range(0, len(raw), step):
        c = int.from_bytes(raw[k : k + step], "little")
        if c:
            coeffs[offset + k // step] = c
    return LaurentPoly(coeffs)
