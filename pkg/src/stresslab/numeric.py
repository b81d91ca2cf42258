"""Exact arithmetic and exact linear algebra kernels.

Rationals are ``fractions.Fraction`` (arbitrary precision, gcd-reduced,
positive denominator), matrices are dense lists of rows.  On top of the
rationals sits :class:`QuadExt`, the multi-quadratic numbers
``sum_K c_K * sqrt(prod K)`` with squarefree integer radicands encoded as
sorted tuples of primes.  Distinct squarefree radicands have Q-linearly
independent square roots, so a QuadExt is zero iff it has no terms; every
zero test in this module is exact.

Everything here is pure and allocation-immutable: no function mutates its
arguments, and QuadExt instances are never modified after construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

Rational = Fraction
Kernel = tuple[int, ...]

DEFAULT_PRIME_BOUND = 10**6


class FactorizationIncomplete(Exception):
    """Trial division left a cofactor that cannot be certified prime."""


def _trial_factor(n: int, bound: int) -> tuple[dict[int, int], int]:
    """Factor n by trial division up to ``bound``.

    Returns (exponents, remainder) where remainder has no prime factor
    <= bound.  Uses a 2/3 wheel; good enough at desk scale.
    """
    factors: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    p = 5
    while p <= bound and p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                factors[q] = factors.get(q, 0) + 1
                n //= q
        p += 6
    if 1 < n <= bound * bound or (n > 1 and p * p > n):
        # no factor <= bound and n <= bound^2, or trial division ran to
        # sqrt(n): either way n is prime
        factors[n] = factors.get(n, 0) + 1
        n = 1
    return factors, n


def squarefree_part(
    q: Fraction | int, prime_bound: int = DEFAULT_PRIME_BOUND
) -> tuple[Kernel, Fraction]:
    """Split a positive rational as q = cofactor^2 * (product of kernel).

    The kernel is a sorted tuple of distinct primes whose product is the
    squarefree part of q, so sqrt(q) = cofactor * sqrt(prod kernel).

    Raises:
      ValueError: q <= 0.
      FactorizationIncomplete: a cofactor above prime_bound^2 survives
        trial division and is not a perfect square.
    """
    q = Fraction(q)
    if q <= 0:
        raise ValueError("squarefree_part needs a positive rational")
    # sqrt(a/b) = sqrt(a*b)/b, so one integer factorization suffices
    n = q.numerator * q.denominator
    factors, remainder = _trial_factor(n, prime_bound)
    cofactor = 1
    kernel: list[int] = []
    for p, e in factors.items():
        cofactor *= p ** (e // 2)
        if e % 2:
            kernel.append(p)
    if remainder > 1:
        root = math.isqrt(remainder)
        if root * root == remainder:
            cofactor *= root
        else:
            raise FactorizationIncomplete(
                f"cofactor {remainder} survives trial division up to {prime_bound}"
            )
    return tuple(sorted(kernel)), Fraction(cofactor, q.denominator)


class QuadExt:
    """Element of the multi-quadratic extension Q(sqrt(p) : p prime).

    Stored as a map from squarefree kernels (sorted prime tuples) to
    nonzero rational coefficients; the empty kernel is the rational part.
    Zero is the empty map.  Supports ring arithmetic, exact division, and
    exact zero tests; mixed expressions with int/Fraction coerce.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Kernel, Fraction] | None = None):
        self.terms: dict[Kernel, Fraction] = {
            k: c for k, c in (terms or {}).items() if c != 0
        }

    @staticmethod
    def from_rational(q: Fraction | int) -> "QuadExt":
        q = Fraction(q)
        return QuadExt({(): q} if q else {})

    @staticmethod
    def sqrt_of(
        q: Fraction | int, prime_bound: int = DEFAULT_PRIME_BOUND
    ) -> "QuadExt":
        """Exact square root of a nonnegative rational."""
        q = Fraction(q)
        if q == 0:
            return QuadExt()
        kernel, cofactor = squarefree_part(q, prime_bound)
        return QuadExt({kernel: cofactor})

    @staticmethod
    def _coerce(x: "QuadExt | Fraction | int") -> "QuadExt":
        return x if isinstance(x, QuadExt) else QuadExt.from_rational(x)

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(k == () for k in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational element")
        return self.terms.get((), Fraction(0))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadExt.from_rational(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __neg__(self) -> "QuadExt":
        return QuadExt({k: -c for k, c in self.terms.items()})

    def __add__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return QuadExt(out)

    __radd__ = __add__

    def __sub__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        return self + (-self._coerce(other))

    def __rsub__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        return self._coerce(other) + (-self)

    def __mul__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        other = self._coerce(other)
        out: dict[Kernel, Fraction] = {}
        for ka, ca in self.terms.items():
            sa = set(ka)
            for kb, cb in other.terms.items():
                # sqrt(A)*sqrt(B) = (prod of shared primes) * sqrt(A xor B)
                sb = set(kb)
                shared = 1
                for p in sa & sb:
                    shared *= p
                k = tuple(sorted(sa ^ sb))
                out[k] = out.get(k, Fraction(0)) + ca * cb * shared
        return QuadExt(out)

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        """Exact inverse by peeling one prime at a time.

        Write self = A + B*sqrt(p) with A, B free of p; then
        1/self = (A - B*sqrt(p)) / (A^2 - p*B^2) and the denominator lives
        in a strictly smaller multi-quadratic field.  It is nonzero because
        sqrt(p) is irrational over that field.
        """
        if not self.terms:
            raise ZeroDivisionError("inverse of zero")
        primes = set()
        for k in self.terms:
            primes.update(k)
        if not primes:
            return QuadExt.from_rational(1 / self.terms[()])
        p = max(primes)
        a_terms: dict[Kernel, Fraction] = {}
        b_terms: dict[Kernel, Fraction] = {}
        for k, c in self.terms.items():
            if p in k:
                b_terms[tuple(x for x in k if x != p)] = c
            else:
                a_terms[k] = c
        a, b = QuadExt(a_terms), QuadExt(b_terms)
        conj = a - b * QuadExt({(p,): Fraction(1)})
        denom = a * a - b * b * p
        return conj * denom.inverse()

    def __truediv__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other: "QuadExt | Fraction | int") -> "QuadExt":
        return self._coerce(other) * self.inverse()

    def to_mpf(self, dps: int = 60) -> mpmath.mpf:
        """Evaluate at dps decimal digits (diagnostics and float fallback)."""
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for k, c in self.terms.items():
                rad = 1
                for p in k:
                    rad *= p
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(rad)
            return +total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = self.terms[k]
            if k == ():
                parts.append(f"{c}")
            else:
                rad = math.prod(k)
                parts.append(f"{c}*sqrt({rad})")
        return " + ".join(parts)


QUAD_ZERO = QuadExt()
QUAD_ONE = QuadExt.from_rational(1)


def quad_mul(a: QuadExt, b: QuadExt) -> QuadExt:
    """Exact product in the multi-quadratic field."""
    return a * b


# ---------------------------------------------------------------------------
# dense exact linear algebra
# ---------------------------------------------------------------------------


def _shape(mat: Sequence[Sequence], cols: int | None) -> tuple[int, int]:
    nrows = len(mat)
    if nrows:
        ncols = len(mat[0])
        if any(len(row) != ncols for row in mat):
            raise ValueError("ragged matrix")
        if cols is not None and cols != ncols:
            raise ValueError("cols does not match row length")
        return nrows, ncols
    if cols is None:
        raise ValueError("empty matrix needs an explicit column count")
    return 0, cols


def rat_rref(
    mat: Sequence[Sequence[Fraction]], cols: int | None = None
) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form over Q.

    Returns (R, pivots) where R is the unique RREF of mat and pivots is the
    strictly increasing list of pivot column indices, so rank = len(pivots).
    """
    nrows, ncols = _shape(mat, cols)
    r = [[Fraction(x) for x in row] for row in mat]
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        sel = next((i for i in range(row, nrows) if r[i][col] != 0), None)
        if sel is None:
            continue
        r[row], r[sel] = r[sel], r[row]
        inv = 1 / r[row][col]
        r[row] = [x * inv for x in r[row]]
        for i in range(nrows):
            if i != row and r[i][col] != 0:
                factor = r[i][col]
                r[i] = [a - factor * b for a, b in zip(r[i], r[row])]
        pivots.append(col)
        row += 1
    return r, pivots


def rat_nullspace(
    mat: Sequence[Sequence[Fraction]], cols: int | None = None
) -> list[list[Fraction]]:
    """RREF-parametrized basis of {x : mat @ x = 0}.

    One basis vector per non-pivot column, carrying 1 in that coordinate
    and the negated RREF column above the pivots.
    """
    nrows, ncols = _shape(mat, cols)
    rref, pivots = rat_rref(mat, ncols)
    pivot_set = set(pivots)
    basis: list[list[Fraction]] = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for i, piv in enumerate(pivots):
            vec[piv] = -rref[i][free]
        basis.append(vec)
    return basis


def rat_rank(mat: Sequence[Sequence[Fraction]], cols: int | None = None) -> int:
    """Exact rank over Q by fraction-free (Bareiss) elimination."""
    nrows, ncols = _shape(mat, cols)
    m = [[Fraction(x) for x in row] for row in mat]
    rank = 0
    prev = Fraction(1)
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        sel = next((i for i in range(row, nrows) if m[i][col] != 0), None)
        if sel is None:
            continue
        m[row], m[sel] = m[sel], m[row]
        pivot = m[row][col]
        for i in range(row + 1, nrows):
            mi, mr = m[i], m[row]
            head = mi[col]
            for j in range(col, ncols):
                mi[j] = (pivot * mi[j] - head * mr[j]) / prev
        prev = pivot
        rank += 1
        row += 1
    return rank


def rat_det(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by Bareiss elimination."""
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in mat]
    prev = Fraction(1)
    sign = 1
    for col in range(n):
        sel = next((i for i in range(col, n) if m[i][col] != 0), None)
        if sel is None:
            return Fraction(0)
        if sel != col:
            m[col], m[sel] = m[sel], m[col]
            sign = -sign
        pivot = m[col][col]
        for i in range(col + 1, n):
            mi, mr = m[i], m[col]
            head = mi[col]
            for j in range(col, n):
                mi[j] = (pivot * mi[j] - head * mr[j]) / prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def rat_solve(
    mat: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction]:
    """Unique solution of a square nonsingular system."""
    n = len(mat)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(mat)]
    rref, pivots = rat_rref(aug, n + 1)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [rref[i][n] for i in range(n)]


def quad_rank(mat: Sequence[Sequence[QuadExt]], cols: int | None = None) -> int:
    """Exact rank over the multi-quadratic field.

    Fraction-free elimination keeps intermediate entries as minors of the
    input; divisions by the previous pivot are exact field divisions.
    """
    nrows, ncols = _shape(mat, cols)
    m = [[QuadExt._coerce(x) for x in row] for row in mat]
    rank = 0
    prev = QUAD_ONE
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        sel = next((i for i in range(row, nrows) if not m[i][col].is_zero()), None)
        if sel is None:
            continue
        m[row], m[sel] = m[sel], m[row]
        pivot = m[row][col]
        prev_inv = prev.inverse()
        for i in range(row + 1, nrows):
            mi, mr = m[i], m[row]
            head = mi[col]
            for j in range(col, ncols):
                mi[j] = (pivot * mi[j] - head * mr[j]) * prev_inv
        prev = pivot
        rank += 1
        row += 1
    return rank


def gf2_rank(vectors: Iterable[Sequence[int]]) -> int:
    """Rank over GF(2) of 0/1 vectors, via integer bitmask elimination."""
    basis: dict[int, int] = {}
    width = None
    for vec in vectors:
        if width is None:
            width = len(vec)
        elif len(vec) != width:
            raise ValueError("vectors must have equal length")
        word = 0
        for bit in vec:
            word = (word << 1) | (1 if bit else 0)
        while word:
            lead = word.bit_length() - 1
            if lead not in basis:
                basis[lead] = word
                break
            word ^= basis[lead]
    return len(basis)
