"""Exterior algebra over Q^(N+1): wedge, Hodge star, Grassmann-Cayley meet.

Multivectors carry rational coefficients on strictly increasing index
tuples over the standard basis e_0..e_N; the inner product is the standard
one extended to basis tuples, and the Hodge star is taken with respect to
the volume form xi = e_0 ^ ... ^ e_N.

The face-pair multivector m_vector(F', F, nu) takes any callable nu that
maps a face (sorted vertex tuple) to its multivector, so realizations plug
in without a dependency in this direction.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

Index = tuple[int, ...]


class DimensionMismatch(Exception):
    pass


class NotHomogeneous(Exception):
    pass


class NotSubset(Exception):
    pass


class FaceNotNested(Exception):
    pass


def _merge_sign(s: Index, t: Index) -> tuple[Index, int]:
    """Sorted union and sign of concatenation (s, t); 0 sign on overlap."""
    if set(s) & set(t):
        return (), 0
    inversions = sum(1 for a in s for b in t if a > b)
    return tuple(sorted(s + t)), -1 if inversions % 2 else 1


class MultiVector:
    """Element of the exterior algebra of Q^dim."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict[Index, Fraction] | None = None):
        self.dim = dim
        self.terms: dict[Index, Fraction] = {}
        for k, c in (terms or {}).items():
            if c != 0:
                if any(not 0 <= i < dim for i in k) or tuple(sorted(set(k))) != k:
                    raise ValueError(f"bad index tuple {k} for dim {dim}")
                self.terms[k] = Fraction(c)

    @staticmethod
    def scalar(dim: int, c: Fraction | int) -> "MultiVector":
        return MultiVector(dim, {(): Fraction(c)})

    @staticmethod
    def basis(dim: int, indices: Iterable[int]) -> "MultiVector":
        return MultiVector(dim, {tuple(sorted(indices)): Fraction(1)})

    @staticmethod
    def vector(coords: Sequence[Fraction | int]) -> "MultiVector":
        return MultiVector(
            len(coords), {(i,): Fraction(c) for i, c in enumerate(coords)}
        )

    def is_zero(self) -> bool:
        return not self.terms

    def grades(self) -> set[int]:
        return {len(k) for k in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def grade(self) -> int:
        gs = self.grades()
        if len(gs) > 1:
            raise NotHomogeneous(f"mixed grades {sorted(gs)}")
        return gs.pop() if gs else 0

    def grade_part(self, r: int) -> "MultiVector":
        return MultiVector(
            self.dim, {k: c for k, c in self.terms.items() if len(k) == r}
        )

    def coefficient(self, indices: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(sorted(indices)), Fraction(0))

    def _check(self, other: "MultiVector") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"{self.dim} vs {other.dim}")

    def __add__(self, other: "MultiVector") -> "MultiVector":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return MultiVector(self.dim, out)

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        return self + (-other)

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.dim, {k: -c for k, c in self.terms.items()})

    def __mul__(self, c: Fraction | int) -> "MultiVector":
        return MultiVector(self.dim, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def wedge(self, other: "MultiVector") -> "MultiVector":
        self._check(other)
        out: dict[Index, Fraction] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                k, sign = _merge_sign(ka, kb)
                if sign:
                    out[k] = out.get(k, Fraction(0)) + sign * ca * cb
        return MultiVector(self.dim, out)

    def inner(self, other: "MultiVector") -> Fraction:
        self._check(other)
        return sum(
            (c * other.terms[k] for k, c in self.terms.items() if k in other.terms),
            Fraction(0),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiVector):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda t: (len(t), t)):
            c = self.terms[k]
            base = "^".join(f"e{i}" for i in k) if k else "1"
            parts.append(f"{c}*{base}")
        return " + ".join(parts)


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    return a.wedge(b)


def hodge_star(a: MultiVector) -> MultiVector:
    """Hodge star: a ^ star(b) = <a, b> xi on each grade."""
    if not a.is_homogeneous():
        raise NotHomogeneous("hodge star needs a grade-homogeneous input")
    full = tuple(range(a.dim))
    out: dict[Index, Fraction] = {}
    for k, c in a.terms.items():
        comp = tuple(i for i in full if i not in k)
        _, sign = _merge_sign(k, comp)
        out[comp] = out.get(comp, Fraction(0)) + sign * c
    return MultiVector(a.dim, out)


def hodge_star_inv(a: MultiVector) -> MultiVector:
    """Inverse star; star(star(a)) = (-1)^(r(N+1-r)) a fixes the sign."""
    if not a.is_homogeneous():
        raise NotHomogeneous("inverse hodge star needs a homogeneous input")
    r = a.grade()
    sign = -1 if (r * (a.dim - r)) % 2 else 1
    return hodge_star(a) * sign


def gc_meet(a: MultiVector, b: MultiVector) -> MultiVector:
    """Grassmann-Cayley meet: star_inv(star(a) ^ star(b))."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim} vs {b.dim}")
    return hodge_star_inv(hodge_star(a).wedge(hodge_star(b)))


def sgn(uprime: Sequence, u: Sequence) -> int:
    """Sign of the permutation (uprime, u minus uprime) of u."""
    u = list(u)
    uprime = list(uprime)
    missing = [x for x in uprime if x not in u]
    if missing or len(set(uprime)) != len(uprime):
        raise NotSubset(f"{uprime} is not a subset of {u}")
    concat = uprime + [x for x in u if x not in uprime]
    pos = [u.index(x) for x in concat]
    inversions = sum(
        1 for i in range(len(pos)) for j in range(i + 1, len(pos)) if pos[i] > pos[j]
    )
    return -1 if inversions % 2 else 1


def m_vector(
    fprime: Sequence[int],
    face: Sequence[int],
    nu: Callable[[tuple[int, ...]], MultiVector],
) -> MultiVector:
    """Face-pair multivector nu(F) meet star(nu(F')), of grade |F| - |F'|."""
    fprime = tuple(fprime)
    face = tuple(face)
    if not set(fprime) <= set(face):
        raise FaceNotNested(f"{fprime} is not a subface of {face}")
    return gc_meet(nu(face), hodge_star(nu(fprime)))


def all_index_tuples(dim: int, r: int) -> list[Index]:
    return list(combinations(range(dim), r))


def apply_linear(
    matrix: Sequence[Sequence[Fraction | int]], a: MultiVector
) -> MultiVector:
    """Functorial action of a linear map on a multivector.

    ``matrix`` has one row per target coordinate and ``a.dim`` columns;
    e_i maps to column i, and each basis tuple maps to the wedge of its
    column images, so grades are preserved (or killed) and
    apply_linear(M, x ^ y) = apply_linear(M, x) ^ apply_linear(M, y).
    """
    target = len(matrix)
    for row in matrix:
        if len(row) != a.dim:
            raise DimensionMismatch("matrix columns must match multivector dim")
    cols = [
        MultiVector.vector([Fraction(matrix[r][i]) for r in range(target)])
        for i in range(a.dim)
    ]
    out = MultiVector(target)
    for idx, c in a.terms.items():
        term = MultiVector.scalar(target, c)
        for i in idx:
            term = term.wedge(cols[i])
        out = out + term
    return out
