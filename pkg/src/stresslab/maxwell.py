"""Liftings, reciprocals, and facet orientations over a realized manifold.

A realized homology d-manifold admits three equivalent pictures of its
degree-1 stresses: heights on vertices (liftings), dual point
configurations indexed by facets (reciprocals), and the ridge values
themselves.  This module builds all three pictures and the exact linear
maps between them, the signed square-root scalars that measure gradient
jumps across ridges, and the vertex-by-ridge matrices whose invertibility
drives the separation argument for generic realizations.

Heights live on the dehomogenized points, so everything on the lifting
and reciprocal side is invariant under rescaling homogeneous coordinates.
The maps that land in a stress space are not: they require every vertex
to carry unit last coordinate, and refuse other inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .complexes import Face, FaceNotFound, InvalidParameters, SimplicialComplex
from .numeric import (
    DEFAULT_PRIME_BOUND,
    QUAD_ZERO,
    FactorizationIncomplete,
    QuadExt,
    rat_det,
    rat_rref,
    rat_solve,
)
from .realization import Realization, Vec, lifting_gradient, zeta_square
from .rigidity import StressVector

import mpmath as mp

FLOAT_DPS = 60
FLOAT_RANK_RTOL = mp.mpf(10) ** -40


class NonOrientable(Exception):
    """Facet sign propagation hit an inconsistent cycle.

    Carries the ridge whose two cofacets cannot be reconciled.
    """

    def __init__(self, message: str, ridge: Face | None = None):
        super().__init__(message)
        self.ridge = ridge


class SingularFacetMatrix(Exception):
    """A facet's normalized vertex rows are linearly dependent."""


# -- small exact vector helpers ---------------------------------------------


def _sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _vid(delta: SimplicialComplex, v: int | str) -> int:
    if isinstance(v, str):
        try:
            return delta.id_of(v)
        except KeyError:
            raise FaceNotFound(f"unknown vertex {v!r}") from None
    v = int(v)
    if not 0 <= v < len(delta.vertices):
        raise FaceNotFound(f"vertex id {v} out of range")
    return v


def _face_of(delta: SimplicialComplex, face: Iterable[int | str]) -> Face:
    ids = tuple(sorted(_vid(delta, v) for v in face))
    if ids not in delta:
        raise FaceNotFound(f"{ids} is not a face")
    return ids


def _facet_of(delta: SimplicialComplex, face: Iterable[int | str]) -> Face:
    ids = _face_of(delta, face)
    if len(ids) != delta.dim + 1:
        raise InvalidParameters(f"{ids} is not a facet")
    return ids


def _require_pure(delta: SimplicialComplex) -> None:
    if delta.dim < 1:
        raise InvalidParameters("need a complex of dimension at least 1")
    if any(len(f) != delta.dim + 1 for f in delta.facets):
        raise InvalidParameters("complex is not pure")


def _require_unit_heights(nu: Realization) -> None:
    # stress values react to rescaling homogeneous coordinates, heights do
    # not, so the bridge between the two only exists at unit scale
    for label in nu.complex.vertices:
        if nu.coords[label][-1] != 1:
            raise InvalidParameters(
                f"vertex {label!r} has last coordinate "
                f"{nu.coords[label][-1]}; stress conversions need unit "
                "homogeneous coordinates"
            )


def _conormal(nu: Realization, facet: Face, ridge: Face) -> Vec:
    """Outward conormal of a facet at one of its ridges.

    Orthogonal to the ridge's direction space and pointing away from the
    facet vertex opposite the ridge.  Unnormalized, exact.
    """
    opposite = next(v for v in facet if v not in ridge)
    pts = [nu.point(v) for v in ridge]
    dirs: list[Vec] = []
    for p in pts[1:]:
        u = _sub(p, pts[0])
        for w in dirs:
            u = _sub(u, tuple(c * (_dot(u, w) / _dot(w, w)) for c in w))
        dirs.append(u)
    raw = _sub(pts[0], nu.point(opposite))
    for w in dirs:
        raw = _sub(raw, tuple(c * (_dot(raw, w) / _dot(w, w)) for c in w))
    return raw


def _edge_gram_det(nu: Realization, face: Face) -> Fraction:
    """Determinant of the Gram matrix of the face's edge vectors."""
    pts = [nu.point(v) for v in face]
    edges = [_sub(p, pts[0]) for p in pts[1:]]
    if not edges:
        return Fraction(1)
    gram = [[_dot(u, w) for w in edges] for u in edges]
    return rat_det(gram)


# -- facet orientations ------------------------------------------------------


@dataclass(frozen=True)
class PLOrientation:
    """Signs on facets, consistent across every interior ridge.

    Two facets sharing a ridge carry equal signs exactly when their
    outward normals at that ridge point in opposite directions.
    """

    base: Face
    signs: Mapping[Face, int]

    def sign(self, face: Iterable[int]) -> int:
        key = tuple(sorted(face))
        if key not in self.signs:
            raise FaceNotFound(f"{key} is not an oriented facet")
        return self.signs[key]


def pl_orientation(
    nu: Realization, base: Iterable[int | str] | None = None
) -> PLOrientation:
    """Propagate facet signs from a base facet and verify consistency.

    Adjacent facets compare outward conormals at the shared ridge: a
    negative inner product (opposite directions) forces equal signs, a
    positive one forces opposite signs.  Propagation runs over the facet
    adjacency graph; afterwards every interior ridge is re-checked, and
    any conflict raises NonOrientable with the offending ridge attached.
    """
    delta = nu.complex
    _require_pure(delta)
    d = delta.dim
    facets = delta.faces_of_dim(d)
    pairs: dict[Face, tuple[Face, Face]] = {}
    for ridge in delta.faces_of_dim(d - 1):
        cof = delta.cofacets(ridge)
        if len(cof) != 2:
            raise InvalidParameters(
                f"ridge {ridge} has {len(cof)} cofacets; orientation "
                "propagation needs a pseudomanifold"
            )
        pairs[ridge] = (cof[0], cof[1])

    def relation(ridge: Face) -> int:
        f, g = pairs[ridge]
        s = _dot(_conormal(nu, f, ridge), _conormal(nu, g, ridge))
        # the two conormals span the same line, so s is never zero
        return 1 if s < 0 else -1

    base_facet = _facet_of(delta, base) if base is not None else facets[0]
    signs: dict[Face, int] = {base_facet: 1}
    queue = [base_facet]
    neighbors: dict[Face, list[Face]] = {f: [] for f in facets}
    for ridge, (f, g) in pairs.items():
        neighbors[f].append(ridge)
        neighbors[g].append(ridge)
    while queue:
        f = queue.pop()
        for ridge in neighbors[f]:
            g = next(x for x in pairs[ridge] if x != f)
            want = signs[f] * relation(ridge)
            if g not in signs:
                signs[g] = want
                queue.append(g)
    if len(signs) < len(facets):
        raise InvalidParameters("facet adjacency graph is disconnected")
    for ridge, (f, g) in pairs.items():
        if signs[f] * signs[g] != relation(ridge):
            raise NonOrientable(
                f"signs conflict across ridge {ridge}", ridge=ridge
            )
    return PLOrientation(base_facet, signs)


# -- liftings ---------------------------------------------------------------


@dataclass(frozen=True)
class Lifting:
    """Piecewise affine function over the realized facets.

    Determined by one height per vertex; heights vanish on the base
    facet.  Each facet F carries the interpolating affine data
    (gradient m_F, offset c_F) with <m_F, p> + c_F equal to the height
    at every vertex point p of F.
    """

    base: Face
    heights: Mapping[int, Fraction]
    gradients: Mapping[Face, Vec]
    offsets: Mapping[Face, Fraction]

    def height(self, v: int) -> Fraction:
        return self.heights.get(v, Fraction(0))

    def gradient(self, facet: Iterable[int]) -> Vec:
        key = tuple(sorted(facet))
        if key not in self.gradients:
            raise FaceNotFound(f"{key} is not a lifted facet")
        return self.gradients[key]

    def offset(self, facet: Iterable[int]) -> Fraction:
        key = tuple(sorted(facet))
        if key not in self.offsets:
            raise FaceNotFound(f"{key} is not a lifted facet")
        return self.offsets[key]

    def value_at(self, facet: Iterable[int], point: Vec) -> Fraction:
        """Evaluate the facet's affine function at a point."""
        key = tuple(sorted(facet))
        return _dot(self.gradient(key), point) + self.offsets[key]


def lifting_from_heights(
    nu: Realization,
    heights: Mapping[int | str, Fraction | int],
    base: Iterable[int | str] | None = None,
) -> Lifting:
    """Interpolate vertex heights by one affine function per facet.

    Vertices missing from the mapping get height zero.  Heights at the
    base facet's vertices must be zero.  On a simplicial complex the
    per-facet interpolants automatically agree on shared ridges.
    """
    delta = nu.complex
    _require_pure(delta)
    d = delta.dim
    facets = delta.faces_of_dim(d)
    base_facet = _facet_of(delta, base) if base is not None else facets[0]
    hmap = {v: Fraction(0) for v in range(len(delta.vertices))}
    for key, value in heights.items():
        hmap[_vid(delta, key)] = Fraction(value)
    for v in base_facet:
        if hmap[v] != 0:
            raise InvalidParameters(
                f"vertex {delta.vertices[v]!r} lies in the base facet and "
                f"must have height 0, got {hmap[v]}"
            )
    gradients: dict[Face, Vec] = {}
    offsets: dict[Face, Fraction] = {}
    for facet in facets:
        rows = [list(nu.homogeneous_row(v)) for v in facet]
        try:
            sol = rat_solve(rows, [hmap[v] for v in facet])
        except ValueError:
            raise SingularFacetMatrix(
                f"facet {facet} has dependent vertex rows"
            ) from None
        gradients[facet] = tuple(sol[: nu.ambient])
        offsets[facet] = sol[nu.ambient]
    return Lifting(base_facet, hmap, gradients, offsets)


def basis_lifting(
    nu: Realization,
    base: Iterable[int | str],
    vertex: int | str,
) -> Lifting:
    """Unit height at one vertex off the base facet, zero elsewhere."""
    delta = nu.complex
    vid = _vid(delta, vertex)
    base_facet = _facet_of(delta, base)
    if vid in base_facet:
        raise InvalidParameters(
            f"vertex {delta.vertices[vid]!r} lies in the base facet"
        )
    return lifting_from_heights(nu, {vid: Fraction(1)}, base_facet)


# -- lifting -> stress -------------------------------------------------------


def lifting_to_stress(
    nu: Realization, mu: Lifting, rho: PLOrientation
) -> StressVector:
    """Degree-1 stress whose ridge values are the signed gradient jumps.

    The value on an interior ridge G with cofacets F, F' is the inner
    product of m_F' - m_F with the outward unit conormal of F at G,
    divided by the Euclidean volume of the realized ridge and signed by
    rho(F).  The two irrational norms cancel, so each value is computed
    exactly as a rational: the determinant of the ridge's edge vectors
    stacked with the unnormalized conormal n has square equal to
    <n, n> times the edge Gram determinant.  Ridges with one cofacet are
    skipped, which makes the restriction of a lifting to a closed star
    produce the local stress of that star.
    """
    _require_unit_heights(nu)
    delta = nu.complex
    d = delta.dim
    values: dict[Face, Fraction] = {}
    for ridge in delta.faces_of_dim(d - 1):
        cof = delta.cofacets(ridge)
        if len(cof) > 2:
            raise InvalidParameters(
                f"ridge {ridge} has {len(cof)} cofacets, need at most 2"
            )
        if len(cof) < 2:
            continue
        f, fp = cof
        tilde = _conormal(nu, f, ridge)
        jump = _dot(_sub(mu.gradient(fp), mu.gradient(f)), tilde)
        if jump == 0:
            values[ridge] = Fraction(0)
            continue
        pts = [nu.point(v) for v in ridge]
        rows = [list(_sub(p, pts[0])) for p in pts[1:]]
        rows.append(list(tilde))
        det = rat_det(rows)
        values[ridge] = rho.sign(f) * jump * math.factorial(d - 1) / abs(det)
    return StressVector(1, values)


# -- reciprocals -------------------------------------------------------------


@dataclass(frozen=True)
class Reciprocal:
    """Dual point configuration: one point per facet.

    The point of the base facet is the origin, and the segment between
    the points of two adjacent facets is parallel to the shared ridge's
    conormal.  Each interior ridge gets a signed length (the Euclidean
    length of that segment, signed by the orientation) and a normalized
    length: the signed length divided by the square root of the Gram
    determinant of the ridge's normalized vertex rows, which is the
    scaling the genericity scalars use.
    """

    base: Face
    points: Mapping[Face, Vec]
    lengths: Mapping[Face, QuadExt]
    normalized: Mapping[Face, QuadExt]

    def point(self, facet: Iterable[int]) -> Vec:
        key = tuple(sorted(facet))
        if key not in self.points:
            raise FaceNotFound(f"{key} is not a facet of the reciprocal")
        return self.points[key]


def lifting_to_reciprocal(
    nu: Realization,
    mu: Lifting,
    rho: PLOrientation,
    prime_bound: int = DEFAULT_PRIME_BOUND,
) -> Reciprocal:
    """Assemble the dual points (the gradients) and exact edge lengths.

    Verifies the parallelism invariant exactly on every interior ridge:
    the gradient difference must be a rational multiple of the ridge
    conormal.  A violation means the input was not built from heights.
    """
    delta = nu.complex
    d = delta.dim
    points = {facet: mu.gradient(facet) for facet in delta.faces_of_dim(d)}
    lengths: dict[Face, QuadExt] = {}
    normalized: dict[Face, QuadExt] = {}
    for ridge in delta.faces_of_dim(d - 1):
        cof = delta.cofacets(ridge)
        if len(cof) != 2:
            continue
        f, fp = cof
        tilde = _conormal(nu, f, ridge)
        diff = _sub(points[fp], points[f])
        s = _dot(tilde, tilde)
        t = _dot(diff, tilde) / s
        if any(x != t * c for x, c in zip(diff, tilde)):
            raise InvalidParameters(
                f"gradient jump across ridge {ridge} is not parallel to "
                "the ridge conormal; not a lifting"
            )
        # length = t * rho(f) * |tilde|, kept exact as a quadratic number
        ell = QuadExt.sqrt_of(s, prime_bound) * (t * rho.sign(f))
        lengths[ridge] = ell
        gram = _row_gram_det(nu, ridge)
        normalized[ridge] = ell * QuadExt.sqrt_of(gram, prime_bound) / gram
    return Reciprocal(mu.base, points, lengths, normalized)


def _row_gram_det(nu: Realization, face: Face) -> Fraction:
    rows = [nu.homogeneous_row(v) for v in face]
    gram = [[_dot(a, b) for b in rows] for a in rows]
    return rat_det(gram)


def reciprocal_to_stress(nu: Realization, rec: Reciprocal) -> StressVector:
    """Collapse signed lengths over Euclidean ridge volumes to rationals.

    Inverse direction of the length route: dividing a signed length by
    the Euclidean volume of the realized ridge cancels the square roots
    and recovers the ridge value of the corresponding degree-1 stress.
    """
    _require_unit_heights(nu)
    d = nu.complex.dim
    values: dict[Face, Fraction] = {}
    for ridge, ell in rec.lengths.items():
        gram = _edge_gram_det(nu, ridge)
        ratio = ell * QuadExt.sqrt_of(gram) * Fraction(
            math.factorial(d - 1)
        ) / gram
        if not ratio.is_rational():
            raise InvalidParameters(
                f"length over ridge {ridge} does not collapse to a "
                "rational; reciprocal is inconsistent with the realization"
            )
        values[ridge] = ratio.rational_value()
    return StressVector(1, values)


# -- stress -> lifting -------------------------------------------------------


def stress_to_lifting(
    nu: Realization,
    a: StressVector,
    rho: PLOrientation,
    base: Iterable[int | str] | None = None,
) -> Lifting:
    """Invert the lifting-to-stress map on its image.

    Solves for the unique height vector (zero on the base facet) whose
    stress matches a.  Raises InvalidParameters when no lifting matches,
    which happens exactly when a is not a degree-1 stress.
    """
    _require_unit_heights(nu)
    delta = nu.complex
    d = delta.dim
    if a.degree != 1:
        raise InvalidParameters(f"need a degree-1 element, got {a.degree}")
    facets = delta.faces_of_dim(d)
    base_facet = _facet_of(delta, base) if base is not None else facets[0]
    free = [v for v in range(len(delta.vertices)) if v not in base_facet]
    ridges = sorted(
        r for r in delta.faces_of_dim(d - 1) if len(delta.cofacets(r)) == 2
    )
    columns = []
    for v in free:
        stress = lifting_to_stress(
            nu, basis_lifting(nu, base_facet, v), rho
        )
        columns.append([stress.value(r) for r in ridges])
    target = [a.value(r) for r in ridges]
    coeffs = _solve_columns(columns, target)
    heights = {
        v: c for v, c in zip(free, coeffs) if c != 0
    }
    return lifting_from_heights(nu, heights, base_facet)


def _solve_columns(
    columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]
) -> list[Fraction]:
    """Unique exact solution of sum_j x_j * column_j = target."""
    k = len(columns)
    aug = [
        [columns[j][i] for j in range(k)] + [target[i]]
        for i in range(len(target))
    ]
    rref, pivots = rat_rref(aug, k + 1)
    if k in pivots:
        raise InvalidParameters("values are not in the stress image")
    if len(pivots) < k:
        raise InvalidParameters("heights are underdetermined")
    sol = [Fraction(0)] * k
    for row, col in enumerate(pivots):
        sol[col] = rref[row][k]
    return sol


# -- gradient-jump scalars ---------------------------------------------------


def zeta(
    nu: Realization,
    rho: PLOrientation,
    ridge: Iterable[int | str],
    vertex: int | str,
    prime_bound: int = DEFAULT_PRIME_BOUND,
) -> QuadExt:
    """Signed square-root scalar of one (ridge, vertex) pair.

    Magnitude is the square root of the rational squared gradient jump
    of the vertex's unit lifting, normalized by the Gram determinant of
    the ridge's vertex rows; the sign comes from the orientation and the
    outward conormal, matching the sign of the corresponding stress
    value.  Vertices outside the ridge's closed star give zero.
    """
    delta = nu.complex
    g = _face_of(delta, ridge)
    if len(g) != delta.dim:
        raise InvalidParameters(f"{g} is not a ridge")
    vid = _vid(delta, vertex)
    zsq = zeta_square(nu, g, vid)
    if zsq == 0:
        return QUAD_ZERO
    f, fp = delta.cofacets(g)
    jump = _dot(
        _sub(lifting_gradient(nu, fp, vid), lifting_gradient(nu, f, vid)),
        _conormal(nu, f, g),
    )
    magnitude = QuadExt.sqrt_of(zsq, prime_bound)
    return magnitude if rho.sign(f) * jump > 0 else -magnitude


def zeta_w(
    nu: Realization,
    rho: PLOrientation,
    weights: Mapping[int | str, Fraction | int],
    ridge: Iterable[int | str],
    prime_bound: int = DEFAULT_PRIME_BOUND,
) -> QuadExt:
    """Weighted sum of the ridge's scalars over its closed-star vertices.

    The weight map's domain selects the eligible vertices; star vertices
    missing from it (typically the base facet's) contribute nothing.
    """
    delta = nu.complex
    g = _face_of(delta, ridge)
    if len(g) != delta.dim:
        raise InvalidParameters(f"{g} is not a ridge")
    wmap = {_vid(delta, key): Fraction(val) for key, val in weights.items()}
    star_vertices: set[int] = set()
    for cof in delta.cofacets(g):
        star_vertices.update(cof)
    total = QUAD_ZERO
    for v in sorted(star_vertices):
        if v in wmap and wmap[v] != 0:
            total = total + zeta(nu, rho, g, v, prime_bound) * wmap[v]
    return total


# -- the vertex-by-ridge matrices -------------------------------------------


@dataclass(frozen=True)
class ScalarMatrices:
    """Vertex-by-ridge scalar matrix with its two 0/1 companions.

    Row i, column j of the scalar matrix holds the signed scalar of
    (ridge j, vertex i).  The complement matrix marks vertices off a
    ridge, the incidence matrix marks vertices on it.  The verdicts are
    exact unless float_fallback is set, in which case they come from
    60-digit float elimination and condition carries the pivot-ratio
    estimate.

    abt_invertible can never be true: scalar rows are per-vertex hat
    liftings, and the hat heights of any affine function sum to a
    jump-free lifting, so the scalar matrix has the (d+1)-dimensional
    left kernel spanned by the normalized coordinate rows.  The product
    with the transposed complement matrix therefore has rank at most
    n - d - 1; abt_rank records the exact rank when the reduced block
    certifies it.
    """

    base: Face
    vertex_order: tuple[int, ...]
    ridge_order: tuple[Face, ...]
    scalars: tuple[tuple[QuadExt, ...], ...] | None
    complement: tuple[tuple[int, ...], ...]
    incidence: tuple[tuple[int, ...], ...]
    reduced: tuple[tuple[QuadExt, ...], ...] | None
    abt_invertible: bool
    abt_rank: int | None
    c_invertible: bool
    float_fallback: bool
    condition: float | None


MAX_MINOR_SUBSETS = 2_000_000


def ab_matrices(
    nu: Realization,
    rho: PLOrientation,
    base: Iterable[int | str] | None = None,
    prime_bound: int = DEFAULT_PRIME_BOUND,
) -> ScalarMatrices:
    """Scalar matrix, its 0/1 companions, and exact invertibility verdicts.

    abt_invertible reports whether the product of the scalar matrix with
    the transposed complement matrix is invertible over the quadratic
    field.  The reduced matrix eliminates the base facet's columns using
    the rational dependence of vertex rows on the base rows, then keeps
    the principal block of the remaining vertices; c_invertible reports
    its verdict.

    Each scalar column shares one radical: the scalar of (G, v) is a
    rational multiple of the square root of <n, n> times the Gram
    determinant of G's normalized vertex rows, both depending on G only.
    Both determinants therefore expand as sums over column subsets of
    rational minor products times one radical per subset, which stays
    exact where naive elimination over the field blows up.  When a
    radicand defeats factorization, or the subset count is out of reach,
    both verdicts are recomputed in 60-digit floats and flagged.
    """
    delta = nu.complex
    d = delta.dim
    n = len(delta.vertices)
    facets = delta.faces_of_dim(d)
    base_facet = _facet_of(delta, base) if base is not None else facets[0]
    ridges = tuple(delta.faces_of_dim(d - 1))
    for ridge in ridges:
        if len(delta.cofacets(ridge)) != 2:
            raise InvalidParameters(
                f"ridge {ridge} has {len(delta.cofacets(ridge))} cofacets"
            )
    m = len(ridges)
    vertex_order = tuple(range(n))
    complement = tuple(
        tuple(0 if v in ridge else 1 for ridge in ridges) for v in vertex_order
    )
    incidence = tuple(
        tuple(1 if v in ridge else 0 for ridge in ridges) for v in vertex_order
    )
    free = [v for v in vertex_order if v not in base_facet]
    k = len(free)
    perm = free + list(base_facet)

    # rational dependence of the off-base vertex rows on the base rows
    wq = [list(nu.homogeneous_row(v)) for v in base_facet]
    try:
        dep = [
            rat_solve([list(r) for r in zip(*wq)], list(nu.homogeneous_row(v)))
            for v in free
        ]
    except ValueError:
        raise SingularFacetMatrix(
            f"base facet {base_facet} has dependent vertex rows"
        ) from None

    # rational coefficient q and radicand u per column: zeta = q * sqrt(u)
    rational_part: list[list[Fraction]] = [
        [Fraction(0)] * m for _ in range(n)
    ]
    radicands: list[Fraction] = []
    for j, ridge in enumerate(ridges):
        f, fp = delta.cofacets(ridge)
        tilde = _conormal(nu, f, ridge)
        s = _dot(tilde, tilde)
        g = _row_gram_det(nu, ridge)
        radicands.append(s * g)
        sign = rho.sign(f)
        for cof in (f, fp):
            for v in cof:
                jump = _dot(
                    _sub(
                        lifting_gradient(nu, fp, v),
                        lifting_gradient(nu, f, v),
                    ),
                    tilde,
                )
                rational_part[v][j] = sign * jump / (s * g)

    feasible = (
        math.comb(m, n) <= MAX_MINOR_SUBSETS
        and math.comb(m, k) <= MAX_MINOR_SUBSETS
    )
    if feasible:
        try:
            roots = [QuadExt.sqrt_of(u, prime_bound) for u in radicands]
            scalars = tuple(
                tuple(roots[j] * rational_part[v][j] for j in range(m))
                for v in vertex_order
            )
            comp_rows = [
                [Fraction(c) for c in complement[v]] for v in vertex_order
            ]
            abt_invertible = not _product_det(
                rational_part, comp_rows, roots
            ).is_zero()
            # reduced companion rows: free columns after the base columns
            # are eliminated through the row dependence
            beta = []
            for j in range(k):
                row = [Fraction(c) for c in complement[perm[j]]]
                for i in range(d + 1):
                    w = dep[j][i]
                    if w == 0:
                        continue
                    brow = complement[perm[k + i]]
                    row = [x - w * y for x, y in zip(row, brow)]
                beta.append(row)
            q_free = [rational_part[v] for v in free]
            c_invertible = not _product_det(q_free, beta, roots).is_zero()
            reduced = tuple(
                tuple(
                    sum(
                        (
                            scalars[free[r]][j] * beta[c][j]
                            for j in range(m)
                            if beta[c][j] != 0
                        ),
                        QUAD_ZERO,
                    )
                    for c in range(k)
                )
                for r in range(k)
            )
            # affine heights have jump-free liftings, so the weighted
            # column sums of the scalar matrix vanish; with the reduced
            # block invertible this pins the product's exact rank
            kernel_ok = all(
                sum(
                    (
                        nu.homogeneous_row(v)[c] * rational_part[v][j]
                        for v in vertex_order
                    ),
                    Fraction(0),
                )
                == 0
                for c in range(d + 1)
                for j in range(m)
            )
            rows_w = [list(nu.homogeneous_row(v)) for v in vertex_order]
            spans = len(rat_rref(rows_w, d + 1)[1]) == d + 1
            abt_rank = k if (kernel_ok and spans and c_invertible) else None
            return ScalarMatrices(
                base_facet,
                vertex_order,
                ridges,
                scalars,
                complement,
                incidence,
                reduced,
                abt_invertible,
                abt_rank,
                c_invertible,
                False,
                None,
            )
        except FactorizationIncomplete:
            pass

    # fallback: signed scalars in floats, no factorization required
    mp.mp.dps = FLOAT_DPS
    root_f = [mp.sqrt(_mpf(u)) for u in radicands]
    signed = [
        [_mpf(rational_part[v][j]) * root_f[j] for j in range(m)]
        for v in vertex_order
    ]
    abt_f = [
        [
            mp.fsum(
                signed[perm[i]][j] for j in range(m) if complement[perm[c]][j]
            )
            for c in range(n)
        ]
        for i in range(n)
    ]
    rank_abt, cond_abt = _float_rank(abt_f)
    reduced_f = [row[:] for row in abt_f]
    for j in range(k):
        for i in range(d + 1):
            w = dep[j][i]
            if w == 0:
                continue
            for r in range(n):
                reduced_f[r][j] -= abt_f[r][k + i] * _mpf(w)
    rank_c, cond_c = _float_rank([row[:k] for row in reduced_f[:k]])
    condition = max(cond_abt, cond_c)
    return ScalarMatrices(
        base_facet,
        vertex_order,
        ridges,
        None,
        complement,
        incidence,
        None,
        rank_abt == n,
        rank_abt,
        rank_c == k,
        True,
        condition,
    )


def _mpf(q: Fraction) -> mp.mpf:
    return mp.mpf(q.numerator) / q.denominator


def _product_det(
    left: Sequence[Sequence[Fraction]],
    right: Sequence[Sequence[Fraction]],
    roots: Sequence[QuadExt],
) -> QuadExt:
    """det(L diag(roots) Rᵀ), expanded over column subsets.

    L and R are rational r x m with r <= m.  Each size-r column subset S
    contributes det(L_S) det(R_S) times the product of the subset's
    radicals, so the determinant collects exactly in the quadratic field
    with no elimination over radical sums.
    """
    r = len(left)
    m = len(roots)
    total = QUAD_ZERO
    for subset in itertools.combinations(range(m), r):
        det_r = rat_det([[right[i][j] for j in subset] for i in range(r)])
        if det_r == 0:
            continue
        det_l = rat_det([[left[i][j] for j in subset] for i in range(r)])
        if det_l == 0:
            continue
        term = QuadExt.from_rational(det_l * det_r)
        for j in subset:
            term = term * roots[j]
        total = total + term
    return total


def _float_rank(mat: list[list]) -> tuple[int, float]:
    """Rank and pivot-ratio condition estimate by partial-pivot elimination."""
    m = [row[:] for row in mat]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    scale = max((abs(x) for row in m for x in row), default=mp.mpf(1))
    if scale == 0:
        return 0, 1.0
    pivots: list = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        sel = max(range(row, nrows), key=lambda i: abs(m[i][col]))
        if abs(m[sel][col]) <= scale * FLOAT_RANK_RTOL:
            continue
        m[row], m[sel] = m[sel], m[row]
        pivots.append(abs(m[row][col]))
        for i in range(row + 1, nrows):
            factor = m[i][col] / m[row][col]
            for j in range(col, ncols):
                m[i][j] -= factor * m[row][j]
        row += 1
    if not pivots:
        return 0, 1.0
    return len(pivots), float(max(pivots) / min(pivots))


# -- two-path product check --------------------------------------------------


def product_formula_check(
    nu: Realization,
    a: StressVector,
    b: StressVector,
    rho: PLOrientation | None = None,
    base: Iterable[int | str] | None = None,
) -> bool:
    """Compare the algebra product against the reciprocal-length formula.

    The degree d+1 product of a degree-1 element and a degree-d element
    evaluates at the empty face to the sum over vertices v of b(v) times
    the total Euclidean-normalized reciprocal length of the ridges
    avoiding v.  The right side is assembled in exact quadratic
    arithmetic, so the square roots must cancel for equality to hold.
    """
    _require_unit_heights(nu)
    delta = nu.complex
    d = delta.dim
    if a.degree != 1 or b.degree != d:
        raise InvalidParameters(
            f"need degrees (1, {d}), got ({a.degree}, {b.degree})"
        )
    facets = delta.faces_of_dim(d)
    base_facet = _facet_of(delta, base) if base is not None else facets[0]
    if rho is None:
        rho = pl_orientation(nu, base_facet)
    mu = stress_to_lifting(nu, a, rho, base_facet)
    rec = lifting_to_reciprocal(nu, mu, rho)
    fact = Fraction(math.factorial(d - 1))
    lhat: dict[Face, QuadExt] = {}
    for ridge, ell in rec.lengths.items():
        gram = _edge_gram_det(nu, ridge)
        lhat[ridge] = ell * QuadExt.sqrt_of(gram) * fact / gram
    rhs = QUAD_ZERO
    for v in range(len(delta.vertices)):
        coeff = b.value((v,))
        if coeff == 0:
            continue
        total = sum(
            (val for ridge, val in lhat.items() if v not in ridge), QUAD_ZERO
        )
        rhs = rhs + total * coeff
    from .algebra import stress_product

    lhs = stress_product(a, b, nu).value(())
    return (rhs - lhs).is_zero()
