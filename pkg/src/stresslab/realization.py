"""Rational vertex coordinates for simplicial complexes.

A realization assigns each vertex a homogeneous coordinate vector in
Q^(ambient+1) with nonzero last coordinate; faces get the wedge of their
vertex vectors and must all be nonzero. On top of that this module houses
the genericity machinery: general position, the squarefree-kernel
certificate behind q_genericity_check, link realizations through a
distinguished basis, and the central projection that turns a realized cone
into a realization of its base one dimension down.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .complexes import (
    Face,
    FaceNotFound,
    InvalidParameters,
    SimplicialComplex,
)
from .exterior import MultiVector, apply_linear, m_vector, sgn, wedge
from .numeric import (
    DEFAULT_PRIME_BOUND,
    Kernel,
    gf2_rank,
    rat_det,
    rat_nullspace,
    rat_rref,
    rat_solve,
    squarefree_part,
)

Vec = tuple[Fraction, ...]

SIGN_CONVENTION = (
    "signed zeta uses the orientation sign of the cofacet whose outward "
    "conormal appears; the product is invariant under swapping the two "
    "cofacets, so the unsigned squares reported here do not depend on it"
)


class InvalidRealization(Exception):
    pass


class RetriesExhausted(Exception):
    pass


class DegenerateProjection(Exception):
    pass


def _fvec(seq: Sequence[Fraction | int]) -> Vec:
    return tuple(Fraction(x) for x in seq)


class Realization:
    """Vertex label -> homogeneous rational vector, all face wedges nonzero."""

    __slots__ = ("complex", "ambient", "coords", "_mv")

    def __init__(
        self,
        delta: SimplicialComplex,
        ambient: int,
        coords: Mapping[str, Sequence[Fraction | int]],
    ):
        self.complex = delta
        self.ambient = ambient
        fixed: dict[str, Vec] = {}
        for label in delta.vertices:
            if label not in coords:
                raise InvalidRealization(f"no coordinates for vertex {label!r}")
            vec = _fvec(coords[label])
            if len(vec) != ambient + 1:
                raise InvalidRealization(
                    f"vertex {label!r} needs {ambient + 1} coordinates"
                )
            if vec[-1] == 0:
                raise InvalidRealization(
                    f"vertex {label!r} has zero last coordinate"
                )
            fixed[label] = vec
        self.coords = fixed
        # wedge every face bottom-up; a zero wedge is exactly a rank drop
        # among the vertex vectors, which the construction must reject
        mv: dict[Face, MultiVector] = {(): MultiVector.scalar(ambient + 1, 1)}
        for k in range(0, delta.dim + 1):
            for face in delta.faces_of_dim(k):
                w = wedge(mv[face[:-1]], self.vector(face[-1]))
                if w.is_zero():
                    raise InvalidRealization(
                        f"face {delta.face_labels(face)} has zero multivector"
                    )
                mv[face] = w
        self._mv = mv

    # -- basic queries -----------------------------------------------------

    def vector(self, v: int | str) -> MultiVector:
        label = v if isinstance(v, str) else self.complex.vertices[v]
        return MultiVector.vector(self.coords[label])

    def point(self, v: int | str) -> Vec:
        """Dehomogenized point: divide the first coordinates by the last."""
        label = v if isinstance(v, str) else self.complex.vertices[v]
        vec = self.coords[label]
        return tuple(c / vec[-1] for c in vec[:-1])

    def homogeneous_row(self, v: int | str) -> Vec:
        """The point with a trailing 1, i.e. the vector scaled to last = 1."""
        return self.point(v) + (Fraction(1),)

    def face_multivector(self, face: Iterable[int]) -> MultiVector:
        key = tuple(sorted(face))
        if key not in self._mv:
            raise FaceNotFound(f"face {key} not in complex")
        return self._mv[key]

    # -- derived realizations ----------------------------------------------

    def scaled(self, factors: Mapping[str, Fraction | int]) -> "Realization":
        """Rescale each homogeneous vector by a nonzero factor."""
        coords = {}
        for label, vec in self.coords.items():
            lam = Fraction(factors.get(label, 1))
            if lam == 0:
                raise InvalidRealization(f"zero scale for vertex {label!r}")
            coords[label] = tuple(lam * c for c in vec)
        return Realization(self.complex, self.ambient, coords)

    def restricted(self, sub: SimplicialComplex) -> "Realization":
        """Same coordinates on a subcomplex (labels must be a subset)."""
        return Realization(
            sub, self.ambient, {v: self.coords[v] for v in sub.vertices}
        )

    def __repr__(self) -> str:
        return (
            f"Realization(ambient={self.ambient}, "
            f"n={len(self.complex.vertices)})"
        )


def general_position(
    nu: Realization, sample: int | None = None, seed: int = 0
) -> bool:
    """No ambient+1 vertices affinely dependent.

    Checks every (ambient+1)-subset by an exact determinant; ``sample``
    switches to that many seeded random subsets for large vertex counts.
    """
    labels = nu.complex.vertices
    k = nu.ambient + 1
    if len(labels) < k:
        return True
    if sample is None:
        subsets: Iterable[tuple[str, ...]] = combinations(labels, k)
    else:
        rng = random.Random(seed)
        subsets = (
            tuple(rng.sample(labels, k)) for _ in range(sample)
        )
    for subset in subsets:
        mat = [list(nu.coords[v]) for v in subset]
        if rat_det(mat) == 0:
            return False
    return True


def realize_random(
    delta: SimplicialComplex,
    seed: int = 0,
    coordinate_bound: int = 100,
    max_retries: int = 200,
) -> Realization:
    """Seeded rational coordinates in general position, last coordinate 1."""
    if coordinate_bound < 0:
        raise InvalidParameters("coordinate_bound must be nonnegative")
    rng = random.Random(seed)
    den = max(coordinate_bound, 1)
    span = coordinate_bound * coordinate_bound
    ambient = delta.dim
    for _ in range(max_retries):
        coords = {
            v: tuple(
                Fraction(rng.randint(-span, span), den) for _ in range(ambient)
            )
            + (Fraction(1),)
            for v in delta.vertices
        }
        try:
            nu = Realization(delta, ambient, coords)
        except InvalidRealization:
            continue
        if general_position(nu):
            return nu
    raise RetriesExhausted(
        f"no general-position draw in {max_retries} tries "
        f"(bound {coordinate_bound})"
    )


def induced_point(nu: Realization, v: int | str) -> Vec:
    return nu.point(v)


# -- elementary liftings and the genericity certificate ---------------------


def lifting_gradient(
    nu: Realization, facet: Face, vertex: int
) -> Vec:
    """Gradient over a facet of the lifting with unit height at one vertex.

    Solves the affine interpolation system on the facet's normalized
    vertex rows; vertices outside the facet get the zero gradient.
    """
    if vertex not in facet:
        return tuple(Fraction(0) for _ in range(nu.ambient))
    k = facet.index(vertex)
    rows = [list(nu.homogeneous_row(v)) for v in facet]
    rhs = [Fraction(1) if i == k else Fraction(0) for i in range(len(facet))]
    sol = rat_solve(rows, rhs)
    return tuple(sol[: nu.ambient])


def _gram_det(nu: Realization, face: Face) -> Fraction:
    rows = [nu.homogeneous_row(v) for v in face]
    gram = [
        [sum(a * b for a, b in zip(r1, r2)) for r2 in rows] for r1 in rows
    ]
    return rat_det(gram)


def zeta_square(nu: Realization, ridge: Face, vertex: int) -> Fraction:
    """Squared normalized gradient jump across a ridge for one unit lifting.

    The jump m' - m'' is measured between the two cofacets of the ridge and
    normalized by the Gram determinant of the ridge's vertex rows, so the
    result is an exact rational whose square root is the usual zeta.
    """
    delta = nu.complex
    cof = delta.cofacets(tuple(sorted(ridge)))
    if len(cof) != 2:
        raise InvalidParameters(
            f"ridge {ridge} has {len(cof)} cofacets, need exactly 2"
        )
    gp, gpp = cof
    mp = lifting_gradient(nu, gp, vertex)
    mpp = lifting_gradient(nu, gpp, vertex)
    num = sum((a - b) ** 2 for a, b in zip(mp, mpp))
    return num / _gram_det(nu, tuple(sorted(ridge)))


@dataclass(frozen=True)
class GenericityReport:
    is_rational: bool
    general_position: bool
    zeta_squares: dict
    kernels: dict
    kernel_gf2_rank: int
    distinct_kernel_count: int
    pair_count: int
    values_distinct: bool
    rows_distinct: bool
    verdict: bool
    sign_convention: str = SIGN_CONVENTION


def q_genericity_check(
    nu: Realization,
    rho: Mapping | None = None,
    prime_bound: int = DEFAULT_PRIME_BOUND,
) -> GenericityReport:
    """Certify the number-theoretic genericity the separation argument needs.

    For every ridge G and every vertex v of its closed star, zeta^2_(G,v)
    must be a nonzero rational with irrational square root. Zetas at a
    fixed ridge are rational multiples of each other (the gradient jumps
    are parallel to the ridge conormal), so the usable independence lives
    at the level of squarefree kernels: the distinct kernels must be
    GF(2)-independent, and no vertex may see the same kernel at two ridges
    of its closed star. Together with pairwise-distinct zeta values this
    makes every genuinely irrational combination that the downstream
    invertibility arguments form provably nonzero.
    """
    delta = nu.complex
    d = delta.dim
    if nu.ambient != d:
        raise InvalidParameters("genericity check needs a realization in R^d")
    if d < 1:
        raise InvalidParameters("genericity check needs dimension >= 1")
    if rho is not None:
        facets = delta.faces_of_dim(d)
        keys = {tuple(sorted(k)) for k in rho}
        if len(rho) != len(facets) or any(rho[k] not in (1, -1) for k in rho):
            raise InvalidParameters("rho must assign +-1 to every facet")
        del keys
    zeta_squares: dict[tuple[tuple[str, ...], str], Fraction] = {}
    kernels: dict[tuple[tuple[str, ...], str], Kernel] = {}
    row_kernels: dict[str, list[Kernel]] = {v: [] for v in delta.vertices}
    for ridge in delta.faces_of_dim(d - 1):
        cof = delta.cofacets(ridge)
        if len(cof) != 2:
            raise InvalidParameters(
                f"ridge {delta.face_labels(ridge)} has {len(cof)} cofacets"
            )
        support = sorted(set(cof[0]) | set(cof[1]))
        glabels = delta.face_labels(ridge)
        for vid in support:
            z2 = zeta_square(nu, ridge, vid)
            key = (glabels, delta.vertices[vid])
            zeta_squares[key] = z2
            kern = squarefree_part(z2, prime_bound)[0] if z2 != 0 else ()
            kernels[key] = kern
            row_kernels[delta.vertices[vid]].append(kern)
    distinct = sorted(set(kernels.values()))
    primes = sorted({p for k in distinct for p in k})
    masks = [
        [1 if p in k else 0 for p in primes] for k in distinct if k
    ]
    rank = gf2_rank(masks) if primes else 0
    nonzero = all(z != 0 for z in zeta_squares.values())
    irrational = all(k != () for k in kernels.values())
    values_distinct = len(set(zeta_squares.values())) == len(zeta_squares)
    rows_distinct = all(
        len(set(ks)) == len(ks) for ks in row_kernels.values()
    )
    gp = general_position(nu)
    verdict = (
        gp
        and nonzero
        and irrational
        and values_distinct
        and rows_distinct
        and rank == len(distinct)
    )
    return GenericityReport(
        is_rational=True,
        general_position=gp,
        zeta_squares=zeta_squares,
        kernels=kernels,
        kernel_gf2_rank=rank,
        distinct_kernel_count=len(distinct),
        pair_count=len(zeta_squares),
        values_distinct=values_distinct,
        rows_distinct=rows_distinct,
        verdict=verdict,
    )


# -- link realizations -------------------------------------------------------


def _solve_in_span(
    basis_rows: Sequence[Vec], target: Sequence[Fraction]
) -> list[Fraction]:
    """Coordinates of target in the span of the rows; error if outside."""
    ncols = len(basis_rows)
    width = len(target)
    aug = [
        [basis_rows[j][i] for j in range(ncols)] + [target[i]]
        for i in range(width)
    ]
    rref, pivots = rat_rref(aug, ncols + 1)
    if ncols in pivots:
        raise InvalidParameters("vector outside the basis span")
    sol = [Fraction(0)] * ncols
    for r, p in enumerate(pivots):
        sol[p] = rref[r][ncols]
    return sol


def _as_coord_vector(mv: MultiVector) -> Vec:
    return tuple(mv.coefficient((i,)) for i in range(mv.dim))


@dataclass(frozen=True)
class DistinguishedBasis:
    """Ordered basis of the orthogonal complement used to coordinatize a link."""

    base_face: tuple[str, ...]
    vectors: tuple[Vec, ...]

    def to_link_coordinates(self, target: MultiVector | Sequence) -> Vec:
        vec = (
            _as_coord_vector(target)
            if isinstance(target, MultiVector)
            else _fvec(target)
        )
        return tuple(_solve_in_span(self.vectors, vec))


def link_realization(
    nu: Realization,
    face: Face,
    seed: int = 0,
    max_retries: int = 500,
) -> tuple[DistinguishedBasis, Realization]:
    """Realize the link of a face in the complement of its vertex span.

    Draws random bases of the complement until the covering-pair vectors of
    the star all have nonzero last coordinate (such bases are dense), then
    maps each link vertex v to the coordinates of the face-to-(face+v)
    transition vector in that basis, times the orientation sign of v
    against the face.  The sign makes restriction of stresses to the link
    work with unchanged values: the transition vector of v equals sign
    times the projection of v's vector away from the face span, so pulling
    the sign out leaves each link vertex an honest projected image.
    """
    delta = nu.complex
    face = tuple(sorted(face))
    if face not in delta:
        raise FaceNotFound(f"face {face} not in complex")
    k = len(face) - 1
    link_ambient = nu.ambient - k - 1
    if link_ambient < 0:
        raise InvalidParameters(
            "link realization needs len(face) <= ambient dimension"
        )
    width = nu.ambient + 1
    span_rows = [list(nu.coords[delta.vertices[v]]) for v in face]
    null = rat_nullspace(span_rows, cols=width) if span_rows else [
        [Fraction(1 if i == j else 0) for i in range(width)]
        for j in range(width)
    ]
    dim_v = len(null)
    # covering pairs (G', G) of the star with face <= G' are exactly what
    # the distinguished condition quantifies over
    pairs = []
    for gprime in sorted(delta.star(face), key=lambda f: (len(f), f)):
        for g in delta.cofacets(gprime):
            pairs.append((gprime, g))
    mvecs = [
        _as_coord_vector(m_vector(gp, g, nu.face_multivector))
        for gp, g in pairs
    ]
    rng = random.Random(seed)
    for _ in range(max_retries):
        mix = [
            [Fraction(rng.randint(-9, 9)) for _ in range(dim_v)]
            for _ in range(dim_v)
        ]
        if rat_det(mix) == 0:
            continue
        basis_rows = [
            tuple(
                sum(mix[r][j] * null[j][i] for j in range(dim_v))
                for i in range(width)
            )
            for r in range(dim_v)
        ]
        try:
            coords_of = [
                _solve_in_span(basis_rows, m) for m in mvecs
            ]
        except InvalidParameters:
            # a transition vector left the span: the input face rows must
            # not actually be independent, which Realization rules out
            raise
        if any(c[-1] == 0 for c in coords_of):
            continue
        basis = DistinguishedBasis(
            base_face=delta.face_labels(face), vectors=tuple(basis_rows)
        )
        link = delta.link(face)
        coords = {}
        for label in link.vertices:
            vid = delta.id_of(label)
            cover = tuple(sorted(face + (vid,)))
            m = m_vector(face, cover, nu.face_multivector)
            orient = sgn(face, cover)
            coords[label] = tuple(
                orient * c for c in basis.to_link_coordinates(m)
            )
        return basis, Realization(link, link_ambient, coords)
    raise RetriesExhausted(
        f"no distinguished basis found in {max_retries} tries"
    )


# -- cone projection ---------------------------------------------------------


@dataclass(frozen=True)
class CentralProjection:
    """Linear drop of one dimension through a fixed apex vector.

    Sends x to x - (<u,x>/<u,a>) a (the line through x and the apex meets
    the hyperplane u-perp there), then deletes the drop coordinate, which
    u's nonzero entry makes redundant.
    """

    apex: str
    apex_vector: Vec
    normal: Vec
    drop_index: int
    matrix: tuple[Vec, ...] = field(init=False)

    def __post_init__(self):
        lam = sum(u * a for u, a in zip(self.normal, self.apex_vector))
        width = len(self.normal)
        rows = []
        for r in range(width):
            if r == self.drop_index:
                continue
            row = [
                -self.apex_vector[r] * self.normal[c] / lam for c in range(width)
            ]
            row[r] += 1
            rows.append(tuple(row))
        object.__setattr__(self, "matrix", tuple(rows))

    def apply_vector(self, vec: Sequence[Fraction | int]) -> Vec:
        v = _fvec(vec)
        return tuple(sum(m * x for m, x in zip(row, v)) for row in self.matrix)

    def apply_multivector(self, mv: MultiVector) -> MultiVector:
        return apply_linear(self.matrix, mv)


def cone_and_project(
    nu_prime: Realization,
    apex: str,
    seed: int = 0,
    coordinate_bound: int = 10,
    max_retries: int = 200,
    normal: Sequence[Fraction | int] | None = None,
) -> tuple[CentralProjection, Realization]:
    """Project a realized cone from its apex onto one dimension lower.

    The hyperplane is chosen by a rational normal vector; an explicit
    ``normal`` is used as-is and any failure raises DegenerateProjection,
    otherwise seeded draws retry until the projected realization is valid.
    """
    delta_prime = nu_prime.complex
    if apex not in delta_prime.vertices:
        raise InvalidParameters(f"apex {apex!r} is not a vertex")
    aid = delta_prime.id_of(apex)
    if any(aid not in f for f in delta_prime.facets):
        raise InvalidParameters(f"vertex {apex!r} is not an apex of the complex")
    base = delta_prime.link((aid,))
    a_vec = _fvec(nu_prime.coords[apex])
    width = nu_prime.ambient + 1

    def attempt(u: Vec) -> tuple[CentralProjection, Realization]:
        lam = sum(x * y for x, y in zip(u, a_vec))
        if lam == 0:
            raise DegenerateProjection("hyperplane contains the apex vector")
        drop = max(i for i, x in enumerate(u) if x != 0)
        proj = CentralProjection(
            apex=apex, apex_vector=a_vec, normal=u, drop_index=drop
        )
        coords = {
            label: proj.apply_vector(nu_prime.coords[label])
            for label in base.vertices
        }
        try:
            return proj, Realization(base, nu_prime.ambient - 1, coords)
        except InvalidRealization as exc:
            raise DegenerateProjection(str(exc)) from exc

    if normal is not None:
        return attempt(_fvec(normal))
    rng = random.Random(seed)
    for _ in range(max_retries):
        u = tuple(
            Fraction(rng.randint(-coordinate_bound, coordinate_bound))
            for _ in range(width)
        )
        if all(x == 0 for x in u):
            continue
        try:
            return attempt(u)
        except DegenerateProjection:
            continue
    raise RetriesExhausted(
        f"no valid projection hyperplane in {max_retries} tries"
    )
