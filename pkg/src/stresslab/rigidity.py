"""Equilibrium systems, graded stress spaces, and pivotal column orders.

The degree-r component of the graded space holds values on (d-r)-faces and
is cut out by one vector equation per (d-r-1)-face.  Degree r corresponds
to what the rigidity literature calls (d+1-r)-stresses; both indexings are
exposed.  Pivot manipulation works on the reduced row-echelon form of the
equilibrium matrix under explicit face orders.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath as mp

from .complexes import Face, FaceNotFound, InvalidParameters, SimplicialComplex
from .exterior import MultiVector, m_vector, sgn, wedge
from .numeric import rat_rref, rat_solve
from .realization import DistinguishedBasis, Realization, general_position

GEOMETRIC_DPS = 60
GEOMETRIC_RTOL = Fraction(1, 10**30)


class BasisNotDistinguished(Exception):
    """A covering pair's transition vector has last link coordinate zero."""


class DescentStalled(Exception):
    """Pivot descent found no substitute cofacet.  Carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class StressVector:
    """Homogeneous element of the graded stress space.

    Degree r stores values on (d-r)-faces, where d is the dimension of the
    underlying complex; classically these are the (d+1-r)-stresses.  Keys
    are sorted vertex-id tuples.
    """

    degree: int
    values: Mapping[Face, Fraction]

    def value(self, face: Iterable[int]) -> Fraction:
        return self.values.get(tuple(face), Fraction(0))

    def support(self) -> tuple[Face, ...]:
        return tuple(sorted(f for f, c in self.values.items() if c != 0))

    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.values.values())

    def scaled(self, factor) -> "StressVector":
        lam = Fraction(factor)
        return StressVector(
            self.degree, {f: lam * c for f, c in self.values.items()}
        )


def _check_support(a: StressVector, nu: Realization) -> int:
    """Validate homogeneous support; returns the stress order d + 1 - r."""
    delta = nu.complex
    d = delta.dim
    if not 0 <= a.degree <= d + 1:
        raise InvalidParameters(f"degree {a.degree} outside 0..{d + 1}")
    want = d - a.degree
    for face in a.values:
        if face not in delta:
            raise FaceNotFound(f"{face} is not a face")
        if len(face) != want + 1:
            raise InvalidParameters(
                f"degree {a.degree} support must be {want}-faces, got {face}"
            )
    return d + 1 - a.degree


def _vertex_coords(nu: Realization, v: int) -> tuple[Fraction, ...]:
    return nu.coords[nu.complex.vertices[v]]


def _complement_projector(nu: Realization, face: Face) -> list[list[Fraction]]:
    """Orthogonal projector onto the complement of the face's vector span.

    Rational since the Gram matrix of the face vectors is invertible for
    any valid realization.  The empty face gives the identity.
    """
    width = nu.ambient + 1
    if not face:
        return [
            [Fraction(1 if i == j else 0) for j in range(width)]
            for i in range(width)
        ]
    rows = [_vertex_coords(nu, v) for v in face]
    k = len(rows)
    gram = [
        [sum(rows[i][t] * rows[j][t] for t in range(width)) for j in range(k)]
        for i in range(k)
    ]
    # solve gram * y = W e_j for each coordinate, then P e_j = e_j - W^T y
    cols: list[list[Fraction]] = []
    for j in range(width):
        y = rat_solve(gram, [rows[i][j] for i in range(k)])
        col = [
            (Fraction(1) if i == j else Fraction(0))
            - sum(rows[t][i] * y[t] for t in range(k))
            for i in range(width)
        ]
        cols.append(col)
    return [[cols[j][i] for j in range(width)] for i in range(width)]


def rigidity_matrix(
    nu: Realization,
    k: int,
    row_order: Sequence[Face] | None = None,
    col_order: Sequence[Face] | None = None,
) -> list[list[Fraction]]:
    """Coefficient matrix whose nullspace is the degree d-k component.

    One block of d+1 rows per (k-1)-face F; the column of a k-face H = F+v
    carries the projection of nu(v) away from the span of F's vectors, so
    the block encodes the F-equilibrium equation modulo lin(nu(F)).
    """
    delta = nu.complex
    d = delta.dim
    if not 0 <= k <= d:
        raise InvalidParameters(f"k={k} outside 0..{d}")
    rows_faces = _validated_order(delta, k - 1, row_order)
    cols_faces = _validated_order(delta, k, col_order)
    col_of = {f: i for i, f in enumerate(cols_faces)}
    width = nu.ambient + 1
    out: list[list[Fraction]] = []
    for f in rows_faces:
        proj = _complement_projector(nu, f)
        block = [[Fraction(0)] * len(cols_faces) for _ in range(width)]
        fset = set(f)
        for cof in delta.cofacets(f):
            v = next(u for u in cof if u not in fset)
            vec = _vertex_coords(nu, v)
            for r in range(width):
                block[r][col_of[cof]] = sum(
                    proj[r][t] * vec[t] for t in range(width)
                )
        out.extend(block)
    return out


def _validated_order(
    delta: SimplicialComplex, dim: int, order: Sequence[Face] | None
) -> list[Face]:
    canonical = delta.faces_of_dim(dim)
    if order is None:
        return list(canonical)
    got = [tuple(f) for f in order]
    if sorted(got) != list(canonical):
        raise InvalidParameters(
            f"order is not a permutation of the {dim}-faces"
        )
    return got


@dataclass(frozen=True)
class GradedStressSpace:
    """Exact nullspace bases per degree, with cached echelon forms.

    Immutable after construction; queries are safe to share across threads.
    hilbert[r] = dim of degree r for r = 0 .. d+1.
    """

    nu: Realization
    bases: tuple[tuple[StressVector, ...], ...]
    rref_cache: Mapping[int, tuple[tuple[tuple[Fraction, ...], ...], tuple[int, ...]]]
    hilbert: tuple[int, ...]

    def dim(self, degree: int) -> int:
        if 0 <= degree < len(self.bases):
            return len(self.bases[degree])
        return 0

    def basis(self, degree: int) -> tuple[StressVector, ...]:
        if 0 <= degree < len(self.bases):
            return self.bases[degree]
        return ()

    def basis_for_order(self, order: int) -> tuple[StressVector, ...]:
        """Basis indexed by classical stress order r = d + 1 - degree."""
        return self.basis(self.nu.complex.dim + 1 - order)


def stress_space(nu: Realization) -> GradedStressSpace:
    """Nullspace bases of every equilibrium system, bottom degree first."""
    delta = nu.complex
    d = delta.dim
    bases: list[tuple[StressVector, ...]] = []
    cache: dict[int, tuple] = {}
    for degree in range(d + 1):
        k = d - degree
        faces = delta.faces_of_dim(k)
        mat = rigidity_matrix(nu, k)
        rref, pivots = rat_rref(mat, len(faces))
        cache[k] = (
            tuple(tuple(row) for row in rref[: len(pivots)]),
            tuple(pivots),
        )
        pivot_set = set(pivots)
        vecs = []
        for free in range(len(faces)):
            if free in pivot_set:
                continue
            coords = {faces[free]: Fraction(1)}
            for i, piv in enumerate(pivots):
                if rref[i][free] != 0:
                    coords[faces[piv]] = -rref[i][free]
            vecs.append(StressVector(degree, coords))
        bases.append(tuple(vecs))
    bases.append((StressVector(d + 1, {(): Fraction(1)}),))
    return GradedStressSpace(
        nu=nu,
        bases=tuple(bases),
        rref_cache=cache,
        hilbert=tuple(len(b) for b in bases),
    )


# -- equilibrium verification --------------------------------------------------


def check_equilibrium(
    a: StressVector, nu: Realization, form: str = "projective"
) -> bool:
    """Verdict of one equilibrium formulation.

    projective and cayley are exact rational identities; geometric sums
    volume-weighted outer unit normals in 60-digit floats with relative
    tolerance 1e-30.  Orders below 2 have no geometric statement, so that
    form falls back to a float evaluation of the projective identity.
    """
    order = _check_support(a, nu)
    if form == "projective":
        return _projective_ok(a, nu, order)
    if form == "cayley":
        return _cayley_ok(a, nu, order)
    if form == "geometric":
        return _geometric_ok(a, nu, order)
    raise InvalidParameters(f"unknown form {form!r}")


def _projective_ok(a: StressVector, nu: Realization, order: int) -> bool:
    delta = nu.complex
    if order < 1:
        return True
    for g in delta.faces_of_dim(order - 2):
        total = MultiVector(nu.ambient + 1)
        base = nu.face_multivector(g)
        gset = set(g)
        for cof in delta.cofacets(g):
            c = a.value(cof)
            if c == 0:
                continue
            v = next(u for u in cof if u not in gset)
            total = total + wedge(base, nu.vector(v)) * c
        if total.terms:
            return False
    return True


def _cayley_ok(a: StressVector, nu: Realization, order: int) -> bool:
    delta = nu.complex
    if order < 1:
        return True
    for g in delta.faces_of_dim(order - 2):
        total = MultiVector(nu.ambient + 1)
        for cof in delta.cofacets(g):
            c = a.value(cof)
            if c == 0:
                continue
            mv = m_vector(g, cof, nu.face_multivector)
            total = total + mv * (c * sgn(g, cof))
        if total.terms:
            return False
    return True


def _mpf(q: Fraction):
    return mp.mpf(q.numerator) / mp.mpf(q.denominator)


def _geometric_ok(a: StressVector, nu: Realization, order: int) -> bool:
    delta = nu.complex
    with mp.workdps(GEOMETRIC_DPS):
        rtol = _mpf(GEOMETRIC_RTOL)
        pts = {
            v: [_mpf(c) for c in nu.point(label)]
            for v, label in enumerate(delta.vertices)
        }
        if order < 2:
            if order < 1:
                return True
            # affine relation, evaluated on homogeneous coordinates
            total = [mp.mpf(0)] * (nu.ambient + 1)
            scale = mp.mpf(0)
            for (vid,), c in a.values.items():
                homog = [_mpf(x) for x in _vertex_coords(nu, vid)]
                cf = _mpf(c)
                scale += abs(cf) * mp.sqrt(mp.fsum(x * x for x in homog))
                for i, x in enumerate(homog):
                    total[i] += cf * x
            return _small(total, scale, rtol)
        for g in delta.faces_of_dim(order - 2):
            total = [mp.mpf(0)] * nu.ambient
            scale = mp.mpf(0)
            gset = set(g)
            for cof in delta.cofacets(g):
                c = a.value(cof)
                if c == 0:
                    continue
                w = next(u for u in cof if u not in gset)
                vol = _simplex_volume([pts[u] for u in cof])
                normal = _outer_normal([pts[u] for u in g], pts[w])
                cf = _mpf(c) * vol
                scale += abs(cf)
                for i in range(nu.ambient):
                    total[i] += cf * normal[i]
            if not _small(total, scale, rtol):
                return False
    return True


def _small(vec, scale, rtol) -> bool:
    resid = mp.sqrt(mp.fsum(x * x for x in vec))
    if scale == 0:
        return resid == 0
    return resid <= rtol * scale


def _simplex_volume(points) -> mp.mpf:
    if len(points) == 1:
        return mp.mpf(1)
    base = points[0]
    edges = [[p[i] - base[i] for i in range(len(base))] for p in points[1:]]
    gram = mp.matrix(
        [[mp.fsum(e1[i] * e2[i] for i in range(len(e1))) for e2 in edges]
         for e1 in edges]
    )
    det = mp.det(gram)
    if det < 0:
        det = mp.mpf(0)
    return mp.sqrt(det) / mp.factorial(len(edges))


def _outer_normal(face_points, opposite):
    """Unit normal at a facet of a simplex, pointing away from the apex."""
    dim = len(opposite)
    anchor = face_points[0]
    raw = [anchor[i] - opposite[i] for i in range(dim)]
    # project out the facet's own directions (Gram-Schmidt)
    dirs = []
    for p in face_points[1:]:
        v = [p[i] - anchor[i] for i in range(dim)]
        for u in dirs:
            coef = mp.fsum(v[i] * u[i] for i in range(dim))
            v = [v[i] - coef * u[i] for i in range(dim)]
        norm = mp.sqrt(mp.fsum(x * x for x in v))
        dirs.append([x / norm for x in v])
    for u in dirs:
        coef = mp.fsum(raw[i] * u[i] for i in range(dim))
        raw = [raw[i] - coef * u[i] for i in range(dim)]
    norm = mp.sqrt(mp.fsum(x * x for x in raw))
    return [x / norm for x in raw]


# -- restriction to links ------------------------------------------------------


def restrict_to_link(
    nu: Realization,
    a: StressVector,
    face: Iterable[int],
    link: tuple[DistinguishedBasis, Realization],
) -> StressVector:
    """Push a stress into the link of a face, keeping its degree.

    The link argument is a (basis, realization) pair as produced by
    link_realization.  The basis is re-verified against every covering
    pair in the star; the realization must be the one the basis induces.
    """
    delta = nu.complex
    face = tuple(sorted(face))
    if face not in delta:
        raise FaceNotFound(f"{face} is not a face")
    basis, lk_nu = link
    _check_support(a, nu)
    for gprime in sorted(delta.star(face), key=lambda f: (len(f), f)):
        for g in delta.cofacets(gprime):
            coords = basis.to_link_coordinates(
                m_vector(gprime, g, nu.face_multivector)
            )
            if coords[-1] == 0:
                raise BasisNotDistinguished(
                    f"covering pair {gprime} < {g} has zero last coordinate"
                )
    expected = delta.link(face)
    if lk_nu.complex.vertices != expected.vertices or set(
        lk_nu.complex.facets
    ) != set(expected.facets):
        raise InvalidParameters("realization is not of this face's link")
    for label in lk_nu.complex.vertices:
        vid = delta.id_of(label)
        cover = tuple(sorted(face + (vid,)))
        coords = basis.to_link_coordinates(
            m_vector(face, cover, nu.face_multivector)
        )
        orient = sgn(face, cover)
        if tuple(orient * c for c in coords) != tuple(lk_nu.coords[label]):
            raise InvalidParameters(
                "link realization disagrees with the basis coordinates"
            )
    d_link = lk_nu.complex.dim
    if not 0 <= a.degree <= d_link + 1:
        raise InvalidParameters(
            f"degree {a.degree} does not fit a {d_link}-complex"
        )
    values: dict[Face, Fraction] = {}
    for g in lk_nu.complex.faces_of_dim(d_link - a.degree):
        parent = delta.face_ids(lk_nu.complex.face_labels(g))
        values[g] = a.value(tuple(sorted(face + parent)))
    return StressVector(a.degree, values)


# -- pivotal orders ------------------------------------------------------------


@dataclass(frozen=True)
class PivotalOrder:
    """Column order under which the echelon form is [I | rhat; 0 | 0].

    faces is the full order; the first len(pivot_faces) of them are the
    pivot k-faces and the remaining nonpivot_faces parametrize the
    nullspace.  rhat has one row per pivot face.
    """

    nu: Realization
    k: int
    faces: tuple[Face, ...]
    pivot_faces: tuple[Face, ...]
    nonpivot_faces: tuple[Face, ...]
    rhat: tuple[tuple[Fraction, ...], ...]

    @property
    def nullity(self) -> int:
        return len(self.nonpivot_faces)


def _build_pivotal(nu: Realization, k: int, order: list[Face]) -> PivotalOrder | None:
    """Echelon-reduce under the given order; None if not pivotal."""
    mat = rigidity_matrix(nu, k, col_order=order)
    rref, pivots = rat_rref(mat, len(order))
    rank = len(pivots)
    if pivots != list(range(rank)):
        return None
    rhat = tuple(
        tuple(rref[i][rank:]) for i in range(rank)
    )
    return PivotalOrder(
        nu=nu,
        k=k,
        faces=tuple(order),
        pivot_faces=tuple(order[:rank]),
        nonpivot_faces=tuple(order[rank:]),
        rhat=rhat,
    )


def pivotal_order(nu: Realization, k: int, seed: int | None = None) -> PivotalOrder:
    """A column order placing the echelon pivots first.

    The initial order is lexicographic, or seeded-shuffled when a seed is
    given; moving its pivot columns to the front in their own order always
    yields a pivotal order.
    """
    delta = nu.complex
    faces = list(delta.faces_of_dim(k))
    if seed is not None:
        random.Random(seed).shuffle(faces)
    mat = rigidity_matrix(nu, k, col_order=faces)
    _, pivots = rat_rref(mat, len(faces))
    pivot_set = set(pivots)
    order = [faces[i] for i in pivots]
    order += [f for i, f in enumerate(faces) if i not in pivot_set]
    po = _build_pivotal(nu, k, order)
    if po is None:
        raise InvalidParameters("pivot-first reorder failed to be pivotal")
    return po


def pivotal_weights(po: PivotalOrder) -> tuple[dict[Face, int], dict[Face, int]]:
    """Pivotal weight per k-face and subweight per (k-1)-face.

    Weight of the t-th non-pivot face is t; a pivot face's weight is the
    last non-pivot its echelon row touches.  The subweight of a ridge is
    the stage at which all of its cofacets are determined.  Realizations
    with vertices out of general position are refused since the counting
    arguments behind these notions presume it.  With nullity zero every
    value is 0.
    """
    if not general_position(po.nu):
        raise InvalidParameters(
            "pivotal weights need vertices in general position"
        )
    return _weights_unchecked(po)


def _weights_unchecked(po: PivotalOrder):
    n = po.nullity
    wt: dict[Face, int] = {}
    if n == 0:
        wt = {f: 0 for f in po.faces}
        sub = {f: 0 for f in po.nu.complex.faces_of_dim(po.k - 1)}
        return wt, sub
    for t, face in enumerate(po.nonpivot_faces, start=1):
        wt[face] = t
    for i, face in enumerate(po.pivot_faces):
        row = po.rhat[i]
        last = 0
        for j in range(n - 1, -1, -1):
            if row[j] != 0:
                last = j + 1
                break
        wt[face] = max(last, 1)
    sub: dict[Face, int] = {}
    delta = po.nu.complex
    for f in delta.faces_of_dim(po.k - 1):
        sub[f] = max(wt[cof] for cof in delta.cofacets(f))
    return wt, sub


# -- autonomous sets and pivot descent -----------------------------------------


def _vertex_ids(delta: SimplicialComplex, vertices: Iterable) -> frozenset[int]:
    ids = set()
    for v in vertices:
        try:
            ids.add(v if isinstance(v, int) else delta.id_of(v))
        except KeyError:
            raise InvalidParameters(f"unknown vertex {v!r}") from None
    for v in ids:
        if not 0 <= v < len(delta.vertices):
            raise InvalidParameters(f"unknown vertex id {v}")
    return frozenset(ids)


def is_autonomous(delta: SimplicialComplex, vertices: Iterable, k: int) -> bool:
    """Whether every k-face avoiding the set sees it in its link."""
    ids = _vertex_ids(delta, vertices)
    if k == -1:
        return bool(ids)
    if not 0 <= k <= delta.dim:
        raise InvalidParameters(f"k={k} outside -1..{delta.dim}")
    for face in delta.faces_of_dim(k):
        if set(face) & ids:
            continue
        if not any(tuple(sorted(face + (v,))) in delta for v in ids):
            return False
    return True


def pivot_compatible_set(
    nu: Realization,
    vertices: Iterable,
    k: int,
    seed: int | None = None,
) -> tuple[frozenset[Face], PivotalOrder]:
    """Single-cofacet k-faces over an autonomous set, forced into pivots.

    For each (k-1)-face avoiding the vertex set, its unique chosen cover
    joins the target set; the returned order keeps every target among the
    pivot faces.  Works by descent: an offending target is rotated to the
    last non-pivot slot, then swapped against a substitute cofacet of its
    private ridge carrying top weight.
    """
    delta = nu.complex
    ids = _vertex_ids(delta, vertices)
    if not is_autonomous(delta, ids, k - 1):
        raise InvalidParameters("vertex set is not (k-1)-autonomous")
    if not general_position(nu):
        raise InvalidParameters(
            "pivot descent needs vertices in general position"
        )
    private: dict[Face, Face] = {}
    target = set()
    for f in delta.faces_of_dim(k - 1):
        if set(f) & ids:
            continue
        cover = next(
            (
                tuple(sorted(f + (v,)))
                for v in sorted(ids)
                if tuple(sorted(f + (v,))) in delta
            ),
            None,
        )
        if cover is None:
            raise InvalidParameters("vertex set is not (k-1)-autonomous")
        target.add(cover)
        private.setdefault(cover, f)
    po = pivotal_order(nu, k, seed)
    guard = len(target) + 1
    while guard:
        guard -= 1
        offenders = sorted(target & set(po.nonpivot_faces))
        if not offenders:
            return frozenset(target), po
        h = offenders[0]
        ridge = private[h]
        n = po.nullity
        rest = [f for f in po.nonpivot_faces if f != h]
        po = _build_pivotal(nu, po.k, list(po.pivot_faces) + rest + [h])
        if po is None:
            raise DescentStalled(
                "reordering the non-pivot block broke pivotality",
                {"face": h},
            )
        wt, _ = _weights_unchecked(po)
        candidates = sorted(
            cof
            for cof in po.nu.complex.cofacets(ridge)
            if cof != h and wt[cof] == n
        )
        if not candidates:
            raise DescentStalled(
                "no substitute cofacet at top weight",
                {
                    "face": h,
                    "ridge": ridge,
                    "cofacet_weights": {
                        cof: wt[cof] for cof in po.nu.complex.cofacets(ridge)
                    },
                },
            )
        sub = candidates[0]
        order = list(po.faces)
        i, j = order.index(sub), order.index(h)
        order[i], order[j] = order[j], order[i]
        po = _build_pivotal(nu, po.k, order)
        if po is None:
            raise DescentStalled(
                "swap with the substitute face broke pivotality",
                {"face": h, "substitute": sub},
            )
    raise DescentStalled("descent did not terminate", {"targets": sorted(target)})
