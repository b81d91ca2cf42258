"""Abstract simplicial complexes and their combinatorial invariants.

A complex stores its vertex labels (opaque strings, sorted lexicographically;
this sort is the fixed linear order used everywhere downstream for wedge
signs) and its faces as sorted tuples of vertex ids.  The empty face () is
always present.  Complexes are immutable after construction and all queries
are pure.

The homology here is reduced: the chain complex includes the empty face in
degree -1, so the Betti profile runs beta_{-1} .. beta_d and the complex {()}
counts as a (-1)-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .numeric import gf2_rank, rat_rank

Face = tuple[int, ...]


class DuplicateOrNestedFacet(Exception):
    pass


class FaceNotFound(Exception):
    pass


class VertexCollision(Exception):
    pass


class InvalidParameters(Exception):
    pass


class SimplicialComplex:
    """Finite abstract simplicial complex with a fixed vertex order."""

    __slots__ = ("vertices", "faces", "facets", "dim", "_by_dim", "_index")

    def __init__(self, vertices: tuple[str, ...], facets: tuple[Face, ...]):
        self.vertices = vertices
        self.facets = facets
        faces: set[Face] = {()}
        for facet in facets:
            for k in range(1, len(facet) + 1):
                faces.update(combinations(facet, k))
        self.faces = frozenset(faces)
        self.dim = max(len(f) for f in faces) - 1
        by_dim: dict[int, list[Face]] = {k: [] for k in range(-1, self.dim + 1)}
        for f in faces:
            by_dim[len(f) - 1].append(f)
        for k in by_dim:
            by_dim[k].sort()
        self._by_dim = by_dim
        self._index = {label: i for i, label in enumerate(vertices)}

    # -- label/id translation --------------------------------------------

    def id_of(self, label: str) -> int:
        return self._index[label]

    def face_ids(self, labels: Iterable[str]) -> Face:
        return tuple(sorted(self._index[x] for x in labels))

    def face_labels(self, face: Face) -> tuple[str, ...]:
        return tuple(self.vertices[i] for i in face)

    # -- queries -----------------------------------------------------------

    def faces_of_dim(self, k: int) -> list[Face]:
        """Sorted list of k-faces; k may be -1 (the empty face)."""
        return list(self._by_dim.get(k, []))

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self._by_dim[k]) for k in range(0, self.dim + 1))

    def __contains__(self, face: Face) -> bool:
        return tuple(face) in self.faces

    def _require(self, face: Face) -> Face:
        face = tuple(sorted(face))
        if face not in self.faces:
            raise FaceNotFound(f"face {face} not in complex")
        return face

    def link(self, face: Face) -> "SimplicialComplex":
        """Subcomplex {G : G disjoint from face, G + face a face}."""
        face = self._require(face)
        fset = set(face)
        members = [
            g
            for g in self.faces
            if not fset & set(g) and tuple(sorted(set(g) | fset)) in self.faces
        ]
        maximal = _maximal_faces(members)
        labels = [tuple(self.vertices[i] for i in g) for g in maximal]
        return build_from_facets(labels, _allow_empty=True)

    def star(self, face: Face) -> set[Face]:
        """Open star: the faces containing the given face."""
        face = self._require(face)
        fset = set(face)
        return {g for g in self.faces if fset <= set(g)}

    def antistar(self, face: Face) -> set[Face]:
        """Faces that do not contain the given face."""
        face = self._require(face)
        fset = set(face)
        return {g for g in self.faces if not fset <= set(g)}

    def closed_star(self, face: Face) -> "SimplicialComplex":
        """Subcomplex generated by the facets that contain the face."""
        face = self._require(face)
        fset = set(face)
        carriers = [f for f in self.facets if fset <= set(f)]
        if not carriers:
            carriers = [max(self.star(face), key=len)]
        labels = [tuple(self.vertices[i] for i in f) for f in carriers]
        return build_from_facets(labels, _allow_empty=True)

    def cofacets(self, face: Face) -> list[Face]:
        """Faces one dimension up that contain the given face."""
        face = self._require(face)
        fset = set(face)
        return sorted(
            g for g in self._by_dim.get(len(face), []) if fset <= set(g)
        )

    def __repr__(self) -> str:
        return (
            f"SimplicialComplex(dim={self.dim}, n={len(self.vertices)}, "
            f"facets={len(self.facets)})"
        )


def _maximal_faces(faces: Sequence[Face]) -> list[Face]:
    by_size = sorted(set(faces), key=len, reverse=True)
    maximal: list[Face] = []
    for f in by_size:
        fset = set(f)
        if not any(fset <= set(m) for m in maximal):
            maximal.append(f)
    return sorted(maximal)


def build_from_facets(
    facets: Iterable[Iterable[str]], _allow_empty: bool = False
) -> SimplicialComplex:
    """Build the complex generated by the given facets.

    Rejects an empty facet list and any facet contained in another (which
    covers duplicates).  Vertex labels are arbitrary strings; their
    lexicographic sort fixes the vertex order of the complex.
    """
    facet_sets = [frozenset(str(v) for v in f) for f in facets]
    if not facet_sets:
        raise DuplicateOrNestedFacet("need at least one facet")
    if not _allow_empty:
        for i, a in enumerate(facet_sets):
            for j, b in enumerate(facet_sets):
                if i != j and a <= b:
                    raise DuplicateOrNestedFacet(
                        f"facet {sorted(a)} is contained in {sorted(b)}"
                    )
    else:
        facet_sets = [
            a
            for i, a in enumerate(facet_sets)
            if not any(i != j and a < b for j, b in enumerate(facet_sets))
        ]
        facet_sets = list(dict.fromkeys(facet_sets))
    labels: set[str] = set()
    for f in facet_sets:
        labels.update(f)
    vertices = tuple(sorted(labels))
    index = {v: i for i, v in enumerate(vertices)}
    id_facets = tuple(
        sorted(tuple(sorted(index[v] for v in f)) for f in facet_sets)
    )
    return SimplicialComplex(vertices, id_facets)


# -- combinatorial constructions ---------------------------------------------


def cone(delta: SimplicialComplex, apex: str) -> SimplicialComplex:
    if apex in delta._index:
        raise VertexCollision(f"apex {apex!r} already a vertex")
    facets = [delta.face_labels(f) + (apex,) for f in delta.facets]
    return build_from_facets(facets)


def join(delta: SimplicialComplex, other: SimplicialComplex) -> SimplicialComplex:
    overlap = set(delta.vertices) & set(other.vertices)
    if overlap:
        raise VertexCollision(f"shared vertices {sorted(overlap)}")
    facets = [
        delta.face_labels(f) + other.face_labels(g)
        for f in delta.facets
        for g in other.facets
    ]
    return build_from_facets(facets)


def suspension(
    delta: SimplicialComplex, poles: tuple[str, str] = ("sus0", "sus1")
) -> SimplicialComplex:
    if poles[0] == poles[1]:
        raise VertexCollision("poles must be distinct")
    two_points = build_from_facets([[poles[0]], [poles[1]]])
    return join(delta, two_points)


def simplex_boundary(d: int) -> SimplicialComplex:
    """Boundary of the d-simplex: a (d-1)-sphere on d+1 vertices."""
    if d < 1:
        raise InvalidParameters("need d >= 1")
    labels = [f"v{i}" for i in range(1, d + 2)]
    return build_from_facets(combinations(labels, d))


def cross_polytope_boundary(d: int) -> SimplicialComplex:
    """Boundary of the d-cross-polytope: 2^d facets on 2d vertices."""
    if d < 1:
        raise InvalidParameters("need d >= 1")
    pairs = [(f"p{i}", f"n{i}") for i in range(1, d + 1)]
    facets = []
    for signs in range(2**d):
        facets.append([pairs[i][(signs >> i) & 1] for i in range(d)])
    return build_from_facets(facets)


def _gale_even(subset: tuple[int, ...], n: int) -> bool:
    inside = set(subset)
    outside = [x for x in range(1, n + 1) if x not in inside]
    for a, b in combinations(outside, 2):
        if sum(1 for s in subset if a < s < b) % 2:
            return False
    return True


def cyclic_polytope_boundary(d: int, n: int) -> SimplicialComplex:
    """Boundary of the cyclic d-polytope on moment-curve labels 1..n.

    Facets by Gale evenness: a d-subset S of {1..n} is a facet iff every
    pair of non-elements has an even number of elements of S between them.
    """
    if d < 2 or n < d + 1:
        raise InvalidParameters("need d >= 2 and n >= d+1")
    facets = [
        [str(x) for x in s]
        for s in combinations(range(1, n + 1), d)
        if _gale_even(s, n)
    ]
    return build_from_facets(facets)


# -- face vectors -------------------------------------------------------------


@dataclass(frozen=True)
class FaceVector:
    f: tuple[int, ...]
    h: tuple[int, ...]
    g: tuple[int, ...]


def f_h_g_vectors(delta: SimplicialComplex) -> FaceVector:
    """f, h, and g vectors; h_k = sum_i (-1)^(k-i) C(d+1-i, d+1-k) f_(i-1)."""
    d = delta.dim
    f = delta.f_vector()

    def f_at(i: int) -> int:
        return 1 if i == -1 else f[i]

    h = tuple(
        sum(
            (-1) ** (k - i) * comb(d + 1 - i, d + 1 - k) * f_at(i - 1)
            for i in range(k + 1)
        )
        for k in range(d + 2)
    )
    g = (1,) + tuple(h[i] - h[i - 1] for i in range(1, (d + 1) // 2 + 1))
    return FaceVector(f=f, h=h, g=g)


# -- homology -----------------------------------------------------------------


@dataclass(frozen=True)
class BettiProfile:
    field: str  # "Q" or "GF2"
    betti: tuple[int, ...]  # beta_{-1} .. beta_d

    def beta(self, i: int) -> int:
        if -1 <= i <= len(self.betti) - 2:
            return self.betti[i + 1]
        return 0

    def is_sphere_profile(self, d: int) -> bool:
        expected = tuple(1 if i == d else 0 for i in range(-1, len(self.betti) - 1))
        return self.betti == expected


def boundary_matrix(delta: SimplicialComplex, k: int) -> list[list[Fraction]]:
    """Matrix of the reduced boundary map from k-chains to (k-1)-chains.

    Rows are (k-1)-faces, columns are k-faces, both in sorted order; the
    k = 0 case is the augmentation row onto the empty face.
    """
    rows = delta.faces_of_dim(k - 1)
    cols = delta.faces_of_dim(k)
    row_index = {f: i for i, f in enumerate(rows)}
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for j, face in enumerate(cols):
        for pos in range(len(face)):
            sub = face[:pos] + face[pos + 1 :]
            mat[row_index[sub]][j] = Fraction((-1) ** pos)
    return mat


def betti(delta: SimplicialComplex, field: str = "Q") -> BettiProfile:
    """Reduced Betti numbers beta_{-1}..beta_d from boundary-matrix ranks."""
    if field not in ("Q", "GF2"):
        raise InvalidParameters(f"unknown field {field!r}")
    d = delta.dim
    counts = {k: len(delta.faces_of_dim(k)) for k in range(-1, d + 1)}
    ranks = {}
    for k in range(0, d + 1):
        mat = boundary_matrix(delta, k)
        if field == "Q":
            ranks[k] = rat_rank(mat, cols=counts[k]) if mat else 0
        else:
            bits = [[int(x % 2 != 0) for x in row] for row in mat]
            ranks[k] = gf2_rank(bits)
    ranks[d + 1] = 0
    betti_vals = tuple(
        counts[k] - ranks.get(k, 0) - ranks[k + 1] for k in range(-1, d + 1)
    )
    return BettiProfile(field=field, betti=betti_vals)


# -- recognition --------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    is_pure: bool
    is_strongly_connected: bool
    is_pseudomanifold: bool
    is_homology_manifold: bool
    is_homology_sphere: bool
    is_orientable_candidate: bool


def _is_strongly_connected(delta: SimplicialComplex) -> bool:
    facets = delta.facets
    if len(facets) <= 1:
        return True
    ridge_to_facets: dict[Face, list[int]] = {}
    for i, f in enumerate(facets):
        for ridge in combinations(f, len(f) - 1):
            ridge_to_facets.setdefault(ridge, []).append(i)
    adj: dict[int, set[int]] = {i: set() for i in range(len(facets))}
    for members in ridge_to_facets.values():
        for a in members:
            for b in members:
                if a != b:
                    adj[a].add(b)
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(facets)


def classify(delta: SimplicialComplex, field: str = "Q") -> Classification:
    """Pseudomanifold / homology manifold / homology sphere recognition.

    A pseudomanifold is pure and strongly connected with every ridge in
    exactly two facets; a homology manifold additionally has sphere-like
    links at every nonempty face; a homology sphere is a homology manifold
    whose own Betti profile is that of a d-sphere.  Orientability (over Q)
    of a pseudomanifold is detected by a top Betti number of 1.
    """
    d = delta.dim
    pure = all(len(f) == d + 1 for f in delta.facets)
    strongly = pure and _is_strongly_connected(delta)
    pseudo = strongly
    if pseudo:
        for ridge in delta.faces_of_dim(d - 1):
            if len(delta.cofacets(ridge)) != 2:
                pseudo = False
                break
    manifold = pseudo
    if manifold:
        for k in range(0, d + 1):
            for face in delta.faces_of_dim(k):
                lk = delta.link(face)
                if lk.dim != d - k - 1 or not betti(lk, field).is_sphere_profile(
                    lk.dim
                ):
                    manifold = False
                    break
            if not manifold:
                break
    sphere = manifold and betti(delta, field).is_sphere_profile(d)
    orientable = pseudo and betti(delta, "Q").beta(d) == 1
    return Classification(
        is_pure=pure,
        is_strongly_connected=strongly,
        is_pseudomanifold=pseudo,
        is_homology_manifold=manifold,
        is_homology_sphere=sphere,
        is_orientable_candidate=orientable,
    )


def h_double_prime(delta: SimplicialComplex, field: str = "Q") -> tuple[int, ...]:
    """The h''-vector: h corrected by interior Betti numbers.

    h'_j = h_j + C(d+1, j) * sum_{i<j} (-1)^(j-i-1) beta_{i-1} for j >= 1,
    h''_j = h'_j - C(d+1, j) beta_{j-1} for j <= d, and h''_{d+1} = h'_{d+1}.
    """
    d = delta.dim
    h = f_h_g_vectors(delta).h
    prof = betti(delta, field)
    h_prime = [1] + [
        h[j]
        + comb(d + 1, j)
        * sum((-1) ** (j - i - 1) * prof.beta(i - 1) for i in range(j))
        for j in range(1, d + 2)
    ]
    out = [
        h_prime[j] - comb(d + 1, j) * prof.beta(j - 1) if j <= d else h_prime[j]
        for j in range(d + 2)
    ]
    return tuple(out)
