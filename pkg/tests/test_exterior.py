"""Exterior algebra: wedge, Hodge star, meet, permutation signs, m-vectors."""

import random
from fractions import Fraction
from itertools import combinations

import pytest

from stresslab.exterior import (
    DimensionMismatch,
    FaceNotNested,
    MultiVector,
    NotHomogeneous,
    NotSubset,
    all_index_tuples,
    apply_linear,
    gc_meet,
    hodge_star,
    hodge_star_inv,
    m_vector,
    sgn,
    wedge,
)

F = Fraction


def e(dim, *idx):
    return MultiVector.basis(dim, idx)


def xi(dim):
    return MultiVector.basis(dim, range(dim))


def random_homogeneous(rng, dim, r):
    terms = {}
    for k in all_index_tuples(dim, r):
        if rng.random() < 0.6:
            terms[k] = F(rng.randrange(-5, 6), rng.randrange(1, 4))
    return MultiVector(dim, terms)


# --- wedge -------------------------------------------------------------------


def test_wedge_nilpotent_on_vectors():
    a = e(3, 0)
    assert wedge(a, a).is_zero()
    v = MultiVector.vector([F(2), F(-1), F(3)])
    assert wedge(v, v).is_zero()


def test_wedge_antisymmetry_basis():
    assert wedge(e(3, 0), e(3, 1)) == -wedge(e(3, 1), e(3, 0))


def test_wedge_bilinear_expansion():
    a = e(3, 0) + e(3, 1)
    assert wedge(a, e(3, 1)) == wedge(e(3, 0), e(3, 1))


def test_wedge_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        wedge(e(3, 0), e(4, 0))


def test_wedge_associative_random():
    rng = random.Random(5)
    for _ in range(100):
        dim = rng.randrange(2, 6)
        a = random_homogeneous(rng, dim, rng.randrange(dim + 1))
        b = random_homogeneous(rng, dim, rng.randrange(dim + 1))
        c = random_homogeneous(rng, dim, rng.randrange(dim + 1))
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


# --- hodge star --------------------------------------------------------------


def test_star_of_e1_in_dim3():
    assert hodge_star(e(3, 0)) == e(3, 1, 2)


def test_star_of_scalar_is_volume_form():
    assert hodge_star(MultiVector.scalar(4, 1)) == xi(4)


def test_double_star_sign_dim4_grade2():
    a = e(4, 0, 1)
    assert hodge_star(hodge_star(a)) == a  # (-1)^(2*2) = +1


def test_star_rejects_mixed_grades():
    with pytest.raises(NotHomogeneous):
        hodge_star(MultiVector.scalar(3, 1) + e(3, 0))


@pytest.mark.parametrize("dim", range(2, 7))
def test_defining_identity_on_all_basis_pairs(dim):
    # alpha ^ star(beta) = <alpha, beta> xi characterizes the star uniquely
    vol = xi(dim)
    for r in range(dim + 1):
        for ka in all_index_tuples(dim, r):
            for kb in all_index_tuples(dim, r):
                a, b = MultiVector.basis(dim, ka), MultiVector.basis(dim, kb)
                assert wedge(a, hodge_star(b)) == vol * a.inner(b)


def test_defining_identity_random_pairs():
    rng = random.Random(11)
    count = 0
    for dim in range(2, 7):
        vol = xi(dim)
        for r in range(dim + 1):
            for _ in range(500 // (dim + 1)):
                a = random_homogeneous(rng, dim, r)
                b = random_homogeneous(rng, dim, r)
                assert wedge(a, hodge_star(b)) == vol * a.inner(b)
                count += 1
    assert count >= 500


@pytest.mark.parametrize("dim", range(2, 7))
def test_double_star_law_all_grades(dim):
    rng = random.Random(dim)
    for r in range(dim + 1):
        a = random_homogeneous(rng, dim, r)
        sign = (-1) ** (r * (dim - r))
        assert hodge_star(hodge_star(a)) == a * sign
        assert hodge_star_inv(hodge_star(a)) == a
        assert hodge_star(hodge_star_inv(a)) == a


# --- meet ---------------------------------------------------------------------


def test_meet_with_volume_form_is_identity():
    rng = random.Random(3)
    for dim in range(2, 6):
        for r in range(dim + 1):
            a = random_homogeneous(rng, dim, r)
            assert gc_meet(xi(dim), a) == a
            assert gc_meet(a, xi(dim)) == a


def test_meet_of_transverse_planes_is_common_line():
    # span{e0,e1} meet span{e0,e2} in dim 3 is the line through e0
    m = gc_meet(e(3, 0, 1), e(3, 0, 2))
    assert m.grades() == {1}
    assert set(m.terms) == {(0,)}


def test_meet_graded_commutativity():
    rng = random.Random(17)
    for _ in range(200):
        dim = rng.randrange(2, 6)
        r = rng.randrange(dim + 1)
        s = rng.randrange(dim + 1)
        a = random_homogeneous(rng, dim, r)
        b = random_homogeneous(rng, dim, s)
        sign = (-1) ** ((dim - r) * (dim - s))
        assert gc_meet(a, b) == gc_meet(b, a) * sign


# --- sgn ------------------------------------------------------------------------


def test_sgn_prefix_is_positive():
    assert sgn([1], [1, 2]) == 1


def test_sgn_single_transposition():
    assert sgn([2], [1, 2]) == -1


def test_sgn_empty_prefix():
    assert sgn([], [3, 1, 4]) == 1


def test_sgn_rejects_non_subset():
    with pytest.raises(NotSubset):
        sgn([5], [1, 2])


def test_sgn_concatenation_parity_random():
    rng = random.Random(23)
    for _ in range(100):
        u = list(range(rng.randrange(1, 7)))
        rng.shuffle(u)
        k = rng.randrange(len(u) + 1)
        uprime = rng.sample(u, k)
        concat = uprime + [x for x in u if x not in uprime]
        pos = [u.index(x) for x in concat]
        parity = sum(
            1 for i in range(len(pos)) for j in range(i + 1, len(pos)) if pos[i] > pos[j]
        )
        assert sgn(uprime, u) == (-1) ** parity


# --- m-vectors -------------------------------------------------------------------


def _simplex_nu(points):
    """nu(F) as the wedge of vertex vectors in increasing vertex order."""
    vecs = [MultiVector.vector(p) for p in points]
    dim = len(points[0])

    def nu(face):
        out = MultiVector.scalar(dim, 1)
        for v in face:
            out = wedge(out, vecs[v])
        return out

    return nu


def _random_points(rng, n, dim):
    # last homogeneous coordinate 1, generic rational positions
    return [
        [F(rng.randrange(-8, 9), rng.randrange(1, 4)) for _ in range(dim - 1)] + [F(1)]
        for _ in range(n)
    ]


def test_m_vector_of_equal_faces_is_scalar():
    rng = random.Random(31)
    nu = _simplex_nu(_random_points(rng, 4, 4))
    face = (0, 2, 3)
    m = m_vector(face, face, nu)
    assert m.grades() <= {0}
    assert not m.is_zero()


def test_m_vector_from_empty_face_is_nu():
    rng = random.Random(37)
    nu = _simplex_nu(_random_points(rng, 4, 4))
    face = (1, 3)
    assert m_vector((), face, nu) == nu(face)


def test_m_vector_grade_is_dimension_gap():
    rng = random.Random(41)
    nu = _simplex_nu(_random_points(rng, 5, 4))
    m = m_vector((1,), (1, 2, 4), nu)
    assert m.grades() <= {2}
    assert not m.is_zero()


def test_m_vector_rejects_non_nested():
    nu = _simplex_nu(_random_points(random.Random(2), 4, 3))
    with pytest.raises(FaceNotNested):
        m_vector((0,), (1, 2), nu)


def test_flag_identity_random_flags():
    # wedge of consecutive m-vectors along a saturated flag telescopes to the
    # endpoint m-vector, scaled by the squared norms of the intermediate
    # face multivectors; once each factor is divided by the norm of its
    # lower face the identity is exact with no leftover scalar
    rng = random.Random(53)
    checked = 0
    for _ in range(60):
        dim = rng.randrange(3, 6)
        n = dim + rng.randrange(0, 3)
        nu = _simplex_nu(_random_points(rng, n, dim))
        t = rng.randrange(1, dim)
        chain = rng.sample(range(n), t + rng.randrange(0, 2))
        if len(chain) <= t:
            continue
        flag = [tuple(sorted(chain[: k + 1])) for k in range(len(chain))]
        flag = flag[: t + 1]
        start = flag[0]
        prod = MultiVector.scalar(dim, 1)
        normalized = MultiVector.scalar(dim, 1)
        scale = Fraction(1)
        for a, b in zip(flag, flag[1:]):
            step = m_vector(a, b, nu)
            prod = wedge(prod, step)
            normalized = wedge(normalized, step * (1 / nu(a).inner(nu(a))))
        for mid in flag[1:-1]:
            scale *= nu(mid).inner(nu(mid))
        target = m_vector(start, flag[-1], nu)
        assert prod == target * scale
        norm_target = target * (1 / nu(start).inner(nu(start)))
        assert normalized == norm_target
        checked += 1
    assert checked >= 30


def test_apply_linear_on_vectors_is_matrix_product():
    m = [[1, 2, 0], [0, -1, 3]]
    v = MultiVector.vector((5, 7, -2))
    assert apply_linear(m, v) == MultiVector.vector((19, -13))


def test_apply_linear_functorial_on_wedges():
    rng = random.Random(11)
    for _ in range(40):
        src = rng.randrange(2, 5)
        dst = rng.randrange(2, 5)
        m = [[F(rng.randint(-5, 5)) for _ in range(src)] for _ in range(dst)]
        x = MultiVector.vector([F(rng.randint(-6, 6)) for _ in range(src)])
        y = MultiVector.vector([F(rng.randint(-6, 6)) for _ in range(src)])
        lhs = apply_linear(m, wedge(x, y))
        rhs = wedge(apply_linear(m, x), apply_linear(m, y))
        assert lhs == rhs


def test_apply_linear_top_grade_scales_by_determinant():
    # on the top exterior power a square map acts as its determinant
    m = [[2, 1, 0], [1, 3, 1], [0, 1, 1]]
    det = 2 * (3 - 1) - 1 * (1 - 0)
    top = e(3, 0, 1, 2) * F(4)
    assert apply_linear(m, top) == MultiVector.basis(3, (0, 1, 2)) * F(4 * det)


def test_apply_linear_preserves_scalars_and_kills_high_grades():
    m = [[1, 0, 0], [0, 1, 0]]
    s = MultiVector.scalar(3, F(9, 2))
    assert apply_linear(m, s) == MultiVector.scalar(2, F(9, 2))
    # grade 3 cannot survive in a 2-dimensional target
    assert apply_linear(m, e(3, 0, 1, 2)) == MultiVector(2)


def test_apply_linear_rejects_column_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_linear([[1, 2]], MultiVector.vector((1, 2, 3)))
