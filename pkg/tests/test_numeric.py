"""Exact arithmetic kernels: squarefree parts, QuadExt, rational linear algebra."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stresslab.numeric import (
    FactorizationIncomplete,
    QuadExt,
    gf2_rank,
    quad_mul,
    quad_rank,
    rat_det,
    rat_nullspace,
    rat_rank,
    rat_rref,
    rat_solve,
    squarefree_part,
)

F = Fraction


def mat(rows):
    return [[F(x) for x in row] for row in rows]


# --- squarefree_part -------------------------------------------------------


def test_squarefree_part_eight():
    # 8 = 2^2 * 2
    assert squarefree_part(8) == ((2,), F(2))


def test_squarefree_part_one():
    assert squarefree_part(1) == ((), F(1))


def test_squarefree_part_nine_halves():
    # 9/2 = (3/2)^2 * 2
    assert squarefree_part(F(9, 2)) == ((2,), F(3, 2))


def test_squarefree_part_rejects_nonpositive():
    with pytest.raises(ValueError):
        squarefree_part(0)
    with pytest.raises(ValueError):
        squarefree_part(F(-4))


def test_squarefree_part_large_prime_square_folds():
    p = 1_000_003  # prime just above the default bound would stall; use small bound
    assert squarefree_part(p * p, prime_bound=1000) == ((), F(p))


def test_squarefree_part_incomplete_raises():
    p, q = 1009, 1013
    with pytest.raises(FactorizationIncomplete):
        squarefree_part(p * q * q * q, prime_bound=100)


@settings(max_examples=200)
@given(st.integers(1, 10**9), st.integers(1, 10**6))
def test_squarefree_round_trip(num, den):
    q = F(num, den)
    kernel, cof = squarefree_part(q)
    prod = 1
    for p in kernel:
        prod *= p
    assert cof > 0
    assert cof * cof * prod == q
    assert len(set(kernel)) == len(kernel) == sum(1 for _ in kernel)
    assert tuple(sorted(kernel)) == kernel


# --- QuadExt ----------------------------------------------------------------


def test_quad_mul_kernel_cancellation():
    assert quad_mul(QuadExt.sqrt_of(2), QuadExt.sqrt_of(8)) == QuadExt.from_rational(4)


def test_quad_mul_kernel_merge():
    assert quad_mul(QuadExt.sqrt_of(2), QuadExt.sqrt_of(3)) == QuadExt.sqrt_of(6)


def test_quad_mul_zero():
    x = QuadExt.sqrt_of(5) + 3
    assert quad_mul(x, QuadExt()).is_zero()


def test_quad_one_is_identity():
    x = QuadExt.sqrt_of(7) - QuadExt.sqrt_of(3) / 2 + F(5, 3)
    assert quad_mul(x, QuadExt.from_rational(1)) == x


def test_quad_inverse_round_trip():
    x = QuadExt.sqrt_of(2) + QuadExt.sqrt_of(3) - F(1, 2)
    assert x * x.inverse() == 1
    assert (1 / x) * x == 1


def test_quad_zero_iff_no_terms():
    x = QuadExt.sqrt_of(8) - 2 * QuadExt.sqrt_of(2)
    assert x.is_zero() and x == 0


_PRIMES_BELOW_50 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def _random_quad(rng):
    terms = {}
    for _ in range(rng.randrange(4)):
        kernel = tuple(sorted(rng.sample(_PRIMES_BELOW_50, rng.randrange(3))))
        terms[kernel] = F(rng.randrange(-9, 10), rng.randrange(1, 7))
    return QuadExt(terms)


def test_quad_ring_distributivity_1000_triples():
    rng = random.Random(20240817)
    for _ in range(1000):
        a, b, c = (_random_quad(rng) for _ in range(3))
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)


def test_quad_zero_test_agrees_with_60_digit_floats():
    rng = random.Random(99)
    for _ in range(300):
        x = _random_quad(rng)
        val = abs(x.to_mpf(60))
        if x.is_zero():
            assert val < 1e-45
        else:
            assert val > 1e-30


# --- rational linear algebra -------------------------------------------------


def test_rref_identity():
    ident = mat([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert rat_rref(ident) == (ident, [0, 1, 2])


def test_rref_rank_one():
    assert rat_rref(mat([[1, 2], [2, 4]])) == (mat([[1, 2], [0, 0]]), [0])


def test_rref_zero_matrix():
    z = mat([[0, 0, 0], [0, 0, 0]])
    assert rat_rref(z) == (z, [])


def test_nullspace_identity_trivial():
    assert rat_nullspace(mat([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == []


def test_nullspace_line():
    assert rat_nullspace(mat([[1, 1]])) == [[F(-1), F(1)]]


def test_nullspace_zero_row():
    assert rat_nullspace(mat([[0, 0]])) == [[F(1), F(0)], [F(0), F(1)]]


def test_nullspace_empty_matrix_needs_cols():
    assert rat_nullspace([], cols=2) == [[F(1), F(0)], [F(0), F(1)]]
    with pytest.raises(ValueError):
        rat_nullspace([])


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(-6, 6).map(F), min_size=4, max_size=4),
        min_size=1,
        max_size=5,
    )
)
def test_rank_properties(rows):
    cols = 4
    transpose = [[rows[i][j] for i in range(len(rows))] for j in range(cols)]
    rank = rat_rank(rows)
    assert rank == rat_rank(transpose)
    _, pivots = rat_rref(rows)
    assert rank == len(pivots)
    assert len(pivots) + len(rat_nullspace(rows)) == cols
    for vec in rat_nullspace(rows):
        assert all(sum(r * v for r, v in zip(row, vec)) == 0 for row in rows)


def test_det_and_solve():
    a = mat([[2, 1], [1, 3]])
    assert rat_det(a) == 5
    x = rat_solve(a, [F(1), F(2)])
    assert x == [F(1, 5), F(3, 5)]
    with pytest.raises(ValueError):
        rat_solve(mat([[1, 2], [2, 4]]), [F(1), F(1)])


def test_quad_rank_diagonal():
    m = [[QuadExt.sqrt_of(2), QuadExt()], [QuadExt(), QuadExt.sqrt_of(3)]]
    assert quad_rank(m) == 2


def test_quad_rank_repeated_column():
    assert quad_rank([[QuadExt.sqrt_of(2), QuadExt.sqrt_of(2)]]) == 1


def test_quad_rank_proportional_rows():
    assert quad_rank([[QuadExt.sqrt_of(2)], [QuadExt.sqrt_of(8)]]) == 1


def test_quad_rank_matches_rational_rank_on_rational_input():
    rng = random.Random(7)
    for _ in range(20):
        rows = [[F(rng.randrange(-4, 5)) for _ in range(4)] for _ in range(3)]
        qrows = [[QuadExt.from_rational(x) for x in row] for row in rows]
        assert quad_rank(qrows) == rat_rank(rows)


def test_gf2_rank_dependent_triple():
    assert gf2_rank([[1, 0, 1], [0, 1, 1], [1, 1, 0]]) == 2


def test_gf2_rank_empty():
    assert gf2_rank([]) == 0


def test_gf2_rank_single():
    assert gf2_rank([[1, 0, 0]]) == 1


def test_gf2_rank_mod_two_not_rational():
    # over Q these three rows have rank 3, over GF(2) row3 = row1 + row2
    assert gf2_rank([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) == 2
    assert rat_rank(mat([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 3
