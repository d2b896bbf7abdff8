from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinc.clifford import exact_arithmetic
from spinc.exact import ExactMatrix, ExactScalar, nullspace, parse_scalar, rref, solve_exact

rat = st.fractions(min_value=-5, max_value=5, max_denominator=6)
scalars = st.builds(ExactScalar, rat, rat, rat, rat)
nonzero = scalars.filter(lambda x: not x.is_zero())


@given(scalars, scalars, scalars)
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


@given(nonzero)
def test_inverse(x):
    assert x * x.inv() == ExactScalar(1)
    assert exact_arithmetic(x, None, "inv") * x == ExactScalar(1)


@given(scalars, scalars)
def test_conjugation_is_a_field_automorphism(x, y):
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x + y).conj() == x.conj() + y.conj()
    assert (x * x.conj()).is_real()


@given(scalars)
def test_complex_embedding(x):
    assert abs(complex(x * x) - complex(x) ** 2) < 1e-9 * (1 + abs(complex(x)) ** 2)


@given(scalars)
def test_str_parse_round_trip(x):
    assert parse_scalar(str(x)) == x


def test_sqrt2_squares_to_two():
    r = ExactScalar(0, 0, 1)
    assert r * r == ExactScalar(2)
    assert ExactScalar(0, 1) ** 2 == ExactScalar(-1)


@pytest.mark.parametrize("text,value", [
    ("3/2", ExactScalar(Fraction(3, 2))),
    ("-i", ExactScalar(0, -1)),
    ("1/2*i", ExactScalar(0, Fraction(1, 2))),
    ("2+3i", ExactScalar(2, 3)),
    ("sqrt2/2", ExactScalar(0, 0, Fraction(1, 2))),
    ("i*sqrt2", ExactScalar(0, 0, 0, 1)),
    ("−3/2", ExactScalar(Fraction(-3, 2))),
])
def test_parse_literals(text, value):
    assert parse_scalar(text) == value


def test_zero_inverse_rejected():
    with pytest.raises(ZeroDivisionError):
        ExactScalar(0).inv()


def test_inexact_float_rejected():
    with pytest.raises(TypeError):
        ExactScalar.coerce(0.5)


small = st.integers(-3, 3)


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=5),
       st.lists(small, min_size=4, max_size=4))
def test_solve_exact_consistent_systems(A, x0):
    b = [sum(Fraction(a) * x for a, x in zip(row, x0)) for row in A]
    x, kernel = solve_exact(A, b)
    assert x is not None
    for row, bi in zip(A, b):
        assert sum(Fraction(a) * xi for a, xi in zip(row, x)) == bi
        for v in kernel:
            assert sum(Fraction(a) * vi for a, vi in zip(row, v)) == 0


@given(st.lists(st.lists(small, min_size=5, max_size=5), min_size=1, max_size=4))
def test_rank_nullity(A):
    R, piv = rref([list(r) for r in A])
    assert len(piv) + len(nullspace(A)) == 5


def test_inconsistent_system_has_no_solution():
    x, _ = solve_exact([[1, 1], [1, 1]], [0, 1])
    assert x is None


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), small), max_size=6))
def test_matrix_conj_transpose_is_involution(entries):
    M = ExactMatrix(3, 3, {(r, c): ExactScalar(v, v + 1) for r, c, v in entries})
    assert M.conj_transpose().conj_transpose() == M
    assert (M @ ExactMatrix.identity(3)) == M
