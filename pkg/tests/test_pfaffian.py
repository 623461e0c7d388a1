"""
Tests for Pfaffians and inverse entries
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import sparse

from boundary_ising.errors import DimensionTooLarge, NotAntisymmetric, OddDimension, Singular
from boundary_ising.pfaffian import (
    AntisymmetricMatrix,
    SignedLogValue,
    grassmann_integral,
    inverse_entries,
    permutation_sign,
    pfaffian,
    pfaffian_exact,
)


def random_antisymmetric(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return a - a.T


def banded_antisymmetric(n, seed=1):
    rng = np.random.default_rng(seed)
    triplets = []
    for i in range(n - 1):
        triplets.append((i, i + 1, rng.uniform(0.5, 1.5)))
        if i + 3 < n:
            triplets.append((i, i + 3, rng.uniform(-0.5, 0.5)))
    return triplets


def test_pfaffian_2x2():
    """Test Pf of a 2 x 2 block is its upper entry"""
    value = pfaffian(AntisymmetricMatrix([[0.0, -2.5], [2.5, 0.0]]))

    assert value.sign == -1
    assert value.value == pytest.approx(-2.5)


def test_pfaffian_4x4_closed_form():
    """Test Pf = a01 a23 - a02 a13 + a03 a12"""
    a = random_antisymmetric(4, seed=3)
    expected = a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]

    assert pfaffian(AntisymmetricMatrix(a)).value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n", [6, 10, 20])
def test_pfaffian_squared_is_determinant(n):
    """Test Pf(A)^2 = det(A)"""
    a = random_antisymmetric(n, seed=n)
    value = pfaffian(AntisymmetricMatrix(a))
    sign, logdet = np.linalg.slogdet(a)

    assert sign == 1
    assert 2 * value.log_abs == pytest.approx(logdet, rel=1e-10)


def test_pfaffian_matches_exact_expansion():
    """Test floating point against rational expansion on an integer matrix"""
    rng = np.random.default_rng(7)
    upper = np.triu(rng.integers(-3, 4, size=(8, 8)), k=1)
    a = (upper - upper.T).astype(float)

    exact = pfaffian_exact(AntisymmetricMatrix(a))
    assert isinstance(exact, Fraction)
    assert pfaffian(AntisymmetricMatrix(a)).value == pytest.approx(float(exact), abs=1e-9)


def test_pfaffian_exact_dimension_limit():
    """Test the exact expansion refuses large matrices"""
    with pytest.raises(DimensionTooLarge):
        pfaffian_exact(AntisymmetricMatrix(random_antisymmetric(14)))


def test_odd_dimension():
    """Test odd dimension gives zero, or OddDimension when strict"""
    a = AntisymmetricMatrix(random_antisymmetric(5))

    assert pfaffian(a).is_zero
    with pytest.raises(OddDimension):
        pfaffian(a, strict=True)


def test_not_antisymmetric_rejected():
    """Test construction checks A = -A^T"""
    with pytest.raises(NotAntisymmetric):
        AntisymmetricMatrix([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NotAntisymmetric):
        AntisymmetricMatrix(np.zeros((2, 3)))


def test_zero_matrix_pfaffian():
    """Test the zero matrix has vanishing Pfaffian"""
    assert pfaffian(AntisymmetricMatrix(np.zeros((4, 4)))).is_zero


def test_empty_matrix_pfaffian():
    """Test Pf of the empty matrix is one"""
    value = pfaffian(AntisymmetricMatrix(np.zeros((0, 0))))

    assert value.sign == 1
    assert value.log_abs == 0.0


def test_sparse_frontal_matches_dense():
    """Test frontal elimination against Parlett-Reid on a banded matrix"""
    n = 300
    triplets = banded_antisymmetric(n)
    sparse_matrix = AntisymmetricMatrix.from_triplets(n, triplets, dense=False)
    dense_matrix = AntisymmetricMatrix.from_triplets(n, triplets, dense=True)

    assert sparse_matrix.is_sparse
    assert sparse_matrix.density < 0.05
    frontal = pfaffian(sparse_matrix, sparse_min_dim=16)
    reference = pfaffian(dense_matrix)

    assert frontal.sign == reference.sign
    assert frontal.log_abs == pytest.approx(reference.log_abs, rel=1e-10)


def test_from_triplets_accumulates():
    """Test repeated triplets add up and antisymmetry is filled in"""
    matrix = AntisymmetricMatrix.from_triplets(2, [(0, 1, 0.25), (0, 1, 0.5)])

    assert matrix.entry(0, 1) == pytest.approx(0.75)
    assert matrix.entry(1, 0) == pytest.approx(-0.75)
    assert matrix.triplets() == [(0, 1, 0.75)]


def test_grassmann_integral_sign():
    """Test the ordered measure contributes (-1)^(n/2)"""
    a = AntisymmetricMatrix([[0.0, 2.0], [-2.0, 0.0]])
    b = AntisymmetricMatrix(random_antisymmetric(4, seed=11))

    assert grassmann_integral(a).value == pytest.approx(-2.0)
    assert grassmann_integral(b).value == pytest.approx(pfaffian(b).value)


def test_inverse_entries():
    """Test selected inverse entries against a dense inverse"""
    a = random_antisymmetric(8, seed=5)
    inverse = np.linalg.inv(a)
    pairs = [(0, 1), (3, 7), (6, 2), (5, 5)]

    values = inverse_entries(AntisymmetricMatrix(a), pairs, workers=2)

    assert values == pytest.approx([inverse[i, j] for i, j in pairs], abs=1e-10)


def test_inverse_sparse_matches_dense():
    """Test the SuperLU path against the LAPACK path"""
    n = 40
    triplets = banded_antisymmetric(n, seed=2)
    pairs = [(0, 1), (10, 20), (39, 0)]

    sparse_values = inverse_entries(AntisymmetricMatrix.from_triplets(n, triplets, dense=False), pairs)
    dense_values = inverse_entries(AntisymmetricMatrix.from_triplets(n, triplets, dense=True), pairs)

    assert sparse_values == pytest.approx(dense_values, abs=1e-10)


def test_singular_inverse():
    """Test a singular matrix is rejected"""
    with pytest.raises(Singular):
        inverse_entries(AntisymmetricMatrix(np.zeros((4, 4))), [(0, 1)])


def test_permutation_sign():
    """Test permutation parity"""
    assert permutation_sign([0, 1, 2, 3]) == 1
    assert permutation_sign([1, 0, 2, 3]) == -1
    assert permutation_sign([1, 2, 0]) == 1
    assert permutation_sign([3, 2, 1, 0]) == 1


def test_signed_log_value():
    """Test sign and log arithmetic"""
    a = SignedLogValue.from_float(-4.0)
    b = SignedLogValue.from_float(0.5)

    assert (a * b).value == pytest.approx(-2.0)
    assert a.negate().sign == 1
    assert a.scale_log(math.log(2.0)).value == pytest.approx(-8.0)
    assert (a * SignedLogValue.zero()).is_zero
    assert SignedLogValue.zero().to_dict() == {"sign": 0, "log_abs": None}
