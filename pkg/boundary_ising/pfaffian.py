"""
Pfaffians of real antisymmetric matrices

Dense matrices use skew-symmetric tridiagonalisation with partial pivoting
(Parlett-Reid); large sparse matrices use a frontal block elimination built on
Pf([[B, C], [-C^T, D]]) = Pf(B) * Pf(D + C^T B^-1 C). Values are carried as
sign and log-magnitude so 4LM-dimensional actions never overflow.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import splu

from boundary_ising.errors import (
    DimensionTooLarge,
    NotAntisymmetric,
    OddDimension,
    Singular,
)
from boundary_ising.logger import get_logger

logger = get_logger(__name__)

ANTISYMMETRY_TOL = 1e-12
ZERO_PIVOT = 1e-14
LOG_UNDERFLOW = math.log(1e-300)
SPARSE_MIN_DIM = 1024
SPARSE_MAX_DENSITY = 0.05
EXACT_MAX_DIM = 12
FRONT_CHUNK = 128


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as sign in {-1, 0, +1} and natural log of |value|"""
    sign: int
    log_abs: float

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(0, float("-inf"))

    @classmethod
    def from_float(cls, value: float) -> "SignedLogValue":
        if value == 0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def value(self) -> float:
        """Plain float (may overflow to +-inf for very large magnitudes)"""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_abs + other.log_abs)

    def negate(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_abs)

    def scale_log(self, log_factor: float) -> "SignedLogValue":
        """Multiply by exp(log_factor)"""
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign, self.log_abs + log_factor)

    def to_dict(self) -> dict:
        return {"sign": self.sign, "log_abs": None if self.sign == 0 else self.log_abs}


class AntisymmetricMatrix:
    """
    Antisymmetric matrix with dense (numpy) or sparse (CSR) storage

    Construction checks A = -A^T to a relative tolerance.
    """

    def __init__(self, data, check: bool = True, tol: float = ANTISYMMETRY_TOL):
        if sparse.issparse(data):
            self._data = sparse.csr_matrix(data, dtype=float)
            self._data.eliminate_zeros()
        else:
            array = np.asarray(data)
            if array.dtype == object:
                self._data = array
            else:
                self._data = np.array(array, dtype=float)
        if self._data.ndim != 2 or self._data.shape[0] != self._data.shape[1]:
            raise NotAntisymmetric(
                "matrix must be square", {"shape": list(self._data.shape)}
            )
        if check:
            self._check_antisymmetric(tol)

    @classmethod
    def from_triplets(
        cls,
        n: int,
        triplets: Iterable[Tuple[int, int, float]],
        dense: Optional[bool] = None,
    ) -> "AntisymmetricMatrix":
        """
        Build from (i, j, a_ij) entries; a_ji = -a_ij is filled in and repeated
        entries accumulate.
        """
        rows, cols, vals = [], [], []
        for i, j, w in triplets:
            rows.extend((i, j))
            cols.extend((j, i))
            vals.extend((w, -w))
        coo = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)
        matrix = coo.tocsr()
        matrix.sum_duplicates()
        if dense is None:
            dense = n <= SPARSE_MIN_DIM
        return cls(matrix.toarray() if dense else matrix, check=False)

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self._data)

    @property
    def is_exact(self) -> bool:
        return not self.is_sparse and self._data.dtype == object

    @property
    def density(self) -> float:
        if self.n == 0:
            return 0.0
        nnz = self._data.nnz if self.is_sparse else int(np.count_nonzero(self._data))
        return nnz / float(self.n * self.n)

    @property
    def data(self):
        return self._data

    def to_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self._data.toarray()
        return np.array(self._data, dtype=float)

    def to_sparse(self) -> sparse.csr_matrix:
        if self.is_sparse:
            return self._data
        return sparse.csr_matrix(np.array(self._data, dtype=float))

    def triplets(self) -> List[Tuple[int, int, float]]:
        """Upper-triangle nonzeros as (i, j, a_ij), i < j, sorted"""
        upper = sparse.triu(self.to_sparse(), k=1).tocoo()
        entries = sorted(zip(upper.row.tolist(), upper.col.tolist(), upper.data.tolist()))
        return [(int(i), int(j), float(w)) for i, j, w in entries if w != 0.0]

    def entry(self, i: int, j: int) -> float:
        return float(self._data[i, j])

    def _check_antisymmetric(self, tol: float):
        if self.is_exact:
            for i in range(self.n):
                for j in range(i, self.n):
                    if self._data[i, j] != -self._data[j, i]:
                        raise NotAntisymmetric(
                            "exact matrix is not antisymmetric", {"i": i, "j": j}
                        )
            return
        if self.is_sparse:
            defect = abs(self._data + self._data.T)
            worst = defect.max() if defect.nnz else 0.0
            scale = abs(self._data).max() if self._data.nnz else 0.0
        else:
            worst = float(np.abs(self._data + self._data.T).max()) if self.n else 0.0
            scale = float(np.abs(self._data).max()) if self.n else 0.0
        if worst > tol * max(scale, 1e-300) and worst > 0.0:
            raise NotAntisymmetric(
                f"|A + A^T| = {worst:.3e} exceeds tolerance",
                {"defect": float(worst), "scale": float(scale)},
            )


def _parlett_reid(a: np.ndarray) -> SignedLogValue:
    """Pfaffian of a dense float matrix; `a` is overwritten"""
    n = a.shape[0]
    if n == 0:
        return SignedLogValue(1, 0.0)
    scale = float(np.abs(a).max())
    if scale == 0.0:
        return SignedLogValue.zero()

    sign = 1
    log_abs = 0.0
    for k in range(0, n - 1, 2):
        # Largest entry in A[k+1:, k], lowest index on ties
        column = np.abs(a[k + 1:, k])
        offset = int(column.argmax())
        if column[offset] <= ZERO_PIVOT * scale:
            return SignedLogValue.zero()
        kp = k + 1 + offset
        if kp != k + 1:
            a[[k + 1, kp], k:] = a[[kp, k + 1], k:]
            a[k:, [k + 1, kp]] = a[k:, [kp, k + 1]]
            sign = -sign

        pivot = a[k, k + 1]
        if pivot < 0:
            sign = -sign
        log_abs += math.log(abs(pivot))

        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)

    if log_abs < LOG_UNDERFLOW:
        return SignedLogValue.zero()
    return SignedLogValue(sign, log_abs)


def permutation_sign(order: Sequence[int]) -> int:
    """Sign of the permutation listing `order` (a rearrangement of 0..n-1)"""
    seen = np.zeros(len(order), dtype=bool)
    sign = 1
    for start in range(len(order)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _frontal_pfaffian(matrix: sparse.csr_matrix, chunk: int = FRONT_CHUNK) -> SignedLogValue:
    """
    Sparse Pfaffian by eliminating indices whose couplings are all inside the
    active front. Only the front is ever held densely.
    """
    n = matrix.shape[0]
    csr = matrix.tocsr()
    indptr, indices, values = csr.indptr, csr.indices, csr.data

    last = np.arange(n)
    for i in range(n):
        row = indices[indptr[i]:indptr[i + 1]]
        if row.size:
            last[i] = max(i, int(row.max()))

    position = np.full(n, -1, dtype=np.int64)
    front: List[int] = []
    block = np.zeros((0, 0))
    eliminated: List[int] = []
    sign = 1
    log_abs = 0.0

    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        new = list(range(start, stop))
        f_old = len(front)
        size = f_old + len(new)
        grown = np.zeros((size, size))
        grown[:f_old, :f_old] = block
        front.extend(new)
        for p, idx in enumerate(front[f_old:], start=f_old):
            position[idx] = p
        for p, idx in enumerate(new, start=f_old):
            cols = indices[indptr[idx]:indptr[idx + 1]]
            vals = values[indptr[idx]:indptr[idx + 1]]
            where = position[cols]
            mask = where >= 0
            grown[p, where[mask]] = vals[mask]
            grown[where[mask], p] = -vals[mask]
        block = grown

        final = stop == n
        done = [p for p, idx in enumerate(front) if last[idx] < stop]
        if len(done) % 2 == 1:
            done = done[:-1]
        if not done:
            continue

        pf_b = _parlett_reid(block[np.ix_(done, done)].copy())
        if pf_b.is_zero:
            if final:
                return SignedLogValue.zero()
            # Couplings among the finished set are degenerate; wait for more
            continue

        done_set = set(done)
        keep = [p for p in range(len(front)) if p not in done_set]
        coupling = block[np.ix_(done, keep)]
        schur = block[np.ix_(keep, keep)] + coupling.T @ linalg.solve(block[np.ix_(done, done)], coupling)
        schur = 0.5 * (schur - schur.T)

        sign *= pf_b.sign
        log_abs += pf_b.log_abs
        eliminated.extend(front[p] for p in done)
        for p in done:
            position[front[p]] = -1
        front = [front[p] for p in keep]
        for p, idx in enumerate(front):
            position[idx] = p
        block = schur

    if front:
        # Leftover odd index or deferred degenerate set
        rest = _parlett_reid(block.copy())
        if rest.is_zero:
            return SignedLogValue.zero()
        sign *= rest.sign
        log_abs += rest.log_abs
        eliminated.extend(front)

    sign *= permutation_sign(eliminated)
    if log_abs < LOG_UNDERFLOW:
        return SignedLogValue.zero()
    return SignedLogValue(sign, log_abs)


def pfaffian(
    matrix: AntisymmetricMatrix,
    strict: bool = False,
    sparse_min_dim: int = SPARSE_MIN_DIM,
) -> SignedLogValue:
    """
    Pfaffian as sign and log-magnitude

    Args:
        matrix: antisymmetric input
        strict: raise OddDimension instead of returning zero for odd n
        sparse_min_dim: dimension above which sparse inputs with density
            below 5% use frontal elimination

    Returns:
        SignedLogValue with sign 0 for an exactly vanishing Pfaffian
    """
    n = matrix.n
    if n % 2 == 1:
        if strict:
            raise OddDimension(f"Pfaffian of odd dimension {n} is zero", {"n": n})
        logger.warning(f"Pfaffian requested for odd dimension {n}; returning zero")
        return SignedLogValue.zero()

    if matrix.is_sparse and n > sparse_min_dim and matrix.density < SPARSE_MAX_DENSITY:
        logger.debug(f"Frontal sparse Pfaffian, n={n}, density={matrix.density:.2e}")
        return _frontal_pfaffian(matrix.to_sparse())
    return _parlett_reid(matrix.to_dense())


def pfaffian_exact(matrix: AntisymmetricMatrix) -> Fraction:
    """
    Exact rational Pfaffian by expansion along the first row

    Raises:
        DimensionTooLarge: n > 12
    """
    n = matrix.n
    if n > EXACT_MAX_DIM:
        raise DimensionTooLarge(
            f"exact Pfaffian limited to n <= {EXACT_MAX_DIM}, got {n}",
            {"n": n, "limit": EXACT_MAX_DIM},
        )
    if n % 2 == 1:
        return Fraction(0)
    entries = [[Fraction(matrix.data[i, j]) for j in range(n)] for i in range(n)]

    @lru_cache(maxsize=None)
    def expand(remaining: Tuple[int, ...]) -> Fraction:
        if not remaining:
            return Fraction(1)
        first = remaining[0]
        total = Fraction(0)
        for pos in range(1, len(remaining)):
            weight = entries[first][remaining[pos]]
            if weight == 0:
                continue
            rest = remaining[1:pos] + remaining[pos + 1:]
            term = weight * expand(rest)
            total += term if pos % 2 == 1 else -term
        return total

    return expand(tuple(range(n)))


def grassmann_integral(matrix: AntisymmetricMatrix) -> SignedLogValue:
    """
    Gaussian Grassmann integral of exp((1/2) psi^T A psi) with the measure
    ordered as d psi_n ... d psi_1, equal to (-1)^(n/2) Pf(A)
    """
    value = pfaffian(matrix)
    if (matrix.n // 2) % 2 == 1:
        return value.negate()
    return value


class InverseSolver:
    """
    Reusable LU factorisation for selected entries of A^-1

    Sparse matrices use SuperLU (splu); dense ones use LAPACK getrf.
    """

    def __init__(self, matrix: AntisymmetricMatrix, workers: int = 1):
        self.n = matrix.n
        self.workers = max(1, workers)
        self._sparse = matrix.is_sparse or self.n > 4096
        if self._sparse:
            try:
                self._lu = splu(matrix.to_sparse().tocsc())
            except RuntimeError as e:
                raise Singular(f"sparse factorisation failed: {e}", {"n": self.n})
            diagonal = np.abs(self._lu.U.diagonal())
        else:
            dense = matrix.to_dense()
            self._lu = linalg.lu_factor(dense, check_finite=False)
            diagonal = np.abs(np.diag(self._lu[0]))
        scale = float(diagonal.max()) if diagonal.size else 0.0
        if diagonal.size and float(diagonal.min()) <= ZERO_PIVOT * max(scale, 1e-300):
            raise Singular("matrix is singular to working precision", {"n": self.n})

    def solve_columns(self, columns: Sequence[int]) -> np.ndarray:
        """Columns of A^-1, one per requested index, shape (n, len(columns))"""
        rhs = np.zeros((self.n, len(columns)))
        rhs[list(columns), np.arange(len(columns))] = 1.0
        if self.workers == 1 or len(columns) < 2 * self.workers:
            return self._solve(rhs)
        parts = np.array_split(np.arange(len(columns)), self.workers)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            solved = list(pool.map(lambda idx: self._solve(rhs[:, idx]), parts))
        return np.hstack(solved)

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._sparse:
            return self._lu.solve(rhs)
        return linalg.lu_solve(self._lu, rhs, check_finite=False)

    def entries(self, pairs: Sequence[Tuple[int, int]]) -> List[float]:
        columns = sorted({j for _, j in pairs})
        solved = self.solve_columns(columns)
        where = {j: k for k, j in enumerate(columns)}
        return [float(solved[i, where[j]]) for i, j in pairs]


def inverse_entries(
    matrix: AntisymmetricMatrix,
    pairs: Sequence[Tuple[int, int]],
    workers: int = 1,
) -> List[float]:
    """
    Selected entries [A^-1]_{ij} via one factorisation and targeted solves

    Raises:
        Singular: A not invertible
    """
    return InverseSolver(matrix, workers=workers).entries(pairs)
