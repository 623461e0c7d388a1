"""
Boundary spin correlations at lambda = 0

Spin products on the boundary are Grassmann expectations of the V (lower) and
Vbar (upper) fields, so every correlation is the Pfaffian of a minor of the
covariance G = -A^-1 taken in cyclic order.
"""
from enum import Enum
from itertools import combinations
from threading import Lock
from typing import Dict, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from boundary_ising.errors import InvalidTuple, MissingInput
from boundary_ising.kasteleyn import assemble_action, partition_ratio, site_index
from boundary_ising.lattice import BoundaryCondition, BoundarySite, BoundaryTuple, LatticeSpec
from boundary_ising.logger import get_logger
from boundary_ising.pfaffian import AntisymmetricMatrix, InverseSolver, permutation_sign, pfaffian

logger = get_logger(__name__)


class CorrelationMethod(str, Enum):
    PFAFFIAN_MINOR = "pfaffian_minor"
    WICK_PAIRING = "wick_pairing"
    ORACLE = "oracle"


class CorrelationResult(BaseModel):
    """One boundary correlation"""
    sites: List[str] = Field(..., description="Boundary sites as side:column")
    value: float = Field(..., description="<sigma ... sigma>")
    method: CorrelationMethod
    residual: Optional[float] = Field(None, description="Factorization residual when requested")


def small_pfaffian(matrix: np.ndarray) -> float:
    """Pfaffian of an m x m antisymmetric array as a float"""
    m = matrix.shape[0]
    if m == 0:
        return 1.0
    if m == 2:
        return float(matrix[0, 1])
    return pfaffian(AntisymmetricMatrix(matrix, check=False)).value


class BoundaryCorrelator:
    """
    Correlations on one lattice, reusing one factorisation per Grassmann sector
    """

    def __init__(self, spec: LatticeSpec, workers: int = 1):
        self.spec = spec
        self.workers = workers
        self._solvers: Dict[BoundaryCondition, InverseSolver] = {}
        self._ratio: Optional[float] = None
        self._lock = Lock()

    def solver(self, bc: BoundaryCondition) -> InverseSolver:
        with self._lock:
            if bc not in self._solvers:
                action = assemble_action(self.spec, bc)
                logger.info(f"Factorising action n={action.n} bc={bc.value}")
                self._solvers[bc] = InverseSolver(action.matrix, workers=self.workers)
            return self._solvers[bc]

    @property
    def ratio(self) -> float:
        """Z^(-tau) / Z^(tau)"""
        if self._ratio is None:
            self._ratio = partition_ratio(self.spec)
        return self._ratio

    def covariance(self, sites: Sequence[BoundarySite], bc: BoundaryCondition) -> np.ndarray:
        """G_ij = -[A^-1] between the fields of `sites`, in the given order"""
        indices = [site_index(self.spec, s) for s in sites]
        columns = self.solver(bc).solve_columns(indices)
        block = -columns[indices, :]
        return 0.5 * (block - block.T)

    def correlation(self, sites: BoundaryTuple) -> CorrelationResult:
        """
        <sigma_y1 ... sigma_ym> for boundary sites

        Even counts on each boundary use the sector opposite to tau; odd counts
        use the tau sector times Z^(-tau)/Z^(tau).
        """
        checked = sites.validated(self.spec)
        labels = [str(s) for s in checked.sites]
        if checked.m % 2 == 1:
            return CorrelationResult(sites=labels, value=0.0, method=CorrelationMethod.PFAFFIAN_MINOR)
        ordered = checked.canonical()
        if ordered.m == 0:
            return CorrelationResult(sites=labels, value=1.0, method=CorrelationMethod.PFAFFIAN_MINOR)

        if ordered.n_lower % 2 == 0:
            value = small_pfaffian(self.covariance(ordered.sites, self.spec.grassmann_bc))
        else:
            value = self.ratio * small_pfaffian(self.covariance(ordered.sites, self.spec.tau))
        return CorrelationResult(sites=labels, value=value, method=CorrelationMethod.PFAFFIAN_MINOR)

    def two_point(self, first: BoundarySite, second: BoundarySite) -> float:
        return self.correlation(BoundaryTuple((first, second))).value

    def pair_matrix(self, sites: BoundaryTuple) -> np.ndarray:
        """[M]_ij = <sigma_yi sigma_yj> for i < j, antisymmetrised, canonical order"""
        ordered = sites.validated(self.spec).canonical().sites
        m = len(ordered)
        matrix = np.zeros((m, m))
        for i, j in combinations(range(m), 2):
            matrix[i, j] = self.two_point(ordered[i], ordered[j])
            matrix[j, i] = -matrix[i, j]
        return matrix


def boundary_correlation(spec: LatticeSpec, sites: BoundaryTuple, workers: int = 1) -> CorrelationResult:
    """Single correlation; see BoundaryCorrelator.correlation"""
    return BoundaryCorrelator(spec, workers=workers).correlation(sites)


def pfaffian_factorization_residual(
    spec: LatticeSpec,
    sites: BoundaryTuple,
    correlator: Optional[BoundaryCorrelator] = None,
) -> float:
    """
    |<sigma ... sigma> - Pf(M)| with M built from two-point functions

    Raises:
        InvalidTuple: upper-boundary sites or odd m
    """
    if sites.n_upper:
        raise InvalidTuple("factorization residual requires lower-boundary sites only")
    if sites.m % 2 or sites.m < 2:
        raise InvalidTuple(f"factorization residual requires even m >= 2, got {sites.m}")
    correlator = correlator or BoundaryCorrelator(spec)
    full = correlator.correlation(sites).value
    paired = small_pfaffian(correlator.pair_matrix(sites))
    residual = abs(full - paired)
    logger.debug(f"Factorization residual m={sites.m}: {residual:.3e}")
    return residual


def even_partitions(items: Tuple[int, ...]) -> Iterator[List[Tuple[int, ...]]]:
    """Set partitions into even blocks, blocks ordered by their first element"""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for size in range(1, len(rest) + 1, 2):
        for partners in combinations(rest, size):
            block = (first,) + partners
            remaining = tuple(i for i in rest if i not in partners)
            for tail in even_partitions(remaining):
                yield [block] + tail


def partition_sign(blocks: Sequence[Tuple[int, ...]]) -> int:
    """Sign of the permutation listing the blocks one after another"""
    order = [i for block in blocks for i in block]
    return permutation_sign(order)


def _lookup(table: Mapping[Tuple, float], key: Tuple, what: str) -> float:
    if key not in table:
        raise MissingInput(f"{what} correlation missing for {key}", {"key": [str(k) for k in key]})
    return table[key]


def truncated_correlations(simple: Mapping[Tuple[Hashable, ...], float], m: int) -> Dict[Tuple, float]:
    """
    Fermionic truncation of every even key of length <= m

    T(S) = <S> - sum over partitions P into at least two even blocks of
    s(P) prod_B T(B)

    Raises:
        MissingInput: a sub-tuple needed by the recursion is absent
    """
    truncated: Dict[Tuple, float] = {}

    def compute(key: Tuple) -> float:
        if key in truncated:
            return truncated[key]
        value = _lookup(simple, key, "simple")
        for blocks in even_partitions(tuple(range(len(key)))):
            if len(blocks) < 2:
                continue
            product = 1.0
            for block in blocks:
                product *= compute(tuple(key[i] for i in block))
            value -= partition_sign(blocks) * product
        truncated[key] = value
        return value

    for key in simple:
        if len(key) % 2 == 0 and 0 < len(key) <= m:
            compute(key)
    return truncated


def simple_from_truncated(truncated: Mapping[Tuple[Hashable, ...], float], m: int) -> Dict[Tuple, float]:
    """Inverse of truncated_correlations: <S> = sum over all even partitions of s(P) prod T(B)"""
    simple: Dict[Tuple, float] = {}
    for key in truncated:
        if len(key) % 2 or not 0 < len(key) <= m:
            continue
        total = 0.0
        for blocks in even_partitions(tuple(range(len(key)))):
            product = 1.0
            for block in blocks:
                product *= _lookup(truncated, tuple(key[i] for i in block), "truncated")
            total += partition_sign(blocks) * product
        simple[key] = total
    return simple
