"""
Grassmann action matrices and partition functions

The reduced action keeps the four fields (Hbar, H, Vbar, V) of every site after
integrating out the (Tbar, T) pair. For the cylinder

    Z = (-1)^(LM) C Pf(A^(-tau))

and with one lower-upper auxiliary edge the spin partition function is a signed
half-sum over the four sector matrices A^(alpha tau, alpha').
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from boundary_ising.errors import MultipleCrossings, Singular
from boundary_ising.lattice import (
    AuxPair,
    BoundaryCondition,
    BoundarySite,
    Kind,
    LatticeSpec,
    Side,
    oriented_edges,
    validate_aux_pairs,
)
from boundary_ising.logger import get_logger
from boundary_ising.pfaffian import AntisymmetricMatrix, SignedLogValue, pfaffian

logger = get_logger(__name__)

# Per-site couplings of the reduced action, (kind, kind, entry)
SITE_ENTRIES: Tuple[Tuple[Kind, Kind, float], ...] = (
    (Kind.HBAR, Kind.H, 1.0),
    (Kind.VBAR, Kind.V, 1.0),
    (Kind.HBAR, Kind.VBAR, -1.0),
    (Kind.HBAR, Kind.V, -1.0),
    (Kind.H, Kind.VBAR, 1.0),
    (Kind.H, Kind.V, -1.0),
)

# Half-sum coefficients c_{alpha, alpha'}
SECTOR_COEFFICIENTS: Dict[Tuple[int, int], int] = {
    (1, 1): -1,
    (1, -1): 1,
    (-1, 1): 1,
    (-1, -1): 1,
}

DERIVATIVE_STEP = 1e-4


@dataclass(frozen=True)
class PrefactorLog:
    """(-1)^(LM) C_beta stored as parity sign and log C_beta"""
    log_value: float
    parity_sign: int


@dataclass(frozen=True)
class ActionMatrix:
    matrix: AntisymmetricMatrix
    spec: LatticeSpec
    grassmann_bc: BoundaryCondition
    aux_terms: Tuple[Tuple[AuxPair, float, int], ...]
    crossing_sign: int = -1
    reduced: bool = True

    @property
    def n(self) -> int:
        return self.matrix.n


def reduced_index(spec: LatticeSpec, column: int, row: int, kind: Kind) -> int:
    """Flat index of a field of the reduced action (kinds Hbar, H, Vbar, V)"""
    return ((column % spec.L) * spec.M + row) * 4 + int(kind)


def site_index(spec: LatticeSpec, site: BoundarySite) -> int:
    """Reduced index of the V (lower) or Vbar (upper) field of a boundary site"""
    return reduced_index(spec, site.column, site.row(spec.M), site.kind)


def prefactor(spec: LatticeSpec, aux_pairs: Sequence[AuxPair] = ()) -> PrefactorLog:
    """log of C = (2 cosh K1)^(LM) (cosh K2)^(L(M-1)) prod cosh K~"""
    L, M = spec.L, spec.M
    log_c = L * M * (math.log(2.0) + math.log(math.cosh(spec.K1)))
    log_c += L * (M - 1) * math.log(math.cosh(spec.K2))
    for pair in aux_pairs:
        log_c += math.log(math.cosh(math.atanh(pair.weight)))
    return PrefactorLog(log_c, -1 if (L * M) % 2 else 1)


def _aux_triplets(
    spec: LatticeSpec, pairs: Sequence[AuxPair], crossing_sign: int
) -> List[Tuple[Tuple[AuxPair, float, int], Tuple[int, int, float]]]:
    terms = []
    for pair in pairs:
        if pair.is_crossing:
            low, up = pair.lower_upper()
            i, j = site_index(spec, low), site_index(spec, up)
            entry = -crossing_sign * pair.weight
        else:
            a, b = sorted((pair.first.column, pair.second.column))
            side = pair.first.side
            if side is Side.LOWER:
                i = site_index(spec, BoundarySite(b, side))
                j = site_index(spec, BoundarySite(a, side))
            else:
                i = site_index(spec, BoundarySite(a, side))
                j = site_index(spec, BoundarySite(b, side))
            entry = pair.weight
        sign = 1 if entry >= 0 else -1
        terms.append(((pair, pair.weight, sign), (i, j, entry)))
    return terms


def assemble_action(
    spec: LatticeSpec,
    grassmann_bc: Optional[BoundaryCondition] = None,
    aux_pairs: Sequence[AuxPair] = (),
    crossing_sign: int = -1,
    dense: Optional[bool] = None,
) -> ActionMatrix:
    """
    Reduced 4LM action matrix

    Args:
        spec: lattice spec
        grassmann_bc: horizontal Grassmann condition (default: opposite of spec.tau)
        aux_pairs: auxiliary couplings (validated as in the lattice module)
        crossing_sign: alpha' of the lower-upper term, entry -alpha' t~ on (V, Vbar)
        dense: force dense or sparse storage (default by size)
    """
    bc = grassmann_bc or spec.grassmann_bc
    pairs = validate_aux_pairs(spec, aux_pairs)
    L, M = spec.L, spec.M
    triplets: List[Tuple[int, int, float]] = []

    for x in range(L):
        for y in range(M):
            for a, b, entry in SITE_ENTRIES:
                triplets.append((reduced_index(spec, x, y, a), reduced_index(spec, x, y, b), entry))
            weight = spec.t1 * (bc.sign if x == L - 1 else 1)
            triplets.append((
                reduced_index(spec, x, y, Kind.HBAR),
                reduced_index(spec, x + 1, y, Kind.H),
                weight,
            ))
            if y < M - 1:
                triplets.append((
                    reduced_index(spec, x, y, Kind.VBAR),
                    reduced_index(spec, x, y + 1, Kind.V),
                    spec.t2,
                ))

    aux = _aux_triplets(spec, pairs, crossing_sign)
    triplets.extend(t for _, t in aux)
    matrix = AntisymmetricMatrix.from_triplets(4 * L * M, triplets, dense=dense)
    logger.debug(f"Assembled reduced action n={matrix.n} bc={bc.value} aux={len(pairs)}")
    return ActionMatrix(
        matrix=matrix,
        spec=spec,
        grassmann_bc=bc,
        aux_terms=tuple(term for term, _ in aux),
        crossing_sign=crossing_sign,
        reduced=True,
    )


def decorated_action(
    spec: LatticeSpec,
    grassmann_bc: Optional[BoundaryCondition] = None,
    aux_pairs: Sequence[AuxPair] = (),
    crossing_sign: int = -1,
) -> ActionMatrix:
    """6LM Kasteleyn matrix of the oriented Fisher graph, A[tail, head] = weight"""
    bc = grassmann_bc or spec.grassmann_bc
    pairs = validate_aux_pairs(spec, aux_pairs)
    edges = oriented_edges(spec, pairs, bc, crossing_sign)
    matrix = AntisymmetricMatrix.from_triplets(
        6 * spec.n_sites, ((e.u, e.v, e.sign * e.weight) for e in edges)
    )
    return ActionMatrix(
        matrix=matrix,
        spec=spec,
        grassmann_bc=bc,
        aux_terms=tuple((p, p.weight, 1) for p in pairs),
        crossing_sign=crossing_sign,
        reduced=False,
    )


def _with_prefactor(pf: SignedLogValue, pre: PrefactorLog) -> SignedLogValue:
    if pf.is_zero:
        return pf
    return SignedLogValue(pf.sign * pre.parity_sign, pf.log_abs + pre.log_value)


def partition_function(
    spec: LatticeSpec,
    aux_pairs: Sequence[AuxPair] = (),
    workers: int = 1,
) -> SignedLogValue:
    """
    Spin partition function as sign and log|Z|

    Same-side auxiliary couplings stay on the cylinder formula; a lower-upper
    coupling switches to the four-sector half-sum.

    Raises:
        Singular: the Pfaffian vanishes
    """
    pairs = validate_aux_pairs(spec, aux_pairs)
    if any(p.is_crossing for p in pairs):
        return torus_partition_function(spec, pairs, workers=workers)

    action = assemble_action(spec, aux_pairs=pairs)
    pf = pfaffian(action.matrix)
    if pf.is_zero:
        raise Singular(
            "Pfaffian of the cylinder action vanishes",
            {"L": spec.L, "M": spec.M, "tau": spec.tau.value},
        )
    value = _with_prefactor(pf, prefactor(spec, pairs))
    logger.info(f"Partition function L={spec.L} M={spec.M} tau={spec.tau.value}: log Z={value.log_abs:.12g}")
    return value


def torus_partition_pfaffians(
    spec: LatticeSpec,
    aux_pairs: Sequence[AuxPair],
    workers: int = 1,
) -> Dict[Tuple[int, int], SignedLogValue]:
    """
    Pf A^(alpha tau, alpha') for alpha, alpha' in {+1, -1}

    The Grassmann boundary sign of sector alpha is alpha * tau.sign.

    Raises:
        MultipleCrossings: more than one lower-upper pair
    """
    pairs = validate_aux_pairs(spec, aux_pairs)
    crossings = sum(1 for p in pairs if p.is_crossing)
    if crossings > 1:
        raise MultipleCrossings(f"at most one crossing pair, got {crossings}")

    sectors = list(SECTOR_COEFFICIENTS)

    def sector_pfaffian(key: Tuple[int, int]) -> SignedLogValue:
        alpha, alpha_prime = key
        bc = BoundaryCondition.from_sign(alpha * spec.tau.sign)
        action = assemble_action(spec, bc, pairs, crossing_sign=alpha_prime)
        value = pfaffian(action.matrix)
        logger.debug(f"Sector {key}: sign={value.sign} log|Pf|={value.log_abs}")
        return value

    with ThreadPoolExecutor(max_workers=max(1, min(workers, 4))) as pool:
        values = list(pool.map(sector_pfaffian, sectors))
    return dict(zip(sectors, values))


def combine_sectors(pfaffians: Dict[Tuple[int, int], SignedLogValue]) -> SignedLogValue:
    """Signed half-sum sum c_{alpha alpha'} / 2 Pf A^(alpha tau, alpha')"""
    logs, signs = [], []
    for key in sorted(pfaffians):
        value = pfaffians[key]
        if value.is_zero:
            continue
        logs.append(value.log_abs - math.log(2.0))
        signs.append(SECTOR_COEFFICIENTS[key] * value.sign)
    if not logs:
        return SignedLogValue.zero()
    log_abs, sign = logsumexp(np.array(logs), b=np.array(signs, dtype=float), return_sign=True)
    if sign == 0 or not np.isfinite(log_abs):
        return SignedLogValue.zero()
    return SignedLogValue(int(sign), float(log_abs))


def torus_partition_function(
    spec: LatticeSpec,
    aux_pairs: Sequence[AuxPair],
    workers: int = 1,
) -> SignedLogValue:
    """Spin partition function with a lower-upper auxiliary coupling"""
    pairs = validate_aux_pairs(spec, aux_pairs)
    half_sum = combine_sectors(torus_partition_pfaffians(spec, pairs, workers=workers))
    if half_sum.is_zero:
        raise Singular("four-sector combination vanishes", {"L": spec.L, "M": spec.M})
    return _with_prefactor(half_sum, prefactor(spec, pairs))


def partition_ratio(spec: LatticeSpec) -> float:
    """Z^(-tau) / Z^(tau) from the two cylinder partition functions"""
    own = partition_function(spec)
    other = partition_function(spec.with_tau(spec.tau.opposite()))
    return math.exp(other.log_abs - own.log_abs)


def generating_derivative(
    spec: LatticeSpec,
    first: BoundarySite,
    second: BoundarySite,
    step: float = DERIVATIVE_STEP,
    workers: int = 1,
) -> float:
    """
    Central difference of log Z in the weight of one auxiliary edge at zero

    Equals <sigma_first sigma_second> up to O(step^2).
    """
    def log_z(weight: float) -> float:
        return partition_function(spec, [AuxPair(first, second, weight)], workers=workers).log_abs

    return (log_z(step) - log_z(-step)) / (2.0 * step)
