"""
Brute-force Gibbs sums for small cylinders

Exhaustive enumeration covers L*M <= 24 spins; the row transfer matrix covers
L <= 12 at any height for nearest-row couplings, and L <= 7 when the interaction
spans three rows and the state holds two rows. Both accept the even interaction lambda * sum V(X) prod sigma
and auxiliary boundary couplings, and both work in log space.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.special import logsumexp

from boundary_ising.errors import RangeTooLarge, TooLarge
from boundary_ising.lattice import AuxPair, BoundaryTuple, LatticeSpec
from boundary_ising.logger import get_logger
from boundary_ising.pfaffian import SignedLogValue

logger = get_logger(__name__)

MAX_ENUM_SITES = 24
MAX_TRANSFER_L = 12
MAX_TWO_ROW_L = 7
LOW_BITS = 16
ODD_TOLERANCE = 1e-9


class InteractionTerm(BaseModel):
    """Offsets X (relative to an anchor site) and coefficient V(X)"""
    offsets: List[Tuple[int, int]] = Field(..., description="(dx, dy) offsets")
    coefficient: float = 1.0

    @field_validator("offsets")
    @classmethod
    def validate_offsets(cls, v: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        if len(set(v)) != len(v):
            raise ValueError("offsets must be distinct")
        if len(v) % 2 == 1:
            raise ValueError("interaction sets must have even cardinality")
        return v


class InteractionSpec(BaseModel):
    """lambda sum_z sum_X V(X) prod_{x in X} sigma_{z+x}"""
    lam: float = Field(0.0, description="Interaction strength lambda")
    terms: List[InteractionTerm] = Field(default_factory=list)
    r_max: int = Field(2, ge=0, description="Largest allowed offset component")

    @field_validator("terms")
    @classmethod
    def validate_range(cls, v: List[InteractionTerm], info) -> List[InteractionTerm]:
        r_max = info.data.get("r_max", 2)
        for term in v:
            if any(max(abs(dx), abs(dy)) > r_max for dx, dy in term.offsets):
                raise ValueError(f"interaction offset beyond range {r_max}")
        return v

    @classmethod
    def none(cls) -> "InteractionSpec":
        return cls(lam=0.0, terms=[])

    @classmethod
    def vertical_next_nearest(cls, lam: float) -> "InteractionSpec":
        """V(X) = 1 for X = {z - e2, z + e2}"""
        return cls(lam=lam, terms=[InteractionTerm(offsets=[(0, -1), (0, 1)])])

    @property
    def vertical_span(self) -> int:
        spans = [max(dy for _, dy in t.offsets) - min(dy for _, dy in t.offsets)
                 for t in self.terms if t.offsets]
        return max(spans, default=0)


@dataclass(frozen=True)
class Contribution:
    """coefficient * prod of spins at (column, row) sites, in the exponent -beta H"""
    coefficient: float
    sites: Tuple[Tuple[int, int], ...]

    @property
    def top_row(self) -> int:
        return max(row for _, row in self.sites)

    @property
    def bottom_row(self) -> int:
        return min(row for _, row in self.sites)


def contributions(
    spec: LatticeSpec,
    inter: InteractionSpec,
    beta: float,
    aux_pairs: Sequence[AuxPair] = (),
) -> List[Contribution]:
    """
    Every term of -beta H

    Horizontal bonds through the seam carry the spin boundary sign; interaction
    placements leaving the rows are dropped and placements wrapping
    horizontally pick up one boundary sign per wrapped site.
    """
    L, M = spec.L, spec.M
    k1 = beta
    k2 = beta * spec.J2
    tau = spec.tau.sign
    terms: List[Contribution] = []

    for x in range(L):
        for y in range(M):
            seam = tau if x == L - 1 else 1
            terms.append(Contribution(k1 * seam, ((x, y), ((x + 1) % L, y))))
            if y < M - 1:
                terms.append(Contribution(k2, ((x, y), (x, y + 1))))

    scale = beta / spec.beta
    for pair in aux_pairs:
        weight = scale * math.atanh(pair.weight)
        first = (pair.first.column % L, pair.first.row(M))
        second = (pair.second.column % L, pair.second.row(M))
        terms.append(Contribution(weight, (first, second)))

    if inter.lam != 0.0:
        for term in inter.terms:
            weight = beta * inter.lam * term.coefficient
            for x in range(L):
                for y in range(M):
                    sites, sign = [], 1
                    for dx, dy in term.offsets:
                        row = y + dy
                        if not 0 <= row < M:
                            break
                        column = x + dx
                        if column >= L or column < 0:
                            sign *= tau ** abs(column // L)
                        sites.append((column % L, row))
                    else:
                        terms.append(Contribution(weight * sign, tuple(sites)))
    return terms


def _site(spec: LatticeSpec, column: int, row: int) -> int:
    return column * spec.M + row


def _bit_spins(n_bits: int) -> np.ndarray:
    """(2^n, n) array of spins, bit b of the row index -> column b"""
    codes = np.arange(1 << n_bits, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(n_bits, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def _exponents(spins: np.ndarray, terms: Sequence[Tuple[float, Tuple[int, ...]]]) -> np.ndarray:
    energy = np.zeros(spins.shape[0])
    for coefficient, sites in terms:
        product = spins[:, sites[0]].astype(np.float64)
        for s in sites[1:]:
            product = product * spins[:, s]
        energy += coefficient * product
    return energy


def _enumerate(
    spec: LatticeSpec,
    terms: List[Contribution],
    observable: Optional[Tuple[int, ...]],
    workers: int,
) -> Tuple[float, float, int]:
    """log Z and signed log of sum w * observable over all configurations"""
    n = spec.n_sites
    if n > MAX_ENUM_SITES:
        raise TooLarge(
            f"exhaustive enumeration limited to {MAX_ENUM_SITES} spins, got {n}",
            {"sites": n, "limit": MAX_ENUM_SITES},
        )
    flat = [(c.coefficient, tuple(_site(spec, *s) for s in c.sites)) for c in terms]
    n_low = min(n, LOW_BITS)
    n_high = n - n_low
    low = _bit_spins(n_low)

    def chunk(high: int) -> Tuple[float, float, int]:
        high_spins = 1 - 2 * ((high >> np.arange(n_high)) & 1)
        spins = np.empty((low.shape[0], n), dtype=np.int8)
        spins[:, :n_low] = low
        spins[:, n_low:] = high_spins.astype(np.int8)
        exponent = _exponents(spins, flat)
        log_z = float(logsumexp(exponent))
        if observable is None:
            return log_z, 0.0, 0
        product = np.prod(spins[:, list(observable)].astype(np.float64), axis=1)
        log_obs, sign = logsumexp(exponent, b=product, return_sign=True)
        return log_z, float(log_obs), int(sign)

    highs = range(1 << n_high)
    if workers > 1 and n_high > 0:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, highs))
    else:
        parts = [chunk(h) for h in highs]

    log_z = float(logsumexp([p[0] for p in parts]))
    if observable is None:
        return log_z, 0.0, 0
    nonzero = [p for p in parts if p[2] != 0]
    if not nonzero:
        return log_z, float("-inf"), 0
    log_obs, sign = logsumexp([p[1] for p in nonzero], b=[p[2] for p in nonzero], return_sign=True)
    return log_z, float(log_obs), int(sign)


def brute_partition(
    spec: LatticeSpec,
    inter: Optional[InteractionSpec] = None,
    beta: Optional[float] = None,
    aux_pairs: Sequence[AuxPair] = (),
    workers: int = 1,
) -> SignedLogValue:
    """
    Z = sum over sigma of exp(-beta H) by exhaustive enumeration

    Raises:
        TooLarge: L*M > 24
    """
    inter = inter or InteractionSpec.none()
    beta = spec.beta if beta is None else beta
    log_z, _, _ = _enumerate(spec, contributions(spec, inter, beta, aux_pairs), None, workers)
    logger.info(f"Enumerated 2^{spec.n_sites} configurations: log Z={log_z:.12g}")
    return SignedLogValue(1, log_z)


def brute_correlation(
    spec: LatticeSpec,
    sites: BoundaryTuple,
    inter: Optional[InteractionSpec] = None,
    beta: Optional[float] = None,
    aux_pairs: Sequence[AuxPair] = (),
    workers: int = 1,
) -> float:
    """
    Exact <sigma_y1 ... sigma_ym>; repeated sites multiply to 1

    Raises:
        TooLarge: L*M > 24
    """
    inter = inter or InteractionSpec.none()
    beta = spec.beta if beta is None else beta
    observable = tuple(_site(spec, s.column % spec.L, s.row(spec.M)) for s in sites.sites)
    if not observable:
        return 1.0
    log_z, log_obs, sign = _enumerate(
        spec, contributions(spec, inter, beta, aux_pairs), observable, workers
    )
    value = 0.0 if sign == 0 else sign * math.exp(log_obs - log_z)
    if len(observable) % 2 == 1:
        if abs(value) > ODD_TOLERANCE:
            logger.error(f"Odd correlation {value:.3e} should vanish by spin-flip symmetry")
        return 0.0
    return value


def transfer_matrix_partition(
    spec: LatticeSpec,
    inter: Optional[InteractionSpec] = None,
    beta: Optional[float] = None,
    aux_pairs: Sequence[AuxPair] = (),
    block: int = 1 << 20,
) -> SignedLogValue:
    """
    Z by contracting row transfer matrices in log space

    The state is the last row, or the last two rows when the interaction spans
    three rows.

    Raises:
        TooLarge: L > 12, or L > 7 with a two-row state
        RangeTooLarge: interaction spanning more than three rows, or a
            lower-upper auxiliary coupling
    """
    inter = inter or InteractionSpec.none()
    beta = spec.beta if beta is None else beta
    L, M = spec.L, spec.M
    if L > MAX_TRANSFER_L:
        raise TooLarge(f"transfer matrix limited to L <= {MAX_TRANSFER_L}", {"L": L})
    span = inter.vertical_span if inter.lam != 0.0 else 0
    if span > 2:
        raise RangeTooLarge(f"interaction spans {span + 1} rows; at most 3 supported", {"span": span})
    if any(p.is_crossing for p in aux_pairs):
        raise RangeTooLarge("lower-upper auxiliary couplings are not row-local")
    depth = max(1, span)
    if depth == 2 and L > MAX_TWO_ROW_L:
        raise TooLarge(
            f"two-row transfer state limited to L <= {MAX_TWO_ROW_L}: the state has 2^(2L) "
            f"entries and each row step 2^(3L); use enumeration for L*M <= {MAX_ENUM_SITES}",
            {"L": L, "max_L": MAX_TWO_ROW_L, "state_size": 1 << (2 * L), "step_cost": 1 << (3 * L)},
        )

    terms = contributions(spec, inter, beta, aux_pairs)
    rows = _bit_spins(L)
    size = 1 << L

    def window_terms(y0: int, top_lo: int, top_hi: int):
        selected = []
        for c in terms:
            if top_lo <= c.top_row <= top_hi and c.bottom_row >= y0:
                selected.append((c.coefficient, tuple((r - y0) * L + col for col, r in c.sites)))
        return selected

    def window_spins(codes: np.ndarray, n_rows: int) -> np.ndarray:
        parts = [rows[(codes >> (L * (n_rows - 1 - r))) & (size - 1)] for r in range(n_rows)]
        return np.concatenate(parts, axis=1)

    first = min(depth, M)
    codes = np.arange(1 << (L * first), dtype=np.int64)
    log_v = _exponents(window_spins(codes, first), window_terms(0, 0, first - 1))
    if M <= depth:
        return SignedLogValue(1, float(logsumexp(log_v)))

    keep = 1 << (L * (depth - 1))
    for y in range(depth, M):
        step_terms = window_terms(y - depth, y, y)
        n_oldest = max(1, min(size, block // (keep * size)))
        new_v = np.full(keep * size, -np.inf)
        for start in range(0, size, n_oldest):
            oldest = np.arange(start, min(size, start + n_oldest), dtype=np.int64)
            state = (oldest[:, None] * keep + np.arange(keep, dtype=np.int64)[None, :]).ravel()
            code = (state[:, None] * size + np.arange(size, dtype=np.int64)[None, :]).ravel()
            exponent = _exponents(window_spins(code, depth + 1), step_terms)
            values = (log_v[state][:, None] + exponent.reshape(state.size, size))
            values = values.reshape(oldest.size, keep * size)
            new_v = np.logaddexp(new_v, logsumexp(values, axis=0))
        log_v = new_v
        logger.debug(f"Transfer step row {y}: max log weight {log_v.max():.6g}")
    return SignedLogValue(1, float(logsumexp(log_v)))
