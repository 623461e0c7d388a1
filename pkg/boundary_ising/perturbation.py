"""
First-order boundary-spin renormalization for the vertical next-nearest
interaction at the isotropic critical point

Every constant is computed twice: by quadrature over the propagators and from
its closed form. Both are reported, together with their residuals.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from boundary_ising.errors import SumNotConverged
from boundary_ising.logger import get_logger
from boundary_ising.propagators import (
    ISOTROPIC_T,
    QuadratureGrid,
    band_weight,
    couplings,
    folded_nodes,
    infinite_plane_propagator,
    k1_integrated,
    midpoint_nodes,
    row_sum,
)

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)
T0 = ISOTROPIC_T
BETA0 = math.atanh(T0)
ALPHA0 = 2.0 * T0 ** 2 * BETA0

# Richardson ladder for the edge sum; its terms decay like z2^-3
EDGE_SUM_LADDER = (256, 512, 1024)
EDGE_SUM_AGREEMENT = 1e-7
S_BLOCK = 256


def closed_forms() -> Dict[str, float]:
    """First-order coefficients in closed form, from primitives"""
    pi = math.pi
    two_nu1 = -(8.0 / pi) * (2.0 - SQRT2) * BETA0
    eta1 = -2.0 * (SQRT2 - 1.0 + 2.0 * (3.0 - 2.0 * SQRT2) / pi) * BETA0
    z1 = 2.0 * SQRT2 * (SQRT2 - 1.0) * (1.0 - 2.0 / pi) * BETA0
    bspin1 = BETA0 * (5.0 - SQRT2 - 4.0 * (SQRT2 + 1.0) / pi)
    return {
        "nu1": 0.5 * two_nu1,
        "zeta1": 0.0,
        "eta1": eta1,
        "Z1": z1,
        "beta1": -(2.0 * SQRT2 / pi) * BETA0,
        "tau1": -2.0 * SQRT2 * (SQRT2 - 1.0) * BETA0,
        "Bspin1": bspin1,
        "Zspin1": 3.0 * BETA0 * (1.0 - 2.0 * SQRT2 / pi),
        "bulk_derivative_diagonal": -SQRT2 / 2.0 - 1.0 / pi,
        "bulk_derivative_offset": -1.0 - SQRT2 / 2.0 + (SQRT2 + 1.0) ** 2 / pi,
        "edge_constant": (SQRT2 + 1.0) ** 2 / 4.0 * (SQRT2 - 4.0 / pi),
        "edge_sum": (SQRT2 + 1.0) / 4.0,
        "row_sum": SQRT2 + 1.0,
    }


class FirstOrderReport(BaseModel):
    """First-order coefficients in lambda; never values at finite lambda"""
    nu1: float = Field(..., description="nu_1 coefficient (2 nu_1 is the mass shift)")
    zeta1: float
    eta1: float
    Z1: float
    beta1: float
    tau1: float
    Bspin1: float
    Zspin1: float
    edge_constant: float = Field(..., description="Edge derivative constant entering Bspin1")
    edge_sum: float = Field(..., description="Weak-sense edge sum entering Bspin1")
    literal_edge_derivative: float = Field(..., description="g_E((0,2),(0,1)) - g_E((0,1),(0,1)), for audit")
    literal_edge_sum: float = Field(..., description="Plain lattice sum without the weak-sense boundary term")
    residuals: Dict[str, float] = Field(..., description="|quadrature - closed form| per quantity")
    grid: Dict[str, object] = Field(default_factory=dict, description="Quadrature provenance")


@dataclass(frozen=True)
class DressedParameters:
    """Z = 1 + Z1 lam, beta_c = beta0 + beta1 lam, t1* = t0 + tau1 lam"""
    Z1: float
    beta1: float
    tau1: float

    def beta_c(self, lam: float) -> float:
        return BETA0 + self.beta1 * lam

    def t1_star(self, lam: float) -> float:
        return T0 + self.tau1 * lam

    def identity_residual(self) -> float:
        """2(sqrt2-1) beta1 - tau1 - Z1"""
        return 2.0 * (SQRT2 - 1.0) * self.beta1 - self.tau1 - self.Z1


@dataclass(frozen=True)
class RunningCoupling:
    name: str
    scale: int
    value: float


def _bulk_mp(d: int, grid: QuadratureGrid) -> float:
    """g_{inf,-+}((0, d), (0, 0)); the bulk part only sees d"""
    value = infinite_plane_propagator((0, d), (0, 0), T0, grid).component("-", "+")
    return value.real


def first_order_couplings(grid: Optional[QuadratureGrid] = None) -> Tuple[float, float, float]:
    """
    (nu1, zeta1, eta1) from vertical derivatives of the bulk propagator

    2 nu1 = 2 alpha0 [-1 + d g(z, z) - d g(z, z - e2)]
    eta1  =   alpha0 [-1 + 2 d g(z, z)]
    zeta1 collects the horizontal moment of the (++) bulk contraction, zero by parity.
    """
    grid = grid or QuadratureGrid()
    g0, g1, g2 = (_bulk_mp(d, grid) for d in (0, 1, 2))
    diagonal = g1 - g0
    offset = g2 - g1
    nu1 = ALPHA0 * (-1.0 + diagonal - offset)
    eta1 = ALPHA0 * (-1.0 + 2.0 * diagonal)
    plus_plus = infinite_plane_propagator((0, 0), (0, 1), T0, grid).component("+", "+")
    zeta1 = 2.0 * ALPHA0 * plus_plus.real
    logger.info(f"First-order couplings: 2nu1={2 * nu1:.12f} eta1={eta1:.12f} zeta1={zeta1:.3e}")
    return nu1, zeta1, eta1


def bulk_derivatives(grid: Optional[QuadratureGrid] = None) -> Tuple[float, float]:
    """(d_{1,2} g_{inf,-+}(z, z), d_{1,2} g_{inf,-+}(z, z - e2))"""
    grid = grid or QuadratureGrid()
    g0, g1, g2 = (_bulk_mp(d, grid) for d in (0, 1, 2))
    return g1 - g0, g2 - g1


def dressed_parameters(nu1: float, eta1: float) -> DressedParameters:
    """
    Solve the first-order flow relations for (Z1, beta1, tau1)

        -t0 Z1 + (1-t0^2) beta1 + tau1 = 2 eta1
         t0 Z1 + (1-t0^2) beta1 - tau1 = 2 nu1 - 2 eta1
           -Z1 + (1-t0^2) beta1 - tau1 = 0
    """
    c = 1.0 - T0 ** 2
    system = np.array([[-T0, c, 1.0], [T0, c, -1.0], [-1.0, c, -1.0]])
    rhs = np.array([2.0 * eta1, 2.0 * nu1 - 2.0 * eta1, 0.0])
    z1, beta1, tau1 = np.linalg.solve(system, rhs)
    return DressedParameters(float(z1), float(beta1), float(tau1))


def _b_t(t: float, k: np.ndarray) -> np.ndarray:
    return (1.0 - t * t) / np.abs(1.0 + t * np.exp(1j * k)) ** 2


def _delta_t(t: float, k: np.ndarray) -> np.ndarray:
    return 2.0 * t * np.sin(k) / np.abs(1.0 + t * np.exp(1j * k)) ** 2


def dressed_kernels(lam: float, params: DressedParameters, k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(-b_t/Z + b_t1*, Delta_t/Z - Delta_t1*) at coupling lam"""
    t = math.tanh(params.beta_c(lam))
    z = 1.0 + params.Z1 * lam
    t1s = params.t1_star(lam)
    return -_b_t(t, k) / z + _b_t(t1s, k), _delta_t(t, k) / z - _delta_t(t1s, k)


def dressed_kernel_coefficients(k, params: DressedParameters) -> Tuple[np.ndarray, np.ndarray]:
    """First-order kernel coefficients Z1 (b - b') and -Z1 (Delta - Delta'), primes d/dt at t0"""
    k = np.asarray(k, dtype=float)
    cos = np.cos(k)
    den = 1.0 + T0 ** 2 + 2.0 * T0 * cos
    b_prime = -(4.0 * T0 + 2.0 * cos * (1.0 + T0 ** 2)) / den ** 2
    delta_prime = 2.0 * np.sin(k) * (1.0 - T0 ** 2) / den ** 2
    return (
        params.Z1 * (_b_t(T0, k) - b_prime),
        -params.Z1 * (_delta_t(T0, k) - delta_prime),
    )


def _mp_kernel(k: np.ndarray) -> np.ndarray:
    """k1-integrated (-+) brace over D at dx = 0; bulk and image coincide here"""
    return k1_integrated(k, 0, T0)[0][1, 0]


def edge_series(s_values: Sequence[int], grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """g_{E,-+}((0, s - z2'), (0, z2')) for each s = z2 + z2', dx = 0"""
    grid = grid or QuadratureGrid()
    s = np.asarray(s_values, dtype=float)
    x, w = folded_nodes(grid.k2_nodes + 2 * int(s.max()))
    plus, minus = _mp_kernel(x), _mp_kernel(-x)
    out = np.empty(s.size)
    for start in range(0, s.size, S_BLOCK):
        block = s[start:start + S_BLOCK, None]
        folded = plus * np.exp(-1j * x * block) + minus * np.exp(1j * x * block)
        out[start:start + S_BLOCK] = -(folded @ w).real / (2.0 * math.pi)
    return out


def literal_edge_derivative(grid: Optional[QuadratureGrid] = None) -> float:
    """Forward vertical difference g_E((0,2),(0,1)) - g_E((0,1),(0,1))"""
    e2, e3 = edge_series([2, 3], grid)
    return float(e3 - e2)


def _reduced_integral(integrand, grid: QuadratureGrid) -> float:
    """int_{-pi}^{pi} dk/2pi f(k) for even f, on (0, pi)"""
    x, w = folded_nodes(grid.k2_nodes)
    return float(np.dot(integrand(x), w)) / math.pi


def _sqrt_weight(x: np.ndarray) -> np.ndarray:
    """sqrt((1 - cos k)(3 - cos k)) written analytically on (0, pi)"""
    return SQRT2 * np.sin(0.5 * x) * np.sqrt(3.0 - np.cos(x))


def reduced_bracket(grid: Optional[QuadratureGrid] = None) -> Tuple[float, float]:
    """(edge constant, edge sum) from their one-dimensional reduced integrals"""
    grid = grid or QuadratureGrid()
    prefactor = (SQRT2 + 1.0) / 2.0
    edge = prefactor * _reduced_integral(
        lambda x: (SQRT2 * (1.0 - np.cos(x)) * np.cos(x) + np.sin(x) ** 2) / _sqrt_weight(x), grid
    )
    total = prefactor * _reduced_integral(lambda x: (1.0 - np.cos(x)) / _sqrt_weight(x), grid)
    return edge, total


def _edge_partial_sums(grid: QuadratureGrid) -> Dict[int, float]:
    """sum_{z2=1}^{N} [2 g_E(2 z2) - g_E(2 z2 - 1) - g_E(2 z2 + 1)] for N on the ladder"""
    top = EDGE_SUM_LADDER[-1]
    series = edge_series(range(1, 2 * top + 2), grid)
    g = np.concatenate([[0.0], series])
    z = np.arange(1, top + 1)
    terms = 2.0 * g[2 * z] - g[2 * z - 1] - g[2 * z + 1]
    partial = np.cumsum(terms)
    return {n: float(partial[n - 1]) for n in EDGE_SUM_LADDER}


def lattice_edge_sum(grid: Optional[QuadratureGrid] = None) -> float:
    """
    Plain lattice sum over z2 >= 1, extrapolated in the cutoff N

    Partial sums approach the limit like a/N^2 + b/N^3, removed by two
    Richardson steps over the ladder.

    Raises:
        SumNotConverged: the two first-level extrapolations disagree
    """
    grid = grid or QuadratureGrid()
    sums = _edge_partial_sums(grid)
    n0, n1, n2 = EDGE_SUM_LADDER
    first = (4.0 * sums[n1] - sums[n0]) / 3.0
    second = (4.0 * sums[n2] - sums[n1]) / 3.0
    if abs(second - first) > EDGE_SUM_AGREEMENT:
        raise SumNotConverged(
            f"edge lattice sum not converged: extrapolations differ by {abs(second - first):.3e}",
            {"ladder": list(EDGE_SUM_LADDER), "partial_sums": sums},
        )
    limit = (8.0 * second - first) / 7.0
    logger.debug(f"Edge lattice sum: partial {sums[n2]:.12f}, extrapolated {limit:.12f}")
    return limit


def boundary_term() -> float:
    """K(pi): the z2-sum term at k2 = pi that the weak-sense resummation drops"""
    return float(_mp_kernel(np.array([math.pi]))[0].real)


def bspin_first_order(grid: Optional[QuadratureGrid] = None) -> Dict[str, float]:
    """
    Bspin1 by two routes

    Raw route: row sums and edge propagators summed on the lattice, with the
    weak-sense boundary term restored. Reduced route: the one-dimensional
    bracket integrals. Both use the edge constant g_E((0,1),(0,1)).
    """
    grid = grid or QuadratureGrid()
    rows = row_sum(1, T0, grid)
    edge_raw = float(edge_series([2], grid)[0])
    literal_sum = lattice_edge_sum(grid)
    weak_sum = literal_sum + boundary_term()
    raw = -ALPHA0 * rows + 2.0 * ALPHA0 * rows * (edge_raw + weak_sum)

    edge_reduced, sum_reduced = reduced_bracket(grid)
    reduced = 2.0 * ALPHA0 * (SQRT2 + 1.0) * (-0.5 + edge_reduced + sum_reduced)
    logger.info(f"Bspin1: raw={raw:.12f} reduced={reduced:.12f}")
    return {
        "raw": raw,
        "reduced": reduced,
        "row_sum": rows,
        "edge_constant": edge_raw,
        "edge_constant_reduced": edge_reduced,
        "edge_sum": weak_sum,
        "edge_sum_reduced": sum_reduced,
        "literal_edge_sum": literal_sum,
    }


def zspin_first_order(grid: Optional[QuadratureGrid] = None, workers: int = 1) -> FirstOrderReport:
    """Zspin1 = -Z1/2 + Bspin1, with every ingredient checked against its closed form"""
    grid = grid or QuadratureGrid()
    with ThreadPoolExecutor(max_workers=max(1, min(workers, 4))) as pool:
        couplings_future = pool.submit(first_order_couplings, grid)
        derivatives_future = pool.submit(bulk_derivatives, grid)
        bspin_future = pool.submit(bspin_first_order, grid)
        literal_future = pool.submit(literal_edge_derivative, grid)
        nu1, zeta1, eta1 = couplings_future.result()
        diagonal, offset = derivatives_future.result()
        bspin = bspin_future.result()
        literal_edge = literal_future.result()

    params = dressed_parameters(nu1, eta1)
    zspin1 = -0.5 * params.Z1 + bspin["raw"]
    exact = closed_forms()
    measured = {
        "nu1": nu1,
        "zeta1": zeta1,
        "eta1": eta1,
        "Z1": params.Z1,
        "beta1": params.beta1,
        "tau1": params.tau1,
        "Bspin1": bspin["raw"],
        "Zspin1": zspin1,
        "bulk_derivative_diagonal": diagonal,
        "bulk_derivative_offset": offset,
        "edge_constant": bspin["edge_constant"],
        "edge_sum": bspin["edge_sum"],
        "row_sum": bspin["row_sum"],
    }
    residuals = {key: abs(value - exact[key]) for key, value in measured.items()}
    residuals["Bspin1_routes"] = abs(bspin["raw"] - bspin["reduced"])
    residuals["edge_constant_reduced"] = abs(bspin["edge_constant_reduced"] - exact["edge_constant"])
    residuals["edge_sum_reduced"] = abs(bspin["edge_sum_reduced"] - exact["edge_sum"])
    residuals["dressed_identity"] = abs(params.identity_residual())

    report = FirstOrderReport(
        nu1=nu1,
        zeta1=zeta1,
        eta1=eta1,
        Z1=params.Z1,
        beta1=params.beta1,
        tau1=params.tau1,
        Bspin1=bspin["raw"],
        Zspin1=zspin1,
        edge_constant=bspin["edge_constant"],
        edge_sum=bspin["edge_sum"],
        literal_edge_derivative=literal_edge,
        literal_edge_sum=bspin["literal_edge_sum"],
        residuals=residuals,
        grid=grid.model_dump(),
    )
    logger.info(f"Zspin1={zspin1:.12f} (closed form {exact['Zspin1']:.12f})")
    return report


def _cut_kernels(h: int, grid: QuadratureGrid, s_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """(k2 nodes, (-+) and (++) braces integrated over k1 with eta <= 2^(-2h)) on a midpoint grid"""
    cp = couplings(T0)
    cut = 2.0 ** (-2 * h)
    weight = band_weight(0.0, cut, grid.model_copy(update={"eta_rule": "exact"}))
    n1 = max(grid.n_k, 64 * 2 ** (-h))
    n2 = 2 * s_max + 64 * 2 ** (-h)
    n2 += n2 % 2
    k1 = midpoint_nodes(n1)[:, None]
    k2 = midpoint_nodes(n2)
    D = cp.a * (1.0 - np.cos(k1)) + cp.b * (1.0 - np.cos(k2[None, :]))
    w = weight(D)
    B = cp.b0 + cp.b1 * np.cos(k1)
    minus_plus = np.mean(w * cp.mass * (1.0 - B * np.exp(1j * k2[None, :])), axis=0)
    plus_plus = np.mean(w * (-2j * cp.t * np.sin(k1)), axis=0)
    return k2, minus_plus, plus_plus, n2


def _cut_boundary_term(h: int, grid: QuadratureGrid) -> float:
    cp = couplings(T0)
    weight = band_weight(0.0, 2.0 ** (-2 * h), grid.model_copy(update={"eta_rule": "exact"}))
    k1 = midpoint_nodes(max(grid.n_k, 64 * 2 ** (-h)))
    D = cp.a * (1.0 - np.cos(k1)) + 2.0 * cp.b
    B = cp.b0 + cp.b1 * np.cos(k1)
    return float(np.mean(weight(D) * cp.mass * (1.0 + B)))


def _cut_row_sum(h: int, grid: QuadratureGrid, k2: np.ndarray) -> float:
    cp = couplings(T0)
    weight = band_weight(0.0, 2.0 ** (-2 * h), grid.model_copy(update={"eta_rule": "exact"}))
    D = cp.b * (1.0 - np.cos(k2))
    return float(np.mean(weight(D) * cp.mass * 2.0 * np.sin(k2) ** 2))


def running_couplings(h_values: Sequence[int], grid: Optional[QuadratureGrid] = None) -> List[RunningCoupling]:
    """
    nu, zeta, eta and Zspin with every propagator cut at eta <= 2^(-2h)

    Zspin_h is the reduced bracket evaluated with the cut propagators; it tends
    to Zspin1 as h decreases.
    """
    grid = grid or QuadratureGrid()
    out: List[RunningCoupling] = []
    for h in sorted(h_values, reverse=True):
        z_max = 12 * 2 ** (-h) + 16
        s_max = 2 * z_max + 1
        k2, minus_plus, plus_plus, _ = _cut_kernels(h, grid, s_max)
        bulk = lambda d: float(np.mean(minus_plus * np.exp(-1j * k2 * d)).real)
        diagonal = bulk(1) - bulk(0)
        offset = bulk(2) - bulk(1)
        nu = ALPHA0 * (-1.0 + diagonal - offset)
        eta = ALPHA0 * (-1.0 + 2.0 * diagonal)
        zeta = 2.0 * ALPHA0 * float(np.mean(plus_plus * np.exp(1j * k2)).real)

        s = np.arange(0, s_max + 1)
        edge = -(np.exp(-1j * np.outer(s, k2)) @ minus_plus).real / k2.size
        z = np.arange(1, z_max + 1)
        edge_sum = float(np.sum(2.0 * edge[2 * z] - edge[2 * z - 1] - edge[2 * z + 1]))
        edge_sum += _cut_boundary_term(h, grid)
        rows = _cut_row_sum(h, grid, k2)
        bspin = -ALPHA0 * rows + 2.0 * ALPHA0 * rows * (edge[2] + edge_sum)
        zspin = -0.5 * dressed_parameters(nu, eta).Z1 + bspin

        for name, value in (("nu", nu), ("zeta", zeta), ("eta", eta), ("Zspin", zspin)):
            out.append(RunningCoupling(name, h, value))
        logger.debug(f"Running couplings h={h}: nu={nu:.9f} eta={eta:.9f} Zspin={zspin:.9f}")
    return out
