"""
Half-plane and infinite-plane propagators at criticality

Components are indexed by omega in {+, -}. The cutoff propagator carries the
heat-kernel factor exp(-eta D(k)); integrating eta over dyadic bands gives the
single-scale propagators, and over [0, inf) the full critical propagator.

k1 is always integrated exactly. With eta fixed, exp(-eta a (1 - cos k1)) is a
Bessel series sum_m e^{-x} I_m(x) e^{imk1}, so the cutoff kernel reduces to
trigonometric moments; bands take Gauss-Legendre in eta over it. Tails
eta in [lo, inf) carry exp(-lo D)/D, whose k1 integral uses the same Bessel
series over the moments

    int dk1/2pi e^{-i k1 n} / (c - cos k1) = 2 rho^|n| / (1/rho - rho),

with |rho| < 1 a root of rho^2 - 2 c rho + 1. The remaining k2 integral is
folded onto (0, pi), in the variable u = sqrt(k2), for Gauss-Legendre
quadrature. A 2D midpoint grid is kept as a cross-check path.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.special import ive, roots_legendre

from boundary_ising.errors import InvalidSpec, QuadratureNotConverged
from boundary_ising.logger import get_logger

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)
ISOTROPIC_T = SQRT2 - 1.0
MAX_MASSIVE_DX = 10 ** 6
GRID_CHUNK = 1 << 18

Point = Tuple[int, int]
OMEGA = {"+": 0, "-": 1}
Method = Literal["fast", "grid"]


class PropagatorKind(str, Enum):
    MASSIVE = "massive"
    CUTOFF = "cutoff"
    SCALE = "scale"
    SCALE_LE = "le"
    INFINITE = "bulk"
    EDGE = "edge"
    FULL_CRITICAL = "full"


class QuadratureGrid(BaseModel):
    """Quadrature resolution shared by all propagator evaluations"""
    n_k: int = Field(512, ge=8, description="Midpoint nodes per momentum axis (2D)")
    n_k1d: int = Field(2048, ge=8, description="Midpoint nodes for 1D momentum integrals")
    k2_nodes: int = Field(128, ge=8, description="Gauss-Legendre nodes on (0, pi)")
    eta_nodes: int = Field(32, ge=2, description="Gauss-Legendre nodes per eta band")
    eta_rule: Literal["exact", "gauss"] = Field("exact", description="Band integration in eta")
    tolerance: float = Field(1e-8, gt=0.0, description="Self-convergence tolerance")

    @field_validator("n_k", "n_k1d")
    @classmethod
    def must_be_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("momentum grids need an even number of nodes")
        return v

    def refined(self) -> "QuadratureGrid":
        return self.model_copy(update={
            "n_k": 2 * self.n_k,
            "n_k1d": 2 * self.n_k1d,
            "k2_nodes": 2 * self.k2_nodes,
            "eta_nodes": 2 * self.eta_nodes,
        })


@dataclass(frozen=True)
class PropagatorSample:
    """2x2 propagator g_{omega omega'}(z, z')"""
    z: Point
    zp: Point
    kind: PropagatorKind
    value: np.ndarray
    h: Optional[int] = None
    eta: Optional[float] = None
    meta: Dict[str, float] = field(default_factory=dict)

    def component(self, omega: str, omega_p: str) -> complex:
        return complex(self.value[OMEGA[omega], OMEGA[omega_p]])

    def norm(self) -> float:
        """Max norm over the four components"""
        return float(np.abs(self.value).max())

    def to_dict(self) -> dict:
        components = {}
        for a, i in OMEGA.items():
            for b, j in OMEGA.items():
                v = complex(self.value[i, j])
                components[a + b] = {"re": v.real, "im": v.imag}
        return {
            "z": list(self.z),
            "zp": list(self.zp),
            "kind": self.kind.value,
            "h": self.h,
            "eta": self.eta,
            "components": components,
            "meta": dict(self.meta),
        }


@dataclass(frozen=True)
class CriticalCouplings:
    """Coefficients of the critical quadratic form at horizontal weight t"""
    t: float

    @property
    def t2(self) -> float:
        return (1.0 - self.t) / (1.0 + self.t)

    @property
    def a(self) -> float:
        return 2.0 * (1.0 - self.t2) ** 2

    @property
    def b(self) -> float:
        return 2.0 * (1.0 - self.t) ** 2

    @property
    def mass(self) -> float:
        return 1.0 - self.t ** 2

    @property
    def b0(self) -> float:
        return (1.0 + self.t ** 2) / (1.0 + self.t) ** 2

    @property
    def b1(self) -> float:
        return 2.0 * self.t / (1.0 + self.t) ** 2


def couplings(t1s: float) -> CriticalCouplings:
    if not 0.0 < t1s < 1.0:
        raise InvalidSpec(f"critical weight must lie in (0, 1), got {t1s}", {"t1s": t1s})
    return CriticalCouplings(t1s)


def midpoint_nodes(n: int) -> np.ndarray:
    """Symmetric midpoint nodes on [-pi, pi]; k = 0 is never a node"""
    return -math.pi + (np.arange(n) + 0.5) * (2.0 * math.pi / n)


@lru_cache(maxsize=64)
def folded_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, pi)"""
    x, w = roots_legendre(n)
    return 0.5 * math.pi * (x + 1.0), 0.5 * math.pi * w


def eta_band(h: int) -> Tuple[float, float]:
    """eta interval of scale h: [0, 1] for h = 0, else [2^(-2h-2), 2^(-2h)]"""
    if h > 0:
        raise InvalidSpec(f"scale labels are <= 0, got {h}", {"h": h})
    if h == 0:
        return 0.0, 1.0
    return 2.0 ** (-2 * h - 2), 2.0 ** (-2 * h)


def band_weight(lo: float, hi: float, grid: QuadratureGrid) -> Callable[[np.ndarray], np.ndarray]:
    """D -> int_lo^hi exp(-eta D) d eta"""
    if grid.eta_rule == "gauss" and math.isfinite(hi):
        x, w = roots_legendre(grid.eta_nodes)
        etas = lo + 0.5 * (hi - lo) * (x + 1.0)
        weights = 0.5 * (hi - lo) * w

        def gauss(D: np.ndarray) -> np.ndarray:
            total = np.zeros_like(D)
            for eta, wt in zip(etas, weights):
                total += wt * np.exp(-eta * D)
            return total

        return gauss

    if not math.isfinite(hi):
        return lambda D: np.exp(-lo * D) / D
    return lambda D: np.exp(-lo * D) * (-np.expm1(-(hi - lo) * D)) / D


def _numerators(cp: CriticalCouplings, k1: np.ndarray, k2: np.ndarray):
    """Bulk and image brace matrices as nested lists of arrays"""
    s1 = 2j * cp.t * np.sin(k1)
    B = cp.b0 + cp.b1 * np.cos(k1)
    e = np.exp(1j * k2)
    m = cp.mass
    bulk = [[-s1, -m * (1.0 - B / e)], [m * (1.0 - B * e), s1]]
    ratio = (1.0 - B / e) / (1.0 - B * e)
    image = [[-s1, -m * (1.0 - B * e)], [m * (1.0 - B * e), ratio * s1]]
    return bulk, image


def _grid_kernel(
    cp: CriticalCouplings,
    z: Point,
    zp: Point,
    weight: Callable[[np.ndarray], np.ndarray],
    n: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """(bulk, edge) parts of int d^2k/(2pi)^2 weight(D) {...} on an n x n midpoint grid"""
    dx = z[0] - zp[0]
    d = z[1] - zp[1]
    s = z[1] + zp[1]
    k = midpoint_nodes(n)
    bulk = np.zeros((2, 2), dtype=complex)
    edge = np.zeros((2, 2), dtype=complex)
    rows = max(1, GRID_CHUNK // n)
    for start in range(0, n, rows):
        k1 = k[start:start + rows, None]
        k2 = k[None, :]
        D = cp.a * (1.0 - np.cos(k1)) + cp.b * (1.0 - np.cos(k2))
        w = weight(D) * np.exp(-1j * k1 * dx)
        phase_bulk = w * np.exp(-1j * k2 * d)
        phase_image = w * np.exp(-1j * k2 * s)
        num_bulk, num_image = _numerators(cp, k1, k2)
        for i in range(2):
            for j in range(2):
                bulk[i, j] += np.sum(phase_bulk * num_bulk[i][j])
                edge[i, j] -= np.sum(phase_image * num_image[i][j])
    return bulk / (n * n), edge / (n * n)


def _grid_size(grid: QuadratureGrid, z: Point, zp: Point, width: float) -> int:
    """Midpoint nodes resolving a kernel of momentum width 1/width and the phases"""
    spread = abs(z[0] - zp[0]) + abs(z[1]) + abs(zp[1])
    n = max(grid.n_k, int(16 * math.ceil(width)) + 4 * spread)
    return n + (n % 2)


def _self_converged(
    evaluate: Callable[[int], Tuple[np.ndarray, np.ndarray]],
    n: int,
    tol: float,
    what: str,
) -> Tuple[np.ndarray, np.ndarray]:
    """Grid halving test over all eight bulk and image entries"""
    fine = evaluate(n)
    coarse = evaluate(n // 2 + (n // 2) % 2)
    scale = max(1.0, float(np.abs(fine[0] + fine[1]).max()))
    change = max(float(np.abs(f - c).max()) for f, c in zip(fine, coarse))
    if change > tol * scale:
        raise QuadratureNotConverged(
            f"{what}: halving the grid changed the result by {change:.3e}",
            {"n": n, "change": change, "tolerance": tol},
        )
    return fine


def _root(delta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (rho, s) for c = 1 + delta: rho = c - s is the root of rho^2 - 2 c rho + 1
    inside the unit disc, s = (1/rho - rho)/2 = sqrt(c^2 - 1) on that branch
    """
    delta = np.asarray(delta, dtype=complex)
    s = np.sqrt(delta * (delta + 2.0))
    rho = 1.0 + (delta - s)
    outside = np.abs(rho) > 1.0
    s = np.where(outside, -s, s)
    rho = np.where(outside, 1.0 + (delta - s), rho)
    return rho, s


def _moments(delta: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    int dk/2pi e^{-ikn} {1, 1 - cos k, sin k} / (c - cos k) for c = 1 + delta off [-1, 1]

    Written through rho^|n| and s only, using 1 - cos k = (c - cos k) - delta;
    the first moment grows like 1/s as delta -> 0, the other two stay bounded.
    """
    rho, s = _root(delta)
    power = rho ** abs(n)
    moment = power / s
    gap = (1.0 if n == 0 else 0.0) - delta * moment
    sine = -1j * np.sign(n) * power
    return moment, gap, sine


def _k2_delta(cp: CriticalCouplings, k2: np.ndarray) -> np.ndarray:
    # c - 1 = (b/a)(1 - cos k2), kept away from the rounding of cos near k2 = 0
    return (cp.b / cp.a) * 2.0 * np.sin(0.5 * k2) ** 2


def _den_delta(cp: CriticalCouplings, k2: np.ndarray) -> np.ndarray:
    """c' - 1 for the image denominator 1 - B e = e b1 (c' - cos k1)"""
    return np.expm1(-1j * k2) / cp.b1


def k1_integrated(k2: np.ndarray, dx: int, t1s: float = ISOTROPIC_T) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bulk and image braces divided by D and integrated over k1, shape (2, 2, len(k2))

    Phases in k2 are left to the caller.
    """
    cp = couplings(t1s)
    k2 = np.asarray(k2, dtype=float)
    delta = _k2_delta(cp, k2)
    e = np.exp(1j * k2)
    moment, gap, sine = _moments(delta, dx)
    m, t = cp.mass, cp.t

    # b0 + b1 = 1, so 1 - b0 e - b1 e cos k1 = (1 - e) + b1 e (1 - cos k1)
    lower = -np.expm1(1j * k2) * moment + cp.b1 * e * gap
    upper = -np.expm1(-1j * k2) * moment + (cp.b1 / e) * gap

    bulk = np.empty((2, 2, k2.size), dtype=complex)
    bulk[0, 0] = -2j * t * sine
    bulk[0, 1] = -m * upper
    bulk[1, 0] = m * lower
    bulk[1, 1] = 2j * t * sine

    # R = (1 - B/e)/(1 - B e) is rational in cos k1: split by partial fractions
    d_num = np.expm1(1j * k2) / cp.b1
    d_den = _den_delta(cp, k2)
    first = (d_num - delta) / (d_den - delta)
    second = (d_num - d_den) / (delta - d_den)
    image = np.empty_like(bulk)
    image[0, 0] = bulk[0, 0]
    image[0, 1] = -m * lower
    image[1, 0] = bulk[1, 0]
    image[1, 1] = 2j * t * (first * sine + second * _moments(d_den, dx)[2]) / (e * e)
    return bulk / cp.a, image / cp.a


def _bessel_weights(x: float) -> Tuple[np.ndarray, np.ndarray]:
    """Orders m and weights e^{-x} I_m(x) with e^{-x (1 - cos k)} = sum_m w_m e^{imk}"""
    if x == 0.0:
        return np.zeros(1, dtype=int), np.ones(1)
    cut = int(math.ceil(x + 10.0 * math.sqrt(x) + 25.0))
    orders = np.arange(-cut, cut + 1)
    return orders, ive(np.abs(orders), x)


def _heat(cp: CriticalCouplings, k2: np.ndarray, eta: float) -> np.ndarray:
    """exp(-eta b (1 - cos k2))"""
    return np.exp(-eta * cp.b * 2.0 * np.sin(0.5 * k2) ** 2)


def _cutoff_braces(cp: CriticalCouplings, k2: np.ndarray, dx: int, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bulk and image braces times exp(-eta D), integrated over k1 exactly

    The k1 heat factor is a Bessel series, so every entry is a finite sum of
    trigonometric moments; the ratio R contributes the sine moments of the
    image denominator.
    """
    x = eta * cp.a
    orders, weights = _bessel_weights(x)
    series = lambda n: float(ive(abs(n), x))
    plain = series(dx)
    cosine = 0.5 * (series(dx - 1) + series(dx + 1))
    sine = (series(dx - 1) - series(dx + 1)) / 2j

    e = np.exp(1j * k2)
    rho, _ = _root(_den_delta(cp, k2))
    shifted = dx - orders
    den_sine = weights @ (-1j * np.sign(shifted)[:, None] * rho[None, :] ** np.abs(shifted)[:, None])
    q = 2j * np.sin(k2) / cp.b1
    m, t = cp.mass, cp.t

    bulk = np.empty((2, 2, k2.size), dtype=complex)
    bulk[0, 0] = -2j * t * sine
    bulk[0, 1] = -m * ((1.0 - cp.b0 / e) * plain - (cp.b1 / e) * cosine)
    bulk[1, 0] = m * ((1.0 - cp.b0 * e) * plain - cp.b1 * e * cosine)
    bulk[1, 1] = 2j * t * sine
    image = np.empty_like(bulk)
    image[0, 0] = bulk[0, 0]
    image[0, 1] = -m * ((1.0 - cp.b0 * e) * plain - cp.b1 * e * cosine)
    image[1, 0] = bulk[1, 0]
    image[1, 1] = 2j * t * (sine + q * den_sine) / (e * e)
    heat = _heat(cp, k2, eta)
    return bulk * heat, image * heat


def _tail_braces(cp: CriticalCouplings, k2: np.ndarray, dx: int, lo: float) -> Tuple[np.ndarray, np.ndarray]:
    """Braces times exp(-lo D)/D, integrated over k1: Bessel-weighted shifts of k1_integrated"""
    orders, weights = _bessel_weights(lo * cp.a)
    bulk = np.zeros((2, 2, k2.size), dtype=complex)
    image = np.zeros_like(bulk)
    for m, wt in zip(orders, weights):
        if wt < 1e-18:
            continue
        b, i = k1_integrated(k2, dx - int(m), cp.t)
        bulk += wt * b
        image += wt * i
    heat = _heat(cp, k2, lo)
    return bulk * heat, image * heat


@lru_cache(maxsize=64)
def squared_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on (0, pi) after k = u^2, u in (0, sqrt(pi))"""
    x, w = roots_legendre(n)
    half = 0.5 * math.sqrt(math.pi)
    u = half * (x + 1.0)
    return u * u, 2.0 * u * half * w


def _fold(
    braces: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
    z: Point,
    zp: Point,
    nodes: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """(bulk, edge) = int dk2/2pi of the k1-integrated braces with their phases, over f(k) + f(-k) on (0, pi)"""
    d = z[1] - zp[1]
    s = z[1] + zp[1]
    # the (--) image entry has a sqrt(k) branch at k = 0 once dx != 0; k = u^2 makes it smooth
    x, w = squared_nodes(nodes)
    bulk = np.zeros((2, 2, x.size), dtype=complex)
    edge = np.zeros_like(bulk)
    for k in (x, -x):
        b, i = braces(k)
        bulk += b * np.exp(-1j * k * d)
        edge -= i * np.exp(-1j * k * s)
    return bulk @ w / (2.0 * math.pi), edge @ w / (2.0 * math.pi)


def _fast_nodes(grid: QuadratureGrid, z: Point, zp: Point, eta: float = 0.0) -> int:
    """Gauss nodes in u for the phases and for k2 heat factors up to eta"""
    spread = abs(z[0] - zp[0]) + abs(z[1]) + abs(zp[1])
    return grid.k2_nodes + 2 * spread + 8 * int(math.ceil(math.sqrt(eta)))


def _fast(
    parts: Callable[[int], Tuple[np.ndarray, np.ndarray]],
    nodes: int,
    grid: QuadratureGrid,
    check: bool,
    what: str,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Evaluate at 3/2 the nodes; with check, against the base nodes over every entry"""
    fine_nodes = nodes + nodes // 2
    fine = parts(fine_nodes)
    if check:
        coarse = parts(nodes)
        change = max(float(np.abs(f - c).max()) for f, c in zip(fine, coarse))
        if change > 1e-2 * grid.tolerance:
            raise QuadratureNotConverged(
                f"{what}: node refinement changed the result by {change:.3e}",
                {"nodes": nodes, "change": change},
            )
    return fine[0], fine[1], fine_nodes


def _tail(
    z: Point, zp: Point, lo: float, t1s: float, grid: QuadratureGrid, check: bool, what: str
) -> Tuple[np.ndarray, np.ndarray, int]:
    """eta over [lo, inf) with the eta integral in closed form"""
    cp = couplings(t1s)
    dx = z[0] - zp[0]
    parts = lambda n: _fold(lambda k: _tail_braces(cp, k, dx, lo), z, zp, n)
    return _fast(parts, _fast_nodes(grid, z, zp, lo), grid, check, what)


def _band(
    z: Point,
    zp: Point,
    lo: float,
    hi: float,
    t1s: float,
    grid: QuadratureGrid,
    check: bool,
    what: str,
    method: str = "fast",
) -> Tuple[np.ndarray, np.ndarray, Dict[str, float]]:
    """
    eta over [lo, hi]. The fast path takes Gauss-Legendre in eta over exact
    cutoff kernels; the grid path integrates eta exactly on a 2D momentum grid.
    """
    cp = couplings(t1s)
    if method == "grid":
        weight = band_weight(lo, hi, grid)
        n = _grid_size(grid, z, zp, math.sqrt(max(lo, 1.0)))
        evaluate = lambda size: _grid_kernel(cp, z, zp, weight, size)
        bulk, edge = _self_converged(evaluate, n, grid.tolerance, what) if check else evaluate(n)
        return bulk, edge, {"n_k": n}

    dx = z[0] - zp[0]
    nodes = _fast_nodes(grid, z, zp, hi)

    def parts(n: int) -> Tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(max(2, grid.eta_nodes * n // nodes))
        etas = lo + 0.5 * (hi - lo) * (x + 1.0)
        weights = 0.5 * (hi - lo) * w

        def braces(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            bulk = np.zeros((2, 2, k.size), dtype=complex)
            image = np.zeros_like(bulk)
            for eta, wt in zip(etas, weights):
                b, i = _cutoff_braces(cp, k, dx, eta)
                bulk += wt * b
                image += wt * i
            return bulk, image

        return _fold(braces, z, zp, n)

    bulk, edge, used = _fast(parts, nodes, grid, check, what)
    return bulk, edge, {"k2_nodes": used, "eta_nodes": grid.eta_nodes * used // nodes}


def massive_closed_form(dx: int, t1s: float) -> np.ndarray:
    """Fourier coefficients of (1 + t e^{+-ik})^-1 as geometric series"""
    pm = (-t1s) ** dx if dx >= 0 else 0.0
    mp = -((-t1s) ** (-dx)) if dx <= 0 else 0.0
    return np.array([[0.0, pm], [mp, 0.0]], dtype=complex)


def massive_propagator(dx: int, t1s: float = ISOTROPIC_T, grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """
    Half-plane massive propagator block at horizontal separation dx, by quadrature

    The row factor delta_{z2, z2'} is applied by the caller.
    """
    couplings(t1s)
    if abs(dx) > MAX_MASSIVE_DX:
        raise InvalidSpec(f"|dx| must be <= {MAX_MASSIVE_DX}", {"dx": dx})
    grid = grid or QuadratureGrid()
    k = midpoint_nodes(grid.n_k1d)
    phase = np.exp(-1j * k * dx)
    pm = np.mean(phase / (1.0 + t1s * np.exp(1j * k)))
    mp = -np.mean(phase / (1.0 + t1s * np.exp(-1j * k)))
    return np.array([[0.0, pm], [mp, 0.0]], dtype=complex)


def cutoff_propagator(
    z: Point,
    zp: Point,
    eta: float,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    check: bool = True,
    method: Method = "fast",
) -> PropagatorSample:
    """Cutoff propagator g^[eta](z, z'): k1 exact and Gauss in k2, or the 2D grid"""
    if eta < 0:
        raise InvalidSpec(f"eta must be >= 0, got {eta}", {"eta": eta})
    cp = couplings(t1s)
    grid = grid or QuadratureGrid()
    if method == "grid":
        weight = lambda D: np.exp(-eta * D)
        n = _grid_size(grid, z, zp, math.sqrt(eta))
        evaluate = lambda size: _grid_kernel(cp, z, zp, weight, size)
        bulk, edge = _self_converged(evaluate, n, grid.tolerance, "cutoff propagator") if check else evaluate(n)
        return PropagatorSample(z, zp, PropagatorKind.CUTOFF, bulk + edge, eta=eta, meta={"n_k": n})

    dx = z[0] - zp[0]
    parts = lambda n: _fold(lambda k: _cutoff_braces(cp, k, dx, eta), z, zp, n)
    bulk, edge, used = _fast(parts, _fast_nodes(grid, z, zp, eta), grid, check, "cutoff propagator")
    return PropagatorSample(z, zp, PropagatorKind.CUTOFF, bulk + edge, eta=eta, meta={"k2_nodes": used})


def scale_propagator(
    z: Point,
    zp: Point,
    h: int,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    check: bool = True,
    method: Method = "fast",
) -> PropagatorSample:
    """Single-scale propagator g^(h), eta integrated over the band of scale h"""
    grid = grid or QuadratureGrid()
    lo, hi = eta_band(h)
    bulk, edge, meta = _band(z, zp, lo, hi, t1s, grid, check, f"scale {h} propagator", method)
    return PropagatorSample(z, zp, PropagatorKind.SCALE, bulk + edge, h=h, meta=meta)


def bulk_edge_split(
    z: Point,
    zp: Point,
    h: int,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    check: bool = True,
    method: Method = "fast",
) -> Tuple[PropagatorSample, PropagatorSample]:
    """(g_inf^(h), g_E^(h)): bulk-term and image-term parts of g^(h)"""
    grid = grid or QuadratureGrid()
    lo, hi = eta_band(h)
    bulk, edge, meta = _band(z, zp, lo, hi, t1s, grid, check, f"scale {h} bulk-edge split", method)
    return (
        PropagatorSample(z, zp, PropagatorKind.INFINITE, bulk, h=h, meta=meta),
        PropagatorSample(z, zp, PropagatorKind.EDGE, edge, h=h, meta=dict(meta)),
    )


def full_critical_propagator(
    z: Point,
    zp: Point,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    method: Method = "fast",
) -> PropagatorSample:
    """
    Critical half-plane propagator, eta integrated over [0, inf)

    The fast path integrates k1 in closed form; the grid path integrates 1/D on
    the 2D midpoint grid and only converges algebraically.
    """
    grid = grid or QuadratureGrid()
    if method == "grid":
        cp = couplings(t1s)
        bulk, edge = _grid_kernel(cp, z, zp, lambda D: 1.0 / D, grid.n_k)
        return PropagatorSample(z, zp, PropagatorKind.FULL_CRITICAL, bulk + edge, meta={"n_k": grid.n_k})
    bulk, edge, nodes = _tail(z, zp, 0.0, t1s, grid, True, "full critical propagator")
    return PropagatorSample(z, zp, PropagatorKind.FULL_CRITICAL, bulk + edge, meta={"k2_nodes": nodes})


def infinite_plane_propagator(
    z: Point, zp: Point, t1s: float = ISOTROPIC_T, grid: Optional[QuadratureGrid] = None
) -> PropagatorSample:
    """Bulk (translation-invariant) part of the full critical propagator"""
    bulk, _, nodes = _tail(z, zp, 0.0, t1s, grid or QuadratureGrid(), True, "infinite-plane propagator")
    return PropagatorSample(z, zp, PropagatorKind.INFINITE, bulk, meta={"k2_nodes": nodes})


def edge_propagator(
    z: Point, zp: Point, t1s: float = ISOTROPIC_T, grid: Optional[QuadratureGrid] = None
) -> PropagatorSample:
    """Image part g_E = g_H - g_inf of the full critical propagator"""
    _, edge, nodes = _tail(z, zp, 0.0, t1s, grid or QuadratureGrid(), True, "edge propagator")
    return PropagatorSample(z, zp, PropagatorKind.EDGE, edge, meta={"k2_nodes": nodes})


def scale_le_propagator(
    z: Point,
    zp: Point,
    h: int,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    check: bool = True,
) -> PropagatorSample:
    """
    g^(<=h): eta over [2^(-2h-2), inf), integrated in closed form

    exp(-lo D)/D is split as the Bessel series of exp(-lo a (1 - cos k1)) over
    the k1 moments of 1/D, times exp(-lo b (1 - cos k2)). No band propagator
    enters, so the sum over scales can be checked against it.
    """
    grid = grid or QuadratureGrid()
    if h > 0:
        raise InvalidSpec(f"scale labels are <= 0, got {h}", {"h": h})
    lo = eta_band(h)[0] if h < 0 else 0.0
    bulk, edge, nodes = _tail(z, zp, lo, t1s, grid, check, f"scale <= {h} propagator")
    return PropagatorSample(z, zp, PropagatorKind.SCALE_LE, bulk + edge, h=h, meta={"k2_nodes": nodes})


def row_sum(z2: int, t1s: float = ISOTROPIC_T, grid: Optional[QuadratureGrid] = None) -> float:
    """
    sum over z1 of g_{H,-+}((0,1), (z1, z2)): the zero-momentum slice k1 = 0,
    2 (1-t^2)/b int dk/2pi cot(k/2) sin(k z2)
    """
    cp = couplings(t1s)
    if z2 <= 0:
        return 0.0
    grid = grid or QuadratureGrid()
    x, w = folded_nodes(grid.k2_nodes + 2 * z2)
    integrand = 2.0 * np.cos(0.5 * x) / np.sin(0.5 * x) * np.sin(x * z2)
    integral = float(np.dot(integrand, w)) / (2.0 * math.pi)
    return 2.0 * cp.mass / cp.b * integral


def propagator(
    kind: PropagatorKind,
    z: Point,
    zp: Point,
    h: Optional[int] = None,
    eta: Optional[float] = None,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
) -> PropagatorSample:
    """Evaluate any propagator kind; h or eta as the kind requires"""
    grid = grid or QuadratureGrid()
    if kind is PropagatorKind.MASSIVE:
        value = massive_propagator(z[0] - zp[0], t1s, grid)
        if z[1] != zp[1]:
            value = np.zeros((2, 2), dtype=complex)
        return PropagatorSample(z, zp, kind, value)
    if kind is PropagatorKind.CUTOFF:
        if eta is None:
            raise InvalidSpec("cutoff propagator needs eta")
        return cutoff_propagator(z, zp, eta, t1s, grid)
    if kind is PropagatorKind.FULL_CRITICAL:
        return full_critical_propagator(z, zp, t1s, grid)
    if h is None:
        if kind is PropagatorKind.INFINITE:
            return infinite_plane_propagator(z, zp, t1s, grid)
        if kind is PropagatorKind.EDGE:
            return edge_propagator(z, zp, t1s, grid)
        raise InvalidSpec(f"{kind.value} propagator needs a scale h")
    if kind is PropagatorKind.SCALE:
        return scale_propagator(z, zp, h, t1s, grid)
    if kind is PropagatorKind.SCALE_LE:
        return scale_le_propagator(z, zp, h, t1s, grid)
    bulk, edge = bulk_edge_split(z, zp, h, t1s, grid)
    return bulk if kind is PropagatorKind.INFINITE else edge


def evaluate_batch(
    requests: Sequence[dict],
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    workers: int = 1,
) -> List[PropagatorSample]:
    """Evaluate {kind, z, zp, h?, eta?} requests, preserving order"""
    grid = grid or QuadratureGrid()

    def one(request: dict) -> PropagatorSample:
        return propagator(
            PropagatorKind(request["kind"]),
            tuple(request["z"]),
            tuple(request["zp"]),
            request.get("h"),
            request.get("eta"),
            t1s,
            grid,
        )

    if workers <= 1:
        return [one(r) for r in requests]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, requests))


@dataclass(frozen=True)
class BoundFit:
    """||g^(h)(z, z)|| <= C 2^h: ratios per scale and their supremum"""
    constant: float
    ratios: Dict[int, float]


@dataclass(frozen=True)
class DecayRateFit:
    """Fitted c in ||g^(h)(z, z')|| ~ exp(-c 2^h |z - z'|) per scale, c0 = min"""
    c0: float
    rates: Dict[int, float]
    suppression: Dict[int, float]


def dimensional_bound_fit(
    h_values: Sequence[int],
    z: Point = (0, 1),
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
) -> BoundFit:
    """Coincident-point ratios ||g^(h)(z, z)|| / 2^h"""
    grid = grid or QuadratureGrid()
    ratios = {h: scale_propagator(z, z, h, t1s, grid).norm() / 2.0 ** h for h in h_values}
    constant = max(ratios.values())
    logger.info(f"Dimensional bound constant C={constant:.6g} over h={sorted(ratios)}")
    return BoundFit(constant, ratios)


def decay_rate_fit(
    h_values: Sequence[int],
    row: int = 1,
    t1s: float = ISOTROPIC_T,
    grid: Optional[QuadratureGrid] = None,
    steps: int = 4,
) -> DecayRateFit:
    """
    Least-squares slope of log||g^(h)|| against 2^h |dx| for dx = 0 .. steps 2^(-h)
    """
    grid = grid or QuadratureGrid()
    rates, suppression = {}, {}
    for h in h_values:
        unit = 2 ** (-h)
        distances = np.arange(steps + 1) * unit
        norms = [scale_propagator((int(r), row), (0, row), h, t1s, grid).norm() for r in distances]
        slope, _ = np.polyfit(distances * 2.0 ** h, np.log(norms), 1)
        rates[h] = float(-slope)
        suppression[h] = norms[-1] / norms[0]
    c0 = min(rates.values())
    logger.info(f"Decay rate fit c0={c0:.6g}")
    return DecayRateFit(c0, rates, suppression)
