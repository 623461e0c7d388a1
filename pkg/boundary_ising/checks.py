"""
Named verification checks behind `cli.py check`

Each check returns a CheckResult; randomised draws come from a seeded
numpy Generator so repeated runs are identical.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from boundary_ising.correlations import BoundaryCorrelator, pfaffian_factorization_residual
from boundary_ising.errors import IsingError, MissingInput
from boundary_ising.kasteleyn import partition_function
from boundary_ising.lattice import (
    BoundaryCondition,
    BoundarySite,
    BoundaryTuple,
    LatticeSpec,
    Side,
    build_decorated_graph,
    verify_clockwise_odd,
)
from boundary_ising.logger import get_logger
from boundary_ising.oracle import brute_correlation, brute_partition
from boundary_ising.perturbation import zspin_first_order
from boundary_ising.propagators import (
    QuadratureGrid,
    full_critical_propagator,
    scale_le_propagator,
    scale_propagator,
)
from boundary_ising.scaling import AMPLITUDE_TOLERANCE, EXPONENT_TOLERANCE, two_point_decay, universality_probe

logger = get_logger(__name__)

# random coupling draws per (L, M, tau) in the oracle comparisons
DRAWS = 10


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


CheckFn = Callable[[np.random.Generator, int], CheckResult]
REGISTRY: Dict[str, CheckFn] = {}


def register(name: str) -> Callable[[CheckFn], CheckFn]:
    def wrap(fn: CheckFn) -> CheckFn:
        REGISTRY[name] = fn
        return fn
    return wrap


def _draw_couplings(rng: np.random.Generator) -> tuple:
    t1, t2 = rng.uniform(0.1, 0.9, size=2)
    return float(t1), float(t2)


@register("orientation")
def check_orientation(rng: np.random.Generator, workers: int) -> CheckResult:
    """Every bounded face of the decorated cylinder is clockwise-odd"""
    violations = 0
    for L, M in ((2, 1), (3, 2), (4, 3)):
        for tau in BoundaryCondition:
            spec = LatticeSpec.checked(L=L, M=M, t1=0.4, t2=0.3, tau=tau)
            violations += len(verify_clockwise_odd(build_decorated_graph(spec)))
    return CheckResult("orientation", violations == 0, float(violations), 0.0)


@register("partition")
def check_partition(rng: np.random.Generator, workers: int) -> CheckResult:
    """Pfaffian log Z against enumeration, relative error"""
    worst = 0.0
    for L in (2, 3, 4):
        for M in (2, 3):
            for tau in BoundaryCondition:
                for _ in range(DRAWS):
                    t1, t2 = _draw_couplings(rng)
                    spec = LatticeSpec.checked(L=L, M=M, t1=t1, t2=t2, tau=tau)
                    pf = partition_function(spec).log_abs
                    brute = brute_partition(spec, workers=workers).log_abs
                    worst = max(worst, abs(pf - brute) / abs(brute))
    return CheckResult("partition", worst <= 1e-10, worst, 1e-10, {"draws": DRAWS})


def _correlation_tuples(L: int) -> List[str]:
    """m = 2 and m = 4 tuples, lower and mixed, that fit on circumference L"""
    tuples = ["l:0,l:1", "l:0,u:1", "u:0,u:1", "l:0,l:1,u:0,u:1"]
    if L >= 3:
        tuples += ["l:0,l:1,l:2,u:0", "l:0,u:0,u:1,u:2"]
    if L >= 4:
        tuples += ["l:0,l:1,l:2,l:3", "l:0,l:2,u:1,u:3"]
    return tuples


@register("correlations")
def check_correlations(rng: np.random.Generator, workers: int) -> CheckResult:
    """Lower and mixed boundary correlations against enumeration"""
    worst = 0.0
    for L in (2, 3, 4):
        for M in (2, 3):
            for tau in BoundaryCondition:
                for _ in range(DRAWS):
                    t1, t2 = _draw_couplings(rng)
                    spec = LatticeSpec.checked(L=L, M=M, t1=t1, t2=t2, tau=tau)
                    correlator = BoundaryCorrelator(spec)
                    for text in _correlation_tuples(L):
                        sites = BoundaryTuple.parse(text)
                        value = correlator.correlation(sites).value
                        worst = max(worst, abs(value - brute_correlation(spec, sites, workers=workers)))
    return CheckResult("correlations", worst <= 1e-10, worst, 1e-10, {"draws": DRAWS})


@register("factorization")
def check_factorization(rng: np.random.Generator, workers: int) -> CheckResult:
    """Pfaffian structure of lower-boundary correlations on L=12, M=6"""
    spec = LatticeSpec.checked(L=12, M=6, t1=0.4, t2=0.35)
    correlator = BoundaryCorrelator(spec, workers=workers)
    worst = 0.0
    for m in (4, 6):
        columns = sorted(rng.choice(spec.L, size=m, replace=False).tolist())
        worst = max(worst, pfaffian_factorization_residual(spec, BoundaryTuple.lower(columns), correlator))
    return CheckResult("factorization", worst <= 1e-9, worst, 1e-9)


@register("cancellation")
def check_cancellation(rng: np.random.Generator, workers: int) -> CheckResult:
    """Propagator components that vanish on the fictitious row z2 = 0"""
    grid = QuadratureGrid()
    worst = 0.0
    for _ in range(20):
        dx = int(rng.integers(-4, 5))
        row = int(rng.integers(1, 5))
        h = int(rng.integers(-2, 1))
        low = scale_propagator((dx, 0), (0, row), h, grid=grid)
        high = scale_propagator((dx, row), (0, 0), h, grid=grid)
        values = (
            low.component("+", "+"), low.component("+", "-"),
            high.component("+", "+"), high.component("-", "+"),
        )
        worst = max(worst, max(abs(v) for v in values))
    return CheckResult("cancellation", worst <= 1e-8, worst, 1e-8)


@register("telescoping")
def check_telescoping(rng: np.random.Generator, workers: int) -> CheckResult:
    """
    g^(<=h) plus the scales above h rebuild the full propagator

    g^(<=h) integrates eta over [2^(-2h-2), inf) in closed form; each g^(j)
    integrates its band by Gauss-Legendre in eta, so the sum is a real test.
    """
    grid = QuadratureGrid()
    h = -3
    worst = 0.0
    for _ in range(10):
        z = (int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
        zp = (0, int(rng.integers(1, 4)))
        total = scale_le_propagator(z, zp, h, grid=grid).value
        for j in range(h + 1, 1):
            total = total + scale_propagator(z, zp, j, grid=grid).value
        full = full_critical_propagator(z, zp, grid=grid).value
        worst = max(worst, float(np.abs(total - full).max()))
    return CheckResult("telescoping", worst <= 1e-7, worst, 1e-7)


@register("constants")
def check_constants(rng: np.random.Generator, workers: int) -> CheckResult:
    """First-order constants: quadrature against closed form"""
    report = zspin_first_order(workers=workers)
    worst = max(report.residuals.values())
    return CheckResult("constants", worst <= 1e-6, worst, 1e-6, {"residuals": report.residuals})


@register("scaling")
def check_scaling(rng: np.random.Generator, workers: int) -> CheckResult:
    """Boundary two-point exponent and amplitude on the 128 x 128 critical cylinder"""
    fit = two_point_decay(128, 128, [8, 12, 16, 24, 32], workers=workers)
    deviation = abs(fit.exponent + 1.0)
    amplitude_error = fit.amplitude_error()
    passed = deviation <= EXPONENT_TOLERANCE and amplitude_error <= AMPLITUDE_TOLERANCE
    detail = {
        "exponent": fit.exponent,
        "amplitude": fit.amplitude,
        "reference_amplitude": fit.reference_amplitude,
        "amplitude_error": amplitude_error,
        "r_squared": fit.r_squared,
    }
    return CheckResult("scaling", passed, max(deviation, amplitude_error), EXPONENT_TOLERANCE, detail)


@register("universality")
def check_universality(rng: np.random.Generator, workers: int) -> CheckResult:
    """Ratio table is close to linear in lambda"""
    table = universality_probe(workers=workers)
    ratio = abs(table.second_difference) / max(abs(table.first_difference), 1e-300)
    return CheckResult("universality", ratio <= 0.2, ratio, 0.2)


def run_checks(names: Optional[List[str]] = None, seed: int = 0, workers: int = 1) -> List[CheckResult]:
    """
    Run registered checks in registry order, or the named subset

    Raises:
        MissingInput: unknown check name
    """
    selected = list(REGISTRY) if not names or names == ["all"] else names
    unknown = [n for n in selected if n not in REGISTRY]
    if unknown:
        raise MissingInput(f"unknown checks: {', '.join(unknown)}", {"available": list(REGISTRY)})
    rng = np.random.default_rng(seed)
    results = []
    for name in selected:
        try:
            result = REGISTRY[name](rng, workers)
        except IsingError as e:
            logger.error(f"Check {name} raised {e.code}: {e.message}")
            result = CheckResult(name, False, math.nan, math.nan, {"error": e.to_dict()})
        logger.info(f"Check {name}: {'pass' if result.passed else 'FAIL'} ({result.value:.3e})")
        results.append(result)
    return results
