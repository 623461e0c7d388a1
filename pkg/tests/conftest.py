"""
Test configuration
"""
import pytest

from boundary_ising.lattice import BoundaryCondition, LatticeSpec
from boundary_ising.propagators import QuadratureGrid


@pytest.fixture
def small_spec():
    """3 x 2 cylinder, anisotropic, periodic spins"""
    return LatticeSpec(L=3, M=2, t1=0.4, t2=0.3)


@pytest.fixture(params=[BoundaryCondition.PERIODIC, BoundaryCondition.ANTIPERIODIC], ids=["p", "a"])
def tau(request):
    """Both horizontal spin boundary conditions"""
    return request.param


@pytest.fixture
def coarse_grid():
    """Quadrature grid small enough for fast propagator tests"""
    return QuadratureGrid(n_k=128, k2_nodes=64)


@pytest.fixture
def brute_reference():
    """Enumeration reference for partition functions and correlations"""
    from boundary_ising import oracle
    return oracle
