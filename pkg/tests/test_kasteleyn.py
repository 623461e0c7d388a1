"""
Tests for action assembly and Pfaffian partition functions
"""
import math

import numpy as np
import pytest

from boundary_ising.errors import MultipleCrossings
from boundary_ising.kasteleyn import (
    SECTOR_COEFFICIENTS,
    assemble_action,
    combine_sectors,
    generating_derivative,
    partition_function,
    partition_ratio,
    prefactor,
    torus_partition_pfaffians,
)
from boundary_ising.lattice import AuxPair, BoundaryCondition, BoundarySite, BoundaryTuple, LatticeSpec
from boundary_ising.oracle import brute_correlation, brute_partition
from boundary_ising.pfaffian import SignedLogValue


def site(text):
    return BoundarySite.parse(text)


@pytest.mark.parametrize("L,M", [(2, 2), (3, 2), (3, 3), (4, 2), (4, 3)])
def test_partition_matches_enumeration(L, M, tau):
    """Test the Pfaffian formula against exhaustive enumeration"""
    spec = LatticeSpec(L=L, M=M, t1=0.45, t2=0.25, tau=tau)

    value = partition_function(spec)
    reference = brute_partition(spec)

    assert value.sign == 1
    assert value.log_abs == pytest.approx(reference.log_abs, rel=1e-10)


def test_action_is_antisymmetric_with_expected_size(small_spec):
    """Test the reduced action has four fields per site"""
    action = assemble_action(small_spec)
    dense = action.matrix.to_dense()

    assert action.n == 4 * small_spec.n_sites
    assert np.allclose(dense, -dense.T)
    assert action.grassmann_bc is small_spec.grassmann_bc


def test_prefactor_parity():
    """Test the (-1)^(LM) parity and log C"""
    spec = LatticeSpec(L=3, M=1, t1=0.4, t2=0.3)
    pre = prefactor(spec)

    assert pre.parity_sign == -1
    assert pre.log_value == pytest.approx(3 * math.log(2.0 * math.cosh(math.atanh(0.4))))


def test_same_side_aux_couplings(tau):
    """Test lower and upper arcs against enumeration"""
    spec = LatticeSpec(L=4, M=3, t1=0.35, t2=0.3, tau=tau)
    pairs = [AuxPair(site("l:0"), site("l:2"), 0.3), AuxPair(site("u:1"), site("u:3"), -0.2)]

    value = partition_function(spec, pairs)
    reference = brute_partition(spec, aux_pairs=pairs)

    assert value.log_abs == pytest.approx(reference.log_abs, rel=1e-10)


def test_crossing_aux_coupling(tau):
    """Test the four-sector half-sum against enumeration"""
    spec = LatticeSpec(L=3, M=2, t1=0.4, t2=0.3, tau=tau)
    pairs = [AuxPair(site("l:0"), site("u:1"), 0.25)]

    value = partition_function(spec, pairs, workers=2)
    reference = brute_partition(spec, aux_pairs=pairs)

    assert value.sign == 1
    assert value.log_abs == pytest.approx(reference.log_abs, rel=1e-10)


def test_sector_pfaffians_cover_all_sectors(small_spec):
    """Test the four sectors are computed and combined"""
    pairs = [AuxPair(site("l:0"), site("u:0"), 0.2)]
    pfaffians = torus_partition_pfaffians(small_spec, pairs)

    assert set(pfaffians) == set(SECTOR_COEFFICIENTS)
    assert not combine_sectors(pfaffians).is_zero


def test_combine_sectors_half_sum():
    """Test the signed half-sum with c_{++} = -1"""
    pfaffians = {key: SignedLogValue.from_float(v) for key, v in zip(SECTOR_COEFFICIENTS, (1.0, 2.0, 3.0, 4.0))}
    expected = 0.5 * sum(SECTOR_COEFFICIENTS[k] * v.value for k, v in pfaffians.items())

    assert combine_sectors(pfaffians).value == pytest.approx(expected)


def test_two_crossings_rejected(small_spec):
    """Test at most one lower-upper pair"""
    pairs = [AuxPair(site("l:0"), site("u:0"), 0.2), AuxPair(site("l:1"), site("u:1"), 0.2)]

    with pytest.raises(MultipleCrossings):
        partition_function(small_spec, pairs)


def test_partition_ratio_matches_enumeration():
    """Test Z^(-tau) / Z^(tau)"""
    spec = LatticeSpec(L=3, M=2, t1=0.4, t2=0.3)
    other = spec.with_tau(BoundaryCondition.ANTIPERIODIC)
    expected = math.exp(brute_partition(other).log_abs - brute_partition(spec).log_abs)

    assert partition_ratio(spec) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("pair", ["l:0,l:2", "l:1,u:2"])
def test_generating_derivative_is_two_point(pair):
    """Test d log Z / d t~ at zero equals the boundary two-point function"""
    spec = LatticeSpec(L=4, M=2, t1=0.4, t2=0.3)
    sites = BoundaryTuple.parse(pair)

    derivative = generating_derivative(spec, *sites.sites)

    assert derivative == pytest.approx(brute_correlation(spec, sites), abs=1e-7)


@pytest.mark.parametrize("pairs", [
    ["l:1-u:2"],
    ["l:3-u:0"],
    ["l:3-u:1", "l:0-l:2"],
    ["l:0-u:3", "u:0-u:2"],
])
def test_crossing_pair_with_arcs_matches_enumeration(pairs, tau):
    """Test crossing pairs on distinct columns, alone and beside same-side arcs"""
    spec = LatticeSpec(L=4, M=3, t1=0.35, t2=0.3, tau=tau)
    aux = [AuxPair(site(p.split("-")[0]), site(p.split("-")[1]), 0.25) for p in pairs]

    value = partition_function(spec, aux)
    reference = brute_partition(spec, aux_pairs=aux)

    assert value.sign == 1
    assert value.log_abs == pytest.approx(reference.log_abs, rel=1e-10)


@pytest.mark.parametrize("pair", ["u:0,u:3", "l:1,l:2", "l:0,u:3", "l:3,u:1"])
def test_generating_derivative_other_pairs(pair):
    """Test the generating derivative for adjacent, far and wrapped pairs"""
    spec = LatticeSpec(L=4, M=3, t1=0.35, t2=0.3)
    sites = BoundaryTuple.parse(pair)

    derivative = generating_derivative(spec, *sites.sites)

    assert derivative == pytest.approx(brute_correlation(spec, sites), abs=1e-7)
