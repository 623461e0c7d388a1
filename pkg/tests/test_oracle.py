"""
Tests for the enumeration and transfer-matrix references
"""
import math

import pytest
from pydantic import ValidationError

from boundary_ising.errors import RangeTooLarge, TooLarge
from boundary_ising.lattice import AuxPair, BoundaryCondition, BoundarySite, BoundaryTuple, LatticeSpec
from boundary_ising.oracle import (
    InteractionSpec,
    InteractionTerm,
    brute_correlation,
    brute_partition,
    contributions,
    transfer_matrix_partition,
)


def test_ring_partition_closed_form():
    """Test a one-row cylinder is the periodic or antiperiodic Ising ring"""
    t = 0.6
    K = math.atanh(t)
    for tau, sign in ((BoundaryCondition.PERIODIC, 1), (BoundaryCondition.ANTIPERIODIC, -1)):
        spec = LatticeSpec(L=5, M=1, t1=t, t2=0.3, tau=tau)
        expected = (2 * math.cosh(K)) ** 5 + sign * (2 * math.sinh(K)) ** 5

        assert brute_partition(spec).log_abs == pytest.approx(math.log(expected), rel=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.15, -0.1])
def test_transfer_matches_enumeration(lam, tau):
    """Test the row transfer matrix against enumeration"""
    spec = LatticeSpec(L=3, M=5, t1=0.4, t2=0.3, tau=tau)
    inter = InteractionSpec.vertical_next_nearest(lam)

    brute = brute_partition(spec, inter, workers=2)
    transfer = transfer_matrix_partition(spec, inter, block=64)

    assert transfer.log_abs == pytest.approx(brute.log_abs, rel=1e-12)


def test_transfer_with_same_side_aux():
    """Test auxiliary arcs in the transfer matrix"""
    spec = LatticeSpec(L=4, M=3, t1=0.4, t2=0.3)
    pairs = [AuxPair(BoundarySite.parse("l:0"), BoundarySite.parse("l:2"), 0.3)]

    assert transfer_matrix_partition(spec, aux_pairs=pairs).log_abs == pytest.approx(
        brute_partition(spec, aux_pairs=pairs).log_abs, rel=1e-12
    )


def test_transfer_rejects_crossing_and_range():
    """Test limits of the transfer matrix"""
    spec = LatticeSpec(L=3, M=3, t1=0.4, t2=0.3)
    crossing = [AuxPair(BoundarySite.parse("l:0"), BoundarySite.parse("u:0"), 0.3)]
    tall = InteractionSpec(lam=0.1, terms=[InteractionTerm(offsets=[(0, -2), (0, 1)])], r_max=2)

    with pytest.raises(RangeTooLarge):
        transfer_matrix_partition(spec, aux_pairs=crossing)
    with pytest.raises(RangeTooLarge):
        transfer_matrix_partition(spec, tall)
    with pytest.raises(TooLarge):
        transfer_matrix_partition(LatticeSpec(L=13, M=2, t1=0.4, t2=0.3))


def test_two_row_state_limit_is_reported():
    """Test a three-row interaction beyond the two-row limit names the limit and the fallback"""
    spec = LatticeSpec(L=8, M=3, t1=0.4, t2=0.3)

    with pytest.raises(TooLarge) as raised:
        transfer_matrix_partition(spec, InteractionSpec.vertical_next_nearest(0.1))

    assert raised.value.context["max_L"] == 7
    assert raised.value.context["state_size"] == 1 << 16
    assert "enumeration" in raised.value.message


def test_nearest_row_transfer_reaches_twelve_columns():
    """Test the one-row state handles L = 12 and agrees with the Pfaffian formula"""
    from boundary_ising.kasteleyn import partition_function

    spec = LatticeSpec(L=12, M=2, t1=0.4, t2=0.3)

    assert transfer_matrix_partition(spec).log_abs == pytest.approx(
        partition_function(spec).log_abs, rel=1e-10
    )


def test_enumeration_size_limit():
    """Test enumeration refuses more than 24 spins"""
    with pytest.raises(TooLarge):
        brute_partition(LatticeSpec(L=5, M=5, t1=0.4, t2=0.3))


def test_two_point_on_single_row():
    """Test <sigma_0 sigma_r> on a periodic ring"""
    t = 0.5
    spec = LatticeSpec(L=6, M=1, t1=t, t2=0.3)
    expected = (t ** 2 + t ** 4) / (1 + t ** 6)

    value = brute_correlation(spec, BoundaryTuple.parse("l:0,l:2"))

    assert value == pytest.approx(expected, rel=1e-12)


def test_odd_correlation_is_zero():
    """Test odd spin products vanish"""
    spec = LatticeSpec(L=3, M=2, t1=0.4, t2=0.3)

    assert brute_correlation(spec, BoundaryTuple.parse("l:0,l:1,u:2")) == 0.0
    assert brute_correlation(spec, BoundaryTuple(())) == 1.0


def test_interaction_validation():
    """Test interaction sets must be even, distinct and in range"""
    with pytest.raises(ValidationError):
        InteractionTerm(offsets=[(0, 1)])
    with pytest.raises(ValidationError):
        InteractionTerm(offsets=[(0, 1), (0, 1)])
    with pytest.raises(ValidationError):
        InteractionSpec(lam=0.1, terms=[InteractionTerm(offsets=[(0, 0), (0, 3)])], r_max=2)


def test_interaction_placements_stay_in_rows():
    """Test placements leaving the cylinder are dropped"""
    spec = LatticeSpec(L=4, M=3, t1=0.4, t2=0.3)
    terms = contributions(spec, InteractionSpec.vertical_next_nearest(0.2), spec.beta)
    spanning = [c for c in terms if abs(c.sites[0][1] - c.sites[1][1]) == 2]

    assert len(spanning) == spec.L
    assert all(c.coefficient == pytest.approx(0.2 * spec.beta) for c in spanning)
    assert InteractionSpec.vertical_next_nearest(0.2).vertical_span == 2
