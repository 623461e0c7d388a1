"""
Tests for the scaling-limit diagnostics
"""
import math

import pytest

from boundary_ising.errors import FitRejected, InvalidSpec, InvalidTuple
from boundary_ising.perturbation import closed_forms
from boundary_ising.scaling import (
    AMPLITUDE_TOLERANCE,
    EXPONENT_TOLERANCE,
    ISOTROPIC_AMPLITUDE,
    DecayFit,
    chord,
    continuum_two_point,
    pfaffian_limit_check,
    two_point_decay,
    universality_probe,
)


def test_chord_distance():
    """Test the plane and cylinder boundary distances"""
    assert chord(3) == 3.0
    assert chord(2, 8) == pytest.approx(8.0 / math.pi * math.sqrt(2.0) / 2.0)
    assert chord(1, 1000) == pytest.approx(1.0, rel=1e-5)


def test_continuum_two_point():
    """Test A / chord and the coincident-point error"""
    assert continuum_two_point(2.0) == pytest.approx(ISOTROPIC_AMPLITUDE / 2.0)
    assert ISOTROPIC_AMPLITUDE == pytest.approx(0.7685, abs=1e-4)

    with pytest.raises(InvalidTuple):
        continuum_two_point(0.0, 4.0)


def test_decay_rejects_bad_separations():
    """Test separations beyond L/4 and too few separations"""
    with pytest.raises(InvalidSpec):
        two_point_decay(16, 16, [2, 5])
    with pytest.raises(InvalidSpec):
        two_point_decay(16, 16, [2])
    with pytest.raises(InvalidSpec):
        two_point_decay(32, 4, [2, 6])


def test_decay_fit_rejected_below_threshold():
    """Test a fit is rejected when r^2 cannot reach the threshold"""
    with pytest.raises(FitRejected) as exc_info:
        two_point_decay(32, 16, [2, 4, 8], threshold=1.1)

    assert exc_info.value.code == "fit_rejected"
    assert 0.0 < exc_info.value.context["r_squared"] <= 1.0


def test_decay_fit_on_small_cylinder():
    """Test the fit record on a small critical cylinder"""
    fit = two_point_decay(32, 16, [2, 4, 8], threshold=0.9)

    assert fit.separations == [2, 4, 8]
    assert all(v > 0 for v in fit.values)
    assert fit.values == sorted(fit.values, reverse=True)
    assert fit.exponent < 0
    assert len(fit.fit_values()) == 3


def test_amplitude_error_is_relative():
    """Test the amplitude deviation is taken relative to the reference"""
    fit = DecayFit(
        separations=[4, 8],
        values=[0.2, 0.1],
        exponent=-1.0,
        amplitude=1.01 * ISOTROPIC_AMPLITUDE,
        r_squared=1.0,
        L=64,
        M=64,
        t1=math.sqrt(2.0) - 1.0,
    )

    assert fit.amplitude_error() == pytest.approx(0.01)
    assert fit.model_copy(update={"amplitude": 0.5 * ISOTROPIC_AMPLITUDE}).amplitude_error() == pytest.approx(0.5)


@pytest.mark.slow
def test_decay_exponent_and_amplitude():
    """Test the boundary spin two-point function decays like A/x with the isotropic A"""
    fit = two_point_decay(128, 128, [8, 12, 16, 24, 32], workers=4)

    assert abs(fit.exponent + 1.0) <= EXPONENT_TOLERANCE
    assert fit.amplitude_error() <= AMPLITUDE_TOLERANCE
    assert fit.r_squared >= 0.999


def test_limit_check_rejects_bad_positions():
    """Test odd counts and coincident continuum points"""
    with pytest.raises(InvalidTuple):
        pfaffian_limit_check([0, 1, 2], [0.5])
    with pytest.raises(InvalidTuple):
        pfaffian_limit_check([0, 4], [0.5], L0=4)


@pytest.mark.slow
def test_limit_check_ladder_converges():
    """Test the rescaled two-point function approaches the continuum value"""
    ladder = pfaffian_limit_check([0, 2], [0.5, 0.25])

    assert [p.L for p in ladder] == [8, 16]
    assert [p.M for p in ladder] == [16, 32]
    assert ladder[0].continuum == pytest.approx(ISOTROPIC_AMPLITUDE / chord(2, 4))
    assert ladder[1].residual < ladder[0].residual
    assert all(p.wick_residual is None for p in ladder)


@pytest.mark.slow
def test_universality_probe_table():
    """Test the ratio table at lambda = 0 and its predictions"""
    table = universality_probe(lambda_values=(-0.05, 0.05))
    zspin1 = closed_forms()["Zspin1"]

    assert [row.lam for row in table.rows] == [-0.05, 0.0, 0.05]
    assert table.rows[1].ratio == 1.0
    for row in table.rows:
        assert row.predicted == pytest.approx(1.0 + 2.0 * zspin1 * row.lam)
        assert row.value > 0
    assert table.sites == ["l:0", "l:2"]
