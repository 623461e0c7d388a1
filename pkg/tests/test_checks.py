"""
Tests for the named verification checks
"""
import math

import pytest

from boundary_ising import checks
from boundary_ising.checks import DRAWS, REGISTRY, CheckResult, _correlation_tuples, run_checks
from boundary_ising.errors import MissingInput, SumNotConverged
from boundary_ising.lattice import BoundaryTuple
from boundary_ising.scaling import ISOTROPIC_AMPLITUDE, DecayFit


def test_registry_order():
    """Test every check is registered in its run order"""
    assert list(REGISTRY) == [
        "orientation", "partition", "correlations", "factorization",
        "cancellation", "telescoping", "constants", "scaling", "universality",
    ]


def test_orientation_check_passes():
    """Test the orientation check on the small cylinders"""
    results = run_checks(["orientation"])

    assert len(results) == 1
    assert results[0].passed
    assert results[0].value == 0.0


def test_partition_check_is_seeded():
    """Test the partition check passes and repeats under one seed"""
    first = run_checks(["partition"], seed=7)[0]
    second = run_checks(["partition"], seed=7)[0]

    assert first.passed
    assert first.value == second.value


def test_unknown_check():
    """Test an unknown name raises MissingInput"""
    with pytest.raises(MissingInput) as exc_info:
        run_checks(["orientation", "nope"])

    assert "orientation" in exc_info.value.context["available"]


def test_raising_check_becomes_failure(monkeypatch):
    """Test a check raising IsingError is reported as a failed result"""
    def boom(rng, workers):
        raise SumNotConverged("diverged", {"step": 3})

    monkeypatch.setitem(REGISTRY, "boom", boom)

    result = run_checks(["boom"])[0]

    assert not result.passed
    assert math.isnan(result.value)
    assert result.detail["error"]["code"] == "sum_not_converged"


def test_check_result_to_dict():
    """Test the serialized check result"""
    result = CheckResult("x", True, 0.5, 1.0, {"n": 2})

    assert result.to_dict() == {
        "name": "x", "passed": True, "value": 0.5, "threshold": 1.0, "detail": {"n": 2},
    }


def test_correlation_tuples_cover_lower_and_mixed():
    """Test the correlation check grows its tuples with the circumference"""
    small, large = _correlation_tuples(2), _correlation_tuples(4)

    assert DRAWS == 10
    assert set(small) < set(large)
    assert "l:0,l:1,l:2,l:3" in large
    assert all(len(BoundaryTuple.parse(text).sites) in (2, 4) for text in large)
    assert any(text.startswith("l:") and "u:" in text for text in small)


@pytest.mark.parametrize("amplitude_factor,passed", [(1.005, True), (1.05, False), (2.0, False)])
def test_scaling_check_gates_on_amplitude(monkeypatch, amplitude_factor, passed):
    """Test an exponent of -1 alone does not pass the scaling check"""
    def fit(L, M, separations, workers=1):
        return DecayFit(
            separations=separations,
            values=[1.0 / x for x in separations],
            exponent=-1.0,
            amplitude=amplitude_factor * ISOTROPIC_AMPLITUDE,
            r_squared=1.0,
            L=L,
            M=M,
            t1=math.sqrt(2.0) - 1.0,
        )

    monkeypatch.setattr(checks, "two_point_decay", fit)

    result = run_checks(["scaling"])[0]

    assert result.passed is passed
    assert result.detail["amplitude_error"] == pytest.approx(amplitude_factor - 1.0)
    assert result.detail["reference_amplitude"] == ISOTROPIC_AMPLITUDE
