"""
Tests for metrics collection
"""
import pytest

from boundary_ising.metrics import ComputationMetrics


def test_metrics_initialization():
    """Test metrics collector initialization"""
    metrics = ComputationMetrics()

    assert metrics.total_calls == 0
    assert metrics.failed_calls == 0
    assert metrics.calls == {}
    assert len(metrics.latencies) == 0


def test_record_successful_call():
    """Test recording a successful call"""
    metrics = ComputationMetrics()

    metrics.record("partition", latency_ms=100.5, success=True)

    assert metrics.total_calls == 1
    assert metrics.failed_calls == 0
    assert 100.5 in metrics.latencies["partition"]


def test_record_failed_call():
    """Test recording a failed call"""
    metrics = ComputationMetrics()

    metrics.record("zspin", latency_ms=50.0, success=False)

    assert metrics.total_calls == 1
    assert metrics.failed_calls == 1


def test_get_stats():
    """Test retrieving statistics"""
    metrics = ComputationMetrics()

    metrics.record("partition", 100.0, True)
    metrics.record("partition", 200.0, True)
    metrics.record("correlate", 150.0, False)

    stats = metrics.get_stats()

    assert stats['total_calls'] == 3
    assert stats['failed_calls'] == 1
    assert stats['success_rate'] == pytest.approx(200.0 / 3.0)
    assert stats['operations']['partition']['calls'] == 2
    assert stats['operations']['partition']['average_latency_ms'] == 150.0
    assert stats['operations']['partition']['min_latency_ms'] == 100.0
    assert stats['operations']['partition']['max_latency_ms'] == 200.0
    assert stats['operations']['correlate']['calls'] == 1


def test_timed_records_failure():
    """Test the timing context marks raised exceptions as failures"""
    metrics = ComputationMetrics()

    with metrics.timed("ok"):
        pass
    with pytest.raises(ValueError):
        with metrics.timed("broken"):
            raise ValueError("boom")

    assert metrics.total_calls == 2
    assert metrics.failed_calls == 1
    assert set(metrics.latencies) == {"ok", "broken"}


def test_latency_window_is_bounded():
    """Test only the most recent latencies are kept"""
    metrics = ComputationMetrics()

    for i in range(1005):
        metrics.record("scan", float(i))

    assert len(metrics.latencies["scan"]) == 1000
    assert metrics.latencies["scan"][0] == 5.0


def test_call_count_outlives_latency_window():
    """Test per-operation calls keep counting past the latency window"""
    metrics = ComputationMetrics()

    for i in range(1005):
        metrics.record("scan", float(i))
    stats = metrics.get_stats()['operations']['scan']

    assert stats['calls'] == 1005
    assert stats['window'] == 1000
    assert stats['min_latency_ms'] == 5.0


def test_reset_metrics():
    """Test resetting metrics"""
    metrics = ComputationMetrics()

    metrics.record("partition", 100.0, True)
    metrics.reset()

    assert metrics.total_calls == 0
    assert metrics.failed_calls == 0
    assert len(metrics.latencies) == 0
