"""
Timing and outcome metrics for solver operations
"""
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, List
from threading import Lock


@dataclass
class ComputationMetrics:
    """
    Thread-safe metrics collector
    Tracks calls, failures and latencies per operation
    """
    total_calls: int = 0
    failed_calls: int = 0
    calls: Dict[str, int] = field(default_factory=dict)
    latencies: Dict[str, List[float]] = field(default_factory=dict)
    start_time: float = field(default_factory=time.time)
    _lock: Lock = field(default_factory=Lock)

    def record(self, operation: str, latency_ms: float, success: bool = True):
        """
        Record one operation call with its latency and status

        Args:
            operation: Operation name
            latency_ms: Processing time in milliseconds
            success: Whether the call succeeded
        """
        with self._lock:
            self.total_calls += 1
            if not success:
                self.failed_calls += 1
            self.calls[operation] = self.calls.get(operation, 0) + 1

            samples = self.latencies.setdefault(operation, [])
            samples.append(latency_ms)

            # Keep only last 1000 latencies per operation
            if len(samples) > 1000:
                self.latencies[operation] = samples[-1000:]

    @contextmanager
    def timed(self, operation: str) -> Iterator[None]:
        """Time the enclosed block and record it under `operation`"""
        start = time.perf_counter()
        success = True
        try:
            yield
        except Exception:
            success = False
            raise
        finally:
            self.record(operation, (time.perf_counter() - start) * 1000.0, success)

    def get_stats(self) -> dict:
        """
        Get current metrics statistics

        Returns:
            Dictionary with totals and per-operation latency summaries
        """
        with self._lock:
            operations = {}
            for name, samples in sorted(self.latencies.items()):
                operations[name] = {
                    'calls': self.calls[name],
                    'window': len(samples),
                    'average_latency_ms': round(sum(samples) / len(samples), 2),
                    'min_latency_ms': round(min(samples), 2),
                    'max_latency_ms': round(max(samples), 2),
                }

            return {
                'total_calls': self.total_calls,
                'failed_calls': self.failed_calls,
                'success_rate': (
                    (self.total_calls - self.failed_calls) / self.total_calls * 100
                    if self.total_calls > 0 else 0.0
                ),
                'operations': operations,
                'uptime_seconds': round(time.time() - self.start_time, 2)
            }

    def reset(self):
        """Reset all metrics"""
        with self._lock:
            self.total_calls = 0
            self.failed_calls = 0
            self.calls = {}
            self.latencies = {}
            self.start_time = time.time()
