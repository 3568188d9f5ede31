#!/usr/bin/env python3
"""
Run metrics for asdgic-lattice subcommands.

Tracks wall time, outcome, trial counts and resident memory of each CLI
operation. Metrics are logged as a summary and optionally appended to a
JSON file.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import psutil

from utils import safe_open

logger = logging.getLogger(__name__)

BYTES_PER_MB = 1024 * 1024


@dataclass
class OperationMetrics:
    """Metrics for a single operation execution.

    Attributes:
        operation_name: Subcommand or library call being timed
        start_time: ISO timestamp when operation started
        end_time: ISO timestamp when operation ended
        duration_seconds: Total execution time in seconds
        success: Whether operation completed successfully
        error_message: Error message if operation failed
        trials: Monte-Carlo trials performed, if any
        memory_usage_mb: Growth of resident memory in MB
    """

    operation_name: str
    start_time: str
    end_time: str
    duration_seconds: float
    success: bool
    error_message: Optional[str] = None
    trials: Optional[int] = None
    memory_usage_mb: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class MetricsCollector:
    """Collect operation metrics in memory; write them out on request.

    Attributes:
        metrics_file: Optional JSON file that ``save_metrics`` appends to
        metrics: Metrics recorded so far
    """

    def __init__(self, metrics_file: Optional[str] = None) -> None:
        self.metrics_file: Optional[Path] = Path(metrics_file) if metrics_file else None
        self.metrics: List[OperationMetrics] = []

    def record_operation(
        self,
        operation_name: str,
        duration: float,
        success: bool,
        error: Optional[str] = None,
        trials: Optional[int] = None,
        memory_mb: Optional[float] = None,
    ) -> OperationMetrics:
        """Record metrics for a completed operation.

        Args:
            operation_name: Name of the operation
            duration: Duration in seconds
            success: Whether operation succeeded
            error: Error message if failed
            trials: Monte-Carlo trials, if applicable
            memory_mb: Resident memory growth in MB

        Returns:
            The recorded OperationMetrics
        """
        end = datetime.now(timezone.utc)
        start = datetime.fromtimestamp(end.timestamp() - duration, tz=timezone.utc)
        metric = OperationMetrics(
            operation_name=operation_name,
            start_time=start.isoformat(),
            end_time=end.isoformat(),
            duration_seconds=round(duration, 4),
            success=success,
            error_message=error,
            trials=trials,
            memory_usage_mb=round(memory_mb, 2) if memory_mb is not None else None,
        )
        self.metrics.append(metric)
        return metric

    def save_metrics(self) -> None:
        """Append collected metrics to ``metrics_file`` (no-op without one)."""
        if self.metrics_file is None:
            return
        self.metrics_file.parent.mkdir(parents=True, exist_ok=True)

        existing: List[Dict[str, Any]] = []
        if self.metrics_file.exists():
            try:
                with safe_open(self.metrics_file, allowed_base=False) as f:
                    existing = json.load(f).get("operations", [])
            except (json.JSONDecodeError, AttributeError):
                logger.warning(
                    "Existing metrics file is not valid JSON; starting fresh",
                    extra={"metrics_file": str(self.metrics_file)},
                )
                existing = []

        operations = existing + [m.to_dict() for m in self.metrics]
        output = {
            "last_updated": datetime.now(timezone.utc).isoformat(),
            "total_operations": len(operations),
            "operations": operations,
        }
        with safe_open(self.metrics_file, "w", allowed_base=False) as f:
            json.dump(output, f, indent=2)

    def get_summary(self) -> Dict[str, Any]:
        """Summary statistics over the collected metrics."""
        if not self.metrics:
            return {
                "total_operations": 0,
                "success_rate": 0.0,
                "total_duration_seconds": 0.0,
                "total_trials": 0,
            }

        successful = [m for m in self.metrics if m.success]
        durations = [m.duration_seconds for m in self.metrics]
        return {
            "total_operations": len(self.metrics),
            "successful_operations": len(successful),
            "failed_operations": len(self.metrics) - len(successful),
            "success_rate": round(len(successful) / len(self.metrics) * 100, 2),
            "total_duration_seconds": round(sum(durations), 4),
            "max_duration_seconds": round(max(durations), 4),
            "total_trials": sum(m.trials or 0 for m in self.metrics),
            "failures": [
                {"operation": m.operation_name, "error": m.error_message}
                for m in self.metrics
                if not m.success
            ],
        }


def _rss_mb(process: psutil.Process) -> float:
    return process.memory_info().rss / BYTES_PER_MB


class TimingContext:
    """Context manager that times an operation and records it.

    Example:
        >>> with TimingContext("simulate", collector) as timer:
        ...     result = run_analog(params, spec)
        ...     timer.trials = spec.trials
    """

    def __init__(self, operation_name: str, collector: Optional[MetricsCollector] = None) -> None:
        self.operation_name = operation_name
        self.collector = collector or MetricsCollector()
        self.start_time = 0.0
        self.duration = 0.0
        self.trials: Optional[int] = None
        self._process = psutil.Process()
        self._initial_rss = 0.0

    def __enter__(self) -> "TimingContext":
        self._initial_rss = _rss_mb(self._process)
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.duration = time.perf_counter() - self.start_time
        memory = max(_rss_mb(self._process) - self._initial_rss, 0.0)
        self.collector.record_operation(
            operation_name=self.operation_name,
            duration=self.duration,
            success=exc_type is None,
            error=str(exc_val) if exc_val else None,
            trials=self.trials,
            memory_mb=memory,
        )


def log_metrics_summary(collector: MetricsCollector) -> None:
    """Log the collector's summary at INFO (failures at WARNING)."""
    summary = collector.get_summary()
    logger.info(
        "Run metrics",
        extra={k: v for k, v in summary.items() if k != "failures"},
    )
    for failure in summary.get("failures", []):
        logger.warning(
            "Operation failed", extra={"operation": failure["operation"], "error": failure["error"]}
        )
