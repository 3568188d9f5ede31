#!/usr/bin/env python3
"""
Tests for scripts/run_metrics.py

Tests metrics collection, persistence and the timing context.
"""

import json
import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from run_metrics import (
    BYTES_PER_MB,
    MetricsCollector,
    OperationMetrics,
    TimingContext,
    log_metrics_summary,
)


class TestOperationMetrics:
    """Test OperationMetrics dataclass."""

    def test_to_dict(self):
        """All fields are serialised."""
        metrics = OperationMetrics(
            operation_name="simulate",
            start_time="2024-01-01T00:00:00",
            end_time="2024-01-01T00:00:01",
            duration_seconds=1.0,
            success=True,
            trials=10000,
        )

        data = metrics.to_dict()
        assert data["operation_name"] == "simulate"
        assert data["trials"] == 10000
        assert data["error_message"] is None


class TestMetricsCollector:
    """Test MetricsCollector class."""

    def test_record_operation(self):
        """Recorded metrics are kept in order."""
        collector = MetricsCollector()
        collector.record_operation("regions", 0.5, True)
        collector.record_operation("simulate", 1.5, False, error="bad scheme", trials=100)

        assert [m.operation_name for m in collector.metrics] == ["regions", "simulate"]
        assert collector.metrics[1].error_message == "bad scheme"

    def test_summary(self):
        """Summary counts successes, failures and trials."""
        collector = MetricsCollector()
        collector.record_operation("regions", 0.5, True)
        collector.record_operation("simulate", 1.5, False, error="boom", trials=100)

        summary = collector.get_summary()

        assert summary["total_operations"] == 2
        assert summary["success_rate"] == 50.0
        assert summary["total_trials"] == 100
        assert summary["failures"] == [{"operation": "simulate", "error": "boom"}]

    def test_empty_summary(self):
        """An empty collector reports zeros."""
        assert MetricsCollector().get_summary()["total_operations"] == 0

    def test_save_without_file_is_noop(self, tmp_path):
        """No metrics file means nothing is written."""
        collector = MetricsCollector()
        collector.record_operation("gap-table", 0.1, True)
        collector.save_metrics()

        assert list(tmp_path.iterdir()) == []

    def test_save_appends(self, tmp_path):
        """Repeated saves accumulate operations."""
        metrics_file = tmp_path / "metrics" / "run.json"
        for name in ("regions", "validate"):
            collector = MetricsCollector(str(metrics_file))
            collector.record_operation(name, 0.1, True)
            collector.save_metrics()

        data = json.loads(metrics_file.read_text())
        assert data["total_operations"] == 2
        assert [op["operation_name"] for op in data["operations"]] == ["regions", "validate"]

    def test_corrupt_file_starts_fresh(self, tmp_path):
        """Invalid JSON in the metrics file is replaced."""
        metrics_file = tmp_path / "run.json"
        metrics_file.write_text("{not json")
        collector = MetricsCollector(str(metrics_file))
        collector.record_operation("binning", 0.1, True)

        collector.save_metrics()

        assert json.loads(metrics_file.read_text())["total_operations"] == 1


class TestTimingContext:
    """Test TimingContext class."""

    def test_success(self):
        """A clean exit records a success with trials."""
        collector = MetricsCollector()
        with TimingContext("simulate", collector) as timer:
            timer.trials = 500

        metric = collector.metrics[0]
        assert metric.success is True
        assert metric.trials == 500
        assert metric.duration_seconds >= 0.0
        assert metric.memory_usage_mb >= 0.0

    def test_memory_growth(self, mocker):
        """Memory is the growth of resident set size in MB."""
        process = mocker.patch("run_metrics.psutil.Process").return_value
        process.memory_info.side_effect = [
            mocker.Mock(rss=100 * BYTES_PER_MB),
            mocker.Mock(rss=150 * BYTES_PER_MB),
        ]
        collector = MetricsCollector()

        with TimingContext("nsm-table", collector):
            pass

        assert collector.metrics[0].memory_usage_mb == 50.0

    def test_failure_is_recorded_and_raised(self):
        """Exceptions are recorded and propagate."""
        collector = MetricsCollector()
        with pytest.raises(ValueError):
            with TimingContext("regions", collector):
                raise ValueError("no regime")

        assert collector.metrics[0].success is False
        assert collector.metrics[0].error_message == "no regime"


class TestLogMetricsSummary:
    """Test log_metrics_summary function."""

    def test_logs_failures(self, caplog):
        """Failures are logged at WARNING."""
        collector = MetricsCollector()
        collector.record_operation("simulate", 0.2, False, error="boom")

        with caplog.at_level(logging.INFO):
            log_metrics_summary(collector)

        assert "Run metrics" in caplog.text
        assert any(r.levelno == logging.WARNING for r in caplog.records)
