#!/usr/bin/env python3
"""
Tests for scripts/logging_config.py

Tests formatters, the context filter and setup_logging.
"""

import json
import logging
import sys
from io import StringIO
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from logging_config import (
    MANAGED_ATTR,
    ColoredFormatter,
    ContextFilter,
    JSONFormatter,
    level_from_name,
    setup_logging,
)


def _record(msg="Simulation finished", level=logging.INFO):
    return logging.LogRecord(
        name="simulate",
        level=level,
        pathname="simulate.py",
        lineno=10,
        msg=msg,
        args=(),
        exc_info=None,
    )


class TestJSONFormatter:
    """Test JSONFormatter class."""

    def test_basic_json_formatting(self):
        """Records become one JSON object."""
        log_dict = json.loads(JSONFormatter().format(_record()))

        assert log_dict["message"] == "Simulation finished"
        assert log_dict["level"] == "INFO"
        assert "timestamp" in log_dict

    def test_extra_fields(self):
        """Fields passed through ``extra`` are included."""
        record = _record()
        record.trials = 10000
        record.scheme = "thm2-corner-R2"

        log_dict = json.loads(JSONFormatter().format(record))

        assert log_dict["trials"] == 10000
        assert log_dict["scheme"] == "thm2-corner-R2"

    def test_exception(self):
        """Exception info is serialised."""
        try:
            raise ValueError("bad grid")
        except ValueError:
            record = logging.LogRecord(
                "test", logging.ERROR, "t.py", 1, "failed", (), sys.exc_info()
            )

        log_dict = json.loads(JSONFormatter().format(record))

        assert "bad grid" in log_dict["exception"]


class TestContextFilter:
    """Test ContextFilter class."""

    def test_adds_context(self):
        """Context lands in extra_data and passes the record."""
        record = _record()

        assert ContextFilter({"command": "regions"}).filter(record) is True
        assert record.extra_data == {"command": "regions"}

    def test_empty_context(self):
        """No context still yields an empty extra_data."""
        record = _record()
        ContextFilter().filter(record)

        assert record.extra_data == {}


class TestColoredFormatter:
    """Test ColoredFormatter class."""

    def test_plain_stream_has_no_colors(self):
        """Non-terminal streams get plain text with key=value context."""
        formatter = ColoredFormatter("%(levelname)s %(message)s", stream=StringIO())
        record = _record()
        record.seed = 7

        text = formatter.format(record)

        assert text == "INFO Simulation finished seed=7"
        assert record.levelname == "INFO"


class TestSetupLogging:
    """Test setup_logging function."""

    def test_console_stream(self):
        """Console output goes to the given stream."""
        stream = StringIO()
        logger = setup_logging("asdgic_test_console", level=logging.INFO, stream=stream)
        logger.info("Sweep finished", extra={"argmin": 0.5})

        assert "Sweep finished" in stream.getvalue()
        assert "argmin=0.5" in stream.getvalue()

    def test_json_console(self):
        """json_format switches the console formatter."""
        stream = StringIO()
        logger = setup_logging("asdgic_test_json", json_format=True, stream=stream)
        logger.warning("Power budget exceeded")

        assert json.loads(stream.getvalue())["level"] == "WARNING"

    def test_file_logging(self, tmp_path):
        """Log files are JSON lines and carry the context."""
        log_file = tmp_path / "logs" / "run.log"
        logger = setup_logging(
            "asdgic_test_file",
            console_output=False,
            log_file=str(log_file),
            context={"command": "simulate"},
        )
        logger.info("Chunk done")
        for handler in logger.handlers:
            handler.flush()

        entry = json.loads(log_file.read_text().splitlines()[0])
        assert entry["command"] == "simulate"

    def test_repeated_setup_replaces_managed_handlers(self):
        """Calling twice leaves one managed handler."""
        name = "asdgic_test_repeat"
        setup_logging(name, stream=StringIO())
        logger = setup_logging(name, stream=StringIO())

        managed = [h for h in logger.handlers if getattr(h, MANAGED_ATTR, False)]
        assert len(managed) == 1

    def test_foreign_handlers_survive(self):
        """Handlers not installed by setup_logging are kept."""
        name = "asdgic_test_foreign"
        foreign = logging.NullHandler()
        logging.getLogger(name).addHandler(foreign)

        logger = setup_logging(name, stream=StringIO())

        assert foreign in logger.handlers
        logger.removeHandler(foreign)

    def test_level(self):
        """The level is applied to the logger."""
        logger = setup_logging("asdgic_test_level", level=logging.DEBUG, stream=StringIO())

        assert logger.level == logging.DEBUG


class TestLevelFromName:
    """Test level_from_name function."""

    def test_known_names(self):
        """Names are case-insensitive."""
        assert level_from_name("debug") == logging.DEBUG
        assert level_from_name("WARNING") == logging.WARNING

    def test_unknown_name(self):
        """Unknown names raise ValueError."""
        with pytest.raises(ValueError):
            level_from_name("LOUD")
