#!/usr/bin/env python3
"""
Tests for scripts/utils.py

Path safety, configuration fingerprints and table output.
"""

import json
import math
import sys
from io import StringIO
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from lattice import LatticeFamily
from utils import (
    config_hash,
    format_value,
    parse_float_list,
    safe_open,
    safe_path_resolve,
    write_table,
)


class TestSafePathResolve:
    """Test safe_path_resolve function."""

    def test_inside_base(self, tmp_path):
        """Paths inside the base resolve normally."""
        target = tmp_path / "config" / "engine.yaml"

        assert safe_path_resolve(target, tmp_path) == target.resolve()

    def test_traversal_rejected(self, tmp_path):
        """Paths escaping the base are rejected."""
        with pytest.raises(ValueError, match="Path traversal"):
            safe_path_resolve(tmp_path / ".." / "elsewhere.yaml", tmp_path)

    def test_check_disabled(self, tmp_path):
        """allowed_base=False accepts any path."""
        outside = tmp_path.parent / "elsewhere.yaml"

        assert safe_path_resolve(outside, False) == outside.resolve()


class TestSafeOpen:
    """Test safe_open function."""

    def test_reads_file(self, tmp_path):
        """Existing files open for reading."""
        path = tmp_path / "scenario.yaml"
        path.write_text("p1: 1\n")

        with safe_open(path, allowed_base=tmp_path) as f:
            assert f.read() == "p1: 1\n"

    def test_missing_file(self, tmp_path):
        """Missing files raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            safe_open(tmp_path / "missing.yaml", allowed_base=False)


class TestConfigHash:
    """Test config_hash function."""

    def test_order_independent(self):
        """Key order does not change the hash."""
        assert config_hash({"a": 1, "b": 2.5}) == config_hash({"b": 2.5, "a": 1})

    def test_value_sensitive(self):
        """Different values hash differently."""
        assert config_hash({"seed": 1}) != config_hash({"seed": 2})

    def test_enums_hash_by_value(self):
        """Enums and their tag strings hash equally."""
        assert config_hash({"family": LatticeFamily.E8}) == config_hash({"family": "E8"})

    def test_length(self):
        """Hashes are 12 hex characters."""
        digest = config_hash({"nested": {"values": [1.0, 2.0]}})

        assert len(digest) == 12
        int(digest, 16)


class TestFormatValue:
    """Test format_value function."""

    @pytest.mark.parametrize(
        "value,expected",
        [
            (None, ""),
            (True, "true"),
            (False, "false"),
            (0.1, "0.10000000000000001"),
            (math.inf, "inf"),
            (LatticeFamily.HEXAGONAL, "hexagonal"),
            (3, "3"),
        ],
    )
    def test_cells(self, value, expected):
        """Cells render deterministically."""
        assert format_value(value) == expected


class TestWriteTable:
    """Test write_table function."""

    def test_csv(self):
        """CSV has a header row and keeps column order."""
        stream = StringIO()
        write_table([{"b": 2.0, "a": "x"}], ["a", "b"], "csv", stream)

        assert stream.getvalue() == "a,b\nx,2\n"

    def test_json(self):
        """JSON is a list of records with non-finite floats as strings."""
        stream = StringIO()
        write_table([{"x": 1.0, "gap": math.inf}], ["x", "gap"], "json", stream)

        assert json.loads(stream.getvalue()) == [{"x": 1.0, "gap": "inf"}]

    def test_missing_column_is_empty(self):
        """Absent keys become empty cells."""
        stream = StringIO()
        write_table([{"a": 1}], ["a", "b"], "csv", stream)

        assert stream.getvalue().splitlines()[1] == "1,"

    def test_unknown_format(self):
        """Only csv and json are supported."""
        with pytest.raises(ValueError):
            write_table([], ["a"], "xml", StringIO())


class TestParseFloatList:
    """Test parse_float_list function."""

    def test_parses(self):
        """Whitespace and empty entries are ignored."""
        assert parse_float_list("0.1, 0.5,1,") == [0.1, 0.5, 1.0]

    @pytest.mark.parametrize("text", ["", " , ", "0.1,abc"])
    def test_invalid(self, text):
        """Empty lists and non-numbers are rejected."""
        with pytest.raises(ValueError):
            parse_float_list(text)
