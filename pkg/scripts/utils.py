#!/usr/bin/env python3
"""
Utility functions for asdgic-lattice.
Common operations used across multiple scripts: path-safe file access,
configuration fingerprints and table output.
"""

import csv
import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, TextIO, Union

# Path Constants
DEFAULT_ALLOWED_BASE_DIR = Path.cwd()
MAX_PATH_LENGTH = 4096

# Output Constants
FLOAT_FORMAT = ".17g"
HASH_LENGTH = 12
OUTPUT_FORMATS = ("csv", "json")


def safe_path_resolve(
    filepath: Union[str, Path], allowed_base: Optional[Union[str, Path]] = None
) -> Path:
    """
    Safely resolve a file path preventing directory traversal.

    Args:
        filepath: Path to validate and resolve
        allowed_base: Base directory that the path must be within.
                     Defaults to current working directory; False disables the check.

    Returns:
        Resolved absolute Path object

    Raises:
        ValueError: If path is outside allowed base or cannot be resolved

    Example:
        >>> safe_path_resolve("config/engine.yaml", "/repo")
        PosixPath('/repo/config/engine.yaml')
    """
    filepath = Path(filepath)

    try:
        abs_path = filepath.resolve()
    except (OSError, RuntimeError) as e:
        raise ValueError(f"Failed to resolve path: {e}")

    if allowed_base is False:
        return abs_path

    if allowed_base is None:
        allowed_base = DEFAULT_ALLOWED_BASE_DIR

    try:
        abs_base = Path(allowed_base).resolve()
    except (OSError, RuntimeError) as e:
        raise ValueError(f"Failed to resolve base path: {e}")

    if len(str(abs_path)) > MAX_PATH_LENGTH:
        raise ValueError(f"Path exceeds maximum length of {MAX_PATH_LENGTH}")

    try:
        abs_path.relative_to(abs_base)
    except ValueError:
        raise ValueError(
            f"Path traversal attempt detected: '{filepath}' resolves to "
            f"'{abs_path}' which is outside allowed base '{abs_base}'"
        )

    return abs_path


def safe_open(
    filepath: Union[str, Path],
    mode: str = "r",
    allowed_base: Optional[Union[str, Path]] = None,
    **kwargs,
):
    """
    Safely open a file with path traversal protection.

    All arguments except 'allowed_base' are passed directly to open().

    Raises:
        ValueError: If path validation fails
        FileNotFoundError: If file doesn't exist (in read modes)
    """
    validated_path = safe_path_resolve(filepath, allowed_base)

    if "r" in mode and not validated_path.exists():
        raise FileNotFoundError(f"File not found: {validated_path}")

    return open(validated_path, mode, **kwargs)


def _canonical(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return value


def config_hash(payload: Mapping[str, Any]) -> str:
    """Short SHA256 fingerprint of a configuration mapping.

    Keys are sorted and floats rendered with 17 significant digits, so equal
    configurations hash equally regardless of insertion order.

    Example:
        >>> config_hash({"seed": 1}) == config_hash({"seed": 1})
        True
    """
    canonical = json.dumps(_canonical(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:HASH_LENGTH]


def format_value(value: Any) -> str:
    """Render one table cell; floats keep 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, FLOAT_FORMAT)
    return str(value)


def _json_ready(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


def write_table(
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    fmt: str,
    stream: TextIO,
) -> None:
    """Write rows as CSV (header + rows) or as a JSON list of records.

    Args:
        rows: Records keyed by column name
        columns: Column order (CSV) / key order (JSON)
        fmt: "csv" or "json"
        stream: Destination text stream

    Raises:
        ValueError: Unknown format
    """
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"Unknown output format '{fmt}'. Expected one of: {OUTPUT_FORMATS}")
    records: List[Dict[str, Any]] = [{c: row.get(c) for c in columns} for row in rows]
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([format_value(record[c]) for c in columns])
    else:
        json.dump(_json_ready(records), stream, indent=2)
        stream.write("\n")


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of numbers ("0.1,0.5,1")."""
    values = [part.strip() for part in text.split(",") if part.strip()]
    if not values:
        raise ValueError("Expected a comma-separated list of numbers")
    try:
        return [float(v) for v in values]
    except ValueError:
        raise ValueError(f"Invalid number in list: '{text}'")
