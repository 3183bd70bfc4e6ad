"""Deterministic text output: data tables and run manifests.

Data files are tab-separated with a '#'-prefixed metadata header whose
entries are 'key = value' pairs, followed by a '# columns:' line naming
each column with its unit. Floats are written with repr (shortest
round-trip form), counts as integers, and nothing carries a timestamp,
so a rerun with the same config and seed reproduces every output byte.
"""

import json
from pathlib import Path

import numpy as np


class DataFileError(Exception):
    """A data file is missing, malformed or inconsistent."""


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path, metadata: dict, columns: list, rows) -> None:
    """Write a '#'-headed tab-separated table."""
    lines = [f"# {key} = {format_value(val)}" for key, val in metadata.items()]
    lines.append("# columns: " + "\t".join(columns))
    for row in rows:
        lines.append("\t".join(format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def append_comment_block(path, metadata: dict) -> None:
    """Append more '# key = value' lines to an existing table."""
    with open(path, "a", encoding="utf-8") as fh:
        for key, val in metadata.items():
            fh.write(f"# {key} = {format_value(val)}\n")


def read_table(path):
    """Read a table written by ``write_table``.

    Returns (metadata, columns, rows) where rows is a list of
    string-valued tuples; the caller converts types. Malformed lines
    raise with the file name and 1-based line number.
    """
    metadata, columns, rows = {}, None, []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("columns:"):
                    columns = body[len("columns:"):].strip().split("\t")
                elif "=" in body:
                    key, _, val = body.partition("=")
                    metadata[key.strip()] = val.strip()
                continue
            if columns is None:
                raise DataFileError(f"{path}:{lineno}: data before '# columns:' header")
            fields = line.split("\t")
            if len(fields) != len(columns):
                raise DataFileError(
                    f"{path}:{lineno}: expected {len(columns)} fields, got {len(fields)}"
                )
            rows.append(tuple(fields))
    if columns is None:
        raise DataFileError(f"{path}: missing '# columns:' header")
    return metadata, columns, rows


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def interferogram_filename(frequency: float) -> str:
    return f"interferogram_{int(round(frequency)):06d}Hz.tsv"
