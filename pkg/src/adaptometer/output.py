"""Atomic, byte-deterministic file writers for CSV and JSON artifacts."""
from __future__ import annotations

import json
import os
import tempfile


def atomic_write_text(path, text: str):
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_cell(value) -> str:
    """Stable text form: floats use repr (shortest round-trip)."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header: list[str], rows, provenance: str | None = None):
    """UTF-8, LF-terminated CSV with a header row.

    ``provenance`` becomes a single leading ``# key=value`` comment line so
    the run seed travels with every table.
    """
    lines = []
    if provenance:
        lines.append(f"# {provenance}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, obj):
    atomic_write_text(
        path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    )
