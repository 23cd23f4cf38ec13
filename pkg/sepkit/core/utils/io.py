from __future__ import annotations

import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from sepkit import __version__ as sepkit_version
from sepkit.core.errors import InputError, MissingFile, ValidationError

log = logging.getLogger("sepkit.core.utils.io")


def atomic_write(path: Path, content: str):
    """
    Write a text file through a temporary file in the same directory, then rename it.

    Readers never see a partially written file.
    """
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise InputError(f"Output directory {directory} does not exist.")
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as file:
            file.write(content)
        os.replace(temp_name, path)
    except BaseException:
        try:
            os.unlink(temp_name)
        except FileNotFoundError:
            pass
        raise


def provenance(
    argv: Sequence[str] | None = None, seed: int | None = None, **extra: Any
) -> dict[str, Any]:
    content: dict[str, Any] = {
        "tool": "sepkit",
        "version": sepkit_version,
        "argv": list(sys.argv if argv is None else argv),
        "seed": seed,
    }
    content.update(extra)
    return content


def provenance_lines(content: dict[str, Any]) -> list[str]:
    lines = []
    for key, value in content.items():
        if isinstance(value, (list, dict)):
            value = json.dumps(value)
        lines.append(f"# {key}: {value}")
    return lines


def write_json(path: Path, payload: dict[str, Any], provenance: dict[str, Any] | None = None):
    document = {"provenance": provenance} if provenance is not None else {}
    document.update(payload)
    atomic_write(Path(path), json.dumps(document, indent=2) + "\n")
    log.debug(f"Wrote {path}")


def write_csv(
    path: Path,
    rows: Iterable[Sequence[Any]],
    header: Sequence[str] | None = None,
    provenance: dict[str, Any] | None = None,
):
    buffer = io.StringIO()
    if provenance is not None:
        buffer.write("\n".join(provenance_lines(provenance)) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    writer.writerows(rows)
    atomic_write(Path(path), buffer.getvalue())
    log.debug(f"Wrote {path}")


def read_json(path: Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    try:
        content = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from None
    if not isinstance(content, dict):
        raise ValidationError(f"{path} must contain a JSON object.")
    return content
