"""Atomic JSON / JSON Lines writers shared by the CLI and the generator."""

import json
import os
import tempfile
from pathlib import Path


def dumps_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False, allow_nan=False)


def atomic_write_text(path, text: str) -> None:
    """Write *text* to *path* through a temp file in the same directory and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_jsonl(path, rows) -> None:
    atomic_write_text(path, "".join(dumps_line(r) + "\n" for r in rows))


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False) + "\n")
