"""File emission and run configuration.

CSV output is RFC-4180 style with '.' decimal separator and 17
significant digits, enough to round-trip doubles exactly; identical
inputs therefore produce byte-identical files.  All writes are atomic
(temp file + rename).  Run configs are flat `key = value` text with `#`
comments.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field

from .errors import ConfigError


def fmt_float(x) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path, writer):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    """rows: iterable of sequences; floats are formatted to 17 digits."""

    def fmt(cell):
        if isinstance(cell, bool):
            return "true" if cell else "false"
        if isinstance(cell, float):
            return fmt_float(cell)
        return str(cell)

    def run(fh):
        out = csv.writer(fh)
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(c) for c in row])

    _atomic_write(path, run)


def write_json(path, obj):
    def run(fh):
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _atomic_write(path, run)


def parse_config(path) -> dict:
    """Flat key = value config; values stay strings."""
    out = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"line {lineno}: expected 'key = value', got {raw.strip()!r}",
                        key=raw.strip(),
                    )
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", key=str(path))
    return out


@dataclass
class RunManifest:
    """Provenance record written next to every command's outputs."""

    command: str
    params: dict
    outputs: list = field(default_factory=list)
    seed: int = 0

    def write(self, path):
        import matplotlib
        import numpy
        import scipy

        from . import __version__

        write_json(path, {
            "command": self.command,
            "params": self.params,
            "outputs": sorted(self.outputs),
            "seed": self.seed,
            "versions": {
                "curvlab": __version__,
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
                "matplotlib": matplotlib.__version__,
            },
        })
