"""Flat ``key = value`` configuration files and run manifests."""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Mapping

from . import __version__

MANIFEST_NAME = "manifest.json"
TRUE = {"1", "true", "yes", "on"}
FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def parse_config(text: str, origin: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines. ``#`` starts a comment line; keys are
    normalised to lowercase with ``-`` turned into ``_``. A repeated key is
    an error, since silently keeping one of them hides typos."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read_config(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in TRUE:
        return True
    if text in FALSE:
        return False
    raise ConfigError(f"expected a boolean (true/false), got {value!r}")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def digests(paths: Iterable, base=None) -> dict[str, str]:
    out = {}
    for p in paths:
        p = Path(p)
        if not p.is_file():
            continue
        key = os.path.relpath(p, base) if base is not None else str(p)
        out[key] = sha256_file(p)
    return dict(sorted(out.items()))


def write_manifest(
    out_dir,
    argv: list[str],
    config: Mapping,
    inputs: Iterable,
    outputs: Iterable,
    seed,
    seconds: float,
) -> Path:
    """Record how the files in ``out_dir`` were produced.

    Only the duration differs between two runs of a deterministic
    command; all digests must agree.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "lowparse",
        "version": __version__,
        "command": list(argv),
        "seed": seed,
        "config": {k: config[k] for k in sorted(config)},
        "inputs": digests(inputs),
        "outputs": digests(outputs, base=out_dir),
        "duration_seconds": round(seconds, 3),
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path
