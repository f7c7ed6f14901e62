"""Shipped network specs.

Each preset is a ``<name>.yaml`` spec file in this directory, optionally with
``<name>.expected.json`` (switching statistics recorded when the preset was
generated) and ``<name>.fit.json`` (a fit problem starting from it).  The
files are written by ``tools/build_presets.py``.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from importlib import resources

from ..netspec import NetworkSpec, parse_spec, validate


class UnknownPresetError(KeyError):
    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class PresetEntry:
    name: str
    spec_file: str
    blurb: str
    expected_file: str | None = None
    fit_file: str | None = None


def _dir():
    return resources.files(__name__)


@functools.lru_cache(maxsize=1)
def catalog() -> dict[str, PresetEntry]:
    """All presets by name, in sorted order."""
    out = {}
    d = _dir()
    names = sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".yaml"))
    for name in names:
        spec = parse_spec((d / f"{name}.yaml").read_text(encoding="ascii"))
        exp = f"{name}.expected.json"
        fit = f"{name}.fit.json"
        out[name] = PresetEntry(name, f"{name}.yaml", spec.description,
                                exp if (d / exp).is_file() else None,
                                fit if (d / fit).is_file() else None)
    return out


def names() -> list[str]:
    return list(catalog())


def _entry(name: str) -> PresetEntry:
    try:
        return catalog()[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {', '.join(catalog())}") from None


def preset_text(name: str) -> str:
    """Raw spec-file text of a preset."""
    return (_dir() / _entry(name).spec_file).read_text(encoding="ascii")


@functools.lru_cache(maxsize=None)
def load_preset(name: str) -> NetworkSpec:
    """Parse and validate a shipped preset.

    Raises
    ------
    UnknownPresetError
        If ``name`` is not in the catalog.
    ValueError
        If the shipped file fails validation (a packaging bug).
    """
    spec = parse_spec(preset_text(name))
    problems = validate(spec)
    if problems:
        raise ValueError(f"preset {name!r} is invalid: " + "; ".join(problems))
    return spec


def expected_stats(name: str) -> dict | None:
    e = _entry(name)
    if e.expected_file is None:
        return None
    return json.loads((_dir() / e.expected_file).read_text(encoding="ascii"))


def fit_problem_text(name: str) -> str | None:
    e = _entry(name)
    if e.fit_file is None:
        return None
    return (_dir() / e.fit_file).read_text(encoding="ascii")
