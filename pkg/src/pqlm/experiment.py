"""Experiment specification files: line-oriented `key = value` with
[system] sections.

The format is diff-friendly on purpose (one parameter per line, repeated
`corpus` keys accumulate) and round-trips losslessly through
parse/serialize so a run's provenance can be reconstructed from its spec.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .corpus import ParseError

_GLOBAL_KEYS = (
    "corpus", "format", "topics", "qrels", "output",
    "index", "neighbors", "clusters",
    "lowercase", "stemmer", "stoplist", "drop_length_one",
)

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


@dataclass
class SystemSpec:
    name: str
    method: str
    params: dict[str, list[str]] = field(default_factory=dict)

    def grid(self) -> list[dict[str, str]]:
        """Cartesian product over multi-valued parameters, sorted key order."""
        keys = sorted(self.params)
        if not keys:
            return [{}]
        values = [self.params[k] for k in keys]
        return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


@dataclass
class ExperimentSpec:
    corpus: list[str] = field(default_factory=list)
    format: str = "trec"  # trec | lines
    topics: str | None = None
    qrels: str | None = None
    output: str = "runs"
    index: str | None = None
    neighbors: str | None = None
    clusters: str | None = None
    lowercase: bool = True
    stemmer: str = "none"
    stoplist: str | None = None
    drop_length_one: bool = False
    systems: list[SystemSpec] = field(default_factory=list)


def parse_bool(value: str) -> bool:
    try:
        return _BOOL[value.strip().lower()]
    except KeyError:
        raise ParseError(f"expected a boolean, got {value!r}") from None


def parse_spec(text: str) -> ExperimentSpec:
    spec = ExperimentSpec()
    system: SystemSpec | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[system]":
            system = SystemSpec(name="", method="")
            spec.systems.append(system)
            continue
        if "=" not in line:
            raise ParseError(f"spec line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if system is None:
            _set_global(spec, key, value, lineno)
        elif key == "name":
            system.name = value
        elif key == "method":
            system.method = value
        else:
            system.params[key] = value.split()
    for i, sys_spec in enumerate(spec.systems):
        if not sys_spec.name:
            raise ParseError(f"system {i} has no name")
        if not sys_spec.method:
            raise ParseError(f"system {sys_spec.name!r} has no method")
    return spec


def _set_global(spec: ExperimentSpec, key: str, value: str, lineno: int) -> None:
    if key == "corpus":
        spec.corpus.append(value)
    elif key in ("format", "topics", "qrels", "output", "index",
                 "neighbors", "clusters", "stemmer", "stoplist"):
        setattr(spec, key, value)
    elif key in ("lowercase", "drop_length_one"):
        setattr(spec, key, parse_bool(value))
    else:
        raise ParseError(f"spec line {lineno}: unknown key {key!r} "
                         f"(expected one of {', '.join(_GLOBAL_KEYS)})")


def serialize_spec(spec: ExperimentSpec) -> str:
    lines: list[str] = []
    for path in spec.corpus:
        lines.append(f"corpus = {path}")
    lines.append(f"format = {spec.format}")
    for key in ("topics", "qrels", "output", "index", "neighbors",
                "clusters", "stoplist"):
        value = getattr(spec, key)
        if value is not None:
            lines.append(f"{key} = {value}")
    lines.append(f"lowercase = {'true' if spec.lowercase else 'false'}")
    lines.append(f"stemmer = {spec.stemmer}")
    lines.append(f"drop_length_one = {'true' if spec.drop_length_one else 'false'}")
    for system in spec.systems:
        lines.append("")
        lines.append("[system]")
        lines.append(f"name = {system.name}")
        lines.append(f"method = {system.method}")
        for key, values in system.params.items():
            lines.append(f"{key} = {' '.join(values)}")
    return "\n".join(lines) + "\n"
