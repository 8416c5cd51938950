"""Command reports: records of stable key/value fields, rendered as text or JSON."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

from dataclasses_json import dataclass_json


# =============================================================================
# Report Models
# =============================================================================


@dataclass_json
@dataclass
class Record:
    """One result block"""

    kind: str = ""
    fields: Dict[str, str] = field(default_factory=dict)

    def add(self, key: str, value) -> "Record":
        self.fields[key] = value if isinstance(value, str) else _format(value)
        return self


@dataclass_json
@dataclass
class Report:
    """Everything a command claims, with the inputs and flags it depends on"""

    command: str = ""
    inputs: Dict[str, str] = field(default_factory=dict)
    records: List[Record] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    exit_code: int = 0

    def record(self, kind: str, **fields) -> Record:
        rec = Record(kind)
        for key, value in fields.items():
            rec.add(key.replace("_", "-"), value)
        self.records.append(rec)
        return rec

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    def add_input(self, path: Union[str, Path]) -> None:
        path = Path(path)
        self.inputs[path.name] = file_digest(path)

    def render_text(self) -> str:
        lines = [f"command: {self.command}"]
        for name, digest in self.inputs.items():
            lines.append(f"input: {name} sha256={digest}")
        lines.append(f"exit-code: {self.exit_code}")
        for rec in self.records:
            lines.append("")
            lines.append(f"[{rec.kind}]")
            for key, value in rec.fields.items():
                lines.append(f"{key}: {value}")
        if self.warnings:
            lines.append("")
            lines.append("[warnings]")
            lines.extend(f"- {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"

    def render_json(self) -> str:
        return self.to_json(indent=2) + "\n"


def _format(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_format(v)}" for k, v in value.items()) + "}"
    return str(value)


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()
