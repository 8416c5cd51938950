"""Basis and catalog files.

Grammar (line oriented, ``#`` starts a comment line)::

    space level=52 weight=2 group=g0 char=none trunc=400 coeffring=int
    f: 1,0,0,0,2,...
    h@4: 0,1,...

The header keyword is ``catalog`` for catalogs. ``weight`` may be a comma list for direct
sums, in which case every row carries ``@k``. With ``coeffring=nf:c0,c1,...`` (monic,
low to high) a coefficient is written ``[r0;r1;...]`` in the power basis of the root.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from hecke_pm.characters import DirichletCharacter
from hecke_pm.errors import BasisError, ParseError, PrecisionError
from hecke_pm.hecke_algebra import SpaceBasis
from hecke_pm.numberfield import NumberField
from hecke_pm.qexp import QExpansion

logger = logging.getLogger(__name__)

HEADER_KEYS = ("level", "weight", "group", "char", "trunc", "coeffring")


@dataclass(frozen=True)
class FileHeader:
    kind: str
    level: int
    weights: tuple[int, ...]
    group: str
    character: Optional[DirichletCharacter]
    truncation: int
    field: Optional[NumberField] = None

    def describe(self) -> str:
        chi = self.character.spec() if self.character is not None else "none"
        ring = self.field.describe() if self.field is not None else "int"
        weights = ",".join(str(k) for k in self.weights)
        return f"{self.kind} level={self.level} weight={weights} group={self.group} char={chi} trunc={self.truncation} coeffring={ring}"


@dataclass
class Catalog:
    header: FileHeader
    forms: list[QExpansion] = field(default_factory=list)
    source: str = ""

    def form(self, label: str) -> QExpansion:
        for f in self.forms:
            if f.label == label:
                return f
        raise BasisError(f"no catalog form labelled {label!r} in {self.source or 'catalog'}")

    @property
    def labels(self) -> list[str]:
        return [f.label for f in self.forms]


def _content_lines(text: str):
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield number, line


def _parse_header(line: str, number: int, expected: tuple[str, ...]) -> FileHeader:
    tokens = line.split()
    if tokens[0] not in expected:
        raise ParseError(f"header must start with {' or '.join(expected)}, got {tokens[0]!r}", number, 1)
    values: dict[str, str] = {}
    for token in tokens[1:]:
        key, sep, value = token.partition("=")
        if not sep or key not in HEADER_KEYS:
            raise ParseError(f"bad header field {token!r}", number, line.find(token) + 1)
        if key in values:
            raise ParseError(f"duplicate header field {key!r}", number, line.find(token) + 1)
        values[key] = value
    missing = [k for k in HEADER_KEYS if k not in values]
    if missing:
        raise ParseError(f"header is missing {', '.join(missing)}", number, len(line) + 1)

    def integer_value(name: str) -> int:
        try:
            return int(values[name])
        except ValueError:
            raise ParseError(f"{name} must be an integer, got {values[name]!r}", number, line.find(f"{name}=") + 1) from None

    level, truncation = integer_value("level"), integer_value("trunc")
    try:
        weights = tuple(int(w) for w in values["weight"].split(","))
    except ValueError:
        raise ParseError(f"bad weight list {values['weight']!r}", number, line.find("weight=") + 1) from None
    group = values["group"]
    if group not in ("g0", "g1"):
        raise ParseError(f"group must be g0 or g1, got {group!r}", number, line.find("group=") + 1)
    character = None
    if values["char"] != "none":
        character = DirichletCharacter.parse(values["char"])
        if level % character.modulus:
            raise ParseError(f"character modulus {character.modulus} does not divide level {level}", number, line.find("char=") + 1)
    ring = values["coeffring"]
    nf = None
    if ring.startswith("nf:"):
        try:
            nf = NumberField(tuple(int(c) for c in ring[3:].split(",")))
        except ValueError:
            raise ParseError(f"bad defining polynomial {ring!r}", number, line.find("coeffring=") + 1) from None
    elif ring != "int":
        raise ParseError(f"coeffring must be int or nf:<poly>, got {ring!r}", number, line.find("coeffring=") + 1)
    return FileHeader(tokens[0], level, weights, group, character, truncation, nf)


def _parse_coefficient(token: str, header: FileHeader, number: int, column: int) -> Union[int, object]:
    token = token.strip()
    try:
        if token.startswith("["):
            if header.field is None or not token.endswith("]"):
                raise ValueError(token)
            return header.field.element([Fraction(r) for r in token[1:-1].split(";")])
        value = int(token)
        return value if header.field is None else header.field(value)
    except (ValueError, ZeroDivisionError, PrecisionError):
        raise ParseError(f"bad coefficient {token!r}", number, column) from None


def _split_coefficients(body: str) -> list[tuple[str, int]]:
    """Comma-separated tokens with their offsets; commas inside brackets do not split."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append((body[start:i], start))
            start = i + 1
    out.append((body[start:], start))
    return out


def _parse_row(line: str, number: int, header: FileHeader, index: int) -> QExpansion:
    label, sep, body = line.partition(":")
    offset = len(label) + 1
    if not sep:
        label, body, offset = f"row{index}", line, 0
    label = label.strip()
    weight = header.weights[0]
    tagged = "@" in label
    if len(header.weights) > 1 and not tagged:
        raise ParseError("direct-sum rows need an explicit @weight", number, 1)
    if tagged:
        label, _, weight_text = label.partition("@")
        try:
            weight = int(weight_text)
        except ValueError:
            raise ParseError(f"bad row weight {weight_text!r}", number, line.find("@") + 2) from None
    if weight not in header.weights:
        raise ParseError(f"row weight {weight} is not among {list(header.weights)}", number, 1)
    tokens = _split_coefficients(body)
    if len(tokens) < header.truncation:
        raise ParseError(f"row has {len(tokens)} coefficients, header says trunc={header.truncation}", number, len(line) + 1)
    coeffs = [
        _parse_coefficient(tok, header, number, offset + start + 1)
        for tok, start in tokens[: header.truncation]
    ]
    character = header.character or DirichletCharacter.trivial(header.level)
    return QExpansion.from_cusp_coefficients(
        coeffs,
        level=header.level,
        weight=weight,
        character=character,
        domain=header.field,
        label=label,
    )


def _parse(text: str, expected: tuple[str, ...]) -> tuple[FileHeader, list[QExpansion]]:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty file", 1, 1)
    number, first = lines[0]
    header = _parse_header(first, number, expected)
    rows = [_parse_row(line, n, header, i) for i, (n, line) in enumerate(lines[1:])]
    if not rows:
        raise ParseError("no rows after the header", number + 1, 1)
    labels = [r.label for r in rows]
    if len(set(labels)) != len(labels):
        raise ParseError(f"duplicate row labels in {labels}", number + 1, 1)
    return header, rows


def _check_parity(header: FileHeader) -> None:
    if header.character is None:
        return
    chi = header.character
    odd = chi.modulus > 2 and chi.exponent(chi.modulus - 1) != 0
    for k in header.weights:
        if odd != (k % 2 == 1):
            raise BasisError(f"character {chi.spec()} has the wrong parity for weight {k}")


def parse_space_text(text: str, source: str = "") -> SpaceBasis:
    header, rows = _parse(text, ("space",))
    if header.field is not None:
        raise BasisError("basis rows must be integral (coeffring=int)")
    _check_parity(header)
    S = SpaceBasis.from_generators(rows, header.group)
    if S.dimension < len(rows):
        logger.warning("%s: %d rows span a space of dimension %d", source or "basis", len(rows), S.dimension)
    try:
        bound = S.injectivity_bound
    except PrecisionError as exc:
        raise BasisError(f"{source or 'basis'}: {exc}") from exc
    logger.info("loaded %s (%s, injective at %d)", source or "basis", S.describe(), bound)
    return S


def parse_space_file(path: Union[str, Path]) -> SpaceBasis:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise BasisError(f"cannot read {path}: {exc}") from exc
    return parse_space_text(text, path.name)


def parse_catalog_text(text: str, source: str = "") -> Catalog:
    header, rows = _parse(text, ("catalog",))
    _check_parity(header)
    return Catalog(header, rows, source)


def parse_catalog_file(path: Union[str, Path]) -> Catalog:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise BasisError(f"cannot read {path}: {exc}") from exc
    return parse_catalog_text(text, path.name)


def sibling_catalog(path: Union[str, Path]) -> Optional[Path]:
    """``S_2_G0_52.basis`` -> ``S_2_G0_52.catalog`` when that file exists."""
    candidate = Path(path).with_suffix(".catalog")
    return candidate if candidate.exists() else None


def basis_file_name(level: int, weight: int, group: str = "g1") -> str:
    return f"S_{weight}_{group.upper()}_{level}.basis"


class BasisDirectory:
    """Level-N bases by weight, looked up as ``S_<k>_G1_<N>.basis`` and then ``S_<k>_G0_<N>.basis``."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self._spaces: dict[tuple[int, int], Optional[SpaceBasis]] = {}
        self.warnings: list[str] = []

    def space(self, level: int, weight: int) -> Optional[SpaceBasis]:
        key = (level, weight)
        if key not in self._spaces:
            self._spaces[key] = self._load(level, weight)
        return self._spaces[key]

    def _load(self, level: int, weight: int) -> Optional[SpaceBasis]:
        path = self.root / basis_file_name(level, weight, "g1")
        if path.exists():
            return parse_space_file(path)
        path = self.root / basis_file_name(level, weight, "g0")
        if path.exists():
            message = f"no Gamma_1({level}) basis in weight {weight}; searching the Gamma_0 subspace {path.name}"
            logger.warning(message)
            self.warnings.append(message)
            return parse_space_file(path)
        return None
