"""Atomic line lists and their conversion to squared reduced dipole moments."""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .constants import Constants, data_path, load_constants, normalize_species
from .wigner import AngMom, WignerDomainError

__all__ = [
    "StrengthKind",
    "TransitionRecord",
    "LineList",
    "LineListError",
    "parse_linelist",
    "bundled_linelist",
    "reduced_dipole_sq",
    "einstein_a_from_dipole_sq",
    "oscillator_f_from_dipole_sq",
]

HEADER = ("delta_e_cm", "kind", "strength", "u_strength", "two_j", "source")
BUNDLED = {"Er": ("er_lines.csv",), "Tm": ("tm_lines_a.csv", "tm_lines_f.csv")}


class StrengthKind(str, enum.Enum):
    EINSTEIN_A = "A"
    OSCILLATOR_F = "f"


class LineListError(ValueError):
    """A line list failed validation; ``problems`` holds (line number, message) pairs."""

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        detail = "; ".join(f"line {n}: {msg}" for n, msg in self.problems)
        super().__init__(f"{self.path}: {detail}")


@dataclass(frozen=True)
class TransitionRecord:
    """One ground-to-excited transition.  A is in 1e6 s^-1, f is dimensionless."""

    delta_e: float
    strength_kind: StrengthKind
    strength: float
    u_strength: float
    j_excited: AngMom
    source_tag: str = ""

    def scaled(self, factor: float) -> "TransitionRecord":
        return TransitionRecord(self.delta_e, self.strength_kind, self.strength * factor,
                                self.u_strength * factor, self.j_excited, self.source_tag)


@dataclass(frozen=True)
class LineList:
    species: str
    ground_j: AngMom
    records: tuple[TransitionRecord, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def allowed_b(self) -> list[int]:
        """Doubled excited-state j values reachable by an E1 transition."""
        tj = self.ground_j.twice_j
        return [tb for tb in (tj - 2, tj, tj + 2) if tb >= 0 and not (tj == 0 and tb == 0)]

    def merged(self, other: "LineList") -> "LineList":
        if other.species != self.species:
            raise ValueError("cannot merge line lists of different species")
        return LineList(self.species, self.ground_j, self.records + other.records)

    def with_records(self, records) -> "LineList":
        return LineList(self.species, self.ground_j, tuple(records))


def _parse_j(text: str, doubled: bool) -> AngMom:
    text = text.strip()
    if doubled:
        return AngMom(int(text))
    return AngMom.parse(text)


def parse_linelist(path, species: str, constants: Constants | None = None) -> LineList:
    """Read a CSV line list and validate every row.

    The ``two_j`` column holds 2b as an integer.  A file whose header names
    the column ``j`` instead is read with values such as ``5`` or ``7/2``.
    """
    constants = constants or load_constants()
    species = normalize_species(species)
    ground = AngMom(constants.atom(species).twice_j)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"line list not found: {path}")

    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, skipinitialspace=True))
    rows = [(n, r) for n, r in enumerate(rows, start=1) if r and any(c.strip() for c in r)]
    if not rows:
        warnings.warn(f"{path}: empty line list", stacklevel=2)
        return LineList(species, ground, ())

    header = [c.strip() for c in rows[0][1]]
    if header[:4] != list(HEADER[:4]) or header[4] not in ("two_j", "j"):
        raise LineListError(path, [(rows[0][0], f"bad header {header}; expected {','.join(HEADER)}")])
    doubled = header[4] == "two_j"

    records, problems = [], []
    for lineno, row in rows[1:]:
        if len(row) < 5:
            problems.append((lineno, f"expected at least 5 fields, got {len(row)}"))
            continue
        try:
            delta_e, strength, u_strength = (float(row[0]), float(row[2]), float(row[3]))
            kind = StrengthKind(row[1].strip())
            tb = _parse_j(row[4], doubled)
        except (ValueError, WignerDomainError) as exc:
            problems.append((lineno, str(exc)))
            continue
        if not delta_e > 0:
            problems.append((lineno, f"transition energy must be positive, got {delta_e}"))
        if strength < 0 or u_strength < 0:
            problems.append((lineno, "strength and its uncertainty must be non-negative"))
        if abs(tb.twice_j - ground.twice_j) > 2 or tb.twice_j + ground.twice_j < 2:
            problems.append((lineno, f"excited j={tb} not E1-connected to ground j={ground}"))
        elif (tb.twice_j - ground.twice_j) % 2:
            problems.append((lineno, f"excited j={tb} differs from ground j={ground} by a half-integer"))
        source = row[5].strip() if len(row) > 5 else ""
        records.append(TransitionRecord(delta_e, kind, strength, u_strength, tb, source))
    if problems:
        raise LineListError(path, problems)

    lines = LineList(species, ground, tuple(records))
    missing = [str(AngMom(tb)) for tb in lines.allowed_b() if not any(r.j_excited.twice_j == tb for r in records)]
    if records and missing:
        warnings.warn(f"{path}: no transitions to excited j in {missing}", stacklevel=2)
    return lines


def bundled_linelist(species: str, constants: Constants | None = None) -> LineList:
    """The published line list for Er or Tm shipped with the package."""
    species = normalize_species(species)
    parts = [parse_linelist(data_path(name), species, constants) for name in BUNDLED[species]]
    out = parts[0]
    for extra in parts[1:]:
        out = out.merged(extra)
    return out


def _hartree(delta_e_cm: float, constants: Constants) -> float:
    if delta_e_cm == 0:
        raise ValueError("zero transition energy")
    return delta_e_cm / constants.hartree_in_cm


def reduced_dipole_sq(rec: TransitionRecord, ground_j: AngMom, constants: Constants | None = None) -> float:
    """|(g j||d/(e a0)||n b)|^2 from an Einstein A or an oscillator strength.

    Uses the symmetric reduced matrix element (j||d||j') = sqrt(2j+1) <j||d||j'>.
    """
    c = constants or load_constants()
    de = _hartree(rec.delta_e, c)
    if rec.strength_kind is StrengthKind.EINSTEIN_A:
        rate = rec.strength * 1e6
        tb = rec.j_excited.twice_j
        return rate * (tb + 1) / (4.0 / 3.0 * c.hartree_over_hbar_per_s * c.fine_structure**3 * de**3)
    return rec.strength * (ground_j.twice_j + 1) * 3.0 / (2.0 * de)


def einstein_a_from_dipole_sq(d_sq: float, delta_e_cm: float, j_excited: AngMom,
                              constants: Constants | None = None) -> float:
    """Einstein A in 1e6 s^-1 for a squared reduced dipole in (e a0)^2."""
    c = constants or load_constants()
    de = _hartree(delta_e_cm, c)
    return 4.0 / 3.0 * c.hartree_over_hbar_per_s * c.fine_structure**3 * de**3 * d_sq / (j_excited.twice_j + 1) / 1e6


def oscillator_f_from_dipole_sq(d_sq: float, delta_e_cm: float, ground_j: AngMom,
                                constants: Constants | None = None) -> float:
    c = constants or load_constants()
    return 2.0 / 3.0 * _hartree(delta_e_cm, c) * d_sq / (ground_j.twice_j + 1)
