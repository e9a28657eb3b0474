"""Physical constants and per-species atomic data.

Values live in ``data/constants.json``; set ``LNDIMER_CONSTANTS`` to a JSON
file with the same layout to override them.  Everything downstream works in
atomic units internally and converts to cm^-1 only at the edges.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

ENV_VAR = "LNDIMER_CONSTANTS"
SPECIES = ("Er", "Tm")


class UnknownSpeciesError(ValueError):
    pass


@dataclass(frozen=True)
class SpeciesData:
    name: str
    twice_j: int
    isotope: str
    mass_da: float
    g_j: float
    quadrupole_ea02: float

    @property
    def j(self) -> float:
        return self.twice_j / 2

    @property
    def epsilon(self) -> int:
        """Exchange sign of the pair states: +1 for integer j, -1 for half-integer."""
        return -1 if self.twice_j % 2 else 1


@dataclass(frozen=True)
class Constants:
    release: str
    hartree_in_cm: float
    fine_structure: float
    hartree_over_hbar_per_s: float
    bohr_radius_nm: float
    electron_masses_per_dalton: float
    species: dict
    source: str

    def atom(self, species: str) -> SpeciesData:
        return self.species[normalize_species(species)]

    def reduced_mass_au(self, species: str) -> float:
        """mu = m/2 in electron masses, using the atomic (not nuclear) mass."""
        return 0.5 * self.atom(species).mass_da * self.electron_masses_per_dalton

    def to_cm(self, energy_hartree):
        return energy_hartree * self.hartree_in_cm

    def to_hartree(self, energy_cm):
        return energy_cm / self.hartree_in_cm

    def as_dict(self) -> dict:
        return {
            "release": self.release,
            "source": self.source,
            "hartree_in_cm": self.hartree_in_cm,
            "fine_structure": self.fine_structure,
            "hartree_over_hbar_per_s": self.hartree_over_hbar_per_s,
            "bohr_radius_nm": self.bohr_radius_nm,
            "electron_masses_per_dalton": self.electron_masses_per_dalton,
            "species": {
                k: {f: getattr(v, f) for f in ("twice_j", "isotope", "mass_da", "g_j", "quadrupole_ea02")}
                for k, v in self.species.items()
            },
        }


def normalize_species(species: str) -> str:
    name = str(species).strip().capitalize()
    if name not in SPECIES:
        raise UnknownSpeciesError(f"unknown species {species!r}; expected one of {SPECIES}")
    return name


def _parse(raw: dict, source: str) -> Constants:
    atoms = {
        name: SpeciesData(name=name, **{k: v for k, v in entry.items()})
        for name, entry in raw["species"].items()
    }
    return Constants(
        release=raw.get("release", "unknown"),
        hartree_in_cm=float(raw["hartree_in_cm"]),
        fine_structure=float(raw["fine_structure"]),
        hartree_over_hbar_per_s=float(raw["hartree_over_hbar_per_s"]),
        bohr_radius_nm=float(raw["bohr_radius_nm"]),
        electron_masses_per_dalton=float(raw["electron_masses_per_dalton"]),
        species=atoms,
        source=source,
    )


@lru_cache(maxsize=8)
def _load(path: str | None) -> Constants:
    if path is None:
        text = resources.files("lndimer").joinpath("data/constants.json").read_text(encoding="utf-8")
        return _parse(json.loads(text), "bundled")
    return _parse(json.loads(Path(path).read_text(encoding="utf-8")), str(path))


def load_constants(path: str | os.PathLike | None = None) -> Constants:
    """Constants from ``path``, else ``$LNDIMER_CONSTANTS``, else the bundled file."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    return _load(None if path is None else str(path))


def data_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    return Path(str(resources.files("lndimer").joinpath("data", name)))


SQRT6 = math.sqrt(6.0)
