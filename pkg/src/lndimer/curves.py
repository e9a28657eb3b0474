"""Strength functions V_k^(i)(R) over all R, in cm^-1 with R in a0.

Tabulated ab initio points are interpolated as R^6 V with an Akima spline,
continued by straight lines below the first node and by dispersion laws at
long range.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import Akima1DInterpolator, CubicSpline
from scipy.optimize import minimize_scalar

from .constants import data_path, load_constants, normalize_species
from .dispersion import DispersionSet, long_range_extras

__all__ = [
    "VALID_RANGE",
    "R_REL",
    "TabulatedCurve",
    "LongRangeLaw",
    "AssembledStrength",
    "CombinedStrength",
    "akima_interpolate",
    "load_table",
    "assemble_spin_stretched",
    "assemble_v2",
    "strength_v0",
    "weak_strength",
    "strength_set",
    "find_minimum",
    "u_spin_stretched",
    "harmonic_constants",
    "OutOfRangeError",
]

VALID_RANGE = (0.5, 1.0e4)
R_REL = 12.5
WEAK = ((0, 2), (2, 2), (0, 3), (2, 3), (4, 1))


class OutOfRangeError(ValueError):
    """Evaluation requested outside the validity range of a curve."""


@dataclass(frozen=True)
class TabulatedCurve:
    r: np.ndarray
    v: np.ndarray
    name: str = ""

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if r.ndim != 1 or r.shape != v.shape:
            raise ValueError("R and V must be 1-d arrays of equal length")
        if len(r) and np.any(np.diff(r) <= 0):
            raise ValueError(f"{self.name}: R must be strictly increasing without duplicates")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{self.name}: non-finite potential values")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)

    @property
    def r_min(self) -> float:
        return float(self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def __len__(self):
        return len(self.r)


def load_table(species: str, which: str) -> TabulatedCurve:
    """Bundled table: ``which`` is 'ss', 'v2' or 'v0'.  Blank cells are skipped."""
    species = normalize_species(species)
    if which == "ss":
        name, col = f"{species.lower()}_vss.csv", "v_cm"
    elif which in ("v2", "v0"):
        name, col = f"{species.lower()}_v2.csv", f"{which}_cm"
    else:
        raise ValueError(f"unknown table {which!r}")
    r, v = [], []
    with data_path(name).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row[col].strip():
                r.append(float(row["r_bohr"]))
                v.append(float(row[col]))
    return TabulatedCurve(np.array(r), np.array(v), f"{species} {which}")


class _Natural:
    """Natural cubic spline with the Akima1DInterpolator calling convention."""

    def __init__(self, x, y):
        self._s = CubicSpline(x, y, bc_type="natural")

    def __call__(self, x, nu=0):
        return self._s(x, nu)


def akima_interpolate(r, y):
    """Akima spline through (r, y); natural cubic (with a warning) below 5 points."""
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(r) < 2:
        raise ValueError("interpolation needs at least 2 points")
    if len(r) < 5:
        warnings.warn(f"only {len(r)} points; using a natural cubic spline instead of Akima", stacklevel=2)
        return _Natural(r, y)
    return Akima1DInterpolator(r, y)


@dataclass(frozen=True)
class LongRangeLaw:
    """sum_n c_n / R^n with coefficients in cm^-1 a0^n, keyed by n."""

    coeffs: dict = field(default_factory=dict)

    def __call__(self, r, nu: int = 0):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for n, c in self.coeffs.items():
            if not c:
                continue
            # d^nu/dR^nu R^-n = (-1)^nu n(n+1)...(n+nu-1) R^-(n+nu)
            fac = math.prod(range(n, n + nu)) * (-1) ** nu
            out = out + c * fac * r ** (-(n + nu))
        return out


def _check_range(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < VALID_RANGE[0]) or np.any(r > VALID_RANGE[1]):
        raise OutOfRangeError(f"R outside the validity range [{VALID_RANGE[0]}, {VALID_RANGE[1]}] a0")
    return r


class _Evaluable:
    def __call__(self, r):
        return self.derivative(r, 0)

    def derivative(self, r, nu: int = 1):
        raise NotImplementedError

    def joins(self) -> list[float]:
        return []


@dataclass(frozen=True, eq=False)
class AssembledStrength(_Evaluable):
    """Piecewise strength: linear below ``r_lo``, spline of R^6 V on [r_lo, r_join], law beyond.

    Without a spline (``nodes`` empty) the long-range law applies everywhere.
    """

    name: str
    law: LongRangeLaw
    nodes_r: np.ndarray = field(default_factory=lambda: np.empty(0))
    nodes_v: np.ndarray = field(default_factory=lambda: np.empty(0))
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nr = np.asarray(self.nodes_r, dtype=float)
        nv = np.asarray(self.nodes_v, dtype=float)
        object.__setattr__(self, "nodes_r", nr)
        object.__setattr__(self, "nodes_v", nv)
        if len(nr):
            object.__setattr__(self, "_spline", akima_interpolate(nr, nr**6 * nv))
            object.__setattr__(self, "_slope", (nv[1] - nv[0]) / (nr[1] - nr[0]))

    @property
    def r_lo(self) -> float:
        return float(self.nodes_r[0]) if len(self.nodes_r) else VALID_RANGE[0]

    @property
    def r_join(self) -> float:
        return float(self.nodes_r[-1]) if len(self.nodes_r) else VALID_RANGE[0]

    def joins(self) -> list[float]:
        return [self.r_lo, self.r_join] if len(self.nodes_r) else []

    def join_mismatch(self) -> dict[float, float]:
        """Right-piece minus left-piece value at each join, evaluated at the join itself."""
        if not len(self.nodes_r):
            return {}
        lo, hi = self.r_lo, self.r_join
        spline_lo = float(self._spline(lo)) / lo**6
        spline_hi = float(self._spline(hi)) / hi**6
        return {lo: spline_lo - float(self.nodes_v[0]), hi: float(self.law(hi)) - spline_hi}

    def derivative(self, r, nu: int = 1):
        scalar = np.ndim(r) == 0
        r = _check_range(np.atleast_1d(r))
        if not len(self.nodes_r):
            out = self.law(r, nu)
            return float(out[0]) if scalar else out
        out = np.empty_like(r)
        lo = r < self.r_lo
        hi = r > self.r_join
        mid = ~(lo | hi)
        if lo.any():
            if nu == 0:
                out[lo] = self.nodes_v[0] + self._slope * (r[lo] - self.r_lo)
            else:
                out[lo] = self._slope if nu == 1 else 0.0
        if hi.any():
            out[hi] = self.law(r[hi], nu)
        if mid.any():
            x = r[mid]
            g = [self._spline(x, d) for d in range(nu + 1)]
            # Leibniz rule for g(R) * R^-6
            acc = np.zeros_like(x)
            for d in range(nu + 1):
                m = nu - d
                acc += math.comb(nu, d) * g[d] * math.prod(range(6, 6 + m)) * (-1) ** m * x ** (-(6 + m))
            if nu == 0:
                # return tabulated values bit-for-bit at the nodes
                pos = np.searchsorted(self.nodes_r, x)
                pos = np.clip(pos, 0, len(self.nodes_r) - 1)
                hit = self.nodes_r[pos] == x
                acc[hit] = self.nodes_v[pos[hit]]
            out[mid] = acc
        return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class CombinedStrength(_Evaluable):
    """Linear combination sum_n a_n f_n(R) of other strengths."""

    name: str
    parts: tuple
    meta: dict = field(default_factory=dict)

    def derivative(self, r, nu: int = 1):
        return sum(a * f.derivative(r, nu) for a, f in self.parts)

    def joins(self) -> list[float]:
        return sorted({x for _, f in self.parts for x in f.joins()})

    def join_mismatch(self) -> dict[float, float]:
        out: dict[float, float] = {}
        for a, f in self.parts:
            for x, d in f.join_mismatch().items():
                out[x] = out.get(x, 0.0) + a * d
        return out


def _dispersion(species: str, dispersion: DispersionSet | None) -> DispersionSet:
    return dispersion if dispersion is not None else DispersionSet.published(species)


def assemble_spin_stretched(species: str, dispersion: DispersionSet | None = None,
                            table: TabulatedCurve | None = None) -> AssembledStrength:
    """V_ss(R).  C8 and C10 are fixed by the two outermost nodes, then the
    dispersion value at R_max + 0.5 a0 is appended before interpolating."""
    species = normalize_species(species)
    c = load_constants()
    disp = _dispersion(species, dispersion)
    table = table if table is not None else load_table(species, "ss")
    if len(table) < 2:
        raise ValueError("spin-stretched table needs at least 2 points")
    c6 = disp.c_ss * c.hartree_in_cm
    (r1, r2), (v1, v2) = table.r[-2:], table.v[-2:]
    # V - C6/R^6 = C8/R^8 + C10/R^10 at the two outermost nodes
    a = np.array([[r1**-8, r1**-10], [r2**-8, r2**-10]])
    b = np.array([v1 - c6 / r1**6, v2 - c6 / r2**6])
    c8, c10 = np.linalg.solve(a, b)
    law = LongRangeLaw({6: c6, 8: float(c8), 10: float(c10)})
    r_disp = table.r_max + 0.5
    nodes_r = np.append(table.r, r_disp)
    nodes_v = np.append(table.v, float(law(r_disp)))
    u_c01 = disp.u.get((0, 1), float("nan")) * c.hartree_in_cm
    meta = {
        "species": species,
        "c6_cm": c6, "c8_cm": float(c8), "c10_cm": float(c10),
        "r_min": table.r_min, "r_max": table.r_max, "r_disp": r_disp,
        "u_model": "u(V_ss) = 2 u(C_0^(1)) / R^6 for R < R_max",
        "u_c01_cm": u_c01,
    }
    return AssembledStrength(f"{species} V_ss", law, nodes_r, nodes_v, meta)


def u_spin_stretched(strength: AssembledStrength, r):
    """Long-range uncertainty model 2 u(C_0^(1)) / R^6 in cm^-1."""
    return 2.0 * strength.meta["u_c01_cm"] / np.asarray(r, dtype=float) ** 6


def assemble_v2(species: str, dispersion: DispersionSet | None = None,
                table: TabulatedCurve | None = None) -> AssembledStrength:
    """V_2^(1)(R): fitted values joined to C_2^(1)/R^6 at R_REL."""
    species = normalize_species(species)
    c = load_constants()
    disp = _dispersion(species, dispersion)
    table = table if table is not None else load_table(species, "v2")
    if len(table) < 2:
        raise ValueError("V2 table needs at least 2 points")
    c21 = disp[(2, 1)] * c.hartree_in_cm
    law = LongRangeLaw({6: c21})
    nodes_r = np.append(table.r, R_REL)
    nodes_v = np.append(table.v, c21 / R_REL**6)
    meta = {"species": species, "c6_cm": c21, "r_rel": R_REL}
    return AssembledStrength(f"{species} V_2^(1)", law, nodes_r, nodes_v, meta)


def strength_v0(species: str, v_ss=None, v2=None, dispersion: DispersionSet | None = None) -> CombinedStrength:
    """V_0^(1) = V_ss - (2j)(2j-1) V_2^(1) / sqrt(6)."""
    species = normalize_species(species)
    tj = load_constants().atom(species).twice_j
    v_ss = v_ss if v_ss is not None else assemble_spin_stretched(species, dispersion)
    v2 = v2 if v2 is not None else assemble_v2(species, dispersion)
    coef = -tj * (tj - 1) / math.sqrt(6.0)
    return CombinedStrength(f"{species} V_0^(1)", ((1.0, v_ss), (coef, v2)), {"species": species})


def weak_strength(k: int, i: int, species: str, dispersion: DispersionSet | None = None) -> AssembledStrength:
    """C/R^6 for the five weak strengths, plus D/R^3 on (2,2) and Q/R^5 on (4,1)."""
    key = (int(k), int(i))
    if key not in WEAK:
        raise ValueError(f"(k, i) = {key} is not one of the weak strengths {WEAK}")
    species = normalize_species(species)
    c = load_constants()
    disp = _dispersion(species, dispersion)
    coeffs = {6: disp[key] * c.hartree_in_cm}
    extras = long_range_extras(species)
    if key == (2, 2):
        coeffs[3] = extras["d2_2"] * c.hartree_in_cm
    elif key == (4, 1):
        coeffs[5] = extras["q4_1"] * c.hartree_in_cm
    return AssembledStrength(f"{species} V_{k}^({i})", LongRangeLaw(coeffs), meta={"species": species})


def strength_set(species: str, model: str = "full", dispersion: DispersionSet | None = None) -> dict:
    """(k, i) -> evaluable strength for the two-tensor or the full seven-term model."""
    if model not in ("two_tensor", "full"):
        raise ValueError(f"model must be 'two_tensor' or 'full', got {model!r}")
    species = normalize_species(species)
    v_ss = assemble_spin_stretched(species, dispersion)
    v2 = assemble_v2(species, dispersion)
    out = {(0, 1): strength_v0(species, v_ss, v2), (2, 1): v2}
    if model == "full":
        for key in WEAK:
            out[key] = weak_strength(*key, species, dispersion)
    return out


def find_minimum(curve, bracket=(7.0, 12.0), samples: int = 501, xtol: float = 1e-6):
    """Unique interior minimum of ``curve`` in ``bracket`` by golden-section search.

    Returns (R_e, V(R_e)).  Raises ValueError if the coarse scan finds no
    interior minimum or more than one.
    """
    grid = np.linspace(*bracket, samples)
    vals = np.asarray(curve(grid))
    inner = np.flatnonzero((vals[1:-1] < vals[:-2]) & (vals[1:-1] <= vals[2:])) + 1
    if len(inner) != 1:
        raise ValueError(f"expected one minimum in {bracket}, found {len(inner)}")
    n = inner[0]
    res = minimize_scalar(lambda x: float(curve(x)), bracket=(grid[n - 1], grid[n], grid[n + 1]),
                          method="golden", tol=xtol / grid[n] / 10)
    return float(res.x), float(res.fun)


def harmonic_constants(curve, species: str, bracket=(7.0, 12.0)) -> dict:
    """R_e, D_e, B_e and the curvature-based omega_e of ``curve`` (cm^-1, a0)."""
    c = load_constants()
    mu = c.reduced_mass_au(species)
    r_e, v_e = find_minimum(curve, bracket)
    curv = float(curve.derivative(r_e, 2)) / c.hartree_in_cm
    b_e = c.hartree_in_cm / (2.0 * mu * r_e**2)
    omega = c.hartree_in_cm * math.sqrt(curv / mu) if curv > 0 else float("nan")
    return {"r_e": r_e, "d_e": -v_e, "b_e": b_e, "omega_e": omega}
